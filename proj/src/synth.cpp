#include "topobar/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace topobar {

std::string_view to_string(SynthClass c) {
  switch (c) {
    case SynthClass::cystlike:
      return "cystlike";
    case SynthClass::hemangiomalike:
      return "hemangiomalike";
    case SynthClass::metastasislike:
      return "metastasislike";
  }
  return "?";
}

SynthClass parse_synth_class(std::string_view text) {
  for (auto c : {SynthClass::cystlike, SynthClass::hemangiomalike, SynthClass::metastasislike}) {
    if (to_string(c) == text) return c;
  }
  throw InputError("unknown synthetic class '" + std::string(text) + "'");
}

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

int SplitMix64::uniform_int(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next() % span);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::gaussian() {
  std::int64_t sum = 0;
  for (int k = 0; k < 12; ++k) sum += static_cast<std::int64_t>(next() >> 40);
  return static_cast<double>(sum - 6 * (std::int64_t{1} << 24)) * 0x1.0p-24;
}

namespace {

constexpr double kHealthy = 0.55;
constexpr double kDark = 0.2;
constexpr double kCore = 0.45;  // speckles stay within this elliptical radius
constexpr int kPad = 9;  // healthy ring plus margin on every side

struct Vec {
  double x = 0, y = 0;
};

// Unit directions of k evenly spaced blobs, k in 2..4.
std::vector<Vec> spread_directions(int k) {
  constexpr double h = 0.86602540378443864676;  // sqrt(3)/2
  switch (k) {
    case 2:
      return {{1, 0}, {-1, 0}};
    case 3:
      return {{1, 0}, {-0.5, h}, {-0.5, -h}};
    default:
      return {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  }
}

Vec rotate(Vec v, Vec by) { return {v.x * by.x - v.y * by.y, v.x * by.y + v.y * by.x}; }

// Random unit vector from an integer direction; only sqrt is involved.
Vec random_direction(SplitMix64& rng) {
  while (true) {
    const int dx = rng.uniform_int(-64, 64), dy = rng.uniform_int(-64, 64);
    const double len2 = double(dx) * dx + double(dy) * dy;
    if (len2 < 256.0 || len2 > 4096.0) continue;
    const double len = std::sqrt(len2);
    return {dx / len, dy / len};
  }
}

}  // namespace

SynthSample generate(const SynthSpec& spec) {
  if (spec.min_diameter < 8 || spec.max_diameter < spec.min_diameter) {
    throw InputError("synthetic lesion diameter range must satisfy 8 <= min <= max");
  }
  if (!(spec.noise >= 0.0 && spec.noise <= 0.5)) throw InputError("synthetic noise must lie in [0, 0.5]");

  SplitMix64 rng(spec.seed);
  const int diameter = rng.uniform_int(spec.min_diameter, spec.max_diameter);
  const double semi_major = diameter / 2.0;
  const double semi_minor = semi_major * rng.uniform_int(700, 1000) / 1000.0;
  const Vec axis = random_direction(rng);
  const Vec minor_axis{-axis.y, axis.x};
  const int size = diameter + 2 * kPad;
  const double centre = (size - 1) / 2.0;

  // Squared normalized elliptical radius of a pixel; <= 1 inside the lesion.
  const auto radius2 = [&](double r, double c) {
    const Vec p{c - centre, r - centre};
    const double u = (p.x * axis.x + p.y * axis.y) / semi_major;
    const double v = (p.x * minor_axis.x + p.y * minor_axis.y) / semi_minor;
    return u * u + v * v;
  };

  SynthSample out;
  out.label = std::string(to_string(spec.cls));
  std::vector<double> clean(static_cast<std::size_t>(size) * size, kHealthy);
  std::vector<std::uint8_t> inside(clean.size(), 0);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      if (radius2(r, c) <= 1.0) {
        inside[static_cast<std::size_t>(r) * size + c] = 1;
        clean[static_cast<std::size_t>(r) * size + c] = kDark;
      }
    }
  }

  if (spec.cls == SynthClass::hemangiomalike) {
    out.blobs = rng.uniform_int(2, 4);
    const double level = rng.uniform_int(750, 950) / 1000.0;
    const Vec turn = random_direction(rng);
    const double blob_radius = std::max(1.6, 0.2 * semi_minor);
    for (Vec d : spread_directions(out.blobs)) {
      d = rotate(d, turn);
      // Distance to the ellipse boundary along d, then 65% of the way out.
      const double du = (d.x * axis.x + d.y * axis.y) / semi_major;
      const double dv = (d.x * minor_axis.x + d.y * minor_axis.y) / semi_minor;
      const double reach = 0.65 / std::sqrt(du * du + dv * dv);
      const Vec at{centre + reach * d.x, centre + reach * d.y};
      for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
          const double dx = c - at.x, dy = r - at.y;
          const std::size_t p = static_cast<std::size_t>(r) * size + c;
          if (inside[p] && dx * dx + dy * dy <= blob_radius * blob_radius) clean[p] = level;
        }
      }
    }
  } else if (spec.cls == SynthClass::metastasislike) {
    // Small plus-shaped speckles scattered through the lesion core.
    const int count = rng.uniform_int(2, 5);
    const double level = rng.uniform_int(600, 900) / 1000.0;
    for (int placed = 0, tries = 0; placed < count && tries < 1000; ++tries) {
      const int r = rng.uniform_int(0, size - 1), c = rng.uniform_int(0, size - 1);
      if (radius2(r, c) > kCore * kCore) continue;
      for (auto [dr, dc] : {std::pair{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        clean[static_cast<std::size_t>(r + dr) * size + (c + dc)] = level;
      }
      ++placed;
    }
  }

  out.image.width = out.image.height = size;
  out.image.values.resize(clean.size());
  for (std::size_t p = 0; p < clean.size(); ++p) {
    const double noisy = spec.noise > 0 ? clean[p] + spec.noise * rng.gaussian() : clean[p];
    out.image.values[p] = std::floor(std::clamp(noisy, 0.0, 1.0) * 255.0 + 0.5);
  }
  out.mask = make_mask(size, size, std::move(inside));
  return out;
}

LabeledDataset generate_dataset(const std::filesystem::path& dir, const SynthDatasetOptions& options) {
  if (options.per_class < 1) throw InputError("need at least one image per class");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw InputError("cannot create directory " + dir.string());

  constexpr SynthClass classes[] = {SynthClass::cystlike, SynthClass::hemangiomalike, SynthClass::metastasislike};
  LabeledDataset ds;
  std::size_t index = 0;
  for (int i = 0; i < options.per_class; ++i) {
    for (SynthClass cls : classes) {
      SynthSpec spec{cls, options.min_diameter, options.max_diameter, options.noise, options.seed ^ index};
      const SynthSample sample = generate(spec);
      char stem[32];
      std::snprintf(stem, sizeof stem, "%03zu.pgm", index);
      DatasetEntry e{index, dir / ("img_" + std::string(stem)), dir / ("mask_" + std::string(stem)), sample.label};
      write_pgm(e.image, sample.image, 255);
      write_mask_pgm(e.mask, sample.mask);
      ds.entries.push_back(std::move(e));
      ++index;
    }
  }
  write_manifest(dir / "manifest.csv", ds);
  return ds;
}

}  // namespace topobar
