// Shared fixtures and independent reference implementations for the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "topobar/complex.hpp"
#include "topobar/image_io.hpp"
#include "topobar/persistence.hpp"

namespace testing {

using topobar::Barcode;
using topobar::GrayImage;
using topobar::Interval;
using topobar::LesionMask;

inline GrayImage image_from(int w, int h, std::vector<double> values) { return {w, h, std::move(values)}; }

inline LesionMask full_mask(int w, int h) {
  return topobar::make_mask(w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 1));
}

// Random 8-connected mask grown from a seed pixel.
inline LesionMask random_mask(std::mt19937_64& rng, int w, int h) {
  std::vector<std::uint8_t> in(static_cast<std::size_t>(w) * h, 0);
  std::uniform_int_distribution<int> rr(0, h - 1), cc(0, w - 1);
  in[static_cast<std::size_t>(rr(rng)) * w + cc(rng)] = 1;
  const int target = std::uniform_int_distribution<int>(1, w * h)(rng);
  for (int grown = 1, tries = 0; grown < target && tries < 20 * w * h; ++tries) {
    const int r = rr(rng), c = cc(rng);
    if (in[static_cast<std::size_t>(r) * w + c]) continue;
    bool touches = false;
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        const int nr = r + dr, nc = c + dc;
        if (nr >= 0 && nr < h && nc >= 0 && nc < w && in[static_cast<std::size_t>(nr) * w + nc]) touches = true;
      }
    }
    if (touches) {
      in[static_cast<std::size_t>(r) * w + c] = 1;
      ++grown;
    }
  }
  return topobar::make_mask(w, h, std::move(in));
}

// Random image with few gray levels so that ties are common.
inline GrayImage random_image(std::mt19937_64& rng, int w, int h, int levels = 6) {
  std::uniform_int_distribution<int> v(0, levels - 1);
  GrayImage img{w, h, {}};
  for (int i = 0; i < w * h; ++i) img.values.push_back(v(rng));
  return img;
}

inline topobar::RoiImage random_roi(std::mt19937_64& rng, int max_side = 8) {
  std::uniform_int_distribution<int> side(1, max_side), border(0, 2);
  const int w = side(rng), h = side(rng);
  return topobar::extract_roi(random_image(rng, w, h), random_mask(rng, w, h), border(rng));
}

inline Barcode random_barcode(std::mt19937_64& rng, int max_intervals, int dim = 0) {
  Barcode b{dim, {}};
  const int n = std::uniform_int_distribution<int>(0, max_intervals)(rng);
  // Values on a coarse grid produce shared endpoints and exact duplicates.
  std::uniform_int_distribution<int> grid(0, 11);
  for (int i = 0; i < n; ++i) {
    int a = grid(rng), c = grid(rng);
    while (a == c) c = grid(rng);
    if (a > c) std::swap(a, c);
    b.intervals.push_back({a / 10.0, c / 10.0});
  }
  std::sort(b.intervals.begin(), b.intervals.end());
  return b;
}

inline Barcode random_real_barcode(std::mt19937_64& rng, int max_intervals, int dim = 0) {
  Barcode b{dim, {}};
  const int n = std::uniform_int_distribution<int>(0, max_intervals)(rng);
  std::uniform_real_distribution<double> u(0.0, 1.1);
  for (int i = 0; i < n; ++i) {
    double a = u(rng), c = u(rng);
    if (a > c) std::swap(a, c);
    if (a == c) continue;
    b.intervals.push_back({a, c});
  }
  std::sort(b.intervals.begin(), b.intervals.end());
  return b;
}

// Distinct entry values of a filtered complex, ascending.
inline std::vector<double> distinct_entries(const topobar::FilteredComplex& k) {
  std::vector<double> t = k.entry;
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("topobar_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::string out;
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (!f) return out;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, f)) > 0;) out.append(buf, n);
  std::fclose(f);
  return out;
}

// 3x3 image: ring of zeros around a bright center.
inline topobar::RoiImage ring_roi() {
  return topobar::extract_roi(image_from(3, 3, {0, 0, 0, 0, 9, 0, 0, 0, 0}), full_mask(3, 3), 0);
}

}  // namespace testing
