#include "topobar/bifiltration.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace topobar {

std::string_view to_string(PanelMode mode) { return mode == PanelMode::sliced ? "2d" : "1d"; }

PanelMode parse_panel_mode(std::string_view text) {
  if (text == "2d") return PanelMode::sliced;
  if (text == "1d") return PanelMode::intensity_only;
  throw InputError("unknown mode '" + std::string(text) + "' (expected 1d or 2d)");
}

std::string PanelKey::name() const {
  const char i = intensity == Direction::increasing ? 'i' : 'I';
  const std::string tail = std::string(1, i) + "_d" + std::to_string(dim);
  if (slice == 0) return tail;
  const char b = border == Direction::increasing ? 'b' : 'B';
  return "s" + std::to_string(slice) + "_" + b + tail;
}

std::optional<PanelKey> PanelKey::parse(std::string_view name) {
  PanelKey key;
  if (!name.empty() && name.front() == 's') {
    const auto underscore = name.find('_');
    if (underscore == std::string_view::npos || underscore < 2) return std::nullopt;
    const auto* first = name.data() + 1;
    const auto* last = name.data() + underscore;
    auto [ptr, ec] = std::from_chars(first, last, key.slice);
    if (ec != std::errc() || ptr != last || key.slice < 1) return std::nullopt;
    name.remove_prefix(underscore + 1);
    if (name.empty() || (name.front() != 'b' && name.front() != 'B')) return std::nullopt;
    key.border = name.front() == 'b' ? Direction::increasing : Direction::decreasing;
    name.remove_prefix(1);
  }
  if (name.size() != 4 || (name[0] != 'i' && name[0] != 'I') || name.substr(1, 2) != "_d" ||
      (name[3] != '0' && name[3] != '1')) {
    return std::nullopt;
  }
  key.intensity = name[0] == 'i' ? Direction::increasing : Direction::decreasing;
  key.dim = name[3] - '0';
  return key;
}

const Barcode* BarcodePanel::find(const PanelKey& key) const {
  const auto it = std::lower_bound(barcodes.begin(), barcodes.end(), key,
                                   [](const auto& entry, const PanelKey& k) { return entry.first < k; });
  if (it == barcodes.end() || it->first != key) return nullptr;
  return &it->second;
}

const Barcode& BarcodePanel::at(const PanelKey& key) const {
  const Barcode* b = find(key);
  if (!b) throw InputError("panel " + image_id + " has no barcode " + key.name());
  return *b;
}

std::vector<double> slice_thresholds(int n_slices) {
  if (n_slices < 1) throw InputError("slice count must be at least 1");
  std::vector<double> t(static_cast<std::size_t>(n_slices));
  for (int i = 1; i <= n_slices; ++i) t[i - 1] = static_cast<double>(i) / n_slices;
  return t;
}

std::vector<PanelKey> panel_keys(PanelMode mode, int n_slices) {
  std::vector<PanelKey> keys;
  constexpr Direction dirs[] = {Direction::increasing, Direction::decreasing};
  if (mode == PanelMode::intensity_only) {
    for (Direction i : dirs) {
      for (int d = 0; d < 2; ++d) keys.push_back({0, Direction::increasing, i, d});
    }
    return keys;
  }
  for (int s = 1; s <= n_slices; ++s) {
    for (Direction b : dirs) {
      for (Direction i : dirs) {
        for (int d = 0; d < 2; ++d) keys.push_back({s, b, i, d});
      }
    }
  }
  return keys;
}

bool in_slice(double border_dist, double threshold, Direction border) {
  return border == Direction::increasing ? border_dist <= threshold : border_dist >= 1.0 - threshold;
}

namespace {

void add_pair(BarcodePanel& panel, PanelKey key, BarcodePair pair) {
  key.dim = 0;
  panel.barcodes.emplace_back(key, std::move(pair.dim0));
  key.dim = 1;
  panel.barcodes.emplace_back(key, std::move(pair.dim1));
}

void sort_panel(BarcodePanel& panel) {
  std::sort(panel.barcodes.begin(), panel.barcodes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

}  // namespace

BarcodePanel compute_panel(const RoiImage& roi, int n_slices, double cap) {
  const auto thresholds = slice_thresholds(n_slices);
  const SimplicialComplex complex = build_complex(roi);
  const FilteredComplex by_intensity[2] = {filter_complex(complex, roi.intensity, Direction::increasing),
                                           filter_complex(complex, roi.intensity, Direction::decreasing)};
  BarcodePanel panel;
  panel.image_id = roi.source_id;
  panel.mode = PanelMode::sliced;
  panel.slices = n_slices;
  for (int s = 1; s <= n_slices; ++s) {
    const double t = thresholds[s - 1];
    for (Direction b : {Direction::increasing, Direction::decreasing}) {
      const auto keep = [&](VertexId v) { return in_slice(roi.border_dist[v], t, b); };
      for (const FilteredComplex& filtered : by_intensity) {
        add_pair(panel, {s, b, filtered.direction, 0}, compute_barcodes(restrict_complex(filtered, keep), cap));
      }
    }
  }
  sort_panel(panel);
  return panel;
}

BarcodePanel compute_intensity_only(const RoiImage& roi, double cap) {
  const SimplicialComplex complex = build_complex(roi);
  BarcodePanel panel;
  panel.image_id = roi.source_id;
  panel.mode = PanelMode::intensity_only;
  panel.slices = 0;
  for (Direction i : {Direction::increasing, Direction::decreasing}) {
    add_pair(panel, {0, Direction::increasing, i, 0}, compute_barcodes(filter_complex(complex, roi.intensity, i), cap));
  }
  sort_panel(panel);
  return panel;
}

std::string panel_to_json(const BarcodePanel& panel) {
  nlohmann::ordered_json barcodes = nlohmann::ordered_json::object();
  for (const auto& [key, barcode] : panel.barcodes) {
    nlohmann::ordered_json intervals = nlohmann::ordered_json::array();
    for (const Interval& i : barcode.intervals) intervals.push_back({i.birth, i.death});
    barcodes[key.name()] = std::move(intervals);
  }
  nlohmann::ordered_json doc;
  doc["image"] = panel.image_id;
  doc["index"] = panel.index;
  doc["mode"] = std::string(to_string(panel.mode));
  doc["slices"] = panel.slices;
  doc["barcodes"] = std::move(barcodes);
  return doc.dump() + "\n";
}

BarcodePanel panel_from_json(const std::string& text) {
  BarcodePanel panel;
  try {
    const auto doc = nlohmann::json::parse(text);
    panel.image_id = doc.at("image").get<std::string>();
    panel.index = doc.at("index").get<std::size_t>();
    panel.mode = parse_panel_mode(doc.at("mode").get<std::string>());
    panel.slices = doc.at("slices").get<int>();
    for (const auto& [name, intervals] : doc.at("barcodes").items()) {
      const auto key = PanelKey::parse(name);
      if (!key) throw FormatError("bad barcode key '" + name + "'");
      Barcode barcode{key->dim, {}};
      for (const auto& pair : intervals) {
        const Interval i{pair.at(0).get<double>(), pair.at(1).get<double>()};
        if (!(i.birth <= i.death)) throw FormatError("interval with birth after death in " + name);
        barcode.intervals.push_back(i);
      }
      canonicalize(barcode);
      panel.barcodes.emplace_back(*key, std::move(barcode));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("panel JSON: ") + e.what());
  }
  sort_panel(panel);
  const auto expected = panel_keys(panel.mode, panel.slices);
  if (panel.barcodes.size() != expected.size() ||
      !std::equal(expected.begin(), expected.end(), panel.barcodes.begin(),
                  [](const PanelKey& k, const auto& entry) { return k == entry.first; })) {
    throw FormatError("panel " + panel.image_id + " does not hold the expected " + std::to_string(expected.size()) +
                      " barcodes");
  }
  return panel;
}

void write_panel(const std::filesystem::path& path, const BarcodePanel& panel) {
  const std::string text = panel_to_json(panel);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
  if (!out) throw InputError("failed writing " + path.string());
}

BarcodePanel read_panel(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return panel_from_json(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace topobar
