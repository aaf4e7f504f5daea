#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "topobar/complex.hpp"
#include "topobar/persistence.hpp"

namespace topobar {

inline constexpr int kDefaultSlices = 20;

enum class PanelMode : std::uint8_t { intensity_only, sliced };

std::string_view to_string(PanelMode mode);  // "1d" / "2d"
PanelMode parse_panel_mode(std::string_view text);

// One barcode of a panel. slice is 1..n for sliced panels and 0 for the
// intensity-only baseline, whose keys carry no border direction.
struct PanelKey {
  int slice = 0;
  Direction border = Direction::increasing;
  Direction intensity = Direction::increasing;
  int dim = 0;

  // "s{slice}_{b|B}{i|I}_d{dim}", lowercase for increasing; the baseline
  // drops the slice and border parts: "{i|I}_d{dim}".
  std::string name() const;
  static std::optional<PanelKey> parse(std::string_view name);

  friend auto operator<=>(const PanelKey&, const PanelKey&) = default;
};

struct BarcodePanel {
  std::string image_id;
  std::size_t index = 0;  // position in the source manifest
  PanelMode mode = PanelMode::sliced;
  int slices = kDefaultSlices;
  std::vector<std::pair<PanelKey, Barcode>> barcodes;  // sorted by key

  std::size_t size() const { return barcodes.size(); }
  const Barcode& at(const PanelKey& key) const;
  const Barcode* find(const PanelKey& key) const;
};

// t_i = i / n for i = 1..n.
std::vector<double> slice_thresholds(int n_slices = kDefaultSlices);

// All keys of a panel in canonical order (160 for the default sliced panel).
std::vector<PanelKey> panel_keys(PanelMode mode, int n_slices = kDefaultSlices);

// Vertex predicate of slice i: border_dist <= t_i for the increasing border
// direction, border_dist >= 1 - t_i for the decreasing one.
bool in_slice(double border_dist, double threshold, Direction border);

BarcodePanel compute_panel(const RoiImage& roi, int n_slices = kDefaultSlices, double cap = kDefaultCap);
BarcodePanel compute_intensity_only(const RoiImage& roi, double cap = kDefaultCap);

std::string panel_to_json(const BarcodePanel& panel);
BarcodePanel panel_from_json(const std::string& text);
void write_panel(const std::filesystem::path& path, const BarcodePanel& panel);
BarcodePanel read_panel(const std::filesystem::path& path);

}  // namespace topobar
