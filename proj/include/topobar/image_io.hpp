#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "topobar/errors.hpp"

namespace topobar {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;  // row-major, raw intensities

  double at(int row, int col) const { return values[static_cast<std::size_t>(row) * width + col]; }
};

// Lesion pixels of an image. Construct through make_mask / load_mask so the
// single-component invariant is checked.
struct LesionMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> inside;

  bool at(int row, int col) const { return inside[static_cast<std::size_t>(row) * width + col] != 0; }
  std::size_t count() const;
};

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

// Lesion plus healthy ring, with both vertex functions normalized to [0,1].
// pixels are in row-major order; index i of pixels, intensity, border_dist
// and in_lesion all refer to the same pixel.
struct RoiImage {
  std::string source_id;
  int image_width = 0;
  int image_height = 0;
  std::vector<Pixel> pixels;
  std::vector<double> intensity;
  std::vector<double> border_dist;
  std::vector<std::uint8_t> in_lesion;

  std::size_t size() const { return pixels.size(); }
  // ROI index of (row, col), or -1 when the pixel is outside the ROI.
  long index_of(int row, int col) const;

 private:
  friend RoiImage extract_roi(const GrayImage&, const LesionMask&, int, std::string);
  std::vector<long> lookup_;
};

struct DatasetEntry {
  std::size_t id = 0;
  std::filesystem::path image;
  std::filesystem::path mask;
  std::string label;
};

struct LabeledDataset {
  std::vector<DatasetEntry> entries;

  std::size_t size() const { return entries.size(); }
  // Distinct labels in order of first appearance.
  std::vector<std::string> classes() const;
};

inline constexpr int kDefaultBorderWidth = 5;

// PGM (P2/P5) or CSV numeric grid, chosen by content.
GrayImage load_image(const std::filesystem::path& path);
GrayImage parse_pgm(const std::string& bytes);
GrayImage parse_csv_grid(const std::string& text);

LesionMask make_mask(int width, int height, std::vector<std::uint8_t> inside);
LesionMask mask_from_image(const GrayImage& img);
LesionMask load_mask(const std::filesystem::path& path);

RoiImage extract_roi(const GrayImage& img, const LesionMask& mask, int border_width = kDefaultBorderWidth,
                     std::string source_id = {});

LabeledDataset load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const LabeledDataset& dataset);

// Writes binary PGM; values are rounded and must fit in [0, maxval].
void write_pgm(const std::filesystem::path& path, const GrayImage& img, int maxval = 255);
void write_mask_pgm(const std::filesystem::path& path, const LesionMask& mask);

// Min-max rescale to [0,1]; a constant input maps to all zeros.
std::vector<double> normalize_unit(const std::vector<double>& values);

}  // namespace topobar
