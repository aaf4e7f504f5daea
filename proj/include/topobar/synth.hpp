#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "topobar/image_io.hpp"

namespace topobar {

enum class SynthClass : std::uint8_t { cystlike, hemangiomalike, metastasislike };

std::string_view to_string(SynthClass c);
SynthClass parse_synth_class(std::string_view text);

struct SynthSpec {
  SynthClass cls = SynthClass::cystlike;
  int min_diameter = 14;  // lesion major axis, pixels
  int max_diameter = 24;
  double noise = 0.1;  // Gaussian sigma on the [0,1] intensity scale
  std::uint64_t seed = 0;
};

struct SynthSample {
  GrayImage image;  // 8-bit values 0..255
  LesionMask mask;
  std::string label;
  int blobs = 0;  // bright peripheral blobs drawn (hemangiomalike only)
};

// Deterministic: the same spec gives byte-identical output on every
// platform (integer noise generator, no transcendental functions).
SynthSample generate(const SynthSpec& spec);

struct SynthDatasetOptions {
  int per_class = 20;
  std::uint64_t seed = 1;
  double noise = 0.1;
  int min_diameter = 14;
  int max_diameter = 24;
};

// Writes img_NNN.pgm, mask_NNN.pgm and manifest.csv under `dir`; classes
// are interleaved and image i uses seed ^ i.
LabeledDataset generate_dataset(const std::filesystem::path& dir, const SynthDatasetOptions& options);

// SplitMix64 stream with integer-derived uniform and Gaussian draws.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  // Uniform in [lo, hi].
  int uniform_int(int lo, int hi);
  // Multiple of 2^-53 in [0, 1).
  double uniform();
  // Irwin-Hall sum of twelve 24-bit draws minus six: mean 0, variance 1.
  double gaussian();

 private:
  std::uint64_t state_;
};

}  // namespace topobar
