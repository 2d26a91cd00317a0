#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tical {

struct SyntheticSpec {
  std::size_t n_classes = 7;
  std::array<std::size_t, 3> dims{32, 16, 16};  // language, visual, acoustic
  double separation = 4.0;  // minimum Euclidean distance between class prototypes
  double noise = 0.5;       // per-coordinate Gaussian sigma
  double p_conflict = 0.3;
  std::size_t n_samples = 6000;
  std::uint64_t seed = 1;
  std::array<double, 3> split{0.7, 0.1, 0.2};  // train / val / test

  void validate() const;
};

struct SampleRecord {
  std::array<std::vector<double>, 3> x;  // l, v, a raw features
  std::size_t label = 0;                 // unified label (= language generating class)
  std::array<std::size_t, 3> gen_labels{};

  bool conflict() const { return gen_labels[0] != gen_labels[1] || gen_labels[0] != gen_labels[2]; }
  bool operator==(const SampleRecord&) const = default;
};

struct Dataset {
  std::size_t n_classes = 0;
  std::array<std::size_t, 3> dims{};
  std::vector<SampleRecord> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;
};

struct GeneratedData {
  Dataset train;
  Dataset val;
  Dataset test;
  // prototypes[m][c] is the class-c mean of modality m.
  std::array<std::vector<std::vector<double>>, 3> prototypes;
};

// Gaussian class clusters with optional conflict injection on the visual or
// acoustic modality. Feature values are rounded to 32-bit floats so that the
// binary file format round-trips exactly.
GeneratedData generate(const SyntheticSpec& spec);

enum class Subset { kAll, kConflict, kConsistent };
Subset parse_subset(const std::string& name);
Dataset filter(const Dataset& data, Subset subset);

// Binary "TICD" container, see README ("Dataset files").
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_dataset(const Dataset& data);
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);

// CSV with header: label,gen_l,gen_v,gen_a,l0..,v0..,a0..
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, std::size_t n_classes,
                         std::array<std::size_t, 3> dims);

std::string format_manifest(const SyntheticSpec& spec);

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size);

}  // namespace tical
