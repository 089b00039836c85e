#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlw/autodiff/tensor.hpp"
#include "mtlw/net/multi_exit_net.hpp"

namespace mtlw::data {

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split split);
std::optional<Split> parse_split(std::string_view name);

using EmotionVector = std::array<double, net::kEmotionDims>;

struct ManifestEntry {
  std::string sample_id;
  Split split = Split::kTrain;
  EmotionVector emotions{};
  int country = 0;
  double age = 0.0;
  std::string feature_file;  // relative to the manifest's directory

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
};

// CSV: sample_id,split,emo_0..emo_9,country,age,feature_file
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct Sample {
  std::string sample_id;
  std::vector<float> features;  // 1 x H x W, row-major
  EmotionVector emotions{};     // in [0, 1]
  int country = 0;              // 0..3
  double age = 0.0;             // years
};

/// Validated, immutable in-memory dataset.
class Dataset {
 public:
  Dataset(std::size_t height, std::size_t width, std::vector<Sample> samples, std::vector<Split> splits);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const Sample& sample(std::size_t i) const { return samples_.at(i); }
  const std::vector<std::size_t>& indices(Split split) const;

 private:
  std::size_t height_, width_;
  std::vector<Sample> samples_;
  std::array<std::vector<std::size_t>, 3> split_indices_;
};

/// Loads and validates a manifest plus every feature file it references.
/// Errors are LoadError and name the offending sample_id.
Dataset load_dataset(const std::filesystem::path& manifest_path);

struct BatchPlan {
  std::vector<std::size_t> indices;  // dataset sample indices
  std::vector<std::size_t> offsets;  // time-axis crop offset per sample
};

/// Splits `split` into batches. Training batches are shuffled and cropped at
/// random offsets drawn from (seed, epoch); validation and test batches keep
/// manifest order and crop at floor((W - crop_width) / 2). The final short
/// batch is kept.
std::vector<BatchPlan> batches(const Dataset& dataset, Split split, std::size_t batch_size, std::uint64_t seed,
                               std::size_t crop_width, std::size_t epoch = 0);

struct Batch {
  ad::Tensor features;                // [B x 1 x H x crop_width]
  std::vector<double> emotions;       // [B x 10]
  std::vector<int> countries;         // [B]
  std::vector<double> ages;           // [B], years
  std::vector<std::size_t> indices;   // dataset sample indices
};

Batch make_batch(const Dataset& dataset, const BatchPlan& plan, std::size_t crop_width);

}  // namespace mtlw::data
