#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mtlw/data/dataset.hpp"

namespace mtlw::data {

struct GenConfig {
  std::size_t n_train = 2000;
  std::size_t n_val = 500;
  std::size_t n_test = 500;
  std::size_t height = 64;
  std::size_t width = 128;
  std::size_t latent_dim = 8;
  double noise_std = 0.1;
  std::uint64_t seed = 0;

  // Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Latent-factor generator. Each sample draws z ~ U[-1, 1]^L and derives
///   emotions = sigmoid(A z)                  A: 10 x L
///   country  = argmax(B z)                   B rows: u, -u, v, -v with u, v orthonormal
///   age      = 29.5 + 9.5 tanh(c . z)
///   features = sum_j z_j P_j + N(0, noise_std^2)
/// where P_j(h, w) = sin(pi (j+1) (h+0.5) / H) * (1 + 0.5 cos(2 pi (j+1) (w+0.5) / W)).
/// The vertical profile carries the sign of z_j, so it survives time-axis crops.
class SyntheticGenerator {
 public:
  explicit SyntheticGenerator(const GenConfig& config);

  const GenConfig& config() const noexcept { return config_; }

  EmotionVector emotions(std::span<const double> z) const;
  int country(std::span<const double> z) const;
  double age(std::span<const double> z) const;
  // Noise-free feature grid for z.
  std::vector<double> clean_features(std::span<const double> z) const;

  const std::vector<double>& pattern(std::size_t j) const { return patterns_.at(j); }

 private:
  GenConfig config_;
  std::vector<double> a_;  // 10 x L
  std::vector<double> b_;  // 4 x L
  std::vector<double> c_;  // L
  std::vector<std::vector<double>> patterns_;
};

struct SyntheticData {
  DatasetManifest manifest;
  Dataset dataset;
  std::vector<std::vector<double>> latents;  // per sample, manifest order
};

// Pure in-memory generation; feature values are rounded to float32 exactly as
// they would be stored on disk.
SyntheticData synthesize(const GenConfig& config);

// Writes <out_dir>/manifest.csv and <out_dir>/features/<sample_id>.mtlf.
DatasetManifest generate_synthetic(const GenConfig& config, const std::filesystem::path& out_dir);

}  // namespace mtlw::data
