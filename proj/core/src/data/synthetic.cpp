#include "mtlw/data/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mtlw/data/feature_file.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::data {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string sample_id(std::size_t i) {
  std::string digits = std::to_string(i);
  return "s" + std::string(digits.size() < 6 ? 6 - digits.size() : 0, '0') + digits;
}

}  // namespace

void GenConfig::validate() const {
  if (n_train == 0) throw ConfigError("n_train", "must be positive");
  if (n_val == 0) throw ConfigError("n_val", "must be positive");
  if (n_test == 0) throw ConfigError("n_test", "must be positive");
  if (height == 0) throw ConfigError("H", "must be positive");
  if (width == 0) throw ConfigError("W", "must be positive");
  if (latent_dim == 0) throw ConfigError("latent_dim", "must be positive");
  if (!std::isfinite(noise_std) || noise_std < 0.0) throw ConfigError("noise_std", "must be finite and >= 0");
}

SyntheticGenerator::SyntheticGenerator(const GenConfig& config) : config_(config) {
  config_.validate();
  const std::size_t L = config_.latent_dim;
  // Unit output variance for A z and c . z when z ~ U[-1, 1]^L.
  const double scale = std::sqrt(3.0 / static_cast<double>(L));

  auto rng = stream(config_.seed, 0x6d6f646cu);
  a_ = gaussian_vector(rng, net::kEmotionDims * L, scale);
  c_ = gaussian_vector(rng, L, scale);

  // Gram-Schmidt pair u, v; opposite rows make the four argmax regions symmetric.
  std::vector<double> u = gaussian_vector(rng, L, 1.0);
  std::vector<double> v = gaussian_vector(rng, L, 1.0);
  const double nu = std::sqrt(dot(u, u));
  for (double& x : u) x /= nu;
  if (L > 1) {
    const double p = dot(u, v);
    for (std::size_t i = 0; i < L; ++i) v[i] -= p * u[i];
    const double nv = std::sqrt(dot(v, v));
    for (double& x : v) x /= nv;
  }
  b_.clear();
  for (double x : u) b_.push_back(x);
  for (double x : u) b_.push_back(-x);
  for (double x : v) b_.push_back(x);
  for (double x : v) b_.push_back(-x);

  const std::size_t H = config_.height, W = config_.width;
  const double pi = std::numbers::pi;
  patterns_.resize(L);
  for (std::size_t j = 0; j < L; ++j) {
    const double f = static_cast<double>(j + 1);
    std::vector<double>& p = patterns_[j];
    p.resize(H * W);
    for (std::size_t h = 0; h < H; ++h) {
      const double row = std::sin(pi * f * (static_cast<double>(h) + 0.5) / static_cast<double>(H));
      for (std::size_t w = 0; w < W; ++w) {
        const double col = 1.0 + 0.5 * std::cos(2.0 * pi * f * (static_cast<double>(w) + 0.5) / static_cast<double>(W));
        p[h * W + w] = row * col;
      }
    }
  }
}

EmotionVector SyntheticGenerator::emotions(std::span<const double> z) const {
  const std::size_t L = config_.latent_dim;
  EmotionVector e{};
  for (std::size_t d = 0; d < net::kEmotionDims; ++d) {
    const double x = dot(std::span<const double>(a_).subspan(d * L, L), z);
    e[d] = 1.0 / (1.0 + std::exp(-x));
  }
  return e;
}

int SyntheticGenerator::country(std::span<const double> z) const {
  const std::size_t L = config_.latent_dim;
  int best = 0;
  double best_score = 0.0;
  for (std::size_t k = 0; k < net::kNumCountries; ++k) {
    const double score = dot(std::span<const double>(b_).subspan(k * L, L), z);
    if (k == 0 || score > best_score) {
      best = static_cast<int>(k);
      best_score = score;
    }
  }
  return best;
}

double SyntheticGenerator::age(std::span<const double> z) const { return 29.5 + 9.5 * std::tanh(dot(c_, z)); }

std::vector<double> SyntheticGenerator::clean_features(std::span<const double> z) const {
  std::vector<double> x(config_.height * config_.width, 0.0);
  for (std::size_t j = 0; j < config_.latent_dim; ++j) {
    const std::vector<double>& p = patterns_[j];
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += z[j] * p[i];
  }
  return x;
}

SyntheticData synthesize(const GenConfig& config) {
  const SyntheticGenerator gen(config);
  auto rng = stream(config.seed, 0x73616d70u);
  std::uniform_real_distribution<double> latent(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  DatasetManifest manifest;
  std::vector<Sample> samples;
  std::vector<Split> splits;
  std::vector<std::vector<double>> latents;

  const std::pair<Split, std::size_t> plan[] = {
      {Split::kTrain, config.n_train}, {Split::kVal, config.n_val}, {Split::kTest, config.n_test}};
  std::size_t next_id = 0;
  for (const auto& [split, count] : plan) {
    for (std::size_t n = 0; n < count; ++n) {
      std::vector<double> z(config.latent_dim);
      for (double& v : z) v = latent(rng);
      const std::vector<double> clean = gen.clean_features(z);
      std::vector<float> features(clean.size());
      for (std::size_t i = 0; i < clean.size(); ++i) {
        const double eps = config.noise_std > 0.0 ? config.noise_std * noise(rng) : 0.0;
        features[i] = static_cast<float>(clean[i] + eps);
      }

      ManifestEntry e;
      e.sample_id = sample_id(next_id++);
      e.split = split;
      e.emotions = gen.emotions(z);
      e.country = gen.country(z);
      e.age = gen.age(z);
      e.feature_file = "features/" + e.sample_id + ".mtlf";

      samples.push_back({e.sample_id, std::move(features), e.emotions, e.country, e.age});
      splits.push_back(split);
      manifest.entries.push_back(std::move(e));
      latents.push_back(std::move(z));
    }
  }
  return {std::move(manifest), Dataset(config.height, config.width, std::move(samples), std::move(splits)),
          std::move(latents)};
}

DatasetManifest generate_synthetic(const GenConfig& config, const std::filesystem::path& out_dir) {
  SyntheticData data = synthesize(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "features", ec);
  if (ec) throw IoError("cannot create " + (out_dir / "features").string() + ": " + ec.message());
  for (std::size_t i = 0; i < data.dataset.size(); ++i) {
    const Sample& s = data.dataset.sample(i);
    write_feature_file(out_dir / data.manifest.entries[i].feature_file, config.height, config.width, s.features);
  }
  write_manifest(out_dir / "manifest.csv", data.manifest);
  return std::move(data.manifest);
}

}  // namespace mtlw::data
