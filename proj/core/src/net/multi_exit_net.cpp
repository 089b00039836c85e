#include "mtlw/net/multi_exit_net.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mtlw/autodiff/ops.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::net {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// He-uniform weights drawn from a stream keyed by (seed, parameter name).
ad::Tensor he_uniform(ad::Shape shape, std::size_t fan_in, std::uint64_t seed, std::string_view name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(name)), static_cast<std::uint32_t>(fnv1a(name) >> 32)};
  std::mt19937_64 rng(seq);
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(ad::shape_size(shape));
  for (double& v : values) v = dist(rng);
  return ad::Tensor::from(std::move(shape), std::move(values), true);
}

ad::Tensor zero_bias(std::size_t n) { return ad::Tensor::zeros({n}, true); }

}  // namespace

void ExitAssignment::validate() const {
  const auto check = [](int v, const char* name) {
    if (v < 1 || v > kNumBlocks) {
      throw StructuralError(std::string(name) + " must be in [1, 5], got " + std::to_string(v));
    }
  };
  check(age_exit, "age_exit");
  check(country_exit, "country_exit");
  check(emotion_exit, "emotion_exit");
}

int ExitAssignment::deepest() const { return std::max({age_exit, country_exit, emotion_exit}); }

std::string ExitAssignment::to_string() const {
  return "(" + std::to_string(age_exit) + "," + std::to_string(country_exit) + "," + std::to_string(emotion_exit) +
         ")";
}

void NetConfig::validate() const {
  exits.validate();
  if (input_channels == 0) throw StructuralError("input_channels must be positive");
  if (head_hidden == 0) throw StructuralError("head_hidden must be positive");
  for (std::size_t c : block_channels) {
    if (c == 0) throw StructuralError("block channel widths must be positive");
  }
  std::size_t h = input_height, w = input_width;
  for (int block = 1; block <= exits.deepest(); ++block) {
    if (h < 2 || w < 2) {
      throw StructuralError("block " + std::to_string(block) + ": input " + std::to_string(h) + "x" +
                            std::to_string(w) + " underflows 2x2 max pooling (need each dim >= 2^" +
                            std::to_string(exits.deepest()) + ")");
    }
    h /= 2;
    w /= 2;
  }
}

MultiExitNet::MultiExitNet(NetConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.validate();

  const auto add = [this](std::string name, ad::Tensor t) {
    params_.push_back({std::move(name), t});
    return t;
  };

  std::size_t in_ch = config_.input_channels;
  for (int b = 0; b < kNumBlocks; ++b) {
    const std::size_t out_ch = config_.block_channels[b];
    const std::string prefix = "block" + std::to_string(b + 1);
    Block& blk = blocks_[b];
    blk.w1 = add(prefix + ".conv1.weight", he_uniform({out_ch, in_ch, 3, 3}, in_ch * 9, seed, prefix + ".conv1.weight"));
    blk.b1 = add(prefix + ".conv1.bias", zero_bias(out_ch));
    blk.w2 = add(prefix + ".conv2.weight",
                 he_uniform({out_ch, out_ch, 3, 3}, out_ch * 9, seed, prefix + ".conv2.weight"));
    blk.b2 = add(prefix + ".conv2.bias", zero_bias(out_ch));
    in_ch = out_ch;
  }

  const auto make_head = [&](const std::string& task, int exit, std::size_t outputs) {
    const std::size_t in = config_.block_channels[exit - 1];
    const std::size_t hidden = config_.head_hidden;
    const std::string prefix = "head." + task;
    Head h;
    h.w1 = add(prefix + ".fc1.weight", he_uniform({in, hidden}, in, seed, prefix + ".fc1.weight"));
    h.b1 = add(prefix + ".fc1.bias", zero_bias(hidden));
    h.w2 = add(prefix + ".fc2.weight", he_uniform({hidden, outputs}, hidden, seed, prefix + ".fc2.weight"));
    h.b2 = add(prefix + ".fc2.bias", zero_bias(outputs));
    return h;
  };
  emotion_head_ = make_head("emotion", config_.exits.emotion_exit, kEmotionDims);
  country_head_ = make_head("country", config_.exits.country_exit, kNumCountries);
  age_head_ = make_head("age", config_.exits.age_exit, 1);
}

ad::Tensor MultiExitNet::run_head(ad::Tape& tape, const Head& head, const ad::Tensor& features) const {
  ad::Tensor x = ad::global_avg_pool(tape, features);
  x = ad::relu(tape, ad::bias_add(tape, ad::matmul(tape, x, head.w1), head.b1, 1));
  return ad::bias_add(tape, ad::matmul(tape, x, head.w2), head.b2, 1);
}

MultiExitOutput MultiExitNet::forward(ad::Tape& tape, const ad::Tensor& batch) const {
  if (batch.rank() != 4 || batch.dim(1) != config_.input_channels || batch.dim(2) != config_.input_height ||
      batch.dim(3) != config_.input_width) {
    throw StructuralError("forward: batch shape " + ad::shape_to_string(batch.shape()) + " does not match (B," +
                          std::to_string(config_.input_channels) + "," + std::to_string(config_.input_height) +
                          "," + std::to_string(config_.input_width) + ")");
  }

  MultiExitOutput out;
  ad::Tensor x = batch;
  const ExitAssignment& exits = config_.exits;
  for (int b = 1; b <= exits.deepest(); ++b) {
    const Block& blk = blocks_[b - 1];
    x = ad::relu(tape, ad::bias_add(tape, ad::conv2d(tape, x, blk.w1, 1, 1), blk.b1, 1));
    x = ad::relu(tape, ad::bias_add(tape, ad::conv2d(tape, x, blk.w2, 1, 1), blk.b2, 1));
    x = ad::maxpool2d(tape, x, 2, 2);
    ++out.blocks_evaluated;

    if (exits.age_exit == b) out.age = run_head(tape, age_head_, x);
    if (exits.country_exit == b) out.country_logits = run_head(tape, country_head_, x);
    if (exits.emotion_exit == b) out.emotion = ad::sigmoid(tape, run_head(tape, emotion_head_, x));
  }
  return out;
}

const ad::Tensor& MultiExitNet::parameter(std::string_view name) const {
  for (const NamedParameter& p : params_) {
    if (p.name == name) return p.tensor;
  }
  throw StructuralError("no parameter named " + std::string(name));
}

std::pair<std::size_t, std::size_t> MultiExitNet::block_output_dims(int block) const {
  if (block < 1 || block > kNumBlocks) throw StructuralError("block index out of range");
  std::size_t h = config_.input_height, w = config_.input_width;
  for (int b = 0; b < block; ++b) {
    h /= 2;
    w /= 2;
  }
  return {h, w};
}

std::vector<std::vector<double>> MultiExitNet::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const NamedParameter& p : params_) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void MultiExitNet::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw StructuralError("restore: parameter count mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto dst = params_[i].tensor.mutable_values();
    if (values[i].size() != dst.size()) throw StructuralError("restore: size mismatch for " + params_[i].name);
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

MultiExitNet build_net(const NetConfig& config, std::uint64_t seed) { return MultiExitNet(config, seed); }

std::size_t parameter_count(const MultiExitNet& net) {
  std::size_t n = 0;
  for (const NamedParameter& p : net.parameters()) n += p.tensor.size();
  return n;
}

}  // namespace mtlw::net
