#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtlw/autodiff/tape.hpp"
#include "mtlw/autodiff/tensor.hpp"

namespace mtlw::net {

inline constexpr int kNumBlocks = 5;
inline constexpr std::size_t kEmotionDims = 10;
inline constexpr std::size_t kNumCountries = 4;

/// Block depth (1..5) after which each task head branches off the trunk.
struct ExitAssignment {
  int age_exit = 1;
  int country_exit = 3;
  int emotion_exit = 5;

  void validate() const;
  int deepest() const;
  std::string to_string() const;

  auto operator<=>(const ExitAssignment&) const = default;
};

struct NetConfig {
  std::size_t input_channels = 1;
  std::size_t input_height = 64;
  std::size_t input_width = 128;
  std::array<std::size_t, kNumBlocks> block_channels{16, 32, 64, 64, 128};
  ExitAssignment exits;
  std::size_t head_hidden = 64;

  // Throws StructuralError naming the block whose input cannot be pooled.
  void validate() const;

  bool operator==(const NetConfig&) const = default;
};

struct NamedParameter {
  std::string name;
  ad::Tensor tensor;
};

struct MultiExitOutput {
  ad::Tensor emotion;         // [B x 10], sigmoid outputs
  ad::Tensor country_logits;  // [B x 4]
  ad::Tensor age;             // [B x 1], standardized units
  int blocks_evaluated = 0;   // trunk blocks run by this forward pass
};

/// Five conv blocks, each (conv3x3 -> relu) x 2 -> maxpool 2x2, with one
/// GAP -> linear -> relu -> linear head per task attached after the block
/// named by the exit assignment. Parameters are initialized per name, so
/// trunk weights do not depend on where the heads are attached.
class MultiExitNet {
 public:
  MultiExitNet(NetConfig config, std::uint64_t seed);

  // Parameters are shared handles; copying would alias them.
  MultiExitNet(const MultiExitNet&) = delete;
  MultiExitNet& operator=(const MultiExitNet&) = delete;
  MultiExitNet(MultiExitNet&&) = default;
  MultiExitNet& operator=(MultiExitNet&&) = default;

  const NetConfig& config() const noexcept { return config_; }

  // Runs the trunk once, up to the deepest exit, feeding each head its branch.
  MultiExitOutput forward(ad::Tape& tape, const ad::Tensor& batch) const;

  const std::vector<NamedParameter>& parameters() const noexcept { return params_; }
  std::vector<NamedParameter>& parameters() noexcept { return params_; }
  const ad::Tensor& parameter(std::string_view name) const;

  // Spatial (height, width) of the activation leaving `block` (1..5).
  std::pair<std::size_t, std::size_t> block_output_dims(int block) const;

  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  struct Block {
    ad::Tensor w1, b1, w2, b2;
  };
  struct Head {
    ad::Tensor w1, b1, w2, b2;
  };

  ad::Tensor run_head(ad::Tape& tape, const Head& head, const ad::Tensor& features) const;

  NetConfig config_;
  std::vector<NamedParameter> params_;
  std::array<Block, kNumBlocks> blocks_;
  Head emotion_head_, country_head_, age_head_;
};

MultiExitNet build_net(const NetConfig& config, std::uint64_t seed);

// Sum over all parameter tensors of their element counts.
std::size_t parameter_count(const MultiExitNet& net);

}  // namespace mtlw::net
