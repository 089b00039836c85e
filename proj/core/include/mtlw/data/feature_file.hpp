#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mtlw::data {

inline constexpr std::uint32_t kFeatureFileVersion = 1;

struct FeatureGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> values;  // row-major, height * width
};

// "MTLF", u32 version = 1, u32 H, u32 W, then H*W float32 little-endian values.
void write_feature_file(const std::filesystem::path& path, std::size_t height, std::size_t width,
                        std::span<const float> values);
FeatureGrid read_feature_file(const std::filesystem::path& path);

}  // namespace mtlw::data
