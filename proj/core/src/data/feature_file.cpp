#include "mtlw/data/feature_file.hpp"

#include <fstream>

#include "../binary_io.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::data {

namespace {
constexpr char kMagic[5] = "MTLF";
}

void write_feature_file(const std::filesystem::path& path, std::size_t height, std::size_t width,
                        std::span<const float> values) {
  if (values.size() != height * width) throw StructuralError("feature grid size does not match H*W");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  binary::write_magic(out, kMagic);
  binary::write_u32(out, kFeatureFileVersion);
  binary::write_u32(out, static_cast<std::uint32_t>(height));
  binary::write_u32(out, static_cast<std::uint32_t>(width));
  for (float v : values) binary::write_f32(out, v);
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureGrid read_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open feature file " + path.string());
  const std::string what = "feature file " + path.string();
  binary::expect_magic(in, kMagic, what);
  const std::uint32_t version = binary::read_u32(in, what);
  if (version != kFeatureFileVersion) throw LoadError(what + ": unsupported version " + std::to_string(version));
  FeatureGrid grid;
  grid.height = binary::read_u32(in, what);
  grid.width = binary::read_u32(in, what);
  if (grid.height == 0 || grid.width == 0) throw LoadError(what + ": zero dimension");
  grid.values.resize(grid.height * grid.width);
  for (float& v : grid.values) v = binary::read_f32(in, what);
  if (in.peek() != std::ifstream::traits_type::eof()) throw LoadError(what + ": trailing bytes");
  return grid;
}

}  // namespace mtlw::data
