#include "mtlw/net/checkpoint.hpp"

#include <fstream>

#include "../binary_io.hpp"
#include "mtlw/errors.hpp"

namespace mtlw::net {

namespace {

constexpr char kMagic[5] = "MENC";
const std::string kWhat = "checkpoint";

}  // namespace

void write_checkpoint(std::ostream& out, const MultiExitNet& net) {
  using binary::write_u32;
  const NetConfig& c = net.config();
  binary::write_magic(out, kMagic);
  write_u32(out, kCheckpointVersion);
  write_u32(out, static_cast<std::uint32_t>(c.input_channels));
  write_u32(out, static_cast<std::uint32_t>(c.input_height));
  write_u32(out, static_cast<std::uint32_t>(c.input_width));
  for (std::size_t w : c.block_channels) write_u32(out, static_cast<std::uint32_t>(w));
  write_u32(out, static_cast<std::uint32_t>(c.exits.age_exit));
  write_u32(out, static_cast<std::uint32_t>(c.exits.country_exit));
  write_u32(out, static_cast<std::uint32_t>(c.exits.emotion_exit));
  write_u32(out, static_cast<std::uint32_t>(c.head_hidden));

  write_u32(out, static_cast<std::uint32_t>(net.parameters().size()));
  for (const NamedParameter& p : net.parameters()) {
    write_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(out, static_cast<std::uint32_t>(p.tensor.rank()));
    for (std::size_t d : p.tensor.shape()) write_u32(out, static_cast<std::uint32_t>(d));
    for (double v : p.tensor.values()) binary::write_f64(out, v);
  }
}

MultiExitNet read_checkpoint(std::istream& in) {
  using binary::read_u32;
  binary::expect_magic(in, kMagic, kWhat);
  const std::uint32_t version = read_u32(in, kWhat);
  if (version != kCheckpointVersion) throw LoadError("checkpoint: unsupported version " + std::to_string(version));

  NetConfig c;
  c.input_channels = read_u32(in, kWhat);
  c.input_height = read_u32(in, kWhat);
  c.input_width = read_u32(in, kWhat);
  for (std::size_t& w : c.block_channels) w = read_u32(in, kWhat);
  c.exits.age_exit = static_cast<int>(read_u32(in, kWhat));
  c.exits.country_exit = static_cast<int>(read_u32(in, kWhat));
  c.exits.emotion_exit = static_cast<int>(read_u32(in, kWhat));
  c.head_hidden = read_u32(in, kWhat);

  MultiExitNet net = [&] {
    try {
      return MultiExitNet(c, 0);
    } catch (const StructuralError& e) {
      throw LoadError(std::string("checkpoint: invalid network config: ") + e.what());
    }
  }();

  const std::uint32_t count = read_u32(in, kWhat);
  if (count != net.parameters().size()) {
    throw LoadError("checkpoint: expected " + std::to_string(net.parameters().size()) + " tensors, found " +
                    std::to_string(count));
  }
  for (NamedParameter& p : net.parameters()) {
    const std::uint32_t len = read_u32(in, kWhat);
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw LoadError("checkpoint: truncated file");
    if (name != p.name) throw LoadError("checkpoint: expected tensor " + p.name + ", found " + name);
    const std::uint32_t rank = read_u32(in, kWhat);
    ad::Shape shape(rank);
    for (std::size_t& d : shape) d = read_u32(in, kWhat);
    if (shape != p.tensor.shape()) {
      throw LoadError("checkpoint: tensor " + name + " has shape " + ad::shape_to_string(shape) + ", expected " +
                      ad::shape_to_string(p.tensor.shape()));
    }
    for (double& v : p.tensor.mutable_values()) v = binary::read_f64(in, kWhat);
  }
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const MultiExitNet& net) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, net);
  if (!out) throw IoError("failed writing " + path.string());
}

MultiExitNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace mtlw::net
