#pragma once

#include <filesystem>
#include <iosfwd>

#include "mtlw/net/multi_exit_net.hpp"

namespace mtlw::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian):
//   "MENC", u32 version,
//   NetConfig: u32 input_channels, input_height, input_width,
//              u32 x5 block_channels, u32 age/country/emotion exits, u32 head_hidden,
//   u32 tensor count, then per tensor:
//     u32 name length, name bytes, u32 rank, u32 dims[rank], f64 values[product(dims)].
void write_checkpoint(std::ostream& out, const MultiExitNet& net);
MultiExitNet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const MultiExitNet& net);
MultiExitNet load_checkpoint(const std::filesystem::path& path);

}  // namespace mtlw::net
