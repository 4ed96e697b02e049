#pragma once

#include <filesystem>
#include <iosfwd>

#include "prl/net/network.hpp"

namespace prl::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout (little-endian): "PRLC", u32 version, u32 arch, u32 width
// multiplier, u32 base width, u32 in_dim, u32 n_actions, u32 head kind,
// u32 atoms, f64 v_min, f64 v_max, u32 layer count, then per layer:
// u32 rows, u32 cols, rows*cols f64 weights, rows f64 biases, rows*cols u8 mask.
void write_checkpoint(std::ostream& os, const Network& net);
Network read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const Network& net);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace prl::net
