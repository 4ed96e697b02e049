#include "prl/net/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "prl/tensor/binary_io.hpp"

namespace prl::net {

using namespace prl::binio;

void write_checkpoint(std::ostream& os, const Network& net) {
  const auto& s = net.spec;
  put_magic(os, "PRLC");
  put_u32(os, kCheckpointVersion);
  put_u32(os, s.arch == Arch::mlp ? 0 : 1);
  put_u32(os, static_cast<std::uint32_t>(s.width_multiplier));
  put_u32(os, static_cast<std::uint32_t>(s.base_width));
  put_u32(os, static_cast<std::uint32_t>(s.in_dim));
  put_u32(os, static_cast<std::uint32_t>(s.n_actions));
  put_u32(os, s.head.is_categorical() ? 1 : 0);
  put_u32(os, static_cast<std::uint32_t>(s.head.num_atoms));
  put_f64(os, s.head.v_min);
  put_f64(os, s.head.v_max);
  put_u32(os, static_cast<std::uint32_t>(net.params.layers.size()));
  for (const auto& l : net.params.layers) {
    put_u32(os, static_cast<std::uint32_t>(l.weight.rows()));
    put_u32(os, static_cast<std::uint32_t>(l.weight.cols()));
    for (double w : l.weight.flat()) put_f64(os, w);
    for (double b : l.bias) put_f64(os, b);
    for (double m : l.mask.flat()) put_u8(os, m != 0.0 ? 1 : 0);
  }
  if (!os) throw std::runtime_error("write_checkpoint: stream error");
}

Network read_checkpoint(std::istream& is) {
  expect_magic(is, "PRLC");
  const std::uint32_t version = get_u32(is);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("read_checkpoint: unsupported version " + std::to_string(version));
  }
  NetSpec s;
  s.arch = get_u32(is) == 0 ? Arch::mlp : Arch::residual;
  s.width_multiplier = get_u32(is);
  s.base_width = get_u32(is);
  s.in_dim = get_u32(is);
  s.n_actions = get_u32(is);
  const bool categorical = get_u32(is) == 1;
  const std::uint32_t atoms = get_u32(is);
  const double v_min = get_f64(is);
  const double v_max = get_f64(is);
  s.head = categorical ? Head::categorical(atoms, v_min, v_max) : Head::scalar();

  // Rebuild the topology, then overwrite every tensor from the file.
  RngStream scratch(0);
  Network net = build_network(s, scratch);
  const std::uint32_t count = get_u32(is);
  if (count != net.params.layers.size()) throw std::runtime_error("read_checkpoint: layer count mismatch");
  for (auto& l : net.params.layers) {
    const std::uint32_t rows = get_u32(is);
    const std::uint32_t cols = get_u32(is);
    if (rows != l.weight.rows() || cols != l.weight.cols()) {
      throw std::runtime_error("read_checkpoint: layer " + l.name + " has unexpected shape");
    }
    for (double& w : l.weight.flat()) w = get_f64(is);
    for (double& b : l.bias) b = get_f64(is);
    for (double& m : l.mask.flat()) m = get_u8(is) ? 1.0 : 0.0;
  }
  if (!net.params.masks_respected()) throw std::runtime_error("read_checkpoint: masked weight is nonzero");
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const Network& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(os, net);
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_checkpoint(is);
}

}  // namespace prl::net
