#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prl/net/network.hpp"
#include "prl/replay/transition.hpp"

namespace prl::harness {

/// Offline dataset ("PRLD" file).
struct Dataset {
  std::string env_id;
  std::uint32_t obs_dim = 0;
  std::uint32_t n_actions = 0;
  std::vector<replay::Transition> transitions;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

void write_dataset(std::ostream& os, const Dataset& d);
/// Throws std::runtime_error on bad magic, version, truncation or a record
/// that does not match the header.
Dataset read_dataset(std::istream& is);
void save_dataset(const std::filesystem::path& path, const Dataset& d);
Dataset load_dataset(const std::filesystem::path& path);

struct RecordResult {
  Dataset dataset;
  std::size_t episodes = 0;           // completed episodes during the rollout
  double behavior_mean_return = 0.0;  // mean return of those episodes
};

/// Rolls out the epsilon-greedy policy of `net` for `env_steps` steps and
/// keeps each transition with probability `rate`.
RecordResult record_dataset(const net::Network& net, const std::string& env_id, std::uint64_t env_steps, double rate,
                            std::uint64_t seed, double epsilon = 0.01);

}  // namespace prl::harness
