#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "prl/agents/trainer.hpp"

namespace prl::harness {

/// One point of the sweep grid.
struct Cell {
  std::string env_id;
  agents::AgentKind agent = agents::AgentKind::dqn;
  net::Arch arch = net::Arch::mlp;
  std::size_t width = 1;
  double final_sparsity = 0.0;
  double replay_ratio = 0.0;  // 0 = agent default
  interventions::Kind intervention = interventions::Kind::none;
  double prune_end = 0.8;

  /// Filesystem-safe identifier, stable across builds.
  std::string key() const;
  /// key() without the environment; cells sharing it are aggregated together.
  std::string group_key() const;
};

/// Sweep axes (comma lists) plus scalar overrides applied to every run.
struct ExperimentConfig {
  std::vector<std::string> envs{"cartpole"};
  std::vector<agents::AgentKind> agents{agents::AgentKind::dqn};
  std::vector<net::Arch> archs{net::Arch::mlp};
  std::vector<std::size_t> widths{1};
  std::vector<double> final_sparsities{0.0};
  std::vector<double> replay_ratios{0.0};
  std::vector<interventions::Kind> interventions{interventions::Kind::none};
  std::vector<double> prune_ends{0.8};
  std::vector<std::uint64_t> seeds{0};
  std::map<std::string, std::string> overrides;  // scalar keys, applied in order of name
  std::string dataset;                           // PRLD file for offline agents
  std::filesystem::path output_dir = "out";
  std::size_t workers = 1;

  std::vector<Cell> cells() const;
  /// Throws std::invalid_argument if a grid is empty or a value is out of range.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Unknown keys, bad
/// values and duplicate keys throw std::invalid_argument naming the line.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Keys accepted as scalar overrides.
const std::vector<std::string>& override_keys();

/// Agent defaults for the cell's agent, then the cell's axes, then overrides.
agents::RunSpec make_run_spec(const ExperimentConfig& cfg, const Cell& cell);

/// Seed of one run: seed xor FNV-1a(cell key).
std::uint64_t run_seed(const Cell& cell, std::uint64_t seed);

std::uint64_t fnv1a(const std::string& s);

}  // namespace prl::harness
