#include "prl/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "prl/envs/environment.hpp"

namespace prl::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list element in '" + v + "'");
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

std::uint64_t to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  return v;
}

bool to_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("not a boolean: '" + s + "'");
}

template <class T, class F>
std::vector<T> map_list(const std::string& v, F f) {
  std::vector<T> out;
  for (const auto& s : split_list(v)) out.push_back(f(s));
  return out;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

using Setter = std::function<void(agents::RunSpec&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> m = {
      {"prune_start", [](agents::RunSpec& r, const std::string& v) { r.prune_start_frac = to_double(v); }},
      {"prune_interval", [](agents::RunSpec& r, const std::string& v) { r.prune_interval = to_u64(v); }},
      {"prune_scope", [](agents::RunSpec& r, const std::string& v) { r.prune_scope = prune::parse_scope(v); }},
      {"prune_head", [](agents::RunSpec& r, const std::string& v) { r.prune_head = to_bool(v); }},
      {"total_env_steps", [](agents::RunSpec& r, const std::string& v) { r.total_env_steps = to_u64(v); }},
      {"total_grad_steps", [](agents::RunSpec& r, const std::string& v) { r.total_grad_steps = to_u64(v); }},
      {"log_interval", [](agents::RunSpec& r, const std::string& v) { r.log_interval = to_u64(v); }},
      {"gamma", [](agents::RunSpec& r, const std::string& v) { r.agent.gamma = to_double(v); }},
      {"n_step", [](agents::RunSpec& r, const std::string& v) { r.agent.n_step = to_u64(v); }},
      {"eps_start", [](agents::RunSpec& r, const std::string& v) { r.agent.eps_start = to_double(v); }},
      {"eps_end", [](agents::RunSpec& r, const std::string& v) { r.agent.eps_end = to_double(v); }},
      {"eps_decay_frac", [](agents::RunSpec& r, const std::string& v) { r.eps_decay_frac = to_double(v); }},
      {"eps_decay_steps",
       [](agents::RunSpec& r, const std::string& v) {
         r.agent.eps_decay_steps = to_u64(v);
         r.eps_decay_frac = 0.0;
       }},
      {"target_sync", [](agents::RunSpec& r, const std::string& v) { r.agent.target_sync_period = to_u64(v); }},
      {"num_atoms", [](agents::RunSpec& r, const std::string& v) { r.agent.num_atoms = to_u64(v); }},
      {"v_min",
       [](agents::RunSpec& r, const std::string& v) {
         r.agent.v_min = to_double(v);
         r.scale_support = false;
       }},
      {"v_max",
       [](agents::RunSpec& r, const std::string& v) {
         r.agent.v_max = to_double(v);
         r.scale_support = false;
       }},
      {"cql_alpha", [](agents::RunSpec& r, const std::string& v) { r.agent.cql_alpha = to_double(v); }},
      {"batch_size", [](agents::RunSpec& r, const std::string& v) { r.agent.batch_size = to_u64(v); }},
      {"min_replay", [](agents::RunSpec& r, const std::string& v) { r.agent.min_replay_history = to_u64(v); }},
      {"loss", [](agents::RunSpec& r, const std::string& v) { r.agent.loss = agents::parse_loss(v); }},
      {"lr", [](agents::RunSpec& r, const std::string& v) { r.agent.adam.lr = to_double(v); }},
      {"adam_eps", [](agents::RunSpec& r, const std::string& v) { r.agent.adam.eps = to_double(v); }},
      {"replay_capacity", [](agents::RunSpec& r, const std::string& v) { r.agent.replay.capacity = to_u64(v); }},
      {"prioritized", [](agents::RunSpec& r, const std::string& v) { r.agent.replay.prioritized = to_bool(v); }},
      {"alpha", [](agents::RunSpec& r, const std::string& v) { r.agent.replay.alpha = to_double(v); }},
      {"beta", [](agents::RunSpec& r, const std::string& v) { r.agent.replay.beta = to_double(v); }},
      {"priority_eps", [](agents::RunSpec& r, const std::string& v) { r.agent.replay.priority_eps = to_double(v); }},
      {"intervention_period", [](agents::RunSpec& r, const std::string& v) { r.intervention.period = to_u64(v); }},
      {"redo_threshold", [](agents::RunSpec& r, const std::string& v) { r.intervention.redo_threshold = to_double(v); }},
      {"weight_decay", [](agents::RunSpec& r, const std::string& v) { r.intervention.weight_decay = to_double(v); }},
      {"eval_episodes", [](agents::RunSpec& r, const std::string& v) { r.eval_episodes = to_u64(v); }},
      {"final_eval_episodes", [](agents::RunSpec& r, const std::string& v) { r.final_eval_episodes = to_u64(v); }},
      {"eval_epsilon", [](agents::RunSpec& r, const std::string& v) { r.eval_epsilon = to_double(v); }},
      {"probe_size", [](agents::RunSpec& r, const std::string& v) { r.probe_size = to_u64(v); }},
      {"covariance_probe", [](agents::RunSpec& r, const std::string& v) { r.covariance_probe = to_u64(v); }},
      {"srank_delta", [](agents::RunSpec& r, const std::string& v) { r.srank_delta = to_double(v); }},
      {"dormant_tau", [](agents::RunSpec& r, const std::string& v) { r.dormant_tau = to_double(v); }},
  };
  return m;
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Cell::group_key() const {
  return agents::to_string(agent) + "_" + net::to_string(arch) + "_w" + std::to_string(width) + "_s" +
         fmt_num(final_sparsity) + "_rr" + fmt_num(replay_ratio) + "_" + interventions::to_string(intervention) +
         "_pe" + fmt_num(prune_end);
}

std::string Cell::key() const { return env_id + "_" + group_key(); }

std::uint64_t run_seed(const Cell& cell, std::uint64_t seed) { return seed ^ fnv1a(cell.key()); }

const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

std::vector<Cell> ExperimentConfig::cells() const {
  std::vector<Cell> out;
  for (const auto& env : envs)
    for (auto agent : agents)
      for (auto arch : archs)
        for (auto w : widths)
          for (auto sf : final_sparsities)
            for (auto rr : replay_ratios)
              for (auto iv : interventions)
                for (auto pe : prune_ends) {
                  Cell c;
                  c.env_id = env;
                  c.agent = agent;
                  c.arch = arch;
                  c.width = w;
                  c.final_sparsity = sf;
                  c.replay_ratio = rr > 0.0 ? rr : agents::AgentConfig::defaults_for(agent).replay_ratio;
                  c.intervention = iv;
                  c.prune_end = pe;
                  out.push_back(c);
                }
  return out;
}

void ExperimentConfig::validate() const {
  if (envs.empty() || agents.empty() || archs.empty() || widths.empty() || final_sparsities.empty() ||
      replay_ratios.empty() || interventions.empty() || prune_ends.empty()) {
    throw std::invalid_argument("config: every sweep axis needs at least one value");
  }
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  const auto& known = envs::environment_ids();
  for (const auto& e : envs) {
    if (std::find(known.begin(), known.end(), e) == known.end()) throw std::invalid_argument("config: unknown env '" + e + "'");
  }
  for (const auto& c : cells()) {
    const auto spec = make_run_spec(*this, c);
    spec.validate();
    if (spec.agent.offline() && dataset.empty()) throw std::invalid_argument("config: offline agents need 'dataset'");
  }
}

agents::RunSpec make_run_spec(const ExperimentConfig& cfg, const Cell& cell) {
  agents::RunSpec r;
  r.env_id = cell.env_id;
  r.agent = agents::AgentConfig::defaults_for(cell.agent);
  r.arch = cell.arch;
  r.width_multiplier = cell.width;
  r.final_sparsity = cell.final_sparsity;
  if (cell.replay_ratio > 0.0) r.agent.replay_ratio = cell.replay_ratio;
  r.intervention.kind = cell.intervention;
  r.prune_end_frac = cell.prune_end;
  for (const auto& [k, v] : cfg.overrides) setters().at(k)(r, v);
  return r;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw std::invalid_argument(where + "expected 'key = value'");
    if (!seen.insert(key).second) throw std::invalid_argument(where + "duplicate key '" + key + "'");
    try {
      if (key == "env") {
        cfg.envs = split_list(val);
      } else if (key == "agent") {
        cfg.agents = map_list<agents::AgentKind>(val, agents::parse_agent);
      } else if (key == "arch") {
        cfg.archs = map_list<net::Arch>(val, net::parse_arch);
      } else if (key == "width") {
        cfg.widths = map_list<std::size_t>(val, [](const std::string& s) { return static_cast<std::size_t>(to_u64(s)); });
      } else if (key == "final_sparsity") {
        cfg.final_sparsities = map_list<double>(val, to_double);
      } else if (key == "replay_ratio") {
        cfg.replay_ratios = map_list<double>(val, to_double);
      } else if (key == "intervention") {
        cfg.interventions = map_list<interventions::Kind>(val, interventions::parse_kind);
      } else if (key == "prune_end") {
        cfg.prune_ends = map_list<double>(val, to_double);
      } else if (key == "seeds") {
        cfg.seeds = map_list<std::uint64_t>(val, to_u64);
      } else if (key == "dataset") {
        cfg.dataset = val;
      } else if (key == "out") {
        cfg.output_dir = val;
      } else if (key == "workers") {
        cfg.workers = to_u64(val);
      } else if (setters().count(key)) {
        agents::RunSpec probe;
        setters().at(key)(probe, val);
        cfg.overrides[key] = val;
      } else {
        throw std::invalid_argument("unknown key '" + key + "'");
      }
    } catch (const std::invalid_argument& e) {
      const std::string msg = e.what();
      throw std::invalid_argument(msg.rfind("config line", 0) == 0 ? msg : where + msg);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace prl::harness
