#include "prl/harness/dataset.hpp"

#include <fstream>
#include <stdexcept>

#include "prl/agents/acting.hpp"
#include "prl/envs/environment.hpp"
#include "prl/tensor/binary_io.hpp"

namespace prl::harness {

namespace {
constexpr std::uint32_t dataset_version = 1;
}

void write_dataset(std::ostream& os, const Dataset& d) {
  using namespace binio;
  put_magic(os, "PRLD");
  put_u32(os, dataset_version);
  put_string(os, d.env_id);
  put_u32(os, d.obs_dim);
  put_u32(os, d.n_actions);
  put_u64(os, d.transitions.size());
  for (const auto& t : d.transitions) {
    if (t.obs.size() != d.obs_dim || t.next_obs.size() != d.obs_dim) {
      throw std::invalid_argument("write_dataset: observation size does not match header");
    }
    for (double v : t.obs) put_f64(os, v);
    put_u32(os, t.action);
    put_f64(os, t.reward);
    for (double v : t.next_obs) put_f64(os, v);
    put_u8(os, t.done ? 1 : 0);
  }
}

Dataset read_dataset(std::istream& is) {
  using namespace binio;
  expect_magic(is, "PRLD");
  const auto version = get_u32(is);
  if (version != dataset_version) throw std::runtime_error("dataset: unsupported version " + std::to_string(version));
  Dataset d;
  d.env_id = get_string(is);
  d.obs_dim = get_u32(is);
  d.n_actions = get_u32(is);
  const auto count = get_u64(is);
  d.transitions.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 24)));
  for (std::uint64_t i = 0; i < count; ++i) {
    replay::Transition t;
    t.obs.resize(d.obs_dim);
    for (auto& v : t.obs) v = get_f64(is);
    t.action = get_u32(is);
    if (t.action >= d.n_actions) throw std::runtime_error("dataset: action out of range in record " + std::to_string(i));
    t.reward = get_f64(is);
    t.next_obs.resize(d.obs_dim);
    for (auto& v : t.next_obs) v = get_f64(is);
    const auto done = get_u8(is);
    if (done > 1) throw std::runtime_error("dataset: bad done flag in record " + std::to_string(i));
    t.done = done == 1;
    d.transitions.push_back(std::move(t));
  }
  return d;
}

void save_dataset(const std::filesystem::path& path, const Dataset& d) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_dataset(os, d);
  os.flush();
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(is);
}

RecordResult record_dataset(const net::Network& net, const std::string& env_id, std::uint64_t env_steps, double rate,
                            std::uint64_t seed, double epsilon) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("record_dataset: rate must be in [0, 1]");
  const RngStream root(seed, 0);
  auto env = envs::make_environment(env_id, root.split(1));
  if (net.spec.in_dim != env->observation_dim() || net.spec.n_actions != env->num_actions()) {
    throw std::invalid_argument("record_dataset: network does not match environment " + env_id);
  }
  RngStream act_rng = root.split(2);
  RngStream keep_rng = root.split(3);

  RecordResult res;
  res.dataset.env_id = env_id;
  res.dataset.obs_dim = static_cast<std::uint32_t>(env->observation_dim());
  res.dataset.n_actions = static_cast<std::uint32_t>(env->num_actions());
  auto obs = env->reset();
  double ep_return = 0.0;
  double sum_returns = 0.0;
  for (std::uint64_t t = 0; t < env_steps; ++t) {
    const auto a = agents::select_action(net, obs, epsilon, act_rng);
    auto sr = env->step(a);
    ep_return += sr.reward;
    if (keep_rng.bernoulli(rate)) {
      res.dataset.transitions.push_back({obs, static_cast<std::uint32_t>(a), sr.reward, sr.obs, sr.terminated, 1});
    }
    if (sr.done()) {
      sum_returns += ep_return;
      ++res.episodes;
      ep_return = 0.0;
      obs = env->reset();
    } else {
      obs = std::move(sr.obs);
    }
  }
  res.behavior_mean_return = res.episodes ? sum_returns / static_cast<double>(res.episodes) : ep_return;
  return res;
}

}  // namespace prl::harness
