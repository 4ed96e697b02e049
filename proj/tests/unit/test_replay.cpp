#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "prl/replay/n_step.hpp"
#include "prl/replay/replay_buffer.hpp"
#include "prl/replay/sum_tree.hpp"

using namespace prl;
using namespace prl::replay;
using Catch::Matchers::WithinAbs;

namespace {

Transition item(double tag, double reward = 0.0, bool done = false) {
  Transition t;
  t.obs = {tag};
  t.next_obs = {tag + 1};
  t.reward = reward;
  t.done = done;
  return t;
}

// Insertion stamps count pushes from 1, so slot i of a fresh buffer has stamp i + 1.
ReplayConfig prioritized(std::size_t cap, double alpha) {
  ReplayConfig c;
  c.capacity = cap;
  c.prioritized = true;
  c.alpha = alpha;
  return c;
}

std::map<double, double> frequencies(const ReplayBuffer& buf, std::size_t draws, RngStream& rng) {
  std::map<double, double> f;
  std::size_t total = 0;
  while (total < draws) {
    const auto b = buf.sample(std::min<std::size_t>(32, buf.size()), rng);
    for (const auto& t : b.items) f[t.obs[0]] += 1.0;
    total += b.items.size();
  }
  for (auto& [k, v] : f) v /= double(total);
  return f;
}

}  // namespace

TEST_CASE("ring semantics") {
  ReplayBuffer buf({.capacity = 2});
  buf.push(item(0));
  buf.push(item(1));
  buf.push(item(2));
  CHECK(buf.size() == 2);
  std::vector<double> tags{buf.at(0).obs[0], buf.at(1).obs[0]};
  std::sort(tags.begin(), tags.end());
  CHECK(tags == std::vector<double>{1, 2});
}

TEST_CASE("sample needs enough items") {
  ReplayBuffer buf({.capacity = 10});
  RngStream rng(1);
  buf.push(item(0));
  CHECK_THROWS_AS(buf.sample(2, rng), std::logic_error);
  CHECK_NOTHROW(buf.sample(1, rng));
}

TEST_CASE("first prioritized push gets priority 1") {
  ReplayBuffer buf(prioritized(8, 0.5));
  buf.push(item(0));
  CHECK(buf.priority(0) == 1.0);
  CHECK(buf.tree().audit());
  const std::vector<SampledIndex> idx{{0, 1}};
  const std::vector<double> td{4.0};
  buf.update_priorities(idx, td);
  buf.push(item(1));
  CHECK_THAT(buf.priority(1), WithinAbs(4.0 + 1e-6, 1e-12));
  CHECK(buf.tree().audit());
}

TEST_CASE("uniform sampling frequencies") {
  ReplayBuffer buf({.capacity = 4});
  buf.push(item(0));
  buf.push(item(1));
  RngStream rng(2);
  const auto f = frequencies(buf, 100000, rng);
  CHECK_THAT(f.at(0), WithinAbs(0.5, 0.01));
  CHECK_THAT(f.at(1), WithinAbs(0.5, 0.01));
  const auto b = buf.sample(2, rng);
  for (double w : b.weights) CHECK(w == 1.0);
}

TEST_CASE("prioritized sampling is proportional to p^alpha") {
  ReplayBuffer buf(prioritized(4, 1.0));
  buf.push(item(0));
  buf.push(item(1));
  RngStream rng(3);
  const std::vector<SampledIndex> idx{{0, 1}, {1, 2}};
  const std::vector<double> td{1.0, 3.0};
  buf.update_priorities(idx, td);
  auto f = frequencies(buf, 100000, rng);
  CHECK_THAT(f.at(0), WithinAbs(0.25, 0.01));
  CHECK_THAT(f.at(1), WithinAbs(0.75, 0.01));

  // Importance weights (N P(i))^-beta, scaled by the largest weight in the batch.
  for (int trial = 0; trial < 20; ++trial) {
    const auto b = buf.sample(2, rng);
    std::vector<double> raw;
    for (const auto& t : b.items) raw.push_back(std::pow(2 * (t.obs[0] == 0 ? 0.25 : 0.75), -0.5));
    const double w_max = std::max(raw[0], raw[1]);
    for (std::size_t i = 0; i < 2; ++i) CHECK_THAT(b.weights[i], WithinAbs(raw[i] / w_max, 1e-5));
  }

  ReplayBuffer flat(prioritized(4, 0.0));
  flat.push(item(0));
  flat.push(item(1));
  flat.update_priorities(idx, td);
  f = frequencies(flat, 100000, rng);
  CHECK_THAT(f.at(0), WithinAbs(0.5, 0.01));
}

TEST_CASE("random priorities are matched within 1% absolute") {
  RngStream rng(4);
  for (std::size_t n : {3u, 17u, 32u}) {
    ReplayBuffer buf(prioritized(n, 0.5));
    std::vector<SampledIndex> idx;
    std::vector<double> td;
    for (std::size_t i = 0; i < n; ++i) {
      buf.push(item(double(i)));
      idx.push_back({i, i + 1});
      td.push_back(rng.uniform(0.0, 5.0));
    }
    buf.update_priorities(idx, td);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) z += std::sqrt(td[i] + 1e-6);
    const auto f = frequencies(buf, 100000, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double got = f.count(double(i)) ? f.at(double(i)) : 0.0;
      CHECK_THAT(got, WithinAbs(std::sqrt(td[i] + 1e-6) / z, 0.01));
    }
  }
}

TEST_CASE("priority updates") {
  ReplayBuffer buf(prioritized(2, 0.5));
  buf.push(item(0));
  buf.push(item(1));
  const std::vector<SampledIndex> idx{{0, 1}, {1, 2}};
  buf.update_priorities(idx, std::vector<double>{0.0, -2.0});
  CHECK(buf.priority(0) == 1e-6);
  CHECK_THAT(buf.priority(1), WithinAbs(2.0 + 1e-6, 1e-15));
  CHECK(buf.tree().audit());

  buf.push(item(2));  // overwrites slot 0; the old index is stale now
  const double fresh = buf.priority(0);
  buf.update_priorities(std::vector<SampledIndex>{{0, 1}}, std::vector<double>{9.0});
  CHECK(buf.priority(0) == fresh);
}

TEST_CASE("sum tree basics") {
  SumTree t(5);
  t.set(0, 1.0);
  t.set(2, 3.0);
  t.set(4, 2.0);
  CHECK(t.total() == 6.0);
  CHECK(t.max() == 3.0);
  CHECK(t.find(0.0) == 0);
  CHECK(t.find(0.999) == 0);
  CHECK(t.find(1.0) == 2);
  CHECK(t.find(3.999) == 2);
  CHECK(t.find(4.0) == 4);
  CHECK(t.find(100.0) == 4);
  CHECK(t.find(-1.0) == 0);
  CHECK(t.audit());
}

TEST_CASE("sum tree fuzz") {
  RngStream rng(5);
  const std::size_t cap = 37;
  SumTree t(cap);
  std::vector<double> leaves(cap, 0.0);
  for (int op = 0; op < 100000; ++op) {
    const std::size_t i = rng.uniform_index(cap);
    const double v = rng.bernoulli(0.1) ? 0.0 : rng.uniform(0.0, 10.0);
    t.set(i, v);
    leaves[i] = v;
    if (op % 97 == 0) {
      REQUIRE(t.audit());
      double s = 0.0, m = 0.0;
      for (double x : leaves) {
        s += x;
        m = std::max(m, x);
      }
      REQUIRE_THAT(t.total(), WithinAbs(s, 1e-9 * std::max(1.0, s)));
      REQUIRE(t.max() == m);
      if (s > 0) REQUIRE(leaves[t.find(rng.uniform(0.0, s))] > 0.0);
    }
  }
  CHECK(t.audit());
}

TEST_CASE("buffer fuzz keeps the trees consistent") {
  RngStream rng(6);
  ReplayBuffer buf(prioritized(16, 0.6));
  for (int op = 0; op < 20000; ++op) {
    if (buf.size() < 4 || rng.bernoulli(0.4)) {
      buf.push(item(op));
    } else {
      const auto b = buf.sample(4, rng);
      std::vector<double> td;
      for (std::size_t k = 0; k < b.items.size(); ++k) td.push_back(rng.normal());
      buf.update_priorities(b.indices, td);
    }
    REQUIRE(buf.size() <= buf.capacity());
    if (op % 50 == 0) REQUIRE(buf.tree().audit());
  }
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf.priority(i) > 0.0);
}

TEST_CASE("n-step examples") {
  std::vector<Transition> w{item(0, 1), item(1, 1), item(2, 1)};
  auto r = n_step_assemble(w, 3, 0.9);
  CHECK_THAT(r.reward, WithinAbs(2.71, 1e-12));
  CHECK(r.horizon == 3);
  CHECK(r.next_obs == w[2].next_obs);
  CHECK_FALSE(r.done);

  r = n_step_assemble(w, 1, 0.9);
  CHECK(r.reward == 1.0);
  CHECK(r.horizon == 1);

  w[0].done = true;
  r = n_step_assemble(w, 3, 0.9);
  CHECK(r.reward == 1.0);
  CHECK(r.done);
  CHECK(r.horizon == 1);

  CHECK_THROWS_AS(n_step_assemble(std::vector<Transition>{}, 3, 0.9), std::invalid_argument);
  CHECK_THROWS_AS(n_step_assemble(w, 0, 0.9), std::invalid_argument);
}

TEST_CASE("n-step matches brute force on random windows") {
  RngStream rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t len = 1 + rng.uniform_index(6);
    const std::size_t n = 1 + rng.uniform_index(5);
    const double gamma = rng.uniform(0.5, 0.999);
    std::vector<Transition> w;
    std::vector<double> rewards;
    std::vector<bool> dones;
    for (std::size_t k = 0; k < len; ++k) {
      w.push_back(item(double(k), rng.normal(), rng.bernoulli(0.15)));
      rewards.push_back(w.back().reward);
      dones.push_back(w.back().done);
    }
    const auto got = n_step_assemble(w, n, gamma);
    const auto want = oracle::n_step(rewards, dones, n, gamma);
    REQUIRE_THAT(got.reward, WithinAbs(want.ret, 1e-12));
    REQUIRE(got.done == want.done);
    REQUIRE(got.horizon == want.horizon);
    REQUIRE(got.obs == w[0].obs);
    REQUIRE(got.next_obs == w[want.horizon - 1].next_obs);
  }
}

TEST_CASE("n-step accumulator") {
  NStepAccumulator acc(3, 0.5);
  CHECK(acc.push(item(0, 1)).empty());
  CHECK(acc.push(item(1, 2)).empty());
  auto out = acc.push(item(2, 4));
  REQUIRE(out.size() == 1);
  CHECK(out[0].reward == 1 + 1 + 1);
  CHECK(out[0].obs[0] == 0);
  out = acc.push(item(3, 8, true));
  REQUIRE(out.size() == 3);
  CHECK(out[0].reward == 2 + 2 + 2);
  CHECK(out[0].done);
  CHECK(out[1].reward == 4 + 4);
  CHECK(out[2].reward == 8);
  CHECK(acc.pending() == 0);

  acc.push(item(10, 1));
  acc.push(item(11, 1));
  out = acc.flush();
  REQUIRE(out.size() == 2);
  CHECK(out[0].reward == 1.5);
  CHECK(out[0].horizon == 2);
  CHECK_FALSE(out[0].done);
  CHECK(out[1].horizon == 1);
  CHECK(acc.pending() == 0);
}
