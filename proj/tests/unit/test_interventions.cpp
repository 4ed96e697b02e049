#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "prl/diagnostics/diagnostics.hpp"
#include "prl/interventions/interventions.hpp"
#include "prl/net/adam.hpp"
#include "prl/net/network.hpp"

using namespace prl;
using namespace prl::interventions;
using Catch::Matchers::WithinAbs;

namespace {

net::Network make_net(std::size_t width, RngStream& rng, net::Arch arch = net::Arch::mlp) {
  net::NetSpec s;
  s.arch = arch;
  s.width_multiplier = width;
  s.in_dim = 4;
  s.n_actions = 3;
  return net::build_network(s, rng);
}

net::AdamState busy_optimizer(const net::MaskedParams& p) {
  auto st = net::AdamState::zeros_like(p);
  for (auto* g : {&st.m, &st.v})
    for (auto& l : g->layers) {
      l.weight.fill(0.5);
      std::fill(l.bias.begin(), l.bias.end(), 0.5);
    }
  return st;
}

}  // namespace

TEST_CASE("intervention config") {
  InterventionConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.effective_period(10000) == 1000);
  c.kind = Kind::reset;
  CHECK(c.effective_period(10000) == 2500);
  CHECK(c.effective_period(2) == 1);
  c.period = 300;
  CHECK(c.effective_period(10000) == 300);
  c = {};
  c.redo_threshold = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.weight_decay = -1e-3;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  for (Kind k : {Kind::none, Kind::reset, Kind::redo, Kind::weight_decay, Kind::l2_unit})
    CHECK(parse_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_kind("dropout"), std::invalid_argument);
}

TEST_CASE("weight decay examples") {
  net::MaskedParams p;
  p.layers.push_back({"head", Matrix{{2.0, -3.0}}, {1.0}, Matrix{{1.0, 0.0}}});
  p.apply_masks();
  auto g = net::Gradients::zeros_like(p);
  apply_weight_decay(g, p, 0.0);
  CHECK(g.layers[0].weight == Matrix{{0.0, 0.0}});
  apply_weight_decay(g, p, 0.1);
  CHECK_THAT(g.layers[0].weight(0, 0), WithinAbs(0.2, 1e-15));
  CHECK(g.layers[0].weight(0, 1) == 0.0);
  CHECK(g.layers[0].bias[0] == 0.0);
}

TEST_CASE("l2 unit examples") {
  net::MaskedParams p;
  p.layers.push_back({"a", Matrix{{0.0, 4.0}}, {3.0}, Matrix(1, 2, 1.0)});
  p.layers.push_back({"b", Matrix{{0.6, 0.8}}, {0.0}, Matrix(1, 2, 1.0)});
  p.layers.push_back({"c", Matrix(1, 2, 0.0), {0.0}, Matrix(1, 2, 1.0)});
  apply_l2_unit(p);
  CHECK(p.layers[0].weight == Matrix{{0.0, 1.0}});
  CHECK(p.layers[0].bias[0] == 3.0);
  CHECK_THAT(p.layers[1].weight(0, 0), WithinAbs(0.6, 1e-12));
  CHECK_THAT(p.layers[1].weight(0, 1), WithinAbs(0.8, 1e-12));
  CHECK(p.layers[2].weight == Matrix(1, 2, 0.0));

  RngStream rng(1);
  net::Network net = make_net(2, rng);
  apply_l2_unit(net.params);
  const auto once = net.params;
  apply_l2_unit(net.params);
  for (std::size_t l = 0; l < once.layers.size(); ++l) {
    CHECK_THAT(net.params.layers[l].weight.frobenius_norm(), WithinAbs(1.0, 1e-12));
    for (std::size_t i = 0; i < once.layers[l].weight.size(); ++i)
      CHECK_THAT(net.params.layers[l].weight.flat()[i], WithinAbs(once.layers[l].weight.flat()[i], 1e-15));
  }
}

TEST_CASE("reset touches only the last hidden layer and the head") {
  RngStream rng(2);
  net::Network net = make_net(8, rng);
  for (auto& l : net.params.layers) {
    for (double& b : l.bias) b = 1.0;
    for (std::size_t i = 0; i < l.mask.size(); i += 3) l.mask.flat()[i] = 0.0;
  }
  net.params.apply_masks();
  auto opt = busy_optimizer(net.params);
  const auto before = net.params;
  RngStream reset_rng(3);
  reset_last_layers(net, opt, reset_rng);

  CHECK(net.params.layers[0] == before.layers[0]);
  CHECK(opt.m.layers[0].weight(0, 0) == 0.5);
  for (std::size_t p = 1; p < 3; ++p) {
    const auto& l = net.params.layers[p];
    CHECK(l.mask == Matrix(l.mask.rows(), l.mask.cols(), 1.0));
    CHECK(std::all_of(l.bias.begin(), l.bias.end(), [](double b) { return b == 0.0; }));
    CHECK(l.weight != before.layers[p].weight);
    CHECK(opt.m.layers[p].weight.frobenius_norm() == 0.0);
    CHECK(opt.v.layers[p].weight.frobenius_norm() == 0.0);
  }

  // Kolmogorov-Smirnov distance of the new head weights from the initializer.
  const auto& head = net.params.layers[2].weight;
  const double limit = std::sqrt(6.0 / double(head.rows() + head.cols()));
  std::vector<double> w(head.flat().begin(), head.flat().end());
  std::sort(w.begin(), w.end());
  double d = 0.0;
  const double n = double(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double cdf = (w[i] + limit) / (2.0 * limit);
    d = std::max({d, std::abs(cdf - double(i) / n), std::abs(cdf - double(i + 1) / n)});
  }
  CHECK(d < 1.95 / std::sqrt(n));
  CHECK(w.front() >= -limit);
  CHECK(w.back() <= limit);
}

TEST_CASE("redo examples") {
  RngStream rng(4);
  net::Network net = make_net(1, rng);
  auto opt = busy_optimizer(net.params);
  std::vector<std::vector<double>> active{std::vector<double>(64, 1.0), std::vector<double>(64, 1.0)};

  const auto before = net.params;
  CHECK(redo(net, opt, active, 0.025, rng) == 0);
  CHECK(net.params == before);

  // Unit 5 of the first hidden layer has all-zero incoming weights: score 0.
  auto& first = net.params.layers[0];
  for (double& w : first.weight.row(5)) w = 0.0;
  first.bias[5] = 0.0;
  active[0][5] = 0.0;
  auto snapshot = net.params;
  CHECK(redo(net, opt, active, 0.0, rng) == 1);
  for (double w : net.params.layers[0].weight.row(5)) CHECK(w != 0.0);
  for (std::size_t r = 0; r < 64; ++r) CHECK(net.params.layers[1].weight(r, 5) == 0.0);
  for (std::size_t r = 0; r < 64; ++r)
    if (r != 5) CHECK(net.params.layers[0].weight.row(r)[0] == snapshot.layers[0].weight.row(r)[0]);
  CHECK(opt.m.layers[0].weight(5, 0) == 0.0);
  CHECK(opt.m.layers[0].bias[5] == 0.0);
  CHECK(opt.v.layers[1].weight(0, 5) == 0.0);
  CHECK(opt.m.layers[1].weight(0, 4) == 0.5);

  snapshot = net.params;
  active[0][5] = 1.0;
  active[1][7] = 0.5;
  CHECK(redo(net, opt, active, 0.1, rng) == 0);
  CHECK(net.params == snapshot);

  CHECK_THROWS_AS(redo(net, opt, {active[0]}, 0.1, rng), std::invalid_argument);
  CHECK_THROWS_AS(redo(net, opt, {active[0], std::vector<double>(3, 1.0)}, 0.1, rng), std::invalid_argument);
}

TEST_CASE("redo keeps masked positions at zero") {
  RngStream rng(5);
  net::Network net = make_net(1, rng, net::Arch::residual);
  for (auto& l : net.params.layers)
    for (std::size_t i = 0; i < l.mask.size(); i += 2) l.mask.flat()[i] = 0.0;
  net.params.apply_masks();
  auto opt = net::AdamState::zeros_like(net.params);
  std::vector<std::vector<double>> stats;
  for (std::size_t p = 0; p < net.hidden_param_layers(); ++p) stats.push_back(std::vector<double>(64, 0.0));
  CHECK(redo(net, opt, stats, 0.025, rng) == 64 * net.hidden_param_layers());
  CHECK(net.params.masks_respected());
}

TEST_CASE("weight decay and l2 leave masked weights at zero") {
  RngStream rng(6);
  net::Network net = make_net(1, rng);
  net.params.layers[1].mask.fill(0.0);
  net.params.layers[1].mask(0, 0) = 1.0;
  net.params.apply_masks();
  auto g = net::Gradients::zeros_like(net.params);
  apply_weight_decay(g, net.params, 0.5);
  CHECK(g.layers[1].weight(0, 1) == 0.0);
  apply_l2_unit(net.params);
  CHECK(net.params.masks_respected());
  CHECK_THAT(std::abs(net.params.layers[1].weight(0, 0)), WithinAbs(1.0, 1e-15));
}
