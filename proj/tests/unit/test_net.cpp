#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "prl/net/adam.hpp"
#include "prl/net/checkpoint.hpp"
#include "prl/net/network.hpp"

using namespace prl;
using namespace prl::net;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NetSpec spec_of(Arch arch, std::size_t width, std::size_t in, std::size_t actions, Head head = Head::scalar()) {
  NetSpec s;
  s.arch = arch;
  s.width_multiplier = width;
  s.in_dim = in;
  s.n_actions = actions;
  s.head = head;
  return s;
}

// One dense layer without activation, as a hand-checkable network.
Network linear_network(const Matrix& w, std::vector<double> b) {
  Network net;
  net.spec.in_dim = w.cols();
  net.spec.n_actions = w.rows();
  net.layers = {{LayerKind::dense, w.cols(), w.rows(), Activation::none}};
  net.params.layers.push_back({"head", w, std::move(b), Matrix(w.rows(), w.cols(), 1.0)});
  return net;
}

}  // namespace

TEST_CASE("build_network shapes") {
  RngStream rng(1);
  const Network a = build_network(spec_of(Arch::mlp, 1, 4, 2), rng);
  REQUIRE(a.params.layers.size() == 3);
  CHECK(a.params.layers[0].weight.rows() == 64);
  CHECK(a.params.layers[0].weight.cols() == 4);
  CHECK(a.params.layers[1].weight.rows() == 64);
  CHECK(a.params.layers[2].weight.rows() == 2);
  for (const auto& l : a.params.layers) {
    for (double m : l.mask.flat()) CHECK(m == 1.0);
    for (double b : l.bias) CHECK(b == 0.0);
  }
  CHECK(a.params.weight_count() + a.params.bias_count() == 4 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2);

  const Network b = build_network(spec_of(Arch::mlp, 3, 4, 2), rng);
  CHECK(b.params.layers[0].weight.rows() == 192);
  CHECK(b.params.layers[1].weight.cols() == 192);

  const Network c = build_network(spec_of(Arch::residual, 2, 4, 2, Head::categorical(51, -10, 10)), rng);
  const std::vector<double> x{0.1, -0.2, 0.3, 0.0};
  const auto out = forward(c, x, false);
  CHECK(out.logits.rows() == 2);
  CHECK(out.logits.cols() == 51);
  CHECK(out.q_values.size() == 2);
  for (const auto& s : c.layers)
    if (s.kind == LayerKind::residual_block) CHECK(s.in_dim == s.out_dim);
}

TEST_CASE("build_network errors") {
  RngStream rng(1);
  CHECK_THROWS_AS(build_network(spec_of(Arch::mlp, 1, 0, 2), rng), std::invalid_argument);
  CHECK_THROWS_AS(build_network(spec_of(Arch::mlp, 1, 4, 0), rng), std::invalid_argument);
  CHECK_THROWS_AS(build_network(spec_of(Arch::mlp, 0, 4, 2), rng), std::invalid_argument);
  CHECK_THROWS_AS(build_network(spec_of(Arch::mlp, 9, 4, 2), rng), std::invalid_argument);
  CHECK_THROWS_AS(parse_arch("cnn"), std::invalid_argument);
}

TEST_CASE("parameter count grows with width and matches the layer specs") {
  RngStream rng(2);
  for (Arch arch : {Arch::mlp, Arch::residual}) {
    std::size_t prev = 0;
    for (std::size_t m = 1; m <= 8; ++m) {
      const Network net = build_network(spec_of(arch, m, 6, 3), rng);
      const std::size_t count = parameter_count(net.layers);
      CHECK(count == net.params.weight_count() + net.params.bias_count());
      CHECK(count > prev);
      prev = count;
    }
  }
}

TEST_CASE("initializer range") {
  RngStream rng(3);
  const Network net = build_network(spec_of(Arch::mlp, 2, 10, 4), rng);
  for (const auto& l : net.params.layers) {
    const double limit = std::sqrt(6.0 / double(l.weight.rows() + l.weight.cols()));
    for (double w : l.weight.flat()) CHECK(std::abs(w) <= limit);
  }
}

TEST_CASE("forward examples") {
  RngStream rng(4);
  Network net = build_network(spec_of(Arch::mlp, 1, 3, 2), rng);
  for (auto& l : net.params.layers) l.weight.fill(0.0);
  net.params.layers.back().bias = {0.25, -1.5};
  const std::vector<double> x{1, 2, 3};
  CHECK(forward(net, x, false).q_values == std::vector<double>{0.25, -1.5});

  const Network lin = linear_network(Matrix{{1, 2}, {3, 4}}, {0.5, -0.5});
  const auto out = forward(lin, std::vector<double>{1, -1}, true);
  CHECK(out.q_values == std::vector<double>{-0.5, -1.5});
  CHECK_FALSE(out.cache.empty());
  CHECK(forward(lin, std::vector<double>{1, -1}, false).cache.empty());
  CHECK_THROWS_AS(forward(lin, std::vector<double>{1, 2, 3}, false), std::invalid_argument);
}

TEST_CASE("masked layer weights are inert") {
  RngStream rng(5);
  Network net = build_network(spec_of(Arch::residual, 1, 4, 3), rng);
  Matrix x = oracle::random_matrix(8, 4, rng);
  net.params.layers[1].mask.fill(0.0);
  net.params.apply_masks();
  const auto before = forward_batch(net, x, false).output;
  for (double& w : net.params.layers[1].weight.flat()) w = rng.normal();
  CHECK(forward_batch(net, x, false).output == before);
  net.params.apply_masks();
  CHECK(forward_batch(net, x, false).output == before);
}

TEST_CASE("batched and single forward agree") {
  RngStream rng(6);
  for (Arch arch : {Arch::mlp, Arch::residual}) {
    const Network net = build_network(spec_of(arch, 2, 5, 3, Head::categorical(11, -1, 1)), rng);
    const Matrix x = oracle::random_matrix(4, 5, rng);
    const auto batch = forward_batch(net, x, false).output;
    for (std::size_t i = 0; i < 4; ++i) {
      const auto single = forward(net, x.row(i), false);
      for (std::size_t j = 0; j < batch.cols(); ++j) CHECK_THAT(single.logits.flat()[j], WithinAbs(batch(i, j), 1e-12));
    }
  }
}

TEST_CASE("backward examples") {
  const Matrix w{{0.5, -1.0}, {2.0, 0.25}};
  Network lin = linear_network(w, {0.0, 0.0});
  const Matrix x{{1.0, 2.0}};
  auto fwd = forward_batch(lin, x, true);
  // loss = 0.5 |Wx|^2, so dL/dout = Wx and dL/dW = (Wx) x^T.
  const Gradients g = backward(lin, fwd.cache, fwd.output);
  const double y0 = 0.5 - 2.0, y1 = 2.0 + 0.5;
  CHECK(g.layers[0].weight == Matrix{{y0 * 1, y0 * 2}, {y1 * 1, y1 * 2}});
  CHECK(g.layers[0].bias == std::vector<double>{y0, y1});

  lin.params.layers[0].mask(0, 1) = 0.0;
  lin.params.apply_masks();
  fwd = forward_batch(lin, x, true);
  CHECK(backward(lin, fwd.cache, fwd.output).layers[0].weight(0, 1) == 0.0);

  CHECK_THROWS_AS(backward(lin, ForwardCache{}, fwd.output), std::logic_error);
}

TEST_CASE("relu blocks the gradient at negative pre-activations") {
  RngStream rng(7);
  Network net = build_network(spec_of(Arch::mlp, 1, 2, 1), rng);
  net.params.layers[0].bias.assign(64, -100.0);
  const Matrix x{{0.1, 0.2}};
  const auto fwd = forward_batch(net, x, true);
  const Gradients g = backward(net, fwd.cache, Matrix{{1.0}});
  for (double v : g.layers[0].weight.flat()) CHECK(v == 0.0);
  for (double v : g.layers[0].bias) CHECK(v == 0.0);
}

TEST_CASE("backward matches finite differences") {
  RngStream rng(8);
  for (int trial = 0; trial < 12; ++trial) {
    const Arch arch = trial % 2 ? Arch::residual : Arch::mlp;
    const Network net = oracle::small_network(arch, trial % 4 >= 2, rng);
    const Matrix x = oracle::random_matrix(3, net.spec.in_dim, rng);
    const Matrix c = oracle::random_matrix(3, net.output_dim(), rng);
    const auto res = oracle::grad_check(net, x, c);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("softmax and expected values") {
  const std::vector<double> logits{0, 0, 0, 1, 2, 3};
  std::vector<double> p(6);
  softmax_atoms(logits, 3, p);
  CHECK_THAT(p[0], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(p[3] + p[4] + p[5], WithinAbs(1.0, 1e-15));
  CHECK(p[5] > p[4]);
  const std::vector<double> z{-1, 0, 1};
  const auto q = expected_values(p, z);
  CHECK_THAT(q[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(q[1], WithinAbs(p[5] - p[3], 1e-15));

  const std::vector<double> huge{1000, 0};
  std::vector<double> hp(2);
  softmax_atoms(huge, 2, hp);
  CHECK(hp[0] == 1.0);
  CHECK(std::isfinite(hp[1]));
}

TEST_CASE("adam examples") {
  AdamConfig cfg;
  cfg.lr = 0.1;
  Network lin = linear_network(Matrix{{1.0, 2.0}}, {0.5});
  AdamState st = AdamState::zeros_like(lin.params);

  Gradients zero = Gradients::zeros_like(lin.params);
  st.v.layers[0].weight(0, 0) = 0.4;
  const MaskedParams before = lin.params;
  adam_step(lin.params, zero, st, cfg);
  CHECK(lin.params == before);
  CHECK(st.m.layers[0].weight(0, 0) == 0.0);
  CHECK_THAT(st.v.layers[0].weight(0, 0), WithinAbs(0.3996, 1e-15));

  // From m = v = 0 the first step is lr * g / (|g| + eps).
  AdamState fresh = AdamState::zeros_like(lin.params);
  Gradients g = Gradients::zeros_like(lin.params);
  g.layers[0].weight(0, 1) = -0.3;
  g.layers[0].bias[0] = 2.0;
  adam_step(lin.params, g, fresh, cfg);
  CHECK_THAT(lin.params.layers[0].weight(0, 1), WithinAbs(2.0 + 0.1 * 0.3 / (0.3 + cfg.eps), 1e-14));
  CHECK_THAT(lin.params.layers[0].bias[0], WithinAbs(0.5 - 0.1 * 2.0 / (2.0 + cfg.eps), 1e-14));
  CHECK(fresh.step == 1);
}

TEST_CASE("adam keeps masked weights at zero") {
  RngStream rng(9);
  Network net = build_network(spec_of(Arch::mlp, 1, 4, 2), rng);
  net.params.layers[1].mask(3, 7) = 0.0;
  net.params.apply_masks();
  Gradients g = Gradients::zeros_like(net.params);
  g.layers[1].weight.fill(1.0);
  AdamState st = AdamState::zeros_like(net.params);
  adam_step(net.params, g, st, {});
  CHECK(net.params.layers[1].weight(3, 7) == 0.0);
  CHECK(net.params.masks_respected());

  g.layers[0].bias[2] = std::numeric_limits<double>::quiet_NaN();
  try {
    adam_step(net.params, g, st, {});
    FAIL("no throw");
  } catch (const std::domain_error& e) {
    CHECK(std::string(e.what()).find(net.params.layers[0].name) != std::string::npos);
  }
}

TEST_CASE("masked params bookkeeping") {
  RngStream rng(10);
  Network net = build_network(spec_of(Arch::mlp, 1, 4, 2), rng);
  net.params.layers[2].mask(0, 0) = 0.0;
  net.params.layers[2].mask(1, 0) = 0.0;
  CHECK_FALSE(net.params.masks_respected());
  net.params.apply_masks();
  CHECK(net.params.masks_respected());
  CHECK(net.params.masked_count() == 2);
  CHECK_THAT(net.params.sparsity(), WithinAbs(2.0 / double(net.params.weight_count()), 1e-15));
  const Gradients g = Gradients::zeros_like(net.params);
  CHECK(g.flatten_unmasked(net.params).size() == net.params.weight_count() - 2 + net.params.bias_count());
}

TEST_CASE("checkpoint round trip") {
  RngStream rng(11);
  Network net = build_network(spec_of(Arch::residual, 2, 5, 3, Head::categorical(7, -3, 4)), rng);
  net.params.layers[1].mask(0, 0) = 0.0;
  net.params.apply_masks();
  std::stringstream ss;
  write_checkpoint(ss, net);
  const Network back = read_checkpoint(ss);
  CHECK(back.spec == net.spec);
  CHECK(back.params == net.params);

  std::string bytes;
  {
    std::stringstream s2;
    write_checkpoint(s2, net);
    bytes = s2.str();
  }
  CHECK(bytes.substr(0, 4) == "PRLC");
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_checkpoint(truncated), std::runtime_error);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream bad_magic(bad);
  CHECK_THROWS_AS(read_checkpoint(bad_magic), std::runtime_error);
}
