#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "prl/harness/config.hpp"
#include "prl/harness/dataset.hpp"
#include "prl/harness/metrics_csv.hpp"
#include "prl/harness/report.hpp"
#include "prl/harness/stats.hpp"
#include "prl/harness/svg.hpp"
#include "prl/net/checkpoint.hpp"
#include "prl/harness/sweep.hpp"

using namespace prl;
using namespace prl::harness;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("prl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kTinySweep = R"(
env = cartpole
width = 3
final_sparsity = 0, 0.95
seeds = 0, 1
total_env_steps = 1500
min_replay = 500
log_interval = 500
eval_episodes = 2
final_eval_episodes = 2
probe_size = 32
batch_size = 8
prune_interval = 10
covariance_probe = 4
)";

// IQM over every pooled resample, each equally likely.
std::vector<double> exhaustive_iqms(const ScoreTable& table) {
  std::vector<std::vector<double>> pools{{}};
  for (const auto& [env, scores] : table) {
    const std::size_t m = scores.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < m; ++i) combos *= m;
    std::vector<std::vector<double>> next;
    for (const auto& base : pools) {
      for (std::size_t code = 0; code < combos; ++code) {
        auto pool = base;
        std::size_t c = code;
        for (std::size_t i = 0; i < m; ++i) {
          pool.push_back(scores[c % m]);
          c /= m;
        }
        next.push_back(std::move(pool));
      }
    }
    pools = std::move(next);
  }
  std::vector<double> out;
  for (auto& p : pools) {
    std::sort(p.begin(), p.end());
    const std::size_t cut = p.size() / 4;
    double s = 0.0;
    for (std::size_t i = cut; i < p.size() - cut; ++i) s += p[i];
    out.push_back(s / double(p.size() - 2 * cut));
  }
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(R"(
# comment line
env = cartpole, catch
agent = dqn,rainbow-lite
width = 1, 3
final_sparsity = 0, 0.95   # trailing comment
replay_ratio = 0.5
seeds = 0, 1, 2
gamma = 0.9
out = results/x
workers = 3
)");
  CHECK(cfg.envs == std::vector<std::string>{"cartpole", "catch"});
  CHECK(cfg.widths == std::vector<std::size_t>{1, 3});
  CHECK(cfg.seeds.size() == 3);
  CHECK(cfg.workers == 3);
  CHECK(cfg.output_dir == fs::path("results/x"));
  CHECK(cfg.overrides.at("gamma") == "0.9");
  CHECK(cfg.cells().size() == 2 * 2 * 2 * 2);

  const Cell cell = cfg.cells().front();
  const auto spec = make_run_spec(cfg, cell);
  CHECK(spec.agent.gamma == 0.9);
  CHECK(spec.agent.replay_ratio == 0.5);
}

TEST_CASE("config errors name the line") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_config(text);
      FAIL("no throw for: " << text);
    } catch (const std::invalid_argument& e) {
      CHECK_THAT(e.what(), ContainsSubstring(needle));
    }
  };
  expect_error("env = cartpole\nwidht = 2\n", "line 2");
  expect_error("width = 1\nwidth = 2\n", "line 2");
  expect_error("width = abc\n", "line 1");
  expect_error("no equals sign\n", "line 1");
  expect_error("seeds =\n", "line 1");
  CHECK_THROWS_AS(parse_config("env = pong\n").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("width = 9\n").validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("prune_start = 0.9\nprune_end = 0.5\n").validate(), std::invalid_argument);
  CHECK(std::find(override_keys().begin(), override_keys().end(), "cql_alpha") != override_keys().end());
}

TEST_CASE("cell keys and run seeds") {
  Cell c;
  c.env_id = "cartpole";
  c.width = 3;
  c.final_sparsity = 0.95;
  c.replay_ratio = 0.25;
  CHECK(c.group_key() == "dqn_mlp_w3_s0.95_rr0.25_none_pe0.8");
  CHECK(c.key() == "cartpole_" + c.group_key());
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(run_seed(c, 5) == (5 ^ fnv1a(c.key())));
  Cell d = c;
  d.width = 1;
  CHECK(run_seed(c, 0) != run_seed(d, 0));
}

TEST_CASE("metrics csv round trip") {
  std::vector<diagnostics::MetricRecord> recs(3);
  RngStream rng(1);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    auto& r = recs[i];
    r.step = 1000 * (i + 1);
    r.episode_return = rng.normal() * 100;
    r.normalized_return = rng.normal();
    r.sparsity = rng.uniform();
    r.q_variance = 1.0 / 3.0;
    r.params_norm = 1e-300;
    r.q_norm = 12345.678901234567;
    r.srank = 17;
    r.dormant_fraction = 0.1;
    r.loss = std::nan("");
  }
  std::stringstream ss;
  write_metrics_csv(ss, recs);
  const std::string text = ss.str();
  CHECK(text.substr(0, text.find('\n')) == metrics_header);
  const auto back = read_metrics_csv(ss);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].step == recs[i].step);
    CHECK(back[i].episode_return == recs[i].episode_return);
    CHECK(back[i].q_norm == recs[i].q_norm);
    CHECK(back[i].params_norm == recs[i].params_norm);
    CHECK(std::isnan(back[i].loss));
  }
  std::stringstream bad("step,return\n1,2\n");
  CHECK_THROWS_AS(read_metrics_csv(bad), std::runtime_error);
  std::stringstream short_row(std::string(metrics_header) + "\n1,2,3\n");
  CHECK_THROWS_AS(read_metrics_csv(short_row), std::runtime_error);
  CHECK(split_csv_line("a,,b") == std::vector<std::string>{"a", "", "b"});
  CHECK(std::stod(format_double(0.1)) == 0.1);
}

TEST_CASE("dataset file round trip") {
  Dataset d;
  d.env_id = "gridworld";
  d.obs_dim = 3;
  d.n_actions = 4;
  RngStream rng(2);
  for (int i = 0; i < 50; ++i) {
    replay::Transition t;
    t.obs = {rng.normal(), rng.normal(), rng.normal()};
    t.next_obs = {rng.normal(), rng.normal(), rng.normal()};
    t.action = static_cast<std::uint32_t>(rng.uniform_index(4));
    t.reward = rng.normal();
    t.done = rng.bernoulli(0.3);
    d.transitions.push_back(t);
  }
  std::stringstream ss;
  write_dataset(ss, d);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "PRLD");
  CHECK(read_dataset(ss) == d);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_dataset(truncated), std::runtime_error);
  std::string wrong = bytes;
  wrong[1] = 'X';
  std::stringstream bad_magic(wrong);
  CHECK_THROWS_AS(read_dataset(bad_magic), std::runtime_error);
  CHECK_THROWS(load_dataset("/nonexistent/dir/file.prld"));
}

TEST_CASE("record dataset") {
  net::NetSpec s;
  s.in_dim = 4;
  s.n_actions = 2;
  RngStream rng(3);
  const auto net = net::build_network(s, rng);
  const auto all = record_dataset(net, "cartpole", 100, 1.0, 1);
  CHECK(all.dataset.transitions.size() == 100);
  CHECK(all.dataset.env_id == "cartpole");
  CHECK(all.dataset.obs_dim == 4);
  for (std::size_t i = 0; i + 1 < 100; ++i) {
    if (!all.dataset.transitions[i].done && all.dataset.transitions[i + 1].obs != all.dataset.transitions[i].next_obs)
      continue;
    if (!all.dataset.transitions[i].done) CHECK(all.dataset.transitions[i + 1].obs == all.dataset.transitions[i].next_obs);
  }

  const auto sub = record_dataset(net, "cartpole", 100000, 0.05, 2);
  const double n = double(sub.dataset.transitions.size());
  const double sd = std::sqrt(100000 * 0.05 * 0.95);
  CHECK(std::abs(n - 5000.0) <= 3 * sd);
  CHECK(sub.episodes > 0);

  const auto dir = scratch_dir("dataset");
  save_dataset(dir / "d.prld", sub.dataset);
  CHECK(load_dataset(dir / "d.prld") == sub.dataset);
  CHECK(record_dataset(net, "cartpole", 1000, 0.05, 2).dataset == record_dataset(net, "cartpole", 1000, 0.05, 2).dataset);
  fs::remove_all(dir);
}

TEST_CASE("iqm examples and properties") {
  CHECK(iqm(std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8}) == 4.5);
  CHECK(iqm(std::vector<double>{7, 7, 7}) == 7.0);
  CHECK(iqm(std::vector<double>{0, 0, 0, 100}) == 0.0);
  CHECK(iqm(std::vector<double>{3}) == 3.0);
  CHECK_THROWS_AS(iqm(std::vector<double>{}), std::invalid_argument);

  RngStream rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> x(1 + rng.uniform_index(20));
    for (auto& v : x) v = rng.normal();
    const double base = iqm(x);
    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= 2.5;
    CHECK_THAT(iqm(scaled), WithinAbs(2.5 * base, 1e-12));
    std::shuffle(x.begin(), x.end(), rng);
    CHECK_THAT(iqm(x), WithinAbs(base, 1e-12));
  }
  ScoreTable t{{"a", {1, 2}}, {"b", {3, 4, 5, 6}}};
  CHECK(pooled_iqm(t) == 3.5);
  ScoreTable swapped{{"b", {6, 5, 4, 3}}, {"a", {2, 1}}};
  CHECK(pooled_iqm(swapped) == 3.5);
}

TEST_CASE("percentile") {
  CHECK(percentile({1, 2, 3, 4}, 0.0) == 1.0);
  CHECK(percentile({1, 2, 3, 4}, 1.0) == 4.0);
  CHECK(percentile({4, 1, 3, 2}, 0.5) == 2.5);
  CHECK_THAT(percentile({0, 10}, 0.975), WithinAbs(9.75, 1e-12));
}

TEST_CASE("bootstrap confidence intervals") {
  const ScoreTable same{{"a", {0.5, 0.5}}, {"b", {0.5, 0.5, 0.5}}};
  const auto flat = stratified_bootstrap_ci(same);
  CHECK(flat.low == 0.5);
  CHECK(flat.high == 0.5);

  const ScoreTable toy{{"a", {0.1, 0.9}}, {"b", {0.3, 0.6}}};
  const auto ci = stratified_bootstrap_ci(toy, 0.95, 2000, 1);
  CHECK(ci.exhaustive);
  auto all = exhaustive_iqms(toy);
  REQUIRE(all.size() == 16);
  CHECK(ci.low == percentile(all, 0.025));
  CHECK(ci.high == percentile(all, 0.975));
  CHECK(ci.point == pooled_iqm(toy));
  CHECK(ci.low <= ci.point);
  CHECK(ci.point <= ci.high);

  RngStream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ScoreTable t;
    for (int e = 0; e < 3; ++e) {
      std::vector<double> s(5);
      for (auto& v : s) v = rng.uniform();
      t["env" + std::to_string(e)] = s;
    }
    const auto c = stratified_bootstrap_ci(t, 0.95, 500, trial);
    CHECK_FALSE(c.exhaustive);
    CHECK(c.low <= c.point);
    CHECK(c.point <= c.high);
    CHECK(stratified_bootstrap_ci(t, 0.95, 500, trial).low == c.low);
  }
  CHECK_THROWS_AS(stratified_bootstrap_ci(ScoreTable{{"a", {1.0}}}), std::invalid_argument);
}

TEST_CASE("svg output") {
  CHECK(svg::escape("a<b & \"c\">") == "a&lt;b &amp; &quot;c&quot;&gt;");
  const auto line = svg::line_chart("T<1>", "x", "y", {{"s", {0, 1, 2}, {0, 1, 4}}});
  CHECK_THAT(line, ContainsSubstring("<svg"));
  CHECK_THAT(line, ContainsSubstring("T&lt;1&gt;"));
  CHECK_THAT(line, ContainsSubstring("</svg>"));
  const auto bars = svg::bar_chart("bars", "IQM", {{"dense", 0.5, 0.4, 0.6}, {"sparse", 0.7, NAN, NAN}});
  CHECK_THAT(bars, ContainsSubstring("dense"));
  CHECK_THAT(bars, ContainsSubstring("sparse"));
  const auto heat = svg::heatmap("cov", Matrix{{1, -1}, {0, 0.5}});
  CHECK_THAT(heat, ContainsSubstring("<rect"));
}

TEST_CASE("schedule dump") {
  prune::PruneSchedule s = prune::PruneSchedule::from_fractions(0.95, 1000, 0.2, 0.8);
  std::stringstream ss;
  write_schedule_csv(ss, s, 1000, 100);
  const std::string text = ss.str();
  CHECK_THAT(text, ContainsSubstring("t,sparsity\n0,0\n"));
  CHECK_THAT(text, ContainsSubstring("\n200,0\n"));
  std::stringstream lines(text);
  std::string line;
  std::getline(lines, line);
  std::map<std::uint64_t, double> rows;
  while (std::getline(lines, line)) {
    const auto f = split_csv_line(line);
    REQUIRE(f.size() == 2);
    rows[std::stoull(f[0])] = std::stod(f[1]);
  }
  CHECK(rows.size() == 11);
  CHECK_THAT(rows.at(500), WithinAbs(0.83125, 1e-12));
  CHECK_THAT(rows.at(800), WithinAbs(0.95, 1e-12));
  CHECK_THAT(rows.at(1000), WithinAbs(0.95, 1e-12));
  CHECK_THAT(schedule_chart({s}, 1000), ContainsSubstring("<svg"));
}

TEST_CASE("sweep, determinism and report") {
  auto cfg = parse_config(kTinySweep);
  const auto dir_a = scratch_dir("sweep_a");
  const auto dir_b = scratch_dir("sweep_b");
  cfg.output_dir = dir_a;
  cfg.workers = 2;
  const auto a = run_sweep(cfg);
  cfg.output_dir = dir_b;
  cfg.workers = 1;
  const auto b = run_sweep(cfg);

  REQUIRE(a.runs.size() == 4);
  REQUIRE(a.aggregate.size() == 2);
  for (const auto& r : a.runs) {
    CHECK(r.ok);
    const auto run_dir = dir_a / "runs" / (r.cell + "_seed" + std::to_string(r.seed));
    CHECK(fs::exists(run_dir / "metrics.csv"));
    CHECK(fs::exists(run_dir / "model.prlc"));
    CHECK(slurp(run_dir / "metrics.csv") ==
          slurp(dir_b / "runs" / (r.cell + "_seed" + std::to_string(r.seed)) / "metrics.csv"));
    if (r.cell.find("_s0.95_") != std::string::npos) {
      const auto net = net::load_checkpoint(run_dir / "model.prlc");
      for (const auto& l : net.params.layers) {
        std::size_t zeros = 0;
        for (double v : l.mask.flat()) zeros += v == 0.0;
        CHECK(std::abs(double(zeros) / double(l.mask.size()) - 0.95) <= 1.0 / double(l.mask.size()));
      }
      CHECK_THAT(r.realized_sparsity, WithinAbs(0.95, 0.01));
    } else {
      CHECK(r.realized_sparsity == 0.0);
    }
    bool has_cov = false;
    for (const auto& e : fs::directory_iterator(run_dir))
      has_cov = has_cov || e.path().filename().string().rfind("covariance_step", 0) == 0;
    CHECK(has_cov);
  }
  CHECK(slurp(dir_a / "results.csv") == slurp(dir_b / "results.csv"));
  CHECK(slurp(dir_a / "aggregate.csv") == slurp(dir_b / "aggregate.csv"));
  CHECK(fs::exists(dir_a / "summary.txt"));

  const auto rows = load_results_csv(dir_a / "results.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].final_return == a.runs[0].final_return);
  CHECK(rows[0].run_seed == run_seed(cfg.cells()[0], 0));

  const auto report_dir = dir_a / "report";
  const auto rep = emit_report(dir_a, report_dir);
  CHECK(rep.warnings.empty());
  CHECK(fs::exists(report_dir / "summary.txt"));
  const auto iqm_svg = slurp(report_dir / "iqm.svg");
  for (const auto& g : a.aggregate) CHECK_THAT(iqm_svg, ContainsSubstring(g.group));
  for (const char* f : {"learning_curves.svg", "sparsity.svg", "srank.svg", "dormant_fraction.svg", "q_norm.svg",
                        "params_norm.svg", "q_variance.svg", "loss.svg"})
    CHECK(fs::exists(report_dir / f));
  std::size_t heatmaps = 0;
  for (const auto& e : fs::directory_iterator(report_dir))
    heatmaps += e.path().filename().string().rfind("covariance_", 0) == 0;
  CHECK(heatmaps == 4);

  fs::remove(dir_a / "runs" / (a.runs[0].cell + "_seed0") / "metrics.csv");
  const auto partial = emit_report(dir_a, dir_a / "report2");
  CHECK(partial.warnings.size() == 1);
  CHECK(fs::exists(dir_a / "report2" / "learning_curves.svg"));

  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("empty report writes only the summary") {
  const auto dir = scratch_dir("empty_report");
  const auto rep = emit_report(dir, dir / "out");
  CHECK(fs::exists(dir / "out" / "summary.txt"));
  CHECK(rep.charts.empty());
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "out")) ++files;
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("a failed run is recorded without aborting the sweep") {
  auto cfg = parse_config(R"(
env = gridworld
agent = cql
seeds = 0
total_grad_steps = 50
log_interval = 25
eval_episodes = 1
final_eval_episodes = 1
probe_size = 8
batch_size = 4
)");
  const auto dir = scratch_dir("failed");
  Dataset d;
  d.env_id = "gridworld";
  d.obs_dim = 64;
  d.n_actions = 4;
  for (int i = 0; i < 20; ++i) {
    replay::Transition t;
    t.obs.assign(64, 0.0);
    t.next_obs.assign(64, 0.0);
    t.obs[i] = 1.0;
    t.next_obs[i + 1] = 1.0;
    t.reward = i == 10 ? std::nan("") : 0.0;
    d.transitions.push_back(t);
  }
  save_dataset(dir / "bad.prld", d);
  cfg.dataset = (dir / "bad.prld").string();
  cfg.output_dir = dir / "out";
  const auto res = run_sweep(cfg);
  REQUIRE(res.runs.size() == 1);
  CHECK_FALSE(res.runs[0].ok);
  CHECK_FALSE(res.runs[0].error.empty());
  CHECK(res.aggregate[0].failed == 1);
  CHECK(fs::exists(dir / "out" / "results.csv"));
  fs::remove_all(dir);
}

TEST_CASE("shipped configs parse and validate") {
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(PRL_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    INFO(e.path().string());
    const auto cfg = parse_config(slurp(e.path()));
    CHECK_NOTHROW(cfg.validate());
    CHECK_FALSE(cfg.cells().empty());
    ++count;
  }
  CHECK(count >= 5);
}
