#include "prl/harness/sweep.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "prl/harness/metrics_csv.hpp"
#include "prl/harness/stats.hpp"
#include "prl/net/checkpoint.hpp"

namespace prl::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* results_header =
    "cell,group,env,seed,run_seed,ok,final_return,final_normalized,best_return,realized_sparsity,env_steps,grad_steps,"
    "error";

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string run_dir_name(const Cell& cell, std::uint64_t seed) { return cell.key() + "_seed" + std::to_string(seed); }

agents::RunResult run_one(const ExperimentConfig& cfg, const Cell& cell, std::uint64_t seed, const Dataset* dataset,
                          const fs::path& dir) {
  const auto spec = make_run_spec(cfg, cell);
  const auto rs = run_seed(cell, seed);
  agents::RunResult res;
  if (spec.agent.offline()) {
    if (!dataset) throw std::invalid_argument("offline agent without a dataset");
    if (dataset->env_id != cell.env_id) {
      throw std::invalid_argument("dataset was recorded on '" + dataset->env_id + "', cell wants '" + cell.env_id + "'");
    }
    res = agents::train_offline(spec, dataset->transitions, rs);
  } else {
    res = agents::train_online(spec, rs);
  }
  if (!dir.empty()) {
    fs::create_directories(dir);
    save_metrics_csv(dir / "metrics.csv", res.records);
    if (res.network) net::save_checkpoint(dir / "model.prlc", *res.network);
    for (const auto& c : res.covariances) {
      save_matrix_csv(dir / ("covariance_step" + std::to_string(c.step) + ".csv"), c.matrix);
    }
  }
  return res;
}

std::vector<AggregateRow> aggregate(const std::vector<RunRow>& runs) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const RunRow*>> groups;
  for (const auto& r : runs) {
    if (!groups.count(r.group)) order.push_back(r.group);
    groups[r.group].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& g : order) {
    AggregateRow row;
    row.group = g;
    ScoreTable table;
    double sparsity = 0.0;
    for (const auto* r : groups[g]) {
      ++row.runs;
      if (!r->ok) {
        ++row.failed;
        continue;
      }
      table[r->env_id].push_back(r->final_normalized);
      sparsity += r->realized_sparsity;
    }
    const std::size_t ok = row.runs - row.failed;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.iqm = ok ? pooled_iqm(table) : nan;
    row.mean_sparsity = ok ? sparsity / static_cast<double>(ok) : nan;
    row.ci_low = row.ci_high = nan;
    bool enough = ok > 0;
    for (const auto& [_, s] : table) enough = enough && s.size() >= 2;
    if (enough) {
      const auto ci = stratified_bootstrap_ci(table, 0.95, 2000, fnv1a(g));
      row.ci_low = ci.low;
      row.ci_high = ci.high;
    }
    out.push_back(row);
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  std::optional<Dataset> dataset;
  if (!cfg.dataset.empty()) dataset = load_dataset(cfg.dataset);

  struct Job {
    Cell cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& c : cfg.cells())
    for (auto s : cfg.seeds) jobs.push_back({c, s});

  const fs::path runs_dir = cfg.output_dir / "runs";
  fs::create_directories(runs_dir);
  std::vector<RunRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& job = jobs[i];
      RunRow& row = rows[i];
      row.cell = job.cell.key();
      row.group = job.cell.group_key();
      row.env_id = job.cell.env_id;
      row.seed = job.seed;
      row.run_seed = run_seed(job.cell, job.seed);
      try {
        const auto res = run_one(cfg, job.cell, job.seed, dataset ? &*dataset : nullptr,
                                 runs_dir / run_dir_name(job.cell, job.seed));
        row.ok = res.ok;
        row.error = res.error;
        row.final_return = res.final_return;
        row.final_normalized = res.final_normalized;
        row.best_return = res.best_return;
        row.realized_sparsity = res.realized_sparsity;
        row.env_steps = res.env_steps;
        row.grad_steps = res.grad_steps;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *progress << "[" << (i + 1) << "/" << jobs.size() << "] " << row.cell << " seed " << row.seed
                  << (row.ok ? " ok return " + format_double(row.final_return) : " FAILED: " + row.error) << '\n';
      }
    }
  };
  const std::size_t n_threads = std::min(cfg.workers, jobs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult result{std::move(rows), {}};
  result.aggregate = aggregate(result.runs);
  save_results_csv(cfg.output_dir / "results.csv", result.runs);
  save_aggregate_csv(cfg.output_dir / "aggregate.csv", result.aggregate);
  std::ofstream summary(cfg.output_dir / "summary.txt");
  write_summary(summary, result);
  return result;
}

void save_results_csv(const fs::path& path, const std::vector<RunRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << results_header << '\n';
  for (const auto& r : rows) {
    os << r.cell << ',' << r.group << ',' << r.env_id << ',' << r.seed << ',' << r.run_seed << ',' << (r.ok ? 1 : 0)
       << ',' << format_double(r.final_return) << ',' << format_double(r.final_normalized) << ','
       << format_double(r.best_return) << ',' << format_double(r.realized_sparsity) << ',' << r.env_steps << ','
       << r.grad_steps << ',' << sanitize(r.error) << '\n';
  }
}

std::vector<RunRow> load_results_csv(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != results_header) throw std::runtime_error("results csv: unexpected header");
  std::vector<RunRow> rows;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 13) throw std::runtime_error("results csv line " + std::to_string(n) + ": expected 13 fields");
    try {
      RunRow r;
      r.cell = f[0];
      r.group = f[1];
      r.env_id = f[2];
      r.seed = std::stoull(f[3]);
      r.run_seed = std::stoull(f[4]);
      r.ok = f[5] == "1";
      r.final_return = std::stod(f[6]);
      r.final_normalized = std::stod(f[7]);
      r.best_return = std::stod(f[8]);
      r.realized_sparsity = std::stod(f[9]);
      r.env_steps = std::stoull(f[10]);
      r.grad_steps = std::stoull(f[11]);
      r.error = f[12];
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("results csv line " + std::to_string(n) + ": bad field");
    }
  }
  return rows;
}

void save_aggregate_csv(const fs::path& path, const std::vector<AggregateRow>& rows) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "group,runs,failed,iqm,ci_low,ci_high,mean_sparsity\n";
  for (const auto& r : rows) {
    os << r.group << ',' << r.runs << ',' << r.failed << ',' << format_double(r.iqm) << ',' << format_double(r.ci_low)
       << ',' << format_double(r.ci_high) << ',' << format_double(r.mean_sparsity) << '\n';
  }
}

void write_summary(std::ostream& os, const SweepResult& result) {
  char buf[512];
  os << "runs: " << result.runs.size() << '\n';
  std::size_t failed = 0;
  for (const auto& r : result.runs) failed += r.ok ? 0 : 1;
  os << "failed: " << failed << "\n\n";
  std::snprintf(buf, sizeof buf, "%-48s %5s %8s %8s %8s %9s\n", "group", "runs", "iqm", "ci_low", "ci_high",
                "sparsity");
  os << buf;
  for (const auto& a : result.aggregate) {
    std::snprintf(buf, sizeof buf, "%-48s %5zu %8.4f %8.4f %8.4f %9.4f\n", a.group.c_str(), a.runs, a.iqm, a.ci_low,
                  a.ci_high, a.mean_sparsity);
    os << buf;
  }
  for (const auto& r : result.runs) {
    if (!r.ok) os << "FAILED " << r.cell << " seed " << r.seed << ": " << r.error << '\n';
  }
}

}  // namespace prl::harness
