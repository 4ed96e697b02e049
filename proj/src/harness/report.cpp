#include "prl/harness/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "prl/harness/metrics_csv.hpp"
#include "prl/harness/svg.hpp"
#include "prl/harness/sweep.hpp"

namespace prl::harness {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text, ReportOutput& out) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
  out.charts.push_back(path);
}

using Field = double diagnostics::MetricRecord::*;

// Mean of a metric over the runs of a group, aligned by row index.
svg::Series group_series(const std::string& name, const std::vector<std::vector<diagnostics::MetricRecord>>& runs,
                         Field field) {
  svg::Series s;
  s.name = name;
  std::size_t len = 0;
  for (const auto& r : runs) len = std::max(len, r.size());
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    double step = 0.0;
    for (const auto& r : runs) {
      if (i < r.size()) {
        sum += r[i].*field;
        step = static_cast<double>(r[i].step);
        ++n;
      }
    }
    s.x.push_back(step);
    s.y.push_back(sum / static_cast<double>(n));
  }
  return s;
}

}  // namespace

ReportOutput emit_report(const fs::path& sweep_dir, const fs::path& out_dir) {
  ReportOutput out;
  fs::create_directories(out_dir);
  SweepResult result;
  if (fs::exists(sweep_dir / "results.csv")) {
    result.runs = load_results_csv(sweep_dir / "results.csv");
  } else {
    out.warnings.push_back("no results.csv in " + sweep_dir.string());
  }
  result.aggregate = aggregate(result.runs);
  {
    std::ofstream summary(out_dir / "summary.txt");
    write_summary(summary, result);
  }
  if (result.runs.empty()) return out;

  std::vector<svg::Bar> bars;
  for (const auto& a : result.aggregate) bars.push_back({a.group, a.iqm, a.ci_low, a.ci_high});
  write_file(out_dir / "iqm.svg", svg::bar_chart("Final normalized IQM (95% CI)", "IQM", bars), out);

  std::vector<std::string> order;
  std::map<std::string, std::vector<std::vector<diagnostics::MetricRecord>>> metrics;
  std::vector<std::pair<std::string, fs::path>> covariance_files;
  for (const auto& r : result.runs) {
    if (!metrics.count(r.group)) order.push_back(r.group);
    auto& bucket = metrics[r.group];
    const fs::path dir = sweep_dir / "runs" / (r.cell + "_seed" + std::to_string(r.seed));
    const fs::path file = dir / "metrics.csv";
    if (!fs::exists(file)) {
      out.warnings.push_back("missing metrics for " + r.cell + " seed " + std::to_string(r.seed) + "; skipped");
      continue;
    }
    try {
      bucket.push_back(load_metrics_csv(file));
    } catch (const std::exception& e) {
      out.warnings.push_back(std::string("unreadable metrics: ") + e.what());
      continue;
    }
    std::vector<fs::path> covs;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().filename().string().rfind("covariance_step", 0) == 0) covs.push_back(entry.path());
    }
    std::sort(covs.begin(), covs.end());
    if (!covs.empty()) covariance_files.emplace_back(dir.filename().string(), covs.back());
  }

  struct Panel {
    const char* file;
    const char* title;
    Field field;
  };
  const Panel panels[] = {
      {"learning_curves.svg", "Evaluation return", &diagnostics::MetricRecord::episode_return},
      {"normalized_return.svg", "Normalized return", &diagnostics::MetricRecord::normalized_return},
      {"sparsity.svg", "Sparsity", &diagnostics::MetricRecord::sparsity},
      {"q_variance.svg", "Q-target variance", &diagnostics::MetricRecord::q_variance},
      {"params_norm.svg", "Parameter norm", &diagnostics::MetricRecord::params_norm},
      {"q_norm.svg", "Q norm", &diagnostics::MetricRecord::q_norm},
      {"srank.svg", "srank", &diagnostics::MetricRecord::srank},
      {"dormant_fraction.svg", "Dormant fraction", &diagnostics::MetricRecord::dormant_fraction},
      {"loss.svg", "Loss", &diagnostics::MetricRecord::loss},
  };
  for (const auto& p : panels) {
    std::vector<svg::Series> series;
    for (const auto& g : order)
      if (!metrics[g].empty()) series.push_back(group_series(g, metrics[g], p.field));
    if (series.empty()) continue;
    write_file(out_dir / p.file, svg::line_chart(p.title, "step", p.title, series), out);
  }
  for (const auto& [run, path] : covariance_files) {
    const auto m = load_matrix_csv(path);
    write_file(out_dir / ("covariance_" + run + ".svg"), svg::heatmap("Gradient covariance " + run, m), out);
  }
  return out;
}

void write_schedule_csv(std::ostream& os, const prune::PruneSchedule& sched, std::uint64_t total, std::uint64_t stride) {
  if (stride < 1) throw std::invalid_argument("schedule dump: stride must be >= 1");
  os << "t,sparsity\n";
  for (std::uint64_t t = 0; t <= total; t += stride) os << t << ',' << format_double(prune::sparsity_at(sched, t)) << '\n';
  if (total % stride != 0) os << total << ',' << format_double(prune::sparsity_at(sched, total)) << '\n';
}

std::string schedule_chart(const std::vector<prune::PruneSchedule>& schedules, std::uint64_t total) {
  std::vector<svg::Series> series;
  for (const auto& s : schedules) {
    svg::Series line;
    line.name = "s_F=" + format_double(s.final_sparsity) + " [" + std::to_string(s.t_start) + "," + std::to_string(s.t_end) + "]";
    const std::uint64_t stride = std::max<std::uint64_t>(1, total / 200);
    for (std::uint64_t t = 0; t <= total; t += stride) {
      line.x.push_back(static_cast<double>(t));
      line.y.push_back(prune::sparsity_at(s, t));
    }
    series.push_back(std::move(line));
  }
  return svg::line_chart("Sparsity schedule", "gradient step", "sparsity", series);
}

}  // namespace prl::harness
