#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prl/prune/schedule.hpp"

namespace prl::harness {

struct ReportOutput {
  std::vector<std::filesystem::path> charts;
  std::vector<std::string> warnings;
};

/// Reads results.csv and runs/*/ under `sweep_dir`, writes summary.txt and
/// SVG charts into `out_dir`. Runs without metrics are skipped with a warning.
ReportOutput emit_report(const std::filesystem::path& sweep_dir, const std::filesystem::path& out_dir);

/// (t, s_t) rows for t = 0..total in steps of `stride`, with a header line.
void write_schedule_csv(std::ostream& os, const prune::PruneSchedule& sched, std::uint64_t total, std::uint64_t stride);

std::string schedule_chart(const std::vector<prune::PruneSchedule>& schedules, std::uint64_t total);

}  // namespace prl::harness
