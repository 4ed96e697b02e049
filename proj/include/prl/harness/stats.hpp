#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace prl::harness {

/// Mean of the middle values after dropping floor(m/4) from each end.
/// Throws std::invalid_argument for an empty input.
double iqm(std::span<const double> scores);

/// Per-environment scores, one per seed.
using ScoreTable = std::map<std::string, std::vector<double>>;

/// IQM over all scores of all environments pooled.
double pooled_iqm(const ScoreTable& table);

/// Linear-interpolation percentile (q in [0, 1]) of unsorted values.
double percentile(std::vector<double> values, double q);

struct ConfidenceInterval {
  double low = 0.0;
  double high = 0.0;
  double point = 0.0;
  bool exhaustive = false;
};

/// Resamples seeds with replacement within each environment, recomputes the
/// pooled IQM and takes the (1-level)/2 and (1+level)/2 percentiles. When
/// the number of distinct resamples is at most `resamples`, every resample
/// is enumerated instead. Throws std::invalid_argument if an environment
/// has fewer than two seeds.
ConfidenceInterval stratified_bootstrap_ci(const ScoreTable& table, double level = 0.95, std::size_t resamples = 2000,
                                           std::uint64_t seed = 0);

}  // namespace prl::harness
