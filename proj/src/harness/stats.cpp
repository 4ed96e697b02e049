#include "prl/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "prl/tensor/rng.hpp"

namespace prl::harness {

double iqm(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("iqm: empty input");
  std::vector<double> v(scores.begin(), scores.end());
  std::sort(v.begin(), v.end());
  const std::size_t drop = v.size() / 4;
  double sum = 0.0;
  for (std::size_t i = drop; i < v.size() - drop; ++i) sum += v[i];
  return sum / static_cast<double>(v.size() - 2 * drop);
}

double pooled_iqm(const ScoreTable& table) {
  std::vector<double> all;
  for (const auto& [_, s] : table) all.insert(all.end(), s.begin(), s.end());
  return iqm(all);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile: empty input");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConfidenceInterval stratified_bootstrap_ci(const ScoreTable& table, double level, std::size_t resamples,
                                           std::uint64_t seed) {
  if (table.empty()) throw std::invalid_argument("bootstrap: empty score table");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: level must be in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("bootstrap: need at least one resample");
  std::vector<const std::vector<double>*> strata;
  double combos = 1.0;
  for (const auto& [env, s] : table) {
    if (s.size() < 2) throw std::invalid_argument("bootstrap: env '" + env + "' needs at least two seeds");
    strata.push_back(&s);
    combos *= std::pow(static_cast<double>(s.size()), static_cast<double>(s.size()));
  }

  ConfidenceInterval ci;
  ci.point = pooled_iqm(table);
  std::vector<double> stats;
  std::vector<double> pooled;
  if (combos <= static_cast<double>(resamples)) {
    ci.exhaustive = true;
    // Odometer over every choice of seed index for every slot of every stratum.
    std::vector<std::size_t> base;
    for (const auto* s : strata) base.insert(base.end(), s->size(), s->size());
    std::vector<std::size_t> digits(base.size(), 0);
    for (;;) {
      pooled.clear();
      std::size_t k = 0;
      for (const auto* s : strata)
        for (std::size_t j = 0; j < s->size(); ++j) pooled.push_back((*s)[digits[k++]]);
      stats.push_back(iqm(pooled));
      std::size_t pos = 0;
      while (pos < digits.size() && ++digits[pos] == base[pos]) digits[pos++] = 0;
      if (pos == digits.size()) break;
    }
  } else {
    RngStream rng(seed, 0);
    stats.reserve(resamples);
    for (std::size_t r = 0; r < resamples; ++r) {
      pooled.clear();
      for (const auto* s : strata)
        for (std::size_t j = 0; j < s->size(); ++j) pooled.push_back((*s)[rng.uniform_index(s->size())]);
      stats.push_back(iqm(pooled));
    }
  }
  ci.low = percentile(stats, (1.0 - level) / 2.0);
  ci.high = percentile(stats, (1.0 + level) / 2.0);
  return ci;
}

}  // namespace prl::harness
