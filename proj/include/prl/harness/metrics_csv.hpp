#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "prl/diagnostics/diagnostics.hpp"
#include "prl/tensor/matrix.hpp"

namespace prl::harness {

inline constexpr const char* metrics_header =
    "step,return,norm_return,sparsity,q_variance,params_norm,q_norm,srank,dormant_fraction,loss";

void write_metrics_csv(std::ostream& os, const std::vector<diagnostics::MetricRecord>& records);
void save_metrics_csv(const std::filesystem::path& path, const std::vector<diagnostics::MetricRecord>& records);

/// Throws std::runtime_error on a wrong header or a malformed row.
std::vector<diagnostics::MetricRecord> read_metrics_csv(std::istream& is);
std::vector<diagnostics::MetricRecord> load_metrics_csv(const std::filesystem::path& path);

/// Square matrix, one row per line.
void save_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix load_matrix_csv(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);

/// Round-trippable decimal form of a double.
std::string format_double(double v);

}  // namespace prl::harness
