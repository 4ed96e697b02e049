#include "prl/harness/metrics_csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace prl::harness {

namespace {

double parse_field(const std::string& s, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::runtime_error("metrics csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<diagnostics::MetricRecord>& records) {
  os << metrics_header << '\n';
  for (const auto& r : records) {
    os << r.step << ',' << format_double(r.episode_return) << ',' << format_double(r.normalized_return) << ','
       << format_double(r.sparsity) << ',' << format_double(r.q_variance) << ',' << format_double(r.params_norm) << ','
       << format_double(r.q_norm) << ',' << format_double(r.srank) << ',' << format_double(r.dormant_fraction) << ','
       << format_double(r.loss) << '\n';
  }
}

void save_metrics_csv(const std::filesystem::path& path, const std::vector<diagnostics::MetricRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_metrics_csv(os, records);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<diagnostics::MetricRecord> read_metrics_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("metrics csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != metrics_header) throw std::runtime_error("metrics csv: unexpected header '" + line + "'");
  std::vector<diagnostics::MetricRecord> out;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) throw std::runtime_error("metrics csv line " + std::to_string(n) + ": expected 10 fields");
    diagnostics::MetricRecord r;
    char* end = nullptr;
    r.step = std::strtoull(f[0].c_str(), &end, 10);
    if (f[0].empty() || *end != '\0') throw std::runtime_error("metrics csv line " + std::to_string(n) + ": bad step");
    r.episode_return = parse_field(f[1], n);
    r.normalized_return = parse_field(f[2], n);
    r.sparsity = parse_field(f[3], n);
    r.q_variance = parse_field(f[4], n);
    r.params_norm = parse_field(f[5], n);
    r.q_norm = parse_field(f[6], n);
    r.srank = parse_field(f[7], n);
    r.dormant_fraction = parse_field(f[8], n);
    r.loss = parse_field(f[9], n);
    out.push_back(r);
  }
  return out;
}

std::vector<diagnostics::MetricRecord> load_metrics_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return read_metrics_csv(is);
}

void save_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

Matrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split_csv_line(line)) row.push_back(parse_field(f, rows.size() + 1));
    if (!rows.empty() && row.size() != rows[0].size()) throw std::runtime_error("matrix csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace prl::harness
