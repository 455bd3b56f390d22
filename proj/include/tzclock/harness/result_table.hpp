#pragma once

// Long-format results: one row per (experiment, quantity, x, label).
// Written as tab-separated text with a header line; numbers use %.17g so a
// table survives a write/read round trip exactly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tzclock/errors.hpp"

namespace tzclock::harness {

struct ResultRow {
  std::string experiment;
  std::string quantity;  // e.g. population, phase, sigma, slip_probability
  double x = 0.0;        // dx (nm), dark time (us), epsilon or sigma
  std::string label;     // site / ensemble / quadrature / series tag
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

inline constexpr const char* table_header = "experiment\tquantity\tx\tlabel\tmean\tstderr\tn";

class ResultTable {
 public:
  std::vector<ResultRow> rows;

  bool empty() const { return rows.empty(); }

  void add(ResultRow r) { rows.push_back(std::move(r)); }

  // Binomial row: stderr = sqrt(p(1-p)/n).
  void add_population(const std::string& experiment, const std::string& quantity, double x,
                      const std::string& label, std::int64_t successes, std::int64_t n) {
    if (n < 1) throw InvalidArgument("add_population: n must be >= 1");
    const double p = static_cast<double>(successes) / static_cast<double>(n);
    rows.push_back({experiment, quantity, x, label, p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n});
  }

  std::vector<ResultRow> select(const std::string& quantity, const std::string& label = {}) const {
    std::vector<ResultRow> out;
    for (const auto& r : rows)
      if (r.quantity == quantity && (label.empty() || r.label == label)) out.push_back(r);
    return out;
  }
};

namespace detail {

inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void check_field(const std::string& s) {
  if (s.find_first_of("\t\n") != std::string::npos)
    throw InvalidArgument("result table fields must not contain tabs or newlines: '" + s + "'");
}

}  // namespace detail

inline std::string to_tsv(const ResultTable& t) {
  std::string out = std::string(table_header) + "\n";
  for (const auto& r : t.rows) {
    detail::check_field(r.experiment);
    detail::check_field(r.quantity);
    detail::check_field(r.label);
    out += r.experiment + '\t' + r.quantity + '\t' + detail::num(r.x) + '\t' + r.label + '\t' +
           detail::num(r.mean) + '\t' + detail::num(r.stderr_) + '\t' + std::to_string(r.n) + '\n';
  }
  return out;
}

inline ResultTable parse_tsv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != table_header)
    throw InvalidArgument("result table: missing or wrong header line");
  ResultTable t;
  int line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 7)
      throw InvalidArgument("result table line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      t.rows.push_back({f[0], f[1], std::stod(f[2]), f[3], std::stod(f[4]), std::stod(f[5]), std::stoll(f[6])});
    } catch (const std::exception&) {
      throw InvalidArgument("result table line " + std::to_string(line_no) + ": bad number");
    }
  }
  return t;
}

inline ResultTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read result table '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_tsv(ss.str());
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace tzclock::harness
