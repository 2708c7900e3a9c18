#include "pda/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace pda {

namespace {

bool parse_cell(const std::string& cell, double& out) {
  std::size_t lo = 0;
  std::size_t hi = cell.size();
  while (lo < hi && std::isspace(static_cast<unsigned char>(cell[lo]))) ++lo;
  while (hi > lo && std::isspace(static_cast<unsigned char>(cell[hi - 1]))) --hi;
  if (lo == hi) return false;
  const char* first = cell.data() + lo;
  const char* last = cell.data() + hi;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return cells;
}

}  // namespace

SampleSet load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_samples: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t cols = 0;
  std::size_t line_no = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() && rows.empty() && first_content_line) continue;
    if (line.empty()) {
      // only a trailing blank line is tolerated
      if (in.peek() == std::ifstream::traits_type::eof()) break;
      throw std::runtime_error("load_samples: blank line " + std::to_string(line_no));
    }
    const auto cells = split_line(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size(); ++c)
      if (!parse_cell(cells[c], values[c])) {
        numeric = false;
        break;
      }
    if (!numeric) {
      if (first_content_line) {  // header
        first_content_line = false;
        continue;
      }
      throw std::runtime_error("load_samples: non-numeric cell on line " +
                               std::to_string(line_no));
    }
    first_content_line = false;
    for (const double v : values)
      if (!std::isfinite(v))
        throw std::runtime_error("load_samples: non-finite value on line " +
                                 std::to_string(line_no));
    if (rows.empty()) {
      cols = values.size();
    } else if (values.size() != cols) {
      throw std::runtime_error("load_samples: ragged row on line " +
                               std::to_string(line_no));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error("load_samples: no data rows in " + path);

  Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return SampleSet(std::move(m));
}

void write_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out << buf;
      if (j + 1 < m.cols()) out << ',';
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

}  // namespace pda
