#include "switchsim/types.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace switchsim {

void Schedule::set(Index i, Index j) {
  assert(i >= 0 && i < to_.size() && j >= 0 && j < to_.size());
  assert(to_(i) == -1);
#ifndef NDEBUG
  for (Index k = 0; k < to_.size(); ++k) assert(to_(k) != j);
#endif
  to_(i) = static_cast<int>(j);
}

CountMatrix Schedule::matrix() const {
  const Index n = to_.size();
  CountMatrix m = CountMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    if (to_(i) >= 0) m(i, to_(i)) = 1;
  }
  return m;
}

Schedule Schedule::from_matrix(const CountMatrix& m) {
  if (!is_valid_schedule(m)) {
    throw std::invalid_argument("not a feasible schedule matrix");
  }
  Schedule s(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) == 1) s.set(i, j);
    }
  }
  return s;
}

bool is_valid_schedule(const CountMatrix& m) {
  if (m.rows() != m.cols()) return false;
  if (((m.array() != 0) && (m.array() != 1)).any()) return false;
  return (m.rowwise().sum().array() <= 1).all() &&
         (m.colwise().sum().array() <= 1).all();
}

bool is_valid_queue_matrix(const CountMatrix& q) {
  return q.rows() == q.cols() && q.rows() >= 1 && (q.array() >= 0).all();
}

std::string format_queue_matrix(const CountMatrix& q) {
  std::ostringstream out;
  for (Index i = 0; i < q.rows(); ++i) {
    for (Index j = 0; j < q.cols(); ++j) {
      if (j > 0) out << ',';
      out << q(i, j);
    }
    out << '\n';
  }
  return out.str();
}

CountMatrix parse_queue_matrix(std::istream& in) {
  std::vector<std::vector<std::int64_t>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::int64_t> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(cell, &pos);
        while (pos < cell.size() &&
               (cell[pos] == ' ' || cell[pos] == '\t' || cell[pos] == '\r')) {
          ++pos;
        }
        if (pos != cell.size() || v < 0) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("line " + std::to_string(lineno) +
                                    ": bad entry '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("empty matrix");
  const Index n = static_cast<Index>(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (static_cast<Index>(rows[i].size()) != n) {
      throw std::invalid_argument("line " + std::to_string(i + 1) +
                                  ": expected " + std::to_string(n) +
                                  " entries, got " +
                                  std::to_string(rows[i].size()));
    }
  }
  CountMatrix q(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) q(i, j) = rows[i][j];
  }
  return q;
}

CountMatrix parse_queue_matrix(const std::string& text) {
  std::istringstream in(text);
  return parse_queue_matrix(in);
}

}  // namespace switchsim
