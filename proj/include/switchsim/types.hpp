#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace switchsim {

/// Packet-count matrix: rows are input ports, columns are output ports.
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// A crossbar schedule: a (possibly partial) matching of inputs to outputs.
/// Stored as the matched output per input, -1 for unmatched. This keeps the
/// row/column feasibility constraint structural instead of asserted.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(Index n) : to_(Eigen::VectorXi::Constant(n, -1)) {}

  Index ports() const { return to_.size(); }

  int matched(Index i) const { return to_(i); }

  // Matches input i to output j. Overwriting an existing match or reusing an
  // output is a caller bug; checked in debug builds.
  void set(Index i, Index j);

  /// Number of matched (input, output) pairs.
  Index size() const { return (to_.array() >= 0).count(); }

  bool empty() const { return size() == 0; }

  /// The 0/1 matrix form.
  CountMatrix matrix() const;

  /// Parses a 0/1 matrix; throws std::invalid_argument if it is not a
  /// feasible schedule.
  static Schedule from_matrix(const CountMatrix& m);

  bool operator==(const Schedule& other) const { return to_ == other.to_; }

 private:
  Eigen::VectorXi to_;
};

/// True iff m is 0/1 with every row and column sum <= 1.
bool is_valid_schedule(const CountMatrix& m);

/// True iff q is square with all entries >= 0.
bool is_valid_queue_matrix(const CountMatrix& q);

/// Text form of a queue matrix: one row per line, comma-separated counts.
std::string format_queue_matrix(const CountMatrix& q);

/// Parses the text form. Throws std::invalid_argument naming the offending
/// 1-based line on malformed input.
CountMatrix parse_queue_matrix(std::istream& in);
CountMatrix parse_queue_matrix(const std::string& text);

}  // namespace switchsim
