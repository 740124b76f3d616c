#pragma once

#include <cstddef>
#include <initializer_list>
#include <utility>
#include <vector>

namespace motrl {

// Dense row-major cost matrix: rows are predictions, columns ground truths.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

struct Matching {
  // (row, col), sorted by row.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  double total_cost(const CostMatrix& c) const;
};

/// Minimum-cost one-to-one assignment of size min(rows, cols).
///
/// Among several optimal assignments the one with the lexicographically
/// smallest column-per-row sequence is returned (unmatched rows sort after
/// every real column), so results do not depend on platform or run.
/// Throws InputError on an empty matrix or a non-finite entry.
Matching hungarian(const CostMatrix& c);

}  // namespace motrl
