#include "motrl/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "motrl/error.hpp"

namespace motrl {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw InputError("cost matrix rows must have equal length");
    }
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

double Matching::total_cost(const CostMatrix& c) const {
  double sum = 0.0;
  for (const auto& [r, col] : pairs) {
    sum += c(r, col);
  }
  return sum;
}

namespace {

using Square = std::vector<std::vector<double>>;

struct Solution {
  std::vector<std::size_t> col_of_row;
  std::vector<double> u;  // row potentials
  std::vector<double> v;  // column potentials
};

// Shortest augmenting path (Jonker-Volgenant flavoured Kuhn-Munkres) on a
// square matrix, O(n^3). Potentials are returned for the tie-break pass.
Solution solve_square(const Square& a) {
  const std::size_t n = a.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  Solution s;
  s.col_of_row.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    s.col_of_row[p[j] - 1] = j - 1;
  }
  s.u.assign(u.begin() + 1, u.end());
  s.v.assign(v.begin() + 1, v.end());
  return s;
}

// Kuhn augmenting path restricted to tight edges and rows >= first_free.
bool augment(std::size_t row, const std::vector<std::vector<char>>& tight,
             std::size_t first_free, std::vector<std::size_t>& col_of_row,
             std::vector<std::size_t>& row_of_col, std::vector<char>& seen) {
  const std::size_t n = tight.size();
  for (std::size_t j = 0; j < n; ++j) {
    if (!tight[row][j] || seen[j]) {
      continue;
    }
    seen[j] = 1;
    const std::size_t owner = row_of_col[j];
    if (owner == n || (owner >= first_free &&
                       augment(owner, tight, first_free, col_of_row, row_of_col, seen))) {
      col_of_row[row] = j;
      row_of_col[j] = row;
      return true;
    }
  }
  return false;
}

// Lexicographically smallest perfect matching inside the tight-edge graph,
// fixing rows in order. Every perfect matching of tight edges is optimal.
std::vector<std::size_t> lexicographic_tight_matching(const Square& a, const Solution& s) {
  const std::size_t n = a.size();
  double scale = 1.0;
  for (const auto& row : a) {
    for (const double x : row) {
      scale = std::max(scale, std::abs(x));
    }
  }
  const double tol = 1e-9 * scale;

  std::vector<std::vector<char>> tight(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      tight[i][j] = std::abs(a[i][j] - s.u[i] - s.v[j]) <= tol;
    }
  }

  std::vector<std::size_t> col_of_row = s.col_of_row;
  std::vector<std::size_t> row_of_col(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!tight[i][col_of_row[i]]) {
      return s.col_of_row;  // duals too noisy to trust; keep the raw optimum
    }
    row_of_col[col_of_row[i]] = i;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < col_of_row[i]; ++j) {
      if (!tight[i][j]) {
        continue;
      }
      // Try to move row i onto column j: free j from its owner, which must
      // re-augment through unfixed rows (> i) without touching column j.
      auto trial_col = col_of_row;
      auto trial_row = row_of_col;
      const std::size_t owner = trial_row[j];
      if (owner < i) {
        continue;  // held by a row already fixed
      }
      const std::size_t old_col = trial_col[i];
      trial_row[old_col] = n;
      trial_col[i] = j;
      trial_row[j] = i;
      std::vector<char> seen(n, 0);
      seen[j] = 1;
      if (augment(owner, tight, i + 1, trial_col, trial_row, seen)) {
        col_of_row = std::move(trial_col);
        row_of_col = std::move(trial_row);
        break;
      }
    }
  }
  return col_of_row;
}

}  // namespace

Matching hungarian(const CostMatrix& c) {
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  if (m == 0 || n == 0) {
    throw InputError("cost matrix must have at least one row and one column");
  }
  double pad = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(c(i, j))) {
        throw InputError("cost matrix entry (" + std::to_string(i) + ", " + std::to_string(j) +
                         ") is not finite");
      }
      pad = std::max(pad, c(i, j));
    }
  }

  const std::size_t size = std::max(m, n);
  Square a(size, std::vector<double>(size, pad));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] = c(i, j);
    }
  }

  const Solution raw = solve_square(a);
  std::vector<std::size_t> cols = lexicographic_tight_matching(a, raw);

  auto total = [&](const std::vector<std::size_t>& assign) {
    double sum = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      sum += a[i][assign[i]];
    }
    return sum;
  };
  if (total(cols) > total(raw.col_of_row)) {
    cols = raw.col_of_row;
  }

  Matching out;
  for (std::size_t i = 0; i < m; ++i) {
    if (cols[i] < n) {
      out.pairs.emplace_back(i, cols[i]);
    }
  }
  return out;
}

}  // namespace motrl
