#include "streamcheck/assignment.hpp"

#include <limits>
#include <utility>

namespace streamcheck {

namespace {

CostMatrix transpose(const CostMatrix& m) {
  CostMatrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

std::vector<std::optional<std::size_t>> invert(const std::vector<std::optional<std::size_t>>& map,
                                               std::size_t size) {
  std::vector<std::optional<std::size_t>> out(size);
  for (std::size_t i = 0; i < map.size(); ++i)
    if (map[i]) out[*map[i]] = i;
  return out;
}

// rows <= cols: every row gets a distinct column.
void enumerate(const CostMatrix& cost, std::size_t row, std::vector<bool>& used,
               std::vector<std::optional<std::size_t>>& cur, double& best,
               std::vector<std::optional<std::size_t>>& best_map) {
  if (row == cost.rows()) {
    // Re-sum in row order so equal mappings give bit-identical totals.
    const double total = assignment_cost(cost, cur);
    if (total < best) {
      best = total;
      best_map = cur;
    }
    return;
  }
  for (std::size_t c = 0; c < cost.cols(); ++c) {
    if (used[c]) continue;
    used[c] = true;
    cur[row] = c;
    enumerate(cost, row + 1, used, cur, best, best_map);
    used[c] = false;
  }
  cur[row].reset();
}

std::vector<std::optional<std::size_t>> exhaustive_tall_or_square(const CostMatrix& cost) {
  std::vector<bool> used(cost.cols(), false);
  std::vector<std::optional<std::size_t>> cur(cost.rows()), best_map(cost.rows());
  double best = std::numeric_limits<double>::infinity();
  enumerate(cost, 0, used, cur, best, best_map);
  return best_map;
}

// Classic O(n^2 m) shortest augmenting path with potentials; requires n <= m.
std::vector<std::optional<std::size_t>> hungarian_wide(const CostMatrix& a) {
  const std::size_t n = a.rows(), m = a.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
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
  std::vector<std::optional<std::size_t>> row_to_col(n);
  for (std::size_t j = 1; j <= m; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

}  // namespace

double assignment_cost(const CostMatrix& cost, const std::vector<std::optional<std::size_t>>& row_to_col) {
  double total = 0.0;
  for (std::size_t r = 0; r < row_to_col.size(); ++r)
    if (row_to_col[r]) total += cost(r, *row_to_col[r]);
  return total;
}

Assignment solve_exhaustive(const CostMatrix& cost) {
  Assignment out;
  if (cost.rows() <= cost.cols()) {
    out.row_to_col = exhaustive_tall_or_square(cost);
  } else {
    out.row_to_col = invert(exhaustive_tall_or_square(transpose(cost)), cost.rows());
  }
  out.total_cost = assignment_cost(cost, out.row_to_col);
  return out;
}

Assignment solve_hungarian(const CostMatrix& cost) {
  Assignment out;
  if (cost.rows() == 0 || cost.cols() == 0) {
    out.row_to_col.assign(cost.rows(), std::nullopt);
    return out;
  }
  if (cost.rows() <= cost.cols()) {
    out.row_to_col = hungarian_wide(cost);
  } else {
    out.row_to_col = invert(hungarian_wide(transpose(cost)), cost.rows());
  }
  out.total_cost = assignment_cost(cost, out.row_to_col);
  return out;
}

Assignment solve_min_cost(const CostMatrix& cost, std::size_t exhaustive_limit) {
  if (cost.rows() <= exhaustive_limit) return solve_exhaustive(cost);
  return solve_hungarian(cost);
}

}  // namespace streamcheck
