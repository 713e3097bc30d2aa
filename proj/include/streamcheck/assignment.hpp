#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace streamcheck {

// Dense rows x cols cost matrix, row-major.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// An injective partial mapping rows -> cols covering min(rows, cols) rows.
struct Assignment {
  std::vector<std::optional<std::size_t>> row_to_col;
  double total_cost = 0.0;
};

// Sum of matched costs, accumulated in row order.
double assignment_cost(const CostMatrix& cost, const std::vector<std::optional<std::size_t>>& row_to_col);

// Enumerates every injective mapping; ties keep the lexicographically first.
Assignment solve_exhaustive(const CostMatrix& cost);

// Hungarian method with row/column potentials on the rectangular matrix
// (the smaller side is matched completely).
Assignment solve_hungarian(const CostMatrix& cost);

// Exhaustive search for up to `exhaustive_limit` rows, Hungarian otherwise.
Assignment solve_min_cost(const CostMatrix& cost, std::size_t exhaustive_limit = 3);

}  // namespace streamcheck
