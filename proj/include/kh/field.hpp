#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "kh/linalg.hpp"

namespace kh {

// Periodic square grid on [0, length)^2 with n points per side. Coordinates
// are node positions i * dx, i = 0..n-1.
class Grid2D {
public:
  // n must be a power of two and at least 2; the flow solver additionally
  // requires n >= 4.
  explicit Grid2D(std::size_t n, double length = 2.0 * std::numbers::pi);

  std::size_t n() const noexcept { return n_; }
  std::size_t points() const noexcept { return n_ * n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / static_cast<double>(n_); }
  double coord(std::size_t i) const noexcept {
    return static_cast<double>(i) * dx();
  }
  std::vector<double> coords() const;

  bool operator==(const Grid2D&) const = default;

private:
  std::size_t n_;
  double length_;
};

// Real samples on a Grid2D. Storage is row-major: entry (row, col) sits at
// flat index row * n + col. The row index runs along y and the column index
// along x, so value(row, col) is the sample at (x_col, y_row) and an image
// written row by row shows streamwise (x) structure horizontally.
class ScalarField {
public:
  explicit ScalarField(Grid2D grid);  // zero-filled
  ScalarField(Grid2D grid, std::vector<double> values);

  const Grid2D& grid() const noexcept { return grid_; }
  std::size_t n() const noexcept { return grid_.n(); }

  double operator()(std::size_t row, std::size_t col) const {
    return values_[row * grid_.n() + col];
  }
  double& operator()(std::size_t row, std::size_t col) {
    return values_[row * grid_.n() + col];
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double max() const;
  double min() const;
  bool all_finite() const;

  bool operator==(const ScalarField&) const = default;

private:
  Grid2D grid_;
  std::vector<double> values_;
};

// M x N matrix whose columns are flattened snapshots at successive times,
// dt_snap apart. `grid` is set when the columns are fields on a square grid
// (then M = n^2); pod and dmd also accept plain vector data without one.
struct SnapshotMatrix {
  linalg::Matrix data;
  double dt_snap = 1.0;
  std::optional<Grid2D> grid;

  SnapshotMatrix() = default;
  SnapshotMatrix(linalg::Matrix data, double dt_snap,
                 std::optional<Grid2D> grid = std::nullopt);

  std::size_t rows() const noexcept { return data.rows(); }
  std::size_t cols() const noexcept { return data.cols(); }
};

std::vector<double> flatten(const ScalarField& field);
ScalarField unflatten(std::span<const double> column, const Grid2D& grid);

// Column j = flatten(fields[j]), copied bit-exactly.
SnapshotMatrix assemble_snapshots(std::span<const ScalarField> fields,
                                  double dt_snap);

}  // namespace kh
