#include "kh/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

namespace kh {

Grid2D::Grid2D(std::size_t n, double length) : n_(n), length_(length) {
  if (n < 2 || !std::has_single_bit(n))
    throw ContractError("Grid2D: n must be a power of two >= 2, got " +
                        std::to_string(n));
  if (!(length > 0.0) || !std::isfinite(length))
    throw ContractError("Grid2D: domain length must be positive and finite");
}

std::vector<double> Grid2D::coords() const {
  std::vector<double> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = coord(i);
  return c;
}

ScalarField::ScalarField(Grid2D grid)
    : grid_(grid), values_(grid.points(), 0.0) {}

ScalarField::ScalarField(Grid2D grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points())
    throw DimensionError("ScalarField: expected " + std::to_string(grid_.points()) +
                         " values, got " + std::to_string(values_.size()));
  if (!all_finite()) throw ContractError("ScalarField: non-finite sample");
}

double ScalarField::max() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const {
  return *std::min_element(values_.begin(), values_.end());
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

SnapshotMatrix::SnapshotMatrix(linalg::Matrix d, double dt,
                               std::optional<Grid2D> g)
    : data(std::move(d)), dt_snap(dt), grid(g) {
  if (!(dt_snap > 0.0) || !std::isfinite(dt_snap))
    throw ContractError("SnapshotMatrix: dt_snap must be positive and finite");
  if (grid && grid->points() != data.rows())
    throw DimensionError("SnapshotMatrix: " + std::to_string(data.rows()) +
                         " rows do not match a grid of " +
                         std::to_string(grid->points()) + " points");
  for (double v : data.data())
    if (!std::isfinite(v)) throw ContractError("SnapshotMatrix: non-finite entry");
}

std::vector<double> flatten(const ScalarField& field) {
  return {field.values().begin(), field.values().end()};
}

ScalarField unflatten(std::span<const double> column, const Grid2D& grid) {
  if (column.size() != grid.points())
    throw DimensionError("unflatten: column has " + std::to_string(column.size()) +
                         " entries, grid needs " + std::to_string(grid.points()));
  return ScalarField(grid, std::vector<double>(column.begin(), column.end()));
}

SnapshotMatrix assemble_snapshots(std::span<const ScalarField> fields,
                                  double dt_snap) {
  if (fields.size() < 2)
    throw InsufficientDataError("assemble_snapshots: need at least 2 fields, got " +
                                std::to_string(fields.size()));
  const Grid2D& grid = fields.front().grid();
  for (std::size_t j = 1; j < fields.size(); ++j)
    if (!(fields[j].grid() == grid))
      throw DimensionError("assemble_snapshots: field " + std::to_string(j) +
                           " lives on a different grid");

  linalg::Matrix data(grid.points(), fields.size());
  for (std::size_t j = 0; j < fields.size(); ++j)
    std::copy(fields[j].values().begin(), fields[j].values().end(),
              data.col(j).begin());
  return SnapshotMatrix(std::move(data), dt_snap, grid);
}

}  // namespace kh
