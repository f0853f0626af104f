#include "kh/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace kh {

ScalarField lower_jet_scalar(const JetConfig& jet) {
  jet.validate();
  const Grid2D grid(jet.n, jet.length);
  const double y1 = jet.length / 2.0 - jet.case_offset;
  const double y2 = jet.length / 2.0 + jet.case_offset;
  std::vector<double> lower(grid.n());
  double peak = 0.0;
  for (std::size_t r = 0; r < grid.n(); ++r) {
    const double y = grid.coord(r);
    lower[r] = jet_profile(y - y1, jet);
    peak = std::max(peak, lower[r] + jet_profile(y - y2, jet));
  }
  ScalarField out(grid);
  for (std::size_t r = 0; r < grid.n(); ++r)
    for (std::size_t c = 0; c < grid.n(); ++c) out(r, c) = lower[r] / peak;
  return out;
}

double interaction_metric(const ScalarField& lower, const ScalarField& upper,
                          const JetConfig& jet) {
  if (!(lower.grid() == upper.grid()))
    throw DimensionError("interaction_metric: fields live on different grids");
  const Grid2D& grid = lower.grid();
  const std::size_t n = grid.n();
  const double y1 = grid.length() / 2.0 - jet.case_offset;
  const double y2 = grid.length() / 2.0 + jet.case_offset;

  double sab = 0.0, saa = 0.0, sbb = 0.0, pa = 0.0, pb = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const double y = grid.coord(r);
    if (y < y1 || y > y2) continue;
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      mean_a += lower(r, c);
      mean_b += upper(r, c);
    }
    mean_a /= static_cast<double>(n);
    mean_b /= static_cast<double>(n);
    for (std::size_t c = 0; c < n; ++c) {
      pa += lower(r, c) * lower(r, c);
      pb += upper(r, c) * upper(r, c);
      const double a = lower(r, c) - mean_a;
      const double b = upper(r, c) - mean_b;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
  }
  constexpr double floor = 1e-24;
  if (!(saa > floor * pa) || !(sbb > floor * pb)) return 0.0;
  return std::abs(sab) / std::sqrt(saa * sbb);
}

InteractionHistory track_interaction(const JetConfig& jet, const SimConfig& cfg,
                                     long n_steps, long every) {
  if (every < 1) throw ContractError("track_interaction: every must be >= 1");
  const JetFields ic = build_initial_conditions(jet);
  const FlowSolver solver(ic.u.grid(), cfg);
  FlowState full = solver.init_state(ic.u, ic.v, ic.scalar);
  FlowState lower = solver.init_state(ic.u, ic.v, lower_jet_scalar(jet));
  if (cfg.dealias) {
    solver.truncate(full);
    solver.truncate(lower);
  }

  InteractionHistory out;
  for (long s = 0; s <= n_steps; ++s) {
    if (s > 0) {
      full = solver.step(full);
      lower = solver.step(lower);
    }
    if (s % every != 0) continue;
    const ScalarField a = solver.scalar_field(lower);
    const ScalarField c = solver.scalar_field(full);
    std::vector<double> b(c.values().begin(), c.values().end());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= a.values()[i];
    out.times.push_back(full.time);
    out.steps.push_back(s);
    out.metric.push_back(interaction_metric(a, ScalarField(c.grid(), std::move(b)), jet));
  }
  return out;
}

std::optional<double> first_crossing(std::span<const double> times,
                                     std::span<const double> series, double threshold) {
  if (times.size() != series.size())
    throw DimensionError("first_crossing: times and series lengths differ");
  for (std::size_t i = 0; i < series.size(); ++i)
    if (series[i] > threshold) return times[i];
  return std::nullopt;
}

MeanProfile mean_profile(const SnapshotMatrix& s) {
  if (!s.grid) throw DimensionError("mean_profile: snapshot matrix has no grid");
  if (s.cols() == 0) throw InsufficientDataError("mean_profile: no snapshots");
  const Grid2D grid = *s.grid;
  std::vector<double> mean(s.rows(), 0.0);
  for (std::size_t j = 0; j < s.cols(); ++j) {
    const auto col = s.data.col(j);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += col[i];
  }
  for (double& x : mean) x /= static_cast<double>(s.cols());

  MeanProfile out{ScalarField(grid, std::move(mean)), grid.coords(),
                  std::vector<double>(grid.n(), 0.0)};
  for (std::size_t r = 0; r < grid.n(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < grid.n(); ++c) sum += out.mean_field(r, c);
    out.profile[r] = sum / static_cast<double>(grid.n());
  }
  return out;
}

}  // namespace kh
