#include "kh/pod.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <string>

namespace kh::pod {

std::size_t PodResult::nondegenerate_count() const {
  return static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), false));
}

Fluctuations fluctuations(const SnapshotMatrix& s) {
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (n < 2)
    throw InsufficientDataError("pod: need at least 2 snapshots, got " + std::to_string(n));

  Fluctuations out{s.data, std::vector<double>(m, 0.0)};
  for (std::size_t j = 0; j < n; ++j) {
    const auto col = s.data.col(j);
    for (std::size_t i = 0; i < m; ++i) out.mean[i] += col[i];
  }
  for (double& x : out.mean) x /= static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    auto col = out.u.col(j);
    for (std::size_t i = 0; i < m; ++i) col[i] -= out.mean[i];
  }
  return out;
}

linalg::Matrix autocovariance(const linalg::Matrix& u) {
  linalg::Matrix c = linalg::transpose_multiply(u, u);
  for (std::size_t j = 0; j < c.cols(); ++j)
    for (std::size_t i = j + 1; i < c.rows(); ++i) {
      const double avg = 0.5 * (c(i, j) + c(j, i));
      c(i, j) = avg;
      c(j, i) = avg;
    }
  return c;
}

PodResult decompose(const SnapshotMatrix& s) {
  Fluctuations fl = fluctuations(s);
  const std::size_t m = s.rows();
  const std::size_t n = s.cols();
  if (m < n)
    std::cerr << "warning: pod: fewer spatial points (" << m << ") than snapshots (" << n
              << ")\n";

  const linalg::Matrix c = autocovariance(fl.u);
  const linalg::SymmetricEigen eig = linalg::sym_eig(c);

  PodResult out;
  out.mean = std::move(fl.mean);
  out.dt_snap = s.dt_snap;
  out.eigenvalues = eig.values;
  out.modes = linalg::Matrix(m, n);
  out.time_coefficients = linalg::Matrix(n, n);
  out.degenerate.assign(n, false);

  const double lead = std::max(out.eigenvalues.front(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double& lambda = out.eigenvalues[i];
    if (lambda < -kNegativeSlack * std::max(1.0, lead))
      throw NumericalError("pod: eigenvalue " + std::to_string(i) + " = " +
                           std::to_string(lambda) + " is negative beyond round-off");
    if (lambda < 0.0) lambda = 0.0;
    out.degenerate[i] = !(lambda > kDegenerateTol * lead);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (out.degenerate[i]) continue;
    auto phi = out.modes.col(i);
    const auto a = eig.vectors.col(i);
    for (std::size_t k = 0; k < n; ++k) {
      const auto uk = fl.u.col(k);
      for (std::size_t r = 0; r < m; ++r) phi[r] += a[k] * uk[r];
    }
    const double norm = std::sqrt(std::inner_product(phi.begin(), phi.end(), phi.begin(), 0.0));
    std::size_t largest = 0;
    for (std::size_t r = 0; r < m; ++r)
      if (std::abs(phi[r]) > std::abs(phi[largest])) largest = r;
    const double scale = (phi[largest] < 0.0 ? -1.0 : 1.0) / norm;
    for (double& x : phi) x *= scale;

    for (std::size_t k = 0; k < n; ++k) {
      const auto uk = fl.u.col(k);
      out.time_coefficients(i, k) = std::inner_product(phi.begin(), phi.end(), uk.begin(), 0.0);
    }
  }

  out.energy_fractions = energy_fractions(out.eigenvalues).fractions;
  return out;
}

EnergyFractions energy_fractions(std::span<const double> eigenvalues) {
  double lead = 0.0;
  for (double l : eigenvalues) lead = std::max(lead, l);
  EnergyFractions out;
  out.fractions.assign(eigenvalues.size(), 0.0);
  double total = 0.0;
  for (double l : eigenvalues) {
    if (l < -kNegativeSlack * std::max(1.0, lead))
      throw ContractError("energy_fractions: negative eigenvalue " + std::to_string(l));
    total += std::max(l, 0.0);
  }
  if (total == 0.0) {
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < eigenvalues.size(); ++i)
    out.fractions[i] = std::max(eigenvalues[i], 0.0) / total;
  return out;
}

std::size_t modes_for_energy(std::span<const double> fractions, double target) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    cumulative += fractions[i];
    if (cumulative >= target) return i + 1;
  }
  return fractions.size();
}

linalg::Matrix reconstruct(const PodResult& result, std::size_t k) {
  const std::size_t n = result.count();
  if (k < 1 || k > n)
    throw ContractError("reconstruct: rank " + std::to_string(k) + " outside [1, " +
                        std::to_string(n) + "]");
  const std::size_t m = result.modes.rows();
  linalg::Matrix out(m, n);
  for (std::size_t i = 0; i < k; ++i) {
    if (result.degenerate[i]) continue;
    const auto phi = result.modes.col(i);
    for (std::size_t t = 0; t < n; ++t) {
      const double a = result.time_coefficients(i, t);
      auto col = out.col(t);
      for (std::size_t r = 0; r < m; ++r) col[r] += a * phi[r];
    }
  }
  return out;
}

LagCorrelation lag_correlation(std::span<const double> x, std::span<const double> y,
                               long max_lag) {
  if (x.size() != y.size())
    throw DimensionError("lag_correlation: series lengths differ");
  if (max_lag < 0) throw ContractError("lag_correlation: max_lag must be >= 0");
  const long n = static_cast<long>(x.size());
  const double nx = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  const double ny = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
  const double denom = nx * ny;

  LagCorrelation out;
  double best = -1.0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double sum = 0.0;
    for (long t = 0; t < n; ++t) {
      const long u = t + lag;
      if (u < 0 || u >= n) continue;
      sum += x[static_cast<std::size_t>(t)] * y[static_cast<std::size_t>(u)];
    }
    const double r = denom > 0.0 ? sum / denom : 0.0;
    out.lags.push_back(lag);
    out.values.push_back(r);
    if (std::abs(r) > best) {
      best = std::abs(r);
      out.best_lag = lag;
    }
  }
  return out;
}

}  // namespace kh::pod
