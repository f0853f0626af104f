#include "kh/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

namespace kh::dmd {

std::string_view to_string(Stability s) {
  switch (s) {
    case Stability::stable:
      return "stable";
    case Stability::neutral:
      return "neutral";
    case Stability::unstable:
      return "unstable";
  }
  return "unknown";
}

SplitSnapshots split(const SnapshotMatrix& s) {
  const std::size_t n = s.cols();
  if (n < 3)
    throw InsufficientDataError("dmd: need at least 3 snapshots, got " + std::to_string(n));
  const std::size_t m = s.rows();
  SplitSnapshots out{linalg::Matrix(m, n - 1), linalg::Matrix(m, n - 1)};
  for (std::size_t j = 0; j + 1 < n; ++j) {
    std::copy_n(s.data.col(j).begin(), m, out.v1.col(j).begin());
    std::copy_n(s.data.col(j + 1).begin(), m, out.v2.col(j).begin());
  }
  return out;
}

linalg::Matrix companion_via_qr(const linalg::Matrix& v1, const linalg::Matrix& v2,
                                double rank_tol) {
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols())
    throw DimensionError("companion_via_qr: V1 and V2 shapes differ");
  if (v1.rows() < v1.cols()) {
    std::ostringstream msg;
    msg << "companion_via_qr: " << v1.rows() << " spatial points cannot support "
        << v1.cols() << " snapshot columns (need M >= N-1)";
    throw DimensionError(msg.str());
  }
  const linalg::QrFactors qr = linalg::qr_economy(v1);
  const linalg::Matrix rhs = linalg::transpose_multiply(qr.q, v2);
  try {
    return linalg::tri_solve(qr.r, rhs, rank_tol);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError("singular companion: V1 is rank deficient at column " +
                                  std::to_string(e.index()) + " (" + e.what() + ")",
                              e.index());
  }
}

DmdEigs dmd_eigs(const linalg::Matrix& s) {
  linalg::ComplexEigenPairs pairs = linalg::nonsym_eig(s);
  return {std::move(pairs.vectors), std::move(pairs.values)};
}

std::vector<std::complex<double>> spectrum(std::span<const std::complex<double>> mu,
                                           double dt_snap) {
  if (!(dt_snap > 0.0)) throw ContractError("spectrum: dt_snap must be positive");
  std::vector<std::complex<double>> out(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (mu[j] == std::complex<double>{}) {
      out[j] = {-std::numeric_limits<double>::infinity(), 0.0};
      continue;
    }
    out[j] = {std::log(std::abs(mu[j])) / dt_snap, std::arg(mu[j]) / dt_snap};
  }
  return out;
}

linalg::ComplexMatrix dynamic_modes(const linalg::Matrix& v1, const linalg::ComplexMatrix& x) {
  if (v1.cols() != x.rows())
    throw DimensionError("dynamic_modes: V1 has " + std::to_string(v1.cols()) +
                         " columns but X has " + std::to_string(x.rows()) + " rows");
  return linalg::multiply(v1, x);
}

Stability classify(std::complex<double> mu, double tol) {
  if (!(tol >= 0.0)) throw ContractError("classify: tol must be non-negative");
  const double r = std::abs(mu);
  if (r > 1.0 + tol) return Stability::unstable;
  if (r < 1.0 - tol) return Stability::stable;
  return Stability::neutral;
}

Stability classify_growth(std::complex<double> lambda, double dt_snap, double tol) {
  if (!(tol >= 0.0)) throw ContractError("classify_growth: tol must be non-negative");
  const double growth = lambda.real() * dt_snap;
  if (growth > std::log1p(tol)) return Stability::unstable;
  // With tol >= 1 the stable band |mu| < 1 - tol is empty.
  if (tol < 1.0 && growth < std::log1p(-tol)) return Stability::stable;
  return Stability::neutral;
}

DmdResult decompose(const SnapshotMatrix& s, double rank_tol, double stability_tol) {
  const SplitSnapshots parts = split(s);
  DmdResult out;
  out.dt_snap = s.dt_snap;
  out.companion = companion_via_qr(parts.v1, parts.v2, rank_tol);
  DmdEigs eig = dmd_eigs(out.companion);
  out.eigenvalues_mu = std::move(eig.values);
  out.eigenvectors = std::move(eig.vectors);
  out.spectrum_lambda = spectrum(out.eigenvalues_mu, s.dt_snap);
  out.modes = dynamic_modes(parts.v1, out.eigenvectors);
  out.amplitudes.resize(out.count());
  out.stability.resize(out.count());
  for (std::size_t j = 0; j < out.count(); ++j) {
    double sq = 0.0;
    for (const auto& z : out.modes.col(j)) sq += std::norm(z);
    out.amplitudes[j] = std::sqrt(sq);
    out.stability[j] = classify(out.eigenvalues_mu[j], stability_tol);
  }
  return out;
}

std::vector<std::size_t> order_by_amplitude(const DmdResult& r) {
  std::vector<std::size_t> idx(r.count());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return r.amplitudes[a] > r.amplitudes[b];
  });
  return idx;
}

std::vector<std::size_t> order_by_frequency(const DmdResult& r) {
  std::vector<std::size_t> idx = order_by_amplitude(r);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(r.spectrum_lambda[a].imag()) < std::abs(r.spectrum_lambda[b].imag());
  });
  return idx;
}

}  // namespace kh::dmd
