#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "kh/field.hpp"
#include "kh/linalg.hpp"

namespace kh::dmd {

enum class Stability { stable, neutral, unstable };

std::string_view to_string(Stability s);

inline constexpr double kDefaultStabilityTol = 1e-6;

struct SplitSnapshots {
  linalg::Matrix v1;  // columns 0..N-2
  linalg::Matrix v2;  // columns 1..N-1
};

struct DmdEigs {
  linalg::ComplexMatrix vectors;  // X, unit-norm columns
  std::vector<std::complex<double>> values;  // mu
};

struct DmdResult {
  linalg::Matrix companion;                         // S, (N-1) x (N-1)
  std::vector<std::complex<double>> eigenvalues_mu;
  linalg::ComplexMatrix eigenvectors;               // X
  std::vector<std::complex<double>> spectrum_lambda;
  linalg::ComplexMatrix modes;                      // M x (N-1), DM_j = V1 X_j
  std::vector<double> amplitudes;                   // |DM_j|
  std::vector<Stability> stability;
  double dt_snap = 1.0;

  std::size_t count() const noexcept { return eigenvalues_mu.size(); }
};

SplitSnapshots split(const SnapshotMatrix& s);

// Least-squares companion matrix: V1 = QR (economy), S solves R S = Q^T V2
// by back-substitution. Throws DimensionError when V1 has fewer rows than
// columns and SingularMatrixError (with the failing diagonal index) when
// V1 is numerically rank deficient.
linalg::Matrix companion_via_qr(const linalg::Matrix& v1, const linalg::Matrix& v2,
                                double rank_tol = linalg::kDefaultRankTol);

DmdEigs dmd_eigs(const linalg::Matrix& s);

// lambda_j = (ln|mu_j| + i arg mu_j) / dt on the principal branch, so
// frequencies above pi/dt alias. mu_j = 0 maps to (-inf, 0) instead of
// throwing: zero modes are legitimate for rank-deficient data.
std::vector<std::complex<double>> spectrum(std::span<const std::complex<double>> mu,
                                           double dt_snap);

linalg::ComplexMatrix dynamic_modes(const linalg::Matrix& v1,
                                    const linalg::ComplexMatrix& x);

// |mu| > 1 + tol unstable, |mu| < 1 - tol stable, neutral in between.
Stability classify(std::complex<double> mu, double tol = kDefaultStabilityTol);

// Same band expressed on the continuous-time spectrum: unstable iff
// Re(lambda) * dt > log1p(tol), stable iff Re(lambda) * dt < log1p(-tol).
// Agrees with classify(mu, tol) for lambda = spectrum(mu, dt).
Stability classify_growth(std::complex<double> lambda, double dt_snap,
                          double tol = kDefaultStabilityTol);

// Full pipeline on a snapshot matrix with N >= 3.
DmdResult decompose(const SnapshotMatrix& s, double rank_tol = linalg::kDefaultRankTol,
                    double stability_tol = kDefaultStabilityTol);

// Index orderings used for ranking/export: by descending amplitude, and by
// ascending |Im lambda| (ties keep amplitude order).
std::vector<std::size_t> order_by_amplitude(const DmdResult& r);
std::vector<std::size_t> order_by_frequency(const DmdResult& r);

}  // namespace kh::dmd
