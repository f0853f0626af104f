#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kh/field.hpp"
#include "kh/linalg.hpp"

namespace kh::pod {

// Relative threshold below which an eigenvalue counts as zero: lambda_i is
// degenerate when lambda_i <= kDegenerateTol * lambda_1. Eigenvalues in
// (-kNegativeSlack * scale, 0) are clipped to 0.
inline constexpr double kDegenerateTol = 1e-12;
inline constexpr double kNegativeSlack = 1e-10;

struct Fluctuations {
  linalg::Matrix u;          // M x N, column j = snapshot j - mean
  std::vector<double> mean;  // length M
};

struct PodResult {
  std::vector<double> mean;
  std::vector<double> eigenvalues;       // descending, unscaled (no 1/M)
  linalg::Matrix modes;                  // M x N, column i = phi_i
  linalg::Matrix time_coefficients;      // N x N, (i, n) = a_i(t_n)
  std::vector<double> energy_fractions;  // sum to 1 unless all degenerate
  std::vector<bool> degenerate;          // zero-eigenvalue modes (column left 0)
  double dt_snap = 1.0;

  std::size_t count() const noexcept { return eigenvalues.size(); }
  std::size_t nondegenerate_count() const;
};

struct EnergyFractions {
  std::vector<double> fractions;
  bool degenerate = false;  // total energy was zero
};

Fluctuations fluctuations(const SnapshotMatrix& s);

// C = U^T U, symmetrised as (C + C^T)/2.
linalg::Matrix autocovariance(const linalg::Matrix& u);

// Method of snapshots: eigenpairs of U^T U sorted descending, modes
// phi_i = U A_i / |U A_i|, time coefficients a_i(t_n) = phi_i . U^n. Each
// mode is flipped so its largest-magnitude entry is positive. Warns on
// stderr when M < N.
PodResult decompose(const SnapshotMatrix& s);

EnergyFractions energy_fractions(std::span<const double> eigenvalues);

// Smallest k with cumulative energy fraction >= target (1-based); N if the
// target is never reached.
std::size_t modes_for_energy(std::span<const double> fractions, double target);

// Rank-k fluctuation reconstruction sum_{i<k} phi_i a_i(t_n).
linalg::Matrix reconstruct(const PodResult& result, std::size_t k);

// Normalised cross-correlation of two coefficient series at integer lags:
// r(l) = sum_n x_n y_{n+l} / (|x| |y|), lag in [-max_lag, max_lag].
struct LagCorrelation {
  std::vector<long> lags;
  std::vector<double> values;
  long best_lag = 0;  // lag of max |r|
};
LagCorrelation lag_correlation(std::span<const double> x, std::span<const double> y,
                               long max_lag);

}  // namespace kh::pod
