#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <random>

#include "kh/error.hpp"
#include "kh/pod.hpp"
#include "oracles.hpp"

using namespace kh;
using namespace kh::pod;

namespace {

SnapshotMatrix random_snapshots(std::mt19937_64& rng, std::size_t m, std::size_t n) {
  return SnapshotMatrix(oracle::random_matrix(rng, m, n), 0.5);
}

double dot_cols(const linalg::Matrix& a, std::size_t i, const linalg::Matrix& b, std::size_t j) {
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) s += a(r, i) * b(r, j);
  return s;
}

}  // namespace

TEST_CASE("fluctuations") {
  linalg::Matrix s(2, 2);
  s(0, 0) = 1;
  s(0, 1) = 3;
  s(1, 0) = 2;
  s(1, 1) = 2;
  const Fluctuations f = fluctuations(SnapshotMatrix(s, 1.0));
  CHECK(f.mean == std::vector<double>{2, 2});
  CHECK(f.u(0, 0) == -1.0);
  CHECK(f.u(0, 1) == 1.0);
  CHECK(f.u(1, 0) == 0.0);
  CHECK(f.u(1, 1) == 0.0);

  linalg::Matrix same(3, 4, 1.25);
  const Fluctuations z = fluctuations(SnapshotMatrix(same, 1.0));
  for (double v : z.u.data()) CHECK(v == 0.0);

  std::mt19937_64 rng(1);
  const Fluctuations r = fluctuations(random_snapshots(rng, 10, 5));
  for (std::size_t i = 0; i < 10; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 5; ++j) row += r.u(i, j);
    CHECK(std::abs(row) < 1e-12);
  }
  CHECK_THROWS_AS(fluctuations(SnapshotMatrix(linalg::Matrix(3, 1), 1.0)), InsufficientDataError);
}

TEST_CASE("autocovariance") {
  linalg::Matrix u(2, 2);
  u(1, 0) = 1;
  u(1, 1) = -1;
  const linalg::Matrix c = autocovariance(u);
  CHECK(c(0, 0) == 1.0);
  CHECK(c(0, 1) == -1.0);
  CHECK(c(1, 0) == -1.0);
  CHECK(c(1, 1) == 1.0);
  CHECK(autocovariance(linalg::Matrix(4, 3)) == linalg::Matrix(3, 3));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const linalg::Matrix g = autocovariance(oracle::random_matrix(rng, 50, 6));
    CHECK(g == oracle::transposed(g));
    const auto values = linalg::sym_eig(g).values;
    CHECK(values.back() >= -1e-10);
  }
}

TEST_CASE("two-snapshot toy decomposition") {
  linalg::Matrix s(2, 2);
  s(0, 0) = 1;
  s(1, 0) = 1;
  s(0, 1) = 1;
  s(1, 1) = -1;
  const PodResult r = decompose(SnapshotMatrix(s, 1.0));
  CHECK(r.mean == std::vector<double>{1, 0});
  CHECK(r.eigenvalues[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.eigenvalues[1] == 0.0);
  CHECK(r.degenerate == std::vector<bool>{false, true});
  CHECK(r.nondegenerate_count() == 1);
  CHECK(std::abs(r.modes(0, 0)) < 1e-15);
  CHECK(r.modes(1, 0) == doctest::Approx(1.0));
  CHECK(r.time_coefficients(0, 0) == doctest::Approx(1.0));
  CHECK(r.time_coefficients(0, 1) == doctest::Approx(-1.0));
  CHECK(r.energy_fractions == std::vector<double>{1.0, 0.0});

  const linalg::Matrix k1 = reconstruct(r, 1);
  CHECK(k1(1, 0) == doctest::Approx(1.0));
  CHECK(k1(1, 1) == doctest::Approx(-1.0));
  CHECK(std::abs(k1(0, 0)) < 1e-15);
  CHECK_THROWS_AS(reconstruct(r, 0), ContractError);
  CHECK_THROWS_AS(reconstruct(r, 3), ContractError);
}

TEST_CASE("energy fractions") {
  CHECK(energy_fractions(std::vector<double>{3, 1}).fractions == std::vector<double>{0.75, 0.25});
  CHECK(energy_fractions(std::vector<double>{5, 0, 0}).fractions == std::vector<double>{1, 0, 0});
  const EnergyFractions z = energy_fractions(std::vector<double>{0, 0});
  CHECK(z.degenerate);
  CHECK(z.fractions == std::vector<double>{0, 0});
  CHECK_THROWS_AS(energy_fractions(std::vector<double>{1, -0.5}), ContractError);

  const std::vector<double> f{0.5, 0.3, 0.15, 0.05};
  CHECK(modes_for_energy(f, 0.5) == 1);
  CHECK(modes_for_energy(f, 0.95) == 3);
  CHECK(modes_for_energy(f, 1.0) == 4);
}

TEST_CASE("modes match the SVD of the fluctuations") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const SnapshotMatrix s = random_snapshots(rng, 40, 8);
    const PodResult r = decompose(s);
    const Fluctuations f = fluctuations(s);
    Eigen::MatrixXd u(40, 8);
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t i = 0; i < 40; ++i) u(static_cast<long>(i), static_cast<long>(j)) = f.u(i, j);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(u, Eigen::ComputeThinU);
    const auto& sigma = svd.singularValues();
    for (std::size_t i = 0; i < 8; ++i) {
      const double sv = sigma(static_cast<long>(i));
      CHECK(std::abs(r.eigenvalues[i] - sv * sv) < 1e-8);
      if (r.degenerate[i]) continue;
      double plus = 0.0, minus = 0.0;
      for (std::size_t k = 0; k < 40; ++k) {
        const double w = svd.matrixU()(static_cast<long>(k), static_cast<long>(i));
        plus = std::max(plus, std::abs(r.modes(k, i) - w));
        minus = std::max(minus, std::abs(r.modes(k, i) + w));
      }
      CHECK(std::min(plus, minus) < 1e-8);
    }
  }
}

TEST_CASE("pod invariants on random data") {
  std::mt19937_64 rng(505);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t m = 12 + trial, n = 2 + trial % 9;
    const SnapshotMatrix s = random_snapshots(rng, m, n);
    const PodResult r = decompose(s);
    const Fluctuations f = fluctuations(s);
    double total = 0.0;
    for (double x : r.energy_fractions) total += x;
    CHECK(std::abs(total - 1.0) < 1e-12);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) CHECK(r.eigenvalues[i - 1] >= r.eigenvalues[i]);
      CHECK(r.eigenvalues[i] >= 0.0);
      for (std::size_t j = 0; j < n; ++j) {
        double aa = 0.0;
        for (std::size_t t = 0; t < n; ++t) aa += r.time_coefficients(i, t) * r.time_coefficients(j, t);
        CHECK(std::abs(aa - (i == j ? r.eigenvalues[i] : 0.0)) < 1e-8 * r.eigenvalues[0]);
        if (!r.degenerate[i] && !r.degenerate[j])
          CHECK(std::abs(dot_cols(r.modes, i, r.modes, j) - (i == j ? 1.0 : 0.0)) < 1e-10);
      }
      if (r.degenerate[i]) continue;
      // phi_i lies in span(U): residual after projecting onto an orthonormal basis of U.
      const linalg::QrFactors q = linalg::qr_economy(f.u);
      std::vector<double> res(r.modes.col(i).begin(), r.modes.col(i).end());
      for (std::size_t b = 0; b < r.nondegenerate_count(); ++b) {
        const double d = dot_cols(q.q, b, r.modes, i);
        for (std::size_t k = 0; k < m; ++k) res[k] -= d * q.q(k, b);
      }
      double rn = 0.0;
      for (double x : res) rn += x * x;
      CHECK(std::sqrt(rn) < 1e-10);
      std::size_t at = 0;
      for (std::size_t k = 1; k < m; ++k)
        if (std::abs(r.modes(k, i)) > std::abs(r.modes(at, i))) at = k;
      CHECK(r.modes(at, i) > 0.0);
    }
    const linalg::Matrix full = reconstruct(r, n);
    CHECK(oracle::frob_diff(full, f.u) < 1e-8 * oracle::frob(f.u));
    const PodResult again = decompose(s);
    CHECK(again.modes == r.modes);
    CHECK(again.eigenvalues == r.eigenvalues);
  }
}

TEST_CASE("lag correlation finds a known shift") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> src(35);
  for (double& v : src) v = noise(rng);
  std::vector<double> x(30), y(30);
  for (std::size_t n = 0; n < 30; ++n) {
    x[n] = src[n + 5];
    y[n] = src[n];
  }
  const LagCorrelation lc = lag_correlation(x, y, 8);
  CHECK(lc.lags.size() == 17);
  CHECK(lc.lags.front() == -8);
  CHECK(lc.best_lag == 5);
  CHECK_THROWS_AS(lag_correlation(x, std::vector<double>(3), 2), DimensionError);
}
