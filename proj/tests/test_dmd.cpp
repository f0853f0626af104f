#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kh/dmd.hpp"
#include "kh/error.hpp"
#include "oracles.hpp"

using namespace kh;
using namespace kh::dmd;
using cplx = std::complex<double>;

namespace {

const double kTheta = std::numbers::pi / 7.0;

SnapshotMatrix rotation_data(std::size_t n, double dt) {
  linalg::Matrix s(2, n);
  for (std::size_t j = 0; j < n; ++j) {
    s(0, j) = std::cos(static_cast<double>(j) * kTheta);
    s(1, j) = std::sin(static_cast<double>(j) * kTheta);
  }
  return SnapshotMatrix(s, dt);
}

// x_{j+1} = A x_j with A = P diag(d) P^-1 for a fixed P.
linalg::Matrix known_map() {
  linalg::Matrix a(4, 4);
  const double rows[4][4] = {{0.9, 0.2, 0.0, 0.1},
                             {-0.3, 0.8, 0.1, 0.0},
                             {0.0, 0.1, 0.5, 0.2},
                             {0.1, 0.0, -0.2, 0.6}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) a(i, j) = rows[i][j];
  return a;
}

SnapshotMatrix iterate(const linalg::Matrix& a, std::vector<double> x, std::size_t n, double dt) {
  linalg::Matrix s(x.size(), n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < x.size(); ++i) s(i, j) = x[i];
    std::vector<double> next(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t k = 0; k < x.size(); ++k) next[i] += a(i, k) * x[k];
    x = next;
  }
  return SnapshotMatrix(s, dt);
}

}  // namespace

TEST_CASE("split") {
  linalg::Matrix s(2, 3);
  for (std::size_t j = 0; j < 3; ++j) {
    s(0, j) = static_cast<double>(j);
    s(1, j) = 10.0 + static_cast<double>(j);
  }
  const SplitSnapshots p = split(SnapshotMatrix(s, 1.0));
  CHECK(p.v1.cols() == 2);
  CHECK(p.v1(0, 0) == 0.0);
  CHECK(p.v1(1, 1) == 11.0);
  CHECK(p.v2(0, 0) == 1.0);
  CHECK(p.v2(1, 1) == 12.0);
  CHECK_THROWS_AS(split(SnapshotMatrix(linalg::Matrix(2, 2), 1.0)), InsufficientDataError);

  linalg::Matrix big(5, 30);
  const SplitSnapshots q = split(SnapshotMatrix(big, 1.0));
  CHECK(q.v1.cols() == 29);
  CHECK(q.v2.cols() == 29);
}

TEST_CASE("companion matrix") {
  SUBCASE("rotation, N = 3") {
    const SplitSnapshots p = split(rotation_data(3, 1.0));
    const linalg::Matrix s = companion_via_qr(p.v1, p.v2);
    const auto mu = dmd_eigs(s).values;
    CHECK(std::abs(mu[0] - std::polar(1.0, kTheta)) < 1e-10);
    CHECK(std::abs(mu[1] - std::polar(1.0, -kTheta)) < 1e-10);
  }
  SUBCASE("colinear snapshots") {
    linalg::Matrix c(2, 3);
    for (std::size_t j = 0; j < 3; ++j) {
      c(0, j) = std::pow(0.9, static_cast<double>(j));
      c(1, j) = 2.0 * std::pow(0.9, static_cast<double>(j));
    }
    const SplitSnapshots p = split(SnapshotMatrix(c, 1.0));
    try {
      companion_via_qr(p.v1, p.v2);
      FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
      CHECK(e.index() == 1);
      CHECK(std::string(e.what()).find("singular companion") != std::string::npos);
    }
  }
  SUBCASE("too few rows") {
    const SplitSnapshots p = split(rotation_data(4, 1.0));
    CHECK_THROWS_AS(companion_via_qr(p.v1, p.v2), DimensionError);
  }
  SUBCASE("exactly linear data") {
    const SnapshotMatrix s = iterate(known_map(), {1.0, 0.5, -0.3, 0.8}, 5, 1.0);
    const SplitSnapshots p = split(s);
    const linalg::Matrix c = companion_via_qr(p.v1, p.v2);
    const linalg::Matrix fit = oracle::matmul(p.v1, c);
    CHECK(oracle::frob_diff(fit, p.v2) / oracle::frob(p.v2) < 1e-10);
  }
}

TEST_CASE("dmd_eigs") {
  linalg::Matrix d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = 0.5;
  const DmdEigs e = dmd_eigs(d);
  CHECK(e.values == std::vector<cplx>{2.0, 0.5});
  CHECK(std::abs(e.vectors(0, 0) - 1.0) < 1e-14);
  CHECK(std::abs(e.vectors(1, 1) - 1.0) < 1e-14);

  linalg::Matrix r(2, 2);
  r(0, 1) = -1.0;
  r(1, 0) = 1.0;
  const DmdEigs er = dmd_eigs(r);
  CHECK(std::abs(er.values[0] - cplx(0, 1)) < 1e-14);
  CHECK(std::abs(er.values[1] - cplx(0, -1)) < 1e-14);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 25; ++trial) {
    const linalg::Matrix s = oracle::random_matrix(rng, 6, 6);
    const DmdEigs es = dmd_eigs(s);
    for (std::size_t k = 0; k < 6; ++k) {
      double res = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        cplx sx{};
        for (std::size_t j = 0; j < 6; ++j) sx += s(i, j) * es.vectors(j, k);
        res += std::norm(sx - es.values[k] * es.vectors(i, k));
      }
      CHECK(std::sqrt(res) < 1e-8 * oracle::frob(s));
    }
  }
}

TEST_CASE("spectrum") {
  const std::vector<cplx> mu{1.0, std::polar(1.0, kTheta), 0.5, 0.0, -1.0};
  const auto a = spectrum(std::span(mu).first(1), 0.5);
  CHECK(a[0] == cplx(0.0, 0.0));
  const auto l = spectrum(mu, 1.0);
  CHECK(std::abs(l[1] - cplx(0.0, kTheta)) < 1e-15);
  CHECK(l[2].real() == doctest::Approx(-0.6931471805599453));
  CHECK(l[3].real() == -std::numeric_limits<double>::infinity());
  CHECK(l[4].imag() == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(spectrum(mu, 0.0), ContractError);
}

TEST_CASE("dynamic modes") {
  std::mt19937_64 rng(88);
  const linalg::Matrix v1 = oracle::random_matrix(rng, 5, 3);
  linalg::ComplexMatrix x = linalg::ComplexMatrix::identity(3);
  const linalg::ComplexMatrix m = dynamic_modes(v1, x);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 5; ++i) CHECK(m(i, j) == cplx(v1(i, j)));
  CHECK_THROWS_AS(dynamic_modes(v1, linalg::ComplexMatrix(2, 2)), DimensionError);

  const DmdResult r = decompose(rotation_data(3, 0.25));
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(std::abs(r.modes(i, 1) - std::conj(r.modes(i, 0))) < 1e-10);
  // Re/Im parts of a mode lie in span of the 2-D snapshot plane: trivially,
  // but also each snapshot is recovered from the two modes.
  CHECK(r.amplitudes[0] == doctest::Approx(r.amplitudes[1]));
}

TEST_CASE("classification") {
  CHECK(classify(1.1) == Stability::unstable);
  CHECK(classify(0.3) == Stability::stable);
  for (double t = -3.0; t <= 3.0; t += 0.37) CHECK(classify(std::polar(1.0, t)) == Stability::neutral);
  CHECK(classify(1.0 + 5e-7) == Stability::neutral);
  CHECK(classify(1.0 + 2e-6) == Stability::unstable);
  CHECK(classify(0.5, 0.6) == Stability::neutral);
  CHECK_THROWS_AS(classify(1.0, -1.0), ContractError);
  CHECK(to_string(Stability::stable) == "stable");

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> rad(0.0, 2.0), ang(-3.1, 3.1), dts(0.01, 3.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const cplx mu = std::polar(rad(rng), ang(rng));
    const double dt = dts(rng);
    const cplx lambda = spectrum(std::span(&mu, 1), dt)[0];
    CHECK(classify_growth(lambda, dt) == classify(mu));
    if (classify(mu) == Stability::unstable) CHECK(lambda.real() > 0.0);
    if (classify(mu) == Stability::stable) CHECK(lambda.real() < 0.0);
  }
}

TEST_CASE("decompose on exactly linear data") {
  const linalg::Matrix a = known_map();
  const SnapshotMatrix s = iterate(a, {1.0, 0.5, -0.3, 0.8}, 5, 0.1);
  const DmdResult r = decompose(s);
  CHECK(r.count() == 4);
  CHECK(oracle::multiset_distance(r.eigenvalues_mu, oracle::charpoly_roots(a)) < 1e-8);
  for (std::size_t j = 0; j < r.count(); ++j) {
    CHECK(r.stability[j] == classify(r.eigenvalues_mu[j]));
    CHECK(std::isfinite(r.spectrum_lambda[j].real()));
  }
  const auto amp = order_by_amplitude(r);
  for (std::size_t k = 1; k < amp.size(); ++k) CHECK(r.amplitudes[amp[k - 1]] >= r.amplitudes[amp[k]]);
  const auto freq = order_by_frequency(r);
  for (std::size_t k = 1; k < freq.size(); ++k)
    CHECK(std::abs(r.spectrum_lambda[freq[k - 1]].imag()) <=
          std::abs(r.spectrum_lambda[freq[k]].imag()));
}

TEST_CASE("conjugate symmetry on real data") {
  std::mt19937_64 rng(111);
  for (int trial = 0; trial < 10; ++trial) {
    const SnapshotMatrix s(oracle::random_matrix(rng, 12, 7), 0.2);
    const DmdResult r = decompose(s);
    for (std::size_t j = 0; j < r.count(); ++j) {
      if (r.eigenvalues_mu[j].imag() <= 0.0) continue;
      REQUIRE(j + 1 < r.count());
      CHECK(std::abs(r.eigenvalues_mu[j + 1] - std::conj(r.eigenvalues_mu[j])) < 1e-10);
      CHECK(std::abs(r.spectrum_lambda[j + 1] - std::conj(r.spectrum_lambda[j])) < 1e-10);
      for (std::size_t i = 0; i < s.rows(); ++i)
        CHECK(std::abs(r.modes(i, j + 1) - std::conj(r.modes(i, j))) < 1e-10);
    }
  }
}
