#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "kh/error.hpp"
#include "kh/jet.hpp"
#include "kh/solver.hpp"
#include "oracles.hpp"

using namespace kh;
using cplx = std::complex<double>;

namespace {

template <class F>
ScalarField sample(const Grid2D& g, F f) {
  ScalarField out(g);
  for (std::size_t r = 0; r < g.n(); ++r)
    for (std::size_t c = 0; c < g.n(); ++c) out(r, c) = f(g.coord(c), g.coord(r));
  return out;
}

SimConfig plain_config(double nu, double dt) {
  SimConfig cfg;
  cfg.velocity_scale = 1.0;
  cfg.length_scale = 1.0;
  cfg.re = nu > 0.0 ? 1.0 / nu : std::numeric_limits<double>::infinity();
  cfg.dt = dt;
  return cfg;
}

JetConfig small_jet(int id, std::size_t n, std::uint64_t seed = 1) {
  JetConfig j = preset(id);
  j.n = n;
  j.rng_seed = seed;
  return j;
}

}  // namespace

TEST_CASE("init_state vorticity") {
  const Grid2D g(8);
  const FlowSolver solver(g, SimConfig{});
  const ScalarField zero(g);
  const FlowState s =
      solver.init_state(sample(g, [](double, double y) { return std::sin(y); }), zero, zero);
  CHECK(s.time == 0.0);
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c)
      CHECK(std::abs(oracle::eval_half_spectrum(s.omega_hat, 8, r, c) + std::cos(g.coord(r))) <
            1e-10);

  const FlowState z = solver.init_state(zero, zero, zero);
  for (const cplx& w : z.omega_hat) CHECK(w == cplx{});

  CHECK_THROWS_AS(solver.init_state(ScalarField(Grid2D(16)), zero, zero), DimensionError);
}

TEST_CASE("scalar transform round trip") {
  const JetFields ic = build_initial_conditions(preset(1));
  const FlowSolver solver(ic.u.grid(), SimConfig{});
  const FlowState s = solver.init_state(ic.u, ic.v, ic.scalar);
  const ScalarField back = solver.scalar_field(s);
  double worst = 0.0;
  for (std::size_t k = 0; k < back.values().size(); ++k)
    worst = std::max(worst, std::abs(back.values()[k] - ic.scalar.values()[k]));
  CHECK(worst < 1e-12);
}

TEST_CASE("poisson streamfunction") {
  const Grid2D g(16);
  const FlowSolver solver(g, SimConfig{});
  const ScalarField zero(g);
  // V = -cos x gives omega = sin x.
  const FlowState a = solver.init_state(
      zero, sample(g, [](double x, double) { return -std::cos(x); }), zero);
  const auto psi_a = poisson_streamfunction(a.omega_hat, g);
  // U = cos(2y)/2 gives omega = sin 2y.
  const FlowState b = solver.init_state(
      sample(g, [](double, double y) { return 0.5 * std::cos(2.0 * y); }), zero, zero);
  const auto psi_b = solver.streamfunction(b.omega_hat);
  for (std::size_t r = 0; r < 16; r += 3)
    for (std::size_t c = 0; c < 16; c += 5) {
      CHECK(std::abs(oracle::eval_half_spectrum(psi_a, 16, r, c) - std::sin(g.coord(c))) < 1e-12);
      CHECK(std::abs(oracle::eval_half_spectrum(psi_b, 16, r, c) -
                     std::sin(2.0 * g.coord(r)) / 4.0) < 1e-12);
    }
  for (const cplx& p : solver.streamfunction(std::vector<cplx>(16 * 9))) CHECK(p == cplx{});
  CHECK(psi_a[0] == cplx{});
}

TEST_CASE("Taylor-Green decay") {
  const Grid2D g(64);
  const double nu = 0.01;
  const FlowSolver solver(g, plain_config(nu, 0.01));
  const ScalarField u = sample(g, [](double x, double y) { return std::sin(x) * std::cos(y); });
  const ScalarField v = sample(g, [](double x, double y) { return -std::cos(x) * std::sin(y); });
  const ScalarField c = sample(g, [](double x, double) { return std::cos(3.0 * x); });
  FlowState s = solver.init_state(u, v, c);
  const double e0 = solver.kinetic_energy(s);
  s = solver.advance(s, 100);
  CHECK(s.step == 100);
  CHECK(s.time == doctest::Approx(1.0).epsilon(1e-12));
  const double ratio = solver.kinetic_energy(s) / e0;
  CHECK(std::abs(ratio / std::exp(-4.0 * nu * s.time) - 1.0) < 1e-6);
}

TEST_CASE("trivial dynamics") {
  const Grid2D g(16);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  ScalarField c(g);
  for (double& x : c.values()) x = dist(rng);

  SimConfig still = plain_config(0.0, 0.3);
  still.dealias = false;
  const FlowSolver inviscid(g, still);
  const ScalarField zero(g);
  const FlowState s0 = inviscid.init_state(zero, zero, c);
  const FlowState s1 = inviscid.advance(s0, 5);
  CHECK(s1.scalar_hat == s0.scalar_hat);
  CHECK(s1.omega_hat == s0.omega_hat);

  const FlowSolver viscous(g, plain_config(0.05, 0.05));
  const ScalarField one(g, std::vector<double>(g.points(), 1.0));
  FlowState t = viscous.init_state(
      sample(g, [](double x, double y) { return std::sin(x) * std::cos(y); }),
      sample(g, [](double x, double y) { return -std::cos(x) * std::sin(y); }), one);
  t = viscous.advance(t, 20);
  const ScalarField out = viscous.scalar_field(t);
  for (double x : out.values()) CHECK(std::abs(x - 1.0) < 1e-14);
}

TEST_CASE("run_collect") {
  const JetConfig jet = small_jet(1, 32);
  const JetFields ic = build_initial_conditions(jet);
  SUBCASE("default collection") {
    const SimConfig cfg = default_sim_config(jet, 145);
    const RunResult r = run_collect(cfg, init_state(ic.u, ic.v, ic.scalar));
    CHECK(r.scalar.cols() == 30);
    CHECK(r.scalar.rows() == 32 * 32);
    CHECK(r.scalar.dt_snap == doctest::Approx(5.0 * cfg.dt).epsilon(1e-15));
    CHECK(r.times.size() == 30);
    CHECK(r.times.back() == doctest::Approx(145.0 * cfg.dt));
    CHECK(r.times.front() == 0.0);
    REQUIRE(r.scalar.grid);
    CHECK(r.mean_u.grid() == *r.scalar.grid);
  }
  SUBCASE("two snapshots") {
    SimConfig cfg = default_sim_config(jet, 40);
    cfg.collect_count = 2;
    const RunResult r = run_collect(cfg, init_state(ic.u, ic.v, ic.scalar));
    CHECK(r.scalar.cols() == 2);
    CHECK(r.times.front() == doctest::Approx(35.0 * cfg.dt));
  }
  SUBCASE("window before the start") {
    const SimConfig cfg = default_sim_config(jet, 100);
    CHECK_THROWS_AS(run_collect(cfg, init_state(ic.u, ic.v, ic.scalar)), ContractError);
  }
  SUBCASE("unstable time step") {
    SimConfig cfg = default_sim_config(jet, 5000);
    cfg.dt = 200.0;
    try {
      run_collect(cfg, init_state(ic.u, ic.v, ic.scalar));
      FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
      CHECK(e.step() > 0);
      CHECK(e.step() <= 5000);
    }
  }
}

TEST_CASE("solver invariants on jet data") {
  for (int id : {1, 2}) {
    const JetConfig jet = small_jet(id, 64, 5);
    const JetFields ic = build_initial_conditions(jet);
    const SimConfig cfg = default_sim_config(jet, 200);
    const FlowSolver solver(ic.u.grid(), cfg);
    FlowState s = solver.init_state(ic.u, ic.v, ic.scalar);
    solver.truncate(s);
    const double mean0 = solver.scalar_mean(s);
    double energy = solver.kinetic_energy(s);
    double worst_div = 0.0, worst_mean = 0.0;
    bool monotone = true, conjugate = true;
    solver.advance(s, 200, [&](const FlowState& st) {
      worst_div = std::max(worst_div, solver.spectral_divergence(st));
      worst_mean = std::max(worst_mean, std::abs(solver.scalar_mean(st) - mean0));
      const double e = solver.kinetic_energy(st);
      if (e > energy * (1.0 + 1e-12)) monotone = false;
      energy = e;
      const std::size_t n = st.grid.n(), nc = n / 2 + 1;
      for (std::size_t r = 1; r < n; ++r) {
        const cplx a = st.omega_hat[r * nc], b = st.omega_hat[(n - r) * nc];
        if (std::abs(a - std::conj(b)) > 1e-15) conjugate = false;
      }
    });
    CHECK(worst_div < 1e-12);
    CHECK(worst_mean < 1e-10);
    CHECK(monotone);
    CHECK(conjugate);
  }
}

TEST_CASE("runs are deterministic") {
  const JetConfig jet = small_jet(2, 32, 9);
  const JetFields ic = build_initial_conditions(jet);
  const SimConfig cfg = default_sim_config(jet, 150);
  const RunResult a = run_collect(cfg, init_state(ic.u, ic.v, ic.scalar));
  const RunResult b = run_collect(cfg, init_state(ic.u, ic.v, ic.scalar));
  CHECK(a.scalar.data == b.scalar.data);
  CHECK(a.mean_u == b.mean_u);
}

TEST_CASE("configuration") {
  const JetConfig jet = small_jet(1, 128);
  const SimConfig cfg = default_sim_config(jet, 300);
  CHECK(cfg.dt == doctest::Approx(0.5 * (2.0 * std::numbers::pi / 128) / 0.1));
  CHECK(cfg.viscosity() == doctest::Approx(0.1 * (2.0 * std::numbers::pi / 20) / 1e4));
  CHECK(cfg.diffusivity() == cfg.viscosity());
  CHECK(cfg.first_snapshot_step() == 155);
  SimConfig bad;
  bad.snapshot_interval = 0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = SimConfig{};
  bad.collect_count = 1;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  bad = SimConfig{};
  bad.re = 0.0;
  CHECK_THROWS_AS(bad.validate(), ContractError);
  CHECK_THROWS_AS(FlowSolver(Grid2D(2), SimConfig{}), ContractError);
}
