#include "kh/solver.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <string>

#include "kh/jet.hpp"

namespace kh {

using cplx = std::complex<double>;

void SimConfig::validate() const {
  if (!(re > 0.0)) throw ContractError("SimConfig: re must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw ContractError("SimConfig: dt must be positive and finite");
  if (n_steps < 0) throw ContractError("SimConfig: n_steps must be non-negative");
  if (snapshot_interval < 1)
    throw ContractError("SimConfig: snapshot_interval must be >= 1");
  if (collect_count < 2) throw ContractError("SimConfig: collect_count must be >= 2");
  if (!(schmidt > 0.0)) throw ContractError("SimConfig: schmidt must be positive");
  if (!(velocity_scale >= 0.0) || !(length_scale >= 0.0))
    throw ContractError("SimConfig: viscosity scales must be non-negative");
}

double cfl_time_step(const Grid2D& grid, double u_max, double cfl) {
  if (!(u_max > 0.0) || !(cfl > 0.0))
    throw ContractError("cfl_time_step: u_max and cfl must be positive");
  return cfl * grid.dx() / u_max;
}

SimConfig default_sim_config(const JetConfig& jet, long n_steps) {
  jet.validate();
  SimConfig cfg;
  cfg.dt = cfl_time_step(Grid2D(jet.n, jet.length), jet.u_max);
  cfg.n_steps = n_steps;
  cfg.velocity_scale = jet.u_max;
  cfg.length_scale = jet.r_o;
  return cfg;
}

namespace {

struct FftwPlanDeleter {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using PlanHandle = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDeleter>;

template <class T>
struct FftwFree {
  void operator()(T* p) const { fftw_free(p); }
};
template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree<T>>;

}  // namespace

struct FlowSolver::Impl {
  std::size_t n;
  std::size_t nh;  // n/2 + 1
  std::size_t spectral_size;
  std::vector<double> kx;  // derivative multipliers, Nyquist zeroed
  std::vector<double> ky;
  std::vector<double> k2;  // |k|^2 per spectral index
  std::vector<double> mask;

  FftwBuffer<double> real_buf;
  FftwBuffer<fftw_complex> cplx_buf;
  PlanHandle forward_plan;
  PlanHandle inverse_plan;
  mutable bool cfl_warned = false;

  explicit Impl(const Grid2D& grid)
      : n(grid.n()), nh(grid.n() / 2 + 1), spectral_size(grid.n() * (grid.n() / 2 + 1)) {
    const double k0 = 2.0 * std::numbers::pi / grid.length();
    const auto wrapped = [this](std::size_t i) {
      return i <= n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
    };
    kx.resize(nh);
    ky.resize(n);
    for (std::size_t c = 0; c < nh; ++c) kx[c] = c == n / 2 ? 0.0 : k0 * static_cast<double>(c);
    for (std::size_t r = 0; r < n; ++r)
      ky[r] = r == n / 2 ? 0.0 : k0 * static_cast<double>(wrapped(r));

    k2.resize(spectral_size);
    mask.resize(spectral_size);
    for (std::size_t r = 0; r < n; ++r) {
      const long my = wrapped(r);
      for (std::size_t c = 0; c < nh; ++c) {
        const long mx = static_cast<long>(c);
        const double fx = k0 * static_cast<double>(mx);
        const double fy = k0 * static_cast<double>(my);
        k2[r * nh + c] = fx * fx + fy * fy;
        const bool keep = 3 * std::abs(mx) < static_cast<long>(n) &&
                          3 * std::abs(my) < static_cast<long>(n);
        mask[r * nh + c] = keep ? 1.0 : 0.0;
      }
    }

    real_buf.reset(fftw_alloc_real(n * n));
    cplx_buf.reset(fftw_alloc_complex(spectral_size));
    const int ni = static_cast<int>(n);
    // FFTW_ESTIMATE: plan choice must not depend on timing, so runs are
    // bit-reproducible.
    forward_plan.reset(fftw_plan_dft_r2c_2d(ni, ni, real_buf.get(), cplx_buf.get(),
                                            FFTW_ESTIMATE));
    inverse_plan.reset(fftw_plan_dft_c2r_2d(ni, ni, cplx_buf.get(), real_buf.get(),
                                            FFTW_ESTIMATE));
    if (!forward_plan || !inverse_plan)
      throw NumericalError("FlowSolver: FFTW planning failed");
  }

  std::vector<cplx> forward(std::span<const double> phys) const {
    std::copy(phys.begin(), phys.end(), real_buf.get());
    fftw_execute(forward_plan.get());
    const double scale = 1.0 / static_cast<double>(n * n);
    std::vector<cplx> out(spectral_size);
    for (std::size_t i = 0; i < spectral_size; ++i)
      out[i] = cplx(cplx_buf[i][0], cplx_buf[i][1]) * scale;
    return out;
  }

  std::vector<double> inverse(std::span<const cplx> spec) const {
    for (std::size_t i = 0; i < spectral_size; ++i) {
      cplx_buf[i][0] = spec[i].real();
      cplx_buf[i][1] = spec[i].imag();
    }
    fftw_execute(inverse_plan.get());
    return {real_buf.get(), real_buf.get() + n * n};
  }

  // i * k_x * f  (dir 0) or i * k_y * f  (dir 1), optionally truncated.
  std::vector<cplx> derivative(std::span<const cplx> f, int dir, bool dealias) const {
    std::vector<cplx> out(spectral_size);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < nh; ++c) {
        const std::size_t idx = r * nh + c;
        const double k = dir == 0 ? kx[c] : ky[r];
        const double m = dealias ? mask[idx] : 1.0;
        out[idx] = cplx(0.0, k * m) * f[idx];
      }
    return out;
  }

  std::vector<cplx> streamfunction(std::span<const cplx> omega) const {
    std::vector<cplx> psi(spectral_size);
    for (std::size_t i = 1; i < spectral_size; ++i) psi[i] = omega[i] / k2[i];
    return psi;
  }
};

FlowSolver::FlowSolver(Grid2D grid, SimConfig cfg)
    : grid_(grid), cfg_(cfg), impl_(std::make_unique<Impl>(grid)) {
  if (grid.n() < 4)
    throw ContractError("FlowSolver: grid needs n >= 4, got " + std::to_string(grid.n()));
}

FlowSolver::~FlowSolver() = default;
FlowSolver::FlowSolver(FlowSolver&&) noexcept = default;
FlowSolver& FlowSolver::operator=(FlowSolver&&) noexcept = default;

FlowState FlowSolver::init_state(const ScalarField& u, const ScalarField& v,
                                 const ScalarField& scalar) const {
  if (!(u.grid() == grid_) || !(v.grid() == grid_) || !(scalar.grid() == grid_))
    throw DimensionError("init_state: fields must share the solver grid");
  const auto u_hat = impl_->forward(u.values());
  const auto v_hat = impl_->forward(v.values());
  const auto dv_dx = impl_->derivative(v_hat, 0, false);
  const auto du_dy = impl_->derivative(u_hat, 1, false);

  FlowState state{grid_, std::vector<cplx>(impl_->spectral_size),
                  impl_->forward(scalar.values()), 0.0, 0};
  for (std::size_t i = 0; i < impl_->spectral_size; ++i)
    state.omega_hat[i] = dv_dx[i] - du_dy[i];
  return state;
}

std::vector<cplx> FlowSolver::streamfunction(std::span<const cplx> omega_hat) const {
  if (omega_hat.size() != impl_->spectral_size)
    throw DimensionError("streamfunction: spectral array has wrong size");
  return impl_->streamfunction(omega_hat);
}

void FlowSolver::truncate(FlowState& state) const {
  for (std::size_t i = 0; i < impl_->spectral_size; ++i) {
    state.omega_hat[i] *= impl_->mask[i];
    state.scalar_hat[i] *= impl_->mask[i];
  }
}

namespace {

struct Rhs {
  std::vector<cplx> omega;
  std::vector<cplx> scalar;
  double max_speed = 0.0;
};

}  // namespace

FlowState FlowSolver::step(const FlowState& state) const {
  const Impl& im = *impl_;
  const bool dealias = cfg_.dealias;
  const double nu = std::isinf(cfg_.re) ? 0.0 : cfg_.viscosity();
  const double kappa = std::isinf(cfg_.re) ? 0.0 : cfg_.diffusivity();
  const std::size_t size = im.spectral_size;

  auto rhs = [&](std::span<const cplx> omega, std::span<const cplx> c) {
    const auto psi = im.streamfunction(omega);
    const auto u = im.inverse(im.derivative(psi, 1, dealias));
    auto v = im.inverse(im.derivative(psi, 0, dealias));
    for (double& x : v) x = -x;
    const auto wx = im.inverse(im.derivative(omega, 0, dealias));
    const auto wy = im.inverse(im.derivative(omega, 1, dealias));
    const auto cx = im.inverse(im.derivative(c, 0, dealias));
    const auto cy = im.inverse(im.derivative(c, 1, dealias));

    Rhs out;
    std::vector<double> adv_w(u.size());
    std::vector<double> adv_c(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      adv_w[i] = u[i] * wx[i] + v[i] * wy[i];
      adv_c[i] = u[i] * cx[i] + v[i] * cy[i];
      out.max_speed = std::max({out.max_speed, std::abs(u[i]), std::abs(v[i])});
    }
    out.omega = im.forward(adv_w);
    out.scalar = im.forward(adv_c);
    // Advection by a solenoidal field is a divergence: no mean contribution.
    out.omega[0] = 0.0;
    out.scalar[0] = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
      const double m = dealias ? im.mask[i] : 1.0;
      out.omega[i] = -m * out.omega[i] - nu * im.k2[i] * omega[i];
      out.scalar[i] = -m * out.scalar[i] - kappa * im.k2[i] * c[i];
    }
    return out;
  };

  const double dt = cfg_.dt;
  auto axpy = [size](std::span<const cplx> base, double a, std::span<const cplx> inc) {
    std::vector<cplx> out(size);
    for (std::size_t i = 0; i < size; ++i) out[i] = base[i] + a * inc[i];
    return out;
  };

  const Rhs k1 = rhs(state.omega_hat, state.scalar_hat);
  if (!im.cfl_warned) {
    const double cfl = dt * k1.max_speed / grid_.dx();
    if (cfl > 1.0) {
      im.cfl_warned = true;
      std::cerr << "warning: CFL number " << cfl << " exceeds 1 at step " << state.step
                << " (dt = " << dt << ")\n";
    }
  }
  const Rhs k2 = rhs(axpy(state.omega_hat, 0.5 * dt, k1.omega),
                     axpy(state.scalar_hat, 0.5 * dt, k1.scalar));
  const Rhs k3 = rhs(axpy(state.omega_hat, 0.5 * dt, k2.omega),
                     axpy(state.scalar_hat, 0.5 * dt, k2.scalar));
  const Rhs k4 = rhs(axpy(state.omega_hat, dt, k3.omega),
                     axpy(state.scalar_hat, dt, k3.scalar));

  FlowState next{grid_, std::vector<cplx>(size), std::vector<cplx>(size),
                 state.time + dt, state.step + 1};
  bool finite = true;
  for (std::size_t i = 0; i < size; ++i) {
    next.omega_hat[i] = state.omega_hat[i] +
                        dt / 6.0 * (k1.omega[i] + 2.0 * k2.omega[i] + 2.0 * k3.omega[i] + k4.omega[i]);
    next.scalar_hat[i] = state.scalar_hat[i] +
                         dt / 6.0 * (k1.scalar[i] + 2.0 * k2.scalar[i] + 2.0 * k3.scalar[i] + k4.scalar[i]);
    finite = finite && std::isfinite(next.omega_hat[i].real()) &&
             std::isfinite(next.omega_hat[i].imag()) &&
             std::isfinite(next.scalar_hat[i].real()) &&
             std::isfinite(next.scalar_hat[i].imag());
  }
  if (!finite)
    throw DivergenceError("solver diverged at step " + std::to_string(next.step) +
                              " (t = " + std::to_string(next.time) + ")",
                          next.step);
  return next;
}

ScalarField FlowSolver::scalar_field(const FlowState& state) const {
  return ScalarField(grid_, impl_->inverse(state.scalar_hat));
}

std::pair<ScalarField, ScalarField> FlowSolver::velocity(const FlowState& state) const {
  const auto psi = impl_->streamfunction(state.omega_hat);
  auto v = impl_->inverse(impl_->derivative(psi, 0, false));
  for (double& x : v) x = -x;
  return {ScalarField(grid_, impl_->inverse(impl_->derivative(psi, 1, false))),
          ScalarField(grid_, std::move(v))};
}

double FlowSolver::kinetic_energy(const FlowState& state) const {
  const auto [u, v] = velocity(state);
  double sum = 0.0;
  for (std::size_t i = 0; i < grid_.points(); ++i)
    sum += u.values()[i] * u.values()[i] + v.values()[i] * v.values()[i];
  return 0.5 * sum / static_cast<double>(grid_.points());
}

double FlowSolver::scalar_mean(const FlowState& state) const {
  return state.scalar_hat[0].real();
}

double FlowSolver::spectral_divergence(const FlowState& state) const {
  const Impl& im = *impl_;
  const auto psi = im.streamfunction(state.omega_hat);
  const auto u_hat = im.derivative(psi, 1, false);
  const auto v_hat_neg = im.derivative(psi, 0, false);
  double worst = 0.0;
  for (std::size_t r = 0; r < im.n; ++r)
    for (std::size_t c = 0; c < im.nh; ++c) {
      const std::size_t i = r * im.nh + c;
      const cplx div = cplx(0.0, im.kx[c]) * u_hat[i] - cplx(0.0, im.ky[r]) * v_hat_neg[i];
      worst = std::max(worst, std::abs(div));
    }
  return worst;
}

double FlowSolver::cfl_number(const FlowState& state) const {
  const auto [u, v] = velocity(state);
  double speed = 0.0;
  for (std::size_t i = 0; i < grid_.points(); ++i)
    speed = std::max({speed, std::abs(u.values()[i]), std::abs(v.values()[i])});
  return speed * cfg_.dt / grid_.dx();
}

FlowState FlowSolver::advance(FlowState state, long n_steps, const Observer& observer) const {
  if (observer) observer(state);
  for (long s = 0; s < n_steps; ++s) {
    state = step(state);
    if (observer) observer(state);
  }
  return state;
}

RunResult FlowSolver::run_collect(FlowState state) const {
  cfg_.validate();
  const long first = cfg_.first_snapshot_step();
  if (first < 0)
    throw ContractError("run_collect: n_steps = " + std::to_string(cfg_.n_steps) +
                        " is too short for " + std::to_string(cfg_.collect_count) +
                        " snapshots every " + std::to_string(cfg_.snapshot_interval) +
                        " steps");
  if (cfg_.dealias) truncate(state);

  const std::size_t count = static_cast<std::size_t>(cfg_.collect_count);
  linalg::Matrix columns(grid_.points(), count);
  std::vector<double> sum_u(grid_.points(), 0.0);
  std::vector<double> sum_v(grid_.points(), 0.0);
  std::vector<double> times;
  times.reserve(count);

  auto record = [&](const FlowState& s) {
    const ScalarField c = scalar_field(s);
    std::copy(c.values().begin(), c.values().end(), columns.col(times.size()).begin());
    const auto [u, v] = velocity(s);
    for (std::size_t i = 0; i < sum_u.size(); ++i) {
      sum_u[i] += u.values()[i];
      sum_v[i] += v.values()[i];
    }
    times.push_back(s.time);
  };

  for (long s = 0; s <= cfg_.n_steps; ++s) {
    if (s > 0) state = step(state);
    if (s >= first && (s - first) % cfg_.snapshot_interval == 0) record(state);
  }

  const double inv = 1.0 / static_cast<double>(count);
  for (auto& x : sum_u) x *= inv;
  for (auto& x : sum_v) x *= inv;
  const double dt_snap = static_cast<double>(cfg_.snapshot_interval) * cfg_.dt;
  return {SnapshotMatrix(std::move(columns), dt_snap, grid_),
          ScalarField(grid_, std::move(sum_u)), ScalarField(grid_, std::move(sum_v)),
          std::move(times)};
}

FlowState init_state(const ScalarField& u, const ScalarField& v, const ScalarField& scalar) {
  return FlowSolver(u.grid(), SimConfig{}).init_state(u, v, scalar);
}

std::vector<cplx> poisson_streamfunction(std::span<const cplx> omega_hat, const Grid2D& grid) {
  return FlowSolver(grid, SimConfig{}).streamfunction(omega_hat);
}

FlowState step(const FlowState& state, const SimConfig& cfg) {
  cfg.validate();
  return FlowSolver(state.grid, cfg).step(state);
}

RunResult run_collect(const SimConfig& cfg, const FlowState& state0) {
  return FlowSolver(state0.grid, cfg).run_collect(state0);
}

}  // namespace kh
