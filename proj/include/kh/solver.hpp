#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "kh/field.hpp"

namespace kh {

struct JetConfig;

// Time-integration parameters. Viscosity is nu = velocity_scale *
// length_scale / re; the defaults (u_max = 0.1, r_o = 2*pi/20) give Re its
// jet-based meaning. re = +inf runs inviscid. Scalar diffusivity is
// nu / schmidt.
struct SimConfig {
  double re = 10000.0;
  double dt = 0.1;
  long n_steps = 145;
  long snapshot_interval = 5;
  long collect_count = 30;
  bool dealias = true;
  double schmidt = 1.0;
  double velocity_scale = 0.1;
  double length_scale = 2.0 * std::numbers::pi / 20.0;

  double viscosity() const { return velocity_scale * length_scale / re; }
  double diffusivity() const { return viscosity() / schmidt; }
  // Step index of the first collected snapshot; the collection window ends
  // at n_steps.
  long first_snapshot_step() const {
    return n_steps - (collect_count - 1) * snapshot_interval;
  }
  void validate() const;
};

// dt = cfl * dx / u_max.
double cfl_time_step(const Grid2D& grid, double u_max, double cfl = 0.5);

// Default run for a jet setup: Re 10000, 30 snapshots every 5 steps,
// dt from a CFL target of 0.5 at u_max, viscosity scaled by u_max * r_o.
// `n_steps` is the total step count; the last 30 snapshots are kept.
SimConfig default_sim_config(const JetConfig& jet, long n_steps);

// Spectral state on the half-complex (r2c) layout: entry (row, col) with
// row in [0, n) carrying wavenumber m_y (wrapped) and col in [0, n/2]
// carrying m_x >= 0, flat index row * (n/2 + 1) + col. Coefficients are
// normalised so that index 0 holds the domain mean.
struct FlowState {
  Grid2D grid;
  std::vector<std::complex<double>> omega_hat;
  std::vector<std::complex<double>> scalar_hat;
  double time = 0.0;
  long step = 0;
};

struct RunResult {
  SnapshotMatrix scalar;  // physical-space passive scalar, one column per snapshot
  ScalarField mean_u;     // time averages over the collected snapshots
  ScalarField mean_v;
  std::vector<double> times;
};

// Vorticity-streamfunction pseudo-spectral integrator with passive scalar:
//   d(omega)/dt = -(u . grad) omega + nu lap omega
//   d(c)/dt     = -(u . grad) c     + kappa lap c
// lap psi = -omega, u = d(psi)/dy, v = -d(psi)/dx. Classical RK4 in time;
// products formed on the grid, with inputs and outputs truncated to
// 3|m| < n in each direction when dealiasing is on.
class FlowSolver {
public:
  FlowSolver(Grid2D grid, SimConfig cfg);
  ~FlowSolver();
  FlowSolver(FlowSolver&&) noexcept;
  FlowSolver& operator=(FlowSolver&&) noexcept;

  const Grid2D& grid() const noexcept { return grid_; }
  const SimConfig& config() const noexcept { return cfg_; }

  // omega = dV/dx - dU/dy, differentiated spectrally.
  FlowState init_state(const ScalarField& u, const ScalarField& v,
                       const ScalarField& scalar) const;

  // psi_hat = omega_hat / |k|^2, zero mean mode.
  std::vector<std::complex<double>> streamfunction(
      std::span<const std::complex<double>> omega_hat) const;

  // One RK4 step. Throws DivergenceError (naming the step index) when the
  // new state is not finite. Warns once on stderr if the CFL number
  // dt * max(|u|, |v|) / dx exceeds 1.
  FlowState step(const FlowState& state) const;

  // Zeroes every coefficient outside the 2/3 band.
  void truncate(FlowState& state) const;

  ScalarField scalar_field(const FlowState& state) const;
  std::pair<ScalarField, ScalarField> velocity(const FlowState& state) const;

  double kinetic_energy(const FlowState& state) const;
  double scalar_mean(const FlowState& state) const;
  // max |i k_x u_hat + i k_y v_hat| over all modes.
  double spectral_divergence(const FlowState& state) const;
  // max(|u|, |v|) * dt / dx
  double cfl_number(const FlowState& state) const;

  using Observer = std::function<void(const FlowState&)>;

  // Marches n_steps, calling observer after each step (and once on the
  // initial state).
  FlowState advance(FlowState state, long n_steps,
                    const Observer& observer = {}) const;

  // Marches cfg.n_steps, recording the scalar every snapshot_interval steps
  // over the final window so exactly collect_count columns exist. When
  // dealiasing is on the initial state is first truncated to the resolved
  // band.
  RunResult run_collect(FlowState state0) const;

private:
  struct Impl;
  Grid2D grid_;
  SimConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

// Free-function forms; each builds a FlowSolver for the state's grid.
FlowState init_state(const ScalarField& u, const ScalarField& v,
                     const ScalarField& scalar);
std::vector<std::complex<double>> poisson_streamfunction(
    std::span<const std::complex<double>> omega_hat, const Grid2D& grid);
FlowState step(const FlowState& state, const SimConfig& cfg);
RunResult run_collect(const SimConfig& cfg, const FlowState& state0);

}  // namespace kh
