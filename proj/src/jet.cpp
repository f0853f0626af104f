#include "kh/jet.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

namespace kh {

void JetConfig::validate() const {
  if (!(length > 0.0)) throw ContractError("JetConfig: length must be positive");
  if (n < 4 || !std::has_single_bit(n))
    throw ContractError("JetConfig: n must be a power of two >= 4, got " +
                        std::to_string(n));
  if (!(u_max > 0.0)) throw ContractError("JetConfig: u_max must be positive");
  if (!(v_max >= 0.0)) throw ContractError("JetConfig: v_max must be non-negative");
  if (!(r_o > 0.0)) throw ContractError("JetConfig: r_o must be positive");
  if (!(steepness > 0.0))
    throw ContractError("JetConfig: steepness must be positive");
  if (!(case_offset > 0.0 && case_offset < length / 2.0))
    throw ContractError("JetConfig: case_offset must lie in (0, L/2)");
}

JetConfig preset(int case_id) {
  JetConfig cfg;
  switch (case_id) {
    case 1:
      cfg.case_offset = cfg.length / 10.0;
      break;
    case 2:
      cfg.case_offset = cfg.length / 5.0;
      break;
    default:
      throw UnknownPresetError("unknown jet preset " + std::to_string(case_id) +
                               " (expected 1 or 2)");
  }
  return cfg;
}

double jet_profile(double distance, const JetConfig& cfg) {
  const double d = std::abs(distance);
  if (d == 0.0) return cfg.u_max;
  return cfg.u_max * 0.5 *
         (1.0 - std::tanh(cfg.steepness * (d / cfg.r_o - cfg.r_o / d)));
}

std::vector<double> uniform_noise(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 gen(seed);
  std::vector<double> out(count);
  for (auto& x : out) x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return out;
}

JetFields build_initial_conditions(const JetConfig& cfg) {
  cfg.validate();
  const Grid2D grid(cfg.n, cfg.length);
  const std::size_t n = grid.n();
  const double y1 = cfg.length / 2.0 - cfg.case_offset;
  const double y2 = cfg.length / 2.0 + cfg.case_offset;

  std::vector<double> profile(n);
  double peak = 0.0;
  for (std::size_t row = 0; row < n; ++row) {
    const double y = grid.coord(row);
    profile[row] = jet_profile(y - y1, cfg) + jet_profile(y - y2, cfg);
    peak = std::max(peak, profile[row]);
  }

  ScalarField u(grid);
  ScalarField scalar(grid);
  for (std::size_t row = 0; row < n; ++row) {
    // u_max * (p / peak) rather than (u_max * p) / peak keeps max U == u_max
    // exactly; likewise max PS == 1.
    const double shape = profile[row] / peak;
    const double u_row = cfg.u_max * shape;
    for (std::size_t col = 0; col < n; ++col) {
      u(row, col) = u_row;
      scalar(row, col) = u_row / cfg.u_max;
    }
  }

  const auto noise = uniform_noise(cfg.rng_seed, grid.points());
  std::vector<double> v(grid.points());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = cfg.v_max * (noise[k] - 0.5);

  return {std::move(u), ScalarField(grid, std::move(v)), std::move(scalar)};
}

}  // namespace kh
