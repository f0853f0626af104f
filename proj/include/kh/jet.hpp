#pragma once

#include <cstdint>
#include <numbers>
#include <vector>

#include "kh/field.hpp"

namespace kh {

// Co-axial jet setup: two tanh-profile jets of radius r_o centred at
// y = L/2 -/+ case_offset, streamwise velocity U(y), white transverse noise V.
struct JetConfig {
  double length = 2.0 * std::numbers::pi;
  std::size_t n = 256;
  double u_max = 0.1;
  double v_max = 0.1 / 30.0;
  double r_o = 2.0 * std::numbers::pi / 20.0;
  double steepness = 10.5;
  double case_offset = 2.0 * std::numbers::pi / 10.0;
  std::uint64_t rng_seed = 0;

  // Throws ContractError when a parameter is out of range.
  void validate() const;
};

struct JetFields {
  ScalarField u;
  ScalarField v;
  ScalarField scalar;
};

// Defaults with case_offset = L/10 (case 1, jets close together) or L/5
// (case 2, jets independent). Any other id throws UnknownPresetError.
JetConfig preset(int case_id);

// Single-jet profile before normalisation:
//   u_max/2 * (1 - tanh(B * (|d|/r_o - r_o/|d|))),   d = y - y_c
// with the d = 0 limit u_max.
double jet_profile(double distance, const JetConfig& cfg);

// Uniform samples in [0, 1) from mt19937_64: the top 53 bits of each draw
// scaled by 2^-53. Fixed so V is reproducible on every platform.
std::vector<double> uniform_noise(std::uint64_t seed, std::size_t count);

// U = sum of the two jet profiles rescaled so max U = u_max;
// V = v_max * (uniform - 1/2), drawn in flat (row-major) order;
// PS = U / max U.
JetFields build_initial_conditions(const JetConfig& cfg);

}  // namespace kh
