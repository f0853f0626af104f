#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kh/field.hpp"
#include "kh/jet.hpp"
#include "kh/solver.hpp"

namespace kh {

// Portion of the initial passive scalar carried by the lower jet (centred at
// y1 = L/2 - case_offset), normalised exactly like the full scalar, so that
// full = lower + upper.
ScalarField lower_jet_scalar(const JetConfig& jet);

// Jet-interaction indicator. `lower` and `upper` are the scalar carried by
// each jet; transport is linear in the scalar, so both follow from one
// velocity history (upper = full - lower). Fluctuations are taken about each
// row's x-average, and the metric is |Pearson correlation| between the two
// jets' fluctuations over the rows lying between the jet centres. Before
// the jets interact, their fluctuations occupy disjoint rows and the metric
// stays near 0. Returns 0 when either jet carries no fluctuation there.
double interaction_metric(const ScalarField& lower, const ScalarField& upper,
                          const JetConfig& jet);

struct InteractionHistory {
  std::vector<double> times;
  std::vector<long> steps;
  std::vector<double> metric;
};

// Runs the jet for n_steps (solver settings from cfg, initial state
// truncated when cfg.dealias), evaluating the metric every `every` steps.
InteractionHistory track_interaction(const JetConfig& jet, const SimConfig& cfg,
                                     long n_steps, long every);

// First time at which series[i] > threshold, if any.
std::optional<double> first_crossing(std::span<const double> times,
                                     std::span<const double> series, double threshold);

struct MeanProfile {
  ScalarField mean_field;       // time average over snapshot columns
  std::vector<double> y;        // row coordinates
  std::vector<double> profile;  // x-average of mean_field per row
};

// Requires a snapshot matrix carrying its grid.
MeanProfile mean_profile(const SnapshotMatrix& s);

}  // namespace kh
