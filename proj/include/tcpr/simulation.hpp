#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace tcpr {

// Monte-Carlo probe of prototype bias in the plane: two classes at
// (-a, 0) and (a, 0) with unit isotropic Gaussian noise, nearest-prototype
// classification by Euclidean distance on raw coordinates, prototypes
// estimated from k_shot samples per class.
struct SimSpec {
  double a = 1.0;          // half the class-mean separation
  uint32_t k_shot = 1;     // samples per class behind each prototype
  uint32_t n_tasks = 10000;
  uint32_t q_query = 50;   // queries per class per task
  uint32_t bins = 20;
  uint64_t seed = 0;
  uint32_t threads = 0;
};

// Accuracy conditioned on how far the prototype pair drifted from the
// origin: tasks are bucketed into equal-width bins of the statistic
// (mean distance of the two prototypes to the origin) and averaged.
struct BiasCurve {
  std::vector<double> bin_center;
  std::vector<double> mean_accuracy;
  std::vector<double> std_accuracy;  // population std within the bin
  std::vector<uint32_t> count;
  double stat_min = 0.0;
  double stat_max = 0.0;
  uint32_t n_tasks = 0;
};

// Deterministic for a given spec: task t draws from a stream seeded by
// derive_seed(spec.seed, t) regardless of thread count. Throws BadSpec on
// non-positive a / zero counts, and Error if every task lands in one point
// (degenerate binning) — which cannot happen for positive noise.
BiasCurve run_bias_simulation(const SimSpec& spec);

// Mean accuracy of the highest-distance bin minus the lowest-distance bin,
// among bins holding at least min_count tasks (positive when
// near-centroid prototypes hurt). Throws Error when fewer than two bins
// qualify.
double bias_gap(const BiasCurve& curve, uint32_t min_count = 50);

// One curve per shot count / separation value; each run gets an
// independent seed derived from the template's.
std::vector<std::pair<uint32_t, BiasCurve>> sweep_shots(const SimSpec& spec,
                                                        std::span<const uint32_t> shots);
std::vector<std::pair<double, BiasCurve>> sweep_separation(const SimSpec& spec,
                                                           std::span<const double> a_values);

}  // namespace tcpr
