#include "tcpr/simulation.hpp"

#include <cmath>
#include <string>

#include "tcpr/errors.hpp"
#include "tcpr/parallel.hpp"
#include "tcpr/rng.hpp"

namespace tcpr {

namespace {

void check_spec(const SimSpec& spec) {
  if (!(spec.a > 0.0) || !std::isfinite(spec.a)) {
    throw BadSpec("class separation a must be finite and positive");
  }
  if (spec.k_shot == 0) throw BadSpec("k_shot must be positive");
  if (spec.n_tasks == 0) throw BadSpec("n_tasks must be positive");
  if (spec.q_query == 0) throw BadSpec("q_query must be positive");
  if (spec.bins < 2) throw BadSpec("bins must be at least 2");
}

struct TaskResult {
  double stat;
  double accuracy;
};

// One task: estimate both prototypes from k_shot draws, then classify
// fresh queries by raw Euclidean distance. Returns the prototype-drift
// statistic alongside the task's accuracy.
TaskResult run_task(const SimSpec& spec, uint64_t task_seed) {
  SplitMix64 rng(task_seed);
  double mu[2] = {-spec.a, spec.a};  // class means on the x axis
  double proto[2][2] = {{0, 0}, {0, 0}};
  for (int c = 0; c < 2; ++c) {
    for (uint32_t s = 0; s < spec.k_shot; ++s) {
      proto[c][0] += mu[c] + rng.gaussian();
      proto[c][1] += rng.gaussian();
    }
    proto[c][0] /= spec.k_shot;
    proto[c][1] /= spec.k_shot;
  }

  uint32_t correct = 0;
  for (int c = 0; c < 2; ++c) {
    for (uint32_t q = 0; q < spec.q_query; ++q) {
      double x = mu[c] + rng.gaussian();
      double y = rng.gaussian();
      double d0 = (x - proto[0][0]) * (x - proto[0][0]) +
                  (y - proto[0][1]) * (y - proto[0][1]);
      double d1 = (x - proto[1][0]) * (x - proto[1][0]) +
                  (y - proto[1][1]) * (y - proto[1][1]);
      int pred = d0 < d1 ? 0 : 1;
      if (pred == c) ++correct;
    }
  }

  double drift0 = std::sqrt(proto[0][0] * proto[0][0] + proto[0][1] * proto[0][1]);
  double drift1 = std::sqrt(proto[1][0] * proto[1][0] + proto[1][1] * proto[1][1]);
  return {0.5 * (drift0 + drift1),
          static_cast<double>(correct) / (2.0 * spec.q_query)};
}

}  // namespace

BiasCurve run_bias_simulation(const SimSpec& spec) {
  check_spec(spec);

  std::vector<double> stats(spec.n_tasks);
  std::vector<double> accs(spec.n_tasks);
  parallel_for(spec.n_tasks, spec.threads, [&](std::size_t t) {
    TaskResult r = run_task(spec, derive_seed(spec.seed, t));
    stats[t] = r.stat;
    accs[t] = r.accuracy;
  });

  double lo = stats[0];
  double hi = stats[0];
  for (double s : stats) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  double width = (hi - lo) / static_cast<double>(spec.bins);
  if (!(width > 0.0)) {
    throw Error("prototype-drift statistic is constant; nothing to bin");
  }

  BiasCurve curve;
  curve.stat_min = lo;
  curve.stat_max = hi;
  curve.n_tasks = spec.n_tasks;
  curve.bin_center.resize(spec.bins);
  curve.mean_accuracy.assign(spec.bins, 0.0);
  curve.std_accuracy.assign(spec.bins, 0.0);
  curve.count.assign(spec.bins, 0);
  for (uint32_t b = 0; b < spec.bins; ++b) {
    curve.bin_center[b] = lo + (b + 0.5) * width;
  }
  std::vector<double> sum(spec.bins, 0.0), sumsq(spec.bins, 0.0);
  for (uint32_t t = 0; t < spec.n_tasks; ++t) {
    auto b = static_cast<std::size_t>((stats[t] - lo) / width);
    if (b >= spec.bins) b = spec.bins - 1;  // the max lands here
    ++curve.count[b];
    sum[b] += accs[t];
    sumsq[b] += accs[t] * accs[t];
  }
  for (uint32_t b = 0; b < spec.bins; ++b) {
    if (curve.count[b] == 0) continue;
    double n = curve.count[b];
    double mean = sum[b] / n;
    curve.mean_accuracy[b] = mean;
    double var = std::max(0.0, sumsq[b] / n - mean * mean);
    curve.std_accuracy[b] = std::sqrt(var);
  }
  return curve;
}

double bias_gap(const BiasCurve& curve, uint32_t min_count) {
  int lo_bin = -1;
  int hi_bin = -1;
  for (std::size_t b = 0; b < curve.count.size(); ++b) {
    if (curve.count[b] < min_count) continue;
    if (lo_bin < 0) lo_bin = static_cast<int>(b);
    hi_bin = static_cast<int>(b);
  }
  if (lo_bin < 0 || hi_bin == lo_bin) {
    throw Error("bias gap needs two bins with at least " + std::to_string(min_count) +
                " tasks");
  }
  // Prototypes that collapse toward the centroid (small distance) are the
  // biased, low-accuracy tasks, so far-minus-near is positive when the
  // bias effect is present.
  return curve.mean_accuracy[hi_bin] - curve.mean_accuracy[lo_bin];
}

std::vector<std::pair<uint32_t, BiasCurve>> sweep_shots(const SimSpec& spec,
                                                        std::span<const uint32_t> shots) {
  std::vector<std::pair<uint32_t, BiasCurve>> out;
  out.reserve(shots.size());
  for (std::size_t i = 0; i < shots.size(); ++i) {
    SimSpec s = spec;
    s.k_shot = shots[i];
    s.seed = derive_seed(spec.seed, i);
    out.emplace_back(shots[i], run_bias_simulation(s));
  }
  return out;
}

std::vector<std::pair<double, BiasCurve>> sweep_separation(const SimSpec& spec,
                                                           std::span<const double> a_values) {
  std::vector<std::pair<double, BiasCurve>> out;
  out.reserve(a_values.size());
  for (std::size_t i = 0; i < a_values.size(); ++i) {
    SimSpec s = spec;
    s.a = a_values[i];
    s.seed = derive_seed(spec.seed, i);
    out.emplace_back(a_values[i], run_bias_simulation(s));
  }
  return out;
}

}  // namespace tcpr
