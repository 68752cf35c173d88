#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tcpr/feature_bank.hpp"

namespace tcpr {

// Norms below this are treated as zero everywhere a division by a norm
// happens.
inline constexpr double kNormEps = 1e-12;

// A unit-norm float32 vector. The only way to build one is through the
// validating factory or the library's own normalizing operations, so any
// Direction in flight satisfies ||v|| = 1 within 1e-6.
class Direction {
 public:
  // Validates ||v|| within 1e-6 of 1; throws Error otherwise.
  static Direction from_unit(std::vector<float> v);

  std::size_t dim() const { return v_.size(); }
  const float* data() const { return v_.data(); }
  float operator[](std::size_t i) const { return v_[i]; }
  const std::vector<float>& values() const { return v_; }
  std::span<const float> span() const { return v_; }

 private:
  explicit Direction(std::vector<float> v) : v_(std::move(v)) {}
  std::vector<float> v_;
};

// x / ||x||, accumulating the norm in f64. Throws ZeroVector when
// ||x|| <= 1e-12.
Direction l2_normalize(std::span<const float> x);

// Cosine of the angle between a and b, clamped into [-1, 1]. Throws
// DimMismatch on length mismatch and ZeroVector when either norm is
// degenerate.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct Neighbor {
  uint32_t index;
  float similarity;
};

// The k base rows most cosine-similar to probe, in descending similarity
// with ties broken by ascending row index. k is clamped to the bank size.
// Runs one similarity scan over the bank (the hot loop), then a partial
// selection. Throws BadSpec for k = 0, DimMismatch when probe and bank
// dims differ, ZeroVector when a bank row has degenerate norm.
std::vector<Neighbor> top_k_neighbors(const FeatureBank& base, const Direction& probe,
                                      uint32_t k);

// Similarity-weighted simplex over retained neighbors: negative
// similarities clamp to zero, weights are cos^p / sum(cos^p), and a uniform
// distribution is the fallback when every similarity clamps away. Throws
// BadSpec for p < 0.
std::vector<double> neighbor_weights(std::span<const Neighbor> neighbors, float p);

// How the task-centroid direction is estimated before projection removal.
struct CentroidEstimator {
  enum class Kind { oracle, support_mean, base_neighbors };

  Kind kind = Kind::base_neighbors;
  uint32_t k = 100;   // base_neighbors only
  float p = 0.5f;     // base_neighbors only

  static CentroidEstimator oracle() { return {Kind::oracle, 0, 0.0f}; }
  static CentroidEstimator support_mean() { return {Kind::support_mean, 0, 0.0f}; }
  static CentroidEstimator base_neighbors(uint32_t k, float p = 0.5f) {
    return {Kind::base_neighbors, k, p};
  }
};

std::string_view centroid_kind_name(CentroidEstimator::Kind kind);

// Estimates the unit task-centroid direction from the episode's unit
// vectors.
//  - oracle: mean of support and query directions (query must be non-null;
//    transductive, used as an upper-bound reference);
//  - support_mean: mean of support directions only;
//  - base_neighbors: probe the base bank with the normalized support mean,
//    take the top-k cosine neighbors, and average their unit directions
//    under neighbor_weights (base must be non-null).
// Throws MissingQuery / MissingBase when a required input is null and
// ZeroVector when an aggregate cancels to zero.
Direction estimate_task_centroid(std::span<const Direction> support,
                                 const std::vector<Direction>* query,
                                 const FeatureBank* base,
                                 const CentroidEstimator& estimator);

// Removes x's component along c and re-normalizes:
// l2_normalize(x - (x.c) c), with the projection coefficient accumulated
// in f64. Throws ZeroAfterProjection when x is (anti)parallel to c within
// 1e-9 and DimMismatch on length mismatch.
Direction remove_projection(const Direction& x, const Direction& c);

enum class TransformKind { none, l2, cl2n, zn, tcpr };

std::string_view transform_kind_name(TransformKind kind);

// A fitted feature transform applied identically to support and query
// vectors of one task.
//  - none / l2: plain L2 normalization (identical by construction, since
//    the downstream classifiers are cosine-based);
//  - cl2n: subtract the base-bank mean, then L2-normalize;
//  - zn: per-vector z-score over coordinates (population std), then
//    L2-normalize;
//  - tcpr: L2-normalize, remove the projection along the fitted task
//    centroid, re-normalize.
class TransformPipeline {
 public:
  static TransformPipeline none();
  static TransformPipeline l2();
  static TransformPipeline zn();
  static TransformPipeline cl2n(const FeatureBank& base);
  static TransformPipeline tcpr(const CentroidEstimator& estimator);

  TransformKind kind() const { return kind_; }
  const CentroidEstimator& estimator() const { return estimator_; }

  // Fits per-task state. Only tcpr has any: the task centroid. query may be
  // null except for the oracle estimator; base may be null except for the
  // base_neighbors estimator (non-oracle estimators never read the query —
  // the evaluation stays inductive).
  void fit(std::span<const Direction> support, const std::vector<Direction>* query,
           const FeatureBank* base);

  // Transforms one raw feature vector. Throws Error if a tcpr pipeline has
  // not been fitted, plus the underlying normalization errors (ZeroVector,
  // ZeroStd, ZeroAfterProjection).
  Direction apply(std::span<const float> x) const;

  bool fitted() const { return kind_ != TransformKind::tcpr || centroid_.has_value(); }
  const std::optional<Direction>& task_centroid() const { return centroid_; }

 private:
  TransformPipeline(TransformKind kind, CentroidEstimator estimator)
      : kind_(kind), estimator_(estimator) {}

  TransformKind kind_;
  CentroidEstimator estimator_;
  std::vector<double> base_mean_;       // cl2n
  std::optional<Direction> centroid_;   // tcpr, after fit
};

}  // namespace tcpr
