#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tcpr/transforms.hpp"

namespace tcpr {

// n_way unit-norm class prototypes, row-major. Construction validates that
// every row is unit within 1e-6.
class PrototypeSet {
 public:
  PrototypeSet(std::vector<float> weights, uint32_t n_way, uint32_t dim);

  uint32_t n_way() const { return n_way_; }
  uint32_t dim() const { return dim_; }
  std::span<const float> prototype(uint32_t c) const;
  const std::vector<float>& weights() const { return weights_; }

 private:
  uint32_t n_way_;
  uint32_t dim_;
  std::vector<float> weights_;
};

// Nearest-centroid fit: prototype c is the L2-normalized mean of class c's
// support directions. Labels must lie in [0, n_way) with every class
// represented (EmptyClass otherwise); vectors and labels are parallel
// arrays (DimMismatch on length or dimension disagreements).
PrototypeSet fit_ncc(std::span<const Direction> vectors,
                     std::span<const uint32_t> labels, uint32_t n_way);

// Softmax over gamma-scaled cosine similarities to each prototype. Sums to
// one; computed with the max-subtraction trick so large gamma stays finite.
std::vector<double> predict_cosine(const PrototypeSet& prototypes, const Direction& x,
                                   float gamma);

// Index of the largest probability; earlier index wins ties.
uint32_t argmax_class(std::span<const double> probs);

enum class WeightInit { ncc, random, zeros };

std::string_view weight_init_name(WeightInit init);

struct TrainConfig {
  float gamma = 10.0f;         // cosine-logit scale, > 0
  float learning_rate = 0.01f; // > 0
  uint32_t epochs = 100;       // full-batch gradient steps
  WeightInit init = WeightInit::ncc;
  uint64_t seed = 0;           // random init only
};

// Mean cross-entropy of the gamma-scaled cosine-softmax classifier with
// (possibly unnormalized) f64 weight rows W (n_way x dim, row-major) on the
// given labeled directions. Exposed so the gradient can be checked against
// finite differences of this exact function.
double cosine_softmax_loss(std::span<const double> weights, uint32_t n_way,
                           std::span<const Direction> vectors,
                           std::span<const uint32_t> labels, float gamma);

// Analytic gradient of cosine_softmax_loss w.r.t. W, same layout. The
// normalization of each row inside the forward pass is differentiated
// through, not detached.
std::vector<double> cosine_softmax_grad(std::span<const double> weights, uint32_t n_way,
                                        std::span<const Direction> vectors,
                                        std::span<const uint32_t> labels, float gamma);

// Full-batch gradient descent on cosine_softmax_loss. Weights are kept
// unnormalized between steps and re-normalized per row for the result;
// with ncc init and epochs=0 the result is bit-identical to fit_ncc.
// Throws BadSpec for non-positive gamma or learning rate, EmptyClass /
// DimMismatch as in fit_ncc, ZeroVector for zeros init (a zero row cannot
// be normalized), and NonFiniteLoss if training diverges.
PrototypeSet fit_cosine_softmax(std::span<const Direction> vectors,
                                std::span<const uint32_t> labels, uint32_t n_way,
                                const TrainConfig& config);

}  // namespace tcpr
