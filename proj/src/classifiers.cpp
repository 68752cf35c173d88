#include "tcpr/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcpr/errors.hpp"
#include "tcpr/kernels.hpp"
#include "tcpr/rng.hpp"

namespace tcpr {

namespace {

// Shape checks shared by the loss, gradient, and fit entry points. Returns
// the feature dimension.
std::size_t check_labeled_set(std::span<const Direction> vectors,
                              std::span<const uint32_t> labels, uint32_t n_way) {
  if (n_way == 0) throw BadSpec("n_way must be positive");
  if (vectors.empty()) throw DimMismatch("support set is empty");
  if (vectors.size() != labels.size()) {
    throw DimMismatch("support has " + std::to_string(vectors.size()) + " vectors but " +
                      std::to_string(labels.size()) + " labels");
  }
  std::size_t d = vectors[0].dim();
  for (const Direction& v : vectors) {
    if (v.dim() != d) throw DimMismatch("support directions disagree on dimension");
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_way) {
      throw LabelOutOfRange("label " + std::to_string(labels[i]) + " at position " +
                            std::to_string(i) + " exceeds n_way " + std::to_string(n_way));
    }
  }
  return d;
}

void check_weight_shape(std::span<const double> weights, uint32_t n_way, std::size_t d) {
  if (weights.size() != static_cast<std::size_t>(n_way) * d) {
    throw DimMismatch("weight buffer has " + std::to_string(weights.size()) +
                      " values, expected " + std::to_string(n_way) + "x" +
                      std::to_string(d));
  }
}

void check_gamma(float gamma) {
  if (!(gamma > 0.0f) || !std::isfinite(gamma)) {
    throw BadSpec("gamma must be finite and positive");
  }
}

// Copies the f32 support into an f64 matrix once so the training inner
// loops run entirely in f64.
std::vector<double> widen(std::span<const Direction> vectors, std::size_t d) {
  std::vector<double> x(vectors.size() * d);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const float* row = vectors[i].data();
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = static_cast<double>(row[j]);
  }
  return x;
}

// Row norms and normalized rows of W; throws ZeroVector on a degenerate row.
void normalize_rows(std::span<const double> weights, uint32_t n_way, std::size_t d,
                    std::vector<double>& norms, std::vector<double>& unit) {
  norms.resize(n_way);
  unit.resize(weights.size());
  for (uint32_t c = 0; c < n_way; ++c) {
    const double* row = weights.data() + static_cast<std::size_t>(c) * d;
    double norm = std::sqrt(kernels::dot_f64(row, row, d));
    if (!(norm > kNormEps)) {
      throw ZeroVector("classifier weight row " + std::to_string(c) +
                       " cannot be normalized");
    }
    norms[c] = norm;
    double* u = unit.data() + static_cast<std::size_t>(c) * d;
    for (std::size_t j = 0; j < d; ++j) u[j] = row[j] / norm;
  }
}

// Stable softmax of gamma * cos into `probs`; returns the sample's
// cross-entropy term given the true label.
double softmax_xent(std::span<const double> cos, float gamma, uint32_t label,
                    std::vector<double>& probs) {
  std::size_t n = cos.size();
  probs.resize(n);
  double zmax = -1e300;
  for (std::size_t c = 0; c < n; ++c) {
    probs[c] = static_cast<double>(gamma) * cos[c];
    zmax = std::max(zmax, probs[c]);
  }
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    probs[c] = std::exp(probs[c] - zmax);
    sum += probs[c];
  }
  double lse = zmax + std::log(sum);
  double z_label = static_cast<double>(gamma) * cos[label];
  for (std::size_t c = 0; c < n; ++c) probs[c] /= sum;
  return lse - z_label;
}

}  // namespace

PrototypeSet::PrototypeSet(std::vector<float> weights, uint32_t n_way, uint32_t dim)
    : n_way_(n_way), dim_(dim), weights_(std::move(weights)) {
  if (n_way_ == 0 || dim_ == 0) {
    throw DimMismatch("prototype set must have at least one class and one dimension");
  }
  if (weights_.size() != static_cast<std::size_t>(n_way_) * dim_) {
    throw DimMismatch("prototype buffer has " + std::to_string(weights_.size()) +
                      " values, expected " + std::to_string(n_way_) + "x" +
                      std::to_string(dim_));
  }
  for (uint32_t c = 0; c < n_way_; ++c) {
    const float* row = weights_.data() + static_cast<std::size_t>(c) * dim_;
    double norm = std::sqrt(kernels::dot_f32_f64acc(row, row, dim_));
    if (std::abs(norm - 1.0) > 1e-6) {
      throw Error("prototype row " + std::to_string(c) + " has norm " +
                  std::to_string(norm) + ", expected unit");
    }
  }
}

std::span<const float> PrototypeSet::prototype(uint32_t c) const {
  if (c >= n_way_) {
    throw ClassOutOfRange("prototype " + std::to_string(c) + " out of range, set has " +
                          std::to_string(n_way_) + " classes");
  }
  return {weights_.data() + static_cast<std::size_t>(c) * dim_, dim_};
}

PrototypeSet fit_ncc(std::span<const Direction> vectors, std::span<const uint32_t> labels,
                     uint32_t n_way) {
  std::size_t d = check_labeled_set(vectors, labels, n_way);
  std::vector<double> sums(static_cast<std::size_t>(n_way) * d, 0.0);
  std::vector<uint32_t> counts(n_way, 0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    kernels::accumulate_f64(sums.data() + static_cast<std::size_t>(labels[i]) * d,
                            vectors[i].data(), d);
    ++counts[labels[i]];
  }
  std::vector<float> weights(static_cast<std::size_t>(n_way) * d);
  for (uint32_t c = 0; c < n_way; ++c) {
    if (counts[c] == 0) {
      throw EmptyClass("class " + std::to_string(c) + " has no support samples");
    }
    double* row = sums.data() + static_cast<std::size_t>(c) * d;
    for (std::size_t j = 0; j < d; ++j) row[j] /= static_cast<double>(counts[c]);
    double norm = std::sqrt(kernels::dot_f64(row, row, d));
    if (!(norm > kNormEps)) {
      throw ZeroVector("class " + std::to_string(c) + " mean cancelled to zero");
    }
    float* out = weights.data() + static_cast<std::size_t>(c) * d;
    for (std::size_t j = 0; j < d; ++j) {
      out[j] = static_cast<float>(row[j] / norm);
    }
  }
  return PrototypeSet(std::move(weights), n_way, static_cast<uint32_t>(d));
}

std::vector<double> predict_cosine(const PrototypeSet& prototypes, const Direction& x,
                                   float gamma) {
  check_gamma(gamma);
  if (x.dim() != prototypes.dim()) {
    throw DimMismatch("query dim " + std::to_string(x.dim()) +
                      " does not match prototype dim " +
                      std::to_string(prototypes.dim()));
  }
  uint32_t n = prototypes.n_way();
  std::vector<double> cos(n);
  for (uint32_t c = 0; c < n; ++c) {
    std::span<const float> w = prototypes.prototype(c);
    cos[c] = kernels::dot_f32_f64acc(w.data(), x.data(), x.dim());
  }
  std::vector<double> probs;
  softmax_xent(cos, gamma, 0, probs);
  return probs;
}

uint32_t argmax_class(std::span<const double> probs) {
  if (probs.empty()) throw DimMismatch("argmax of an empty probability vector");
  uint32_t best = 0;
  for (uint32_t c = 1; c < probs.size(); ++c) {
    if (probs[c] > probs[best]) best = c;
  }
  return best;
}

std::string_view weight_init_name(WeightInit init) {
  switch (init) {
    case WeightInit::ncc:
      return "ncc";
    case WeightInit::random:
      return "random";
    case WeightInit::zeros:
      return "zeros";
  }
  return "unknown";
}

double cosine_softmax_loss(std::span<const double> weights, uint32_t n_way,
                           std::span<const Direction> vectors,
                           std::span<const uint32_t> labels, float gamma) {
  check_gamma(gamma);
  std::size_t d = check_labeled_set(vectors, labels, n_way);
  check_weight_shape(weights, n_way, d);

  std::vector<double> norms, unit;
  normalize_rows(weights, n_way, d, norms, unit);
  std::vector<double> x = widen(vectors, d);

  double loss = 0.0;
  std::vector<double> cos(n_way), probs;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double* xi = x.data() + i * d;
    for (uint32_t c = 0; c < n_way; ++c) {
      cos[c] = kernels::dot_f64(unit.data() + static_cast<std::size_t>(c) * d, xi, d);
    }
    loss += softmax_xent(cos, gamma, labels[i], probs);
  }
  return loss / static_cast<double>(vectors.size());
}

std::vector<double> cosine_softmax_grad(std::span<const double> weights, uint32_t n_way,
                                        std::span<const Direction> vectors,
                                        std::span<const uint32_t> labels, float gamma) {
  check_gamma(gamma);
  std::size_t d = check_labeled_set(vectors, labels, n_way);
  check_weight_shape(weights, n_way, d);

  std::vector<double> norms, unit;
  normalize_rows(weights, n_way, d, norms, unit);
  std::vector<double> x = widen(vectors, d);

  double m = static_cast<double>(vectors.size());
  std::vector<double> grad(weights.size(), 0.0);
  std::vector<double> cos(n_way), probs;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const double* xi = x.data() + i * d;
    for (uint32_t c = 0; c < n_way; ++c) {
      cos[c] = kernels::dot_f64(unit.data() + static_cast<std::size_t>(c) * d, xi, d);
    }
    softmax_xent(cos, gamma, labels[i], probs);
    for (uint32_t c = 0; c < n_way; ++c) {
      double delta = (probs[c] - (labels[i] == c ? 1.0 : 0.0)) *
                     static_cast<double>(gamma) / m;
      // d(w_hat.x)/dw = (x - (w_hat.x) w_hat) / ||w||: the gradient passes
      // through the row normalization rather than treating it as constant.
      double* g = grad.data() + static_cast<std::size_t>(c) * d;
      kernels::axpy_f64(delta / norms[c], xi, g, d);
      kernels::axpy_f64(-delta * cos[c] / norms[c],
                        unit.data() + static_cast<std::size_t>(c) * d, g, d);
    }
  }
  return grad;
}

PrototypeSet fit_cosine_softmax(std::span<const Direction> vectors,
                                std::span<const uint32_t> labels, uint32_t n_way,
                                const TrainConfig& config) {
  check_gamma(config.gamma);
  if (!(config.learning_rate > 0.0f) || !std::isfinite(config.learning_rate)) {
    throw BadSpec("learning_rate must be finite and positive");
  }
  std::size_t d = check_labeled_set(vectors, labels, n_way);

  // Initial weights, stored row-normalized so an epochs=0 fit already
  // satisfies the unit-prototype contract.
  std::vector<double> w(static_cast<std::size_t>(n_way) * d);
  switch (config.init) {
    case WeightInit::ncc: {
      PrototypeSet init = fit_ncc(vectors, labels, n_way);
      for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = static_cast<double>(init.weights()[i]);
      }
      break;
    }
    case WeightInit::random: {
      // Validate class coverage up front so random init fails the same way
      // ncc init does on a malformed support set.
      std::vector<uint32_t> counts(n_way, 0);
      for (uint32_t l : labels) ++counts[l];
      for (uint32_t c = 0; c < n_way; ++c) {
        if (counts[c] == 0) {
          throw EmptyClass("class " + std::to_string(c) + " has no support samples");
        }
      }
      SplitMix64 rng(config.seed);
      std::vector<double> row(d);
      for (uint32_t c = 0; c < n_way; ++c) {
        for (std::size_t j = 0; j < d; ++j) row[j] = rng.gaussian();
        double norm = std::sqrt(kernels::dot_f64(row.data(), row.data(), d));
        if (!(norm > kNormEps)) {
          throw ZeroVector("random init drew a zero weight row");
        }
        double* out = w.data() + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j) {
          out[j] = static_cast<double>(static_cast<float>(row[j] / norm));
        }
      }
      break;
    }
    case WeightInit::zeros:
      throw ZeroVector("zeros init leaves every weight row unnormalizable");
  }

  for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::vector<double> grad = cosine_softmax_grad(w, n_way, vectors, labels, config.gamma);
    kernels::axpy_f64(-static_cast<double>(config.learning_rate), grad.data(), w.data(),
                      w.size());
    double loss = cosine_softmax_loss(w, n_way, vectors, labels, config.gamma);
    if (!std::isfinite(loss)) {
      throw NonFiniteLoss("training loss became non-finite at epoch " +
                          std::to_string(epoch));
    }
  }

  std::vector<float> out(w.size());
  if (config.epochs == 0) {
    // No gradient step touched the initialization; its rows are exact f32
    // values, so pass them through unchanged (ncc init reproduces fit_ncc
    // bit for bit).
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(w[i]);
  } else {
    std::vector<double> norms, unit;
    normalize_rows(w, n_way, d, norms, unit);
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = static_cast<float>(unit[i]);
  }
  return PrototypeSet(std::move(out), n_way, static_cast<uint32_t>(d));
}

}  // namespace tcpr
