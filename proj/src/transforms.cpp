#include "tcpr/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tcpr/kernels.hpp"

namespace tcpr {

namespace {

// Normalizes an f64 work buffer down to an f32 Direction. All aggregate
// paths (means, weighted sums, projection residuals) funnel through here so
// the rounding story is identical everywhere: one f64 division per
// component, one rounding to f32.
Direction normalize_f64(std::span<const double> v, const char* zero_what) {
  double norm = std::sqrt(kernels::dot_f64(v.data(), v.data(), v.size()));
  if (!(norm > kNormEps)) throw ZeroVector(zero_what);
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<float>(v[i] / norm);
  }
  return Direction::from_unit(std::move(out));
}

}  // namespace

Direction Direction::from_unit(std::vector<float> v) {
  if (v.empty()) throw DimMismatch("direction must have at least one component");
  double norm = std::sqrt(kernels::dot_f32_f64acc(v.data(), v.data(), v.size()));
  if (std::abs(norm - 1.0) > 1e-6) {
    throw Error("direction norm " + std::to_string(norm) + " is not unit");
  }
  return Direction(std::move(v));
}

Direction l2_normalize(std::span<const float> x) {
  if (x.empty()) throw DimMismatch("cannot normalize an empty vector");
  double norm = std::sqrt(kernels::dot_f32_f64acc(x.data(), x.data(), x.size()));
  if (!(norm > kNormEps)) throw ZeroVector("cannot normalize a zero vector");
  std::vector<float> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<float>(static_cast<double>(x[i]) / norm);
  }
  return Direction::from_unit(std::move(out));
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw DimMismatch("cosine of " + std::to_string(a.size()) + "-dim and " +
                      std::to_string(b.size()) + "-dim vectors");
  }
  if (a.empty()) throw DimMismatch("cosine of empty vectors");
  double na = std::sqrt(kernels::dot_f32_f64acc(a.data(), a.data(), a.size()));
  double nb = std::sqrt(kernels::dot_f32_f64acc(b.data(), b.data(), b.size()));
  if (!(na > kNormEps) || !(nb > kNormEps)) {
    throw ZeroVector("cosine similarity with a zero vector");
  }
  double sim = kernels::dot_f32_f64acc(a.data(), b.data(), a.size()) / (na * nb);
  return std::clamp(sim, -1.0, 1.0);
}

std::vector<Neighbor> top_k_neighbors(const FeatureBank& base, const Direction& probe,
                                      uint32_t k) {
  if (k == 0) throw BadSpec("top-k neighbor count must be positive");
  if (probe.dim() != base.dim()) {
    throw DimMismatch("probe dim " + std::to_string(probe.dim()) +
                      " does not match bank dim " + std::to_string(base.dim()));
  }
  std::size_t n = base.size();
  std::size_t d = base.dim();
  // The ranking value is computed exactly as cosine_similarity computes it
  // (f64-accumulated dot over the f64 norm product), so a full sort by that
  // function reproduces this selection bit-for-bit, ties included.
  double na = std::sqrt(kernels::dot_f32_f64acc(probe.data(), probe.data(), d));
  std::vector<double> sims(n);
  for (std::size_t i = 0; i < n; ++i) {
    double nb = base.row_norm(i);
    if (!(nb > kNormEps)) {
      throw ZeroVector("base row " + std::to_string(i) + " has zero norm");
    }
    const float* row = base.data() + i * d;
    double sim = kernels::dot_f32_f64acc(row, probe.data(), d) / (na * nb);
    sims[i] = std::clamp(sim, -1.0, 1.0);
  }

  std::size_t kk = std::min<std::size_t>(k, n);
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  auto better = [&](uint32_t a, uint32_t b) {
    if (sims[a] != sims[b]) return sims[a] > sims[b];
    return a < b;
  };
  std::partial_sort(order.begin(), order.begin() + kk, order.end(), better);

  std::vector<Neighbor> out;
  out.reserve(kk);
  for (std::size_t i = 0; i < kk; ++i) {
    out.push_back({order[i], static_cast<float>(sims[order[i]])});
  }
  return out;
}

std::vector<double> neighbor_weights(std::span<const Neighbor> neighbors, float p) {
  if (!(p >= 0.0f) || !std::isfinite(p)) {
    throw BadSpec("neighbor weight exponent must be finite and non-negative");
  }
  std::vector<double> w(neighbors.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    double sim = neighbors[i].similarity;
    if (sim > 0.0) {
      w[i] = std::pow(sim, static_cast<double>(p));
      sum += w[i];
    }
  }
  if (sum > 0.0) {
    for (double& v : w) v /= sum;
  } else if (!w.empty()) {
    // Every retained neighbor points away from the probe; fall back to a
    // uniform average rather than dividing by zero.
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
  }
  return w;
}

std::string_view centroid_kind_name(CentroidEstimator::Kind kind) {
  switch (kind) {
    case CentroidEstimator::Kind::oracle:
      return "oracle";
    case CentroidEstimator::Kind::support_mean:
      return "support";
    case CentroidEstimator::Kind::base_neighbors:
      return "base-knn";
  }
  return "unknown";
}

Direction estimate_task_centroid(std::span<const Direction> support,
                                 const std::vector<Direction>* query,
                                 const FeatureBank* base,
                                 const CentroidEstimator& estimator) {
  if (support.empty()) throw BadSpec("centroid estimation needs a non-empty support set");
  std::size_t d = support[0].dim();
  for (const Direction& s : support) {
    if (s.dim() != d) throw DimMismatch("support directions disagree on dimension");
  }

  std::vector<double> acc(d, 0.0);
  switch (estimator.kind) {
    case CentroidEstimator::Kind::oracle: {
      if (query == nullptr) {
        throw MissingQuery("oracle centroid estimation needs the query set");
      }
      for (const Direction& s : support) {
        kernels::accumulate_f64(acc.data(), s.data(), d);
      }
      for (const Direction& q : *query) {
        if (q.dim() != d) throw DimMismatch("query directions disagree on dimension");
        kernels::accumulate_f64(acc.data(), q.data(), d);
      }
      double count = static_cast<double>(support.size() + query->size());
      for (double& v : acc) v /= count;
      return normalize_f64(acc, "oracle centroid cancelled to zero");
    }
    case CentroidEstimator::Kind::support_mean: {
      for (const Direction& s : support) {
        kernels::accumulate_f64(acc.data(), s.data(), d);
      }
      for (double& v : acc) v /= static_cast<double>(support.size());
      return normalize_f64(acc, "support mean cancelled to zero");
    }
    case CentroidEstimator::Kind::base_neighbors: {
      if (base == nullptr) {
        throw MissingBase("base-neighbor centroid estimation needs a base bank");
      }
      if (base->dim() != d) {
        throw DimMismatch("base bank dim " + std::to_string(base->dim()) +
                          " does not match support dim " + std::to_string(d));
      }
      for (const Direction& s : support) {
        kernels::accumulate_f64(acc.data(), s.data(), d);
      }
      for (double& v : acc) v /= static_cast<double>(support.size());
      Direction probe = normalize_f64(acc, "support mean cancelled to zero");

      std::vector<Neighbor> neighbors = top_k_neighbors(*base, probe, estimator.k);
      std::vector<double> weights = neighbor_weights(neighbors, estimator.p);
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const float* row = base->data() + static_cast<std::size_t>(neighbors[i].index) * d;
        double coeff = weights[i] / base->row_norm(neighbors[i].index);
        for (std::size_t j = 0; j < d; ++j) {
          acc[j] += coeff * static_cast<double>(row[j]);
        }
      }
      return normalize_f64(acc, "neighbor aggregate cancelled to zero");
    }
  }
  throw BadSpec("unknown centroid estimator kind");
}

Direction remove_projection(const Direction& x, const Direction& c) {
  std::size_t d = x.dim();
  if (c.dim() != d) {
    throw DimMismatch("projection of " + std::to_string(d) + "-dim vector along " +
                      std::to_string(c.dim()) + "-dim centroid");
  }
  // Dividing by c.c (= 1 within Direction tolerance) makes the residual
  // orthogonal to c in exact arithmetic instead of orthogonal only up to
  // the f32 rounding of c's norm; the orthogonality tolerance downstream is
  // tighter than that rounding.
  double cc = kernels::dot_f32_f64acc(c.data(), c.data(), d);
  double xx = kernels::dot_f32_f64acc(x.data(), x.data(), d);
  double xc = kernels::dot_f32_f64acc(x.data(), c.data(), d);
  if (std::abs(xc) / std::sqrt(xx * cc) > 1.0 - 1e-9) {
    throw ZeroAfterProjection("vector is parallel to the task centroid");
  }
  double coef = xc / cc;
  std::vector<double> r(d);
  for (std::size_t j = 0; j < d; ++j) {
    r[j] = static_cast<double>(x[j]) - coef * static_cast<double>(c[j]);
  }
  double norm = std::sqrt(kernels::dot_f64(r.data(), r.data(), d));
  if (!(norm > kNormEps)) {
    throw ZeroAfterProjection("vector is parallel to the task centroid");
  }
  std::vector<float> out(d);
  for (std::size_t j = 0; j < d; ++j) {
    out[j] = static_cast<float>(r[j] / norm);
  }
  return Direction::from_unit(std::move(out));
}

std::string_view transform_kind_name(TransformKind kind) {
  switch (kind) {
    case TransformKind::none:
      return "none";
    case TransformKind::l2:
      return "l2";
    case TransformKind::cl2n:
      return "cl2n";
    case TransformKind::zn:
      return "zn";
    case TransformKind::tcpr:
      return "tcpr";
  }
  return "unknown";
}

TransformPipeline TransformPipeline::none() {
  return TransformPipeline(TransformKind::none, CentroidEstimator{});
}

TransformPipeline TransformPipeline::l2() {
  return TransformPipeline(TransformKind::l2, CentroidEstimator{});
}

TransformPipeline TransformPipeline::zn() {
  return TransformPipeline(TransformKind::zn, CentroidEstimator{});
}

TransformPipeline TransformPipeline::cl2n(const FeatureBank& base) {
  TransformPipeline p(TransformKind::cl2n, CentroidEstimator{});
  std::size_t d = base.dim();
  p.base_mean_.assign(d, 0.0);
  for (std::size_t i = 0; i < base.size(); ++i) {
    kernels::accumulate_f64(p.base_mean_.data(), base.data() + i * d, d);
  }
  for (double& v : p.base_mean_) v /= static_cast<double>(base.size());
  return p;
}

TransformPipeline TransformPipeline::tcpr(const CentroidEstimator& estimator) {
  return TransformPipeline(TransformKind::tcpr, estimator);
}

void TransformPipeline::fit(std::span<const Direction> support,
                            const std::vector<Direction>* query,
                            const FeatureBank* base) {
  if (kind_ != TransformKind::tcpr) return;  // nothing task-specific to fit
  centroid_ = estimate_task_centroid(support, query, base, estimator_);
}

Direction TransformPipeline::apply(std::span<const float> x) const {
  switch (kind_) {
    case TransformKind::none:
    case TransformKind::l2:
      return l2_normalize(x);
    case TransformKind::cl2n: {
      if (x.size() != base_mean_.size()) {
        throw DimMismatch("vector dim " + std::to_string(x.size()) +
                          " does not match base mean dim " +
                          std::to_string(base_mean_.size()));
      }
      std::vector<double> r(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        r[j] = static_cast<double>(x[j]) - base_mean_[j];
      }
      return normalize_f64(r, "vector equals the base mean");
    }
    case TransformKind::zn: {
      if (x.empty()) throw DimMismatch("cannot z-score an empty vector");
      double mean = 0.0;
      for (float v : x) mean += static_cast<double>(v);
      mean /= static_cast<double>(x.size());
      double var = 0.0;
      for (float v : x) {
        double dv = static_cast<double>(v) - mean;
        var += dv * dv;
      }
      var /= static_cast<double>(x.size());
      double sd = std::sqrt(var);
      if (!(sd > kNormEps)) {
        throw ZeroStd("vector has zero coordinate variance");
      }
      std::vector<double> z(x.size());
      for (std::size_t j = 0; j < x.size(); ++j) {
        z[j] = (static_cast<double>(x[j]) - mean) / sd;
      }
      return normalize_f64(z, "z-scored vector cancelled to zero");
    }
    case TransformKind::tcpr: {
      if (!centroid_.has_value()) {
        throw Error("tcpr pipeline must be fitted before apply");
      }
      return remove_projection(l2_normalize(x), *centroid_);
    }
  }
  throw BadSpec("unknown transform kind");
}

}  // namespace tcpr
