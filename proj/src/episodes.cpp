#include "tcpr/episodes.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tcpr/parallel.hpp"

namespace tcpr {

namespace {

// First `take` elements of a uniform random permutation of `pool`,
// via partial Fisher-Yates; pool is consumed by value.
std::vector<uint32_t> draw_without_replacement(std::vector<uint32_t> pool,
                                               std::size_t take, SplitMix64& rng) {
  for (std::size_t i = 0; i < take; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

// Builds the right pipeline for a spec; cl2n folds the base statistics in
// here, so evaluate() can construct one template pipeline instead of
// re-scanning the base bank every episode.
TransformPipeline make_pipeline(const PipelineSpec& spec, const FeatureBank* base) {
  switch (spec.transform) {
    case TransformKind::none:
      return TransformPipeline::none();
    case TransformKind::l2:
      return TransformPipeline::l2();
    case TransformKind::zn:
      return TransformPipeline::zn();
    case TransformKind::cl2n:
      if (base == nullptr) {
        throw MissingBase("cl2n needs a base bank for its centering mean");
      }
      return TransformPipeline::cl2n(*base);
    case TransformKind::tcpr:
      return TransformPipeline::tcpr(spec.estimator);
  }
  throw BadSpec("unknown transform kind");
}

double run_with_pipeline(const Episode& episode, const FeatureBank* base,
                         TransformPipeline pipeline, ClassifierKind classifier,
                         const TrainConfig& train) {
  if (episode.support.size() != episode.support_labels.size() ||
      episode.query.size() != episode.query_labels.size()) {
    throw DimMismatch("episode feature and label lists disagree in length");
  }
  if (episode.support.empty() || episode.query.empty()) {
    throw DimMismatch("episode needs non-empty support and query sets");
  }

  if (pipeline.kind() == TransformKind::tcpr) {
    std::vector<Direction> support_dirs;
    support_dirs.reserve(episode.support.size());
    for (const std::vector<float>& s : episode.support) {
      support_dirs.push_back(l2_normalize(s));
    }
    if (pipeline.estimator().kind == CentroidEstimator::Kind::oracle) {
      std::vector<Direction> query_dirs;
      query_dirs.reserve(episode.query.size());
      for (const std::vector<float>& q : episode.query) {
        query_dirs.push_back(l2_normalize(q));
      }
      pipeline.fit(support_dirs, &query_dirs, base);
    } else {
      // Inductive estimators never see the query set.
      pipeline.fit(support_dirs, nullptr, base);
    }
  }

  std::vector<Direction> support;
  support.reserve(episode.support.size());
  for (const std::vector<float>& s : episode.support) {
    support.push_back(pipeline.apply(s));
  }

  PrototypeSet prototypes =
      classifier == ClassifierKind::ncc
          ? fit_ncc(support, episode.support_labels, episode.n_way)
          : fit_cosine_softmax(support, episode.support_labels, episode.n_way, train);

  std::size_t correct = 0;
  for (std::size_t i = 0; i < episode.query.size(); ++i) {
    Direction q = pipeline.apply(episode.query[i]);
    std::vector<double> probs = predict_cosine(prototypes, q, train.gamma);
    if (argmax_class(probs) == episode.query_labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(episode.query.size());
}

// Degeneracies that spoil a single episode without implicating the
// configuration; evaluate() counts these and moves on.
bool is_episode_degeneracy(const Error& e) {
  return dynamic_cast<const ZeroVector*>(&e) != nullptr ||
         dynamic_cast<const ZeroAfterProjection*>(&e) != nullptr ||
         dynamic_cast<const ZeroStd*>(&e) != nullptr ||
         dynamic_cast<const NonFiniteLoss*>(&e) != nullptr ||
         dynamic_cast<const EmptyClass*>(&e) != nullptr;
}

}  // namespace

std::string_view classifier_kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::ncc:
      return "ncc";
    case ClassifierKind::cosine:
      return "cosine";
  }
  return "unknown";
}

Episode sample_episode(const FeatureBank& novel, uint32_t n_way, uint32_t k_shot,
                       uint32_t q_query, SplitMix64& rng) {
  if (n_way == 0 || k_shot == 0 || q_query == 0) {
    throw BadSpec("n_way, k_shot and q_query must all be positive");
  }
  if (novel.num_classes() < n_way) {
    throw InsufficientClasses("bank has " + std::to_string(novel.num_classes()) +
                              " classes, episode needs " + std::to_string(n_way));
  }
  std::size_t need = static_cast<std::size_t>(k_shot) + q_query;
  std::vector<uint32_t> eligible;
  for (uint32_t c = 0; c < novel.num_classes(); ++c) {
    if (novel.class_rows(c).size() >= need) eligible.push_back(c);
  }
  if (eligible.size() < n_way) {
    throw InsufficientSamples("only " + std::to_string(eligible.size()) +
                              " classes have the " + std::to_string(need) +
                              " samples an episode needs, want " + std::to_string(n_way));
  }

  std::vector<uint32_t> classes = draw_without_replacement(std::move(eligible), n_way, rng);

  Episode ep;
  ep.n_way = n_way;
  ep.k_shot = k_shot;
  ep.q_query = q_query;
  ep.support.reserve(static_cast<std::size_t>(n_way) * k_shot);
  ep.support_labels.reserve(static_cast<std::size_t>(n_way) * k_shot);
  ep.query.reserve(static_cast<std::size_t>(n_way) * q_query);
  ep.query_labels.reserve(static_cast<std::size_t>(n_way) * q_query);
  for (uint32_t slot = 0; slot < n_way; ++slot) {
    std::vector<uint32_t> rows =
        draw_without_replacement(novel.class_rows(classes[slot]), need, rng);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::span<const float> r = novel.row(rows[i]);
      if (i < k_shot) {
        ep.support.emplace_back(r.begin(), r.end());
        ep.support_labels.push_back(slot);
      } else {
        ep.query.emplace_back(r.begin(), r.end());
        ep.query_labels.push_back(slot);
      }
    }
  }
  return ep;
}

double run_episode(const Episode& episode, const FeatureBank* base,
                   const PipelineSpec& pipeline, ClassifierKind classifier,
                   const TrainConfig& train) {
  return run_with_pipeline(episode, base, make_pipeline(pipeline, base), classifier,
                           train);
}

Ci95 ci95(std::span<const double> values) {
  if (values.empty()) {
    throw TooFewSamples("confidence interval needs at least one value");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) {
    return {mean, 0.0, true};
  }
  double ss = 0.0;
  for (double v : values) {
    double dv = v - mean;
    ss += dv * dv;
  }
  double sample_std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  double half = 1.96 * sample_std / std::sqrt(static_cast<double>(values.size()));
  return {mean, half, false};
}

EvalReport evaluate(const FeatureBank& novel, const FeatureBank* base,
                    const EvalConfig& config, uint64_t master_seed) {
  if (config.episodes == 0) throw BadSpec("episode count must be positive");

  // Configuration-level failures should surface immediately rather than as
  // a pile of failed episodes: bank eligibility (mirrors sample_episode)
  // and required-base checks.
  if (config.n_way == 0 || config.k_shot == 0 || config.q_query == 0) {
    throw BadSpec("n_way, k_shot and q_query must all be positive");
  }
  if (novel.num_classes() < config.n_way) {
    throw InsufficientClasses("bank has " + std::to_string(novel.num_classes()) +
                              " classes, episodes need " + std::to_string(config.n_way));
  }
  std::size_t need = static_cast<std::size_t>(config.k_shot) + config.q_query;
  uint32_t populated = 0;
  for (uint32_t c = 0; c < novel.num_classes(); ++c) {
    if (novel.class_rows(c).size() >= need) ++populated;
  }
  if (populated < config.n_way) {
    throw InsufficientSamples("only " + std::to_string(populated) + " classes have the " +
                              std::to_string(need) + " samples an episode needs, want " +
                              std::to_string(config.n_way));
  }
  if (config.pipeline.transform == TransformKind::tcpr &&
      config.pipeline.estimator.kind == CentroidEstimator::Kind::base_neighbors &&
      base == nullptr) {
    throw MissingBase("tcpr with the base-knn estimator needs a base bank");
  }

  // One template pipeline; cl2n's base mean is computed once here. Each
  // episode copies it (cheap) and fits its own task state if any.
  TransformPipeline pipeline_template = make_pipeline(config.pipeline, base);

  std::vector<double> acc(config.episodes, 0.0);
  std::vector<uint8_t> ok(config.episodes, 0);
  parallel_for(config.episodes, config.threads, [&](std::size_t i) {
    SplitMix64 rng(derive_seed(master_seed, i));
    Episode ep =
        sample_episode(novel, config.n_way, config.k_shot, config.q_query, rng);
    try {
      acc[i] = run_with_pipeline(ep, base, pipeline_template, config.classifier,
                                 config.train);
      ok[i] = 1;
    } catch (const Error& e) {
      if (!is_episode_degeneracy(e)) throw;
    }
  });

  EvalReport report;
  report.config = config;
  report.master_seed = master_seed;
  for (uint32_t i = 0; i < config.episodes; ++i) {
    if (ok[i]) {
      report.episode_index.push_back(i);
      report.accuracy.push_back(acc[i]);
    } else {
      ++report.failed;
    }
  }
  if (report.accuracy.empty()) {
    throw AllEpisodesFailed("all " + std::to_string(config.episodes) +
                            " episodes failed with degeneracies");
  }
  Ci95 ci = ci95(report.accuracy);
  report.mean_accuracy = ci.mean;
  report.ci95_half_width = ci.half_width;
  report.ci_degenerate = ci.degenerate;
  return report;
}

}  // namespace tcpr
