#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "tcpr/classifiers.hpp"
#include "tcpr/feature_bank.hpp"
#include "tcpr/rng.hpp"
#include "tcpr/transforms.hpp"

namespace tcpr {

// One sampled N-way K-shot task. Labels are remapped to [0, n_way) in the
// order the classes were drawn; raw (untransformed) feature rows are
// copied out of the bank.
struct Episode {
  uint32_t n_way = 0;
  uint32_t k_shot = 0;
  uint32_t q_query = 0;
  std::vector<std::vector<float>> support;
  std::vector<uint32_t> support_labels;
  std::vector<std::vector<float>> query;
  std::vector<uint32_t> query_labels;
};

// Draws n_way distinct classes uniformly from those with at least
// k_shot + q_query rows, then k_shot + q_query distinct rows per class
// (first k_shot to support, rest to query; support and query never share a
// row). Throws InsufficientClasses when the bank has fewer than n_way
// classes, InsufficientSamples when fewer than n_way classes are populated
// enough, BadSpec for zero n_way/k_shot/q_query.
Episode sample_episode(const FeatureBank& novel, uint32_t n_way, uint32_t k_shot,
                       uint32_t q_query, SplitMix64& rng);

enum class ClassifierKind { ncc, cosine };

std::string_view classifier_kind_name(ClassifierKind kind);

// Value-level recipe for a TransformPipeline; run_episode instantiates a
// fresh pipeline from it for each task.
struct PipelineSpec {
  TransformKind transform = TransformKind::l2;
  CentroidEstimator estimator;  // read only when transform == tcpr
};

struct EvalConfig {
  uint32_t n_way = 5;
  uint32_t k_shot = 1;
  uint32_t q_query = 15;
  uint32_t episodes = 2000;
  PipelineSpec pipeline;
  ClassifierKind classifier = ClassifierKind::ncc;
  TrainConfig train;   // cosine classifier; train.gamma also scales ncc logits
  uint32_t threads = 0;
};

// Fits the pipeline on the episode's support (the query set is passed only
// so the oracle centroid can use it), transforms support and query
// identically, fits the classifier on the transformed support, and returns
// query accuracy in [0, 1]. Degeneracy errors (ZeroVector and friends)
// propagate to the caller.
double run_episode(const Episode& episode, const FeatureBank* base,
                   const PipelineSpec& pipeline, ClassifierKind classifier,
                   const TrainConfig& train);

struct Ci95 {
  double mean = 0.0;
  double half_width = 0.0;
  // True when fewer than two samples existed, so half_width carries no
  // information.
  bool degenerate = false;
};

// Sample mean and 1.96 * s / sqrt(m) half-width. Throws TooFewSamples only
// for an empty input; a single sample yields half_width 0 with the
// degenerate flag set.
Ci95 ci95(std::span<const double> values);

struct EvalReport {
  EvalConfig config;
  uint64_t master_seed = 0;
  // Episode indices that completed, ascending, with their accuracies.
  std::vector<uint32_t> episode_index;
  std::vector<double> accuracy;
  uint32_t failed = 0;
  double mean_accuracy = 0.0;
  double ci95_half_width = 0.0;
  bool ci_degenerate = false;
};

// Runs config.episodes independent episodes. Episode i draws its own rng
// seeded from derive_seed(master_seed, i), so results are identical no
// matter how many threads execute the loop. Episodes that fail with a
// degeneracy error are counted and skipped; configuration-level errors
// (insufficient bank, missing base, dimension clashes) propagate
// immediately. Throws AllEpisodesFailed when nothing completes.
EvalReport evaluate(const FeatureBank& novel, const FeatureBank* base,
                    const EvalConfig& config, uint64_t master_seed);

}  // namespace tcpr
