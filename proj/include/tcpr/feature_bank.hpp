#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "tcpr/errors.hpp"

namespace tcpr {

// Immutable n x d float32 feature matrix with one integer class label per
// row. Row L2 norms and a per-class row index are computed once at
// construction so downstream scans and episode sampling never re-derive
// them.
class FeatureBank {
 public:
  // Takes ownership of the row-major feature buffer (size n*d) and labels
  // (size n). Throws DimMismatch when the shapes are inconsistent or empty,
  // NonFiniteValue when any feature is NaN/Inf, and LabelOutOfRange when a
  // label is >= num_classes.
  FeatureBank(std::vector<float> features, std::vector<uint32_t> labels,
              std::size_t dim, uint32_t num_classes);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  uint32_t num_classes() const { return num_classes_; }

  std::span<const float> row(std::size_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  uint32_t label(std::size_t i) const { return labels_[i]; }
  double row_norm(std::size_t i) const { return row_norms_[i]; }

  const float* data() const { return features_.data(); }
  const std::vector<float>& features() const { return features_; }
  const std::vector<uint32_t>& labels() const { return labels_; }

  // Row indices of class c in ascending order. Throws ClassOutOfRange.
  const std::vector<uint32_t>& class_rows(uint32_t c) const;

 private:
  std::size_t dim_;
  uint32_t num_classes_;
  std::vector<float> features_;
  std::vector<uint32_t> labels_;
  std::vector<double> row_norms_;
  std::vector<std::vector<uint32_t>> class_index_;
};

// Recipe for a Gaussian mixture bank: class c's mean sits at
// class_mean_scale * (cos(2*pi*c/N), sin(2*pi*c/N), 0, ...) on the first
// two coordinates, every sample additionally receives shared_offset, and
// isotropic N(0, noise_std^2) noise is added per coordinate. Rows are laid
// out class-major (all of class 0, then class 1, ...).
struct SyntheticBankSpec {
  uint32_t num_classes = 2;
  uint32_t per_class = 100;
  uint32_t dim = 2;
  float class_mean_scale = 1.0f;
  std::vector<float> shared_offset;  // empty means zero; else must have dim entries
  float noise_std = 1.0f;
  uint64_t seed = 0;
};

// The noise-free mean of class c under `spec` (placement plus shared
// offset); exposed so callers can reason about the geometry they asked for.
std::vector<float> synthetic_class_mean(const SyntheticBankSpec& spec, uint32_t c);

// Deterministic for a given spec (including seed). Throws BadSpec on
// invalid shape parameters (dim < 2, zero classes or per_class, negative
// noise_std, offset of the wrong length).
FeatureBank generate_synthetic_bank(const SyntheticBankSpec& spec);

// On-disk formats:
//  - binary (default): magic "TCPRFB01", u32 version=1, u32 n, u32 d,
//    u32 num_classes, n*d little-endian f32 row-major features, n u32
//    labels;
//  - CSV (paths ending in .csv): optional "# num_classes=N" comment line,
//    header "label,f0,...,f{d-1}", one row per sample with floats printed
//    at round-trip precision.
// load_bank sniffs the format from content, save_bank picks it from the
// path extension. Both formats round-trip bit-exactly.
FeatureBank load_bank(const std::filesystem::path& path);
void save_bank(const FeatureBank& bank, const std::filesystem::path& path);

}  // namespace tcpr
