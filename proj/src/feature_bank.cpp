#include "tcpr/feature_bank.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <numbers>
#include <string>
#include <string_view>

#include "tcpr/io_util.hpp"
#include "tcpr/kernels.hpp"
#include "tcpr/rng.hpp"

namespace tcpr {

namespace {

constexpr char kMagic[8] = {'T', 'C', 'P', 'R', 'F', 'B', '0', '1'};
constexpr uint32_t kFormatVersion = 1;

void append_u32_le(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

uint32_t read_u32_le(const char* p) {
  return static_cast<uint32_t>(static_cast<unsigned char>(p[0])) |
         static_cast<uint32_t>(static_cast<unsigned char>(p[1])) << 8 |
         static_cast<uint32_t>(static_cast<unsigned char>(p[2])) << 16 |
         static_cast<uint32_t>(static_cast<unsigned char>(p[3])) << 24;
}

void append_f32_le(std::string& out, float v) {
  append_u32_le(out, std::bit_cast<uint32_t>(v));
}

// Shortest decimal form that parses back to the identical float.
void append_float_roundtrip(std::string& out, float v) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool looks_like_csv(std::string_view content) {
  return content.starts_with("label,") || content.starts_with("#");
}

FeatureBank load_bank_binary(const std::string& bytes, const std::filesystem::path& path) {
  if (bytes.size() < 24) {
    throw DimMismatch(path.string() + ": truncated bank header");
  }
  uint32_t version = read_u32_le(bytes.data() + 8);
  if (version != kFormatVersion) {
    throw BadMagic(path.string() + ": unsupported bank version " + std::to_string(version));
  }
  uint64_t n = read_u32_le(bytes.data() + 12);
  uint64_t d = read_u32_le(bytes.data() + 16);
  uint32_t num_classes = read_u32_le(bytes.data() + 20);
  uint64_t expected = 24 + n * d * 4 + n * 4;
  if (bytes.size() != expected) {
    throw DimMismatch(path.string() + ": payload is " + std::to_string(bytes.size() - 24) +
                      " bytes, header " + std::to_string(n) + "x" + std::to_string(d) +
                      " requires " + std::to_string(expected - 24));
  }

  std::vector<float> features(n * d);
  std::vector<uint32_t> labels(n);
  const char* fp = bytes.data() + 24;
  const char* lp = fp + n * d * 4;
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(features.data(), fp, n * d * 4);
    std::memcpy(labels.data(), lp, n * 4);
  } else {
    for (uint64_t i = 0; i < n * d; ++i) {
      features[i] = std::bit_cast<float>(read_u32_le(fp + i * 4));
    }
    for (uint64_t i = 0; i < n; ++i) labels[i] = read_u32_le(lp + i * 4);
  }
  return FeatureBank(std::move(features), std::move(labels),
                     static_cast<std::size_t>(d), num_classes);
}

FeatureBank load_bank_csv(const std::string& content, const std::filesystem::path& path) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= content.size()) return false;
    std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos) nl = content.size();
    line = std::string_view(content).substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& what) -> Error {
    return Error(path.string() + ":" + std::to_string(line_no) + ": " + what);
  };

  // Leading comments may declare num_classes; anything else commented is
  // ignored. The first non-comment line must be the header.
  bool have_declared = false;
  uint32_t declared_classes = 0;
  std::string_view line;
  for (;;) {
    if (!next_line(line)) throw BadMagic(path.string() + ": CSV bank has no header row");
    std::string_view t = trim(line);
    if (t.empty()) continue;
    if (t.starts_with("#")) {
      t.remove_prefix(1);
      t = trim(t);
      if (t.starts_with("num_classes=")) {
        t.remove_prefix(std::string_view("num_classes=").size());
        auto res = std::from_chars(t.data(), t.data() + t.size(), declared_classes);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
          throw fail("bad num_classes declaration");
        }
        have_declared = true;
      }
      continue;
    }
    break;  // header row
  }
  std::string_view header = trim(line);
  if (!header.starts_with("label,")) {
    throw BadMagic(path.string() + ": CSV header must start with 'label,'");
  }
  std::size_t d = 0;
  for (char c : header) {
    if (c == ',') ++d;
  }

  std::vector<float> features;
  std::vector<uint32_t> labels;
  uint32_t max_label = 0;
  while (next_line(line)) {
    std::string_view row = trim(line);
    if (row.empty()) continue;
    std::size_t col = 0;
    std::size_t start = 0;
    uint32_t label = 0;
    while (start <= row.size()) {
      std::size_t comma = row.find(',', start);
      std::string_view cell =
          trim(row.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                 : comma - start));
      if (col == 0) {
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw fail("bad label '" + std::string(cell) + "'");
        }
      } else {
        float v = 0.0f;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
          throw fail("bad feature value '" + std::string(cell) + "'");
        }
        features.push_back(v);
      }
      ++col;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (col != d + 1) {
      throw DimMismatch(path.string() + ":" + std::to_string(line_no) + ": row has " +
                        std::to_string(col) + " columns, header declares " +
                        std::to_string(d + 1));
    }
    labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (labels.empty()) {
    throw DimMismatch(path.string() + ": CSV bank has no data rows");
  }
  uint32_t num_classes = have_declared ? declared_classes : max_label + 1;
  return FeatureBank(std::move(features), std::move(labels), d, num_classes);
}

}  // namespace

FeatureBank::FeatureBank(std::vector<float> features, std::vector<uint32_t> labels,
                         std::size_t dim, uint32_t num_classes)
    : dim_(dim),
      num_classes_(num_classes),
      features_(std::move(features)),
      labels_(std::move(labels)) {
  if (labels_.empty() || dim_ == 0) {
    throw DimMismatch("feature bank must have at least one row and one dimension");
  }
  if (features_.size() != labels_.size() * dim_) {
    throw DimMismatch("feature buffer has " + std::to_string(features_.size()) +
                      " values, expected " + std::to_string(labels_.size()) + "x" +
                      std::to_string(dim_));
  }
  if (num_classes_ == 0) {
    throw LabelOutOfRange("num_classes must be positive");
  }
  for (std::size_t i = 0; i < features_.size(); ++i) {
    if (!std::isfinite(features_[i])) {
      throw NonFiniteValue("non-finite feature at row " + std::to_string(i / dim_) +
                           ", column " + std::to_string(i % dim_));
    }
  }
  class_index_.resize(num_classes_);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] >= num_classes_) {
      throw LabelOutOfRange("label " + std::to_string(labels_[i]) + " at row " +
                            std::to_string(i) + " exceeds num_classes " +
                            std::to_string(num_classes_));
    }
    class_index_[labels_[i]].push_back(static_cast<uint32_t>(i));
  }
  row_norms_.resize(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const float* r = features_.data() + i * dim_;
    row_norms_[i] = std::sqrt(kernels::dot_f32_f64acc(r, r, dim_));
  }
}

const std::vector<uint32_t>& FeatureBank::class_rows(uint32_t c) const {
  if (c >= num_classes_) {
    throw ClassOutOfRange("class " + std::to_string(c) + " out of range, bank has " +
                          std::to_string(num_classes_) + " classes");
  }
  return class_index_[c];
}

std::vector<float> synthetic_class_mean(const SyntheticBankSpec& spec, uint32_t c) {
  if (c >= spec.num_classes) {
    throw ClassOutOfRange("class " + std::to_string(c) + " out of range for spec with " +
                          std::to_string(spec.num_classes) + " classes");
  }
  std::vector<float> mean(spec.dim, 0.0f);
  double angle = 2.0 * std::numbers::pi * static_cast<double>(c) /
                 static_cast<double>(spec.num_classes);
  mean[0] = static_cast<float>(spec.class_mean_scale * std::cos(angle));
  mean[1] = static_cast<float>(spec.class_mean_scale * std::sin(angle));
  if (!spec.shared_offset.empty()) {
    for (uint32_t j = 0; j < spec.dim; ++j) mean[j] += spec.shared_offset[j];
  }
  return mean;
}

FeatureBank generate_synthetic_bank(const SyntheticBankSpec& spec) {
  if (spec.num_classes == 0) throw BadSpec("num_classes must be positive");
  if (spec.per_class == 0) throw BadSpec("per_class must be positive");
  if (spec.dim < 2) throw BadSpec("dim must be at least 2 for the class-mean circle");
  if (!(spec.noise_std >= 0.0f) || !std::isfinite(spec.noise_std)) {
    throw BadSpec("noise_std must be finite and non-negative");
  }
  if (!spec.shared_offset.empty() && spec.shared_offset.size() != spec.dim) {
    throw BadSpec("shared_offset has " + std::to_string(spec.shared_offset.size()) +
                  " entries, expected " + std::to_string(spec.dim));
  }

  std::size_t n = static_cast<std::size_t>(spec.num_classes) * spec.per_class;
  std::vector<float> features;
  features.reserve(n * spec.dim);
  std::vector<uint32_t> labels;
  labels.reserve(n);

  SplitMix64 rng(spec.seed);
  double noise = static_cast<double>(spec.noise_std);
  for (uint32_t c = 0; c < spec.num_classes; ++c) {
    std::vector<float> mean = synthetic_class_mean(spec, c);
    for (uint32_t s = 0; s < spec.per_class; ++s) {
      for (uint32_t j = 0; j < spec.dim; ++j) {
        features.push_back(
            static_cast<float>(static_cast<double>(mean[j]) + noise * rng.gaussian()));
      }
      labels.push_back(c);
    }
  }
  return FeatureBank(std::move(features), std::move(labels), spec.dim, spec.num_classes);
}

FeatureBank load_bank(const std::filesystem::path& path) {
  std::string bytes = read_file_bytes(path);
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kMagic, 8) == 0) {
    return load_bank_binary(bytes, path);
  }
  if (looks_like_csv(bytes)) {
    return load_bank_csv(bytes, path);
  }
  throw BadMagic(path.string() + ": not a feature bank (bad magic)");
}

void save_bank(const FeatureBank& bank, const std::filesystem::path& path) {
  std::string out;
  if (path.extension() == ".csv") {
    out.reserve(bank.size() * (bank.dim() * 12 + 8) + 64);
    out += "# num_classes=" + std::to_string(bank.num_classes()) + "\n";
    out += "label";
    for (std::size_t j = 0; j < bank.dim(); ++j) {
      out += ",f" + std::to_string(j);
    }
    out += "\n";
    for (std::size_t i = 0; i < bank.size(); ++i) {
      out += std::to_string(bank.label(i));
      std::span<const float> r = bank.row(i);
      for (std::size_t j = 0; j < bank.dim(); ++j) {
        out += ',';
        append_float_roundtrip(out, r[j]);
      }
      out += '\n';
    }
  } else {
    out.reserve(24 + bank.size() * bank.dim() * 4 + bank.size() * 4);
    out.append(kMagic, 8);
    append_u32_le(out, kFormatVersion);
    append_u32_le(out, static_cast<uint32_t>(bank.size()));
    append_u32_le(out, static_cast<uint32_t>(bank.dim()));
    append_u32_le(out, bank.num_classes());
    if constexpr (std::endian::native == std::endian::little) {
      out.append(reinterpret_cast<const char*>(bank.data()),
                 bank.size() * bank.dim() * 4);
      out.append(reinterpret_cast<const char*>(bank.labels().data()), bank.size() * 4);
    } else {
      for (float v : bank.features()) append_f32_le(out, v);
      for (uint32_t v : bank.labels()) append_u32_le(out, v);
    }
  }
  atomic_write_file(path, out);
}

}  // namespace tcpr
