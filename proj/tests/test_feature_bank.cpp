#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "tcpr/feature_bank.hpp"
#include "tcpr/io_util.hpp"
#include "test_util.hpp"

using namespace tcpr;

namespace {

FeatureBank tiny_bank() {
  return FeatureBank({1.0f, 0.0f,   //
                      0.0f, 1.0f,   //
                      3.0f, 4.0f},  //
                     {0, 1, 1}, 2, 2);
}

FeatureBank random_bank(uint64_t seed, uint32_t classes, uint32_t per_class,
                        uint32_t dim) {
  SplitMix64 rng(seed);
  std::vector<float> features;
  std::vector<uint32_t> labels;
  for (uint32_t c = 0; c < classes; ++c) {
    for (uint32_t i = 0; i < per_class; ++i) {
      std::vector<float> row = test::random_vector(rng, dim);
      features.insert(features.end(), row.begin(), row.end());
      labels.push_back(c);
    }
  }
  return FeatureBank(std::move(features), std::move(labels), dim, classes);
}

}  // namespace

TEST_CASE("constructor exposes shape, rows, labels, and cached norms") {
  FeatureBank bank = tiny_bank();
  CHECK(bank.size() == 3);
  CHECK(bank.dim() == 2);
  CHECK(bank.num_classes() == 2);
  CHECK(bank.row(2)[0] == 3.0f);
  CHECK(bank.row(2)[1] == 4.0f);
  CHECK(bank.label(0) == 0);
  CHECK(bank.label(2) == 1);
  CHECK(bank.row_norm(0) == doctest::Approx(1.0));
  CHECK(bank.row_norm(2) == doctest::Approx(5.0));

  CHECK(bank.class_rows(0) == std::vector<uint32_t>{0});
  CHECK(bank.class_rows(1) == std::vector<uint32_t>{1, 2});
  CHECK_THROWS_AS((void)bank.class_rows(2), ClassOutOfRange);
}

TEST_CASE("constructor rejects inconsistent or invalid inputs") {
  CHECK_THROWS_AS(FeatureBank({1.0f, 2.0f, 3.0f}, {0, 1}, 2, 2), DimMismatch);
  CHECK_THROWS_AS(FeatureBank({}, {}, 2, 1), DimMismatch);
  CHECK_THROWS_AS(FeatureBank({1.0f, 2.0f}, {0}, 0, 1), DimMismatch);
  CHECK_THROWS_AS(FeatureBank({1.0f, 2.0f}, {2}, 2, 2), LabelOutOfRange);
  CHECK_THROWS_AS(FeatureBank({1.0f, 2.0f}, {0}, 2, 0), LabelOutOfRange);

  float nan = std::numeric_limits<float>::quiet_NaN();
  float inf = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(FeatureBank({1.0f, nan}, {0}, 2, 1), NonFiniteValue);
  CHECK_THROWS_AS(FeatureBank({inf, 2.0f}, {0}, 2, 1), NonFiniteValue);
}

TEST_CASE("a one-sample one-dimensional binary bank occupies exactly 32 bytes") {
  test::TempDir dir;
  FeatureBank bank({2.5f}, {0}, 1, 1);
  auto path = dir.file("one.bank");
  save_bank(bank, path);
  CHECK(read_file_bytes(path).size() == 32);
}

TEST_CASE("binary save/load round-trips bit-exactly") {
  test::TempDir dir;
  FeatureBank bank = random_bank(7, 3, 17, 9);
  auto path = dir.file("bank.bin");
  save_bank(bank, path);
  FeatureBank loaded = load_bank(path);

  CHECK(loaded.size() == bank.size());
  CHECK(loaded.dim() == bank.dim());
  CHECK(loaded.num_classes() == bank.num_classes());
  CHECK(loaded.labels() == bank.labels());
  CHECK(std::memcmp(loaded.data(), bank.data(),
                    bank.size() * bank.dim() * sizeof(float)) == 0);
}

TEST_CASE("csv save/load round-trips bit-exactly, including awkward floats") {
  test::TempDir dir;
  SplitMix64 rng(99);
  std::vector<float> features;
  std::vector<uint32_t> labels;
  for (uint32_t i = 0; i < 40; ++i) {
    std::vector<float> row = test::random_vector(rng, 5);
    // Exercise subnormals-adjacent, huge, and tiny magnitudes.
    row[0] *= 1e-30f;
    row[1] *= 1e30f;
    features.insert(features.end(), row.begin(), row.end());
    labels.push_back(i % 4);
  }
  FeatureBank bank(std::move(features), std::move(labels), 5, 4);

  auto path = dir.file("bank.csv");
  save_bank(bank, path);
  FeatureBank loaded = load_bank(path);

  CHECK(loaded.labels() == bank.labels());
  CHECK(std::memcmp(loaded.data(), bank.data(),
                    bank.size() * bank.dim() * sizeof(float)) == 0);
}

TEST_CASE("empty trailing classes survive both formats") {
  test::TempDir dir;
  // Declares 4 classes but only populates 0..2.
  FeatureBank bank({1.0f, 2.0f, 3.0f, 4.0f, 5.0f, 6.0f}, {0, 1, 2}, 2, 4);
  for (const char* name : {"bank.bin", "bank.csv"}) {
    auto path = dir.file(name);
    save_bank(bank, path);
    FeatureBank loaded = load_bank(path);
    CHECK(loaded.num_classes() == 4);
    CHECK(loaded.class_rows(3).empty());
  }
}

TEST_CASE("save picks the format from the extension") {
  test::TempDir dir;
  FeatureBank bank = tiny_bank();

  auto csv = dir.file("bank.csv");
  save_bank(bank, csv);
  std::string csv_bytes = read_file_bytes(csv);
  CHECK(csv_bytes.rfind("# num_classes=2\nlabel,f0,f1\n", 0) == 0);

  auto bin = dir.file("bank.dat");
  save_bank(bank, bin);
  std::string bin_bytes = read_file_bytes(bin);
  REQUIRE(bin_bytes.size() >= 8);
  CHECK(bin_bytes.compare(0, 8, "TCPRFB01") == 0);
}

TEST_CASE("binary corruption is reported by kind") {
  test::TempDir dir;
  FeatureBank bank = tiny_bank();
  auto path = dir.file("bank.bin");
  save_bank(bank, path);
  std::string good = read_file_bytes(path);

  auto write_variant = [&](const std::string& bytes) {
    auto p = dir.file("variant.bin");
    atomic_write_file(p, bytes);
    return p;
  };

  SUBCASE("truncated header") {
    CHECK_THROWS_AS(load_bank(write_variant(good.substr(0, 10))), DimMismatch);
  }
  SUBCASE("wrong magic") {
    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(load_bank(write_variant(bad)), BadMagic);
  }
  SUBCASE("unsupported version") {
    std::string bad = good;
    bad[8] = 2;  // little-endian version field
    CHECK_THROWS_AS(load_bank(write_variant(bad)), BadMagic);
  }
  SUBCASE("payload shorter than the header promises") {
    CHECK_THROWS_AS(load_bank(write_variant(good.substr(0, good.size() - 4))),
                    DimMismatch);
  }
  SUBCASE("trailing garbage") {
    CHECK_THROWS_AS(load_bank(write_variant(good + "zz")), DimMismatch);
  }
  SUBCASE("unrecognizable content") {
    CHECK_THROWS_AS(load_bank(write_variant("what even is this file")), BadMagic);
  }
}

TEST_CASE("csv errors are reported by kind") {
  test::TempDir dir;
  auto write_csv = [&](const std::string& text) {
    auto p = dir.file("bank.csv");
    atomic_write_file(p, text);
    return p;
  };

  SUBCASE("label outside the declared class count") {
    CHECK_THROWS_AS(
        load_bank(write_csv("# num_classes=3\nlabel,f0\n0,1.5\n5,2.5\n")),
        LabelOutOfRange);
  }
  SUBCASE("num_classes from the comment is honored") {
    FeatureBank bank = load_bank(write_csv("# num_classes=7\nlabel,f0\n0,1.5\n"));
    CHECK(bank.num_classes() == 7);
  }
  SUBCASE("without the comment, classes = max label + 1") {
    FeatureBank bank = load_bank(write_csv("label,f0\n0,1.5\n4,2.5\n"));
    CHECK(bank.num_classes() == 5);
  }
  SUBCASE("ragged row") {
    CHECK_THROWS_AS(load_bank(write_csv("label,f0,f1\n0,1.0,2.0\n1,3.0\n")),
                    DimMismatch);
  }
  SUBCASE("unparseable cell") {
    CHECK_THROWS_AS(load_bank(write_csv("label,f0\n0,banana\n")), Error);
  }
  SUBCASE("bad header") {
    CHECK_THROWS_AS(load_bank(write_csv("# num_classes=2\nlbl,f0\n0,1.0\n")), Error);
  }
  SUBCASE("no data rows") {
    CHECK_THROWS_AS(load_bank(write_csv("label,f0\n")), DimMismatch);
  }
}

TEST_CASE("load_bank surfaces missing files as IoFailure") {
  test::TempDir dir;
  CHECK_THROWS_AS(load_bank(dir.file("nope.bank")), IoFailure);
}

TEST_CASE("synthetic generation is deterministic in the seed") {
  SyntheticBankSpec spec;
  spec.num_classes = 4;
  spec.per_class = 25;
  spec.dim = 8;
  spec.seed = 123;

  FeatureBank a = generate_synthetic_bank(spec);
  FeatureBank b = generate_synthetic_bank(spec);
  CHECK(a.features() == b.features());
  CHECK(a.labels() == b.labels());

  spec.seed = 124;
  FeatureBank c = generate_synthetic_bank(spec);
  CHECK(a.features() != c.features());
}

TEST_CASE("synthetic banks are class-major with the declared shape") {
  SyntheticBankSpec spec;
  spec.num_classes = 3;
  spec.per_class = 10;
  spec.dim = 4;
  spec.seed = 5;

  FeatureBank bank = generate_synthetic_bank(spec);
  CHECK(bank.size() == 30);
  CHECK(bank.dim() == 4);
  CHECK(bank.num_classes() == 3);
  for (std::size_t i = 0; i < bank.size(); ++i) {
    CHECK(bank.label(i) == i / 10);
  }
}

TEST_CASE("two-class means sit at +/- scale on the first coordinate") {
  SyntheticBankSpec spec;
  spec.num_classes = 2;
  spec.dim = 3;
  spec.class_mean_scale = 2.0f;

  std::vector<float> m0 = synthetic_class_mean(spec, 0);
  std::vector<float> m1 = synthetic_class_mean(spec, 1);
  CHECK(m0[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(std::abs(m0[1]) < 1e-6);
  CHECK(m0[2] == 0.0f);
  CHECK(m1[0] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(std::abs(m1[1]) < 1e-6);
}

TEST_CASE("shared offset shifts every class mean") {
  SyntheticBankSpec spec;
  spec.num_classes = 2;
  spec.dim = 4;
  spec.class_mean_scale = 1.0f;
  spec.shared_offset = {0.0f, 0.0f, 3.0f, 0.0f};

  std::vector<float> m0 = synthetic_class_mean(spec, 0);
  CHECK(m0[0] == doctest::Approx(1.0));
  CHECK(m0[2] == doctest::Approx(3.0));
}

TEST_CASE("empirical class means land near the requested means") {
  SyntheticBankSpec spec;
  spec.num_classes = 3;
  spec.per_class = 400;
  spec.dim = 6;
  spec.class_mean_scale = 1.5f;
  spec.noise_std = 0.8f;
  spec.shared_offset = {0.0f, 0.0f, 0.0f, 2.0f, 0.0f, 0.0f};
  spec.seed = 31;

  FeatureBank bank = generate_synthetic_bank(spec);
  double bound = 5.0 * spec.noise_std / std::sqrt(static_cast<double>(spec.per_class));
  for (uint32_t c = 0; c < spec.num_classes; ++c) {
    std::vector<float> want = synthetic_class_mean(spec, c);
    std::vector<double> got(spec.dim, 0.0);
    for (uint32_t row : bank.class_rows(c)) {
      for (uint32_t j = 0; j < spec.dim; ++j) {
        got[j] += static_cast<double>(bank.row(row)[j]);
      }
    }
    for (uint32_t j = 0; j < spec.dim; ++j) {
      got[j] /= spec.per_class;
      CHECK(std::abs(got[j] - static_cast<double>(want[j])) <= bound);
    }
  }
}

TEST_CASE("generator rejects malformed specs") {
  SyntheticBankSpec spec;

  SUBCASE("dim below two") {
    spec.dim = 1;
    CHECK_THROWS_AS(generate_synthetic_bank(spec), BadSpec);
  }
  SUBCASE("zero classes") {
    spec.num_classes = 0;
    CHECK_THROWS_AS(generate_synthetic_bank(spec), BadSpec);
  }
  SUBCASE("zero per-class") {
    spec.per_class = 0;
    CHECK_THROWS_AS(generate_synthetic_bank(spec), BadSpec);
  }
  SUBCASE("negative noise") {
    spec.noise_std = -0.5f;
    CHECK_THROWS_AS(generate_synthetic_bank(spec), BadSpec);
  }
  SUBCASE("offset of the wrong length") {
    spec.shared_offset = {1.0f};
    CHECK_THROWS_AS(generate_synthetic_bank(spec), BadSpec);
  }
}
