#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "tcpr/classifiers.hpp"
#include "test_util.hpp"

using namespace tcpr;

namespace {

Direction dir(std::vector<float> v) { return l2_normalize(v); }

// A well-conditioned random instance: unit vectors near distinct class
// anchors so every label is represented.
struct Instance {
  std::vector<Direction> vectors;
  std::vector<uint32_t> labels;
};

Instance random_instance(SplitMix64& rng, uint32_t n_way, uint32_t shots,
                         std::size_t d) {
  Instance inst;
  for (uint32_t c = 0; c < n_way; ++c) {
    for (uint32_t s = 0; s < shots; ++s) {
      std::vector<float> x = test::random_vector(rng, d);
      x[c % d] += 2.5f;
      inst.vectors.push_back(l2_normalize(x));
      inst.labels.push_back(c);
    }
  }
  return inst;
}

double loss_of(const PrototypeSet& protos, const Instance& inst, float gamma) {
  std::vector<double> w(protos.weights().begin(), protos.weights().end());
  return cosine_softmax_loss(w, protos.n_way(), inst.vectors, inst.labels, gamma);
}

}  // namespace

TEST_CASE("fit_ncc averages and normalizes per class") {
  std::vector<Direction> support{dir({1.0f, 0.0f}), dir({0.0f, 1.0f}),
                                 dir({0.0f, -1.0f})};
  std::vector<uint32_t> labels{0, 0, 1};
  PrototypeSet protos = fit_ncc(support, labels, 2);

  CHECK(protos.prototype(0)[0] == doctest::Approx(0.70710678));
  CHECK(protos.prototype(0)[1] == doctest::Approx(0.70710678));
  CHECK(protos.prototype(1)[0] == doctest::Approx(0.0));
  CHECK(protos.prototype(1)[1] == doctest::Approx(-1.0));
}

TEST_CASE("one-shot prototypes equal their support vectors") {
  SplitMix64 rng(2);
  Instance inst = random_instance(rng, 4, 1, 9);
  PrototypeSet protos = fit_ncc(inst.vectors, inst.labels, 4);
  for (uint32_t c = 0; c < 4; ++c) {
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(protos.prototype(c)[j] == doctest::Approx(inst.vectors[c][j]).epsilon(1e-6));
    }
  }
}

TEST_CASE("fit_ncc validates its inputs") {
  std::vector<Direction> support{dir({1.0f, 0.0f})};
  std::vector<uint32_t> labels{0};
  CHECK_THROWS_AS(fit_ncc(support, labels, 2), EmptyClass);
  CHECK_THROWS_AS(fit_ncc(support, std::vector<uint32_t>{5}, 2), LabelOutOfRange);
  CHECK_THROWS_AS(fit_ncc(support, std::vector<uint32_t>{0, 1}, 2), DimMismatch);
  CHECK_THROWS_AS(fit_ncc({}, {}, 2), DimMismatch);

  // Opposite one-shot vectors for the same class cancel to zero.
  std::vector<Direction> cancel{dir({1.0f, 0.0f}), dir({-1.0f, 0.0f})};
  CHECK_THROWS_AS(fit_ncc(cancel, std::vector<uint32_t>{0, 0}, 1), ZeroVector);
}

TEST_CASE("prototype rows must be unit") {
  CHECK_THROWS_AS(PrototypeSet({2.0f, 0.0f}, 1, 2), Error);
  CHECK_THROWS_AS(PrototypeSet({1.0f, 0.0f, 0.0f}, 1, 2), DimMismatch);
}

TEST_CASE("predict_cosine matches the two-class hand value") {
  PrototypeSet protos({1.0f, 0.0f, 0.0f, 1.0f}, 2, 2);
  std::vector<double> p = predict_cosine(protos, dir({1.0f, 0.0f}), 10.0f);
  double expected = std::exp(10.0) / (std::exp(10.0) + 1.0);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1.0 - expected).epsilon(1e-4));
}

TEST_CASE("predict_cosine is uniform under symmetry and tiny gamma") {
  PrototypeSet protos({1.0f, 0.0f, 0.0f,  //
                       0.0f, 1.0f, 0.0f}, 2, 3);
  // Equidistant from both prototypes.
  std::vector<double> p = predict_cosine(protos, dir({1.0f, 1.0f, 0.0f}), 10.0f);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));

  // gamma -> 0 washes out any asymmetry.
  std::vector<double> q = predict_cosine(protos, dir({1.0f, 0.0f, 0.0f}), 1e-7f);
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-5));
}

TEST_CASE("predicted distributions are valid and huge gamma stays finite") {
  SplitMix64 rng(6);
  Instance inst = random_instance(rng, 5, 2, 8);
  PrototypeSet protos = fit_ncc(inst.vectors, inst.labels, 5);
  for (float gamma : {0.1f, 10.0f, 1000.0f}) {
    for (const Direction& x : inst.vectors) {
      std::vector<double> p = predict_cosine(protos, x, gamma);
      double sum = 0.0;
      for (double v : p) {
        CHECK(v >= 0.0);
        CHECK(std::isfinite(v));
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("the predicted class does not depend on gamma") {
  SplitMix64 rng(8);
  Instance inst = random_instance(rng, 4, 3, 10);
  PrototypeSet protos = fit_ncc(inst.vectors, inst.labels, 4);
  for (int trial = 0; trial < 30; ++trial) {
    Direction x = l2_normalize(test::random_vector(rng, 10));
    uint32_t base_pick = argmax_class(predict_cosine(protos, x, 1.0f));
    for (float gamma : {0.05f, 5.0f, 80.0f}) {
      CHECK(argmax_class(predict_cosine(protos, x, gamma)) == base_pick);
    }
  }
}

TEST_CASE("argmax_class breaks ties toward the lower class id") {
  CHECK(argmax_class(std::vector<double>{0.4, 0.4, 0.2}) == 0);
  CHECK(argmax_class(std::vector<double>{0.1, 0.45, 0.45}) == 1);
  CHECK(argmax_class(std::vector<double>{1.0}) == 0);
}

TEST_CASE("epochs=0 with ncc init reproduces fit_ncc bit-exactly") {
  SplitMix64 rng(14);
  for (int trial = 0; trial < 10; ++trial) {
    Instance inst = random_instance(rng, 5, 3, 12);
    PrototypeSet ncc = fit_ncc(inst.vectors, inst.labels, 5);

    TrainConfig config;
    config.epochs = 0;
    config.init = WeightInit::ncc;
    PrototypeSet trained = fit_cosine_softmax(inst.vectors, inst.labels, 5, config);

    REQUIRE(trained.weights().size() == ncc.weights().size());
    CHECK(std::memcmp(trained.weights().data(), ncc.weights().data(),
                      ncc.weights().size() * sizeof(float)) == 0);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  SplitMix64 rng(21);
  for (int trial = 0; trial < 8; ++trial) {
    uint32_t n_way = 3;
    std::size_t d = 6;
    Instance inst = random_instance(rng, n_way, 2, d);

    // Unnormalized weights with norms well away from zero.
    std::vector<double> w(n_way * d);
    for (double& v : w) v = rng.uniform01() * 2.0 - 1.0;
    for (uint32_t c = 0; c < n_way; ++c) w[c * d] += 1.5;

    float gamma = 10.0f;
    std::vector<double> analytic =
        cosine_softmax_grad(w, n_way, inst.vectors, inst.labels, gamma);

    std::vector<double> fd(w.size());
    const double h = 1e-4;
    for (std::size_t i = 0; i < w.size(); ++i) {
      std::vector<double> wp = w;
      std::vector<double> wm = w;
      wp[i] += h;
      wm[i] -= h;
      double lp = cosine_softmax_loss(wp, n_way, inst.vectors, inst.labels, gamma);
      double lm = cosine_softmax_loss(wm, n_way, inst.vectors, inst.labels, gamma);
      fd[i] = (lp - lm) / (2.0 * h);
    }

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      num += (analytic[i] - fd[i]) * (analytic[i] - fd[i]);
      den += fd[i] * fd[i];
    }
    REQUIRE(den > 0.0);
    CHECK(std::sqrt(num / den) <= 1e-4);
  }
}

TEST_CASE("training loss is non-increasing at a small learning rate") {
  SplitMix64 rng(33);
  Instance inst = random_instance(rng, 4, 4, 8);

  TrainConfig config;
  config.gamma = 10.0f;
  config.learning_rate = 1e-3f;
  config.init = WeightInit::ncc;

  // The forward pass normalizes rows, so the loss of the (re-normalized)
  // returned weights equals the training loss at that epoch; epochs share a
  // deterministic trajectory prefix.
  double prev = 0.0;
  for (uint32_t epochs = 0; epochs <= 25; ++epochs) {
    config.epochs = epochs;
    PrototypeSet protos = fit_cosine_softmax(inst.vectors, inst.labels, 4, config);
    double loss = loss_of(protos, inst, config.gamma);
    if (epochs > 0) CHECK(loss <= prev + 1e-12);
    prev = loss;
  }
}

TEST_CASE("training improves the loss and separable data reaches 100%") {
  SplitMix64 rng(44);
  // Linearly separable 2-way 5-shot: anchors on +x and +y.
  Instance inst;
  for (uint32_t c = 0; c < 2; ++c) {
    for (int s = 0; s < 5; ++s) {
      std::vector<float> x = test::random_vector(rng, 6);
      for (float& v : x) v *= 0.4f;
      x[c] += 2.0f;
      inst.vectors.push_back(l2_normalize(x));
      inst.labels.push_back(c);
    }
  }

  TrainConfig config;
  config.gamma = 10.0f;
  config.learning_rate = 0.01f;
  config.epochs = 300;
  PrototypeSet trained = fit_cosine_softmax(inst.vectors, inst.labels, 2, config);

  config.epochs = 0;
  PrototypeSet init = fit_cosine_softmax(inst.vectors, inst.labels, 2, config);
  CHECK(loss_of(trained, inst, 10.0f) < loss_of(init, inst, 10.0f));

  for (std::size_t i = 0; i < inst.vectors.size(); ++i) {
    std::vector<double> p = predict_cosine(trained, inst.vectors[i], 10.0f);
    CHECK(argmax_class(p) == inst.labels[i]);
  }
}

TEST_CASE("trained prototype rows are unit within tolerance") {
  SplitMix64 rng(55);
  Instance inst = random_instance(rng, 3, 2, 7);
  TrainConfig config;
  config.epochs = 40;
  PrototypeSet protos = fit_cosine_softmax(inst.vectors, inst.labels, 3, config);
  for (uint32_t c = 0; c < 3; ++c) {
    double norm = 0.0;
    for (float v : protos.prototype(c)) norm += static_cast<double>(v) * v;
    CHECK(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);
  }
}

TEST_CASE("random init is seed-deterministic; zeros init is an error") {
  SplitMix64 rng(66);
  Instance inst = random_instance(rng, 3, 2, 5);

  TrainConfig config;
  config.init = WeightInit::random;
  config.seed = 1234;
  config.epochs = 10;
  PrototypeSet a = fit_cosine_softmax(inst.vectors, inst.labels, 3, config);
  PrototypeSet b = fit_cosine_softmax(inst.vectors, inst.labels, 3, config);
  CHECK(a.weights() == b.weights());

  config.seed = 1235;
  PrototypeSet c = fit_cosine_softmax(inst.vectors, inst.labels, 3, config);
  CHECK(a.weights() != c.weights());

  config.init = WeightInit::zeros;
  CHECK_THROWS_AS(fit_cosine_softmax(inst.vectors, inst.labels, 3, config), ZeroVector);
}

TEST_CASE("training config is validated") {
  SplitMix64 rng(77);
  Instance inst = random_instance(rng, 2, 2, 4);

  TrainConfig config;
  config.gamma = 0.0f;
  CHECK_THROWS_AS(fit_cosine_softmax(inst.vectors, inst.labels, 2, config), BadSpec);

  config = TrainConfig{};
  config.learning_rate = -0.1f;
  CHECK_THROWS_AS(fit_cosine_softmax(inst.vectors, inst.labels, 2, config), BadSpec);

  std::vector<uint32_t> missing{0, 0, 0, 0};
  CHECK_THROWS_AS(fit_cosine_softmax(inst.vectors, missing, 2, TrainConfig{}),
                  EmptyClass);
}
