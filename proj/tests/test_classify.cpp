#include <catch2/catch.hpp>

#include <cmath>
#include <set>
#include <vector>

#include "thermoscope/classify.hpp"
#include "thermoscope/rng.hpp"

using namespace thermoscope;
using classify::Condition;
using classify::FeatureConfig;
using classify::Label;
using classify::LabeledExample;
using classify::LinearSvmModel;
using classify::SvmConfig;
using sensorsim::SensorId;
using sensorsim::TemperatureTrace;

namespace {

TemperatureTrace linear_trace(double start_temp, double slope, double rate,
                              double duration) {
  TemperatureTrace trace;
  const auto n = static_cast<std::size_t>(duration * rate) + 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    trace.times.push_back(t);
    trace.temperatures.push_back(start_temp + slope * t);
  }
  trace.sensor_id = SensorId::active;
  trace.contact_index = 0;
  return trace;
}

LabeledExample example(std::vector<double> features, Label label,
                       std::string block, Condition condition) {
  return {std::move(features), label, std::move(block), condition};
}

/// Nine-block toy dataset: one scalar feature per condition centroid plus a
/// deterministic within-block spread. Cold wood sits near metal unless
/// `separate_cold` pulls it apart, mirroring what the passive channel does.
std::vector<LabeledExample> toy_dataset(bool separate_cold,
                                        int per_block = 10) {
  std::vector<LabeledExample> data;
  rng::SplitMix64 r(101);
  for (int block = 1; block <= 3; ++block) {
    for (int i = 0; i < per_block; ++i) {
      const double jitter = 0.05 * r.normal();
      data.push_back(example({5.0 + jitter}, Label::wood,
                             "W" + std::to_string(block),
                             Condition::ambient_wood));
      const double cold_center = separate_cold ? 1.0 : 0.05;
      data.push_back(example({cold_center + jitter}, Label::wood,
                             "CW" + std::to_string(block),
                             Condition::cold_wood));
      data.push_back(example({0.0 + jitter}, Label::metal,
                             "M" + std::to_string(block),
                             Condition::ambient_metal));
    }
  }
  return data;
}

}  // namespace

TEST_CASE("feature extraction", "[classify]") {
  FeatureConfig cfg;
  cfg.n_resampled = 10;
  cfg.t_max = 5.0;
  cfg.slope_windows = {{0.0, 0.5}, {0.5, 5.0}};

  SECTION("constant trace maps to the zero vector") {
    auto trace = linear_trace(22.5, 0.0, 50.0, 6.0);
    const auto features = classify::extract_features(trace, nullptr, cfg);
    REQUIRE(features.size() == 12);
    for (const double f : features) REQUIRE(f == Approx(0.0).margin(1e-12));
  }

  SECTION("a linear decline reproduces its slope") {
    auto trace = linear_trace(29.5, -2.0, 50.0, 6.0);
    const auto features = classify::extract_features(trace, nullptr, cfg);
    REQUIRE(features[10] == Approx(-2.0).margin(1e-6));
    REQUIRE(features[11] == Approx(-2.0).margin(1e-6));
    // Resampled offsets follow the line.
    REQUIRE(features[0] == Approx(0.0).margin(1e-12));
    REQUIRE(features[9] == Approx(-10.0).margin(1e-9));
  }

  SECTION("including the passive trace doubles the length") {
    auto active = linear_trace(29.5, -1.0, 50.0, 6.0);
    auto passive = linear_trace(22.5, -0.5, 50.0, 6.0);
    passive.sensor_id = SensorId::passive;
    FeatureConfig both = cfg;
    both.include_passive = true;
    const auto features = classify::extract_features(active, &passive, both);
    REQUIRE(features.size() == 24);
    REQUIRE(classify::extract_features(active, nullptr, cfg).size() == 12);
  }

  SECTION("missing passive trace is an error") {
    auto active = linear_trace(29.5, -1.0, 50.0, 6.0);
    FeatureConfig both = cfg;
    both.include_passive = true;
    REQUIRE_THROWS_AS(classify::extract_features(active, nullptr, both),
                      MissingPassive);
  }

  SECTION("a contact-free trace is an error") {
    auto flat = linear_trace(22.5, 0.0, 50.0, 6.0);
    flat.contact_index.reset();
    REQUIRE_THROWS_AS(classify::extract_features(flat, nullptr, cfg),
                      NoContact);
  }
}

TEST_CASE("linear svm", "[classify]") {
  SECTION("separable pair trains to full accuracy") {
    const std::vector<LabeledExample> pair = {
        example({-1.0}, Label::wood, "W1", Condition::ambient_wood),
        example({1.0}, Label::metal, "M1", Condition::ambient_metal)};
    const auto model = classify::train_linear_svm(pair, {});
    REQUIRE(classify::predict(model, pair[0].features).label == Label::wood);
    REQUIRE(classify::predict(model, pair[1].features).label == Label::metal);
  }

  SECTION("irreducible conflict settles at half accuracy") {
    const std::vector<LabeledExample> conflict = {
        example({0.7}, Label::wood, "W1", Condition::ambient_wood),
        example({0.7}, Label::metal, "M1", Condition::ambient_metal)};
    const auto model = classify::train_linear_svm(conflict, {});
    int correct = 0;
    for (const auto& e : conflict) {
      correct += classify::predict(model, e.features).label == e.label;
    }
    REQUIRE(correct == 1);
  }

  SECTION("tie margin goes to wood") {
    LinearSvmModel zero;
    zero.weights = {0.0, 0.0};
    zero.bias = 0.0;
    const auto p = classify::predict(zero, std::vector<double>{3.0, -4.0});
    REQUIRE(p.label == Label::wood);
    REQUIRE(p.margin == 0.0);
  }

  SECTION("margin is the affine score") {
    LinearSvmModel model;
    model.weights = {1.0};
    model.bias = 0.0;
    const auto p = classify::predict(model, std::vector<double>{2.0});
    REQUIRE(p.label == Label::metal);
    REQUIRE(p.margin == Approx(2.0));
  }

  SECTION("label always matches the sign rule on its own margin") {
    rng::SplitMix64 r(103);
    LinearSvmModel model;
    model.weights = {r.normal(), r.normal(), r.normal()};
    model.bias = r.normal();
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> f = {r.normal(), r.normal(), r.normal()};
      const auto p = classify::predict(model, f);
      REQUIRE(p.label == (p.margin > 0.0 ? Label::metal : Label::wood));
    }
  }

  SECTION("training is deterministic") {
    const auto data = toy_dataset(false);
    const auto a = classify::train_linear_svm(data, {1e-3, 50, 7});
    const auto b = classify::train_linear_svm(data, {1e-3, 50, 7});
    REQUIRE(a.weights == b.weights);
    REQUIRE(a.bias == b.bias);
  }

  SECTION("error paths") {
    const std::vector<LabeledExample> one_class = {
        example({1.0}, Label::wood, "W1", Condition::ambient_wood),
        example({2.0}, Label::wood, "W2", Condition::ambient_wood)};
    REQUIRE_THROWS_AS(classify::train_linear_svm(one_class, {}), SingleClass);

    LinearSvmModel model;
    model.weights = {1.0, 2.0};
    REQUIRE_THROWS_AS(classify::predict(model, std::vector<double>{1.0}),
                      DimensionMismatch);
  }
}

TEST_CASE("leave-one-block-out cross validation", "[classify]") {
  SECTION("nine blocks make 27 folds with disjoint held-out sets") {
    const auto data = toy_dataset(false);
    const auto result = classify::lobo_cv(data, 1, {1e-3, 60, 7});
    REQUIRE(result.folds.size() == 27);

    std::set<std::array<std::string, 3>> combos;
    for (const auto& fold : result.folds) combos.insert(fold.held_out);
    REQUIRE(combos.size() == 27);
    REQUIRE(result.aggregate.total() == 27 * 3 * 10);
  }

  SECTION("ambient-only training confuses cold wood with metal") {
    const auto data = toy_dataset(false);
    const auto result = classify::lobo_cv(data, 1, {1e-3, 60, 7});
    REQUIRE(result.aggregate.rate(Condition::cold_wood, Label::metal) >= 0.95);
    REQUIRE(result.aggregate.rate(Condition::ambient_wood, Label::wood) >=
            0.95);
    REQUIRE(result.aggregate.rate(Condition::ambient_metal, Label::metal) >=
            0.95);
  }

  SECTION("training on separable cold wood recovers it") {
    const auto data = toy_dataset(true);
    const auto study2 = classify::lobo_cv(data, 2, {1e-3, 200, 7});
    REQUIRE(study2.aggregate.rate(Condition::cold_wood, Label::wood) == 1.0);
    REQUIRE(study2.aggregate.accuracy() == 1.0);
  }

  SECTION("study 2 never does worse than study 1 on cold wood") {
    const auto data = toy_dataset(true);
    const auto study1 = classify::lobo_cv(data, 1, {1e-3, 100, 7});
    const auto study2 = classify::lobo_cv(data, 2, {1e-3, 100, 7});
    REQUIRE(study2.aggregate.rate(Condition::cold_wood, Label::wood) >=
            study1.aggregate.rate(Condition::cold_wood, Label::wood));
  }

  SECTION("identical runs agree fold for fold") {
    const auto data = toy_dataset(true);
    const auto a = classify::lobo_cv(data, 2, {1e-3, 40, 7});
    const auto b = classify::lobo_cv(data, 2, {1e-3, 40, 7});
    REQUIRE(a.folds.size() == b.folds.size());
    for (std::size_t i = 0; i < a.folds.size(); ++i) {
      REQUIRE(a.folds[i].held_out == b.folds[i].held_out);
      REQUIRE(a.folds[i].confusion.counts == b.folds[i].confusion.counts);
    }
  }

  SECTION("block structure is enforced") {
    auto data = toy_dataset(false);
    data.pop_back();  // M3 loses an example but the block remains; fine
    REQUIRE_NOTHROW(classify::lobo_cv(data, 1, {1e-3, 10, 7}));

    std::vector<LabeledExample> two_blocks;
    for (const auto& e : toy_dataset(false)) {
      if (e.block_id != "M3") two_blocks.push_back(e);
    }
    REQUIRE_THROWS_AS(classify::lobo_cv(two_blocks, 1, {}), BadBlockStructure);
    REQUIRE_THROWS_AS(classify::lobo_cv(toy_dataset(false), 4, {}),
                      UnknownStudy);

    auto bad = toy_dataset(false);
    bad.front().block_id = "M9";  // wood example with a metal block id
    REQUIRE_THROWS_AS(classify::lobo_cv(bad, 1, {}), BadBlockStructure);
  }
}
