#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "thermoscope/estimation.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/sensorsim.hpp"

using namespace thermoscope;
using estimation::Answer;
using estimation::TrialRecord;
using heatcore::BodyState;
using heatcore::SensorSpec;
using sensorsim::TemperatureTrace;
using sensorsim::TraceConfig;

namespace {

BodyState body(const char* name, double effusivity, double temp) {
  return {{name, effusivity, {}, {}, {}}, temp};
}

TemperatureTrace make_trace(double object_effusivity, double object_temp,
                            double noise_sigma, std::uint64_t seed) {
  TraceConfig cfg;
  cfg.sensor = {body("robot sensor", 892, 29.5), 1.0e-7, 5.0e-4, true};
  cfg.object = body("object", object_effusivity, object_temp);
  cfg.t_max = 5.0;
  cfg.sample_rate = 50.0;
  cfg.seed = seed;
  return sensorsim::synthesize_trace(cfg, {noise_sigma, 0.0, 0.0});
}

const SensorSpec kSensor{body("robot sensor", 892, 29.5), 1.0e-7, 5.0e-4,
                         true};

double fit_error(double true_effusivity, double noise_sigma,
                 std::uint64_t seed) {
  // A cold object gives enough excursion that even the noisiest level keeps
  // a clear contact signature.
  const auto trace = make_trace(true_effusivity, 5.0, noise_sigma, seed);
  const auto fit =
      estimation::fit_effusivity(trace, kSensor, 5.0, 50.0, 50'000.0);
  return std::fabs(fit.estimate - true_effusivity) / true_effusivity;
}

TrialRecord trial(double finger_temp, double intended, Answer cold_wood,
                  Answer metal) {
  TrialRecord t;
  t.finger_temp_avg = finger_temp;
  t.intended_temp = intended;
  t.epsilon = intended - finger_temp;
  t.answers = {{"cold_wood", cold_wood}, {"ambient_metal", metal}};
  return t;
}

}  // namespace

TEST_CASE("effusivity fit recovers generating values", "[estimation]") {
  SECTION("noiseless recovery within 0.1 percent") {
    for (const double truth : {331.0, 892.0, 23'664.0}) {
      const auto trace = make_trace(truth, 22.5, 0.0, 1);
      const auto fit =
          estimation::fit_effusivity(trace, kSensor, 22.5, 50.0, 50'000.0);
      CAPTURE(truth);
      REQUIRE(fit.converged);
      REQUIRE(std::fabs(fit.estimate - truth) / truth < 1e-3);
      REQUIRE(fit.residual_sse < 1e-4);
    }
  }

  SECTION("result is never worse than the bounds or the midpoint") {
    const auto trace = make_trace(331.0, 22.5, 0.1, 3);
    const auto fit =
        estimation::fit_effusivity(trace, kSensor, 22.5, 50.0, 50'000.0);
    auto objective = [&](double e) {
      double sse = 0.0;
      const std::size_t contact = *trace.contact_index;
      for (std::size_t i = contact; i < trace.times.size(); ++i) {
        const double model = heatcore::measured_temperature(
            kSensor, body("probe", e, 22.5),
            trace.times[i] - trace.times[contact]);
        sse += (trace.temperatures[i] - model) *
               (trace.temperatures[i] - model);
      }
      return sse;
    };
    REQUIRE(fit.residual_sse <= objective(50.0));
    REQUIRE(fit.residual_sse <= objective(50'000.0));
    REQUIRE(fit.residual_sse <= objective(0.5 * (50.0 + 50'000.0)));
  }

  SECTION("median error shrinks with the noise level") {
    std::vector<double> medians;
    for (const double sigma : {0.2, 0.1, 0.05, 0.0}) {
      std::vector<double> errors;
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        errors.push_back(fit_error(331.0, sigma, 1000 + seed));
      }
      std::nth_element(errors.begin(), errors.begin() + 10, errors.end());
      medians.push_back(errors[10]);
    }
    REQUIRE(std::is_sorted(medians.rbegin(), medians.rend()));
  }

  SECTION("error paths") {
    TemperatureTrace tiny;
    tiny.times = {0.0, 0.02, 0.04};
    tiny.temperatures = {29.5, 28.0, 27.0};
    tiny.sensor_id = sensorsim::SensorId::active;
    tiny.contact_index = 0;
    REQUIRE_THROWS_AS(
        estimation::fit_effusivity(tiny, kSensor, 22.5, 50.0, 50'000.0),
        TooFewSamples);

    const auto trace = make_trace(331.0, 22.5, 0.0, 1);
    REQUIRE_THROWS_AS(
        estimation::fit_effusivity(trace, kSensor, 22.5, 50'000.0, 50.0),
        InvalidBounds);
    REQUIRE_THROWS_AS(
        estimation::fit_effusivity(trace, kSensor, 22.5, -1.0, 50.0),
        InvalidBounds);
  }
}

TEST_CASE("joint object/sensor fit converges on the interface ridge",
          "[estimation]") {
  const auto trace = make_trace(331.0, 22.5, 0.0, 5);
  const auto joint = estimation::fit_effusivity_joint(
      trace, kSensor, 22.5, {50.0, 50'000.0}, {50.0, 50'000.0});
  REQUIRE(joint.residual_sse < 1e-10);
  // The pair is identifiable only through the interface weight
  // e_s / (e_s + e_o); check the recovered weight, not the coordinates.
  const double truth_weight = 892.0 / (892.0 + 331.0);
  const double fit_weight =
      joint.sensor.estimate / (joint.sensor.estimate + joint.object.estimate);
  REQUIRE(fit_weight == Approx(truth_weight).epsilon(1e-3));
}

TEST_CASE("warming correction line", "[estimation]") {
  SECTION("recovers an exact line") {
    std::vector<std::pair<double, double>> pairs;
    for (double x = -35.0; x <= 20.0; x += 5.0) {
      pairs.emplace_back(x, 0.8 * x + 5.0);
    }
    const auto line = estimation::fit_warming_correction(pairs);
    REQUIRE(line.slope == Approx(0.8).margin(1e-12));
    REQUIRE(line.intercept == Approx(5.0).margin(1e-12));
    REQUIRE(line.setting_from_touched(line.touched_from_setting(-20.0)) ==
            Approx(-20.0).margin(1e-9));
  }

  SECTION("residuals are orthogonal to the inputs") {
    std::vector<std::pair<double, double>> pairs;
    rng::SplitMix64 r(61);
    for (double x = -35.0; x <= 20.0; x += 5.0) {
      pairs.emplace_back(x, 0.8 * x + 5.0 + r.uniform(-0.5, 0.5));
    }
    const auto line = estimation::fit_warming_correction(pairs);
    double sum_r = 0.0, sum_rx = 0.0;
    for (const auto& [x, y] : pairs) {
      const double resid = y - (line.slope * x + line.intercept);
      sum_r += resid;
      sum_rx += resid * x;
    }
    REQUIRE(std::fabs(sum_r) < 1e-9);
    REQUIRE(std::fabs(sum_rx) < 1e-9);
  }

  SECTION("symmetric perturbations barely move the slope") {
    std::vector<std::pair<double, double>> pairs;
    bool flip = false;
    for (double x = -35.0; x <= 20.0; x += 5.0) {
      pairs.emplace_back(x, 0.8 * x + 5.0 + (flip ? 0.1 : -0.1));
      flip = !flip;
    }
    const auto line = estimation::fit_warming_correction(pairs);
    REQUIRE(std::fabs(line.slope - 0.8) < 0.01);
  }

  SECTION("least-squares optimum: any nudge increases the error") {
    std::vector<std::pair<double, double>> pairs;
    rng::SplitMix64 r(67);
    for (double x = -35.0; x <= 20.0; x += 5.0) {
      pairs.emplace_back(x, 0.8 * x + 5.0 + r.normal(0.0, 0.3));
    }
    const auto line = estimation::fit_warming_correction(pairs);
    auto sse = [&](double slope, double intercept) {
      double total = 0.0;
      for (const auto& [x, y] : pairs) {
        const double resid = y - (slope * x + intercept);
        total += resid * resid;
      }
      return total;
    };
    const double at_fit = sse(line.slope, line.intercept);
    for (const double ds : {-1e-3, 1e-3}) {
      REQUIRE(sse(line.slope + ds, line.intercept) > at_fit);
      REQUIRE(sse(line.slope, line.intercept + ds) > at_fit);
    }
  }

  SECTION("degenerate inputs") {
    REQUIRE_THROWS_AS(estimation::fit_warming_correction({{1.0, 2.0}}),
                      DegenerateInput);
    REQUIRE_THROWS_AS(
        estimation::fit_warming_correction({{1.0, 2.0}, {1.0, 3.0}}),
        DegenerateInput);
  }
}

TEST_CASE("deviation threshold search", "[estimation]") {
  const double t_hat = 27.0;

  SECTION("constructed pilot set peaks at 3.5") {
    // Metal/metal trials spread through every half-degree ring inside 3.5,
    // wood answers just outside each ring beyond 3.5.
    std::vector<TrialRecord> trials;
    for (const double dev : {0.2, 0.7, 1.2, 1.7, 2.2, 2.7, 3.2, 3.45}) {
      trials.push_back(trial(t_hat + dev, t_hat, Answer::metal, Answer::metal));
      trials.push_back(trial(t_hat - dev, t_hat, Answer::metal, Answer::metal));
    }
    for (const double dev : {3.7, 4.2, 4.7, 5.3, 6.1, 7.4}) {
      trials.push_back(trial(t_hat + dev, t_hat, Answer::wood, Answer::metal));
      trials.push_back(trial(t_hat - dev, t_hat, Answer::metal, Answer::wood));
    }
    const auto result =
        estimation::optimize_deviation_threshold(trials, t_hat, 0.5);
    REQUIRE(result.gamma == Approx(3.5));
    REQUIRE(result.p_mm + result.p_w == Approx(1.0));
  }

  SECTION("uniform metal answers tie toward the smallest covering gamma") {
    std::vector<TrialRecord> trials;
    for (const double dev : {0.3, 1.4, 2.9, 4.6}) {
      trials.push_back(trial(t_hat + dev, t_hat, Answer::metal, Answer::metal));
    }
    const auto result =
        estimation::optimize_deviation_threshold(trials, t_hat, 0.5);
    REQUIRE(result.gamma == Approx(5.0));  // smallest grid value covering 4.6
    REQUIRE(result.p_mm == Approx(1.0));
    REQUIRE(result.p_w == Approx(0.0));
  }

  SECTION("the reported objective is the grid maximum") {
    std::vector<TrialRecord> trials;
    rng::SplitMix64 r(71);
    for (int i = 0; i < 60; ++i) {
      const auto a = r.uniform01() < 0.5 ? Answer::metal : Answer::wood;
      const auto b = r.uniform01() < 0.5 ? Answer::metal : Answer::wood;
      trials.push_back(trial(t_hat + r.uniform(-8.0, 8.0), t_hat, a, b));
    }
    const auto result =
        estimation::optimize_deviation_threshold(trials, t_hat, 0.5);
    double best = -1.0;
    for (const auto& [gamma, objective] : result.grid) {
      best = std::max(best, objective);
    }
    REQUIRE(result.p_mm + result.p_w == Approx(best));
  }

  SECTION("error paths") {
    REQUIRE_THROWS_AS(estimation::optimize_deviation_threshold({}, t_hat, 0.5),
                      EmptyTrials);
    TrialRecord inconsistent = trial(25.0, 27.0, Answer::metal, Answer::metal);
    inconsistent.epsilon = 5.0;
    REQUIRE_THROWS_AS(inconsistent.validate(), InvalidConfig);
  }
}
