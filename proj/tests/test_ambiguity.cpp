#include <catch2/catch.hpp>

#include <cmath>

#include "oracles.hpp"
#include "thermoscope/ambiguity.hpp"
#include "thermoscope/rng.hpp"

using namespace thermoscope;
using ambiguity::AmbiguityQuery;
using ambiguity::DoubleConditionQuery;
using heatcore::BodyState;
using heatcore::SensorSpec;

namespace {

BodyState body(const char* name, double effusivity, double temp) {
  return {{name, effusivity, {}, {}, {}}, temp};
}

const SensorSpec kStudySensor{body("robot sensor", 892, 29.5), 1.0e-7, 5.0e-4,
                              true};
const BodyState kAmbientMetal = body("aluminum", 23664, 22.5);
constexpr double kWoodEffusivity = 331.0;

// Pinned output of the study-parameter solve, frozen from the bisection
// oracle (sensor 29.5 C / 892, object 22.5 C / 23664, target 331).
constexpr double kPinnedColdWoodTemp = 4.575466693306969;

}  // namespace

TEST_CASE("ambiguous object temperature", "[ambiguity]") {
  SECTION("same effusivity collapses to the same temperature") {
    AmbiguityQuery q{kStudySensor.body, kAmbientMetal, 23664.0};
    REQUIRE(ambiguity::ambiguous_object_temperature(q) ==
            Approx(22.5).margin(1e-9));
  }

  SECTION("thermal equilibrium stays ambiguous only at equal temperature") {
    AmbiguityQuery q{body("s", 892, 22.5), body("o", 23664, 22.5), 331.0};
    REQUIRE(ambiguity::ambiguous_object_temperature(q) ==
            Approx(22.5).margin(1e-9));
  }

  SECTION("study parameters agree with the bisection oracle") {
    AmbiguityQuery q{kStudySensor.body, kAmbientMetal, kWoodEffusivity};
    const double solved = ambiguity::ambiguous_object_temperature(q);
    const double by_bisection = oracles::ambiguous_temperature_by_bisection(
        kStudySensor, kAmbientMetal, kWoodEffusivity);
    REQUIRE(solved == Approx(by_bisection).margin(1e-9));
    REQUIRE(solved == Approx(kPinnedColdWoodTemp).margin(1e-12));

    const BodyState cold_wood = body("pine wood", kWoodEffusivity, solved);
    REQUIRE(oracles::trace_gap(kStudySensor, kAmbientMetal, cold_wood, 5.0,
                               500) < 1e-9);
  }

  SECTION("substitution reproduces the contact temperature") {
    rng::SplitMix64 r(41);
    for (int i = 0; i < 300; ++i) {
      const auto sensor = body("s", r.log_uniform(50, 50'000),
                               r.uniform(-40, 45));
      const auto object1 = body("o1", r.log_uniform(50, 50'000),
                                r.uniform(-40, 45));
      const double target_e = r.log_uniform(50, 50'000);
      AmbiguityQuery q{sensor, object1, target_e};
      const double solved = ambiguity::ambiguous_object_temperature(q);

      const double tc1 =
          heatcore::contact_temperature(sensor, object1).contact_temperature;
      const double tc2 = heatcore::contact_temperature(
                             sensor, body("o2", target_e, solved))
                             .contact_temperature;
      REQUIRE(tc2 == Approx(tc1).epsilon(1e-12).margin(1e-12));
    }
  }

  SECTION("round trip recovers the original temperature") {
    rng::SplitMix64 r(43);
    for (int i = 0; i < 1000; ++i) {
      const auto sensor = body("s", r.log_uniform(50, 50'000),
                               r.uniform(-40, 45));
      const auto object1 = body("o1", r.log_uniform(50, 50'000),
                                r.uniform(-40, 45));
      const double target_e = r.log_uniform(50, 50'000);
      const double forward = ambiguity::ambiguous_object_temperature(
          {sensor, object1, target_e});
      const double back = ambiguity::ambiguous_object_temperature(
          {sensor, body("o2", target_e, forward),
           object1.material.effusivity});
      REQUIRE(back == Approx(object1.initial_temperature)
                          .epsilon(1e-10)
                          .margin(1e-10));
    }
  }

  SECTION("a less effusive stand-in must be colder") {
    AmbiguityQuery q{kStudySensor.body, kAmbientMetal, kWoodEffusivity};
    REQUIRE(ambiguity::ambiguous_object_temperature(q) < 22.5);
  }

  SECTION("rejects non-positive target effusivity") {
    AmbiguityQuery q{kStudySensor.body, kAmbientMetal, 0.0};
    REQUIRE_THROWS_AS(ambiguity::ambiguous_object_temperature(q),
                      NonPositiveEffusivity);
  }
}

TEST_CASE("trace-level ambiguity verification", "[ambiguity]") {
  AmbiguityQuery q{kStudySensor.body, kAmbientMetal, kWoodEffusivity};
  const double ambiguous = ambiguity::ambiguous_object_temperature(q);
  const BodyState cold_wood = body("pine wood", kWoodEffusivity, ambiguous);

  SECTION("constructed pair is indistinguishable") {
    REQUIRE(ambiguity::verify_ambiguity(kStudySensor, kAmbientMetal, cold_wood,
                                        5.0, 1000) < 1e-9);
  }

  SECTION("grid and sensor geometry do not matter") {
    rng::SplitMix64 r(47);
    for (int i = 0; i < 50; ++i) {
      SensorSpec sensor = kStudySensor;
      sensor.measurement_depth = r.uniform(0.0, 0.005);
      sensor.diffusivity = r.log_uniform(1e-8, 1e-5);
      const auto n_points = static_cast<std::size_t>(r.uniform(2, 400));
      REQUIRE(ambiguity::verify_ambiguity(sensor, kAmbientMetal, cold_wood,
                                          r.uniform(0.5, 20.0), n_points) <
              1e-9);
    }
  }

  SECTION("a one degree offset is clearly visible") {
    BodyState off = cold_wood;
    off.initial_temperature += 1.0;
    REQUIRE(ambiguity::verify_ambiguity(kStudySensor, kAmbientMetal, off, 5.0,
                                        1000) > 0.001);
  }

  SECTION("identical objects give zero residual") {
    REQUIRE(ambiguity::verify_ambiguity(kStudySensor, kAmbientMetal,
                                        kAmbientMetal, 5.0, 100) == 0.0);
  }

  SECTION("rejects bad grids") {
    REQUIRE_THROWS_AS(ambiguity::verify_ambiguity(kStudySensor, kAmbientMetal,
                                                  cold_wood, 0.0, 100),
                      InvalidGrid);
    REQUIRE_THROWS_AS(ambiguity::verify_ambiguity(kStudySensor, kAmbientMetal,
                                                  cold_wood, 5.0, 1),
                      InvalidGrid);
  }
}

TEST_CASE("double-condition gap", "[ambiguity]") {
  SECTION("equal object effusivities leave no gap") {
    DoubleConditionQuery q{body("s1", 892, 29.5), body("s2", 892, 22.5),
                           kAmbientMetal, 23664.0};
    REQUIRE(ambiguity::double_condition_gap(q) == Approx(0.0).margin(1e-12));
  }

  SECTION("identical sensors leave no gap") {
    DoubleConditionQuery q{body("s1", 892, 29.5), body("s2", 892, 29.5),
                           kAmbientMetal, kWoodEffusivity};
    REQUIRE(ambiguity::double_condition_gap(q) == Approx(0.0).margin(1e-12));
  }

  SECTION("equal sensor effusivity with distinct temperatures separates") {
    DoubleConditionQuery q{body("s1", 892, 29.5), body("s2", 892, 22.5),
                           kAmbientMetal, kWoodEffusivity};
    REQUIRE(ambiguity::double_condition_gap(q) > 1e-6);
  }

  SECTION("certificate sign agrees with the gap across random draws") {
    rng::SplitMix64 r(53);
    for (int i = 0; i < 500; ++i) {
      DoubleConditionQuery q{
          body("s1", r.log_uniform(50, 50'000), r.uniform(-40, 45)),
          body("s2", r.log_uniform(50, 50'000), r.uniform(-40, 45)),
          body("o1", r.log_uniform(50, 50'000), r.uniform(-40, 45)),
          r.log_uniform(50, 50'000)};
      REQUIRE_NOTHROW(ambiguity::double_condition_gap(q));
    }
  }
}

TEST_CASE("randomized distinctness sweep", "[ambiguity][sweep]") {
  SECTION("guaranteed domain has no violations") {
    const auto report = ambiguity::proof_sweep(10'000, 20'201'007);
    REQUIRE(report.violations == 0);
    REQUIRE(report.n_samples == 10'000);
    REQUIRE(report.min_gap > 1e-12);
  }

  SECTION("equal sensor effusivity slice has no violations") {
    const auto report = ambiguity::proof_sweep(
        10'000, 20'201'007, ambiguity::SweepDomain::equal_sensor_effusivity);
    REQUIRE(report.violations == 0);
  }

  SECTION("empty sweep") {
    const auto report = ambiguity::proof_sweep(0, 1);
    REQUIRE(report.violations == 0);
    REQUIRE(report.n_samples == 0);
  }

  SECTION("deterministic given the seed") {
    const auto a = ambiguity::proof_sweep(500, 99);
    const auto b = ambiguity::proof_sweep(500, 99);
    REQUIRE(a.min_gap == b.min_gap);
    REQUIRE(a.violations == b.violations);
  }

  SECTION("exploratory domain records instead of failing") {
    const auto report =
        ambiguity::proof_sweep(2'000, 7, ambiguity::SweepDomain::exploratory);
    REQUIRE(report.violations == 0);
    REQUIRE(report.n_samples == 2'000);
  }
}
