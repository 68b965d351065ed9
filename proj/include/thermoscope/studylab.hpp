#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "thermoscope/ambiguity.hpp"
#include "thermoscope/classify.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/estimation.hpp"
#include "thermoscope/heatcore.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/sensorsim.hpp"

// End-to-end study replication on synthetic data: generates the full
// 540-trace collection regimen (30 sets x 3 trials x 3 material conditions
// x 2 sensors), tunes the ambiguous refrigeration target, runs the three
// classification studies, and bins trial deviations for reporting.

namespace thermoscope::studylab {

using classify::Condition;
using classify::Label;
using classify::LabeledExample;
using heatcore::BodyState;
using heatcore::SensorSpec;
using heatcore::ThermalMaterial;
using sensorsim::NonIdealityConfig;
using sensorsim::SensorId;
using sensorsim::SignalChainConfig;
using sensorsim::TemperatureTrace;
using sensorsim::TraceConfig;

struct StudyDatasetConfig {
  int n_sets = 30;
  int trials_per_set = 3;
  ThermalMaterial wood{"pine wood", 331.0, {}, {}, {}};
  ThermalMaterial metal{"aluminum", 23664.0, {}, {}, {}};
  ThermalMaterial sensor_material{"robot sensor", 892.0, {}, {}, {}};
  double ambient_temp = 22.5;       // °C
  double active_init_temp = 29.5;   // °C, heated sensor before contact
  /// Cold-wood temperature at touch time; when absent, the ambiguous value
  /// for ambient metal is computed and used.
  std::optional<double> cold_wood_target;
  double cold_wood_jitter_sigma = 0.3;  // °C, per-touch prep variation
  double sensor_diffusivity = 1.0e-7;   // m²/s
  double measurement_depth = 5.0e-4;    // m
  double t_max = 5.0;                   // s
  double sample_rate = 50.0;            // Hz
  double pre_contact_duration = 1.0;    // s
  NonIdealityConfig nonideal = NonIdealityConfig::realistic();
  std::optional<SignalChainConfig> chain;
  std::uint64_t base_seed = 2020;

  void validate() const {
    wood.validate();
    metal.validate();
    sensor_material.validate();
    if (n_sets < 1 || trials_per_set < 1 || trials_per_set > 3) {
      throw InvalidConfig(
          "StudyDatasetConfig: n_sets >= 1 and trials_per_set in [1, 3]");
    }
    if (!(active_init_temp > ambient_temp)) {
      throw InvalidConfig(
          "StudyDatasetConfig: heated sensor must start above ambient");
    }
    nonideal.validate();
    if (chain) chain->validate();
  }

  SensorSpec active_sensor() const {
    return {{sensor_material, active_init_temp}, sensor_diffusivity,
            measurement_depth, true};
  }
};

/// One simulated contact recording (one sensor of one touch event).
struct TraceRecord {
  TemperatureTrace trace;
  Condition condition = Condition::ambient_wood;
  int set = 0;
  int trial = 0;
  SensorId sensor = SensorId::active;
  double object_temp = 0.0;  // °C actually used (includes prep jitter)
  std::uint64_t seed = 0;
};

struct StudyDataset {
  StudyDatasetConfig config;
  double ambiguous_target = 0.0;  // resolved cold-wood touch temperature
  std::vector<TraceRecord> traces;
  std::uint64_t fingerprint = 0;
};

namespace detail {

inline const char* condition_material(const StudyDatasetConfig& cfg,
                                      Condition c) {
  return c == Condition::ambient_metal ? cfg.metal.name.c_str()
                                       : cfg.wood.name.c_str();
}

inline std::string block_id(Condition c, int trial) {
  return std::string(classify::block_prefix(c)) + std::to_string(trial + 1);
}

/// Canonical textual form of the config for fingerprinting.
inline std::string config_signature(const StudyDatasetConfig& cfg) {
  std::string s;
  auto put = [&s](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g;", v);
    s += buf;
  };
  s += cfg.wood.name + ";" + cfg.metal.name + ";" + cfg.sensor_material.name +
       ";";
  put(cfg.wood.effusivity);
  put(cfg.metal.effusivity);
  put(cfg.sensor_material.effusivity);
  put(static_cast<double>(cfg.n_sets));
  put(static_cast<double>(cfg.trials_per_set));
  put(cfg.ambient_temp);
  put(cfg.active_init_temp);
  put(cfg.cold_wood_target ? *cfg.cold_wood_target : std::nan(""));
  put(cfg.cold_wood_jitter_sigma);
  put(cfg.sensor_diffusivity);
  put(cfg.measurement_depth);
  put(cfg.t_max);
  put(cfg.sample_rate);
  put(cfg.pre_contact_duration);
  put(cfg.nonideal.noise_sigma);
  put(cfg.nonideal.approach_conv_coeff);
  put(cfg.nonideal.contact_lag);
  if (cfg.chain) {
    put(cfg.chain->thermistor_r0);
    put(cfg.chain->thermistor_t0);
    put(cfg.chain->beta);
    put(cfg.chain->reference_r);
    put(cfg.chain->supply);
    put(static_cast<double>(cfg.chain->adc_bits));
    put(cfg.chain->filter_cutoff);
  }
  put(static_cast<double>(cfg.base_seed));
  return s;
}

/// Runs fn(i) for i in [0, n) over `jobs` threads. Each index is
/// independent and writes only its own slot, so the result is identical for
/// any job count.
template <typename Fn>
inline void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  const std::size_t stride =
      (n + static_cast<std::size_t>(jobs) - 1) / static_cast<std::size_t>(jobs);
  for (int w = 0; w < jobs; ++w) {
    const std::size_t begin = static_cast<std::size_t>(w) * stride;
    const std::size_t end = std::min(n, begin + stride);
    if (begin >= end) break;
    workers.emplace_back([begin, end, &fn] {
      for (std::size_t i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace detail

/// Ambiguous touch temperature for the configured cold wood against ambient
/// metal, seen by the heated sensor.
inline double predicted_ambiguous_target(const StudyDatasetConfig& cfg) {
  ambiguity::AmbiguityQuery q;
  q.sensor = {cfg.sensor_material, cfg.active_init_temp};
  q.object1 = {cfg.metal, cfg.ambient_temp};
  q.target_effusivity = cfg.wood.effusivity;
  return ambiguity::ambiguous_object_temperature(q);
}

/// Generates the full trace regimen. Cardinality is always
/// n_sets x trials_per_set x 3 conditions x 2 sensors; block ids cycle with
/// the trial index; the cold-wood touch temperature is the ambiguous target
/// plus per-touch Gaussian jitter. Fully reproducible from the base seed
/// for any job count.
inline StudyDataset generate_study_dataset(const StudyDatasetConfig& cfg,
                                           int jobs = 1) {
  cfg.validate();
  StudyDataset dataset;
  dataset.config = cfg;
  dataset.ambiguous_target =
      cfg.cold_wood_target ? *cfg.cold_wood_target
                           : predicted_ambiguous_target(cfg);

  static constexpr Condition kConditions[3] = {
      Condition::ambient_wood, Condition::cold_wood, Condition::ambient_metal};

  const std::size_t events = static_cast<std::size_t>(cfg.n_sets) *
                             static_cast<std::size_t>(cfg.trials_per_set) * 3;
  dataset.traces.resize(events * 2);

  detail::parallel_for(events, jobs, [&](std::size_t event) {
    const int set = static_cast<int>(event / (cfg.trials_per_set * 3));
    const int trial = static_cast<int>(event / 3 % cfg.trials_per_set);
    const auto condition = kConditions[event % 3];
    const auto cond_idx = static_cast<std::uint64_t>(condition);

    double object_temp = cfg.ambient_temp;
    if (condition == Condition::cold_wood) {
      rng::SplitMix64 jitter(rng::derive(cfg.base_seed,
                                         static_cast<std::uint64_t>(set),
                                         static_cast<std::uint64_t>(trial),
                                         cond_idx, 0x6A69));  // "ji"
      object_temp = dataset.ambiguous_target +
                    cfg.cold_wood_jitter_sigma * jitter.normal();
    }

    TraceConfig trace_cfg;
    trace_cfg.sensor = cfg.active_sensor();
    trace_cfg.object = {condition == Condition::ambient_metal ? cfg.metal
                                                              : cfg.wood,
                        object_temp};
    trace_cfg.t_max = cfg.t_max;
    trace_cfg.sample_rate = cfg.sample_rate;
    trace_cfg.pre_contact_duration = cfg.pre_contact_duration;
    trace_cfg.ambient_temperature = cfg.ambient_temp;
    trace_cfg.seed = rng::derive(cfg.base_seed,
                                 static_cast<std::uint64_t>(set),
                                 static_cast<std::uint64_t>(trial), cond_idx);

    auto [active, passive] = sensorsim::simulate_double_condition(
        trace_cfg, cfg.ambient_temp, cfg.nonideal, cfg.chain);

    const std::string block = detail::block_id(condition, trial);
    active.block_id = block;
    passive.block_id = block;

    TraceRecord active_record{std::move(active), condition, set, trial,
                              SensorId::active, object_temp, 0};
    active_record.seed = active_record.trace.seed;
    TraceRecord passive_record{std::move(passive), condition, set, trial,
                               SensorId::passive, object_temp, 0};
    passive_record.seed = passive_record.trace.seed;
    dataset.traces[event * 2] = std::move(active_record);
    dataset.traces[event * 2 + 1] = std::move(passive_record);
  });

  const std::string signature = detail::config_signature(cfg);
  dataset.fingerprint = rng::fnv1a(signature.data(), signature.size());
  return dataset;
}

/// Preparation model for refrigerated blocks: the warming line plus the
/// handling delay it was calibrated at.
struct ColdPrepConfig {
  estimation::WarmingCorrection warming;
  double delay = 5.0;  // s between refrigerator and touch

  void validate() const {
    if (!(delay >= 0.0)) throw InvalidConfig("ColdPrepConfig: delay >= 0");
    if (!std::isfinite(warming.slope) || warming.slope == 0.0) {
      throw InvalidConfig("ColdPrepConfig: warming slope must be nonzero");
    }
  }
};

struct TuneResult {
  double touched_target = 0.0;  // °C at the contact surface when touched
  std::optional<double> fridge_setting;  // via the warming line, if given
  bool boundary_warning = false;
  std::vector<std::pair<double, double>> candidates;  // (touched temp, gap)
};

/// Quantitative version of the empirical target search: evaluates cold-wood
/// candidates on a grid around the model-predicted ambiguous temperature
/// and keeps the one whose noiseless active trace is closest (sup norm) to
/// the ambient-metal trace. A supplied prep model converts the winner into
/// a refrigerator setting.
inline TuneResult tune_ambiguous_target(
    const SensorSpec& active_sensor, const BodyState& metal_object,
    double wood_effusivity, double grid_step, double span = 3.0,
    const std::optional<ColdPrepConfig>& prep = {},
    std::optional<double> grid_center = {}) {
  if (!(grid_step > 0.0)) {
    throw InvalidConfig("tune_ambiguous_target: grid step must be > 0");
  }
  if (prep) prep->validate();
  active_sensor.validate();
  metal_object.validate();

  ambiguity::AmbiguityQuery q;
  q.sensor = active_sensor.body;
  q.object1 = metal_object;
  q.target_effusivity = wood_effusivity;
  const double predicted =
      grid_center ? *grid_center : ambiguity::ambiguous_object_temperature(q);

  const auto half_steps =
      std::max<long long>(0, std::llround(std::floor(span / grid_step)));

  TuneResult result;
  double best_gap = std::numeric_limits<double>::infinity();
  for (long long k = -half_steps; k <= half_steps; ++k) {
    const double candidate = predicted + static_cast<double>(k) * grid_step;
    BodyState cold_wood{{"tuned wood", wood_effusivity, {}, {}, {}}, candidate};
    const double gap =
        ambiguity::verify_ambiguity(active_sensor, cold_wood, metal_object,
                                    5.0, 200);
    result.candidates.emplace_back(candidate, gap);
    if (gap < best_gap) {
      best_gap = gap;
      result.touched_target = candidate;
    }
  }
  result.boundary_warning =
      result.touched_target == result.candidates.front().first ||
      result.touched_target == result.candidates.back().first;
  if (half_steps == 0) result.boundary_warning = true;
  if (prep) {
    result.fridge_setting =
        prep->warming.setting_from_touched(result.touched_target);
  }
  return result;
}

struct StudyReport {
  int study = 0;
  classify::CvResult cv;
  classify::SvmConfig svm;
  classify::FeatureConfig features;
  std::uint64_t fingerprint = 0;
  double runtime_seconds = 0.0;
};

/// Default feature layout for a study: 50 resampled temperatures over the
/// contact window plus early (first half second) and late slopes; study 3
/// appends the passive sensor's blocks.
inline classify::FeatureConfig study_feature_config(
    const StudyDatasetConfig& cfg, int study) {
  classify::FeatureConfig fc;
  fc.t_max = cfg.t_max;
  fc.slope_windows = {{0.0, 0.5}, {0.5, cfg.t_max}};
  fc.include_passive = study == 3;
  return fc;
}

/// Builds labeled examples for a study from the paired traces. Contact is
/// estimated from the active trace's temperature peak, the way the robot
/// pipeline works on recorded data; with an approach segment present this
/// folds the convective pre-contact signature into the analysis window,
/// which is the cue that lets training on cold-wood examples pay off.
inline std::vector<LabeledExample> study_examples(const StudyDataset& dataset,
                                                  int study) {
  if (study < 1 || study > 3) {
    throw UnknownStudy("study_examples: study must be 1, 2, or 3");
  }
  const auto fc = study_feature_config(dataset.config, study);
  std::vector<LabeledExample> examples;
  examples.reserve(dataset.traces.size() / 2);
  for (std::size_t i = 0; i + 1 < dataset.traces.size(); i += 2) {
    const auto& active = dataset.traces[i];
    const auto& passive = dataset.traces[i + 1];
    if (active.sensor != SensorId::active ||
        passive.sensor != SensorId::passive) {
      throw BadBlockStructure("study_examples: traces are not paired");
    }
    auto active_trace = active.trace;
    active_trace.contact_index = sensorsim::detect_contact(active_trace);
    auto passive_trace = passive.trace;
    passive_trace.contact_index = active_trace.contact_index;  // synchronized

    LabeledExample example;
    example.features = classify::extract_features(
        active_trace, fc.include_passive ? &passive_trace : nullptr, fc);
    example.label = active.condition == Condition::ambient_metal
                        ? Label::metal
                        : Label::wood;
    example.block_id = active.trace.block_id;
    example.condition = active.condition;
    examples.push_back(std::move(example));
  }
  return examples;
}

/// Runs one study: features per the study design, then leave-one-block-out
/// cross validation.
inline StudyReport run_study(int study, const StudyDataset& dataset,
                             const classify::SvmConfig& svm = {}) {
  const auto start = std::chrono::steady_clock::now();
  StudyReport report;
  report.study = study;
  report.features = study_feature_config(dataset.config, study);
  report.svm = svm;
  report.fingerprint = dataset.fingerprint;
  report.cv = classify::lobo_cv(study_examples(dataset, study), study, svm);
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

struct EpsilonHistogram {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<std::size_t> counts;
  std::vector<bool> in_range;  // bin lies inside [-gamma, +gamma]
};

/// Bins trial deviations symmetrically around zero (central bin centered at
/// 0) and marks the bins inside the allowable deviation band.
inline EpsilonHistogram epsilon_histogram(
    const std::vector<estimation::TrialRecord>& trials, double gamma,
    double bin_width) {
  if (trials.empty()) throw EmptyTrials("epsilon_histogram: no trials");
  if (!(bin_width > 0.0)) {
    throw InvalidConfig("epsilon_histogram: bin width must be > 0");
  }
  if (!(gamma >= 0.0)) {
    throw InvalidConfig("epsilon_histogram: gamma must be >= 0");
  }

  auto bin_of = [&](double eps) {
    return static_cast<long long>(std::llround(eps / bin_width));
  };
  long long lo_bin = 0, hi_bin = 0;
  for (const auto& t : trials) {
    t.validate();
    lo_bin = std::min(lo_bin, bin_of(t.epsilon));
    hi_bin = std::max(hi_bin, bin_of(t.epsilon));
  }

  EpsilonHistogram hist;
  for (long long b = lo_bin; b <= hi_bin; ++b) {
    const double center = static_cast<double>(b) * bin_width;
    hist.bin_lo.push_back(center - 0.5 * bin_width);
    hist.bin_hi.push_back(center + 0.5 * bin_width);
    hist.counts.push_back(0);
    hist.in_range.push_back(std::fabs(center) <= gamma + 1e-12);
  }
  for (const auto& t : trials) {
    hist.counts[static_cast<std::size_t>(bin_of(t.epsilon) - lo_bin)] += 1;
  }
  return hist;
}

}  // namespace thermoscope::studylab
