#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermoscope/ambiguity.hpp"
#include "thermoscope/classify.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/estimation.hpp"
#include "thermoscope/heatcore.hpp"
#include "thermoscope/sensorsim.hpp"
#include "thermoscope/studylab.hpp"

// File formats: trace CSV, material catalog JSON, dataset manifests, and
// the JSON reports emitted by the command-line tool. Scenario documents are
// schema-checked strictly; unknown keys are rejected.

namespace thermoscope::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Trace CSV: header `time_s,temperature_c,sensor_id`, one row per sample,
// floating point at 9 significant digits.
// ---------------------------------------------------------------------------

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_trace_csv(std::ostream& out,
                            const sensorsim::TemperatureTrace& trace) {
  out << "time_s,temperature_c,sensor_id\n";
  const char* id = sensorsim::to_string(trace.sensor_id);
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << format_g9(trace.times[i]) << ',' << format_g9(trace.temperatures[i])
        << ',' << id << '\n';
  }
}

inline void write_trace_csv(const std::filesystem::path& path,
                            const sensorsim::TemperatureTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot open for writing: " + path.string());
  write_trace_csv(out, trace);
}

inline sensorsim::TemperatureTrace read_trace_csv(std::istream& in,
                                                  const std::string& name) {
  sensorsim::TemperatureTrace trace;
  std::string line;
  if (!std::getline(in, line) || line != "time_s,temperature_c,sensor_id") {
    throw InvalidConfig("trace file " + name +
                        ": expected header 'time_s,temperature_c,sensor_id'");
  }
  bool sensor_set = false;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string time_s, temp_s, id_s;
    if (!std::getline(fields, time_s, ',') ||
        !std::getline(fields, temp_s, ',') || !std::getline(fields, id_s)) {
      throw InvalidConfig("trace file " + name + ": malformed row " +
                          std::to_string(row));
    }
    try {
      trace.times.push_back(std::stod(time_s));
      trace.temperatures.push_back(std::stod(temp_s));
    } catch (const std::exception&) {
      throw InvalidConfig("trace file " + name + ": non-numeric value at row " +
                          std::to_string(row));
    }
    sensorsim::SensorId id;
    if (id_s == "active") {
      id = sensorsim::SensorId::active;
    } else if (id_s == "passive") {
      id = sensorsim::SensorId::passive;
    } else {
      throw InvalidConfig("trace file " + name + ": unknown sensor id '" +
                          id_s + "'");
    }
    if (sensor_set && id != trace.sensor_id) {
      throw InvalidConfig("trace file " + name + ": mixed sensor ids");
    }
    trace.sensor_id = id;
    sensor_set = true;
  }
  trace.validate();
  return trace;
}

inline sensorsim::TemperatureTrace read_trace_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open trace file: " + path.string());
  return read_trace_csv(in, path.string());
}

// ---------------------------------------------------------------------------
// Strict JSON helpers.
// ---------------------------------------------------------------------------

inline void require_keys(const json& object, const std::string& context,
                         std::initializer_list<const char*> allowed) {
  if (!object.is_object()) {
    throw InvalidConfig(context + ": expected a JSON object");
  }
  for (const auto& [key, value] : object.items()) {
    bool known = false;
    for (const char* k : allowed) {
      if (key == k) {
        known = true;
        break;
      }
    }
    if (!known) throw InvalidConfig(context + ": unknown key '" + key + "'");
  }
}

template <typename T>
inline T get_or(const json& object, const char* key, T fallback) {
  if (const auto it = object.find(key); it != object.end()) {
    return it->get<T>();
  }
  return fallback;
}

// ---------------------------------------------------------------------------
// Material catalog: JSON array of {"name", "effusivity", optional
// "conductivity", "density", "specific_heat"}.
// ---------------------------------------------------------------------------

inline heatcore::MaterialCatalog catalog_from_json(const json& doc) {
  if (!doc.is_array()) {
    throw InvalidConfig("material catalog: expected a JSON array");
  }
  heatcore::MaterialCatalog catalog;
  for (const auto& entry : doc) {
    require_keys(entry, "material catalog entry",
                 {"name", "effusivity", "conductivity", "density",
                  "specific_heat"});
    heatcore::ThermalMaterial m;
    if (!entry.contains("name") || !entry.contains("effusivity")) {
      throw InvalidConfig("material catalog entry: 'name' and 'effusivity' "
                          "are required");
    }
    m.name = entry.at("name").get<std::string>();
    m.effusivity = entry.at("effusivity").get<double>();
    if (entry.contains("conductivity"))
      m.conductivity = entry.at("conductivity").get<double>();
    if (entry.contains("density")) m.density = entry.at("density").get<double>();
    if (entry.contains("specific_heat"))
      m.specific_heat = entry.at("specific_heat").get<double>();
    catalog.add(std::move(m));
  }
  return catalog;
}

inline heatcore::MaterialCatalog load_material_catalog(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open catalog: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidConfig("catalog " + path.string() + ": " + e.what());
  }
  return catalog_from_json(doc);
}

// ---------------------------------------------------------------------------
// Reports.
// ---------------------------------------------------------------------------

inline json to_json(const ambiguity::SweepReport& report) {
  json j{{"n_samples", report.n_samples},
         {"violations", report.violations},
         {"min_gap", report.min_gap},
         {"seed", report.seed},
         {"domain", ambiguity::to_string(report.domain)},
         {"domain_description", report.domain_description}};
  if (!report.zero_gap_samples.empty()) {
    json samples = json::array();
    for (const auto& s : report.zero_gap_samples) {
      samples.push_back({{"sensor1_temp", s.sensor1_temp},
                         {"sensor2_temp", s.sensor2_temp},
                         {"sensor1_effusivity", s.sensor1_e},
                         {"sensor2_effusivity", s.sensor2_e},
                         {"object1_temp", s.object1_temp},
                         {"object1_effusivity", s.object1_e},
                         {"object2_effusivity", s.object2_e},
                         {"gap", s.gap}});
    }
    j["zero_gap_samples"] = samples;
  }
  return j;
}

inline json to_json(const estimation::FitResult& fit) {
  return {{"estimate", fit.estimate},
          {"residual_sse", fit.residual_sse},
          {"iterations", fit.iterations},
          {"converged", fit.converged},
          {"bounds", {fit.bounds[0], fit.bounds[1]}}};
}

inline json to_json(const classify::ConfusionMatrix& cm) {
  json j = json::object();
  for (const auto condition :
       {classify::Condition::ambient_wood, classify::Condition::cold_wood,
        classify::Condition::ambient_metal}) {
    j[classify::to_string(condition)] = {
        {"wood", cm.at(condition, classify::Label::wood)},
        {"metal", cm.at(condition, classify::Label::metal)}};
  }
  return j;
}

inline void write_confusion_csv(const std::filesystem::path& path,
                                const classify::ConfusionMatrix& cm) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot open for writing: " + path.string());
  out << "true_condition,predicted,count\n";
  for (const auto condition :
       {classify::Condition::ambient_wood, classify::Condition::cold_wood,
        classify::Condition::ambient_metal}) {
    for (const auto label : {classify::Label::wood, classify::Label::metal}) {
      out << classify::to_string(condition) << ','
          << classify::to_string(label) << ',' << cm.at(condition, label)
          << '\n';
    }
  }
}

inline json to_json(const studylab::StudyReport& report) {
  json folds = json::array();
  for (const auto& fold : report.cv.folds) {
    folds.push_back({{"held_out_metal", fold.held_out[0]},
                     {"held_out_wood", fold.held_out[1]},
                     {"held_out_cold_wood", fold.held_out[2]},
                     {"confusion", to_json(fold.confusion)}});
  }
  return {{"study", report.study},
          {"synthetic_data", true},
          {"fingerprint", report.fingerprint},
          {"runtime_seconds", report.runtime_seconds},
          {"svm", {{"lambda", report.svm.lambda},
                   {"epochs", report.svm.epochs},
                   {"seed", report.svm.seed}}},
          {"features",
           {{"n_resampled", report.features.n_resampled},
            {"t_max", report.features.t_max},
            {"include_passive", report.features.include_passive}}},
          {"aggregate_confusion", to_json(report.cv.aggregate)},
          {"aggregate_accuracy", report.cv.aggregate.accuracy()},
          {"cold_wood_predicted_metal_rate",
           report.cv.aggregate.rate(classify::Condition::cold_wood,
                                    classify::Label::metal)},
          {"folds", folds}};
}

inline json to_json(const studylab::TuneResult& result) {
  json candidates = json::array();
  for (const auto& [temp, gap] : result.candidates) {
    candidates.push_back({{"touched_temp", temp}, {"gap", gap}});
  }
  json j{{"touched_target", result.touched_target},
         {"boundary_warning", result.boundary_warning},
         {"candidates", candidates}};
  if (result.fridge_setting) j["fridge_setting"] = *result.fridge_setting;
  return j;
}

inline json to_json(const estimation::ThresholdSearchResult& result) {
  json grid = json::array();
  for (const auto& [gamma, objective] : result.grid) {
    grid.push_back({{"gamma", gamma}, {"objective", objective}});
  }
  return {{"gamma", result.gamma},
          {"p_mm", result.p_mm},
          {"p_w", result.p_w},
          {"grid", grid}};
}

inline void write_histogram_csv(const std::filesystem::path& path,
                                const studylab::EpsilonHistogram& hist) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot open for writing: " + path.string());
  out << "bin_lo,bin_hi,count,in_range\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    out << format_g9(hist.bin_lo[i]) << ',' << format_g9(hist.bin_hi[i]) << ','
        << hist.counts[i] << ',' << (hist.in_range[i] ? 1 : 0) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Trial records (deviation threshold / histogram inputs).
// ---------------------------------------------------------------------------

inline estimation::Answer answer_from_string(const std::string& s,
                                             const std::string& context) {
  if (s == "wood") return estimation::Answer::wood;
  if (s == "metal") return estimation::Answer::metal;
  throw InvalidConfig(context + ": answer must be 'wood' or 'metal'");
}

inline std::vector<estimation::TrialRecord> trials_from_json(const json& doc) {
  if (!doc.is_array()) throw InvalidConfig("trials: expected a JSON array");
  std::vector<estimation::TrialRecord> trials;
  for (const auto& entry : doc) {
    require_keys(entry, "trial",
                 {"finger_temp_avg", "intended_temp", "answers"});
    estimation::TrialRecord t;
    t.finger_temp_avg = entry.at("finger_temp_avg").get<double>();
    t.intended_temp = entry.at("intended_temp").get<double>();
    t.epsilon = t.intended_temp - t.finger_temp_avg;
    if (entry.contains("answers")) {
      for (const auto& [key, value] : entry.at("answers").items()) {
        t.answers[key] =
            answer_from_string(value.get<std::string>(), "trial answer");
      }
    }
    trials.push_back(std::move(t));
  }
  return trials;
}

// ---------------------------------------------------------------------------
// Dataset manifest.
// ---------------------------------------------------------------------------

inline std::string trace_filename(const studylab::TraceRecord& record) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "set%02d_trial%d_%s_%s.csv", record.set + 1,
                record.trial + 1, classify::to_string(record.condition),
                sensorsim::to_string(record.sensor));
  return buf;
}

inline json manifest_json(const studylab::StudyDataset& dataset) {
  json entries = json::array();
  for (const auto& record : dataset.traces) {
    entries.push_back(
        {{"file", trace_filename(record)},
         {"material", record.trace.material},
         {"condition", classify::to_string(record.condition)},
         {"label", record.condition == classify::Condition::ambient_metal
                       ? "metal"
                       : "wood"},
         {"block_id", record.trace.block_id},
         {"set", record.set + 1},
         {"trial", record.trial + 1},
         {"sensor", sensorsim::to_string(record.sensor)},
         {"seed", record.seed},
         {"object_temp", record.object_temp},
         {"contact_index", record.trace.contact_index ? json(*record.trace.contact_index)
                                                      : json()}});
  }
  const auto& cfg = dataset.config;
  return {{"synthetic_data", true},
          {"passive_geometry", "reuses the active sensor geometry"},
          {"base_seed", cfg.base_seed},
          {"fingerprint", dataset.fingerprint},
          {"ambiguous_target", dataset.ambiguous_target},
          {"n_sets", cfg.n_sets},
          {"trials_per_set", cfg.trials_per_set},
          {"ambient_temp", cfg.ambient_temp},
          {"active_init_temp", cfg.active_init_temp},
          {"cold_wood_jitter_sigma", cfg.cold_wood_jitter_sigma},
          {"t_max", cfg.t_max},
          {"sample_rate", cfg.sample_rate},
          {"pre_contact_duration", cfg.pre_contact_duration},
          {"nonideal",
           {{"noise_sigma", cfg.nonideal.noise_sigma},
            {"approach_conv_coeff", cfg.nonideal.approach_conv_coeff},
            {"contact_lag", cfg.nonideal.contact_lag}}},
          {"traces", entries}};
}

inline classify::Condition condition_from_string(const std::string& s) {
  if (s == "ambient_wood") return classify::Condition::ambient_wood;
  if (s == "cold_wood") return classify::Condition::cold_wood;
  if (s == "ambient_metal") return classify::Condition::ambient_metal;
  throw InvalidConfig("unknown material condition '" + s + "'");
}

/// Reconstructs a dataset from a directory written by write_dataset. Only
/// the fields the classification pipeline needs are restored.
inline studylab::StudyDataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw InvalidConfig("cannot open manifest: " +
                        (dir / "manifest.json").string());
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidConfig("manifest: " + std::string(e.what()));
  }

  studylab::StudyDataset dataset;
  dataset.fingerprint = get_or<std::uint64_t>(doc, "fingerprint", 0);
  dataset.ambiguous_target = get_or(doc, "ambiguous_target", 0.0);
  dataset.config.base_seed = get_or<std::uint64_t>(doc, "base_seed", 0);
  dataset.config.n_sets = get_or(doc, "n_sets", dataset.config.n_sets);
  dataset.config.trials_per_set =
      get_or(doc, "trials_per_set", dataset.config.trials_per_set);
  dataset.config.ambient_temp =
      get_or(doc, "ambient_temp", dataset.config.ambient_temp);
  dataset.config.active_init_temp =
      get_or(doc, "active_init_temp", dataset.config.active_init_temp);
  dataset.config.t_max = get_or(doc, "t_max", dataset.config.t_max);
  dataset.config.sample_rate =
      get_or(doc, "sample_rate", dataset.config.sample_rate);
  dataset.config.pre_contact_duration = get_or(
      doc, "pre_contact_duration", dataset.config.pre_contact_duration);

  for (const auto& entry : doc.at("traces")) {
    studylab::TraceRecord record;
    record.trace = read_trace_csv(dir / "traces" /
                                  entry.at("file").get<std::string>());
    record.condition =
        condition_from_string(entry.at("condition").get<std::string>());
    record.set = entry.at("set").get<int>() - 1;
    record.trial = entry.at("trial").get<int>() - 1;
    record.sensor = entry.at("sensor").get<std::string>() == "active"
                        ? sensorsim::SensorId::active
                        : sensorsim::SensorId::passive;
    record.seed = get_or<std::uint64_t>(entry, "seed", 0);
    record.object_temp = get_or(entry, "object_temp", 0.0);
    record.trace.seed = record.seed;
    record.trace.material = get_or<std::string>(entry, "material", "");
    record.trace.block_id = entry.at("block_id").get<std::string>();
    if (entry.contains("contact_index") && !entry.at("contact_index").is_null()) {
      record.trace.contact_index = entry.at("contact_index").get<std::size_t>();
    }
    dataset.traces.push_back(std::move(record));
  }
  return dataset;
}

inline void write_dataset(const std::filesystem::path& dir,
                          const studylab::StudyDataset& dataset) {
  std::filesystem::create_directories(dir / "traces");
  for (const auto& record : dataset.traces) {
    write_trace_csv(dir / "traces" / trace_filename(record), record.trace);
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) {
    throw InvalidConfig("cannot open for writing: " +
                        (dir / "manifest.json").string());
  }
  out << manifest_json(dataset).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Scenario file: one JSON document configuring the sensor, objects, trace
// synthesis, non-idealities, signal chain, and study regimen.
// ---------------------------------------------------------------------------

struct Scenario {
  heatcore::MaterialCatalog catalog = heatcore::MaterialCatalog::presets();
  heatcore::SensorSpec sensor{{{"robot sensor", 892.0, {}, {}, {}}, 29.5},
                              1.0e-7, 5.0e-4, true};
  std::vector<heatcore::BodyState> objects;
  sensorsim::TraceConfig trace;
  sensorsim::NonIdealityConfig nonideal;
  std::optional<sensorsim::SignalChainConfig> chain;
  studylab::StudyDatasetConfig study;
};

inline heatcore::ThermalMaterial material_from_json(
    const json& j, const heatcore::MaterialCatalog& catalog,
    const std::string& context) {
  if (j.is_string()) return catalog.at(j.get<std::string>());
  require_keys(j, context,
               {"name", "effusivity", "conductivity", "density",
                "specific_heat"});
  heatcore::ThermalMaterial m;
  m.name = get_or<std::string>(j, "name", "unnamed");
  if (!j.contains("effusivity")) {
    throw InvalidConfig(context + ": 'effusivity' is required");
  }
  m.effusivity = j.at("effusivity").get<double>();
  if (j.contains("conductivity"))
    m.conductivity = j.at("conductivity").get<double>();
  if (j.contains("density")) m.density = j.at("density").get<double>();
  if (j.contains("specific_heat"))
    m.specific_heat = j.at("specific_heat").get<double>();
  m.validate();
  return m;
}

inline sensorsim::SignalChainConfig chain_from_json(const json& j) {
  require_keys(j, "chain",
               {"thermistor_r0", "thermistor_t0", "beta", "reference_r",
                "supply", "adc_bits", "filter_cutoff"});
  sensorsim::SignalChainConfig chain;
  chain.thermistor_r0 = get_or(j, "thermistor_r0", chain.thermistor_r0);
  chain.thermistor_t0 = get_or(j, "thermistor_t0", chain.thermistor_t0);
  chain.beta = get_or(j, "beta", chain.beta);
  chain.reference_r = get_or(j, "reference_r", chain.reference_r);
  chain.supply = get_or(j, "supply", chain.supply);
  chain.adc_bits = get_or(j, "adc_bits", chain.adc_bits);
  chain.filter_cutoff = get_or(j, "filter_cutoff", chain.filter_cutoff);
  chain.validate();
  return chain;
}

inline Scenario scenario_from_json(const json& doc,
                                   const std::filesystem::path& base_dir) {
  require_keys(doc, "scenario",
               {"catalog", "sensor", "objects", "trace", "nonideal", "chain",
                "study"});
  Scenario scenario;

  if (doc.contains("catalog")) {
    const auto& c = doc.at("catalog");
    if (c.is_string()) {
      scenario.catalog =
          load_material_catalog(base_dir / c.get<std::string>());
    } else {
      scenario.catalog = catalog_from_json(c);
    }
  }

  if (doc.contains("sensor")) {
    const auto& s = doc.at("sensor");
    require_keys(s, "sensor",
                 {"material", "initial_temperature", "diffusivity",
                  "measurement_depth", "heated"});
    if (s.contains("material")) {
      scenario.sensor.body.material =
          material_from_json(s.at("material"), scenario.catalog, "sensor.material");
    }
    scenario.sensor.body.initial_temperature =
        get_or(s, "initial_temperature",
               scenario.sensor.body.initial_temperature);
    scenario.sensor.diffusivity =
        get_or(s, "diffusivity", scenario.sensor.diffusivity);
    scenario.sensor.measurement_depth =
        get_or(s, "measurement_depth", scenario.sensor.measurement_depth);
    scenario.sensor.heated = get_or(s, "heated", scenario.sensor.heated);
    scenario.sensor.validate();
  }

  if (doc.contains("objects")) {
    for (const auto& o : doc.at("objects")) {
      require_keys(o, "object", {"material", "temperature"});
      heatcore::BodyState body;
      body.material =
          material_from_json(o.at("material"), scenario.catalog, "object.material");
      body.initial_temperature = get_or(o, "temperature", 22.5);
      body.validate();
      scenario.objects.push_back(std::move(body));
    }
  }

  scenario.trace.sensor = scenario.sensor;
  if (doc.contains("trace")) {
    const auto& t = doc.at("trace");
    require_keys(t, "trace",
                 {"t_max", "sample_rate", "pre_contact_duration",
                  "ambient_temperature", "seed"});
    scenario.trace.t_max = get_or(t, "t_max", scenario.trace.t_max);
    scenario.trace.sample_rate =
        get_or(t, "sample_rate", scenario.trace.sample_rate);
    scenario.trace.pre_contact_duration =
        get_or(t, "pre_contact_duration", scenario.trace.pre_contact_duration);
    scenario.trace.ambient_temperature =
        get_or(t, "ambient_temperature", scenario.trace.ambient_temperature);
    scenario.trace.seed = get_or(t, "seed", scenario.trace.seed);
  }

  if (doc.contains("nonideal")) {
    const auto& n = doc.at("nonideal");
    require_keys(n, "nonideal",
                 {"noise_sigma", "approach_conv_coeff", "contact_lag"});
    scenario.nonideal.noise_sigma =
        get_or(n, "noise_sigma", scenario.nonideal.noise_sigma);
    scenario.nonideal.approach_conv_coeff =
        get_or(n, "approach_conv_coeff", scenario.nonideal.approach_conv_coeff);
    scenario.nonideal.contact_lag =
        get_or(n, "contact_lag", scenario.nonideal.contact_lag);
    scenario.nonideal.validate();
  }

  if (doc.contains("chain") && !doc.at("chain").is_null()) {
    scenario.chain = chain_from_json(doc.at("chain"));
  }

  // Study regimen defaults follow the scenario-level sections; timing keys
  // live in the study section itself (the regimen keeps its own approach
  // window regardless of the plain-simulation trace settings).
  scenario.study.sensor_material = scenario.sensor.body.material;
  scenario.study.active_init_temp = scenario.sensor.body.initial_temperature;
  scenario.study.sensor_diffusivity = scenario.sensor.diffusivity;
  scenario.study.measurement_depth = scenario.sensor.measurement_depth;
  scenario.study.ambient_temp = scenario.trace.ambient_temperature;
  scenario.study.nonideal = scenario.nonideal;
  scenario.study.chain = scenario.chain;
  scenario.study.base_seed = scenario.trace.seed;
  if (doc.contains("study")) {
    const auto& s = doc.at("study");
    require_keys(s, "study",
                 {"n_sets", "trials_per_set", "wood", "metal",
                  "cold_wood_target", "cold_wood_jitter_sigma", "base_seed",
                  "t_max", "sample_rate", "pre_contact_duration"});
    scenario.study.n_sets = get_or(s, "n_sets", scenario.study.n_sets);
    scenario.study.trials_per_set =
        get_or(s, "trials_per_set", scenario.study.trials_per_set);
    scenario.study.t_max = get_or(s, "t_max", scenario.study.t_max);
    scenario.study.sample_rate =
        get_or(s, "sample_rate", scenario.study.sample_rate);
    scenario.study.pre_contact_duration = get_or(
        s, "pre_contact_duration", scenario.study.pre_contact_duration);
    if (s.contains("wood")) {
      scenario.study.wood =
          material_from_json(s.at("wood"), scenario.catalog, "study.wood");
    }
    if (s.contains("metal")) {
      scenario.study.metal =
          material_from_json(s.at("metal"), scenario.catalog, "study.metal");
    }
    if (s.contains("cold_wood_target") && !s.at("cold_wood_target").is_null()) {
      scenario.study.cold_wood_target = s.at("cold_wood_target").get<double>();
    }
    scenario.study.cold_wood_jitter_sigma = get_or(
        s, "cold_wood_jitter_sigma", scenario.study.cold_wood_jitter_sigma);
    scenario.study.base_seed = get_or(s, "base_seed", scenario.study.base_seed);
  }
  scenario.study.validate();
  return scenario;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open scenario: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidConfig("scenario " + path.string() + ": " + e.what());
  }
  return scenario_from_json(doc, path.parent_path());
}

}  // namespace thermoscope::io
