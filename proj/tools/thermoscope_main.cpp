// Command-line front end: batch in, files out. Every subcommand prints one
// JSON document to stdout; diagnostics go to stderr. Exit codes: 0 success,
// 2 invalid input or configuration, 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermoscope/ambiguity.hpp"
#include "thermoscope/classify.hpp"
#include "thermoscope/errors.hpp"
#include "thermoscope/estimation.hpp"
#include "thermoscope/heatcore.hpp"
#include "thermoscope/io.hpp"
#include "thermoscope/sensorsim.hpp"
#include "thermoscope/studylab.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace thermoscope;

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumericalFailure = 3;

void emit(const json& doc) { std::cout << doc.dump(2) << "\n"; }

/// THERMOSCOPE_SEED overrides every scenario-provided base seed.
std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("THERMOSCOPE_SEED");
  if (raw == nullptr || *raw == '\0') return {};
  try {
    return std::stoull(raw);
  } catch (const std::exception&) {
    throw InvalidConfig("THERMOSCOPE_SEED must be an unsigned integer");
  }
}

io::Scenario load_scenario_with_env(const std::string& path) {
  io::Scenario scenario = io::load_scenario(path);
  if (const auto seed = env_seed()) {
    scenario.trace.seed = *seed;
    scenario.study.base_seed = *seed;
  }
  return scenario;
}

heatcore::BodyState resolve_object(const io::Scenario& scenario,
                                   const std::string& name) {
  for (const auto& object : scenario.objects) {
    if (object.material.name == name) return object;
  }
  return {scenario.catalog.at(name), scenario.trace.ambient_temperature};
}

ambiguity::SweepDomain domain_from_string(const std::string& s) {
  if (s == "full") return ambiguity::SweepDomain::full;
  if (s == "equal-sensor") return ambiguity::SweepDomain::equal_sensor_effusivity;
  if (s == "exploratory") return ambiguity::SweepDomain::exploratory;
  throw InvalidConfig("unknown sweep domain '" + s + "'");
}

int cmd_predict(const std::string& scenario_path, const std::string& object1,
                std::optional<double> target_effusivity,
                const std::string& object2) {
  const auto scenario = load_scenario_with_env(scenario_path);
  const auto first = resolve_object(scenario, object1);
  double target_e;
  std::string target_name;
  if (target_effusivity) {
    target_e = *target_effusivity;
    target_name = "explicit";
  } else if (!object2.empty()) {
    const auto second = resolve_object(scenario, object2);
    target_e = second.material.effusivity;
    target_name = second.material.name;
  } else {
    throw InvalidConfig("predict: need --target-effusivity or --object2");
  }

  ambiguity::AmbiguityQuery query{scenario.sensor.body, first, target_e};
  const double ambiguous = ambiguity::ambiguous_object_temperature(query);

  heatcore::BodyState second{{target_name, target_e, {}, {}, {}}, ambiguous};
  const double residual = ambiguity::verify_ambiguity(
      scenario.sensor, first, second, scenario.trace.t_max, 1000);

  emit({{"object1", first.material.name},
        {"object1_temp", first.initial_temperature},
        {"sensor_temp", scenario.sensor.body.initial_temperature},
        {"sensor_effusivity", scenario.sensor.body.material.effusivity},
        {"target_effusivity", target_e},
        {"ambiguous_temperature", ambiguous},
        {"residual", residual}});
  return kExitOk;
}

int cmd_verify_proof(std::size_t samples, std::uint64_t seed,
                     const std::string& domain, const std::string& out_path) {
  const auto report =
      ambiguity::proof_sweep(samples, seed, domain_from_string(domain));
  const json doc = io::to_json(report);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidConfig("cannot open for writing: " + out_path);
    out << doc.dump(2) << "\n";
  }
  emit(doc);
  return report.violations == 0 ? kExitOk : kExitNumericalFailure;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::string& object_name, bool double_condition) {
  const auto scenario = load_scenario_with_env(scenario_path);

  sensorsim::TraceConfig cfg = scenario.trace;
  cfg.sensor = scenario.sensor;
  if (!object_name.empty()) {
    cfg.object = resolve_object(scenario, object_name);
  } else if (!scenario.objects.empty()) {
    cfg.object = scenario.objects.front();
  } else {
    throw InvalidConfig("simulate: scenario has no objects; use --object");
  }

  fs::create_directories(out_dir);
  json files = json::array();
  if (double_condition) {
    const auto [active, passive] = sensorsim::simulate_double_condition(
        cfg, cfg.ambient_temperature, scenario.nonideal, scenario.chain);
    io::write_trace_csv(fs::path(out_dir) / "active.csv", active);
    io::write_trace_csv(fs::path(out_dir) / "passive.csv", passive);
    files.push_back("active.csv");
    files.push_back("passive.csv");
  } else {
    auto trace = sensorsim::synthesize_trace(cfg, scenario.nonideal);
    if (scenario.chain) {
      trace.temperatures = sensorsim::apply_signal_chain(
          trace.temperatures, *scenario.chain, cfg.sample_rate);
    }
    io::write_trace_csv(fs::path(out_dir) / "trace.csv", trace);
    files.push_back("trace.csv");
  }
  emit({{"out_dir", out_dir},
        {"files", files},
        {"object", cfg.object.material.name},
        {"object_temp", cfg.object.initial_temperature},
        {"seed", cfg.seed},
        {"synthetic_data", true}});
  return kExitOk;
}

int cmd_fit(const std::string& trace_path, double sensor_effusivity,
            double sensor_temp, double diffusivity, double depth,
            double object_temp, const std::string& bounds_text,
            const std::string& out_path) {
  const auto comma = bounds_text.find(',');
  if (comma == std::string::npos) {
    throw InvalidConfig("fit: --bounds expects 'lo,hi'");
  }
  double lo, hi;
  try {
    lo = std::stod(bounds_text.substr(0, comma));
    hi = std::stod(bounds_text.substr(comma + 1));
  } catch (const std::exception&) {
    throw InvalidConfig("fit: --bounds expects 'lo,hi' numbers");
  }

  const auto trace = io::read_trace_csv(trace_path);
  heatcore::SensorSpec sensor{{{"sensor", sensor_effusivity, {}, {}, {}},
                               sensor_temp},
                              diffusivity, depth, true};
  const auto fit =
      estimation::fit_effusivity(trace, sensor, object_temp, lo, hi);
  const json doc = io::to_json(fit);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw InvalidConfig("cannot open for writing: " + out_path);
    out << doc.dump(2) << "\n";
  }
  emit(doc);
  return kExitOk;
}

void write_study_outputs(const fs::path& dir,
                         const studylab::StudyDataset& dataset,
                         const studylab::StudyReport& report) {
  fs::create_directories(dir);
  std::ofstream report_out(dir / "report.json");
  if (!report_out) {
    throw InvalidConfig("cannot open for writing: " +
                        (dir / "report.json").string());
  }
  report_out << io::to_json(report).dump(2) << "\n";
  io::write_confusion_csv(dir / "confusion.csv", report.cv.aggregate);

  // Cold-wood preparation deviations, binned like the trial-deviation
  // histogram: epsilon = planned target minus actually-touched temperature.
  std::vector<estimation::TrialRecord> prep;
  for (const auto& record : dataset.traces) {
    if (record.condition != classify::Condition::cold_wood ||
        record.sensor != sensorsim::SensorId::active) {
      continue;
    }
    estimation::TrialRecord trial;
    trial.finger_temp_avg = record.object_temp;
    trial.intended_temp = dataset.ambiguous_target;
    trial.epsilon = trial.intended_temp - trial.finger_temp_avg;
    prep.push_back(trial);
  }
  if (!prep.empty()) {
    io::write_histogram_csv(dir / "histogram.csv",
                            studylab::epsilon_histogram(prep, 3.5, 0.5));
  }
}

int cmd_study(int study, const std::string& scenario_path,
              const std::string& out_dir, int jobs) {
  const auto scenario = load_scenario_with_env(scenario_path);
  const auto dataset = studylab::generate_study_dataset(scenario.study, jobs);
  const auto report = studylab::run_study(study, dataset);

  const fs::path dir(out_dir);
  io::write_dataset(dir, dataset);
  write_study_outputs(dir, dataset, report);
  emit(io::to_json(report));
  return kExitOk;
}

int cmd_classify(const std::string& dataset_dir, int study,
                 const std::string& out_dir) {
  const auto dataset = io::read_dataset(dataset_dir);
  const auto report = studylab::run_study(study, dataset);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::ofstream out(fs::path(out_dir) / "report.json");
    if (!out) {
      throw InvalidConfig("cannot open for writing: " + out_dir +
                          "/report.json");
    }
    out << io::to_json(report).dump(2) << "\n";
    io::write_confusion_csv(fs::path(out_dir) / "confusion.csv",
                            report.cv.aggregate);
  }
  emit(io::to_json(report));
  return kExitOk;
}

int cmd_tune_target(const std::string& scenario_path, double step, double span,
                    std::optional<double> warming_slope,
                    std::optional<double> warming_intercept, double delay) {
  const auto scenario = load_scenario_with_env(scenario_path);
  std::optional<studylab::ColdPrepConfig> prep;
  if (warming_slope && warming_intercept) {
    prep = studylab::ColdPrepConfig{{*warming_slope, *warming_intercept},
                                    delay};
  } else if (warming_slope || warming_intercept) {
    throw InvalidConfig(
        "tune-target: --warming-slope and --warming-intercept go together");
  }

  heatcore::BodyState metal{scenario.study.metal, scenario.study.ambient_temp};
  heatcore::SensorSpec sensor = scenario.study.active_sensor();
  const auto result = studylab::tune_ambiguous_target(
      sensor, metal, scenario.study.wood.effusivity, step, span, prep);
  emit(io::to_json(result));
  return kExitOk;
}

int cmd_histogram(const std::string& trials_path, double gamma,
                  double bin_width, const std::string& out_path) {
  std::ifstream in(trials_path);
  if (!in) throw InvalidConfig("cannot open trials: " + trials_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidConfig("trials " + trials_path + ": " + e.what());
  }
  const auto trials = io::trials_from_json(doc);
  const auto hist = studylab::epsilon_histogram(trials, gamma, bin_width);
  if (!out_path.empty()) io::write_histogram_csv(out_path, hist);

  json bins = json::array();
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    bins.push_back({{"bin_lo", hist.bin_lo[i]},
                    {"bin_hi", hist.bin_hi[i]},
                    {"count", hist.counts[i]},
                    {"in_range", static_cast<bool>(hist.in_range[i])}});
  }
  emit({{"gamma", gamma}, {"bin_width", bin_width}, {"bins", bins}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"thermoscope: contact heat-transfer material recognition lab"};
  app.require_subcommand(1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "worker thread cap (output is identical "
                                 "for any value)")
      ->check(CLI::PositiveNumber);

  // predict
  auto* predict = app.add_subcommand(
      "predict", "ambiguous temperature for a target effusivity");
  std::string predict_scenario, predict_object1, predict_object2;
  std::optional<double> predict_target_e;
  predict->add_option("--scenario", predict_scenario)->required();
  predict->add_option("--object1", predict_object1)->required();
  predict->add_option("--target-effusivity", predict_target_e);
  predict->add_option("--object2", predict_object2);

  // verify-proof
  auto* verify = app.add_subcommand(
      "verify-proof", "randomized distinctness certification sweep");
  std::size_t verify_samples = 10'000;
  std::uint64_t verify_seed = 0;
  std::string verify_domain = "full", verify_out;
  verify->add_option("--samples", verify_samples);
  verify->add_option("--seed", verify_seed);
  verify->add_option("--domain", verify_domain)
      ->check(CLI::IsMember({"full", "equal-sensor", "exploratory"}));
  verify->add_option("--out", verify_out);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "synthesize trace CSVs");
  std::string sim_scenario, sim_out, sim_object;
  bool sim_double = false;
  simulate->add_option("--scenario", sim_scenario)->required();
  simulate->add_option("--out", sim_out)->required();
  simulate->add_option("--object", sim_object);
  simulate->add_flag("--double", sim_double,
                     "simulate the active/passive sensor pair");

  // fit
  auto* fit = app.add_subcommand("fit", "fit object effusivity to a trace");
  std::string fit_trace, fit_bounds = "50,50000", fit_out;
  double fit_sensor_e = 892.0, fit_sensor_temp = 29.5;
  double fit_diffusivity = 1.0e-7, fit_depth = 5.0e-4, fit_object_temp = 22.5;
  fit->add_option("--trace", fit_trace)->required();
  fit->add_option("--sensor-effusivity", fit_sensor_e);
  fit->add_option("--sensor-temp", fit_sensor_temp);
  fit->add_option("--diffusivity", fit_diffusivity);
  fit->add_option("--depth", fit_depth);
  fit->add_option("--object-temp", fit_object_temp);
  fit->add_option("--bounds", fit_bounds, "effusivity bounds 'lo,hi'");
  fit->add_option("--out", fit_out);

  // classify
  auto* classify_cmd = app.add_subcommand(
      "classify", "leave-one-block-out evaluation of an existing dataset");
  std::string classify_dir, classify_out;
  int classify_study = 1;
  classify_cmd->add_option("--dataset", classify_dir)->required();
  classify_cmd->add_option("--study", classify_study)->required();
  classify_cmd->add_option("--out", classify_out);

  // study
  auto* study_cmd = app.add_subcommand(
      "study", "generate the trace regimen and run one study end to end");
  std::string study_scenario, study_out;
  int study_id = 1;
  study_cmd->add_option("--study", study_id)->required();
  study_cmd->add_option("--scenario", study_scenario)->required();
  study_cmd->add_option("--out", study_out)->required();

  // tune-target
  auto* tune = app.add_subcommand(
      "tune-target", "grid search for the ambiguous refrigeration target");
  std::string tune_scenario;
  double tune_step = 1.0, tune_span = 3.0, tune_delay = 5.0;
  std::optional<double> tune_slope, tune_intercept;
  tune->add_option("--scenario", tune_scenario)->required();
  tune->add_option("--step", tune_step);
  tune->add_option("--span", tune_span);
  tune->add_option("--warming-slope", tune_slope);
  tune->add_option("--warming-intercept", tune_intercept);
  tune->add_option("--delay", tune_delay);

  // histogram
  auto* hist = app.add_subcommand(
      "histogram", "bin trial deviations around the intended condition");
  std::string hist_trials, hist_out;
  double hist_gamma = 3.5, hist_bin = 0.5;
  hist->add_option("--trials", hist_trials)->required();
  hist->add_option("--gamma", hist_gamma);
  hist->add_option("--bin-width", hist_bin);
  hist->add_option("--out", hist_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }

  try {
    if (*predict) {
      return cmd_predict(predict_scenario, predict_object1, predict_target_e,
                         predict_object2);
    }
    if (*verify) {
      return cmd_verify_proof(verify_samples, verify_seed, verify_domain,
                              verify_out);
    }
    if (*simulate) {
      return cmd_simulate(sim_scenario, sim_out, sim_object, sim_double);
    }
    if (*fit) {
      return cmd_fit(fit_trace, fit_sensor_e, fit_sensor_temp, fit_diffusivity,
                     fit_depth, fit_object_temp, fit_bounds, fit_out);
    }
    if (*classify_cmd) {
      return cmd_classify(classify_dir, classify_study, classify_out);
    }
    if (*study_cmd) {
      return cmd_study(study_id, study_scenario, study_out, jobs);
    }
    if (*tune) {
      return cmd_tune_target(tune_scenario, tune_step, tune_span, tune_slope,
                             tune_intercept, tune_delay);
    }
    if (*hist) {
      return cmd_histogram(hist_trials, hist_gamma, hist_bin, hist_out);
    }
  } catch (const UnknownStudy& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  } catch (const std::logic_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}
