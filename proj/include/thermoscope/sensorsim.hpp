#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermoscope/errors.hpp"
#include "thermoscope/heatcore.hpp"
#include "thermoscope/rng.hpp"

// Synthetic sensor traces: the ideal contact model plus a phenomenological
// approach/contact non-ideality stage, per-sample Gaussian noise, and an
// optional model of the measurement electronics (NTC thermistor in a
// voltage divider, ADC quantization, 2nd-order Butterworth low-pass).
// Every trace is a pure function of its configuration, so datasets are
// reproducible bit for bit regardless of scheduling.

namespace thermoscope::sensorsim {

using heatcore::BodyState;
using heatcore::SensorSpec;

enum class SensorId { active, passive };

inline const char* to_string(SensorId id) {
  return id == SensorId::active ? "active" : "passive";
}

struct TraceConfig {
  SensorSpec sensor;
  BodyState object;
  double t_max = 5.0;                 // s of contact to simulate
  double sample_rate = 50.0;          // Hz
  double pre_contact_duration = 0.0;  // s of approach before contact
  double ambient_temperature = 22.5;  // °C, air the sensor approaches through
  std::uint64_t seed = 0;

  void validate() const {
    sensor.validate();
    object.validate();
    if (!(t_max > 0.0)) throw InvalidConfig("TraceConfig: t_max must be > 0");
    if (!(sample_rate > 0.0)) {
      throw InvalidConfig("TraceConfig: sample rate must be > 0");
    }
    if (!(pre_contact_duration >= 0.0)) {
      throw InvalidConfig("TraceConfig: pre-contact duration must be >= 0");
    }
    if (!std::isfinite(ambient_temperature) ||
        std::fabs(ambient_temperature) >= 200.0) {
      throw InvalidConfig("TraceConfig: |ambient temperature| must be < 200 C");
    }
  }
};

/// Knobs for the non-ideal effects; zero disables each one.
///   noise_sigma        per-sample Gaussian noise, °C
///   approach_conv_coeff  convective pull toward the air blend during the
///                        approach, s⁻¹ (drives the early-slope separation
///                        between cold and ambient objects)
///   contact_lag        first-order sensing lag after contact, s
struct NonIdealityConfig {
  double noise_sigma = 0.0;
  double approach_conv_coeff = 0.0;
  double contact_lag = 0.0;

  void validate() const {
    if (!(noise_sigma >= 0.0) || !(approach_conv_coeff >= 0.0) ||
        !(contact_lag >= 0.0)) {
      throw InvalidConfig("NonIdealityConfig: all parameters must be >= 0");
    }
  }

  static NonIdealityConfig none() { return {}; }
  /// Defaults used for the realistic study datasets.
  static NonIdealityConfig realistic() { return {0.05, 0.1, 0.15}; }
};

struct TemperatureTrace {
  std::vector<double> times;         // s, uniform, strictly increasing
  std::vector<double> temperatures;  // °C, same length
  SensorId sensor_id = SensorId::active;
  std::optional<std::size_t> contact_index;
  std::uint64_t seed = 0;
  std::string material;  // label metadata
  std::string block_id;  // label metadata

  void validate() const {
    if (times.empty() || times.size() != temperatures.size()) {
      throw InvalidConfig(
          "TemperatureTrace: arrays must be non-empty and equal length");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!(times[i] > times[i - 1])) {
        throw InvalidConfig(
            "TemperatureTrace: times must be strictly increasing");
      }
    }
  }
};

/// Measurement electronics: beta-model NTC thermistor, voltage divider,
/// ADC, and a 2nd-order Butterworth low-pass.
struct SignalChainConfig {
  double thermistor_r0 = 10'000.0;   // Ω at reference temperature
  double thermistor_t0 = 25.0;       // °C reference temperature
  double beta = 3977.0;              // K
  double reference_r = 10'000.0;     // Ω
  double supply = 3.3;               // V
  int adc_bits = 12;
  double filter_cutoff = 10.0;       // Hz

  void validate() const {
    if (!(thermistor_r0 > 0.0) || !(beta > 0.0) || !(reference_r > 0.0) ||
        !(supply > 0.0) || !(filter_cutoff > 0.0)) {
      throw InvalidConfig("SignalChainConfig: parameters must be > 0");
    }
    if (adc_bits < 8 || adc_bits > 16) {
      throw InvalidConfig("SignalChainConfig: adc_bits must be in [8, 16]");
    }
    if (!std::isfinite(thermistor_t0)) {
      throw InvalidConfig("SignalChainConfig: reference temperature invalid");
    }
  }
};

/// 2nd-order Butterworth low-pass, bilinear transform, direct form I.
class ButterworthLowPass {
 public:
  ButterworthLowPass(double cutoff_hz, double sample_rate_hz) {
    if (!(cutoff_hz > 0.0) || !(sample_rate_hz > 2.0 * cutoff_hz)) {
      throw InvalidConfig(
          "ButterworthLowPass: need 0 < cutoff < sample_rate / 2");
    }
    const double k = std::tan(3.14159265358979323846 * cutoff_hz /
                              sample_rate_hz);
    const double k2 = k * k;
    const double norm = 1.0 / (1.0 + std::sqrt(2.0) * k + k2);
    b0_ = k2 * norm;
    b1_ = 2.0 * b0_;
    b2_ = b0_;
    a1_ = 2.0 * (k2 - 1.0) * norm;
    a2_ = (1.0 - std::sqrt(2.0) * k + k2) * norm;
  }

  /// Seeds the state as if the input had been `value` forever; a constant
  /// input then passes through unchanged from the first sample.
  void prime(double value) { x1_ = x2_ = y1_ = y2_ = value; }

  double step(double x) {
    const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
    x2_ = x1_;
    x1_ = x;
    y2_ = y1_;
    y1_ = y;
    return y;
  }

 private:
  double b0_ = 1.0, b1_ = 0.0, b2_ = 0.0, a1_ = 0.0, a2_ = 0.0;
  double x1_ = 0.0, x2_ = 0.0, y1_ = 0.0, y2_ = 0.0;
};

/// Synthesizes one trace. Timeline: samples at 1/sample_rate spacing cover
/// [0, pre_contact_duration + t_max]; contact happens at the sample nearest
/// pre_contact_duration.
///
/// Pre-contact, the sensor temperature relaxes toward the blend of ambient
/// air and the object surface (midpoint) at rate approach_conv_coeff; the
/// drifted value at contact becomes the sensor's effective initial
/// temperature for the contact model, so a colder object leaves a different
/// signature on the post-contact transient. Post-contact, the ideal contact
/// response passes through a first-order lag of time constant contact_lag.
/// Independent Gaussian noise is added per sample.
inline TemperatureTrace synthesize_trace(const TraceConfig& cfg,
                                         const NonIdealityConfig& nonideal) {
  cfg.validate();
  nonideal.validate();

  const double dt = 1.0 / cfg.sample_rate;
  const auto contact =
      static_cast<std::size_t>(std::llround(cfg.pre_contact_duration *
                                            cfg.sample_rate));
  const auto n = contact + static_cast<std::size_t>(std::llround(
                               cfg.t_max * cfg.sample_rate)) + 1;

  TemperatureTrace trace;
  trace.times.resize(n);
  trace.temperatures.resize(n);
  trace.sensor_id = cfg.sensor.heated ? SensorId::active : SensorId::passive;
  trace.contact_index = contact;
  trace.seed = cfg.seed;
  trace.material = cfg.object.material.name;

  const double sensor_start = cfg.sensor.body.initial_temperature;
  const double blend = 0.5 * (cfg.ambient_temperature +
                              cfg.object.initial_temperature);
  const double h = nonideal.approach_conv_coeff;

  auto approach = [&](double t) {
    if (h == 0.0) return sensor_start;
    return blend + (sensor_start - blend) * std::exp(-h * t);
  };

  // Sensor state at the moment of contact feeds the contact model.
  SensorSpec effective = cfg.sensor;
  effective.body.initial_temperature =
      approach(static_cast<double>(contact) * dt);

  const double tau = nonideal.contact_lag;
  const double lag_keep = tau > 0.0 ? std::exp(-dt / tau) : 0.0;

  double lagged = effective.body.initial_temperature;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    trace.times[i] = t;
    if (i < contact) {
      trace.temperatures[i] = approach(t);
    } else {
      const double ideal = heatcore::measured_temperature(
          effective, cfg.object, static_cast<double>(i - contact) * dt);
      if (tau > 0.0 && i > contact) {
        lagged = ideal + (lagged - ideal) * lag_keep;
      } else {
        lagged = ideal;
      }
      trace.temperatures[i] = lagged;
    }
  }

  if (nonideal.noise_sigma > 0.0) {
    rng::SplitMix64 noise(rng::derive(cfg.seed, 0x6E6F6973));  // "nois"
    for (auto& sample : trace.temperatures) {
      sample += nonideal.noise_sigma * noise.normal();
    }
  }
  return trace;
}

namespace detail {

/// Robust per-sample noise scale from successive differences
/// (median |ΔT| / (sqrt(2) · Φ⁻¹(3/4))); exact for white Gaussian noise on
/// a locally flat signal.
inline double estimate_noise_sigma(const std::vector<double>& temps) {
  if (temps.size() < 2) return 0.0;
  std::vector<double> diffs(temps.size() - 1);
  for (std::size_t i = 0; i + 1 < temps.size(); ++i) {
    diffs[i] = std::fabs(temps[i + 1] - temps[i]);
  }
  const std::size_t mid = diffs.size() / 2;
  std::nth_element(diffs.begin(), diffs.begin() + mid, diffs.end());
  return diffs[mid] / (std::sqrt(2.0) * 0.6744897501960817);
}

}  // namespace detail

/// Contact sample index. Active (heated) sensors: the global temperature
/// maximum, earliest on ties. Passive sensors: the onset of the steepest
/// temperature change. Throws NoContact when the trace's excursion is
/// indistinguishable from its noise floor (range <= 10x estimated sigma).
inline std::size_t detect_contact(const TemperatureTrace& trace) {
  trace.validate();
  const auto& temps = trace.temperatures;
  // max_element keeps the earliest of tied peaks (the tie rule here).
  const auto hi_it = std::max_element(temps.begin(), temps.end());
  const auto lo_it = std::min_element(temps.begin(), temps.end());
  const double range = *hi_it - *lo_it;
  const double sigma = detail::estimate_noise_sigma(temps);
  if (range <= 10.0 * sigma) {
    throw NoContact("detect_contact: trace variation below noise floor");
  }
  if (trace.sensor_id == SensorId::active) {
    return static_cast<std::size_t>(hi_it - temps.begin());
  }
  std::size_t best = 0;
  double best_rate = -1.0;
  for (std::size_t i = 0; i + 1 < temps.size(); ++i) {
    const double rate = std::fabs(temps[i + 1] - temps[i]);
    if (rate > best_rate) {
      best_rate = rate;
      best = i;
    }
  }
  return best;
}

/// Runs true temperatures through the electronics: thermistor resistance
/// R(T) = R0 exp(beta (1/T_K - 1/T0_K)), divider voltage
/// V = supply · R_ref / (R_ref + R), ADC quantization (round half away from
/// zero), inverse map back to temperature, then the Butterworth low-pass
/// applied forward in time.
inline std::vector<double> apply_signal_chain(std::span<const double> true_temps,
                                              const SignalChainConfig& cfg,
                                              double sample_rate) {
  cfg.validate();
  if (!(sample_rate > 2.0 * cfg.filter_cutoff)) {
    throw InvalidConfig(
        "apply_signal_chain: sample rate must exceed twice the cutoff");
  }
  const double t0_kelvin = cfg.thermistor_t0 + 273.15;
  const double max_code = std::pow(2.0, cfg.adc_bits) - 1.0;

  std::vector<double> out;
  out.reserve(true_temps.size());
  for (const double temp : true_temps) {
    const double t_kelvin = temp + 273.15;
    if (!(t_kelvin > 0.0)) {
      throw OutOfRange("apply_signal_chain: temperature below 0 K");
    }
    const double resistance =
        cfg.thermistor_r0 *
        std::exp(cfg.beta * (1.0 / t_kelvin - 1.0 / t0_kelvin));
    const double volts =
        cfg.supply * cfg.reference_r / (cfg.reference_r + resistance);
    const double code = std::round(volts / cfg.supply * max_code);
    if (code <= 0.0 || code >= max_code) {
      throw OutOfRange(
          "apply_signal_chain: temperature outside the ADC-representable band");
    }
    const double volts_q = code / max_code * cfg.supply;
    const double resistance_q =
        cfg.reference_r * (cfg.supply - volts_q) / volts_q;
    const double t_q =
        1.0 / (1.0 / t0_kelvin +
               std::log(resistance_q / cfg.thermistor_r0) / cfg.beta) -
        273.15;
    out.push_back(t_q);
  }

  ButterworthLowPass filter(cfg.filter_cutoff, sample_rate);
  if (!out.empty()) filter.prime(out.front());
  for (auto& sample : out) sample = filter.step(sample);
  return out;
}

/// Simulates the sensor pair: the configured (heated) sensor plus a
/// passive sensor of identical geometry initialized at passive_temp,
/// touching the same object on the same timeline with independent noise
/// streams. The optional signal chain applies to both traces.
inline std::pair<TemperatureTrace, TemperatureTrace> simulate_double_condition(
    const TraceConfig& cfg, double passive_temp,
    const NonIdealityConfig& nonideal,
    const std::optional<SignalChainConfig>& chain = {}) {
  TraceConfig active_cfg = cfg;
  active_cfg.sensor.heated = true;
  active_cfg.seed = rng::derive(cfg.seed, 1);

  TraceConfig passive_cfg = cfg;
  passive_cfg.sensor.heated = false;
  passive_cfg.sensor.body.initial_temperature = passive_temp;
  passive_cfg.seed = rng::derive(cfg.seed, 2);

  auto active = synthesize_trace(active_cfg, nonideal);
  auto passive = synthesize_trace(passive_cfg, nonideal);
  if (chain) {
    active.temperatures =
        apply_signal_chain(active.temperatures, *chain, cfg.sample_rate);
    passive.temperatures =
        apply_signal_chain(passive.temperatures, *chain, cfg.sample_rate);
  }
  return {std::move(active), std::move(passive)};
}

}  // namespace thermoscope::sensorsim
