#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thermoscope/errors.hpp"
#include "thermoscope/heatcore.hpp"
#include "thermoscope/sensorsim.hpp"

// Parameter estimation from temperature traces: object effusivity by
// box-constrained quasi-Newton least squares, the cold-block warming
// correction line, and the finger-temperature deviation threshold search.

namespace thermoscope::estimation {

using heatcore::BodyState;
using heatcore::SensorSpec;
using sensorsim::TemperatureTrace;

struct FitResult {
  double estimate = 0.0;
  double residual_sse = 0.0;  // °C²
  int iterations = 0;
  bool converged = false;
  std::array<double, 2> bounds{0.0, 0.0};
};

namespace detail {

/// Box-constrained quasi-Newton minimizer for smooth scalar objectives.
/// Central-difference gradients, secant curvature with a second-difference
/// fallback, Armijo backtracking; the objective never increases across
/// accepted iterations.
struct ScalarMinimizer {
  double lo, hi;
  double step_tol;      // absolute, in x units
  int max_iterations = 200;

  template <typename F>
  FitResult minimize(F&& objective, double x0) const {
    const double fd_step = 1e-7 * (hi - lo);
    auto clamp = [&](double v) { return std::clamp(v, lo, hi); };
    auto grad = [&](double x) {
      const double a = clamp(x + fd_step), b = clamp(x - fd_step);
      return (objective(a) - objective(b)) / (a - b);
    };

    double x = clamp(x0);
    double fx = objective(x);
    double g = grad(x);
    double prev_x = x, prev_g = g;
    bool have_prev = false;

    FitResult result;
    result.bounds = {lo, hi};
    int iter = 0;
    for (; iter < max_iterations; ++iter) {
      // Curvature: secant when informative, second difference otherwise.
      double curvature = 0.0;
      if (have_prev && x != prev_x) {
        curvature = (g - prev_g) / (x - prev_x);
      }
      if (!(curvature > 1e-300)) {
        const double a = clamp(x + fd_step), b = clamp(x - fd_step);
        curvature = (objective(a) - 2.0 * fx + objective(b)) /
                    (0.25 * (a - b) * (a - b));
      }
      double step = curvature > 1e-300 ? -g / curvature
                                       : -g * (hi - lo) /
                                             (std::fabs(g) + 1e-300);
      step = std::clamp(step, -(hi - lo), hi - lo);

      // Backtracking to guarantee decrease.
      double candidate = x, f_candidate = fx;
      bool accepted = false;
      for (int bt = 0; bt < 60; ++bt) {
        candidate = clamp(x + step);
        if (candidate == x) break;
        f_candidate = objective(candidate);
        if (f_candidate <= fx) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        result.converged = true;
        break;
      }
      prev_x = x;
      prev_g = g;
      have_prev = true;
      const double moved = std::fabs(candidate - x);
      x = candidate;
      fx = f_candidate;
      g = grad(x);
      if (moved < step_tol) {
        result.converged = true;
        ++iter;
        break;
      }
    }
    result.estimate = x;
    result.residual_sse = fx;
    result.iterations = iter;
    return result;
  }
};

/// Post-contact (time, temperature) pairs with time rebased to contact.
/// Traces that carry their contact sample are aligned on it exactly; for
/// anything else the contact is detected from the signal.
inline std::vector<std::pair<double, double>> post_contact_samples(
    const TemperatureTrace& trace) {
  trace.validate();
  if (trace.times.size() < 10) {
    throw TooFewSamples("fit: need >= 10 post-contact samples");
  }
  const std::size_t contact = trace.contact_index
                                  ? *trace.contact_index
                                  : sensorsim::detect_contact(trace);
  std::vector<std::pair<double, double>> samples;
  samples.reserve(trace.times.size() - contact);
  const double t0 = trace.times[contact];
  for (std::size_t i = contact; i < trace.times.size(); ++i) {
    samples.emplace_back(trace.times[i] - t0, trace.temperatures[i]);
  }
  return samples;
}

}  // namespace detail

/// Fits the object's effusivity to a measured trace by minimizing the sum
/// of squared residuals against the contact model over [e_lo, e_hi].
/// Contact alignment uses detect_contact; earlier samples are discarded.
/// The search starts at the geometric mean of the bounds, and the result is
/// guaranteed no worse than the objective at either bound or at the
/// midpoint.
inline FitResult fit_effusivity(const TemperatureTrace& trace,
                                const SensorSpec& sensor, double object_temp,
                                double e_lo, double e_hi) {
  if (!(e_lo > 0.0) || !(e_lo < e_hi)) {
    throw InvalidBounds("fit_effusivity: need 0 < e_lo < e_hi");
  }
  sensor.validate();
  const auto samples = detail::post_contact_samples(trace);
  if (samples.size() < 10) {
    throw TooFewSamples("fit_effusivity: need >= 10 post-contact samples");
  }

  auto objective = [&](double effusivity) {
    BodyState object{{"candidate", effusivity, {}, {}, {}}, object_temp};
    double sse = 0.0;
    for (const auto& [t, temp] : samples) {
      const double r = temp - heatcore::measured_temperature(sensor, object, t);
      sse += r * r;
    }
    return sse;
  };

  detail::ScalarMinimizer minimizer{e_lo, e_hi, 1e-6 * (e_hi - e_lo)};
  FitResult result = minimizer.minimize(objective, std::sqrt(e_lo * e_hi));

  // The contract: never worse than either bound or the midpoint start.
  for (const double probe : {e_lo, e_hi, 0.5 * (e_lo + e_hi)}) {
    if (objective(probe) < result.residual_sse) {
      FitResult retry = minimizer.minimize(objective, probe);
      if (retry.residual_sse < result.residual_sse) {
        retry.iterations += result.iterations;
        result = retry;
      }
    }
  }
  return result;
}

/// Joint fit of (object effusivity, sensor effusivity) with the same
/// contract, by alternating bounded line searches. The contact model
/// depends on the pair only through the interface weight
/// e_s / (e_s + e_o), so the pair is identifiable only up to that ridge;
/// the fit converges to the ridge point reachable from the start, and the
/// returned residual reflects the quality of the shared fit.
struct JointFitResult {
  FitResult object;
  FitResult sensor;
  double residual_sse = 0.0;
};

inline JointFitResult fit_effusivity_joint(const TemperatureTrace& trace,
                                           const SensorSpec& sensor,
                                           double object_temp,
                                           std::array<double, 2> object_bounds,
                                           std::array<double, 2> sensor_bounds) {
  if (!(object_bounds[0] > 0.0) || !(object_bounds[0] < object_bounds[1]) ||
      !(sensor_bounds[0] > 0.0) || !(sensor_bounds[0] < sensor_bounds[1])) {
    throw InvalidBounds("fit_effusivity_joint: need 0 < lo < hi per axis");
  }
  sensor.validate();
  const auto samples = detail::post_contact_samples(trace);
  if (samples.size() < 10) {
    throw TooFewSamples("fit_effusivity_joint: need >= 10 post-contact samples");
  }

  auto objective = [&](double object_e, double sensor_e) {
    SensorSpec s = sensor;
    s.body.material.effusivity = sensor_e;
    BodyState object{{"candidate", object_e, {}, {}, {}}, object_temp};
    double sse = 0.0;
    for (const auto& [t, temp] : samples) {
      const double r = temp - heatcore::measured_temperature(s, object, t);
      sse += r * r;
    }
    return sse;
  };

  double object_e = std::sqrt(object_bounds[0] * object_bounds[1]);
  double sensor_e = std::sqrt(sensor_bounds[0] * sensor_bounds[1]);
  JointFitResult result;
  for (int sweep = 0; sweep < 8; ++sweep) {
    detail::ScalarMinimizer object_min{object_bounds[0], object_bounds[1],
                                       1e-6 * (object_bounds[1] - object_bounds[0])};
    result.object = object_min.minimize(
        [&](double e) { return objective(e, sensor_e); }, object_e);
    object_e = result.object.estimate;

    detail::ScalarMinimizer sensor_min{sensor_bounds[0], sensor_bounds[1],
                                       1e-6 * (sensor_bounds[1] - sensor_bounds[0])};
    result.sensor = sensor_min.minimize(
        [&](double e) { return objective(object_e, e); }, sensor_e);
    sensor_e = result.sensor.estimate;
  }
  result.residual_sse = objective(object_e, sensor_e);
  return result;
}

/// Linear map from refrigerator setting to the temperature of the block at
/// touch time.
struct WarmingCorrection {
  double slope = 1.0;
  double intercept = 0.0;  // °C

  double touched_from_setting(double fridge_setting) const {
    return slope * fridge_setting + intercept;
  }
  double setting_from_touched(double touched) const {
    return (touched - intercept) / slope;
  }
};

/// Ordinary least squares on (fridge setting, touched temperature) pairs.
inline WarmingCorrection fit_warming_correction(
    const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2) {
    throw DegenerateInput("fit_warming_correction: need >= 2 points");
  }
  double mean_x = 0.0, mean_y = 0.0;
  for (const auto& [x, y] : pairs) {
    mean_x += x;
    mean_y += y;
  }
  mean_x /= static_cast<double>(pairs.size());
  mean_y /= static_cast<double>(pairs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mean_x) * (x - mean_x);
    sxy += (x - mean_x) * (y - mean_y);
  }
  if (sxx == 0.0) {
    throw DegenerateInput(
        "fit_warming_correction: all fridge settings identical");
  }
  const double slope = sxy / sxx;
  return {slope, mean_y - slope * mean_x};
}

enum class Answer { wood, metal };

/// One material-recognition trial: the finger temperature it ran at, the
/// temperature the ambiguous condition was planned for, and the forced
/// choice given for each touched case.
struct TrialRecord {
  double finger_temp_avg = 0.0;  // °C, measured
  double intended_temp = 0.0;    // °C, planned
  double epsilon = 0.0;          // intended - measured
  std::map<std::string, Answer> answers;  // keys "cold_wood", "ambient_metal"

  void validate() const {
    if (std::fabs(epsilon - (intended_temp - finger_temp_avg)) > 1e-9) {
      throw InvalidConfig(
          "TrialRecord: epsilon inconsistent with the two temperatures");
    }
  }

  Answer answer(const std::string& key) const {
    const auto it = answers.find(key);
    if (it == answers.end()) {
      throw InvalidConfig("TrialRecord: missing answer for '" + key + "'");
    }
    return it->second;
  }
};

struct ThresholdSearchResult {
  double gamma = 0.0;  // °C
  double p_mm = 0.0;   // fraction of all trials: in range and metal/metal
  double p_w = 0.0;    // fraction of all trials: out of range and wood at
                       // least once
  std::vector<std::pair<double, double>> grid;  // (gamma, objective)
};

/// Grid search for the allowable finger-temperature deviation. For each
/// candidate gamma the objective adds the fraction of trials whose finger
/// temperature lies within [t_hat - gamma, t_hat + gamma] and answered
/// metal for both the cold wood and metal cases, plus the fraction outside
/// the band answering wood for at least one of the pair. Ties resolve to
/// the smallest gamma.
inline ThresholdSearchResult optimize_deviation_threshold(
    const std::vector<TrialRecord>& trials, double t_hat, double grid_step,
    double gamma_max = 10.0) {
  if (trials.empty()) {
    throw EmptyTrials("optimize_deviation_threshold: no trials");
  }
  if (!(grid_step > 0.0)) {
    throw InvalidConfig("optimize_deviation_threshold: grid step must be > 0");
  }
  for (const auto& t : trials) t.validate();

  const double n = static_cast<double>(trials.size());
  ThresholdSearchResult result;
  double best_objective = -1.0;
  for (int k = 0;; ++k) {
    const double gamma = grid_step * k;
    if (gamma > gamma_max + 1e-12) break;
    std::size_t metal_metal_in = 0, wood_out = 0;
    for (const auto& trial : trials) {
      const bool in_range = std::fabs(trial.finger_temp_avg - t_hat) <= gamma;
      const bool metal_both =
          trial.answer("cold_wood") == Answer::metal &&
          trial.answer("ambient_metal") == Answer::metal;
      if (in_range && metal_both) ++metal_metal_in;
      if (!in_range && !metal_both) ++wood_out;
    }
    const double p_mm = static_cast<double>(metal_metal_in) / n;
    const double p_w = static_cast<double>(wood_out) / n;
    const double objective = p_mm + p_w;
    result.grid.emplace_back(gamma, objective);
    if (objective > best_objective) {
      best_objective = objective;
      result.gamma = gamma;
      result.p_mm = p_mm;
      result.p_w = p_w;
    }
  }
  return result;
}

}  // namespace thermoscope::estimation
