#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thermoscope/errors.hpp"

// Contact heat transfer between two semi-infinite solids. A sensing body
// touches an object; the interface jumps to a contact temperature weighted
// by the two thermal effusivities, and a sensing element at depth x_m inside
// the sensor sees that jump attenuated through the complementary error
// function. All temperatures are carried in degrees Celsius; every relation
// here is affine in temperature, so no Kelvin conversion is needed.

namespace thermoscope::heatcore {

namespace detail {

// Rational Chebyshev approximations for erf/erfc (W. J. Cody's coefficient
// set). Relative error is below 1e-15 in each region, comfortably inside
// the library's 1.5e-7 contract; the test suite checks it against an
// independent series/continued-fraction oracle.
inline constexpr double kErfA[5] = {
    3.16112374387056560e00, 1.13864154151050156e02, 3.77485237685302021e02,
    3.20937758913846947e03, 1.85777706184603153e-1};
inline constexpr double kErfB[4] = {
    2.36012909523441209e01, 2.44024637934444173e02, 1.28261652607737228e03,
    2.84423683343917062e03};
inline constexpr double kErfC[9] = {
    5.64188496988670089e-1, 8.88314979438837594e00, 6.61191906371416295e01,
    2.98635138197400131e02, 8.81952221241769090e02, 1.71204761263407058e03,
    2.05107837782607147e03, 1.23033935479799725e03, 2.15311535474403846e-8};
inline constexpr double kErfD[8] = {
    1.57449261107098347e01, 1.17693950891312499e02, 5.37181101862009858e02,
    1.62138957456669019e03, 3.29079923573345963e03, 4.36261909014324716e03,
    3.43936767414372164e03, 1.23033935480374942e03};
inline constexpr double kErfP[6] = {
    3.05326634961232344e-1, 3.60344899949804439e-1, 1.25781726111229246e-1,
    1.60837851487422766e-2, 6.58749161529837803e-4, 1.63153871373020978e-2};
inline constexpr double kErfQ[5] = {
    2.56852019228982242e00, 1.87295284992346047e00, 5.27905102951428412e-1,
    6.05183413124413191e-2, 2.33520497626869185e-3};
inline constexpr double kInvSqrtPi = 5.6418958354775628695e-1;

inline double erf_small(double x) {  // |x| <= 0.46875
  const double y = x * x;
  double num = kErfA[4] * y;
  double den = y;
  for (int i = 0; i < 3; ++i) {
    num = (num + kErfA[i]) * y;
    den = (den + kErfB[i]) * y;
  }
  return x * (num + kErfA[3]) / (den + kErfB[3]);
}

inline double erfc_mid(double y) {  // 0.46875 < y <= 4
  double num = kErfC[8] * y;
  double den = y;
  for (int i = 0; i < 7; ++i) {
    num = (num + kErfC[i]) * y;
    den = (den + kErfD[i]) * y;
  }
  const double r = (num + kErfC[7]) / (den + kErfD[7]);
  // exp(-y^2) split into an exactly-representable part and a remainder to
  // preserve relative accuracy of the underflow-prone tail.
  const double ytrunc = std::floor(y * 16.0) / 16.0;
  const double del = (y - ytrunc) * (y + ytrunc);
  return std::exp(-ytrunc * ytrunc) * std::exp(-del) * r;
}

inline double erfc_large(double y) {  // y > 4
  const double inv_y2 = 1.0 / (y * y);
  double num = kErfP[5] * inv_y2;
  double den = inv_y2;
  for (int i = 0; i < 4; ++i) {
    num = (num + kErfP[i]) * inv_y2;
    den = (den + kErfQ[i]) * inv_y2;
  }
  double r = inv_y2 * (num + kErfP[4]) / (den + kErfQ[4]);
  r = (kInvSqrtPi - r) / y;
  const double ytrunc = std::floor(y * 16.0) / 16.0;
  const double del = (y - ytrunc) * (y + ytrunc);
  return std::exp(-ytrunc * ytrunc) * std::exp(-del) * r;
}

}  // namespace detail

/// Complementary error function. Total over all finite inputs; result is
/// clamped to its mathematical range [0, 2].
inline double erfc(double x) {
  const double y = std::fabs(x);
  double r;
  if (y <= 0.46875) {
    r = 1.0 - detail::erf_small(x);
    return r;  // already signed correctly
  } else if (y <= 4.0) {
    r = detail::erfc_mid(y);
  } else if (y < 27.0) {
    r = detail::erfc_large(y);
  } else {
    r = 0.0;  // below double underflow for the scaled tail
  }
  if (x < 0.0) r = 2.0 - r;
  return std::clamp(r, 0.0, 2.0);
}

/// A named material with thermal effusivity in J·m⁻²·K⁻¹·s⁻¹ᐟ², optionally
/// carrying the constituent properties (conductivity W/(m·K), density kg/m³,
/// specific heat J/(kg·K)) the effusivity derives from.
struct ThermalMaterial {
  std::string name;
  double effusivity = 0.0;
  std::optional<double> conductivity;
  std::optional<double> density;
  std::optional<double> specific_heat;

  void validate() const {
    if (!(effusivity > 0.0) || !std::isfinite(effusivity)) {
      throw NonPositiveEffusivity("ThermalMaterial '" + name +
                                  "': effusivity must be > 0");
    }
    if (conductivity && density && specific_heat) {
      const double derived =
          std::sqrt(*conductivity * *density * *specific_heat);
      if (std::fabs(effusivity - derived) / effusivity >= 1e-9) {
        throw InvalidConfig("ThermalMaterial '" + name +
                            "': effusivity inconsistent with sqrt(conductivity"
                            " * density * specific_heat)");
      }
    }
  }
};

/// sqrt(conductivity * density * specific_heat).
inline double effusivity_from_properties(double conductivity, double density,
                                         double specific_heat) {
  if (!(conductivity > 0.0) || !(density > 0.0) || !(specific_heat > 0.0)) {
    throw NonPositiveProperty(
        "effusivity_from_properties: all properties must be > 0");
  }
  return std::sqrt(conductivity * density * specific_heat);
}

/// Collection of recognizable materials with unique names. Always contains
/// the four reference presets used throughout the studies.
class MaterialCatalog {
 public:
  static MaterialCatalog presets() {
    MaterialCatalog c;
    c.add({"pine wood", 331.0, {}, {}, {}});
    c.add({"aluminum", 23664.0, {}, {}, {}});
    c.add({"robot sensor", 892.0, {}, {}, {}});
    c.add({"human finger", 1450.0, {}, {}, {}});
    return c;
  }

  void add(ThermalMaterial material) {
    material.validate();
    if (contains(material.name)) {
      throw InvalidConfig("MaterialCatalog: duplicate material name '" +
                          material.name + "'");
    }
    entries_.push_back(std::move(material));
  }

  bool contains(std::string_view name) const {
    for (const auto& m : entries_)
      if (m.name == name) return true;
    return false;
  }

  const ThermalMaterial& at(std::string_view name) const {
    for (const auto& m : entries_)
      if (m.name == name) return m;
    throw UnknownMaterial("MaterialCatalog: no material named '" +
                          std::string(name) + "'");
  }

  const std::vector<ThermalMaterial>& entries() const { return entries_; }

 private:
  std::vector<ThermalMaterial> entries_;
};

/// A semi-infinite body: material plus the uniform temperature it held
/// before contact.
struct BodyState {
  ThermalMaterial material;
  double initial_temperature = 0.0;  // °C

  void validate() const {
    material.validate();
    if (!std::isfinite(initial_temperature) ||
        std::fabs(initial_temperature) >= 200.0) {
      throw InvalidConfig("BodyState: |initial temperature| must be < 200 C");
    }
  }
};

/// The sensing body: its bulk state plus diffusivity, the depth of the
/// sensing element, and whether it is actively heated before contact.
struct SensorSpec {
  BodyState body;
  double diffusivity = 1.0e-7;       // m²/s
  double measurement_depth = 5.0e-4;  // m
  bool heated = false;

  void validate() const {
    body.validate();
    if (!(diffusivity > 0.0) || !std::isfinite(diffusivity)) {
      throw InvalidConfig("SensorSpec: diffusivity must be > 0");
    }
    if (!(measurement_depth >= 0.0) || measurement_depth > 0.010) {
      throw InvalidConfig(
          "SensorSpec: measurement depth must be in [0, 10 mm]");
    }
  }
};

struct ContactSolution {
  double contact_temperature = 0.0;  // °C
};

/// Instantaneous interface temperature on contact: the effusivity-weighted
/// mean of the two initial temperatures. Bounded between them.
inline ContactSolution contact_temperature(const BodyState& sensor,
                                           const BodyState& object) {
  const double es = sensor.material.effusivity;
  const double eo = object.material.effusivity;
  if (!(es > 0.0) || !(eo > 0.0)) {
    throw NonPositiveEffusivity(
        "contact_temperature: effusivities must be > 0");
  }
  const double ts = sensor.initial_temperature;
  const double to = object.initial_temperature;
  return {(ts * es + to * eo) / (es + eo)};
}

/// Temperature seen by the sensing element at time t after contact:
///   T(t) = Ts + (Tc - Ts) * erfc(x_m / (2 sqrt(alpha t)))
/// The t = 0 singularity is defined by limit: Ts for x_m > 0, Tc for
/// x_m = 0.
inline double measured_temperature(const SensorSpec& sensor,
                                   const BodyState& object, double t_seconds) {
  if (!(t_seconds >= 0.0)) {
    throw NegativeTime("measured_temperature: time must be >= 0");
  }
  const double ts = sensor.body.initial_temperature;
  const double tc = contact_temperature(sensor.body, object).contact_temperature;
  if (sensor.measurement_depth == 0.0) return tc;
  if (t_seconds == 0.0) return ts;
  const double arg = sensor.measurement_depth /
                     (2.0 * std::sqrt(sensor.diffusivity * t_seconds));
  return ts + (tc - ts) * erfc(arg);
}

}  // namespace thermoscope::heatcore
