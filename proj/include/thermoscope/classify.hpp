#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "thermoscope/errors.hpp"
#include "thermoscope/rng.hpp"
#include "thermoscope/sensorsim.hpp"

// Trace classification: fixed-length features from post-contact
// temperature curves, a deterministic linear SVM trained by epoch-ordered
// subgradient descent on the regularized hinge loss, and leave-one-block-out
// cross validation over the nine-block study structure.

namespace thermoscope::classify {

using sensorsim::TemperatureTrace;

enum class Label { wood, metal };
enum class Condition { ambient_wood, cold_wood, ambient_metal };

inline const char* to_string(Label l) {
  return l == Label::wood ? "wood" : "metal";
}

inline const char* to_string(Condition c) {
  switch (c) {
    case Condition::ambient_wood: return "ambient_wood";
    case Condition::cold_wood: return "cold_wood";
    case Condition::ambient_metal: return "ambient_metal";
  }
  return "unknown";
}

/// Expected block id prefix for each condition (W1-W3, CW1-CW3, M1-M3).
inline const char* block_prefix(Condition c) {
  switch (c) {
    case Condition::ambient_wood: return "W";
    case Condition::cold_wood: return "CW";
    case Condition::ambient_metal: return "M";
  }
  return "?";
}

struct FeatureConfig {
  std::size_t n_resampled = 50;  // post-contact temperatures, fixed length
  double t_max = 5.0;            // s, resampling horizon after contact
  std::vector<std::pair<double, double>> slope_windows = {{0.0, 0.5},
                                                          {0.5, 5.0}};
  bool include_passive = false;

  void validate() const {
    if (n_resampled < 2) {
      throw InvalidConfig("FeatureConfig: n_resampled must be >= 2");
    }
    if (!(t_max > 0.0)) throw InvalidConfig("FeatureConfig: t_max must be > 0");
    for (const auto& [start, end] : slope_windows) {
      if (!(start >= 0.0) || !(start < end) || end > t_max + 1e-12) {
        throw InvalidConfig(
            "FeatureConfig: slope windows must satisfy 0 <= start < end <= "
            "t_max");
      }
    }
  }

  std::size_t length() const {
    return (n_resampled + slope_windows.size()) * (include_passive ? 2 : 1);
  }
};

namespace detail {

inline std::size_t contact_of(const TemperatureTrace& trace) {
  if (trace.contact_index) return *trace.contact_index;
  return sensorsim::detect_contact(trace);
}

/// Features of one trace: resampled post-contact temperatures as offsets
/// from the contact-time temperature, then one least-squares slope per
/// window.
inline void append_trace_features(const TemperatureTrace& trace,
                                  std::size_t contact,
                                  const FeatureConfig& cfg,
                                  std::vector<double>& out) {
  const double t0 = trace.times[contact];
  const double at_contact = trace.temperatures[contact];
  const std::size_t n = trace.times.size();

  auto value_at = [&](double t_rel) {
    // Linear interpolation on the post-contact segment; clamped at the ends.
    const double t = t0 + t_rel;
    if (t <= trace.times[contact]) return trace.temperatures[contact];
    if (t >= trace.times[n - 1]) return trace.temperatures[n - 1];
    std::size_t hi = contact + 1;
    while (trace.times[hi] < t) ++hi;
    const std::size_t lo = hi - 1;
    const double w =
        (t - trace.times[lo]) / (trace.times[hi] - trace.times[lo]);
    return trace.temperatures[lo] +
           w * (trace.temperatures[hi] - trace.temperatures[lo]);
  };

  for (std::size_t j = 0; j < cfg.n_resampled; ++j) {
    const double t_rel = cfg.t_max * static_cast<double>(j) /
                         static_cast<double>(cfg.n_resampled - 1);
    out.push_back(value_at(t_rel) - at_contact);
  }

  for (const auto& [start, end] : cfg.slope_windows) {
    double mean_t = 0.0, mean_y = 0.0;
    std::size_t count = 0;
    for (std::size_t i = contact; i < n; ++i) {
      const double t_rel = trace.times[i] - t0;
      if (t_rel < start - 1e-12) continue;
      if (t_rel > end + 1e-12) break;
      mean_t += t_rel;
      mean_y += trace.temperatures[i];
      ++count;
    }
    if (count < 2) {
      out.push_back(0.0);
      continue;
    }
    mean_t /= static_cast<double>(count);
    mean_y /= static_cast<double>(count);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = contact; i < n; ++i) {
      const double t_rel = trace.times[i] - t0;
      if (t_rel < start - 1e-12) continue;
      if (t_rel > end + 1e-12) break;
      stt += (t_rel - mean_t) * (t_rel - mean_t);
      sty += (t_rel - mean_t) * (trace.temperatures[i] - mean_y);
    }
    out.push_back(stt > 0.0 ? sty / stt : 0.0);
  }
}

}  // namespace detail

/// Feature vector for one contact event. The active trace is required; the
/// passive trace doubles the vector when cfg.include_passive is set. Length
/// is fixed by the configuration alone.
inline std::vector<double> extract_features(const TemperatureTrace& active,
                                            const TemperatureTrace* passive,
                                            const FeatureConfig& cfg) {
  cfg.validate();
  active.validate();
  if (cfg.include_passive && passive == nullptr) {
    throw MissingPassive("extract_features: passive trace required");
  }
  const std::size_t active_contact = detail::contact_of(active);

  std::vector<double> features;
  features.reserve(cfg.length());
  detail::append_trace_features(active, active_contact, cfg, features);
  if (cfg.include_passive) {
    passive->validate();
    // Passive traces are captured on the active sensor's timeline; reuse
    // its contact sample when the passive trace does not carry one.
    const std::size_t passive_contact =
        passive->contact_index ? *passive->contact_index : active_contact;
    detail::append_trace_features(*passive, passive_contact, cfg, features);
  }
  return features;
}

struct LabeledExample {
  std::vector<double> features;
  Label label = Label::wood;
  std::string block_id;
  Condition condition = Condition::ambient_wood;

  void validate() const {
    const std::string prefix = block_prefix(condition);
    if (block_id.rfind(prefix, 0) != 0) {
      throw BadBlockStructure("LabeledExample: block id '" + block_id +
                              "' inconsistent with condition " +
                              to_string(condition));
    }
  }
};

struct SvmConfig {
  double lambda = 1e-3;  // hinge-loss regularization
  int epochs = 800;
  std::uint64_t seed = 7;
};

struct LinearSvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  SvmConfig config;
};

struct Prediction {
  Label label = Label::wood;
  double margin = 0.0;
};

/// metal iff weights·features + bias > 0; the tie at exactly zero is wood.
inline Prediction predict(const LinearSvmModel& model,
                          std::span<const double> features) {
  if (features.size() != model.weights.size()) {
    throw DimensionMismatch("predict: feature length " +
                            std::to_string(features.size()) +
                            " != model width " +
                            std::to_string(model.weights.size()));
  }
  double margin = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i) {
    margin += model.weights[i] * features[i];
  }
  return {margin > 0.0 ? Label::metal : Label::wood, margin};
}

/// Pegasos-style subgradient descent on the regularized hinge loss with a
/// per-epoch shuffle drawn deterministically from the seed. Identical
/// inputs produce identical models.
inline LinearSvmModel train_linear_svm(const std::vector<LabeledExample>& examples,
                                       const SvmConfig& cfg = {}) {
  bool has_wood = false, has_metal = false;
  for (const auto& e : examples) {
    (e.label == Label::wood ? has_wood : has_metal) = true;
  }
  if (!has_wood || !has_metal) {
    throw SingleClass("train_linear_svm: need at least one example per class");
  }
  const std::size_t dim = examples.front().features.size();
  for (const auto& e : examples) {
    if (e.features.size() != dim) {
      throw DimensionMismatch("train_linear_svm: inconsistent feature lengths");
    }
  }

  LinearSvmModel model;
  model.config = cfg;

  std::vector<double> weights(dim, 0.0);
  double bias = 0.0;
  // The returned model is the tail average of the iterates (final half of
  // all steps); the raw subgradient path oscillates around the optimum
  // while its average converges.
  std::vector<double> avg_weights(dim, 0.0);
  double avg_bias = 0.0;
  std::size_t averaged = 0;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  // 1/(lambda t) schedule shifted by 1/lambda so the opening steps stay
  // bounded; the asymptotic rate is unchanged.
  const double t_shift = 1.0 / cfg.lambda;
  const std::size_t total_steps =
      static_cast<std::size_t>(cfg.epochs) * examples.size();
  std::size_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 shuffler(rng::derive(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffler);
    for (const std::size_t idx : order) {
      ++t;
      const double eta =
          1.0 / (cfg.lambda * (static_cast<double>(t) + t_shift));
      const auto& example = examples[idx];
      const double y = example.label == Label::metal ? 1.0 : -1.0;
      double margin = bias;
      for (std::size_t i = 0; i < dim; ++i) {
        margin += weights[i] * example.features[i];
      }
      const double shrink = 1.0 - eta * cfg.lambda;
      for (auto& w : weights) w *= shrink;
      if (y * margin < 1.0) {
        for (std::size_t i = 0; i < dim; ++i) {
          weights[i] += eta * y * example.features[i];
        }
        bias += eta * y;
      }
      if (2 * t > total_steps) {
        for (std::size_t i = 0; i < dim; ++i) avg_weights[i] += weights[i];
        avg_bias += bias;
        ++averaged;
      }
    }
  }
  if (averaged == 0) {  // degenerate epoch counts fall back to the last iterate
    model.weights = std::move(weights);
    model.bias = bias;
    return model;
  }
  for (auto& w : avg_weights) w /= static_cast<double>(averaged);
  model.weights = std::move(avg_weights);
  model.bias = avg_bias / static_cast<double>(averaged);
  return model;
}

/// Confusion counts indexed by (true condition, predicted label).
struct ConfusionMatrix {
  std::array<std::array<std::size_t, 2>, 3> counts{};  // [condition][label]

  void add(Condition condition, Label predicted, std::size_t n = 1) {
    counts[static_cast<std::size_t>(condition)]
          [static_cast<std::size_t>(predicted)] += n;
  }
  std::size_t at(Condition condition, Label predicted) const {
    return counts[static_cast<std::size_t>(condition)]
                 [static_cast<std::size_t>(predicted)];
  }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& row : counts) n += row[0] + row[1];
    return n;
  }
  std::size_t condition_total(Condition c) const {
    const auto& row = counts[static_cast<std::size_t>(c)];
    return row[0] + row[1];
  }
  /// Fraction of a condition's examples predicted as `label`.
  double rate(Condition c, Label label) const {
    const std::size_t n = condition_total(c);
    return n == 0 ? 0.0 : static_cast<double>(at(c, label)) /
                              static_cast<double>(n);
  }
  /// Fraction of all examples whose prediction matches the true label
  /// (wood for both wood conditions, metal for metal).
  double accuracy() const {
    const std::size_t correct = at(Condition::ambient_wood, Label::wood) +
                                at(Condition::cold_wood, Label::wood) +
                                at(Condition::ambient_metal, Label::metal);
    const std::size_t n = total();
    return n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n);
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t l = 0; l < 2; ++l) counts[c][l] += other.counts[c][l];
    }
    return *this;
  }
};

/// Per-feature affine standardization computed on a training set; constant
/// features keep scale 1 so they stay inert rather than exploding.
struct FeatureScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static FeatureScaler fit(const std::vector<const LabeledExample*>& train) {
    FeatureScaler s;
    const std::size_t dim = train.front()->features.size();
    s.mean.assign(dim, 0.0);
    s.scale.assign(dim, 1.0);
    for (const auto* e : train) {
      for (std::size_t i = 0; i < dim; ++i) s.mean[i] += e->features[i];
    }
    for (auto& m : s.mean) m /= static_cast<double>(train.size());
    std::vector<double> var(dim, 0.0);
    for (const auto* e : train) {
      for (std::size_t i = 0; i < dim; ++i) {
        const double d = e->features[i] - s.mean[i];
        var[i] += d * d;
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      const double sd = std::sqrt(var[i] / static_cast<double>(train.size()));
      s.scale[i] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  std::vector<double> apply(const std::vector<double>& features) const {
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      out[i] = (features[i] - mean[i]) / scale[i];
    }
    return out;
  }
};

struct FoldResult {
  std::array<std::string, 3> held_out;  // metal, wood, cold-wood block ids
  ConfusionMatrix confusion;
};

struct CvResult {
  std::vector<FoldResult> folds;
  ConfusionMatrix aggregate;
};

/// 27-fold leave-one-block-out cross validation. Folds enumerate every
/// choice of one held-out block per material condition; the test set is all
/// examples from the three held-out blocks. Study 1 trains only on the
/// remaining ambient wood and metal blocks; studies 2 and 3 additionally
/// train on the remaining cold-wood blocks (labeled wood). Features are
/// standardized per fold with training-set statistics.
inline CvResult lobo_cv(const std::vector<LabeledExample>& dataset, int study,
                        const SvmConfig& svm = {}) {
  if (study < 1 || study > 3) {
    throw UnknownStudy("lobo_cv: study must be 1, 2, or 3");
  }
  std::array<std::set<std::string>, 3> block_sets;
  for (const auto& e : dataset) {
    e.validate();
    block_sets[static_cast<std::size_t>(e.condition)].insert(e.block_id);
  }
  for (std::size_t c = 0; c < 3; ++c) {
    if (block_sets[c].size() != 3) {
      throw BadBlockStructure(
          std::string("lobo_cv: need exactly 3 blocks of ") +
          to_string(static_cast<Condition>(c)));
    }
  }
  const std::vector<std::string> metal_blocks(
      block_sets[static_cast<std::size_t>(Condition::ambient_metal)].begin(),
      block_sets[static_cast<std::size_t>(Condition::ambient_metal)].end());
  const std::vector<std::string> wood_blocks(
      block_sets[static_cast<std::size_t>(Condition::ambient_wood)].begin(),
      block_sets[static_cast<std::size_t>(Condition::ambient_wood)].end());
  const std::vector<std::string> cold_blocks(
      block_sets[static_cast<std::size_t>(Condition::cold_wood)].begin(),
      block_sets[static_cast<std::size_t>(Condition::cold_wood)].end());

  CvResult result;
  for (const auto& held_metal : metal_blocks) {
    for (const auto& held_wood : wood_blocks) {
      for (const auto& held_cold : cold_blocks) {
        FoldResult fold;
        fold.held_out = {held_metal, held_wood, held_cold};

        std::vector<const LabeledExample*> train;
        std::vector<const LabeledExample*> test;
        for (const auto& e : dataset) {
          const bool held = e.block_id == held_metal ||
                            e.block_id == held_wood || e.block_id == held_cold;
          if (held) {
            test.push_back(&e);
            continue;
          }
          if (e.condition == Condition::cold_wood && study == 1) continue;
          train.push_back(&e);
        }
        for (const auto* e : train) {
          if (e->block_id == held_metal || e->block_id == held_wood ||
              e->block_id == held_cold) {
            throw std::logic_error("lobo_cv: test block leaked into training");
          }
        }

        const FeatureScaler scaler = FeatureScaler::fit(train);
        std::vector<LabeledExample> train_scaled;
        train_scaled.reserve(train.size());
        for (const auto* e : train) {
          train_scaled.push_back(
              {scaler.apply(e->features), e->label, e->block_id, e->condition});
        }
        const LinearSvmModel model = train_linear_svm(train_scaled, svm);
        for (const auto* e : test) {
          const auto scaled = scaler.apply(e->features);
          fold.confusion.add(e->condition, predict(model, scaled).label);
        }
        result.aggregate += fold.confusion;
        result.folds.push_back(std::move(fold));
      }
    }
  }
  return result;
}

}  // namespace thermoscope::classify
