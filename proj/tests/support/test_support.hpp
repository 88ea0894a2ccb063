#pragma once

// Test-only helpers: fixture paths, random instance generators, and naive
// per-sample oracles that never touch the mask kernels they check.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "edr/condition.hpp"
#include "edr/counters.hpp"
#include "edr/prediction_table.hpp"
#include "edr/ratio.hpp"
#include "edr/rng.hpp"

namespace edr::testing {

inline std::string data_path(const std::string& name) { return std::string(EDR_TEST_DATA_DIR) + "/" + name; }

inline PredictionTable toy6() { return parse_prediction_table(data_path("toy6.csv")); }

/// Random two-or-three-level table with optional secondary and binary sources.
struct RandomTableOptions {
  std::size_t max_samples = 64;
  std::size_t max_labels_per_level = 4;
  std::size_t levels = 2;
  bool secondary = true;
  bool binary = true;
  /// Probability a main prediction equals gt.
  double main_accuracy = 0.6;
};

inline PredictionTable random_table(Rng& rng, const RandomTableOptions& o = {}) {
  std::vector<GranularitySpec::Level> levels;
  for (std::size_t g = 0; g < o.levels; ++g) {
    GranularitySpec::Level level{"g" + std::to_string(g), {}};
    const std::size_t k = 2 + rng.uniform(o.max_labels_per_level - 1);
    for (std::size_t j = 0; j < k; ++j) level.labels.push_back("l" + std::to_string(g) + "_" + std::to_string(j));
    levels.push_back(level);
  }
  auto spec = std::make_shared<const GranularitySpec>(levels);
  const std::size_t n = 1 + rng.uniform(o.max_samples);
  PredictionTable::Columns cols;
  cols.gt.assign(o.levels, {});
  cols.main.assign(o.levels, {});
  if (o.secondary) cols.secondary.assign(o.levels, {});
  if (o.binary) {
    for (LabelId y = 0; y < spec->label_count(); ++y) {
      if (rng.bernoulli(0.7)) cols.binary[y] = {};
    }
  }
  auto draw = [&](GranularityId g) { return static_cast<LabelId>(spec->first_label(g) + rng.uniform(spec->labels_in(g))); };
  for (std::size_t i = 0; i < n; ++i) {
    cols.sample_ids.push_back("r" + std::to_string(i));
    for (GranularityId g = 0; g < o.levels; ++g) {
      const LabelId truth = draw(g);
      cols.gt[g].push_back(truth);
      cols.main[g].push_back(rng.bernoulli(o.main_accuracy) ? truth : draw(g));
      if (o.secondary) cols.secondary[g].push_back(rng.bernoulli(0.5) ? truth : draw(g));
    }
    for (auto& [y, values] : cols.binary) values.push_back(rng.bernoulli(0.4) ? 1 : 0);
  }
  return PredictionTable(spec, std::move(cols));
}

/// Direct evaluation of a condition descriptor on one sample.
inline bool holds(const ConditionDescriptor& d, const PredictionTable& t, std::size_t i) {
  if (d.source == SourceKind::binary) return t.binary(d.label)[i] == 1;
  return t.assignments(d.source, t.spec().granularity_of(d.label))[i] == d.label;
}

struct NaiveCounts {
  std::uint64_t pos = 0;
  std::uint64_t bod = 0;
  std::uint64_t fp = 0;
};

/// POS/BOD/FP by looping over samples.
inline NaiveCounts naive_counts(LabelId y, const std::vector<ConditionDescriptor>& dc, const PredictionTable& t) {
  const GranularityId g = t.spec().granularity_of(y);
  NaiveCounts c;
  for (std::size_t i = 0; i < t.n_samples(); ++i) {
    const bool predicted = t.assignments(SourceKind::main, g)[i] == y;
    const bool wrong = predicted && t.gt(g)[i] != y;
    bool fires = false;
    for (const auto& d : dc) fires = fires || holds(d, t, i);
    c.fp += wrong;
    c.bod += predicted && fires;
    c.pos += wrong && fires;
  }
  return c;
}

/// F1 of the error class of y from a confusion matrix of rule firings against
/// actual false positives, as an exact ratio 2tp / (2tp + fp + fn).
inline Ratio naive_error_f1(LabelId y, const std::vector<ConditionDescriptor>& dc, const PredictionTable& t) {
  const GranularityId g = t.spec().granularity_of(y);
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < t.n_samples(); ++i) {
    const bool predicted = t.assignments(SourceKind::main, g)[i] == y;
    bool any = false;
    for (const auto& d : dc) any = any || holds(d, t, i);
    const bool flagged = predicted && any;
    const bool error = predicted && t.gt(g)[i] != y;
    tp += flagged && error;
    fp += flagged && !error;
    fn += !flagged && error;
  }
  return Ratio(2 * tp, 2 * tp + fp + fn);
}

/// Random condition set over n samples with a matching class context;
/// predicted/false-positive masks drawn with the given densities.
struct RandomInstance {
  ConditionSet conditions;
  ClassContext ctx;
};

inline RandomInstance random_instance(Rng& rng, std::size_t n, std::size_t m, double density = 0.25,
                                      double predicted_density = 0.5, double error_rate = 0.5) {
  std::vector<ConditionDescriptor> descriptors;
  std::vector<Provenance> provenance;
  std::vector<SampleMask> masks;
  const double d = density * (0.5 + rng.uniform01());
  for (std::size_t c = 0; c < m; ++c) {
    descriptors.push_back({SourceKind::binary, static_cast<LabelId>(c)});
    provenance.push_back(Provenance::binary);
    masks.push_back(SampleMask::from_predicate(n, [&](std::size_t) { return rng.bernoulli(d); }));
  }
  SampleMask predicted(n);
  SampleMask fps(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(predicted_density)) {
      predicted.set(i);
      if (rng.bernoulli(error_rate)) fps.set(i);
    }
  }
  return {ConditionSet(0, std::move(descriptors), std::move(provenance), std::move(masks)),
          ClassContext(0, std::move(predicted), std::move(fps))};
}

inline std::vector<ConditionId> ids_of(const ConditionSet& cs, const std::vector<ConditionDescriptor>& ds) {
  std::vector<ConditionId> out;
  for (const auto& d : ds) out.push_back(*cs.find(d));
  return out;
}

}  // namespace edr::testing
