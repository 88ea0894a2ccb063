#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "json.hpp"
#include "edr/constraint_set.hpp"
#include "edr/learner.hpp"
#include "edr/prediction_table.hpp"
#include "edr/ratio.hpp"
#include "edr/sample_mask.hpp"

namespace edr {

/// Per-label rule firings on a table, indexed by the table's label ids.
struct ErrorFlags {
  std::vector<SampleMask> per_label;
  /// OR of every per-label mask.
  SampleMask total;
};

/// Applies each rule to the table: a label's flags are its main-model
/// predictions AND the union of its condition masks. Rules are matched to the
/// table by label name, so a rule set learned on a reduced label universe
/// applies to a table over the full one. Throws DataError when a rule names a
/// label or a condition source the table does not have.
ErrorFlags apply_rules(const RuleSet& rules, const PredictionTable& table);

/// Binary confusion counts with the derived scores. Any 0/0 term counts as 0.
struct ErrorMetrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  static ErrorMetrics from_masks(const SampleMask& flagged, const SampleMask& truth);

  double precision() const;
  double recall() const;
  double f1() const;
  double balanced_accuracy() const;
  /// 2tp / (2tp + fp + fn) as an exact ratio (0/0 when there is nothing to score).
  Ratio f1_ratio() const { return Ratio(2 * tp, 2 * tp + fp + fn); }
};

struct MetricsReport {
  /// Indexed by the table's label ids; ground truth is the false-positive mask of y.
  std::vector<ErrorMetrics> per_label;
  /// Ground truth: the main model is wrong at some granularity.
  ErrorMetrics total;
};

MetricsReport error_metrics(const ErrorFlags& flags, const PredictionTable& table);

nlohmann::ordered_json to_json(const MetricsReport& report, const GranularitySpec& spec);
/// Header `label,tp,fp,tn,fn,precision,recall,f1,balanced_accuracy`; the total row is labelled `__total__`.
void write_metrics_csv(const MetricsReport& report, const GranularitySpec& spec, std::ostream& out);

/// Pairs (y, y') for every main-model condition on another granularity's
/// label y' in the body of the rule for y. Other condition kinds carry no
/// hierarchy information and are skipped.
ConstraintSet recover_constraints(const RuleSet& rules);

struct SetScores {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

/// Precision/recall/F1 over directed pairs. Two empty sets score 1.0.
SetScores constraint_f1(const ConstraintSet& recovered, const ConstraintSet& truth);

struct Inconsistency {
  std::uint64_t violating = 0;
  std::uint64_t total = 0;
  double rate() const { return total == 0 ? 0.0 : static_cast<double>(violating) / static_cast<double>(total); }
};

/// Samples whose main-model assignments include some pair (y, y') of the
/// constraint set. Throws DataError for constraints over labels the table
/// does not know.
Inconsistency inconsistency_rate(const PredictionTable& table, const ConstraintSet& constraints);

}  // namespace edr
