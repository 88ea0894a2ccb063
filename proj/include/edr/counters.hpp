#pragma once

#include <cstdint>
#include <span>

#include "edr/condition.hpp"
#include "edr/prediction_table.hpp"
#include "edr/ratio.hpp"
#include "edr/sample_mask.hpp"

namespace edr {

/// Per-class masks every POS/BOD evaluation for label y intersects with.
class ClassContext {
 public:
  /// `false_positives` must be a subset of `predicted`.
  ClassContext(LabelId label, SampleMask predicted, SampleMask false_positives);

  /// Masks of label y under the table's main model.
  static ClassContext from_table(LabelId y, const PredictionTable& table);

  LabelId label() const { return label_; }
  const SampleMask& predicted() const { return predicted_; }
  const SampleMask& false_positives() const { return false_positives_; }
  std::uint64_t fp_count() const { return fp_count_; }

 private:
  LabelId label_;
  SampleMask predicted_;
  SampleMask false_positives_;
  std::uint64_t fp_count_;
};

/// Union of the masks of the listed conditions (all-zero for an empty list).
SampleMask union_mask(const ConditionSet& conditions, std::span<const ConditionId> dc);

/// Samples covered by DC that are false positives of y.
std::uint64_t pos_count(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx);
/// Samples covered by DC that were predicted as y.
std::uint64_t bod_count(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx);
/// POS / (BOD + FP); 0/0 when both are zero.
Ratio objective(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx);
Ratio objective(std::uint64_t pos, std::uint64_t bod, std::uint64_t fp);

/// Samples where the main model predicts y (at y's granularity) and gt differs.
std::uint64_t fp_count(LabelId y, const PredictionTable& table);

}  // namespace edr
