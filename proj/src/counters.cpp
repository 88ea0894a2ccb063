#include "edr/counters.hpp"

#include <stdexcept>

namespace edr {

ClassContext::ClassContext(LabelId label, SampleMask predicted, SampleMask false_positives)
    : label_(label), predicted_(std::move(predicted)), false_positives_(std::move(false_positives)) {
  if (!false_positives_.subset_of(predicted_)) {
    throw std::invalid_argument("false-positive mask must be a subset of the predicted mask");
  }
  fp_count_ = false_positives_.count();
}

ClassContext ClassContext::from_table(LabelId y, const PredictionTable& table) {
  const GranularityId g = table.spec().granularity_of(y);
  const auto pred = table.assignments(SourceKind::main, g);
  const auto gt = table.gt(g);
  const std::size_t n = table.n_samples();
  return ClassContext(y, SampleMask::from_predicate(n, [&](std::size_t i) { return pred[i] == y; }),
                      SampleMask::from_predicate(n, [&](std::size_t i) { return pred[i] == y && gt[i] != y; }));
}

SampleMask union_mask(const ConditionSet& conditions, std::span<const ConditionId> dc) {
  SampleMask u(conditions.n_samples());
  for (ConditionId c : dc) u |= conditions.mask(c);
  return u;
}

std::uint64_t pos_count(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx) {
  if (dc.empty()) return 0;
  return and_count(union_mask(conditions, dc).words(), ctx.false_positives().words());
}

std::uint64_t bod_count(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx) {
  if (dc.empty()) return 0;
  return and_count(union_mask(conditions, dc).words(), ctx.predicted().words());
}

Ratio objective(std::uint64_t pos, std::uint64_t bod, std::uint64_t fp) {
  return Ratio(pos, bod + fp);
}

Ratio objective(const ConditionSet& conditions, std::span<const ConditionId> dc, const ClassContext& ctx) {
  return objective(pos_count(conditions, dc, ctx), bod_count(conditions, dc, ctx), ctx.fp_count());
}

std::uint64_t fp_count(LabelId y, const PredictionTable& table) {
  const GranularityId g = table.spec().granularity_of(y);
  const auto pred = table.assignments(SourceKind::main, g);
  const auto gt = table.gt(g);
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < table.n_samples(); ++i) n += (pred[i] == y && gt[i] != y);
  return n;
}

}  // namespace edr
