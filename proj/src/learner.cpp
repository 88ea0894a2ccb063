#include "edr/learner.hpp"

#include <algorithm>
#include <atomic>
#include <stdexcept>
#include <thread>

namespace edr {

RuleSet::RuleSet(std::shared_ptr<const GranularitySpec> spec)
    : spec_(std::move(spec)), rules_(spec_ ? spec_->label_count() : 0) {
  if (!spec_) throw std::invalid_argument("rule set without a granularity spec");
}

void RuleSet::set(LabelId label, std::optional<DetectionRule> rule) {
  if (rule) {
    if (rule->target != label) throw std::invalid_argument("rule target does not match its label slot");
    if (rule->conditions.empty()) throw std::invalid_argument("a detection rule needs at least one condition");
    const GranularityId g = spec_->granularity_of(label);
    std::vector<ConditionDescriptor> sorted = rule->conditions;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate condition in rule for '" + spec_->label_name(label) + "'");
    }
    for (const auto& d : sorted) {
      if (d.label >= spec_->label_count()) throw std::invalid_argument("condition label out of range");
      provenance_for(d, g, *spec_);
    }
  }
  rules_.at(label) = std::move(rule);
}

std::vector<const DetectionRule*> RuleSet::rules() const {
  std::vector<const DetectionRule*> out;
  for (const auto& r : rules_) {
    if (r) out.push_back(&*r);
  }
  return out;
}

std::size_t RuleSet::rule_count() const {
  return static_cast<std::size_t>(std::count_if(rules_.begin(), rules_.end(), [](const auto& r) { return r.has_value(); }));
}

namespace {

using Words = std::vector<SampleMask::Word>;
__extension__ using Wide = unsigned __int128;

void or_into(Words& dst, std::span<const SampleMask::Word> src) {
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] |= src[k];
}

DetectionRule make_rule(const ClassContext& ctx, const ConditionSet& conditions,
                        std::span<const ConditionId> chosen, std::uint64_t pos, std::uint64_t bod) {
  DetectionRule rule;
  rule.target = ctx.label();
  for (ConditionId c : chosen) rule.conditions.push_back(conditions[c].descriptor);
  rule.diagnostics = {pos, bod, ctx.fp_count(), objective(pos, bod, ctx.fp_count())};
  return rule;
}

void check_table_preconditions(LabelId y, const ConditionSet& conditions, const PredictionTable& table) {
  if (table.n_samples() == 0) throw std::invalid_argument("cannot learn rules from an empty table");
  if (y >= table.spec().label_count()) throw std::invalid_argument("label id out of range");
  if (table.spec().granularity_of(y) != conditions.target()) {
    throw std::invalid_argument("label '" + table.spec().label_name(y) +
                                "' does not belong to the condition set's granularity");
  }
  if (conditions.n_samples() != table.n_samples() && !conditions.empty()) {
    throw std::invalid_argument("condition set was built for a different table");
  }
}

}  // namespace

std::optional<DetectionRule> ratio_det_rule_learn(const ClassContext& ctx, const ConditionSet& conditions,
                                                  LearnStats* stats) {
  LearnStats local;
  LearnStats& st = stats ? *stats : local;
  if (ctx.fp_count() == 0 || conditions.empty()) return std::nullopt;
  if (conditions.n_samples() != ctx.predicted().size()) {
    throw std::invalid_argument("condition masks and class context cover different sample counts");
  }

  const auto fp_words = ctx.false_positives().words();
  const auto pred_words = ctx.predicted().words();
  Words current(fp_words.size(), 0);
  std::uint64_t pos = 0;
  std::uint64_t bod = 0;

  std::vector<ConditionId> candidates(conditions.size());
  for (ConditionId c = 0; c < candidates.size(); ++c) candidates[c] = c;

  std::vector<ConditionId> chosen;
  struct Prefix {
    std::uint64_t pos;
    std::uint64_t bod;
  };
  std::vector<Prefix> prefixes;

  while (!candidates.empty()) {
    // argmin of dBOD / dPOS over candidates with dPOS > 0.
    std::optional<ConditionId> best;
    std::uint64_t best_dpos = 0;
    std::uint64_t best_dbod = 0;
    UnionCounts best_counts;
    for (ConditionId c : candidates) {
      const UnionCounts u = union_and_counts(current, conditions.mask(c).words(), fp_words, pred_words);
      ++st.evaluations;
      const std::uint64_t dpos = u.first - pos;
      const std::uint64_t dbod = u.second - bod;
      if (dpos == 0) continue;
      // dbod / dpos < best_dbod / best_dpos
      if (!best || static_cast<Wide>(dbod) * best_dpos <
                       static_cast<Wide>(best_dbod) * dpos) {
        best = c;
        best_dpos = dpos;
        best_dbod = dbod;
        best_counts = u;
      }
    }
    if (!best) break;

    or_into(current, conditions.mask(*best).words());
    pos = best_counts.first;
    bod = best_counts.second;
    chosen.push_back(*best);
    prefixes.push_back({pos, bod});

    std::vector<ConditionId> remaining;
    for (ConditionId c : candidates) {
      if (c == *best) continue;
      const UnionCounts u = union_and_counts(current, conditions.mask(c).words(), fp_words, pred_words);
      ++st.evaluations;
      if (u.first > pos) remaining.push_back(c);
    }
    candidates = std::move(remaining);
  }

  if (prefixes.empty()) return std::nullopt;

  // argmin over i >= 1 of (BOD + FP) / POS, i.e. argmax of the objective.
  std::size_t best_i = 0;
  Ratio best_obj = Ratio::undefined();
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    ++st.evaluations;
    const Ratio obj = objective(prefixes[i].pos, prefixes[i].bod, ctx.fp_count());
    if (obj > best_obj) {
      best_obj = obj;
      best_i = i;
    }
  }
  return make_rule(ctx, conditions, std::span(chosen).first(best_i + 1), prefixes[best_i].pos, prefixes[best_i].bod);
}

std::optional<DetectionRule> ratio_det_rule_learn(LabelId y, const ConditionSet& conditions,
                                                  const PredictionTable& table, LearnStats* stats) {
  check_table_preconditions(y, conditions, table);
  return ratio_det_rule_learn(ClassContext::from_table(y, table), conditions, stats);
}

RuleSet learn_all(const PredictionTable& table, const std::vector<ConditionSet>& condition_sets, unsigned threads) {
  const GranularitySpec& spec = table.spec();
  if (table.n_samples() == 0) throw std::invalid_argument("cannot learn rules from an empty table");
  if (condition_sets.size() != spec.granularity_count()) {
    throw std::invalid_argument("need exactly one condition set per granularity");
  }
  for (GranularityId g = 0; g < condition_sets.size(); ++g) {
    if (condition_sets[g].target() != g) throw std::invalid_argument("condition sets out of granularity order");
  }

  std::vector<std::optional<DetectionRule>> learned(spec.label_count());
  auto learn_one = [&](LabelId y) {
    learned[y] = ratio_det_rule_learn(y, condition_sets[spec.granularity_of(y)], table);
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.label_count())));
  if (threads == 1) {
    for (LabelId y = 0; y < spec.label_count(); ++y) learn_one(y);
  } else {
    std::atomic<LabelId> next{0};
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (LabelId y = next++; y < spec.label_count(); y = next++) learn_one(y);
      });
    }
  }

  RuleSet out(table.spec_ptr());
  for (LabelId y = 0; y < spec.label_count(); ++y) out.set(y, std::move(learned[y]));
  return out;
}

std::optional<DetectionRule> brute_force_optimal(const ClassContext& ctx, const ConditionSet& conditions,
                                                 std::size_t max_conditions) {
  if (max_conditions > kBruteForceCeiling) {
    throw std::invalid_argument("brute-force limit above " + std::to_string(kBruteForceCeiling) + " conditions");
  }
  if (conditions.size() > max_conditions) {
    throw std::invalid_argument("brute force over " + std::to_string(conditions.size()) +
                                " conditions exceeds the limit of " + std::to_string(max_conditions) +
                                "; use the greedy learner");
  }
  if (ctx.fp_count() == 0 || conditions.empty()) return std::nullopt;

  const auto fp_words = ctx.false_positives().words();
  const auto pred_words = ctx.predicted().words();
  const std::size_t m = conditions.size();
  // unions[d] holds the union of the first d chosen conditions.
  std::vector<Words> unions(m + 1, Words(fp_words.size(), 0));
  std::vector<ConditionId> chosen;
  std::vector<ConditionId> best_set;
  Ratio best = Ratio::undefined();
  std::uint64_t best_pos = 0;
  std::uint64_t best_bod = 0;

  // Depth-first enumeration visits id lists in lexicographic order, so a
  // strict improvement test keeps the lexicographically smallest optimum.
  auto visit = [&](auto&& self, ConditionId start) -> void {
    const std::size_t depth = chosen.size();
    for (ConditionId c = start; c < m; ++c) {
      Words& u = unions[depth + 1];
      const auto mask = conditions.mask(c).words();
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = unions[depth][k] | mask[k];
      const std::uint64_t pos = and_count(u, fp_words);
      const std::uint64_t bod = and_count(u, pred_words);
      chosen.push_back(c);
      const Ratio obj = objective(pos, bod, ctx.fp_count());
      if (obj > best) {
        best = obj;
        best_set = chosen;
        best_pos = pos;
        best_bod = bod;
      }
      self(self, c + 1);
      chosen.pop_back();
    }
  };
  visit(visit, 0);

  if (best_pos == 0) return std::nullopt;
  return make_rule(ctx, conditions, best_set, best_pos, best_bod);
}

std::optional<DetectionRule> brute_force_optimal(LabelId y, const ConditionSet& conditions,
                                                 const PredictionTable& table, std::size_t max_conditions) {
  check_table_preconditions(y, conditions, table);
  return brute_force_optimal(ClassContext::from_table(y, table), conditions, max_conditions);
}

}  // namespace edr
