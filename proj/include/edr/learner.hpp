#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "edr/condition.hpp"
#include "edr/counters.hpp"
#include "edr/prediction_table.hpp"
#include "edr/ratio.hpp"

namespace edr {

struct RuleDiagnostics {
  std::uint64_t pos = 0;
  std::uint64_t bod = 0;
  std::uint64_t fp = 0;
  Ratio objective;
};

/// error_y(X) <- assign[main,g=y](X) AND OR_{c in DC_y} c(X)
struct DetectionRule {
  LabelId target;
  /// Non-empty, duplicate-free, in the order the learner selected them.
  std::vector<ConditionDescriptor> conditions;
  RuleDiagnostics diagnostics;
};

/// At most one rule per label of a granularity spec; labels without a rule
/// hold std::nullopt.
class RuleSet {
 public:
  explicit RuleSet(std::shared_ptr<const GranularitySpec> spec);

  const GranularitySpec& spec() const { return *spec_; }
  const std::shared_ptr<const GranularitySpec>& spec_ptr() const { return spec_; }

  void set(LabelId label, std::optional<DetectionRule> rule);
  const std::optional<DetectionRule>& rule(LabelId label) const { return rules_.at(label); }
  /// Present rules in label-id order.
  std::vector<const DetectionRule*> rules() const;
  std::size_t rule_count() const;

  /// Free-form provenance echoed into serialized output.
  nlohmann::ordered_json config = nlohmann::ordered_json::object();

 private:
  std::shared_ptr<const GranularitySpec> spec_;
  std::vector<std::optional<DetectionRule>> rules_;
};

struct LearnStats {
  /// Number of (POS, BOD) pair evaluations performed.
  std::uint64_t evaluations = 0;
};

/// Greedy ratio minimization of (BOD + FP) / POS for one class.
///
/// Starting from DC = {}, repeatedly adds the candidate with the smallest
/// marginal ratio dBOD/dPOS (candidates with dPOS = 0 are never selected; ties
/// go to the smaller condition id), then keeps only candidates that would
/// still raise POS. Among the non-empty prefixes built this way, returns the
/// one with the largest POS / (BOD + FP), earliest on ties. Returns nullopt
/// when y has no false positives or no condition covers any of them.
std::optional<DetectionRule> ratio_det_rule_learn(const ClassContext& ctx, const ConditionSet& conditions,
                                                  LearnStats* stats = nullptr);
/// Table form. Throws std::invalid_argument for an empty table or when y is
/// not a label of the condition set's target granularity.
std::optional<DetectionRule> ratio_det_rule_learn(LabelId y, const ConditionSet& conditions,
                                                  const PredictionTable& table, LearnStats* stats = nullptr);

/// One rule per label of the table, each learned against its granularity's
/// condition set. `threads` > 1 learns labels concurrently; the result does
/// not depend on it.
RuleSet learn_all(const PredictionTable& table, const std::vector<ConditionSet>& condition_sets,
                  unsigned threads = 1);

/// Hard ceiling on the exhaustive search width.
inline constexpr std::size_t kBruteForceCeiling = 24;

/// Exhaustive maximizer of POS / (BOD + FP) over every non-empty subset,
/// ties broken towards the lexicographically smallest sorted id list. Returns
/// nullopt under the same conditions as the greedy learner. Throws
/// std::invalid_argument when the set has more than `max_conditions`
/// conditions (or max_conditions exceeds kBruteForceCeiling).
std::optional<DetectionRule> brute_force_optimal(const ClassContext& ctx, const ConditionSet& conditions,
                                                 std::size_t max_conditions = 20);
std::optional<DetectionRule> brute_force_optimal(LabelId y, const ConditionSet& conditions,
                                                 const PredictionTable& table, std::size_t max_conditions = 20);

// Serialization (rule_io.cpp).

inline constexpr const char* kRulesFormat = "edr-rules/1";

/// {"format", "config", "granularities", "rules": {"<label>": {...} | null}}
nlohmann::ordered_json to_json(const RuleSet& rules);
RuleSet rule_set_from_json(const nlohmann::json& j);
RuleSet load_rule_set(const std::string& path);

/// One line per rule: `error_B(X) <- assign[main,coarse=B](X) ∧ ( c1(X) ∨ c2(X) )`.
std::string render_rules_text(const RuleSet& rules);

}  // namespace edr
