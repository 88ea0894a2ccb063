#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edr/prediction_table.hpp"
#include "edr/sample_mask.hpp"

namespace edr {

using ConditionId = std::uint32_t;

/// What a condition tests. source main/secondary: "that model assigned
/// label"; source binary: "the binary model for label fired".
struct ConditionDescriptor {
  SourceKind source;
  LabelId label;

  auto operator<=>(const ConditionDescriptor&) const = default;
};

enum class Provenance : std::uint8_t { main_other_granularity, secondary, binary };

std::string_view to_string(Provenance p);

struct Condition {
  ConditionId id;
  ConditionDescriptor descriptor;
  Provenance provenance;
};

/// Provenance of a descriptor when used to detect errors at granularity
/// `target`. Throws std::invalid_argument for a main-source descriptor on the
/// target granularity itself, which is never a valid condition.
Provenance provenance_for(const ConditionDescriptor& d, GranularityId target, const GranularitySpec& spec);

/// `assign[<source>,<granularity>=<label>]` or `bin[<label>]`.
std::string render(const ConditionDescriptor& d, const GranularitySpec& spec);
/// Inverse of render(); throws DataError on malformed text or unknown names.
ConditionDescriptor parse_condition(std::string_view text, const GranularitySpec& spec);

/// Samples on which the descriptor's predicate holds.
SampleMask condition_mask(const ConditionDescriptor& d, const PredictionTable& table);

/// The conditions available to rules for labels of one granularity, each with
/// its sample mask materialized once.
class ConditionSet {
 public:
  /// Conditions get ids 0..n-1 in the given order. Throws std::invalid_argument
  /// on duplicate descriptors, a mask-count mismatch, or masks of unequal size.
  ConditionSet(GranularityId target, std::vector<ConditionDescriptor> descriptors,
               std::vector<Provenance> provenance, std::vector<SampleMask> masks);

  GranularityId target() const { return target_; }
  std::size_t size() const { return conditions_.size(); }
  bool empty() const { return conditions_.empty(); }
  std::size_t n_samples() const { return n_samples_; }

  const Condition& operator[](ConditionId id) const { return conditions_.at(id); }
  const std::vector<Condition>& conditions() const { return conditions_; }
  const SampleMask& mask(ConditionId id) const { return masks_.at(id); }
  std::optional<ConditionId> find(const ConditionDescriptor& d) const;

 private:
  GranularityId target_;
  std::size_t n_samples_ = 0;
  std::vector<Condition> conditions_;
  std::vector<SampleMask> masks_;
};

/// Which optional condition sources to include. Main-model conditions are
/// always included.
struct SourceToggles {
  bool secondary = false;
  bool binary = false;
  /// Restricts binary conditions to these labels; all available bin columns
  /// when absent.
  std::optional<std::vector<LabelId>> binary_labels;
};

/// Conditions for target granularity g, in order: main-model assignments for
/// every label of every other granularity, then secondary-model assignments
/// for every label of every granularity, then binary flags; each group in
/// label-id order. Throws DataError when a toggled source is missing.
ConditionSet build_condition_set(const PredictionTable& table, GranularityId g, const SourceToggles& include);

/// One condition set per granularity, indexed by granularity id.
std::vector<ConditionSet> build_all_condition_sets(const PredictionTable& table, const SourceToggles& include);

}  // namespace edr
