#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "edr/granularity_spec.hpp"

namespace edr {

class PredictionTable;

/// Directed violating pairs (y, y'): assigning y together with y' (a label of
/// another granularity) is inconsistent. Equivalently, V_y = { y' | (y, y') }.
/// Labels are kept by name so sets from different label universes (e.g. a
/// noise-reduced training table and the full truth) compare directly. Storage
/// is sorted, so iteration and serialization are canonical.
class ConstraintSet {
 public:
  using Pair = std::pair<std::string, std::string>;

  void insert(std::string label, std::string violating);
  bool contains(const std::string& label, const std::string& violating) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  auto begin() const { return pairs_.begin(); }
  auto end() const { return pairs_.end(); }

  /// V_y in sorted order.
  std::vector<std::string> violating_set(const std::string& label) const;

  /// Adds (y', y) for every (y, y').
  ConstraintSet symmetric_closure() const;

  /// Throws DataError if a label is unknown to spec or a pair shares a granularity.
  void validate(const GranularitySpec& spec) const;

  bool operator==(const ConstraintSet&) const = default;

 private:
  std::set<Pair> pairs_;
};

/// For every ordered granularity pair (g, g') and y in g: V_y gets every y' of
/// g' that never co-occurs with y in the table's ground truth.
ConstraintSet derive_gt_constraints(const PredictionTable& table);

/// {"pairs": [["B","a1"], ...]} sorted lexicographically.
nlohmann::ordered_json to_json(const ConstraintSet& constraints);
ConstraintSet constraint_set_from_json(const nlohmann::json& j);
ConstraintSet load_constraint_set(const std::string& path);

}  // namespace edr
