#include "edr/constraint_set.hpp"

#include <fstream>
#include <stdexcept>

#include "edr/errors.hpp"
#include "edr/prediction_table.hpp"

namespace edr {

void ConstraintSet::insert(std::string label, std::string violating) {
  if (label == violating) throw std::invalid_argument("a label cannot violate itself: " + label);
  pairs_.emplace(std::move(label), std::move(violating));
}

bool ConstraintSet::contains(const std::string& label, const std::string& violating) const {
  return pairs_.count({label, violating}) != 0;
}

std::vector<std::string> ConstraintSet::violating_set(const std::string& label) const {
  std::vector<std::string> out;
  for (auto it = pairs_.lower_bound({label, std::string()}); it != pairs_.end() && it->first == label;
       ++it) {
    out.push_back(it->second);
  }
  return out;
}

ConstraintSet ConstraintSet::symmetric_closure() const {
  ConstraintSet out = *this;
  for (const auto& [y, v] : pairs_) out.pairs_.emplace(v, y);
  return out;
}

void ConstraintSet::validate(const GranularitySpec& spec) const {
  for (const auto& [y, v] : pairs_) {
    auto a = spec.find_label(y);
    auto b = spec.find_label(v);
    if (!a) throw DataError("constraint references unknown label '" + y + "'");
    if (!b) throw DataError("constraint references unknown label '" + v + "'");
    if (spec.granularity_of(*a) == spec.granularity_of(*b)) {
      throw DataError("constraint (" + y + ", " + v + ") relates labels of the same granularity");
    }
  }
}

ConstraintSet derive_gt_constraints(const PredictionTable& table) {
  if (table.n_samples() == 0) {
    throw std::invalid_argument("cannot derive constraints from an empty table");
  }
  const GranularitySpec& spec = table.spec();
  const std::size_t n_labels = spec.label_count();
  // co[y * n_labels + y'] set when y and y' appear together in some sample's gt.
  std::vector<char> co(n_labels * n_labels, 0);
  for (std::size_t i = 0; i < table.n_samples(); ++i) {
    for (GranularityId g = 0; g < spec.granularity_count(); ++g) {
      for (GranularityId h = 0; h < spec.granularity_count(); ++h) {
        if (g != h) co[table.gt(g)[i] * n_labels + table.gt(h)[i]] = 1;
      }
    }
  }
  ConstraintSet out;
  for (LabelId y = 0; y < n_labels; ++y) {
    for (LabelId v = 0; v < n_labels; ++v) {
      if (spec.granularity_of(y) != spec.granularity_of(v) && !co[y * n_labels + v]) {
        out.insert(spec.label_name(y), spec.label_name(v));
      }
    }
  }
  return out;
}

nlohmann::ordered_json to_json(const ConstraintSet& constraints) {
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (const auto& [y, v] : constraints) pairs.push_back({y, v});
  return {{"pairs", pairs}};
}

ConstraintSet constraint_set_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("pairs") || !j["pairs"].is_array()) {
    throw DataError("constraint JSON must be an object with a 'pairs' array");
  }
  ConstraintSet out;
  for (const auto& p : j["pairs"]) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
      throw DataError("each constraint pair must be a [label, violating_label] string pair");
    }
    try {
      out.insert(p[0].get<std::string>(), p[1].get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
  }
  return out;
}

ConstraintSet load_constraint_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open constraint file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("constraint file '" + path + "' is not valid JSON: " + e.what());
  }
  return constraint_set_from_json(j);
}

}  // namespace edr
