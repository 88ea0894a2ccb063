#include "edr/condition.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "edr/errors.hpp"

namespace edr {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::main_other_granularity: return "main-other-granularity";
    case Provenance::secondary: return "secondary";
    case Provenance::binary: return "binary";
  }
  return "?";
}

Provenance provenance_for(const ConditionDescriptor& d, GranularityId target, const GranularitySpec& spec) {
  switch (d.source) {
    case SourceKind::main:
      if (spec.granularity_of(d.label) == target) {
        throw std::invalid_argument("main-model condition on label '" + spec.label_name(d.label) +
                                    "' of the target granularity");
      }
      return Provenance::main_other_granularity;
    case SourceKind::secondary: return Provenance::secondary;
    case SourceKind::binary: return Provenance::binary;
  }
  throw std::invalid_argument("bad source kind");
}

std::string render(const ConditionDescriptor& d, const GranularitySpec& spec) {
  const std::string& label = spec.label_name(d.label);
  if (d.source == SourceKind::binary) return "bin[" + label + "]";
  return "assign[" + std::string(to_string(d.source)) + "," +
         spec.granularity_name(spec.granularity_of(d.label)) + "=" + label + "]";
}

ConditionDescriptor parse_condition(std::string_view text, const GranularitySpec& spec) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("bad condition '" + std::string(text) + "': " + why);
  };
  auto resolve = [&](std::string_view name) {
    auto id = spec.find_label(name);
    if (!id) throw fail("unknown label '" + std::string(name) + "'");
    return *id;
  };
  if (text.size() < 2 || text.back() != ']') throw fail("expected a trailing ']'");
  if (text.rfind("bin[", 0) == 0) {
    return {SourceKind::binary, resolve(text.substr(4, text.size() - 5))};
  }
  if (text.rfind("assign[", 0) != 0) throw fail("expected assign[...] or bin[...]");
  const std::string_view body = text.substr(7, text.size() - 8);
  const auto comma = body.find(',');
  const auto eq = body.find('=');
  if (comma == std::string_view::npos || eq == std::string_view::npos || eq < comma) {
    throw fail("expected assign[<source>,<granularity>=<label>]");
  }
  const std::string_view source = body.substr(0, comma);
  const std::string_view granularity = body.substr(comma + 1, eq - comma - 1);
  const LabelId label = resolve(body.substr(eq + 1));
  SourceKind kind;
  if (source == "main") {
    kind = SourceKind::main;
  } else if (source == "secondary") {
    kind = SourceKind::secondary;
  } else {
    throw fail("unknown source '" + std::string(source) + "'");
  }
  if (spec.granularity_name(spec.granularity_of(label)) != granularity) {
    throw fail("label does not belong to granularity '" + std::string(granularity) + "'");
  }
  return {kind, label};
}

SampleMask condition_mask(const ConditionDescriptor& d, const PredictionTable& table) {
  const std::size_t n = table.n_samples();
  if (d.source == SourceKind::binary) {
    const auto values = table.binary(d.label);
    return SampleMask::from_predicate(n, [&](std::size_t i) { return values[i] == 1; });
  }
  const auto assigned = table.assignments(d.source, table.spec().granularity_of(d.label));
  return SampleMask::from_predicate(n, [&](std::size_t i) { return assigned[i] == d.label; });
}

ConditionSet::ConditionSet(GranularityId target, std::vector<ConditionDescriptor> descriptors,
                           std::vector<Provenance> provenance, std::vector<SampleMask> masks)
    : target_(target), masks_(std::move(masks)) {
  if (descriptors.size() != provenance.size() || descriptors.size() != masks_.size()) {
    throw std::invalid_argument("condition set: descriptor/provenance/mask counts differ");
  }
  if (!masks_.empty()) n_samples_ = masks_.front().size();
  std::set<ConditionDescriptor> seen;
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (!seen.insert(descriptors[i]).second) throw std::invalid_argument("condition set: duplicate descriptor");
    if (masks_[i].size() != n_samples_) throw std::invalid_argument("condition set: mask size mismatch");
    conditions_.push_back({static_cast<ConditionId>(i), descriptors[i], provenance[i]});
  }
}

std::optional<ConditionId> ConditionSet::find(const ConditionDescriptor& d) const {
  for (const auto& c : conditions_) {
    if (c.descriptor == d) return c.id;
  }
  return std::nullopt;
}

ConditionSet build_condition_set(const PredictionTable& table, GranularityId g, const SourceToggles& include) {
  const GranularitySpec& spec = table.spec();
  if (g >= spec.granularity_count()) throw std::invalid_argument("granularity id out of range");

  std::vector<ConditionDescriptor> descriptors;
  std::vector<Provenance> provenance;
  auto add = [&](ConditionDescriptor d, Provenance p) {
    descriptors.push_back(d);
    provenance.push_back(p);
  };

  for (LabelId y = 0; y < spec.label_count(); ++y) {
    if (spec.granularity_of(y) != g) add({SourceKind::main, y}, Provenance::main_other_granularity);
  }
  if (include.secondary) {
    if (!table.has_secondary()) throw DataError("secondary conditions requested but the table has no secondary source");
    for (LabelId y = 0; y < spec.label_count(); ++y) add({SourceKind::secondary, y}, Provenance::secondary);
  }
  if (include.binary) {
    std::vector<LabelId> labels = include.binary_labels ? *include.binary_labels : table.binary_labels();
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (!include.binary_labels && labels.empty()) {
      throw DataError("binary conditions requested but the table has no bin.<label> columns");
    }
    for (LabelId y : labels) {
      if (!table.has_binary(y)) {
        throw DataError("binary condition requested for label '" + spec.label_name(y) +
                        "' but the table has no bin." + spec.label_name(y) + " column");
      }
      add({SourceKind::binary, y}, Provenance::binary);
    }
  }

  std::vector<SampleMask> masks;
  masks.reserve(descriptors.size());
  for (const auto& d : descriptors) masks.push_back(condition_mask(d, table));
  return ConditionSet(g, std::move(descriptors), std::move(provenance), std::move(masks));
}

std::vector<ConditionSet> build_all_condition_sets(const PredictionTable& table, const SourceToggles& include) {
  std::vector<ConditionSet> out;
  for (GranularityId g = 0; g < table.spec().granularity_count(); ++g) {
    out.push_back(build_condition_set(table, g, include));
  }
  return out;
}

}  // namespace edr
