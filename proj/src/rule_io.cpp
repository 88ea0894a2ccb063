#include "edr/learner.hpp"

#include <fstream>
#include <sstream>

#include "edr/errors.hpp"

namespace edr {

nlohmann::ordered_json to_json(const RuleSet& rules) {
  const GranularitySpec& spec = rules.spec();
  nlohmann::ordered_json body = nlohmann::ordered_json::object();
  for (LabelId y = 0; y < spec.label_count(); ++y) {
    const auto& rule = rules.rule(y);
    if (!rule) {
      body[spec.label_name(y)] = nullptr;
      continue;
    }
    nlohmann::ordered_json conds = nlohmann::ordered_json::array();
    for (const auto& d : rule->conditions) conds.push_back(render(d, spec));
    body[spec.label_name(y)] = {
        {"granularity", spec.granularity_name(spec.granularity_of(y))},
        {"conditions", conds},
        {"pos", rule->diagnostics.pos},
        {"bod", rule->diagnostics.bod},
        {"fp", rule->diagnostics.fp},
        {"objective", rule->diagnostics.objective.to_string()},
    };
  }
  nlohmann::ordered_json out;
  out["format"] = kRulesFormat;
  out["config"] = rules.config;
  out["granularities"] = to_json(spec)["granularities"];
  out["rules"] = body;
  return out;
}

RuleSet rule_set_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rules") || !j.contains("granularities")) {
    throw DataError("rule JSON must contain 'granularities' and 'rules'");
  }
  if (j.contains("format") && j["format"] != kRulesFormat) {
    throw DataError("unsupported rule format '" + j["format"].dump() + "'");
  }
  auto spec = std::make_shared<const GranularitySpec>(granularity_spec_from_json(j));
  RuleSet out(spec);
  if (j.contains("config")) out.config = j["config"];
  if (!j["rules"].is_object()) throw DataError("'rules' must be an object keyed by label");
  for (const auto& [name, entry] : j["rules"].items()) {
    const auto y = spec->find_label(name);
    if (!y) throw DataError("rule for unknown label '" + name + "'");
    if (entry.is_null()) continue;
    try {
      DetectionRule rule;
      rule.target = *y;
      for (const auto& text : entry.at("conditions")) {
        rule.conditions.push_back(parse_condition(text.get<std::string>(), *spec));
      }
      rule.diagnostics.pos = entry.value("pos", std::uint64_t{0});
      rule.diagnostics.bod = entry.value("bod", std::uint64_t{0});
      rule.diagnostics.fp = entry.value("fp", std::uint64_t{0});
      rule.diagnostics.objective = Ratio::parse(entry.value("objective", std::string("0/0")));
      out.set(*y, std::move(rule));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed rule for '" + name + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError("invalid rule for '" + name + "': " + e.what());
    }
  }
  return out;
}

RuleSet load_rule_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open rule file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("rule file '" + path + "' is not valid JSON: " + e.what());
  }
  return rule_set_from_json(j);
}

std::string render_rules_text(const RuleSet& rules) {
  const GranularitySpec& spec = rules.spec();
  std::ostringstream out;
  for (const DetectionRule* rule : rules.rules()) {
    const std::string& y = spec.label_name(rule->target);
    out << "error_" << y << "(X) <- "
        << render(ConditionDescriptor{SourceKind::main, rule->target}, spec) << "(X) ∧ ( ";
    for (std::size_t i = 0; i < rule->conditions.size(); ++i) {
      if (i) out << " ∨ ";
      out << render(rule->conditions[i], spec) << "(X)";
    }
    out << " )\n";
  }
  return out.str();
}

}  // namespace edr
