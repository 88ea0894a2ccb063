#include "edr/detection.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

#include "edr/counters.hpp"
#include "edr/errors.hpp"

namespace edr {

namespace {

LabelId translate(LabelId id, const GranularitySpec& from, const GranularitySpec& to) {
  const std::string& name = from.label_name(id);
  const auto mapped = to.find_label(name);
  if (!mapped) throw DataError("rule references label '" + name + "' which the table does not have");
  if (to.granularity_name(to.granularity_of(*mapped)) != from.granularity_name(from.granularity_of(id))) {
    throw DataError("label '" + name + "' belongs to different granularities in the rules and the table");
  }
  return *mapped;
}

double safe_div(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ErrorFlags apply_rules(const RuleSet& rules, const PredictionTable& table) {
  const GranularitySpec& spec = table.spec();
  const std::size_t n = table.n_samples();
  ErrorFlags flags{std::vector<SampleMask>(spec.label_count(), SampleMask(n)), SampleMask(n)};

  for (const DetectionRule* rule : rules.rules()) {
    const LabelId y = translate(rule->target, rules.spec(), spec);
    SampleMask body(n);
    for (const auto& d : rule->conditions) {
      const ConditionDescriptor local{d.source, translate(d.label, rules.spec(), spec)};
      if (local.source == SourceKind::secondary && !table.has_secondary()) {
        throw DataError("rule for '" + spec.label_name(y) + "' uses " + render(local, spec) +
                        " but the table has no secondary source");
      }
      if (local.source == SourceKind::binary && !table.has_binary(local.label)) {
        throw DataError("rule for '" + spec.label_name(y) + "' uses " + render(local, spec) +
                        " but the table has no bin." + spec.label_name(local.label) + " column");
      }
      body |= condition_mask(local, table);
    }
    flags.per_label[y] = body & ClassContext::from_table(y, table).predicted();
    flags.total |= flags.per_label[y];
  }
  return flags;
}

ErrorMetrics ErrorMetrics::from_masks(const SampleMask& flagged, const SampleMask& truth) {
  ErrorMetrics m;
  m.tp = (flagged & truth).count();
  m.fp = flagged.count() - m.tp;
  m.fn = truth.count() - m.tp;
  m.tn = flagged.size() - m.tp - m.fp - m.fn;
  return m;
}

double ErrorMetrics::precision() const { return safe_div(tp, tp + fp); }
double ErrorMetrics::recall() const { return safe_div(tp, tp + fn); }
double ErrorMetrics::f1() const { return safe_div(2 * tp, 2 * tp + fp + fn); }
double ErrorMetrics::balanced_accuracy() const { return (safe_div(tp, tp + fn) + safe_div(tn, tn + fp)) / 2.0; }

MetricsReport error_metrics(const ErrorFlags& flags, const PredictionTable& table) {
  const GranularitySpec& spec = table.spec();
  if (flags.per_label.size() != spec.label_count() || flags.total.size() != table.n_samples()) {
    throw std::invalid_argument("error flags were not produced against this table");
  }
  MetricsReport report;
  for (LabelId y = 0; y < spec.label_count(); ++y) {
    report.per_label.push_back(
        ErrorMetrics::from_masks(flags.per_label[y], ClassContext::from_table(y, table).false_positives()));
  }
  const SampleMask wrong =
      SampleMask::from_predicate(table.n_samples(), [&](std::size_t i) { return table.main_wrong(i); });
  report.total = ErrorMetrics::from_masks(flags.total, wrong);
  return report;
}

namespace {

nlohmann::ordered_json metrics_json(const ErrorMetrics& m) {
  return {{"tp", m.tp},
          {"fp", m.fp},
          {"tn", m.tn},
          {"fn", m.fn},
          {"precision", m.precision()},
          {"recall", m.recall()},
          {"f1", m.f1()},
          {"balanced_accuracy", m.balanced_accuracy()}};
}

std::string fixed(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

}  // namespace

nlohmann::ordered_json to_json(const MetricsReport& report, const GranularitySpec& spec) {
  nlohmann::ordered_json per_label = nlohmann::ordered_json::object();
  for (LabelId y = 0; y < report.per_label.size(); ++y) {
    per_label[spec.label_name(y)] = metrics_json(report.per_label[y]);
  }
  return {{"zero_division", "0/0 terms are reported as 0"},
          {"total", metrics_json(report.total)},
          {"per_label", per_label}};
}

void write_metrics_csv(const MetricsReport& report, const GranularitySpec& spec, std::ostream& out) {
  out << "label,tp,fp,tn,fn,precision,recall,f1,balanced_accuracy\n";
  auto row = [&](const std::string& name, const ErrorMetrics& m) {
    out << name << ',' << m.tp << ',' << m.fp << ',' << m.tn << ',' << m.fn << ',' << fixed(m.precision()) << ','
        << fixed(m.recall()) << ',' << fixed(m.f1()) << ',' << fixed(m.balanced_accuracy()) << '\n';
  };
  for (LabelId y = 0; y < report.per_label.size(); ++y) row(spec.label_name(y), report.per_label[y]);
  row("__total__", report.total);
}

ConstraintSet recover_constraints(const RuleSet& rules) {
  const GranularitySpec& spec = rules.spec();
  ConstraintSet out;
  for (const DetectionRule* rule : rules.rules()) {
    const GranularityId g = spec.granularity_of(rule->target);
    for (const auto& d : rule->conditions) {
      if (d.source == SourceKind::main && spec.granularity_of(d.label) != g) {
        out.insert(spec.label_name(rule->target), spec.label_name(d.label));
      }
    }
  }
  return out;
}

SetScores constraint_f1(const ConstraintSet& recovered, const ConstraintSet& truth) {
  SetScores s;
  for (const auto& [y, v] : recovered) {
    if (truth.contains(y, v)) {
      ++s.tp;
    } else {
      ++s.fp;
    }
  }
  s.fn = truth.size() - s.tp;
  if (recovered.empty() && truth.empty()) {
    s.precision = s.recall = s.f1 = 1.0;
    return s;
  }
  s.precision = safe_div(s.tp, s.tp + s.fp);
  s.recall = safe_div(s.tp, s.tp + s.fn);
  s.f1 = safe_div(2 * s.tp, 2 * s.tp + s.fp + s.fn);
  return s;
}

Inconsistency inconsistency_rate(const PredictionTable& table, const ConstraintSet& constraints) {
  const GranularitySpec& spec = table.spec();
  constraints.validate(spec);
  std::vector<std::pair<LabelId, LabelId>> pairs;
  for (const auto& [y, v] : constraints) pairs.emplace_back(*spec.find_label(y), *spec.find_label(v));

  Inconsistency out;
  out.total = table.n_samples();
  for (std::size_t i = 0; i < table.n_samples(); ++i) {
    auto assigned = [&](LabelId y) { return table.assignments(SourceKind::main, spec.granularity_of(y))[i] == y; };
    for (const auto& [y, v] : pairs) {
      if (assigned(y) && assigned(v)) {
        ++out.violating;
        break;
      }
    }
  }
  return out;
}

}  // namespace edr
