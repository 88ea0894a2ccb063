#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "edr/condition.hpp"
#include "edr/constraint_set.hpp"
#include "edr/detection.hpp"
#include "edr/errors.hpp"
#include "edr/experiments.hpp"
#include "edr/learner.hpp"
#include "edr/prediction_table.hpp"

namespace edr::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TableArgs {
  std::string predictions;
  std::string labels;
};

struct SourceArgs {
  std::vector<std::string> sources{"main"};
  std::vector<std::string> bin_labels;
};

void add_table_options(CLI::App* cmd, TableArgs& args) {
  cmd->add_option("--predictions", args.predictions, "Prediction table CSV")->required();
  cmd->add_option("--labels", args.labels, "Label universe JSON (inferred from the table when omitted)");
}

void add_source_options(CLI::App* cmd, SourceArgs& args) {
  cmd->add_option("--sources", args.sources, "Condition sources: main,secondary,bin")
      ->delimiter(',')
      ->check(CLI::IsMember({"main", "secondary", "bin"}));
  cmd->add_option("--bin-labels", args.bin_labels, "Restrict binary conditions to these labels")->delimiter(',');
}

void add_synth_options(CLI::App* cmd, SynthSpec& spec, bool& no_secondary, bool& no_binary) {
  cmd->add_option("--n-coarse", spec.n_coarse, "Number of coarse classes")->capture_default_str();
  cmd->add_option("--fine-per-coarse", spec.fine_per_coarse, "Fine classes under each coarse class")
      ->capture_default_str();
  cmd->add_option("--samples", spec.n_samples, "Samples to generate")->capture_default_str();
  cmd->add_option("--p-fine", spec.errors.main_fine, "Main-model fine error probability")->capture_default_str();
  cmd->add_option("--p-coarse", spec.errors.main_coarse, "Main-model coarse error probability")
      ->capture_default_str();
  cmd->add_option("--p-within", spec.errors.fine_within_parent,
                  "Probability a fine error stays under the true parent")
      ->capture_default_str();
  cmd->add_option("--p-secondary", spec.errors.secondary, "Secondary-model error probability")
      ->capture_default_str();
  cmd->add_option("--p-flip", spec.errors.binary_flip, "Binary-model flip probability")->capture_default_str();
  cmd->add_flag("--exclusive-errors", spec.errors.exclusive, "Main model errs at most at one granularity");
  cmd->add_flag("--no-secondary", no_secondary, "Do not emit a secondary model");
  cmd->add_flag("--no-binary", no_binary, "Do not emit binary models");
}

ParseOptions parse_options(const TableArgs& args) {
  ParseOptions options;
  if (!args.labels.empty()) options.labels = load_granularity_spec(args.labels);
  return options;
}

SourceToggles toggles_for(const SourceArgs& args, const GranularitySpec* spec) {
  SourceToggles t;
  bool main = false;
  for (const auto& s : args.sources) {
    if (s == "main") main = true;
    if (s == "secondary") t.secondary = true;
    if (s == "bin") t.binary = true;
  }
  if (!main) throw UsageError("--sources must include main");
  if (!args.bin_labels.empty()) {
    if (!t.binary) throw UsageError("--bin-labels requires bin in --sources");
    if (spec) {
      std::vector<LabelId> ids;
      for (const auto& name : args.bin_labels) {
        auto id = spec->find_label(name);
        if (!id) throw DataError("--bin-labels: unknown label '" + name + "'");
        ids.push_back(*id);
      }
      t.binary_labels = ids;
    }
  }
  return t;
}

ojson sources_json(const SourceArgs& args) {
  ojson j;
  j["sources"] = args.sources;
  j["bin_labels"] = args.bin_labels;
  return j;
}

ojson run_config(const std::string& command, const ojson& options) {
  return {{"version", kArtifactVersion}, {"command", command}, {"options", options}};
}

std::string config_comment(const ojson& config) { return "edr-config " + config.dump(); }

fs::path prepare_out(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << content;
}

std::string json_text(const ojson& j) { return j.dump(2) + "\n"; }

void write_artifact(const fs::path& path, const ojson& config, const ojson& body) {
  ojson j;
  j["format"] = kArtifactVersion;
  j["config"] = config;
  for (const auto& [k, v] : body.items()) j[k] = v;
  write_file(path, json_text(j));
}

std::string fixed(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

// --- subcommands -----------------------------------------------------------

struct LearnArgs {
  TableArgs table;
  SourceArgs sources;
  unsigned threads = 1;
  std::string out;
};

void cmd_learn(const LearnArgs& a, std::ostream& out) {
  const PredictionTable table = parse_prediction_table(a.table.predictions, parse_options(a.table));
  const SourceToggles toggles = toggles_for(a.sources, &table.spec());
  if (table.n_samples() == 0) throw DataError("cannot learn rules from an empty table");
  RuleSet rules = learn_all(table, build_all_condition_sets(table, toggles), a.threads);
  ojson options = {{"predictions", a.table.predictions}, {"labels", a.table.labels}};
  const ojson source_options = sources_json(a.sources);
  for (const auto& [k, v] : source_options.items()) options[k] = v;
  rules.config = run_config("learn", options);

  const fs::path dir = prepare_out(a.out);
  write_file(dir / "rules.json", json_text(to_json(rules)));
  write_file(dir / "rules.txt", "# " + config_comment(rules.config) + "\n" + render_rules_text(rules));
  out << "learned " << rules.rule_count() << " rules over " << table.spec().label_count() << " labels\n";
}

struct DetectArgs {
  TableArgs table;
  std::string rules;
  std::string out;
};

void cmd_detect(const DetectArgs& a, std::ostream& out) {
  const PredictionTable table = parse_prediction_table(a.table.predictions, parse_options(a.table));
  const RuleSet rules = load_rule_set(a.rules);
  const ErrorFlags flags = apply_rules(rules, table);
  const MetricsReport report = error_metrics(flags, table);
  const ojson config =
      run_config("detect", {{"predictions", a.table.predictions}, {"labels", a.table.labels}, {"rules", a.rules}});

  const fs::path dir = prepare_out(a.out);
  const GranularitySpec& spec = table.spec();
  std::vector<LabelId> ruled;
  for (const DetectionRule* r : rules.rules()) ruled.push_back(*spec.find_label(rules.spec().label_name(r->target)));
  std::sort(ruled.begin(), ruled.end());

  std::ostringstream csv;
  csv << "# " << config_comment(config) << "\nsample_id";
  for (LabelId y : ruled) csv << ",error_" << spec.label_name(y);
  csv << ",total\n";
  for (std::size_t i = 0; i < table.n_samples(); ++i) {
    csv << table.sample_ids()[i];
    for (LabelId y : ruled) csv << ',' << (flags.per_label[y].test(i) ? 1 : 0);
    csv << ',' << (flags.total.test(i) ? 1 : 0) << '\n';
  }
  write_file(dir / "flags.csv", csv.str());
  write_artifact(dir / "metrics.json", config, to_json(report, spec));
  std::ostringstream mcsv;
  mcsv << "# " << config_comment(config) << '\n';
  write_metrics_csv(report, spec, mcsv);
  write_file(dir / "metrics.csv", mcsv.str());
  out << "total error: f1 " << fixed(report.total.f1()) << ", balanced accuracy "
      << fixed(report.total.balanced_accuracy()) << '\n';
}

struct ConstraintsArgs {
  std::string rules;
  std::string truth;
  std::string gt_from;
  std::string labels;
  bool symmetric = false;
  std::string out;
};

void cmd_constraints(const ConstraintsArgs& a, std::ostream& out) {
  const RuleSet rules = load_rule_set(a.rules);
  ConstraintSet recovered = recover_constraints(rules);
  if (a.symmetric) recovered = recovered.symmetric_closure();
  const ojson config = run_config("constraints", {{"rules", a.rules},
                                                  {"truth", a.truth},
                                                  {"gt_from", a.gt_from},
                                                  {"labels", a.labels},
                                                  {"symmetric", a.symmetric}});
  const fs::path dir = prepare_out(a.out);
  write_artifact(dir / "constraints.json", config, to_json(recovered));

  std::optional<ConstraintSet> truth;
  if (!a.gt_from.empty()) {
    const PredictionTable table = parse_prediction_table(a.gt_from, parse_options({a.gt_from, a.labels}));
    if (table.n_samples() == 0) throw DataError("cannot derive constraints from an empty table");
    truth = derive_gt_constraints(table);
    write_artifact(dir / "gt_constraints.json", config, to_json(*truth));
  }
  if (!a.truth.empty()) truth = load_constraint_set(a.truth);

  out << "recovered " << recovered.size() << " constraint pairs\n";
  if (truth) {
    const SetScores s = constraint_f1(recovered, *truth);
    write_artifact(dir / "constraint_report.json", config,
                   {{"counting", "directed pairs"},
                    {"recovered", recovered.size()},
                    {"truth", truth->size()},
                    {"tp", s.tp},
                    {"fp", s.fp},
                    {"fn", s.fn},
                    {"precision", s.precision},
                    {"recall", s.recall},
                    {"f1", s.f1}});
    out << "precision " << fixed(s.precision) << ", recall " << fixed(s.recall) << ", f1 " << fixed(s.f1) << '\n';
  }
}

struct EvalArgs {
  TableArgs table;
  std::string constraints;
  std::string out;
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const PredictionTable table = parse_prediction_table(a.table.predictions, parse_options(a.table));
  ConstraintSet constraints;
  if (a.constraints.empty()) {
    if (table.n_samples() == 0) throw DataError("cannot derive constraints from an empty table");
    constraints = derive_gt_constraints(table);
  } else {
    constraints = load_constraint_set(a.constraints);
  }
  const Inconsistency inc = inconsistency_rate(table, constraints);
  const ojson config = run_config(
      "eval", {{"predictions", a.table.predictions}, {"labels", a.table.labels}, {"constraints", a.constraints}});
  const fs::path dir = prepare_out(a.out);
  write_artifact(dir / "inconsistency.json", config,
                 {{"constraints_source", a.constraints.empty() ? "ground truth of --predictions" : a.constraints},
                  {"violating", inc.violating},
                  {"samples", inc.total},
                  {"rate", inc.rate()}});
  out << "inconsistency " << inc.violating << "/" << inc.total << " = " << fixed(inc.rate()) << '\n';
}

struct SynthArgs {
  SynthSpec spec;
  bool no_secondary = false;
  bool no_binary = false;
  std::string out;
};

void cmd_synth(SynthArgs a, std::ostream& out) {
  a.spec.secondary = !a.no_secondary;
  a.spec.binary = !a.no_binary;
  try {
    a.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SynthResult result = synth_generate(a.spec);
  const ojson config = run_config("synth", to_json(a.spec));
  const fs::path dir = prepare_out(a.out);
  std::ostringstream csv;
  write_prediction_table(result.table, csv, {config_comment(config)});
  write_file(dir / "predictions.csv", csv.str());
  write_artifact(dir / "labels.json", config, to_json(result.table.spec()));
  write_artifact(dir / "constraints.json", config, to_json(result.truth));
  out << "wrote " << result.table.n_samples() << " samples, " << result.truth.size() << " truth constraints\n";
}

struct SweepArgs {
  SynthArgs synth;
  SourceArgs sources;
  std::vector<double> ratios{0.0};
  std::size_t seeds = 1;
  std::uint64_t seed = 0;
  std::size_t test_samples = 1000;
  std::string out;
};

void cmd_noise_sweep(SweepArgs a, std::ostream& out) {
  SweepConfig config;
  config.synth = a.synth.spec;
  config.synth.secondary = !a.synth.no_secondary;
  config.synth.binary = !a.synth.no_binary;
  config.ratios = a.ratios;
  config.n_seeds = a.seeds;
  config.seed = a.seed;
  config.test_samples = a.test_samples;
  config.conditions = toggles_for(a.sources, nullptr);
  if (config.conditions.secondary && !config.synth.secondary) {
    throw UsageError("--sources secondary conflicts with --no-secondary");
  }
  if (config.conditions.binary && !config.synth.binary) throw UsageError("--sources bin conflicts with --no-binary");
  if (!a.sources.bin_labels.empty()) throw UsageError("--bin-labels is not supported by noise-sweep");
  try {
    config.synth.validate();
    for (double r : config.ratios) removed_class_count(r, 1);
    if (config.n_seeds == 0 || config.test_samples == 0) throw std::invalid_argument("--seeds and --test-samples must be positive");
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  ojson synth_json = to_json(config.synth);
  synth_json.erase("seed");
  ojson options = {{"synth", synth_json},
                   {"ratios", a.ratios},
                   {"seeds", a.seeds},
                   {"seed", a.seed},
                   {"test_samples", a.test_samples}};
  const ojson source_options = sources_json(a.sources);
  for (const auto& [k, v] : source_options.items()) options[k] = v;
  const ojson run = run_config("noise-sweep", options);

  const auto rows = run_noise_sweep(config);
  const fs::path dir = prepare_out(a.out);
  std::ostringstream csv;
  write_sweep_csv(rows, csv, {config_comment(run)});
  write_file(dir / "sweep.csv", csv.str());
  out << "wrote " << rows.size() << " sweep rows\n";
}

struct OracleArgs {
  TableArgs table;
  SourceArgs sources;
  std::size_t max_conditions = 20;
  std::string out;
};

void cmd_oracle_check(const OracleArgs& a, std::ostream& out) {
  const PredictionTable table = parse_prediction_table(a.table.predictions, parse_options(a.table));
  if (table.n_samples() == 0) throw DataError("cannot learn rules from an empty table");
  if (a.max_conditions > kBruteForceCeiling) {
    throw UsageError("--max-conditions may not exceed " + std::to_string(kBruteForceCeiling));
  }
  const SourceToggles toggles = toggles_for(a.sources, &table.spec());
  const auto sets = build_all_condition_sets(table, toggles);
  for (const auto& cs : sets) {
    if (cs.size() > a.max_conditions) {
      throw DataError("granularity '" + table.spec().granularity_name(cs.target()) + "' has " +
                      std::to_string(cs.size()) + " conditions, above --max-conditions " +
                      std::to_string(a.max_conditions) + "; use learn for the greedy path");
    }
  }
  ojson options = {{"predictions", a.table.predictions}, {"labels", a.table.labels}, {"max_conditions", a.max_conditions}};
  const ojson source_options = sources_json(a.sources);
  for (const auto& [k, v] : source_options.items()) options[k] = v;
  const ojson config = run_config("oracle-check", options);

  const GranularitySpec& spec = table.spec();
  std::ostringstream csv;
  csv << "# " << config_comment(config) << '\n'
      << "label,granularity,conditions,greedy_objective,optimal_objective,quality\n";
  ojson per_label = ojson::object();
  double quality_sum = 0;
  std::size_t scored = 0;
  bool sandwich_ok = true;
  for (LabelId y = 0; y < spec.label_count(); ++y) {
    const ConditionSet& cs = sets[spec.granularity_of(y)];
    const auto greedy = ratio_det_rule_learn(y, cs, table);
    const auto best = brute_force_optimal(y, cs, table, a.max_conditions);
    const Ratio g = greedy ? greedy->diagnostics.objective : Ratio::undefined();
    const Ratio b = best ? best->diagnostics.objective : Ratio::undefined();
    sandwich_ok = sandwich_ok && !(g > b);
    const double quality = b.is_undefined() || b.numerator() == 0 ? 1.0 : g.to_double() / b.to_double();
    if (best) {
      quality_sum += quality;
      ++scored;
    }
    csv << spec.label_name(y) << ',' << spec.granularity_name(spec.granularity_of(y)) << ',' << cs.size() << ','
        << g.to_string() << ',' << b.to_string() << ',' << fixed(quality) << '\n';
    per_label[spec.label_name(y)] = {{"greedy", g.to_string()}, {"optimal", b.to_string()}, {"quality", quality}};
  }
  const double mean = scored ? quality_sum / static_cast<double>(scored) : 1.0;
  const fs::path dir = prepare_out(a.out);
  write_file(dir / "oracle.csv", csv.str());
  write_artifact(dir / "oracle.json", config,
                 {{"labels_with_optimum", scored},
                  {"mean_quality", mean},
                  {"greedy_never_exceeds_optimum", sandwich_ok},
                  {"per_label", per_label}});
  out << "mean greedy/optimal " << fixed(mean) << " over " << scored << " labels; greedy <= optimum: "
      << (sandwich_ok ? "yes" : "NO") << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Learn error-detection rules over hierarchical classifier predictions and recover constraints", "edr"};
  app.require_subcommand(1);

  LearnArgs learn;
  auto* learn_cmd = app.add_subcommand("learn", "Learn one detection rule per label");
  add_table_options(learn_cmd, learn.table);
  add_source_options(learn_cmd, learn.sources);
  learn_cmd->add_option("--threads", learn.threads, "Worker threads for per-label learning")->capture_default_str();
  learn_cmd->add_option("--out", learn.out, "Output directory")->required();

  DetectArgs detect;
  auto* detect_cmd = app.add_subcommand("detect", "Apply rules and score error detection");
  add_table_options(detect_cmd, detect.table);
  detect_cmd->add_option("--rules", detect.rules, "rules.json from learn")->required();
  detect_cmd->add_option("--out", detect.out, "Output directory")->required();

  ConstraintsArgs constraints;
  auto* constraints_cmd = app.add_subcommand("constraints", "Recover hierarchy constraints from rule bodies");
  constraints_cmd->add_option("--rules", constraints.rules, "rules.json from learn")->required();
  constraints_cmd->add_option("--truth", constraints.truth, "Ground-truth constraint JSON to score against");
  constraints_cmd->add_option("--gt-from", constraints.gt_from,
                              "Derive truth constraints from this table's ground truth");
  constraints_cmd->add_option("--labels", constraints.labels, "Label universe JSON for --gt-from");
  constraints_cmd->add_flag("--symmetric", constraints.symmetric, "Add the reverse of every recovered pair");
  constraints_cmd->add_option("--out", constraints.out, "Output directory")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Fraction of samples whose predictions violate constraints");
  add_table_options(eval_cmd, eval.table);
  eval_cmd->add_option("--constraints", eval.constraints,
                       "Constraint JSON (default: derived from the table's ground truth)");
  eval_cmd->add_option("--out", eval.out, "Output directory")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic prediction table and its truth constraints");
  add_synth_options(synth_cmd, synth.spec, synth.no_secondary, synth.no_binary);
  synth_cmd->add_option("--seed", synth.spec.seed, "Random seed")->required();
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("noise-sweep", "Constraint recovery and detection under label noise");
  add_synth_options(sweep_cmd, sweep.synth.spec, sweep.synth.no_secondary, sweep.synth.no_binary);
  add_source_options(sweep_cmd, sweep.sources);
  sweep_cmd->add_option("--ratios", sweep.ratios, "Noise ratios, comma separated")->delimiter(',');
  sweep_cmd->add_option("--seeds", sweep.seeds, "Number of seeds")->capture_default_str();
  sweep_cmd->add_option("--seed", sweep.seed, "Base random seed")->required();
  sweep_cmd->add_option("--test-samples", sweep.test_samples, "Samples in each clean test table")
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();

  OracleArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Compare the greedy learner with exhaustive search");
  add_table_options(oracle_cmd, oracle.table);
  add_source_options(oracle_cmd, oracle.sources);
  oracle_cmd->add_option("--max-conditions", oracle.max_conditions, "Largest condition set to enumerate")
      ->capture_default_str();
  oracle_cmd->add_option("--out", oracle.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*learn_cmd) cmd_learn(learn, out);
    if (*detect_cmd) cmd_detect(detect, out);
    if (*constraints_cmd) cmd_constraints(constraints, out);
    if (*eval_cmd) cmd_eval(eval, out);
    if (*synth_cmd) cmd_synth(synth, out);
    if (*sweep_cmd) cmd_noise_sweep(sweep, out);
    if (*oracle_cmd) cmd_oracle_check(oracle, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace edr::cli
