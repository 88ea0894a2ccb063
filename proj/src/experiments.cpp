#include "edr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "edr/errors.hpp"
#include "edr/learner.hpp"
#include "edr/rng.hpp"

namespace edr {

void SynthSpec::validate() const {
  if (n_coarse == 0 || fine_per_coarse == 0 || n_samples == 0) {
    throw std::invalid_argument("synthetic spec counts must be at least 1");
  }
  if (n_coarse < 2 || n_coarse * fine_per_coarse < 2) {
    throw std::invalid_argument("synthetic spec needs at least 2 coarse and 2 fine labels");
  }
  const double probs[] = {errors.main_fine, errors.main_coarse, errors.fine_within_parent, errors.secondary,
                          errors.binary_flip};
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("synthetic error probabilities must lie in [0, 1]");
  }
  if (errors.exclusive && errors.main_fine + errors.main_coarse > 1.0) {
    throw std::invalid_argument("exclusive errors need main_fine + main_coarse <= 1");
  }
}

nlohmann::ordered_json to_json(const SynthSpec& spec) {
  return {{"n_coarse", spec.n_coarse},
          {"fine_per_coarse", spec.fine_per_coarse},
          {"n_samples", spec.n_samples},
          {"p_main_fine", spec.errors.main_fine},
          {"p_main_coarse", spec.errors.main_coarse},
          {"p_fine_within_parent", spec.errors.fine_within_parent},
          {"p_secondary", spec.errors.secondary},
          {"p_binary_flip", spec.errors.binary_flip},
          {"exclusive_errors", spec.errors.exclusive},
          {"secondary", spec.secondary},
          {"binary", spec.binary},
          {"seed", spec.seed}};
}

namespace {

// Uniform pick from [0, n) excluding `skip`.
std::size_t pick_other(Rng& rng, std::size_t n, std::size_t skip) {
  const std::size_t r = rng.uniform(n - 1);
  return r >= skip ? r + 1 : r;
}

}  // namespace

SynthResult synth_generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n_c = spec.n_coarse;
  const std::size_t per = spec.fine_per_coarse;
  const std::size_t n_f = n_c * per;

  GranularitySpec::Level fine{"fine", {}};
  GranularitySpec::Level coarse{"coarse", {}};
  for (std::size_t c = 0; c < n_c; ++c) {
    coarse.labels.push_back("C" + std::to_string(c));
    for (std::size_t j = 0; j < per; ++j) fine.labels.push_back("c" + std::to_string(c) + "_f" + std::to_string(j));
  }
  auto labels = std::make_shared<const GranularitySpec>(std::vector{fine, coarse});
  const auto fine_id = [](std::size_t f) { return static_cast<LabelId>(f); };
  const auto coarse_id = [&](std::size_t c) { return static_cast<LabelId>(n_f + c); };

  Rng rng(spec.seed);
  PredictionTable::Columns cols;
  cols.gt.assign(2, {});
  cols.main.assign(2, {});
  if (spec.secondary) cols.secondary.assign(2, {});
  if (spec.binary) {
    for (LabelId y = 0; y < labels->label_count(); ++y) cols.binary[y] = {};
  }

  const ErrorProfile& e = spec.errors;
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    cols.sample_ids.push_back("s" + std::to_string(i + 1));
    const std::size_t f = rng.uniform(n_f);
    const std::size_t c = f / per;
    cols.gt[0].push_back(fine_id(f));
    cols.gt[1].push_back(coarse_id(c));

    bool fine_err = false;
    bool coarse_err = false;
    if (e.exclusive) {
      const double r = rng.uniform01();
      fine_err = r < e.main_fine;
      coarse_err = !fine_err && r < e.main_fine + e.main_coarse;
    } else {
      fine_err = rng.bernoulli(e.main_fine);
      coarse_err = rng.bernoulli(e.main_coarse);
    }

    std::size_t pf = f;
    if (fine_err) {
      const bool within = per > 1 && (n_c == 1 || rng.bernoulli(e.fine_within_parent));
      if (within) {
        pf = c * per + pick_other(rng, per, f % per);
      } else {
        // Uniform over fine labels outside the parent block.
        std::size_t r = rng.uniform(n_f - per);
        pf = r >= c * per ? r + per : r;
      }
    }
    const std::size_t pc = coarse_err ? pick_other(rng, n_c, c) : c;
    cols.main[0].push_back(fine_id(pf));
    cols.main[1].push_back(coarse_id(pc));

    if (spec.secondary) {
      const std::size_t sf = rng.bernoulli(e.secondary) ? pick_other(rng, n_f, f) : f;
      const std::size_t sc = rng.bernoulli(e.secondary) ? pick_other(rng, n_c, c) : c;
      cols.secondary[0].push_back(fine_id(sf));
      cols.secondary[1].push_back(coarse_id(sc));
    }
    if (spec.binary) {
      for (auto& [y, values] : cols.binary) {
        const bool truth = y < n_f ? y == fine_id(f) : y == coarse_id(c);
        values.push_back(static_cast<std::uint8_t>(truth != rng.bernoulli(e.binary_flip)));
      }
    }
  }

  ConstraintSet truth;
  for (std::size_t f = 0; f < n_f; ++f) {
    for (std::size_t c = 0; c < n_c; ++c) {
      if (f / per == c) continue;
      truth.insert(fine.labels[f], coarse.labels[c]);
      truth.insert(coarse.labels[c], fine.labels[f]);
    }
  }
  return {PredictionTable(labels, std::move(cols)), std::move(truth)};
}

std::size_t removed_class_count(double noise_ratio, std::size_t n_fine) {
  if (!(noise_ratio >= 0.0 && noise_ratio < 1.0)) {
    throw std::invalid_argument("noise ratio must lie in [0, 1)");
  }
  // The epsilon keeps products such as 0.6 * 10 from flooring to 5.
  return static_cast<std::size_t>(std::floor(noise_ratio * static_cast<double>(n_fine) + 1e-9));
}

namespace {

struct Selection {
  GranularityId fine;
  std::vector<bool> removed;  // indexed by label id
};

Selection select_removed(const PredictionTable& table, const NoiseSpec& spec) {
  const GranularitySpec& labels = table.spec();
  const auto g = labels.find_granularity(spec.fine_granularity);
  if (!g) throw std::invalid_argument("no granularity named '" + spec.fine_granularity + "'");
  const LabelId first = labels.first_label(*g);
  const std::size_t n_fine = labels.labels_in(*g);
  const std::size_t k = removed_class_count(spec.noise_ratio, n_fine);

  // Partial Fisher-Yates on its own stream: the first k picks do not depend on k.
  Rng rng(spec.seed, 1);
  std::vector<LabelId> order(n_fine);
  for (std::size_t j = 0; j < n_fine; ++j) order[j] = static_cast<LabelId>(first + j);
  Selection out{*g, std::vector<bool>(labels.label_count(), false)};
  for (std::size_t j = 0; j < k; ++j) {
    std::swap(order[j], order[j + rng.uniform(n_fine - j)]);
    out.removed[order[j]] = true;
  }
  return out;
}

}  // namespace

std::vector<std::string> noise_selection(const PredictionTable& table, const NoiseSpec& spec) {
  const Selection sel = select_removed(table, spec);
  std::vector<std::string> out;
  for (LabelId y = 0; y < sel.removed.size(); ++y) {
    if (sel.removed[y]) out.push_back(table.spec().label_name(y));
  }
  return out;
}

PredictionTable inject_noise(const PredictionTable& table, const NoiseSpec& spec) {
  const Selection sel = select_removed(table, spec);
  if (std::none_of(sel.removed.begin(), sel.removed.end(), [](bool b) { return b; })) return table;

  const GranularitySpec& old_spec = table.spec();
  std::vector<GranularitySpec::Level> levels = old_spec.levels();
  std::vector<LabelId> survivors;  // old ids of surviving fine labels
  {
    auto& fine_labels = levels[sel.fine].labels;
    fine_labels.clear();
    for (LabelId y = old_spec.first_label(sel.fine); y < old_spec.end_label(sel.fine); ++y) {
      if (!sel.removed[y]) {
        fine_labels.push_back(old_spec.label_name(y));
        survivors.push_back(y);
      }
    }
  }
  auto new_spec = std::make_shared<const GranularitySpec>(std::move(levels), 1);
  std::vector<LabelId> remap(old_spec.label_count(), 0);
  for (LabelId y = 0; y < old_spec.label_count(); ++y) {
    if (!sel.removed[y]) remap[y] = *new_spec->find_label(old_spec.label_name(y));
  }

  const auto& old_cols = table.columns();
  PredictionTable::Columns cols;
  cols.sample_ids = old_cols.sample_ids;
  auto remap_all = [&](const std::vector<std::vector<LabelId>>& src) {
    std::vector<std::vector<LabelId>> dst = src;
    for (auto& col : dst) {
      for (auto& y : col) y = sel.removed[y] ? y : remap[y];
    }
    return dst;
  };
  cols.gt = remap_all(old_cols.gt);
  cols.main = remap_all(old_cols.main);
  cols.secondary = remap_all(old_cols.secondary);

  Rng rng(spec.seed, 2);
  auto draw_survivor = [&] { return remap[survivors[rng.uniform(survivors.size())]]; };
  const std::size_t f = sel.fine;
  for (std::size_t i = 0; i < table.n_samples(); ++i) {
    const LabelId old_gt = old_cols.gt[f][i];
    if (sel.removed[old_gt]) cols.gt[f][i] = draw_survivor();
    auto fix_prediction = [&](std::vector<std::vector<LabelId>>& model,
                              const std::vector<std::vector<LabelId>>& old_model) {
      if (model.empty()) return;
      const LabelId old_pred = old_model[f][i];
      if (!sel.removed[old_pred]) return;
      model[f][i] = old_pred == old_gt ? cols.gt[f][i] : draw_survivor();
    };
    fix_prediction(cols.main, old_cols.main);
    fix_prediction(cols.secondary, old_cols.secondary);
  }

  for (const auto& [y, values] : old_cols.binary) {
    if (!sel.removed[y]) cols.binary[remap[y]] = values;
  }
  return PredictionTable(std::move(new_spec), std::move(cols));
}

std::vector<SweepRow> run_noise_sweep(const SweepConfig& config) {
  config.synth.validate();
  if (config.n_seeds == 0) throw std::invalid_argument("noise sweep needs at least one seed");
  if (config.test_samples == 0) throw std::invalid_argument("noise sweep needs a non-empty test table");
  for (double r : config.ratios) removed_class_count(r, 1);

  std::vector<SweepRow> rows;
  for (std::uint64_t s = 0; s < config.n_seeds; ++s) {
    const std::uint64_t run_seed = Rng::derive(config.seed, s);
    SynthSpec train_spec = config.synth;
    train_spec.seed = Rng::derive(run_seed, 1);
    SynthSpec test_spec = config.synth;
    test_spec.seed = Rng::derive(run_seed, 2);
    test_spec.n_samples = config.test_samples;
    const SynthResult train = synth_generate(train_spec);
    const SynthResult test = synth_generate(test_spec);

    for (double ratio : config.ratios) {
      const NoiseSpec noise{ratio, Rng::derive(run_seed, 3), "fine"};
      const PredictionTable noisy = inject_noise(train.table, noise);
      const RuleSet rules = learn_all(noisy, build_all_condition_sets(noisy, config.conditions));
      const MetricsReport metrics = error_metrics(apply_rules(rules, test.table), test.table);

      SweepRow row;
      row.seed_index = s;
      row.seed = run_seed;
      row.noise_ratio = ratio;
      row.removed_classes = removed_class_count(ratio, config.synth.n_coarse * config.synth.fine_per_coarse);
      row.constraints = constraint_f1(recover_constraints(rules), train.truth);
      row.error_f1 = metrics.total.f1();
      row.error_balanced_accuracy = metrics.total.balanced_accuracy();
      rows.push_back(row);
    }
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out,
                     const std::vector<std::string>& comment_lines) {
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "seed_index,seed,noise_ratio,removed_classes,constraint_precision,constraint_recall,constraint_f1,"
         "error_f1,error_balanced_accuracy\n";
  std::ostringstream line;
  line << std::fixed << std::setprecision(6);
  for (const auto& r : rows) {
    line.str("");
    line << r.seed_index << ',' << r.seed << ',' << r.noise_ratio << ',' << r.removed_classes << ','
         << r.constraints.precision << ',' << r.constraints.recall << ',' << r.constraints.f1 << ',' << r.error_f1
         << ',' << r.error_balanced_accuracy << '\n';
    out << line.str();
  }
}

}  // namespace edr
