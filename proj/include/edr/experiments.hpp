#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "edr/condition.hpp"
#include "edr/constraint_set.hpp"
#include "edr/detection.hpp"
#include "edr/prediction_table.hpp"

namespace edr {

/// How the synthetic models err. Probabilities are per sample.
struct ErrorProfile {
  double main_fine = 0.0;
  double main_coarse = 0.0;
  /// Probability that a fine error stays under the true coarse parent.
  double fine_within_parent = 0.0;
  double secondary = 0.0;
  double binary_flip = 0.0;
  /// When set, the main model errs at most at one granularity per sample:
  /// fine with probability main_fine, otherwise coarse with main_coarse.
  bool exclusive = false;
};

/// Two-level hierarchy: granularities "fine" then "coarse", coarse labels
/// C0..C{n-1}, fine labels c<i>_f<j> under parent Ci.
struct SynthSpec {
  std::size_t n_coarse = 2;
  std::size_t fine_per_coarse = 2;
  std::size_t n_samples = 100;
  ErrorProfile errors;
  bool secondary = true;
  bool binary = true;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a count is 0 or a probability lies
  /// outside [0, 1].
  void validate() const;
};

nlohmann::ordered_json to_json(const SynthSpec& spec);

struct SynthResult {
  PredictionTable table;
  /// Exact complement of the parent map: every (fine, non-parent coarse) and
  /// (coarse, fine outside it) pair.
  ConstraintSet truth;
};

/// Ground truth is uniform over fine labels with coarse = parent. Fully
/// determined by spec (including seed).
SynthResult synth_generate(const SynthSpec& spec);

struct NoiseSpec {
  /// Fraction of fine classes to corrupt, in [0, 1).
  double noise_ratio = 0.0;
  std::uint64_t seed = 0;
  std::string fine_granularity = "fine";
};

/// Number of fine classes a ratio removes: floor(ratio * n_fine).
std::size_t removed_class_count(double noise_ratio, std::size_t n_fine);

/// Picks floor(ratio * |fine|) fine classes uniformly (larger ratios under
/// the same seed pick supersets), replaces their gt with a uniformly drawn
/// surviving fine label, and drops them from the fine universe along with
/// their bin columns. Model predictions of a removed class become the new gt
/// label where they had been correct, otherwise a uniformly drawn survivor.
/// Other granularities, sample count and order are untouched.
/// Throws std::invalid_argument for a ratio outside [0, 1).
PredictionTable inject_noise(const PredictionTable& table, const NoiseSpec& spec);

/// Fine classes inject_noise would remove, by name, sorted by label id.
std::vector<std::string> noise_selection(const PredictionTable& table, const NoiseSpec& spec);

struct SweepConfig {
  /// Template for the training table; its seed field is ignored.
  SynthSpec synth;
  /// Samples in the clean held-out table used for error metrics.
  std::size_t test_samples = 1000;
  std::vector<double> ratios{0.0};
  std::size_t n_seeds = 1;
  std::uint64_t seed = 0;
  SourceToggles conditions;
};

struct SweepRow {
  std::uint64_t seed_index = 0;
  std::uint64_t seed = 0;
  double noise_ratio = 0.0;
  std::size_t removed_classes = 0;
  SetScores constraints;
  double error_f1 = 0.0;
  double error_balanced_accuracy = 0.0;
};

/// For each seed: synthesize a training and a test table, then for each ratio
/// corrupt the training table, learn rules on it, score the recovered
/// constraints against the synthetic truth, and score total-error detection
/// on the clean test table.
std::vector<SweepRow> run_noise_sweep(const SweepConfig& config);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out,
                     const std::vector<std::string>& comment_lines = {});

}  // namespace edr
