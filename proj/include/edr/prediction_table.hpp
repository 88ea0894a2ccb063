#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "edr/granularity_spec.hpp"

namespace edr {

enum class SourceKind : std::uint8_t { main, secondary, binary };

std::string_view to_string(SourceKind kind);

/// One prediction source of a table. Multiclass sources (main, secondary)
/// cover every granularity; a binary source covers exactly its label's.
struct PredictionSource {
  std::string id;
  SourceKind kind;
  std::optional<LabelId> label;
  std::vector<GranularityId> covered_granularities;
};

/// Ground truth plus every source's assignments for a fixed, ordered sample
/// list. Immutable once constructed; safe to share across threads.
class PredictionTable {
 public:
  /// Raw column storage. Multiclass columns are indexed [granularity][sample].
  struct Columns {
    std::vector<std::string> sample_ids;
    std::vector<std::vector<LabelId>> gt;
    std::vector<std::vector<LabelId>> main;
    std::vector<std::vector<LabelId>> secondary;  // empty when no secondary model
    std::map<LabelId, std::vector<std::uint8_t>> binary;
  };

  /// Validates every invariant (label membership, column lengths, unique
  /// sample ids); throws DataError on violation.
  PredictionTable(std::shared_ptr<const GranularitySpec> spec, Columns columns);

  const GranularitySpec& spec() const { return *spec_; }
  const std::shared_ptr<const GranularitySpec>& spec_ptr() const { return spec_; }
  std::size_t n_samples() const { return columns_.sample_ids.size(); }
  const std::vector<std::string>& sample_ids() const { return columns_.sample_ids; }
  const Columns& columns() const { return columns_; }

  std::span<const LabelId> gt(GranularityId g) const { return columns_.gt.at(g); }
  /// Multiclass assignments of the main or secondary source at granularity g.
  std::span<const LabelId> assignments(SourceKind source, GranularityId g) const;

  bool has_secondary() const { return !columns_.secondary.empty(); }
  bool has_binary(LabelId label) const { return columns_.binary.count(label) != 0; }
  std::span<const std::uint8_t> binary(LabelId label) const;
  std::vector<LabelId> binary_labels() const;

  std::vector<PredictionSource> sources() const;

  /// True when the main source's assignment differs from ground truth at
  /// any granularity.
  bool main_wrong(std::size_t sample) const;

 private:
  std::shared_ptr<const GranularitySpec> spec_;
  Columns columns_;
};

struct ParseOptions {
  /// Label universe to validate against. When absent, granularities are taken
  /// from the gt.* column order and each label set is the sorted set of names
  /// observed in that granularity's gt and pred columns.
  std::optional<GranularitySpec> labels;
};

/// CSV with header `sample_id, gt.<g>..., pred.<source>.<g>..., bin.<label>...`.
/// Lines starting with '#' are comments.
PredictionTable parse_prediction_table(const std::string& path, const ParseOptions& options = {});
PredictionTable parse_prediction_table(std::istream& in, const ParseOptions& options,
                                       const std::string& source_name = "<stream>");

/// Writes the canonical column layout: gt, main, secondary, then bin columns
/// in label-id order. Each entry of comment_lines becomes a leading `# ` line.
void write_prediction_table(const PredictionTable& table, std::ostream& out,
                            const std::vector<std::string>& comment_lines = {});

}  // namespace edr
