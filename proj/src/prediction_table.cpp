#include "edr/prediction_table.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "edr/errors.hpp"

namespace edr {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::main: return "main";
    case SourceKind::secondary: return "secondary";
    case SourceKind::binary: return "bin";
  }
  return "?";
}

PredictionTable::PredictionTable(std::shared_ptr<const GranularitySpec> spec, Columns columns)
    : spec_(std::move(spec)), columns_(std::move(columns)) {
  if (!spec_) throw DataError("prediction table without a granularity spec");
  const std::size_t n = columns_.sample_ids.size();
  const std::size_t n_g = spec_->granularity_count();

  std::unordered_set<std::string> seen;
  for (const auto& id : columns_.sample_ids) {
    if (!seen.insert(id).second) throw DataError("duplicate sample_id '" + id + "'");
  }

  auto check_multiclass = [&](const std::vector<std::vector<LabelId>>& cols, const char* what) {
    if (cols.size() != n_g) {
      throw DataError(std::string(what) + ": expected one column per granularity");
    }
    for (GranularityId g = 0; g < n_g; ++g) {
      if (cols[g].size() != n) throw DataError(std::string(what) + ": column length mismatch");
      for (std::size_t i = 0; i < n; ++i) {
        const LabelId y = cols[g][i];
        if (y < spec_->first_label(g) || y >= spec_->end_label(g)) {
          throw DataError(std::string(what) + ": sample '" + columns_.sample_ids[i] +
                          "' has a label outside granularity '" + spec_->granularity_name(g) + "'");
        }
      }
    }
  };
  check_multiclass(columns_.gt, "gt");
  check_multiclass(columns_.main, "pred.main");
  if (!columns_.secondary.empty()) check_multiclass(columns_.secondary, "pred.secondary");

  for (const auto& [label, values] : columns_.binary) {
    if (label >= spec_->label_count()) throw DataError("binary column for unknown label id");
    if (values.size() != n) throw DataError("bin." + spec_->label_name(label) + ": length mismatch");
    for (auto v : values) {
      if (v > 1) throw DataError("bin." + spec_->label_name(label) + ": values must be 0 or 1");
    }
  }
}

std::span<const LabelId> PredictionTable::assignments(SourceKind source, GranularityId g) const {
  switch (source) {
    case SourceKind::main: return columns_.main.at(g);
    case SourceKind::secondary:
      if (columns_.secondary.empty()) throw DataError("table has no secondary source");
      return columns_.secondary.at(g);
    case SourceKind::binary: break;
  }
  throw std::invalid_argument("binary sources have no multiclass assignments");
}

std::span<const std::uint8_t> PredictionTable::binary(LabelId label) const {
  auto it = columns_.binary.find(label);
  if (it == columns_.binary.end()) {
    throw DataError("table has no binary source for label '" + spec_->label_name(label) + "'");
  }
  return it->second;
}

std::vector<LabelId> PredictionTable::binary_labels() const {
  std::vector<LabelId> out;
  for (const auto& entry : columns_.binary) out.push_back(entry.first);
  return out;
}

std::vector<PredictionSource> PredictionTable::sources() const {
  std::vector<GranularityId> all(spec_->granularity_count());
  for (GranularityId g = 0; g < all.size(); ++g) all[g] = g;
  std::vector<PredictionSource> out;
  out.push_back({"main", SourceKind::main, std::nullopt, all});
  if (has_secondary()) out.push_back({"secondary", SourceKind::secondary, std::nullopt, all});
  for (const auto& entry : columns_.binary) {
    out.push_back({"bin." + spec_->label_name(entry.first), SourceKind::binary, entry.first,
                   {spec_->granularity_of(entry.first)}});
  }
  return out;
}

bool PredictionTable::main_wrong(std::size_t sample) const {
  for (GranularityId g = 0; g < columns_.gt.size(); ++g) {
    if (columns_.main[g][sample] != columns_.gt[g][sample]) return true;
  }
  return false;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

bool starts_with(const std::string& s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

struct Header {
  std::size_t sample_id = SIZE_MAX;
  std::vector<std::pair<std::string, std::size_t>> gt;  // granularity, column
  std::map<std::string, std::map<std::string, std::size_t>> pred;  // source -> granularity -> column
  std::vector<std::pair<std::string, std::size_t>> bin;  // label, column
};

Header parse_header(const std::vector<std::string>& names, const std::string& where) {
  Header h;
  std::unordered_set<std::string> seen;
  for (std::size_t c = 0; c < names.size(); ++c) {
    const std::string& name = names[c];
    if (!seen.insert(name).second) throw DataError(where + ": duplicate column '" + name + "'");
    if (name == "sample_id") {
      h.sample_id = c;
    } else if (starts_with(name, "gt.")) {
      h.gt.emplace_back(name.substr(3), c);
    } else if (starts_with(name, "pred.")) {
      const std::string rest = name.substr(5);
      const auto dot = rest.find('.');
      if (dot == std::string::npos) throw DataError(where + ": malformed column '" + name + "'");
      const std::string source = rest.substr(0, dot);
      if (source != "main" && source != "secondary") {
        throw DataError(where + ": unknown prediction source '" + source + "' in column '" + name +
                        "' (expected main or secondary)");
      }
      h.pred[source][rest.substr(dot + 1)] = c;
    } else if (starts_with(name, "bin.")) {
      h.bin.emplace_back(name.substr(4), c);
    } else {
      throw DataError(where + ": unrecognized column '" + name + "'");
    }
  }
  if (h.sample_id == SIZE_MAX) throw DataError(where + ": missing required column 'sample_id'");
  return h;
}

}  // namespace

PredictionTable parse_prediction_table(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prediction table '" + path + "'");
  return parse_prediction_table(in, options, path);
}

PredictionTable parse_prediction_table(std::istream& in, const ParseOptions& options,
                                       const std::string& source_name) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // line number, fields
  std::vector<std::string> header_names;
  bool have_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      header_names = split_csv_line(line);
      have_header = true;
    } else {
      rows.emplace_back(line_no, split_csv_line(line));
    }
  }
  if (!have_header) throw DataError(source_name + ": missing header row");
  const Header header = parse_header(header_names, source_name);

  // Resolve the granularity order and label universe.
  std::shared_ptr<const GranularitySpec> spec;
  if (options.labels) {
    spec = std::make_shared<const GranularitySpec>(*options.labels);
    for (const auto& [g, col] : header.gt) {
      if (!spec->find_granularity(g)) {
        throw DataError(source_name + ": column 'gt." + g + "' names an unknown granularity");
      }
    }
  } else {
    if (header.gt.empty()) throw DataError(source_name + ": missing required gt.<granularity> columns");
    std::vector<GranularitySpec::Level> levels;
    for (const auto& [g, gt_col] : header.gt) {
      std::set<std::string> names;
      std::vector<std::size_t> cols{gt_col};
      for (const auto& [source, by_g] : header.pred) {
        auto it = by_g.find(g);
        if (it != by_g.end()) cols.push_back(it->second);
      }
      for (const auto& [row_line, fields] : rows) {
        for (std::size_t c : cols) {
          if (c < fields.size()) names.insert(fields[c]);
        }
      }
      levels.push_back({g, std::vector<std::string>(names.begin(), names.end())});
    }
    spec = std::make_shared<const GranularitySpec>(std::move(levels));
  }

  const std::size_t n_g = spec->granularity_count();
  std::vector<std::size_t> gt_cols(n_g, SIZE_MAX);
  for (const auto& [g, col] : header.gt) gt_cols[*spec->find_granularity(g)] = col;
  for (GranularityId g = 0; g < n_g; ++g) {
    if (gt_cols[g] == SIZE_MAX) {
      throw DataError(source_name + ": missing required column 'gt." + spec->granularity_name(g) + "'");
    }
  }

  auto resolve_source = [&](const std::string& source, bool required) {
    std::vector<std::size_t> cols(n_g, SIZE_MAX);
    auto it = header.pred.find(source);
    if (it == header.pred.end()) {
      if (required) {
        throw DataError(source_name + ": missing required column 'pred." + source + "." +
                        spec->granularity_name(0) + "'");
      }
      return std::vector<std::size_t>{};
    }
    for (const auto& [g, col] : it->second) {
      auto gid = spec->find_granularity(g);
      if (!gid) throw DataError(source_name + ": column 'pred." + source + "." + g +
                                "' names an unknown granularity");
      cols[*gid] = col;
    }
    for (GranularityId g = 0; g < n_g; ++g) {
      if (cols[g] == SIZE_MAX) {
        throw DataError(source_name + ": missing required column 'pred." + source + "." +
                        spec->granularity_name(g) + "'");
      }
    }
    return cols;
  };
  const auto main_cols = resolve_source("main", true);
  const auto secondary_cols = resolve_source("secondary", false);

  std::vector<std::pair<LabelId, std::size_t>> bin_cols;
  for (const auto& [label, col] : header.bin) {
    auto id = spec->find_label(label);
    if (!id) throw DataError(source_name + ": column 'bin." + label + "': unknown label '" + label + "'");
    bin_cols.emplace_back(*id, col);
  }

  PredictionTable::Columns columns;
  columns.gt.assign(n_g, {});
  columns.main.assign(n_g, {});
  if (!secondary_cols.empty()) columns.secondary.assign(n_g, {});
  for (const auto& [label, col] : bin_cols) columns.binary[label] = {};

  for (const auto& [row_line, fields] : rows) {
    const std::string where = source_name + ": line " + std::to_string(row_line);
    if (fields.size() != header_names.size()) {
      throw DataError(where + ": expected " + std::to_string(header_names.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    columns.sample_ids.push_back(fields[header.sample_id]);
    auto label_at = [&](std::size_t col, GranularityId g) {
      const std::string& name = fields[col];
      auto id = spec->find_label(name);
      if (!id || spec->granularity_of(*id) != g) {
        throw DataError(where + ", column '" + header_names[col] + "': unknown label '" + name +
                        "' for granularity '" + spec->granularity_name(g) + "'");
      }
      return *id;
    };
    for (GranularityId g = 0; g < n_g; ++g) {
      columns.gt[g].push_back(label_at(gt_cols[g], g));
      columns.main[g].push_back(label_at(main_cols[g], g));
      if (!secondary_cols.empty()) columns.secondary[g].push_back(label_at(secondary_cols[g], g));
    }
    for (const auto& [label, col] : bin_cols) {
      const std::string& v = fields[col];
      if (v != "0" && v != "1") {
        throw DataError(where + ", column '" + header_names[col] + "': expected 0 or 1, got '" + v + "'");
      }
      columns.binary[label].push_back(v == "1" ? 1 : 0);
    }
  }

  return PredictionTable(std::move(spec), std::move(columns));
}

void write_prediction_table(const PredictionTable& table, std::ostream& out,
                            const std::vector<std::string>& comment_lines) {
  const GranularitySpec& spec = table.spec();
  for (const auto& c : comment_lines) out << "# " << c << '\n';
  out << "sample_id";
  for (GranularityId g = 0; g < spec.granularity_count(); ++g) {
    out << ',' << csv_field("gt." + spec.granularity_name(g));
  }
  for (GranularityId g = 0; g < spec.granularity_count(); ++g) {
    out << ',' << csv_field("pred.main." + spec.granularity_name(g));
  }
  if (table.has_secondary()) {
    for (GranularityId g = 0; g < spec.granularity_count(); ++g) {
      out << ',' << csv_field("pred.secondary." + spec.granularity_name(g));
    }
  }
  const auto bins = table.binary_labels();
  for (LabelId y : bins) out << ',' << csv_field("bin." + spec.label_name(y));
  out << '\n';

  const auto& cols = table.columns();
  for (std::size_t i = 0; i < table.n_samples(); ++i) {
    out << csv_field(cols.sample_ids[i]);
    for (const auto& col : cols.gt) out << ',' << csv_field(spec.label_name(col[i]));
    for (const auto& col : cols.main) out << ',' << csv_field(spec.label_name(col[i]));
    for (const auto& col : cols.secondary) out << ',' << csv_field(spec.label_name(col[i]));
    for (LabelId y : bins) out << ',' << static_cast<int>(cols.binary.at(y)[i]);
    out << '\n';
  }
}

}  // namespace edr
