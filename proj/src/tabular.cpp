#include "fairshift/tabular.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairshift/config.hpp"

namespace fairshift {
namespace {

void check_binary(const std::vector<int>& v, const char* what) {
  for (int x : v)
    if (x != 0 && x != 1) throw DataError(std::string(what) + " values must be 0 or 1");
}

std::vector<FeatureKind> kinds_or_inferred(const Matrix& features, std::vector<FeatureKind> kinds) {
  if (kinds.empty()) return infer_feature_kinds(features);
  if (kinds.size() != features.cols()) throw DataError("feature_kinds length does not match column count");
  return kinds;
}

std::vector<std::string> names_or_default(std::size_t d, std::vector<std::string> names) {
  if (names.empty()) {
    for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  }
  if (names.size() != d) throw DataError("feature_names length does not match column count");
  return names;
}

struct RawTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

RawTable read_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  RawTable table;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError(path.string() + ": empty file");
  table.header = split_list(trim(line));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto cells = split_list(t);
    if (cells.size() != table.header.size())
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(table.header.size()) + " cells, got " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const std::invalid_argument&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.rows.empty()) throw DataError(path.string() + ": empty file (no data rows)");
  return table;
}

int to_binary(double v, const std::string& column, const std::filesystem::path& path) {
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  std::ostringstream msg;
  msg << path.string() << ": column '" << column << "' has value " << v << " outside {0,1}";
  throw DataError(msg.str());
}

struct ParsedColumns {
  Matrix features;
  std::vector<int> groups;
  std::vector<int> labels;
  std::vector<std::string> names;
  std::vector<FeatureKind> kinds;
};

ParsedColumns parse_columns(const std::filesystem::path& path, const CsvSchema& schema, bool need_label) {
  RawTable table = read_table(path);
  const auto find = [&](const std::string& name) -> long {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    return it == table.header.end() ? -1 : static_cast<long>(it - table.header.begin());
  };
  const long gcol = find(schema.group_column);
  const long lcol = find(schema.label_column);
  if (gcol < 0) throw DataError(path.string() + ": missing group column '" + schema.group_column + "'");
  if (need_label && lcol < 0) throw DataError(path.string() + ": missing label column '" + schema.label_column + "'");

  ParsedColumns out;
  std::vector<std::size_t> feature_cols;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (static_cast<long>(j) == gcol || static_cast<long>(j) == lcol) continue;
    feature_cols.push_back(j);
    out.names.push_back(table.header[j]);
  }
  if (feature_cols.empty()) throw DataError(path.string() + ": no feature columns");

  const std::size_t n = table.rows.size();
  out.features = Matrix(n, feature_cols.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    for (std::size_t j = 0; j < feature_cols.size(); ++j) out.features(i, j) = row[feature_cols[j]];
    out.groups.push_back(to_binary(row[static_cast<std::size_t>(gcol)], schema.group_column, path));
    if (lcol >= 0 && need_label)
      out.labels.push_back(to_binary(row[static_cast<std::size_t>(lcol)], schema.label_column, path));
  }
  out.kinds = infer_feature_kinds(out.features);
  for (const auto& [name, kind] : schema.kind_overrides) {
    const auto it = std::find(out.names.begin(), out.names.end(), name);
    if (it == out.names.end()) throw DataError("schema override names unknown column '" + name + "'");
    out.kinds[static_cast<std::size_t>(it - out.names.begin())] = kind;
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

LabeledDataset::LabeledDataset(Matrix features, std::vector<int> groups, std::vector<int> labels,
                               std::vector<FeatureKind> kinds, std::vector<std::string> names)
    : features_(std::move(features)), groups_(std::move(groups)), labels_(std::move(labels)) {
  if (features_.rows() == 0 || features_.cols() == 0) throw DataError("LabeledDataset needs n > 0 and d > 0");
  if (groups_.size() != features_.rows() || labels_.size() != features_.rows())
    throw DataError("LabeledDataset: features, groups and labels must share length n");
  check_binary(groups_, "group");
  check_binary(labels_, "label");
  kinds_ = kinds_or_inferred(features_, std::move(kinds));
  names_ = names_or_default(features_.cols(), std::move(names));
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& idx) const {
  std::vector<int> g, y;
  for (auto i : idx) {
    g.push_back(groups_.at(i));
    y.push_back(labels_.at(i));
  }
  return LabeledDataset(features_.select_rows(idx), std::move(g), std::move(y), kinds_, names_);
}

UnlabeledDataset::UnlabeledDataset(Matrix features, std::vector<int> groups, std::vector<FeatureKind> kinds,
                                   std::vector<std::string> names)
    : features_(std::move(features)), groups_(std::move(groups)) {
  if (features_.rows() < 2 || features_.cols() == 0) throw DataError("UnlabeledDataset needs m >= 2 and d > 0");
  if (groups_.size() != features_.rows()) throw DataError("UnlabeledDataset: groups must have length m");
  check_binary(groups_, "group");
  kinds_ = kinds_or_inferred(features_, std::move(kinds));
  names_ = names_or_default(features_.cols(), std::move(names));
}

UnlabeledDataset UnlabeledDataset::from_labeled(const LabeledDataset& data) {
  return UnlabeledDataset(data.features(), data.groups(), data.feature_kinds(), data.feature_names());
}

bool UnlabeledDataset::has_group(int g) const {
  return std::find(groups_.begin(), groups_.end(), g) != groups_.end();
}

UnlabeledDataset UnlabeledDataset::subset(const std::vector<std::size_t>& idx) const {
  std::vector<int> g;
  for (auto i : idx) g.push_back(groups_.at(i));
  return UnlabeledDataset(features_.select_rows(idx), std::move(g), kinds_, names_);
}

CsvSchema load_schema(const std::filesystem::path& path) {
  const auto cfg = KeyValueConfig::load(path);
  CsvSchema schema;
  schema.group_column = cfg.get_string("group_column", schema.group_column);
  schema.label_column = cfg.get_string("label_column", schema.label_column);
  for (const auto& [key, value] : cfg.entries()) {
    if (key.rfind("kind.", 0) != 0) continue;
    const std::string column = key.substr(5);
    if (value == "continuous") {
      schema.kind_overrides[column] = FeatureKind::kContinuous;
    } else if (value == "categorical") {
      schema.kind_overrides[column] = FeatureKind::kCategorical;
    } else {
      throw DataError("schema: kind for '" + column + "' must be continuous or categorical");
    }
  }
  return schema;
}

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  auto cols = parse_columns(path, schema, /*need_label=*/true);
  return LabeledDataset(std::move(cols.features), std::move(cols.groups), std::move(cols.labels),
                        std::move(cols.kinds), std::move(cols.names));
}

UnlabeledDataset load_unlabeled_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  auto cols = parse_columns(path, schema, /*need_label=*/false);
  return UnlabeledDataset(std::move(cols.features), std::move(cols.groups), std::move(cols.kinds),
                          std::move(cols.names));
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& data, const CsvSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& name : data.feature_names()) out << name << ',';
  out << schema.group_column << ',' << schema.label_column << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.features().row(i)) out << format_double(v) << ',';
    out << data.groups()[i] << ',' << data.labels()[i] << '\n';
  }
}

std::vector<FeatureKind> infer_feature_kinds(const Matrix& features) {
  std::vector<FeatureKind> kinds(features.cols(), FeatureKind::kCategorical);
  for (std::size_t i = 0; i < features.rows(); ++i)
    for (std::size_t j = 0; j < features.cols(); ++j) {
      const double v = features(i, j);
      if (v != 0.0 && v != 1.0) kinds[j] = FeatureKind::kContinuous;
    }
  return kinds;
}

NormalizationStats fit_zscore(const Matrix& features, const std::vector<FeatureKind>& kinds) {
  const std::size_t n = features.rows(), d = features.cols();
  if (n < 2) throw DataError("fit_zscore needs at least 2 rows");
  if (kinds.size() != d) throw DataError("fit_zscore: kinds/columns mismatch");
  NormalizationStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  for (std::size_t j = 0; j < d; ++j) {
    if (kinds[j] == FeatureKind::kCategorical) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += features(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = features(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    stats.means[j] = mean;
    // Constant (or numerically constant) columns keep std 1.
    stats.stds[j] = sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0;
  }
  return stats;
}

NormalizationStats fit_zscore(const LabeledDataset& data) { return fit_zscore(data.features(), data.feature_kinds()); }

Matrix apply_zscore(const Matrix& features, const std::vector<FeatureKind>& kinds, const NormalizationStats& stats) {
  const std::size_t d = features.cols();
  if (stats.means.size() != d || stats.stds.size() != d || kinds.size() != d)
    throw DataError("apply_zscore: dimension mismatch between data and stats");
  Matrix out = features;
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (kinds[j] == FeatureKind::kContinuous) out(i, j) = (out(i, j) - stats.means[j]) / stats.stds[j];
  return out;
}

LabeledDataset apply_zscore(const LabeledDataset& data, const NormalizationStats& stats) {
  return LabeledDataset(apply_zscore(data.features(), data.feature_kinds(), stats), data.groups(), data.labels(),
                        data.feature_kinds(), data.feature_names());
}

UnlabeledDataset apply_zscore(const UnlabeledDataset& data, const NormalizationStats& stats) {
  return UnlabeledDataset(apply_zscore(data.features(), data.feature_kinds(), stats), data.groups(),
                          data.feature_kinds(), data.feature_names());
}

}  // namespace fairshift
