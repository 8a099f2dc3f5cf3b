#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairshift/matrix.hpp"

namespace fairshift {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind : std::uint8_t { kContinuous, kCategorical };

// Labeled source data: features, binary group attribute and binary label.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Matrix features, std::vector<int> groups, std::vector<int> labels,
                 std::vector<FeatureKind> kinds = {}, std::vector<std::string> names = {});

  std::size_t size() const { return features_.rows(); }
  std::size_t dim() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  const std::vector<int>& groups() const { return groups_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<FeatureKind>& feature_kinds() const { return kinds_; }
  const std::vector<std::string>& feature_names() const { return names_; }

  LabeledDataset subset(const std::vector<std::size_t>& idx) const;

 private:
  Matrix features_;
  std::vector<int> groups_;
  std::vector<int> labels_;
  std::vector<FeatureKind> kinds_;
  std::vector<std::string> names_;
};

// Unlabeled target data. Either group may be missing; callers check with has_group.
class UnlabeledDataset {
 public:
  UnlabeledDataset() = default;
  UnlabeledDataset(Matrix features, std::vector<int> groups,
                   std::vector<FeatureKind> kinds = {}, std::vector<std::string> names = {});

  static UnlabeledDataset from_labeled(const LabeledDataset& data);

  std::size_t size() const { return features_.rows(); }
  std::size_t dim() const { return features_.cols(); }
  const Matrix& features() const { return features_; }
  const std::vector<int>& groups() const { return groups_; }
  const std::vector<FeatureKind>& feature_kinds() const { return kinds_; }
  const std::vector<std::string>& feature_names() const { return names_; }
  bool has_group(int g) const;

  UnlabeledDataset subset(const std::vector<std::size_t>& idx) const;

 private:
  Matrix features_;
  std::vector<int> groups_;
  std::vector<FeatureKind> kinds_;
  std::vector<std::string> names_;
};

struct NormalizationStats {
  std::vector<double> means;
  std::vector<double> stds;  // strictly positive; constant columns map to 1
};

struct CsvSchema {
  std::string group_column = "group";
  std::string label_column = "label";
  // Forces the kind of a named feature column instead of the {0,1} detection rule.
  std::map<std::string, FeatureKind> kind_overrides;
};

// Reads a sidecar file of `key = value` lines: group_column, label_column and
// `kind.<column> = continuous|categorical`.
CsvSchema load_schema(const std::filesystem::path& path);

LabeledDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
// Label column is optional here; when present it is ignored.
UnlabeledDataset load_unlabeled_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
void write_csv(const std::filesystem::path& path, const LabeledDataset& data, const CsvSchema& schema = {});

// Columns whose distinct values are a subset of {0,1} are categorical.
std::vector<FeatureKind> infer_feature_kinds(const Matrix& features);

NormalizationStats fit_zscore(const Matrix& features, const std::vector<FeatureKind>& kinds);
NormalizationStats fit_zscore(const LabeledDataset& data);
Matrix apply_zscore(const Matrix& features, const std::vector<FeatureKind>& kinds,
                    const NormalizationStats& stats);
LabeledDataset apply_zscore(const LabeledDataset& data, const NormalizationStats& stats);
UnlabeledDataset apply_zscore(const UnlabeledDataset& data, const NormalizationStats& stats);

}  // namespace fairshift
