#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fairshift/synthetic.hpp"
#include "fairshift/tabular.hpp"

using namespace fairshift;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "fairshift_test_tabular";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

double column_mean(const Matrix& x, std::size_t j) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += x(i, j);
  return s / static_cast<double>(x.rows());
}

double column_std(const Matrix& x, std::size_t j) {
  const double m = column_mean(x, j);
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) s += (x(i, j) - m) * (x(i, j) - m);
  return std::sqrt(s / static_cast<double>(x.rows()));
}

LabeledDataset single_column(std::vector<double> values) {
  Matrix x(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) x(i, 0) = values[i];
  return LabeledDataset(x, std::vector<int>(values.size(), 0), std::vector<int>(values.size(), 1));
}

}  // namespace

TEST_CASE("load_csv shape and feature kinds") {
  const auto p = temp_file("small.csv", "f0,f1,group,label\n0.5,1,0,1\n2.5,0,1,0\n-1,1,1,1\n");
  const auto d = load_csv(p);
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.feature_kinds()[0] == FeatureKind::kContinuous);
  CHECK(d.feature_kinds()[1] == FeatureKind::kCategorical);
  CHECK(d.groups() == std::vector<int>{0, 1, 1});
  CHECK(d.labels() == std::vector<int>{1, 0, 1});
  CHECK(d.feature_names() == std::vector<std::string>{"f0", "f1"});
}

TEST_CASE("load_csv contract violations") {
  CHECK_THROWS_AS(load_csv(temp_file("label2.csv", "f0,group,label\n1,0,2\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("group.csv", "f0,group,label\n1,3,0\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("text.csv", "f0,group,label\nabc,0,1\n")), DataError);
  CHECK_THROWS_AS(load_csv(temp_file("empty.csv", "")), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/fairshift.csv"), DataError);
}

TEST_CASE("schema renames columns and overrides kinds") {
  const auto p = temp_file("renamed.csv", "a,sex,y\n0,1,1\n1,0,0\n");
  const auto s = temp_file("renamed.schema", "group_column = sex\nlabel_column = y\nkind.a = continuous\n");
  const auto d = load_csv(p, load_schema(s));
  CHECK(d.dim() == 1);
  CHECK(d.feature_kinds()[0] == FeatureKind::kContinuous);
  CHECK(d.groups() == std::vector<int>{1, 0});
}

TEST_CASE("unlabeled csv ignores the label column") {
  const auto u = load_unlabeled_csv(temp_file("unl.csv", "f0,group\n0.1,0\n0.2,1\n"));
  CHECK(u.size() == 2);
  CHECK(u.has_group(0));
  CHECK(u.has_group(1));
}

TEST_CASE("csv round trip keeps full precision") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e3);
  Matrix x(20, 3);
  std::vector<int> g(20), y(20);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = n(rng) / 7.0;
    g[i] = static_cast<int>(i % 2);
    y[i] = static_cast<int>((i / 3) % 2);
  }
  const LabeledDataset d(x, g, y);
  const fs::path p = temp_file("roundtrip.csv", "");
  write_csv(p, d);
  const auto back = load_csv(p);
  CHECK(back.features() == d.features());
  CHECK(back.groups() == d.groups());
  CHECK(back.labels() == d.labels());
}

TEST_CASE("fit_zscore examples") {
  auto s = fit_zscore(single_column({0.0, 2.0}));
  CHECK(s.means[0] == doctest::Approx(1.0));
  CHECK(s.stds[0] == doctest::Approx(1.0));

  s = fit_zscore(single_column({5.0, 5.0, 5.0}));
  CHECK(s.means[0] == doctest::Approx(5.0));
  CHECK(s.stds[0] == 1.0);

  s = fit_zscore(single_column({1.0, 2.0, 3.0, 4.0}));
  CHECK(s.means[0] == doctest::Approx(2.5));
  CHECK(s.stds[0] == doctest::Approx(std::sqrt(1.25)).epsilon(1e-12));

  CHECK_THROWS_AS(fit_zscore(single_column({3.0})), DataError);
}

TEST_CASE("apply_zscore examples") {
  const auto d = single_column({7.0, 3.0});
  const NormalizationStats s{{5.0}, {2.0}};
  const auto z = apply_zscore(d, s);
  CHECK(z.features()(0, 0) == doctest::Approx(1.0));
  CHECK(z.features()(1, 0) == doctest::Approx(-1.0));

  const NormalizationStats identity{{0.0}, {1.0}};
  CHECK(apply_zscore(d, identity).features() == d.features());

  const NormalizationStats wrong{{0.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(apply_zscore(d, wrong), DataError);
}

TEST_CASE("self-normalization, categorical pass-through and idempotence") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(3.0, 4.0);
  Matrix x(200, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    x(i, 0) = n(rng);
    x(i, 1) = static_cast<double>(i % 2);
    x(i, 2) = 42.0;
  }
  const LabeledDataset d(x, std::vector<int>(200, 0), std::vector<int>(200, 1));
  const auto once = apply_zscore(d, fit_zscore(d));
  CHECK(std::abs(column_mean(once.features(), 0)) < 1e-6);
  CHECK(std::abs(column_std(once.features(), 0) - 1.0) < 1e-6);
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(once.features()(i, 1) == x(i, 1));
    CHECK(once.features()(i, 2) == 0.0);
  }
  const auto twice = apply_zscore(once, fit_zscore(once));
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(std::abs(twice.features()[k] - once.features()[k]) < 1e-12);
}

TEST_CASE("synthetic generator without shift keeps group-1 means") {
  const auto p = make_synthetic_asymmetric(5, 2000, {0.0, 0.0});
  for (std::size_t j = 0; j < 2; ++j) {
    double ms = 0, mt = 0, vs = 0, vt = 0;
    std::size_t ns = 0, nt = 0;
    for (std::size_t i = 0; i < p.source.size(); ++i)
      if (p.source.groups()[i] == 1) {
        ms += p.source.features()(i, j);
        ++ns;
      }
    for (std::size_t i = 0; i < p.target.size(); ++i)
      if (p.target.groups()[i] == 1) {
        mt += p.target.features()(i, j);
        ++nt;
      }
    ms /= static_cast<double>(ns);
    mt /= static_cast<double>(nt);
    for (std::size_t i = 0; i < p.source.size(); ++i)
      if (p.source.groups()[i] == 1) vs += std::pow(p.source.features()(i, j) - ms, 2);
    for (std::size_t i = 0; i < p.target.size(); ++i)
      if (p.target.groups()[i] == 1) vt += std::pow(p.target.features()(i, j) - mt, 2);
    const double se = std::sqrt(vs / static_cast<double>(ns * ns) + vt / static_cast<double>(nt * nt));
    CHECK(std::abs(ms - mt) < 3.0 * se);
  }
}

TEST_CASE("synthetic generator shifts group 1 by the shift vector") {
  const auto p = make_synthetic_asymmetric(6, 4000, {5.0, 0.0});
  std::vector<double> ms(2, 0.0), mt(2, 0.0);
  std::size_t ns = 0, nt = 0;
  for (std::size_t i = 0; i < p.source.size(); ++i)
    if (p.source.groups()[i] == 1) {
      for (std::size_t j = 0; j < 2; ++j) ms[j] += p.source.features()(i, j);
      ++ns;
    }
  for (std::size_t i = 0; i < p.target.size(); ++i)
    if (p.target.groups()[i] == 1) {
      for (std::size_t j = 0; j < 2; ++j) mt[j] += p.target.features()(i, j);
      ++nt;
    }
  const double diff0 = mt[0] / static_cast<double>(nt) - ms[0] / static_cast<double>(ns);
  const double diff1 = mt[1] / static_cast<double>(nt) - ms[1] / static_cast<double>(ns);
  CHECK(diff0 == doctest::Approx(5.0).epsilon(0.02));
  CHECK(std::abs(diff1) < 0.1);
}

TEST_CASE("synthetic generator is deterministic and shares the label rule") {
  const auto a = make_synthetic_asymmetric(9, 50, {1.5, -1.5});
  const auto b = make_synthetic_asymmetric(9, 50, {1.5, -1.5});
  CHECK(a.source.features() == b.source.features());
  CHECK(a.source.labels() == b.source.labels());
  CHECK(a.target.features() == b.target.features());
  CHECK(a.target_labels == b.target_labels);
  const auto c = make_synthetic_asymmetric(10, 50, {1.5, -1.5});
  CHECK_FALSE(a.source.features() == c.source.features());
  const std::vector<double> x{0.3, -0.2};
  CHECK(a.model.label_probability(x) == c.model.label_probability(x));
  CHECK_THROWS(make_synthetic_asymmetric(1, 5, {1.0, 0.0}));
}
