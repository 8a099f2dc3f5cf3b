#include "fairshift/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

#include "fairshift/losses.hpp"

namespace fairshift {
namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::vector<std::size_t> to_sizes(const std::vector<std::string>& items, const char* key) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    const long long v = parse_int(s);
    if (v < 0) throw std::invalid_argument(std::string(key) + " entries must be >= 0");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<std::string> size_strings(const std::vector<std::size_t>& v) {
  std::vector<std::string> out;
  for (std::size_t x : v) out.push_back(std::to_string(x));
  return out;
}

double expected_cross_entropy(double p, double q) { return -q * std::log(p) - (1.0 - q) * std::log1p(-p); }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
  if (methods.empty() || lambda1.empty() || lambda2.empty() || gamma.empty() || m.empty())
    throw std::invalid_argument("experiment grid must be non-empty");
  if (dataset.empty()) throw std::invalid_argument("dataset must be set");
  if (dataset == "synthetic" && (synthetic_shift.empty() || synthetic_n_per_group < 10))
    throw std::invalid_argument("synthetic data needs a shift vector and at least 10 rows per group");
  shift.validate();
  train.validate();
}

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& kv) {
  ExperimentSpec s;
  s.dataset = kv.get_string("dataset", s.dataset);
  if (auto schema = kv.get("schema")) s.schema = *schema;
  s.synthetic_n_per_group = static_cast<std::size_t>(kv.get_int("synthetic_n_per_group", 250));
  s.synthetic_shift = kv.get_doubles("synthetic_shift", s.synthetic_shift);
  // Grid keys hold lists; the scalar TrainConfig fields keep their defaults.
  auto entries = kv.entries();
  for (const char* key : {"lambda1", "lambda2", "gamma", "m", "methods"}) entries.erase(key);
  s.train = TrainConfig::from_config(KeyValueConfig(entries));
  if (auto preset = kv.get("lambda_preset")) {
    const auto d = dataset_lambda_defaults(*preset);
    if (!d) throw std::invalid_argument("unknown lambda_preset '" + *preset + "'");
    s.train.lambda1 = d->lambda1;
    s.train.lambda2 = d->lambda2;
  }
  s.methods.clear();
  for (const auto& name : kv.get_strings("methods", {to_string(s.train.method)})) s.methods.push_back(parse_method(name));
  s.lambda1 = kv.get_doubles("lambda1", {s.train.lambda1});
  s.lambda2 = kv.get_doubles("lambda2", {s.train.lambda2});
  s.gamma = kv.get_doubles("gamma", {s.shift.gamma});
  s.m = to_sizes(kv.get_strings("m", {std::to_string(s.train.m_cap)}), "m");
  const long long reps = kv.get_int("repetitions", 50);
  if (reps < 1) throw std::invalid_argument("repetitions must be >= 1");
  s.repetitions = static_cast<std::size_t>(reps);
  s.base_seed = static_cast<std::uint64_t>(kv.get_int("base_seed", 0));
  const std::string eo = kv.get_string("eodds", "max");
  if (eo == "max") s.eodds = EOddsConvention::kMax;
  else if (eo == "mean") s.eodds = EOddsConvention::kMean;
  else throw std::invalid_argument("eodds must be max or mean");
  s.shift.percentile = kv.get_double("percentile", s.shift.percentile);
  s.shift.test_fraction = kv.get_double("test_fraction", s.shift.test_fraction);
  const long long ag = kv.get_int("asymmetric_group", -1);
  if (ag >= 0) s.shift.asymmetric_group = static_cast<int>(ag);
  s.validate();
  return s;
}

std::vector<GridPoint> expand_grid(const ExperimentSpec& spec) {
  std::vector<GridPoint> out;
  for (Method method : spec.methods)
    for (double l1 : spec.lambda1)
      for (double l2 : spec.lambda2)
        for (double g : spec.gamma)
          for (std::size_t m : spec.m) out.push_back({method, l1, l2, g, m});
  return out;
}

bool ExperimentResult::all_ok() const {
  return std::all_of(runs.begin(), runs.end(), [](const RunRecord& r) { return r.ok; });
}

RunData prepare_run_data(const ExperimentSpec& spec, const LabeledDataset* pool, double gamma, std::uint64_t seed) {
  if (spec.dataset == "synthetic") {
    SyntheticPair p = make_synthetic_asymmetric(seed, spec.synthetic_n_per_group, spec.synthetic_shift);
    LabeledDataset labeled = p.labeled_target();
    return {std::move(p.source), std::move(p.target), std::move(labeled)};
  }
  if (!pool) throw std::invalid_argument("CSV dataset was not loaded");
  ShiftConfig sc = spec.shift;
  sc.gamma = gamma;
  sc.seed = seed;
  const SplitResult sr = split(*pool, sc);
  LabeledDataset test = pool->subset(sr.test_idx);
  UnlabeledDataset target = UnlabeledDataset::from_labeled(test);
  return {pool->subset(sr.train_idx), std::move(target), std::move(test)};
}

LabeledDataset load_pool(const ExperimentSpec& spec) {
  const CsvSchema schema = spec.schema.empty() ? CsvSchema{} : load_schema(spec.schema);
  const LabeledDataset raw = load_csv(spec.dataset, schema);
  return apply_zscore(raw, fit_zscore(raw));
}

RunRecord run_single(const ExperimentSpec& spec, const LabeledDataset* pool, const GridPoint& point,
                     std::size_t rep) {
  RunRecord r;
  r.point = point;
  r.rep = rep;
  r.seed = spec.base_seed + rep;
  try {
    const RunData data = prepare_run_data(spec, pool, point.gamma, r.seed);
    TrainConfig cfg = spec.train;
    cfg.method = point.method;
    cfg.lambda1 = point.lambda1;
    cfg.lambda2 = point.lambda2;
    cfg.m_cap = point.m;
    cfg.seed = r.seed;
    const TrainedModel model = train(data.source, data.target, cfg);
    r.metrics = evaluate_model(model.predictor, data.target_labeled, spec.eodds);
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.message = sanitize(e.what());
  }
  return r;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  std::optional<LabeledDataset> pool;
  if (spec.dataset != "synthetic") {
    pool = load_pool(spec);
  }
  const auto grid = expand_grid(spec);
  const std::size_t reps = spec.repetitions;
  ExperimentResult result;
  result.runs.resize(grid.size() * reps);
  const long long total = static_cast<long long>(result.runs.size());
#pragma omp parallel for schedule(dynamic)
  for (long long k = 0; k < total; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    result.runs[idx] = run_single(spec, pool ? &*pool : nullptr, grid[idx / reps], idx % reps);
  }
  result.aggregate = aggregate_runs(result.runs);
  return result;
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunRecord>& runs) {
  std::vector<AggregateRow> rows;
  std::vector<std::vector<const RunRecord*>> members;
  auto same = [](const GridPoint& a, const GridPoint& b) {
    return a.method == b.method && a.lambda1 == b.lambda1 && a.lambda2 == b.lambda2 && a.gamma == b.gamma &&
           a.m == b.m;
  };
  for (const auto& r : runs) {
    std::size_t i = 0;
    while (i < rows.size() && !same(rows[i].point, r.point)) ++i;
    if (i == rows.size()) {
      rows.push_back(AggregateRow{});
      rows.back().point = r.point;
      members.emplace_back();
    }
    members[i].push_back(&r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> err, eo, ap;
    for (const RunRecord* r : members[i]) {
      if (!r->ok) {
        ++rows[i].n_failed;
        continue;
      }
      err.push_back(r->metrics.error_pct);
      eo.push_back(r->metrics.eodds);
      ap.push_back(r->metrics.acc_parity_pct);
    }
    rows[i].n_runs = err.size();
    rows[i].error_pct_mean = mean_of(err);
    rows[i].error_pct_std = sample_std(err);
    rows[i].eodds_mean = mean_of(eo);
    rows[i].eodds_std = sample_std(eo);
    rows[i].acc_parity_pct_mean = mean_of(ap);
    rows[i].acc_parity_pct_std = sample_std(ap);
  }
  return rows;
}

void write_runs_csv(std::ostream& out, const std::vector<RunRecord>& runs) {
  out << "method,lambda1,lambda2,gamma,m,rep,seed,status,error_pct,eodds,acc_parity_pct,group0_error_pct,"
         "group1_error_pct,message\n";
  for (const auto& r : runs) {
    out << to_string(r.point.method) << ',' << format_double(r.point.lambda1) << ','
        << format_double(r.point.lambda2) << ',' << format_double(r.point.gamma) << ',' << r.point.m << ','
        << r.rep << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
    if (r.ok)
      out << format_double(r.metrics.error_pct) << ',' << format_double(r.metrics.eodds) << ','
          << format_double(r.metrics.acc_parity_pct) << ',' << format_double(r.metrics.group_error_pct[0]) << ','
          << format_double(r.metrics.group_error_pct[1]) << ',';
    else
      out << ",,,,,";
    out << r.message << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "method,lambda1,lambda2,gamma,m,n_runs,n_failed,error_pct_mean,error_pct_std,eodds_mean,eodds_std,"
         "acc_parity_pct_mean,acc_parity_pct_std\n";
  for (const auto& r : rows)
    out << to_string(r.point.method) << ',' << format_double(r.point.lambda1) << ','
        << format_double(r.point.lambda2) << ',' << format_double(r.point.gamma) << ',' << r.point.m << ','
        << r.n_runs << ',' << r.n_failed << ',' << format_double(r.error_pct_mean) << ','
        << format_double(r.error_pct_std) << ',' << format_double(r.eodds_mean) << ','
        << format_double(r.eodds_std) << ',' << format_double(r.acc_parity_pct_mean) << ','
        << format_double(r.acc_parity_pct_std) << '\n';
}

std::vector<AggregateRow> read_aggregate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  const auto header = split_list(trim(line));
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* required : {"method", "error_pct_mean", "eodds_mean"})
    if (!col.count(required)) throw std::runtime_error(path.string() + ": missing column " + required);
  std::vector<AggregateRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split_list(trim(line));
    if (cells.size() != header.size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": wrong number of cells");
    auto num = [&](const char* name, double fallback) {
      return col.count(name) ? parse_double(cells[col[name]]) : fallback;
    };
    AggregateRow r;
    r.point.method = parse_method(cells[col["method"]]);
    r.point.lambda1 = num("lambda1", 0.0);
    r.point.lambda2 = num("lambda2", 0.0);
    r.point.gamma = num("gamma", 0.0);
    r.point.m = static_cast<std::size_t>(num("m", 0.0));
    r.n_runs = static_cast<std::size_t>(num("n_runs", 0.0));
    r.n_failed = static_cast<std::size_t>(num("n_failed", 0.0));
    r.error_pct_mean = num("error_pct_mean", 0.0);
    r.error_pct_std = num("error_pct_std", 0.0);
    r.eodds_mean = num("eodds_mean", 0.0);
    r.eodds_std = num("eodds_std", 0.0);
    r.acc_parity_pct_mean = num("acc_parity_pct_mean", 0.0);
    r.acc_parity_pct_std = num("acc_parity_pct_std", 0.0);
    rows.push_back(r);
  }
  return rows;
}

std::string metrics_csv_header() { return "method,seed,gamma,error_pct,eodds,acc_parity_pct"; }

std::string metrics_csv_row(Method method, std::uint64_t seed, double gamma, const RunMetrics& m) {
  return to_string(method) + ',' + std::to_string(seed) + ',' + format_double(gamma) + ',' +
         format_double(m.error_pct) + ',' + format_double(m.eodds) + ',' + format_double(m.acc_parity_pct);
}

std::vector<std::size_t> pareto_indices(const std::vector<std::pair<double, double>>& points) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < points.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < points.size() && !drop; ++j) {
      if (i == j) continue;
      const auto& a = points[j];
      const auto& b = points[i];
      const bool dominates = a.first <= b.first && a.second <= b.second && (a.first < b.first || a.second < b.second);
      const bool earlier_duplicate = j < i && a == b;
      drop = dominates || earlier_duplicate;
    }
    if (!drop) keep.push_back(i);
  }
  return keep;
}

std::vector<AggregateRow> pareto_frontier(const std::vector<AggregateRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows) pts.emplace_back(r.error_pct_mean, r.eodds_mean);
  std::vector<AggregateRow> out;
  for (std::size_t i : pareto_indices(pts)) out.push_back(rows[i]);
  return out;
}

VarianceSpec::VarianceSpec() {
  pretrain.method = Method::kErm;
  pretrain.pretrain_epochs = 10;
  pretrain.adapt_epochs = 0;
}

void VarianceSpec::validate() const {
  if (gamma.empty() || m.empty()) throw std::invalid_argument("variance study grid must be non-empty");
  if (repetitions < 2) throw std::invalid_argument("variance study needs at least 2 repetitions");
  if (model_seeds < 1 || dim < 1 || source_multiplier < 1 || pretrain_size < 10)
    throw std::invalid_argument("variance study sizes out of range");
  for (std::size_t v : m)
    if (v < 1) throw std::invalid_argument("m must be >= 1");
  pretrain.validate();
}

VarianceSpec VarianceSpec::from_config(const KeyValueConfig& kv) {
  VarianceSpec s;
  s.gamma = kv.get_doubles("gamma", s.gamma);
  s.m = to_sizes(kv.get_strings("m", size_strings(s.m)), "m");
  s.repetitions = static_cast<std::size_t>(kv.get_int("repetitions", static_cast<long long>(s.repetitions)));
  s.model_seeds = static_cast<std::size_t>(kv.get_int("model_seeds", static_cast<long long>(s.model_seeds)));
  s.dim = static_cast<std::size_t>(kv.get_int("dim", static_cast<long long>(s.dim)));
  s.source_multiplier =
      static_cast<std::size_t>(kv.get_int("source_multiplier", static_cast<long long>(s.source_multiplier)));
  s.pretrain_size = static_cast<std::size_t>(kv.get_int("pretrain_size", static_cast<long long>(s.pretrain_size)));
  s.lambda = kv.get_double("lambda", s.lambda);
  s.base_seed = static_cast<std::uint64_t>(kv.get_int("base_seed", 0));
  s.pretrain = TrainConfig::from_config(kv, s.pretrain);
  s.validate();
  return s;
}

EstimatePair draw_estimates(const PredictorModel& model, const GaussianTiltModel& tilt, std::size_t m,
                            std::size_t source_multiplier, double lambda, Rng& rng) {
  const LabeledDataset src = tilt.sample(rng, source_multiplier * m, false);
  const LabeledDataset tgt = tilt.sample(rng, m, true);
  const auto ps = model.predict(src.features()).probabilities;
  const auto pt = model.predict(tgt.features()).probabilities;
  double is = 0.0, risk = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double ce = src.labels()[i] == 1 ? -std::log(ps[i]) : -std::log1p(-ps[i]);
    is += tilt.test_over_train(src.features().row(i)) * ce;
    risk += ce;
  }
  const auto h = conditional_entropy(pt);
  std::vector<double> fw(tgt.size());
  for (std::size_t j = 0; j < tgt.size(); ++j) fw[j] = std::min(1.0 / tilt.test_over_train(tgt.features().row(j)), 1e300);
  const double n = static_cast<double>(src.size());
  return {is / n, risk / n + lambda * weighted_entropy_term(fw, h)};
}

std::vector<VarianceRow> run_variance_study(const VarianceSpec& spec) {
  spec.validate();
  const std::size_t per_model = spec.gamma.size() * spec.m.size();
  std::vector<VarianceRow> rows(spec.model_seeds * per_model);
  const long long n_models = static_cast<long long>(spec.model_seeds);
#pragma omp parallel for schedule(dynamic)
  for (long long s = 0; s < n_models; ++s) {
    const auto seed = static_cast<std::size_t>(s);
    const std::uint64_t model_seed = spec.base_seed + seed;
    Rng data_rng(mix(model_seed, 0xda7a));
    const LabeledDataset train_set = GaussianTiltModel::make(spec.dim, 0.0).sample(data_rng, spec.pretrain_size, false);
    TrainConfig cfg = spec.pretrain;
    cfg.seed = model_seed;
    const PredictorModel model = train_erm(train_set, cfg).predictor;
    for (std::size_t gi = 0; gi < spec.gamma.size(); ++gi) {
      const GaussianTiltModel tilt = GaussianTiltModel::make(spec.dim, spec.gamma[gi]);
      for (std::size_t mi = 0; mi < spec.m.size(); ++mi) {
        Rng rng(mix(mix(model_seed, gi + 1), mi + 1));
        std::vector<double> is, we;
        for (std::size_t r = 0; r < spec.repetitions; ++r) {
          const auto e = draw_estimates(model, tilt, spec.m[mi], spec.source_multiplier, spec.lambda, rng);
          is.push_back(e.importance_sampling);
          we.push_back(e.weighted_entropy);
        }
        VarianceRow& row = rows[seed * per_model + gi * spec.m.size() + mi];
        row.gamma = spec.gamma[gi];
        row.m = spec.m[mi];
        row.model_seed = seed;
        row.is_mean = mean_of(is);
        row.is_std = sample_std(is);
        row.we_mean = mean_of(we);
        row.we_std = sample_std(we);
      }
    }
  }
  return rows;
}

void write_variance_csv(std::ostream& out, const std::vector<VarianceRow>& rows, std::size_t reps) {
  out << "gamma,m,model_seed,reps,is_mean,is_std,we_mean,we_std,is_std_exceeds_we_std\n";
  for (const auto& r : rows)
    out << format_double(r.gamma) << ',' << r.m << ',' << r.model_seed << ',' << reps << ','
        << format_double(r.is_mean) << ',' << format_double(r.is_std) << ',' << format_double(r.we_mean) << ','
        << format_double(r.we_std) << ',' << (r.is_std > r.we_std ? 1 : 0) << '\n';
}

BoundEstimate estimate_bound(const PredictorModel& model, const GaussianTiltModel& tilt, std::size_t samples,
                             double epsilon, Rng& rng) {
  const LabeledDataset src = tilt.sample(rng, samples, false);
  const LabeledDataset tgt = tilt.sample(rng, samples, true);
  const auto ps = model.predict(src.features()).probabilities;
  const auto pt = model.predict(tgt.features()).probabilities;
  BoundEstimate b;
  for (std::size_t i = 0; i < samples; ++i)
    b.source_risk += expected_cross_entropy(ps[i], tilt.label_probability(src.features().row(i)));
  const auto h = conditional_entropy(pt);
  std::vector<double> fw(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    b.test_risk += expected_cross_entropy(pt[j], tilt.label_probability(tgt.features().row(j)));
    fw[j] = std::min(1.0 / tilt.test_over_train(tgt.features().row(j)), 1e300);
  }
  const double n = static_cast<double>(samples);
  b.source_risk /= n;
  b.test_risk /= n;
  b.weighted_entropy = weighted_entropy_term(fw, h);
  b.gap = theorem1_gap(b.source_risk, b.weighted_entropy, epsilon, b.test_risk);
  return b;
}

}  // namespace fairshift
