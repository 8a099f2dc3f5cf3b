// fairshift command-line driver.
//
//   fairshift split          --data pool.csv --out dir [--gamma G] [--seed S]
//   fairshift train          --config exp.cfg --out dir [--method M] [--seed S] [--gamma G] [--m M]
//   fairshift evaluate       --checkpoint ckpt.json --data test.csv --out dir
//   fairshift experiment     --config exp.cfg --out dir [--reps R] [--seed S] [--method M] [--gamma G] [--m M]
//   fairshift variance-study --config var.cfg --out dir [--reps R] [--seed S] [--gamma G] [--m M]
//   fairshift pareto         --in aggregate.csv --out dir
//
// Exit status: 0 on success, 1 on usage or input errors, 2 when some runs of a
// sweep failed.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairshift/checkpoint.hpp"
#include "fairshift/experiment.hpp"
#include "fairshift/metrics.hpp"
#include "fairshift/shift_split.hpp"
#include "fairshift/trainer.hpp"

namespace fs = std::filesystem;
using namespace fairshift;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  std::string data;
  std::string schema;
  std::string checkpoint;
  std::string in;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<double> gamma;
  std::optional<std::size_t> m;
  std::optional<std::size_t> reps;
};

KeyValueConfig load_config(const Options& o) {
  return o.config.empty() ? KeyValueConfig{} : KeyValueConfig::load(o.config);
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  return out;
}

void write_indices(const fs::path& dir, const std::string& name, const std::vector<std::size_t>& idx) {
  auto out = open_out(dir, name);
  for (std::size_t i : idx) out << i << '\n';
}

// CLI flags override config-file values.
ExperimentSpec experiment_spec(const Options& o) {
  KeyValueConfig kv = load_config(o);
  if (!o.data.empty()) kv.set("dataset", o.data);
  if (!o.schema.empty()) kv.set("schema", o.schema);
  if (o.seed) kv.set("base_seed", std::to_string(*o.seed));
  if (o.method) kv.set("methods", *o.method);
  if (o.gamma) kv.set("gamma", format_double(*o.gamma));
  if (o.m) kv.set("m", std::to_string(*o.m));
  if (o.reps) kv.set("repetitions", std::to_string(*o.reps));
  return ExperimentSpec::from_config(kv);
}

int cmd_split(const Options& o) {
  if (o.data.empty()) throw std::invalid_argument("split needs --data");
  const KeyValueConfig kv = load_config(o);
  const CsvSchema schema = o.schema.empty() ? CsvSchema{} : load_schema(o.schema);
  const LabeledDataset pool = load_csv(o.data, schema);
  ShiftConfig sc;
  sc.gamma = o.gamma.value_or(kv.get_double("gamma", sc.gamma));
  sc.percentile = kv.get_double("percentile", sc.percentile);
  sc.test_fraction = kv.get_double("test_fraction", sc.test_fraction);
  sc.seed = o.seed.value_or(static_cast<std::uint64_t>(kv.get_int("seed", 0)));
  const long long ag = kv.get_int("asymmetric_group", -1);
  if (ag >= 0) sc.asymmetric_group = static_cast<int>(ag);
  const SplitResult r = split(pool, sc);
  const fs::path dir = o.out;
  write_indices(dir, "train_idx.txt", r.train_idx);
  write_indices(dir, "val_idx.txt", r.val_idx);
  write_indices(dir, "test_idx.txt", r.test_idx);
  nlohmann::json j = {
      {"gamma", r.gamma},
      {"anchor", r.anchor},
      {"log_normalizer", r.log_normalizer},
      {"normalizer", std::exp(r.log_normalizer)},
      {"anchor_within_group", r.anchor_within_group},
      {"seed", sc.seed},
      {"n_train", r.train_idx.size()},
      {"n_val", r.val_idx.size()},
      {"n_test", r.test_idx.size()},
  };
  open_out(dir, "split.json") << j.dump(1) << '\n';
  std::cout << "split: " << r.train_idx.size() << " train, " << r.val_idx.size() << " val, " << r.test_idx.size()
            << " test -> " << dir.string() << '\n';
  return 0;
}

int cmd_train(const Options& o) {
  ExperimentSpec spec = experiment_spec(o);
  std::optional<LabeledDataset> pool;
  if (spec.dataset != "synthetic")
    pool = load_pool(spec);
  const std::uint64_t seed = spec.base_seed;
  const double gamma = spec.gamma.front();
  const RunData data = prepare_run_data(spec, pool ? &*pool : nullptr, gamma, seed);
  TrainConfig cfg = spec.train;
  cfg.method = spec.methods.front();
  cfg.lambda1 = spec.lambda1.front();
  cfg.lambda2 = spec.lambda2.front();
  cfg.m_cap = spec.m.front();
  cfg.seed = seed;
  const TrainedModel model = train(data.source, data.target, cfg);

  const fs::path dir = o.out;
  fs::create_directories(dir);
  save_checkpoint(dir / "checkpoint.json", Checkpoint{model.predictor, model.weight_net});
  {
    auto log = open_out(dir, "history.jsonl");
    write_history_jsonl(log, model.history);
  }
  write_csv(dir / "test.csv", data.target_labeled);
  const RunMetrics m = evaluate_model(model.predictor, data.target_labeled, spec.eodds);
  open_out(dir, "metrics.csv") << metrics_csv_header() << '\n' << metrics_csv_row(cfg.method, seed, gamma, m) << '\n';
  std::cout << to_string(cfg.method) << ": error " << m.error_pct << "%, eodds " << m.eodds << ", acc parity "
            << m.acc_parity_pct << " -> " << dir.string() << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.checkpoint.empty() || o.data.empty()) throw std::invalid_argument("evaluate needs --checkpoint and --data");
  const Checkpoint ckpt = load_checkpoint(o.checkpoint);
  const LabeledDataset data = load_csv(o.data, o.schema.empty() ? CsvSchema{} : load_schema(o.schema));
  const KeyValueConfig kv = load_config(o);
  const auto convention = kv.get_string("eodds", "max") == "mean" ? EOddsConvention::kMean : EOddsConvention::kMax;
  const RunMetrics m = evaluate_model(ckpt.predictor, data, convention);
  const Method method = parse_method(o.method.value_or(ckpt.weight_network ? "ours" : "erm"));
  const fs::path dir = o.out;
  open_out(dir, "metrics.csv") << metrics_csv_header() << '\n'
                               << metrics_csv_row(method, o.seed.value_or(0), o.gamma.value_or(0.0), m) << '\n';
  if (ckpt.weight_network) {
    const auto h = fw_ratio_histogram(*ckpt.weight_network, ckpt.predictor, data.features(), data.features());
    auto out = open_out(dir, "fw_histogram.csv");
    out << "bin,lo,hi,count\n";
    const double width = (h.target.hi - h.target.lo) / static_cast<double>(h.target.counts.size());
    for (std::size_t b = 0; b < h.target.counts.size(); ++b)
      out << b << ',' << format_double(h.target.lo + width * static_cast<double>(b)) << ','
          << format_double(h.target.lo + width * static_cast<double>(b + 1)) << ',' << h.target.counts[b] << '\n';
  }
  std::cout << "error " << m.error_pct << "%, eodds " << m.eodds << ", acc parity " << m.acc_parity_pct << '\n';
  return 0;
}

int cmd_experiment(const Options& o) {
  const ExperimentSpec spec = experiment_spec(o);
  const ExperimentResult r = run_experiment(spec);
  const fs::path dir = o.out;
  {
    auto out = open_out(dir, "runs.csv");
    write_runs_csv(out, r.runs);
  }
  {
    auto out = open_out(dir, "aggregate.csv");
    write_aggregate_csv(out, r.aggregate);
  }
  {
    auto out = open_out(dir, "pareto.csv");
    write_aggregate_csv(out, pareto_frontier(r.aggregate));
  }
  std::size_t failed = 0;
  for (const auto& run : r.runs) failed += !run.ok;
  std::cout << r.runs.size() << " runs, " << failed << " failed -> " << dir.string() << '\n';
  return failed == 0 ? 0 : 2;
}

int cmd_variance(const Options& o) {
  KeyValueConfig kv = load_config(o);
  if (o.seed) kv.set("base_seed", std::to_string(*o.seed));
  if (o.gamma) kv.set("gamma", format_double(*o.gamma));
  if (o.m) kv.set("m", std::to_string(*o.m));
  if (o.reps) kv.set("repetitions", std::to_string(*o.reps));
  const VarianceSpec spec = VarianceSpec::from_config(kv);
  const auto rows = run_variance_study(spec);
  auto out = open_out(o.out, "variance.csv");
  write_variance_csv(out, rows, spec.repetitions);
  std::cout << rows.size() << " grid points -> " << o.out << '\n';
  return 0;
}

int cmd_pareto(const Options& o) {
  if (o.in.empty()) throw std::invalid_argument("pareto needs --in");
  const auto rows = read_aggregate_csv(o.in);
  auto out = open_out(o.out, "pareto.csv");
  write_aggregate_csv(out, pareto_frontier(rows));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair classification under covariate shift"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", o.seed, "seed (base seed for sweeps)");
  };
  auto grid = [&](CLI::App* sub) {
    sub->add_option("--gamma", o.gamma, "shift strength");
    sub->add_option("--m", o.m, "number of unlabeled target rows");
  };

  auto* split_cmd = app.add_subcommand("split", "shift-split a CSV into train/val/test indices");
  common(split_cmd);
  split_cmd->add_option("--data", o.data, "labeled CSV")->required();
  split_cmd->add_option("--schema", o.schema, "schema sidecar");
  split_cmd->add_option("--gamma", o.gamma, "shift strength");

  auto* train_cmd = app.add_subcommand("train", "train one model and write checkpoint, log and metrics");
  common(train_cmd);
  grid(train_cmd);
  train_cmd->add_option("--data", o.data, "labeled CSV or 'synthetic'");
  train_cmd->add_option("--schema", o.schema, "schema sidecar");
  train_cmd->add_option("--method", o.method, "ours, erm, kliep_iw, lsif_iw, zsa or unweighted_entropy");

  auto* eval_cmd = app.add_subcommand("evaluate", "evaluate a checkpoint on labeled data");
  common(eval_cmd);
  eval_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint JSON")->required();
  eval_cmd->add_option("--data", o.data, "labeled CSV")->required();
  eval_cmd->add_option("--schema", o.schema, "schema sidecar");
  eval_cmd->add_option("--method", o.method, "method name written to the metrics row");
  eval_cmd->add_option("--gamma", o.gamma, "gamma written to the metrics row");

  auto* exp_cmd = app.add_subcommand("experiment", "repeated seeded runs over a grid");
  common(exp_cmd);
  grid(exp_cmd);
  exp_cmd->add_option("--data", o.data, "labeled CSV or 'synthetic'");
  exp_cmd->add_option("--schema", o.schema, "schema sidecar");
  exp_cmd->add_option("--method", o.method, "comma-separated methods");
  exp_cmd->add_option("--reps", o.reps, "repetitions per grid point");

  auto* var_cmd = app.add_subcommand("variance-study", "spread of importance-weighted vs weighted-entropy estimates");
  common(var_cmd);
  grid(var_cmd);
  var_cmd->add_option("--reps", o.reps, "repetitions per grid point");

  auto* pareto_cmd = app.add_subcommand("pareto", "non-dominated rows of an aggregate CSV");
  pareto_cmd->add_option("--in", o.in, "aggregate.csv")->required();
  pareto_cmd->add_option("--out", o.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (split_cmd->parsed()) return cmd_split(o);
    if (train_cmd->parsed()) return cmd_train(o);
    if (eval_cmd->parsed()) return cmd_evaluate(o);
    if (exp_cmd->parsed()) return cmd_experiment(o);
    if (var_cmd->parsed()) return cmd_variance(o);
    if (pareto_cmd->parsed()) return cmd_pareto(o);
  } catch (const std::exception& e) {
    std::cerr << "fairshift: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
