// lds: train / eval / ablate / synth / gradcheck / export-csv
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "lds/lds.hpp"

namespace {

using nlohmann::json;
using namespace lds;

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, x);
  return buf;
}

void require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("config needs \"") + key + "\"");
}

// ---- train ----

int cmd_train(const std::string& config_path, const std::string& log_path) {
  const RunConfig cfg = load_run_config(config_path);
  require(cfg.dataset, "dataset");
  require(cfg.split, "split");
  require(cfg.backend.checkpoint, "backend.checkpoint");
  const Dataset dataset = load_dataset(cfg.dataset);
  const ClassSplit split = load_split(cfg.split);

  const TrainResult res = train(cfg, dataset, split, &std::cout);
  save_checkpoint(res.params, res.vocab, cfg.backend.checkpoint);
  std::cout << "kept epoch " << res.best_epoch << ", checkpoint " << cfg.backend.checkpoint << '\n';

  if (!log_path.empty()) {
    std::ofstream out(log_path, std::ios::trunc);
    if (!out) throw DataError("cannot write training log '" + log_path + "'");
    for (const auto& l : res.log) {
      json j{{"epoch", l.epoch}, {"train_loss", l.train_loss}, {"train_accuracy", l.train_accuracy}};
      j["valid_accuracy"] = std::isnan(l.valid_accuracy) ? json(nullptr) : json(l.valid_accuracy);
      out << j.dump() << '\n';
    }
  }
  return 0;
}

// ---- eval ----

struct EvalArgs {
  std::string config;
  std::string scaler;
  std::string metalearner;
  std::string out_csv;
  std::string metrics_json;
  std::string data_prefix;
};

// Files written by `synth --out-prefix P`.
struct PrefixPaths {
  std::string dataset, split, samples, labels;
};

PrefixPaths prefix_paths(const std::string& p) {
  return {p + ".jsonl", p + ".split.json", p + ".samples.ldse", p + ".labels.ldse"};
}

int cmd_eval(const EvalArgs& args) {
  RunConfig cfg = load_run_config(args.config);
  if (!args.scaler.empty()) {
    if (args.scaler != "em" && args.scaler != "none") throw ConfigError("--scaler must be em or none");
    cfg.use_scaler = args.scaler == "em";
  }
  if (!args.metalearner.empty()) cfg.metalearner = parse_metalearner(args.metalearner);
  if (!args.data_prefix.empty()) {
    const auto p = prefix_paths(args.data_prefix);
    cfg.dataset = p.dataset;
    cfg.split = p.split;
    cfg.backend.kind = BackendKind::kPrecomputed;
    cfg.backend.sample_store = p.samples;
    cfg.backend.label_store = p.labels;
  }
  require(cfg.dataset, "dataset");
  require(cfg.split, "split");
  const Dataset dataset = load_dataset(cfg.dataset);
  const ClassSplit split = load_split(cfg.split);
  if (split.test.empty()) throw DataError("invalid split: no test classes");
  const ClassSplit test_only{{}, {}, split.test};
  throw_on_violations(dataset, test_only, cfg);

  // Keep whichever backend is used alive for the embedder.
  std::optional<EmbeddingStore> samples, labels;
  std::optional<Checkpoint> ckpt;
  std::optional<TokenizedCorpus> corpus;
  EpisodeEmbedder embed;
  if (cfg.backend.kind == BackendKind::kPrecomputed) {
    require(cfg.backend.sample_store, "backend.sample_store");
    require(cfg.backend.label_store, "backend.label_store");
    samples = load_embedding_store(cfg.backend.sample_store);
    labels = load_embedding_store(cfg.backend.label_store);
    check_store_coverage(dataset, split.test, *samples, *labels);
    embed = store_embedder(*samples, *labels);
  } else {
    require(cfg.backend.checkpoint, "backend.checkpoint");
    ckpt = load_checkpoint(cfg.backend.checkpoint);
    corpus = tokenize_corpus(dataset, ckpt->vocab, PromptTemplate(cfg.backend.prompt_template));
    embed = encoder_embedder(ckpt->params, *corpus);
  }

  std::vector<Metrics> runs;
  std::vector<double> run_means;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    const auto opt = eval_options(cfg, cfg.test_episodes, Stream::kEval, cfg.seed + r);
    runs.push_back(evaluate(dataset, split.test, embed, opt));
    run_means.push_back(runs.back().mean);
    std::cout << "run " << r << " seed " << cfg.seed + r << " accuracy " << fmt(runs.back().mean) << " std "
              << fmt(runs.back().std) << " episodes " << runs.back().count << " (" << fmt(runs.back().seconds, 2)
              << " s)\n";
  }
  std::cout << to_string(cfg.metalearner) << (cfg.use_scaler ? " + em scaler" : "") << ": mean accuracy "
            << fmt(stats::mean(run_means)) << " std over runs " << fmt(stats::stddev(run_means)) << '\n';

  if (!args.out_csv.empty()) csv::export_metrics(runs, args.out_csv);
  if (!args.metrics_json.empty()) {
    json j = json::array();
    for (const auto& m : runs) {
      j.push_back({{"accuracies", m.accuracies}, {"mean", m.mean}, {"std", m.std}, {"count", m.count},
                   {"seconds", m.seconds}});
    }
    std::ofstream out(args.metrics_json, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + args.metrics_json + "'");
    out << j.dump(1) << '\n';
  }
  return 0;
}

// ---- ablate ----

int cmd_ablate(const std::string& config_path, const std::string& out_csv) {
  const RunConfig cfg = load_run_config(config_path);
  require(cfg.dataset, "dataset");
  require(cfg.split, "split");
  const Dataset dataset = load_dataset(cfg.dataset);
  const ClassSplit split = load_split(cfg.split);
  const auto rows = ablate(cfg, dataset, split);
  std::cout << "loss      scaler  head  accuracy  std\n";
  for (const auto& r : rows) {
    char line[128];
    std::snprintf(line, sizeof line, "%-9s %-7s %-5s %.4f    %.4f", std::string(to_string(r.loss)).c_str(),
                  r.scaler ? "em" : "none", std::string(to_string(r.metalearner)).c_str(), r.metrics.mean,
                  r.metrics.std);
    std::cout << line << '\n';
  }
  csv::export_ablation(rows, out_csv);
  return 0;
}

// ---- synth ----

int cmd_synth(const std::string& config_path, const std::string& prefix) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config '" + config_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(config_path + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  std::string type = "vectors";
  detail::read_key(j, "type", type);
  const auto p = prefix_paths(prefix);
  if (const auto dir = std::filesystem::path(prefix).parent_path(); !dir.empty()) {
    std::filesystem::create_directories(dir);
  }

  if (type == "vectors") {
    detail::reject_unknown_keys(j,
                                {"type", "n_classes", "dim", "mean_scale", "sigma", "label_sigma",
                                 "samples_per_class", "seed", "n_train", "n_valid"},
                                "synth config");
    SynthConfig c;
    detail::read_key(j, "n_classes", c.n_classes);
    detail::read_key(j, "dim", c.dim);
    detail::read_key(j, "mean_scale", c.mean_scale);
    detail::read_key(j, "sigma", c.sigma);
    detail::read_key(j, "label_sigma", c.label_sigma);
    detail::read_key(j, "samples_per_class", c.samples_per_class);
    detail::read_key(j, "seed", c.seed);
    detail::read_key(j, "n_train", c.n_train);
    detail::read_key(j, "n_valid", c.n_valid);
    const auto data = gen_synthetic(c);
    save_dataset(data.dataset, p.dataset);
    save_split(data.split, p.split);
    save_embedding_store(data.samples, p.samples);
    save_embedding_store(data.labels, p.labels);
    std::cout << "wrote " << data.dataset.size() << " samples in " << c.n_classes << " classes to " << prefix
              << ".{jsonl,split.json,samples.ldse,labels.ldse}\n";
  } else if (type == "text") {
    detail::reject_unknown_keys(j, {"type", "samples_per_class", "words_per_sample", "keyword_prob", "seed"},
                                "synth config");
    TextSynthConfig c;
    detail::read_key(j, "samples_per_class", c.samples_per_class);
    detail::read_key(j, "words_per_sample", c.words_per_sample);
    detail::read_key(j, "keyword_prob", c.keyword_prob);
    detail::read_key(j, "seed", c.seed);
    const auto data = gen_synthetic_text(c);
    save_dataset(data.dataset, p.dataset);
    save_split(data.split, p.split);
    std::cout << "wrote " << data.dataset.size() << " texts to " << prefix << ".{jsonl,split.json}\n";
  } else {
    throw ConfigError("synth type must be 'vectors' or 'text'");
  }
  return 0;
}

// ---- gradcheck ----

// Random 5-way episodes, d=16, K=2, M=3; every loss against central differences.
int cmd_gradcheck(int trials, std::uint64_t seed, double h, double tolerance) {
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  const std::size_t n = 5, per_class = 5;
  const Eigen::Index d = 16;
  double worst_all = 0.0;
  const char* names[] = {"lg", "label", "all", "ce"};
  double worst[4] = {0, 0, 0, 0};
  for (int t = 0; t < trials; ++t) {
    Rng rng(seed, Stream::kTest, static_cast<std::uint64_t>(t));
    std::vector<Vector> v, u;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < n * per_class; ++i) {
      Vector x(d);
      for (Eigen::Index k = 0; k < d; ++k) x[k] = 0.3 * rng.normal();
      v.push_back(x);
      labels.push_back(i / per_class);
    }
    for (std::size_t k = 0; k < n; ++k) {
      Vector x(d);
      for (Eigen::Index c = 0; c < d; ++c) x[c] = 0.3 * rng.normal();
      u.push_back(x);
    }
    const double tau = 0.5;
    const VectorLossFn fns[] = {
        [&](const std::vector<Vector>& a, const std::vector<Vector>& b) { return loss_lg(a, labels, b, tau); },
        [&](const std::vector<Vector>&, const std::vector<Vector>& b) { return loss_label(b, tau); },
        [&](const std::vector<Vector>& a, const std::vector<Vector>& b) { return loss_all(a, labels, b, tau); },
        [&](const std::vector<Vector>& a, const std::vector<Vector>& b) { return loss_ce(a, labels, b, tau); },
    };
    for (int f = 0; f < 4; ++f) {
      const double err = check_loss_gradient(fns[f], v, u, h);
      worst[f] = std::max(worst[f], err);
      worst_all = std::max(worst_all, err);
    }
  }
  for (int f = 0; f < 4; ++f) {
    std::cout << "loss_" << names[f] << ": max relative error " << worst[f] << (worst[f] < tolerance ? "" : "  FAIL")
              << '\n';
  }
  if (!(worst_all < tolerance)) throw NumericalError("gradient check failed (max error " + std::to_string(worst_all) + ")");
  return 0;
}

// ---- export-csv ----

int cmd_export_csv(const std::string& in_path, const std::string& out_csv) {
  std::ifstream in(in_path);
  if (!in) throw DataError("cannot open metrics '" + in_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(in_path + ": malformed JSON (" + e.what() + ")");
  }
  if (j.is_object()) j = json::array({j});
  std::vector<Metrics> runs;
  try {
    for (const auto& r : j) runs.push_back(Metrics::from(r.at("accuracies").get<std::vector<double>>()));
  } catch (const json::exception& e) {
    throw DataError(in_path + ": not a metrics file (" + e.what() + ")");
  }
  csv::export_metrics(runs, out_csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot text classification with label-guided distance scaling"};
  app.require_subcommand(1);

  std::string config, out, log_path, prefix, input;
  auto* train_cmd = app.add_subcommand("train", "train the toy encoder; writes backend.checkpoint");
  train_cmd->add_option("--config", config, "run config (JSON)")->required();
  train_cmd->add_option("--log", log_path, "per-epoch log (JSON lines)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "evaluate on the test classes");
  eval_cmd->add_option("--config", eval_args.config, "run config (JSON)")->required();
  eval_cmd->add_option("--scaler", eval_args.scaler, "em | none (overrides config)");
  eval_cmd->add_option("--metalearner", eval_args.metalearner, "pn | rrml (overrides config)");
  eval_cmd->add_option("--out", eval_args.out_csv, "per-episode CSV");
  eval_cmd->add_option("--metrics-json", eval_args.metrics_json, "metrics as JSON");
  eval_cmd->add_option("--data-prefix", eval_args.data_prefix,
                       "use the files written by `synth --out-prefix` with a precomputed backend");

  auto* ablate_cmd = app.add_subcommand("ablate", "loss x scaler x meta-learner grid");
  ablate_cmd->add_option("--config", config, "run config (JSON)")->required();
  ablate_cmd->add_option("--out", out, "report CSV")->required();

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  synth_cmd->add_option("--config", config, "synth config (JSON)")->required();
  synth_cmd->add_option("--out-prefix", prefix, "output path prefix")->required();

  int trials = 20;
  std::uint64_t seed = 0;
  double h = 1e-4, tolerance = 1e-5;
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of every loss");
  grad_cmd->add_option("--trials", trials, "random episodes")->capture_default_str();
  grad_cmd->add_option("--seed", seed)->capture_default_str();
  grad_cmd->add_option("--step", h, "central-difference step")->capture_default_str();
  grad_cmd->add_option("--tolerance", tolerance)->capture_default_str();

  auto* export_cmd = app.add_subcommand("export-csv", "convert eval --metrics-json output to CSV");
  export_cmd->add_option("--metrics", input, "metrics JSON")->required();
  export_cmd->add_option("--out", out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(config, log_path);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*ablate_cmd) return cmd_ablate(config, out);
    if (*synth_cmd) return cmd_synth(config, prefix);
    if (*grad_cmd) return cmd_gradcheck(trials, seed, h, tolerance);
    if (*export_cmd) return cmd_export_csv(input, out);
  } catch (const lds::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
