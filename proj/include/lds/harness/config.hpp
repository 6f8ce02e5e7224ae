#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "lds/core/error.hpp"
#include "lds/harness/optimizer.hpp"
#include "lds/losses.hpp"
#include "lds/metalearners.hpp"
#include "lds/scaler.hpp"

namespace lds {

enum class BackendKind { kTrainable, kPrecomputed };

struct BackendConfig {
  BackendKind kind = BackendKind::kTrainable;
  // trainable
  Eigen::Index dim = 32;
  std::string prompt_template = "This is a [MASK] news: [sentence]";
  std::string checkpoint;  // written by train, read by eval
  // precomputed
  std::string sample_store;
  std::string label_store;
};

/// Experiment configuration. Mirrors the JSON config file (snake_case keys).
struct RunConfig {
  std::size_t n_way = 5;
  std::size_t k_shot = 1;
  std::size_t m_query = 5;

  std::size_t epochs = 10;
  std::size_t train_episodes = 100;
  std::size_t valid_episodes = 100;
  std::size_t test_episodes = 1000;

  LossConfig loss;
  double cls_tau = 0.1;

  bool use_scaler = true;
  ScalerConfig scaler;

  MetaLearnerKind metalearner = MetaLearnerKind::kPN;
  double ridge_lambda = 1.0;

  AdamConfig optimizer;
  BackendConfig backend;

  std::string dataset;
  std::string split;

  std::uint64_t seed = 0;
  std::size_t runs = 1;
  std::size_t threads = 0;  // 0: hardware concurrency

  void validate() const {
    if (n_way < 2 || k_shot < 1 || m_query < 1) throw ConfigError("need n_way >= 2, k_shot >= 1, m_query >= 1");
    if (train_episodes == 0 || valid_episodes == 0 || test_episodes == 0) {
      throw ConfigError("episode counts must be positive");
    }
    if (runs == 0) throw ConfigError("runs must be positive");
    if (!(loss.tau > 0.0) || !(cls_tau > 0.0)) throw ConfigError("temperatures must be positive");
    if (ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
    optimizer.validate();
    scaler.validate();
    if (backend.kind == BackendKind::kTrainable && backend.dim <= 0) throw ConfigError("backend dim must be positive");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline std::string resolve(const std::string& path, const std::filesystem::path& base) {
  if (path.empty() || std::filesystem::path(path).is_absolute() || base.empty()) return path;
  return (base / path).lexically_normal().string();
}

}  // namespace detail

/// Parses a config object. Relative paths are resolved against `base_dir`.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_key;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  detail::reject_unknown_keys(
      j,
      {"n_way", "k_shot", "m_query", "epochs", "train_episodes", "valid_episodes", "test_episodes", "loss", "tau",
       "cls_tau", "scaler", "scaler_config", "metalearner", "ridge_lambda", "optimizer",
       "backend", "dataset", "split", "seed", "runs", "threads"},
      "config");
  RunConfig c;
  read_key(j, "n_way", c.n_way);
  read_key(j, "k_shot", c.k_shot);
  read_key(j, "m_query", c.m_query);
  read_key(j, "epochs", c.epochs);
  read_key(j, "train_episodes", c.train_episodes);
  read_key(j, "valid_episodes", c.valid_episodes);
  read_key(j, "test_episodes", c.test_episodes);
  if (j.contains("loss")) c.loss.kind = parse_loss_kind(j.at("loss").get<std::string>());
  read_key(j, "tau", c.loss.tau);
  read_key(j, "cls_tau", c.cls_tau);
  if (j.contains("scaler")) {
    const auto s = j.at("scaler").get<std::string>();
    if (s != "em" && s != "none") throw ConfigError("scaler must be 'em' or 'none'");
    c.use_scaler = s == "em";
  }
  if (j.contains("scaler_config")) {
    const auto& s = j.at("scaler_config");
    detail::reject_unknown_keys(
        s, {"max_iter", "ll_tolerance", "init_variance", "var_floor", "variance_mode", "pairing"}, "scaler_config");
    read_key(s, "max_iter", c.scaler.max_iter);
    read_key(s, "ll_tolerance", c.scaler.ll_tolerance);
    read_key(s, "init_variance", c.scaler.init_variance);
    read_key(s, "var_floor", c.scaler.var_floor);
    if (s.contains("variance_mode")) c.scaler.variance_mode = parse_variance_mode(s.at("variance_mode").get<std::string>());
    if (s.contains("pairing")) c.scaler.pairing = parse_pairing(s.at("pairing").get<std::string>());
  }
  if (j.contains("metalearner")) c.metalearner = parse_metalearner(j.at("metalearner").get<std::string>());
  read_key(j, "ridge_lambda", c.ridge_lambda);
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::reject_unknown_keys(o, {"learning_rate", "beta1", "beta2", "epsilon"}, "optimizer");
    read_key(o, "learning_rate", c.optimizer.learning_rate);
    read_key(o, "beta1", c.optimizer.beta1);
    read_key(o, "beta2", c.optimizer.beta2);
    read_key(o, "epsilon", c.optimizer.epsilon);
  }
  if (j.contains("backend")) {
    const auto& b = j.at("backend");
    detail::reject_unknown_keys(b, {"type", "dim", "template", "checkpoint", "sample_store", "label_store"}, "backend");
    std::string type = "trainable";
    read_key(b, "type", type);
    if (type == "trainable") {
      c.backend.kind = BackendKind::kTrainable;
    } else if (type == "precomputed") {
      c.backend.kind = BackendKind::kPrecomputed;
    } else {
      throw ConfigError("backend type must be 'trainable' or 'precomputed'");
    }
    read_key(b, "dim", c.backend.dim);
    read_key(b, "template", c.backend.prompt_template);
    read_key(b, "checkpoint", c.backend.checkpoint);
    read_key(b, "sample_store", c.backend.sample_store);
    read_key(b, "label_store", c.backend.label_store);
    c.backend.checkpoint = detail::resolve(c.backend.checkpoint, base_dir);
    c.backend.sample_store = detail::resolve(c.backend.sample_store, base_dir);
    c.backend.label_store = detail::resolve(c.backend.label_store, base_dir);
  }
  read_key(j, "dataset", c.dataset);
  read_key(j, "split", c.split);
  c.dataset = detail::resolve(c.dataset, base_dir);
  c.split = detail::resolve(c.split, base_dir);
  read_key(j, "seed", c.seed);
  read_key(j, "runs", c.runs);
  read_key(j, "threads", c.threads);
  c.validate();
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": malformed JSON (" + e.what() + ")");
  }
  return parse_run_config(j, std::filesystem::path(path).parent_path());
}

}  // namespace lds
