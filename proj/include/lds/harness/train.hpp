#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/encoder/toy_encoder.hpp"
#include "lds/encoder/vocabulary.hpp"
#include "lds/harness/backend.hpp"
#include "lds/harness/config.hpp"
#include "lds/harness/evaluate.hpp"
#include "lds/harness/optimizer.hpp"
#include "lds/losses.hpp"
#include "lds/metalearners.hpp"
#include "lds/sampler.hpp"

namespace lds {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double valid_accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN without validation classes
};

struct TrainResult {
  Vocabulary vocab;
  EncoderParams params;       // best-validation epoch, or the last epoch without validation
  std::size_t best_epoch = 0;  // 0: initial parameters
  std::vector<EpochLog> log;
};

inline void throw_on_violations(const Dataset& dataset, const ClassSplit& split, const RunConfig& cfg) {
  const auto violations = validate_split(dataset, split, cfg.n_way, cfg.k_shot, cfg.m_query);
  if (violations.empty()) return;
  std::string msg = "invalid split:";
  for (const auto& v : violations) msg += "\n  " + v.message;
  throw DataError(msg);
}

/// Loss of one training episode over the encoded batch, plus the table gradient.
struct StepResult {
  double loss = 0.0;
  double accuracy = 0.0;
  RowMatrix grad;
};

/// Forward and backward pass for one episode. The batch is every support and
/// query sample of the episode; the label-guided losses also take the N label
/// reps, the CE loss classifies the queries against support prototypes.
inline StepResult episode_step(const EncoderParams& params, const TokenizedCorpus& corpus, const Episode& ep,
                               const RunConfig& cfg) {
  std::vector<TokenList> tokens;
  std::vector<Vector> reps;
  std::vector<std::size_t> labels;
  const std::size_t n = ep.class_names.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (auto idx : ep.support[k]) {
      tokens.push_back(corpus.samples.at(idx));
      labels.push_back(k);
    }
  }
  const std::size_t n_support = tokens.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (auto idx : ep.query[k]) {
      tokens.push_back(corpus.samples.at(idx));
      labels.push_back(k);
    }
  }
  for (const auto& t : tokens) reps.push_back(encode_text(params, t));

  std::vector<std::vector<Vector>> support(n);
  for (std::size_t i = 0; i < n_support; ++i) support[labels[i]].push_back(reps[i]);
  const auto protos = compute_prototypes(support);

  StepResult out;
  std::vector<Vector> grads;
  if (cfg.loss.kind == LossKind::kCE) {
    const std::vector<Vector> queries(reps.begin() + static_cast<std::ptrdiff_t>(n_support), reps.end());
    const std::vector<std::size_t> qlabels(labels.begin() + static_cast<std::ptrdiff_t>(n_support), labels.end());
    const LossResult r = loss_ce(queries, qlabels, protos, cfg.loss.tau);
    out.loss = r.value;
    // A prototype is the mean of its K supports.
    for (std::size_t i = 0; i < n_support; ++i) {
      grads.push_back(r.grad_u[labels[i]] / static_cast<double>(ep.support[labels[i]].size()));
    }
    grads.insert(grads.end(), r.grad_v.begin(), r.grad_v.end());
  } else {
    std::vector<Vector> label_reps;
    for (const auto& name : ep.class_names) {
      tokens.push_back(corpus.label(name));
      label_reps.push_back(encode_text(params, tokens.back()));
    }
    const LossResult r = cfg.loss.kind == LossKind::kLG ? loss_lg(reps, labels, label_reps, cfg.loss.tau)
                                                         : loss_all(reps, labels, label_reps, cfg.loss.tau);
    out.loss = r.value;
    grads = r.grad_v;
    grads.insert(grads.end(), r.grad_u.begin(), r.grad_u.end());
  }
  if (!std::isfinite(out.loss)) return out;
  out.grad = encoder_backward(params, tokens, grads);

  std::size_t correct = 0;
  for (std::size_t i = n_support; i < labels.size(); ++i) {
    correct += predict(classify_pn(reps[i], protos, cfg.cls_tau)) == labels[i];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size() - n_support);
  return out;
}

/// Episodic training of the toy encoder. Each epoch runs `train_episodes`
/// optimizer steps; after it, validation accuracy (same scaler and
/// meta-learner as evaluation) picks the kept parameters. Ties keep the
/// earlier epoch.
inline TrainResult train(const RunConfig& cfg, const Dataset& dataset, const ClassSplit& split,
                         std::ostream* progress = nullptr) {
  cfg.validate();
  if (cfg.backend.kind != BackendKind::kTrainable) throw ConfigError("train needs a trainable backend");
  throw_on_violations(dataset, split, cfg);
  if (split.train.empty() && cfg.epochs > 0) throw DataError("invalid split: no training classes");

  const PromptTemplate tmpl(cfg.backend.prompt_template);
  TrainResult res;
  res.vocab = build_vocabulary(dataset, split.train, tmpl);
  res.params = init_encoder(res.vocab.size(), cfg.backend.dim, cfg.seed);
  const TokenizedCorpus corpus = tokenize_corpus(dataset, res.vocab, tmpl);

  EncoderParams params = res.params;
  Adam adam(cfg.optimizer, params.table.rows(), params.table.cols());
  const SamplerConfig sampler{cfg.n_way, cfg.k_shot, cfg.m_query, cfg.seed};
  double best = -1.0;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    for (std::size_t e = 0; e < cfg.train_episodes; ++e) {
      Rng rng(cfg.seed, Stream::kTrain, (epoch - 1) * cfg.train_episodes + e);
      const Episode ep = sample_episode(dataset, split.train, sampler, rng);
      const StepResult step = episode_step(params, corpus, ep, cfg);
      if (!std::isfinite(step.loss) || !step.grad.allFinite()) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", episode " +
                             std::to_string(e) + " (loss " + std::to_string(step.loss) + ", lr " +
                             std::to_string(cfg.optimizer.learning_rate) + ")");
      }
      adam.step(params.table, step.grad);
      log.train_loss += step.loss / static_cast<double>(cfg.train_episodes);
      log.train_accuracy += step.accuracy / static_cast<double>(cfg.train_episodes);
    }
    if (!params.table.allFinite()) throw NumericalError("encoder table became non-finite at epoch " + std::to_string(epoch));

    if (!split.valid.empty()) {
      const auto opt = eval_options(cfg, cfg.valid_episodes, Stream::kValid, cfg.seed);
      log.valid_accuracy = evaluate(dataset, split.valid, encoder_embedder(params, corpus), opt).mean;
      if (log.valid_accuracy > best) {
        best = log.valid_accuracy;
        res.params = params;
        res.best_epoch = epoch;
      }
    } else {
      res.params = params;
      res.best_epoch = epoch;
    }
    if (progress) {
      *progress << "epoch " << epoch << " loss " << log.train_loss << " train_acc " << log.train_accuracy;
      if (!split.valid.empty()) *progress << " valid_acc " << log.valid_accuracy;
      *progress << '\n';
    }
    res.log.push_back(log);
  }
  return res;
}

}  // namespace lds
