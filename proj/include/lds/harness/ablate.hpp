#pragma once

#include <cstddef>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/harness/backend.hpp"
#include "lds/harness/config.hpp"
#include "lds/harness/evaluate.hpp"
#include "lds/harness/train.hpp"
#include "lds/losses.hpp"
#include "lds/metalearners.hpp"

namespace lds {

struct AblationRow {
  LossKind loss = LossKind::kCE;
  bool scaler = false;
  MetaLearnerKind metalearner = MetaLearnerKind::kPN;
  Metrics metrics;
};

/// Loss x scaler x meta-learner grid. One encoder is trained per loss and run
/// (seed + r); its test episodes are evaluated under the four heads. With
/// runs > 1 a row's metrics pool the episodes of every run.
inline std::vector<AblationRow> ablate(const RunConfig& cfg, const Dataset& dataset, const ClassSplit& split) {
  cfg.validate();
  if (cfg.backend.kind != BackendKind::kTrainable) {
    throw ConfigError("ablate trains one encoder per loss and needs a trainable backend");
  }
  if (split.test.empty()) throw DataError("invalid split: no test classes");
  std::vector<AblationRow> rows;
  for (LossKind loss : {LossKind::kCE, LossKind::kLG, LossKind::kLGLabel}) {
    std::vector<std::vector<double>> pooled(4);
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      RunConfig c = cfg;
      c.loss.kind = loss;
      c.seed = cfg.seed + r;
      const TrainResult trained = train(c, dataset, split);
      const TokenizedCorpus corpus =
          tokenize_corpus(dataset, trained.vocab, PromptTemplate(cfg.backend.prompt_template));
      std::size_t cell = 0;
      for (bool scaler : {false, true}) {
        for (MetaLearnerKind ml : {MetaLearnerKind::kPN, MetaLearnerKind::kRRML}) {
          c.use_scaler = scaler;
          c.metalearner = ml;
          const auto opt = eval_options(c, c.test_episodes, Stream::kEval, c.seed);
          const Metrics m = evaluate(dataset, split.test, encoder_embedder(trained.params, corpus), opt);
          pooled[cell].insert(pooled[cell].end(), m.accuracies.begin(), m.accuracies.end());
          ++cell;
        }
      }
    }
    std::size_t cell = 0;
    for (bool scaler : {false, true}) {
      for (MetaLearnerKind ml : {MetaLearnerKind::kPN, MetaLearnerKind::kRRML}) {
        rows.push_back({loss, scaler, ml, Metrics::from(std::move(pooled[cell++]))});
      }
    }
  }
  return rows;
}

}  // namespace lds
