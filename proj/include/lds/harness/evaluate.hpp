#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/harness/backend.hpp"
#include "lds/harness/config.hpp"
#include "lds/harness/stats.hpp"
#include "lds/metalearners.hpp"
#include "lds/sampler.hpp"
#include "lds/scaler.hpp"

namespace lds {

struct Metrics {
  std::vector<double> accuracies;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  double seconds = 0.0;

  static Metrics from(std::vector<double> accs, double seconds = 0.0) {
    Metrics m;
    m.accuracies = std::move(accs);
    m.count = m.accuracies.size();
    m.mean = stats::mean(m.accuracies);
    m.std = stats::stddev(m.accuracies);
    m.seconds = seconds;
    return m;
  }
};

struct EvalOptions {
  SamplerConfig sampler;
  std::size_t episodes = 1000;
  Stream stream = Stream::kEval;
  bool use_scaler = true;
  ScalerConfig scaler;
  MetaLearnerKind metalearner = MetaLearnerKind::kPN;
  double ridge_lambda = 1.0;
  double cls_tau = 0.1;
  std::size_t threads = 0;
};

inline EvalOptions eval_options(const RunConfig& cfg, std::size_t episodes, Stream stream, std::uint64_t seed) {
  EvalOptions o;
  o.sampler = {cfg.n_way, cfg.k_shot, cfg.m_query, seed};
  o.episodes = episodes;
  o.stream = stream;
  o.use_scaler = cfg.use_scaler;
  o.scaler = cfg.scaler;
  o.metalearner = cfg.metalearner;
  o.ridge_lambda = cfg.ridge_lambda;
  o.cls_tau = cfg.cls_tau;
  o.threads = cfg.threads;
  return o;
}

/// Fraction of the episode's queries classified correctly.
inline double episode_accuracy(const EmbeddedEpisode& episode, const EvalOptions& opt) {
  const EmbeddedEpisode ep = opt.use_scaler ? scale_support_set(episode, opt.scaler) : episode;
  ep.validate();
  std::size_t correct = 0, total = 0;
  if (opt.metalearner == MetaLearnerKind::kPN) {
    const auto protos = compute_prototypes(ep.support_reps);
    for (std::size_t k = 0; k < ep.n_way(); ++k) {
      for (const auto& q : ep.query_reps[k]) {
        correct += predict(classify_pn(q, protos, opt.cls_tau)) == k;
        ++total;
      }
    }
  } else {
    const auto model = rrml_fit(ep.support_reps, opt.ridge_lambda);
    for (std::size_t k = 0; k < ep.n_way(); ++k) {
      for (const auto& q : ep.query_reps[k]) {
        correct += predict(rrml_predict(model, q)) == k;
        ++total;
      }
    }
  }
  if (total == 0) throw DataError("episode has no queries");
  return static_cast<double>(correct) / static_cast<double>(total);
}

inline std::size_t resolve_threads(std::size_t requested, std::size_t work) {
  std::size_t t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(t, work));
}

/// Runs `opt.episodes` episodes drawn from `class_pool`. Episode i uses its own
/// generator seeded from (seed, stream, i), so results do not depend on the
/// thread count or scheduling.
inline Metrics evaluate(const Dataset& dataset, std::span<const std::string> class_pool,
                        const EpisodeEmbedder& embed, const EvalOptions& opt) {
  opt.sampler.validate();
  if (opt.episodes == 0) throw ConfigError("episode count must be positive");
  const auto start = std::chrono::steady_clock::now();
  std::vector<double> accs(opt.episodes);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= opt.episodes) return;
      try {
        Rng rng(opt.sampler.seed, opt.stream, i);
        const Episode ep = sample_episode(dataset, class_pool, opt.sampler, rng);
        accs[i] = episode_accuracy(embed(ep), opt);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = opt.episodes;
        return;
      }
    }
  };
  const std::size_t n_threads = resolve_threads(opt.threads, opt.episodes);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return Metrics::from(std::move(accs), secs);
}

}  // namespace lds
