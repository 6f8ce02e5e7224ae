#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "lds/core/dataset.hpp"
#include "lds/core/error.hpp"
#include "lds/core/rng.hpp"
#include "lds/core/types.hpp"
#include "lds/encoder/embedding_store.hpp"

namespace lds {

/// Gaussian classes around means on a sphere, with label reps near the means.
struct SynthConfig {
  std::size_t n_classes = 20;
  Eigen::Index dim = 16;
  double mean_scale = 1.0;
  double sigma = 0.275;
  double label_sigma = 0.0;
  std::size_t samples_per_class = 60;
  std::uint64_t seed = 0;
  // Leading classes go to train, then valid; the rest are test classes.
  std::size_t n_train = 0;
  std::size_t n_valid = 0;

  void validate() const {
    if (n_classes == 0 || dim <= 0 || samples_per_class == 0) {
      throw ConfigError("synthetic n_classes, dim and samples_per_class must be positive");
    }
    if (!(mean_scale > 0.0)) throw ConfigError("synthetic mean_scale must be positive");
    if (!(sigma >= 0.0) || !(label_sigma >= 0.0)) throw ConfigError("synthetic sigmas must be >= 0");
    if (n_train + n_valid > n_classes) throw ConfigError("n_train + n_valid exceeds n_classes");
  }
};

/// Everything an evaluation over precomputed reps needs. Sample store keys are
/// dataset indices in decimal, label store keys the class names.
struct SyntheticData {
  Dataset dataset;
  ClassSplit split;
  EmbeddingStore samples;
  EmbeddingStore labels;
  std::vector<Vector> means;
};

namespace detail {

inline std::string class_name(std::size_t c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "class%03zu", c);
  return buf;
}

// Stores keep float32 on disk; rounding here keeps memory and disk identical.
inline Vector round_to_float(Vector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = static_cast<float>(v[i]);
  return v;
}

}  // namespace detail

inline SyntheticData gen_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  SyntheticData out;
  out.samples = EmbeddingStore(cfg.dim);
  out.labels = EmbeddingStore(cfg.dim);

  Rng mean_rng(cfg.seed, Stream::kSynth, 0);
  std::vector<TextSample> texts;
  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    Vector m(cfg.dim);
    do {
      for (Eigen::Index i = 0; i < cfg.dim; ++i) m[i] = mean_rng.normal();
    } while (m.norm() == 0.0);
    m = detail::round_to_float(cfg.mean_scale * m / m.norm());
    out.means.push_back(m);
  }
  for (std::size_t c = 0; c < cfg.n_classes; ++c) {
    const std::string name = detail::class_name(c);
    Rng rng(cfg.seed, Stream::kSynth, 1 + c);
    const Vector& m = out.means[c];
    Vector label = m;
    if (cfg.label_sigma > 0.0) {
      for (Eigen::Index i = 0; i < cfg.dim; ++i) label[i] += cfg.label_sigma * rng.normal();
    }
    out.labels.insert(name, detail::round_to_float(label));
    for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
      Vector v = m;
      if (cfg.sigma > 0.0) {
        for (Eigen::Index i = 0; i < cfg.dim; ++i) v[i] += cfg.sigma * rng.normal();
      }
      out.samples.insert(std::to_string(texts.size()), detail::round_to_float(v));
      texts.push_back({name + " sample " + std::to_string(s), name});
    }
    if (c < cfg.n_train) {
      out.split.train.push_back(name);
    } else if (c < cfg.n_train + cfg.n_valid) {
      out.split.valid.push_back(name);
    } else {
      out.split.test.push_back(name);
    }
  }
  out.dataset = Dataset(std::move(texts));
  return out;
}

/// Keyword text corpus: each domain has a training class and a test class.
/// Texts mix domain keywords with shared filler words. The test class names
/// are keywords that also occur in the training texts of their domain, so a
/// vocabulary built from training texts covers them.
struct TextSynthConfig {
  std::size_t samples_per_class = 40;
  std::size_t words_per_sample = 10;
  double keyword_prob = 0.3;
  std::uint64_t seed = 0;

  void validate() const {
    if (samples_per_class == 0 || words_per_sample == 0) throw ConfigError("text synth counts must be positive");
    if (!(keyword_prob > 0.0 && keyword_prob <= 1.0)) throw ConfigError("keyword_prob must lie in (0, 1]");
  }
};

struct TextDomain {
  const char* train_label;
  const char* test_label;
  std::array<const char*, 8> keywords;  // keywords[0] is the test label
};

inline constexpr std::array<TextDomain, 5> kTextDomains = {{
    {"sports", "football", {"football", "game", "team", "coach", "season", "match", "player", "league"}},
    {"business", "stocks", {"stocks", "market", "shares", "profit", "investor", "company", "trade", "bank"}},
    {"health", "medicine", {"medicine", "doctor", "hospital", "patient", "disease", "treatment", "vaccine", "clinic"}},
    {"science", "physics", {"physics", "research", "experiment", "laboratory", "theory", "particle", "scientist", "energy"}},
    {"travel", "tourism", {"tourism", "hotel", "flight", "beach", "vacation", "airport", "resort", "tourist"}},
}};

inline constexpr std::array<const char*, 30> kFillerWords = {
    "the",   "a",     "of",    "and",   "to",    "in",   "for",   "on",   "with",  "new",
    "said",  "after", "over",  "more",  "first", "week", "year",  "time", "people", "report",
    "today", "could", "about", "other", "local", "big",  "plans", "says", "still", "again"};

struct SyntheticText {
  Dataset dataset;
  ClassSplit split;
};

/// Training texts draw keywords from the domain's train label plus all eight
/// keywords; test texts from the test label plus three other keywords.
inline SyntheticText gen_synthetic_text(const TextSynthConfig& cfg) {
  cfg.validate();
  std::vector<TextSample> samples;
  SyntheticText out;
  std::size_t cls = 0;
  for (bool test : {false, true}) {
    for (const auto& dom : kTextDomains) {
      std::vector<std::string> keywords;
      if (test) {
        keywords.assign(dom.keywords.begin(), dom.keywords.begin() + 4);
      } else {
        keywords.assign(dom.keywords.begin(), dom.keywords.end());
        keywords.push_back(dom.train_label);
      }
      const std::string label = test ? dom.test_label : dom.train_label;
      (test ? out.split.test : out.split.train).push_back(label);
      Rng rng(cfg.seed, Stream::kSynth, 1000 + cls++);
      for (std::size_t s = 0; s < cfg.samples_per_class; ++s) {
        std::string text;
        for (std::size_t w = 0; w < cfg.words_per_sample; ++w) {
          if (w > 0) text += ' ';
          if (rng.uniform() < cfg.keyword_prob) {
            text += keywords[rng.below(keywords.size())];
          } else {
            text += kFillerWords[rng.below(kFillerWords.size())];
          }
        }
        samples.push_back({std::move(text), label});
      }
    }
  }
  out.dataset = Dataset(std::move(samples));
  return out;
}

}  // namespace lds
