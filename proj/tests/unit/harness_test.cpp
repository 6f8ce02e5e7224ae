#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lds/lds.hpp"
#include "test_util.hpp"

namespace lds {
namespace {

using testing::random_vector;
using testing::temp_path;
using testing::vec;

// ---- config ----

TEST(RunConfig, DefaultsAndOverrides) {
  const auto c = parse_run_config(nlohmann::json::parse(R"({
    "n_way": 3, "k_shot": 2, "loss": "ce", "scaler": "none", "metalearner": "rrml",
    "ridge_lambda": 0.5, "optimizer": {"learning_rate": 0.01},
    "backend": {"type": "trainable", "dim": 8}, "seed": 42})"));
  EXPECT_EQ(c.n_way, 3u);
  EXPECT_EQ(c.k_shot, 2u);
  EXPECT_EQ(c.m_query, 5u);
  EXPECT_EQ(c.train_episodes, 100u);
  EXPECT_EQ(c.valid_episodes, 100u);
  EXPECT_EQ(c.test_episodes, 1000u);
  EXPECT_EQ(c.loss.kind, LossKind::kCE);
  EXPECT_FALSE(c.use_scaler);
  EXPECT_EQ(c.metalearner, MetaLearnerKind::kRRML);
  EXPECT_EQ(c.ridge_lambda, 0.5);
  EXPECT_EQ(c.optimizer.learning_rate, 0.01);
  EXPECT_EQ(c.optimizer.beta2, 0.999);
  EXPECT_EQ(c.backend.dim, 8);
  EXPECT_EQ(c.seed, 42u);
}

TEST(RunConfig, RejectsBadInput) {
  auto parse = [](const char* text) { return parse_run_config(nlohmann::json::parse(text)); };
  EXPECT_THROW(parse(R"({"n_wya": 5})"), ConfigError);
  EXPECT_THROW(parse(R"({"n_way": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"test_episodes": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"tau": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"optimizer": {"learning_rate": -1}})"), ConfigError);
  EXPECT_THROW(parse(R"({"scaler": "gmm"})"), ConfigError);
  EXPECT_THROW(parse(R"({"loss": "hinge"})"), ConfigError);
  EXPECT_THROW(parse(R"({"n_way": "five"})"), ConfigError);
  EXPECT_THROW(parse(R"({"backend": {"type": "gpu"}})"), ConfigError);
  EXPECT_THROW(parse("[1, 2]"), ConfigError);
}

TEST(RunConfig, RelativePathsResolveAgainstConfigDir) {
  const auto dir = temp_path("cfgdir");
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.json";
  std::ofstream(path) << R"({"dataset": "data/d.jsonl", "split": "/abs/s.json",
                            "backend": {"type": "precomputed", "sample_store": "s.ldse"}})";
  const auto c = load_run_config(path.string());
  EXPECT_EQ(c.dataset, (dir / "data/d.jsonl").string());
  EXPECT_EQ(c.split, "/abs/s.json");
  EXPECT_EQ(c.backend.sample_store, (dir / "s.ldse").string());
  EXPECT_EQ(c.backend.kind, BackendKind::kPrecomputed);
}

TEST(RunConfig, MissingOrMalformedFile) {
  EXPECT_THROW(load_run_config(temp_path("nope.json").string()), ConfigError);
  const auto path = temp_path("broken.json");
  std::ofstream(path) << "{ \"n_way\": ";
  EXPECT_THROW(load_run_config(path.string()), ConfigError);
}

// ---- optimizer / stats ----

TEST(Adam, FirstStepMovesByLearningRate) {
  RowMatrix p(1, 2);
  p << 1.0, -2.0;
  RowMatrix g(1, 2);
  g << 3.0, -0.5;
  Adam adam({}, 1, 2);
  adam.step(p, g);
  // Bias-corrected first step is lr * g / (|g| + eps).
  EXPECT_NEAR(p(0, 0), 1.0 - 1e-3, 1e-10);
  EXPECT_NEAR(p(0, 1), -2.0 + 1e-3, 1e-10);
  EXPECT_EQ(adam.steps(), 1);
}

TEST(Adam, MinimisesQuadratic) {
  RowMatrix p = RowMatrix::Constant(2, 3, 1.0);
  Adam adam({0.05, 0.9, 0.999, 1e-8}, 2, 3);
  for (int i = 0; i < 2000; ++i) adam.step(p, 2.0 * p);
  EXPECT_LT(p.cwiseAbs().maxCoeff(), 1e-2);
}

TEST(Adam, RejectsBadConfigAndShapes) {
  EXPECT_THROW(Adam({0.0, 0.9, 0.999, 1e-8}, 1, 1), ConfigError);
  EXPECT_THROW(Adam({1e-3, 1.0, 0.999, 1e-8}, 1, 1), ConfigError);
  Adam adam({}, 2, 2);
  RowMatrix p = RowMatrix::Zero(2, 2);
  EXPECT_THROW(adam.step(p, RowMatrix::Zero(3, 2)), DataError);
}

TEST(Stats, MeanAndStd) {
  const std::vector<double> xs{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(stats::mean(xs), 2.5);
  EXPECT_NEAR(stats::stddev(xs), std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(stats::stddev(std::vector<double>{7}), 0.0);
}

TEST(Stats, PairedTest) {
  const std::vector<double> a{1, 2, 3, 4, 5}, b{0, 1, 2, 4, 5};
  const auto t = stats::paired_test(a, b);
  EXPECT_DOUBLE_EQ(t.mean_difference, 0.6);
  // d = (1,1,1,0,0): sd = sqrt(0.3)
  EXPECT_NEAR(t.standard_error, std::sqrt(0.3 / 5.0), 1e-15);
  EXPECT_NEAR(t.p_one_sided, 0.5 * std::erfc(t.z / std::sqrt(2.0)), 1e-15);
  EXPECT_LT(t.p_one_sided, 0.05);
  const auto same = stats::paired_test(a, a);
  EXPECT_EQ(same.p_one_sided, 1.0);
  EXPECT_THROW(stats::paired_test(a, std::vector<double>{1}), DataError);
}

// ---- synthetic data ----

TEST(Synth, ShapesKeysAndSplit) {
  SynthConfig cfg;
  cfg.n_classes = 6;
  cfg.samples_per_class = 7;
  cfg.n_train = 2;
  cfg.n_valid = 1;
  const auto data = gen_synthetic(cfg);
  EXPECT_EQ(data.dataset.size(), 42u);
  EXPECT_EQ(data.samples.size(), 42u);
  EXPECT_EQ(data.labels.size(), 6u);
  EXPECT_EQ(data.split.train.size(), 2u);
  EXPECT_EQ(data.split.valid.size(), 1u);
  EXPECT_EQ(data.split.test.size(), 3u);
  EXPECT_TRUE(validate_split(data.dataset, data.split, 1, 1, 6).empty());
  for (std::size_t i = 0; i < data.dataset.size(); ++i) EXPECT_TRUE(data.samples.contains(std::to_string(i)));
  for (const auto& c : data.dataset.classes()) {
    EXPECT_TRUE(data.labels.contains(c));
    EXPECT_EQ(data.dataset.members(c).size(), 7u);
  }
  for (const auto& m : data.means) EXPECT_NEAR(m.norm(), 1.0, 1e-6);
}

TEST(Synth, DeterministicFromSeed) {
  SynthConfig cfg;
  cfg.n_classes = 4;
  const auto a = gen_synthetic(cfg), b = gen_synthetic(cfg);
  cfg.seed = 1;
  const auto c = gen_synthetic(cfg);
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_EQ(a.samples.value(i), b.samples.value(i));
  EXPECT_NE(a.samples.value(0), c.samples.value(0));
}

TEST(Synth, ZeroLabelOffsetGivesTrueMeans) {
  SynthConfig cfg;
  cfg.n_classes = 5;
  cfg.label_sigma = 0.0;
  const auto data = gen_synthetic(cfg);
  for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(data.labels.at(data.dataset.classes()[c]), data.means[c]);

  cfg.label_sigma = 0.1;
  const auto off = gen_synthetic(cfg);
  EXPECT_NE(off.labels.at(off.dataset.classes()[0]), off.means[0]);
}

TEST(Synth, ZeroSigmaCollapsesToMeansAndClassifiesPerfectly) {
  SynthConfig cfg;
  cfg.n_classes = 8;
  cfg.sigma = 0.0;
  cfg.samples_per_class = 6;
  const auto data = gen_synthetic(cfg);
  for (std::size_t c = 0; c < 8; ++c) {
    for (auto i : data.dataset.members(data.dataset.classes()[c])) {
      EXPECT_EQ(data.samples.at(std::to_string(i)), data.means[c]);
    }
  }
  EvalOptions opt;
  opt.sampler = {5, 1, 5, 3};
  opt.episodes = 50;
  for (bool scaler : {false, true}) {
    for (auto ml : {MetaLearnerKind::kPN, MetaLearnerKind::kRRML}) {
      opt.use_scaler = scaler;
      opt.metalearner = ml;
      EXPECT_EQ(evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt).mean, 1.0);
    }
  }
}

TEST(Synth, EmpiricalMeansConverge) {
  // Error of a class's sample mean shrinks like sigma * sqrt(d / n).
  for (std::size_t n : {100u, 1600u}) {
    SynthConfig cfg;
    cfg.n_classes = 3;
    cfg.sigma = 0.5;
    cfg.samples_per_class = n;
    const auto data = gen_synthetic(cfg);
    for (std::size_t c = 0; c < 3; ++c) {
      Vector m = Vector::Zero(cfg.dim);
      for (auto i : data.dataset.members(data.dataset.classes()[c])) m += data.samples.at(std::to_string(i));
      m /= static_cast<double>(n);
      const double expected = cfg.sigma * std::sqrt(static_cast<double>(cfg.dim) / static_cast<double>(n));
      EXPECT_LT((m - data.means[c]).norm(), 3.0 * expected) << "n=" << n;
    }
  }
}

TEST(Synth, RejectsBadConfig) {
  SynthConfig cfg;
  cfg.sigma = -1.0;
  EXPECT_THROW(gen_synthetic(cfg), ConfigError);
  cfg = {};
  cfg.n_train = 15;
  cfg.n_valid = 10;
  EXPECT_THROW(gen_synthetic(cfg), ConfigError);
  cfg = {};
  cfg.dim = 0;
  EXPECT_THROW(gen_synthetic(cfg), ConfigError);
}

TEST(SynthText, CorpusCoversTestLabels) {
  TextSynthConfig cfg;
  cfg.samples_per_class = 10;
  const auto t = gen_synthetic_text(cfg);
  EXPECT_EQ(t.split.train.size(), 5u);
  EXPECT_EQ(t.split.test.size(), 5u);
  EXPECT_EQ(t.dataset.size(), 100u);
  EXPECT_TRUE(validate_split(t.dataset, t.split, 5, 1, 9).empty());
  const PromptTemplate tmpl("This is a [MASK] news: [sentence]");
  const auto vocab = build_vocabulary(t.dataset, t.split.train, tmpl);
  for (const auto& c : t.split.test) EXPECT_NE(vocab.id(c), Vocabulary::kUnk) << c;
  std::istringstream words(t.dataset.sample(0).text);
  std::size_t n = 0;
  for (std::string w; words >> w;) ++n;
  EXPECT_EQ(n, cfg.words_per_sample);
}

// ---- evaluation ----

SyntheticData separable_fixture() {
  SynthConfig cfg;
  cfg.n_classes = 10;
  cfg.dim = 16;
  cfg.sigma = 0.01;
  cfg.samples_per_class = 20;
  return gen_synthetic(cfg);
}

TEST(Evaluate, SeparableClassesScorePerfectly) {
  const auto data = separable_fixture();
  EvalOptions opt;
  opt.sampler = {5, 1, 5, 0};
  opt.episodes = 200;
  for (auto ml : {MetaLearnerKind::kPN, MetaLearnerKind::kRRML}) {
    opt.metalearner = ml;
    const auto m = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
    EXPECT_EQ(m.mean, 1.0);
    EXPECT_EQ(m.count, 200u);
    EXPECT_EQ(m.std, 0.0);
  }
}

TEST(Evaluate, RandomEmbeddingsAreAtChance) {
  // Every sample an independent isotropic Gaussian: class carries no signal.
  SynthConfig cfg;
  cfg.n_classes = 20;
  cfg.mean_scale = 1e-9;
  cfg.sigma = 1.0;
  cfg.label_sigma = 1.0;
  cfg.samples_per_class = 30;
  const auto data = gen_synthetic(cfg);
  EvalOptions opt;
  opt.sampler = {5, 1, 5, 11};
  opt.episodes = 1000;
  opt.use_scaler = false;
  const auto m = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
  const double sigma = std::sqrt(0.2 * 0.8 / (1000.0 * 25.0));
  EXPECT_NEAR(m.mean, 0.2, 3.0 * sigma);
}

TEST(Evaluate, IndependentOfThreadCount) {
  SynthConfig cfg;
  cfg.sigma = 0.4;
  const auto data = gen_synthetic(cfg);
  EvalOptions opt;
  opt.sampler = {5, 2, 3, 5};
  opt.episodes = 300;
  opt.threads = 1;
  const auto a = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
  opt.threads = 7;
  const auto b = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
  EXPECT_EQ(a.accuracies, b.accuracies);
  opt.sampler.seed = 6;
  const auto c = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
  EXPECT_NE(a.accuracies, c.accuracies);
}

TEST(Evaluate, MetricsMeanIsArithmeticMean) {
  SynthConfig cfg;
  cfg.sigma = 0.5;
  const auto data = gen_synthetic(cfg);
  EvalOptions opt;
  opt.sampler = {5, 1, 4, 9};
  opt.episodes = 333;
  const auto m = evaluate(data.dataset, data.split.test, store_embedder(data.samples, data.labels), opt);
  double s = 0.0;
  for (double a : m.accuracies) s += a;
  EXPECT_NEAR(m.mean, s / 333.0, 1e-12);
  EXPECT_GE(m.mean, 0.0);
  EXPECT_LE(m.mean, 1.0);
  EXPECT_EQ(m.count, 333u);
  EXPECT_GE(m.seconds, 0.0);
}

TEST(Evaluate, MissingEmbeddingIsDataError) {
  auto data = separable_fixture();
  EmbeddingStore partial(data.labels.dim());
  for (std::size_t i = 1; i < data.labels.size(); ++i) partial.insert(data.labels.keys()[i], data.labels.value(i));
  EvalOptions opt;
  opt.sampler = {10, 1, 1, 0};
  opt.episodes = 5;
  EXPECT_THROW(evaluate(data.dataset, data.split.test, store_embedder(data.samples, partial), opt), DataError);
  EXPECT_THROW(check_store_coverage(data.dataset, data.split.test, data.samples, partial), DataError);
  EXPECT_NO_THROW(check_store_coverage(data.dataset, data.split.test, data.samples, data.labels));
}

TEST(Evaluate, ScalerIsIdentityOnDegenerateInput) {
  // K identical supports per class and label reps equal to them.
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddedEpisode ep;
    for (std::size_t k = 0; k < 5; ++k) {
      ep.class_names.push_back("c" + std::to_string(k));
      const Vector s = random_vector(rng, 8);
      ep.support_reps.push_back({s, s, s});
      ep.label_reps.push_back(s);
      ep.query_reps.push_back({random_vector(rng, 8), random_vector(rng, 8), random_vector(rng, 8)});
    }
    EvalOptions off, on;
    off.use_scaler = false;
    on.use_scaler = true;
    for (auto ml : {MetaLearnerKind::kPN, MetaLearnerKind::kRRML}) {
      off.metalearner = on.metalearner = ml;
      EXPECT_EQ(episode_accuracy(ep, off), episode_accuracy(ep, on));
    }
    const auto scaled = scale_support_set(ep, ScalerConfig{});
    for (std::size_t k = 0; k < 5; ++k) {
      for (const auto& s : scaled.support_reps[k]) EXPECT_LT((s - ep.label_reps[k]).norm(), 1e-12);
    }
  }
}

// ---- training ----

struct TextFixture {
  Dataset dataset;
  ClassSplit split;
  RunConfig cfg;
};

TextFixture text_fixture(std::size_t epochs) {
  TextSynthConfig tc;
  tc.samples_per_class = 20;
  auto t = gen_synthetic_text(tc);
  RunConfig cfg;
  cfg.epochs = epochs;
  cfg.train_episodes = 10;
  cfg.valid_episodes = 10;
  cfg.test_episodes = 50;
  cfg.backend.dim = 8;
  cfg.optimizer.learning_rate = 1e-2;
  cfg.seed = 3;
  cfg.threads = 2;
  return {std::move(t.dataset), std::move(t.split), cfg};
}

TEST(Train, ZeroEpochsReturnsInitialParams) {
  const auto f = text_fixture(0);
  const auto res = train(f.cfg, f.dataset, f.split);
  const auto init = init_encoder(res.vocab.size(), f.cfg.backend.dim, f.cfg.seed);
  EXPECT_EQ(res.params.table, init.table);
  EXPECT_EQ(res.best_epoch, 0u);
  EXPECT_TRUE(res.log.empty());
}

TEST(Train, DeterministicLogAndParams) {
  auto f = text_fixture(3);
  std::swap(f.split.valid, f.split.test);
  const auto a = train(f.cfg, f.dataset, f.split);
  const auto b = train(f.cfg, f.dataset, f.split);
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.log[i].train_loss, b.log[i].train_loss);
    EXPECT_EQ(a.log[i].train_accuracy, b.log[i].train_accuracy);
    EXPECT_EQ(a.log[i].valid_accuracy, b.log[i].valid_accuracy);
  }
  EXPECT_EQ(a.params.table, b.params.table);
  EXPECT_EQ(a.best_epoch, b.best_epoch);
  EXPECT_GE(a.best_epoch, 1u);
}

TEST(Train, KeepsBestValidationEpoch) {
  auto f = text_fixture(4);
  std::swap(f.split.valid, f.split.test);
  const auto res = train(f.cfg, f.dataset, f.split);
  double best = -1.0;
  std::size_t best_epoch = 0;
  for (const auto& l : res.log) {
    if (l.valid_accuracy > best) {
      best = l.valid_accuracy;
      best_epoch = l.epoch;
    }
  }
  EXPECT_EQ(res.best_epoch, best_epoch);
}

TEST(Train, OneStepDecreasesLossOnFixedBatch) {
  for (LossKind kind : {LossKind::kCE, LossKind::kLG, LossKind::kLGLabel}) {
    auto f = text_fixture(0);
    f.cfg.loss.kind = kind;
    f.cfg.optimizer.learning_rate = 1e-3;
    const PromptTemplate tmpl(f.cfg.backend.prompt_template);
    const auto vocab = build_vocabulary(f.dataset, f.split.train, tmpl);
    const auto corpus = tokenize_corpus(f.dataset, vocab, tmpl);
    auto params = init_encoder(vocab.size(), 16, 1);
    Rng rng(5);
    const auto ep = sample_episode(f.dataset, f.split.train, {5, 2, 3, 0}, rng);
    const auto before = episode_step(params, corpus, ep, f.cfg);
    Adam adam(f.cfg.optimizer, params.table.rows(), params.table.cols());
    adam.step(params.table, before.grad);
    const auto after = episode_step(params, corpus, ep, f.cfg);
    EXPECT_LT(after.loss, before.loss) << to_string(kind);
  }
}

TEST(Train, StepGradientMatchesFiniteDifferences) {
  for (LossKind kind : {LossKind::kCE, LossKind::kLGLabel}) {
    auto f = text_fixture(0);
    f.cfg.loss.kind = kind;
    f.cfg.loss.tau = 0.5;
    const PromptTemplate tmpl(f.cfg.backend.prompt_template);
    const auto vocab = build_vocabulary(f.dataset, f.split.train, tmpl);
    const auto corpus = tokenize_corpus(f.dataset, vocab, tmpl);
    auto params = init_encoder(vocab.size(), 4, 2);
    params.table *= 50.0;
    Rng rng(8);
    const auto ep = sample_episode(f.dataset, f.split.train, {3, 2, 2, 0}, rng);
    const auto step = episode_step(params, corpus, ep, f.cfg);
    std::vector<double> x(params.table.data(), params.table.data() + params.table.size());
    std::vector<double> g(step.grad.data(), step.grad.data() + step.grad.size());
    ScalarFn fn = [&](std::span<const double> xs) {
      EncoderParams p = params;
      std::copy(xs.begin(), xs.end(), p.table.data());
      return episode_step(p, corpus, ep, f.cfg).loss;
    };
    EXPECT_LT(finite_diff_check(fn, x, g, 1e-5), 1e-6) << to_string(kind);
  }
}

TEST(Train, InvalidSplitIsDataError) {
  auto f = text_fixture(1);
  f.split.test.push_back(f.split.train.front());
  EXPECT_THROW(train(f.cfg, f.dataset, f.split), DataError);
  f = text_fixture(1);
  f.cfg.m_query = 100;
  EXPECT_THROW(train(f.cfg, f.dataset, f.split), DataError);
}

TEST(Train, DivergenceIsNumericalError) {
  auto f = text_fixture(1);
  f.cfg.optimizer.learning_rate = 1e300;
  try {
    train(f.cfg, f.dataset, f.split);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(Train, LearnsTheTextFixture) {
  auto f = text_fixture(10);
  f.cfg.train_episodes = 50;
  const auto res = train(f.cfg, f.dataset, f.split);
  EXPECT_LT(res.log.back().train_loss, res.log.front().train_loss);
  const auto corpus = tokenize_corpus(f.dataset, res.vocab, PromptTemplate(f.cfg.backend.prompt_template));
  const auto m = evaluate(f.dataset, f.split.test, encoder_embedder(res.params, corpus),
                          eval_options(f.cfg, 200, Stream::kEval, 0));
  EXPECT_GT(m.mean, 0.5);
}

// ---- ablation ----

TEST(Ablate, TwelveDeterministicRows) {
  auto f = text_fixture(1);
  f.cfg.test_episodes = 20;
  const auto a = ablate(f.cfg, f.dataset, f.split);
  ASSERT_EQ(a.size(), 12u);
  const auto b = ablate(f.cfg, f.dataset, f.split);
  std::size_t em = 0, rrml = 0;
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(a[i].loss, b[i].loss);
    EXPECT_EQ(a[i].metrics.accuracies, b[i].metrics.accuracies);
    EXPECT_EQ(a[i].metrics.count, 20u);
    em += a[i].scaler;
    rrml += a[i].metalearner == MetaLearnerKind::kRRML;
  }
  EXPECT_EQ(em, 6u);
  EXPECT_EQ(rrml, 6u);
  f.cfg.backend.kind = BackendKind::kPrecomputed;
  EXPECT_THROW(ablate(f.cfg, f.dataset, f.split), ConfigError);
}

// ---- CSV ----

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(Csv, MetricsLineCounts) {
  const auto p = temp_path("m3.csv");
  csv::export_metrics(Metrics::from({0.2, 0.4, 1.0}), p.string());
  EXPECT_EQ(line_count(p), 4u);
  csv::export_metrics(Metrics::from({}), p.string());
  EXPECT_EQ(line_count(p), 1u);
  const auto rows = csv::read(p.string());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (csv::Row{"run", "episode", "accuracy"}));
}

TEST(Csv, RoundTripsFullPrecision) {
  Rng rng(12);
  std::vector<double> xs{0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 0.7999999999999999};
  for (int i = 0; i < 200; ++i) xs.push_back(rng.uniform());
  const auto p = temp_path("rt.csv");
  csv::export_metrics(Metrics::from(xs), p.string());
  const auto rows = csv::read(p.string());
  ASSERT_EQ(rows.size(), xs.size() + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    EXPECT_EQ(std::stod(rows[i + 1][2]), xs[i]);
    EXPECT_EQ(rows[i + 1][1], std::to_string(i));
  }
}

TEST(Csv, QuotingRoundTrip) {
  const std::vector<csv::Row> rows{{"plain", "with,comma", "with \"quote\""}, {"multi\nline", "", "x"}};
  const auto p = temp_path("q.csv");
  csv::write_rows(p.string(), rows);
  EXPECT_EQ(csv::read(p.string()), rows);
  EXPECT_EQ(csv::escape("a\"b"), "\"a\"\"b\"");
  EXPECT_EQ(csv::parse("a,b\nc,d\n"), (std::vector<csv::Row>{{"a", "b"}, {"c", "d"}}));
  EXPECT_THROW(csv::parse("\"open"), DataError);
}

TEST(Csv, AblationReport) {
  std::vector<AblationRow> rows;
  for (int i = 0; i < 12; ++i) rows.push_back({LossKind::kLGLabel, true, MetaLearnerKind::kRRML, Metrics::from({0.5, 1.0})});
  const auto p = temp_path("ablate.csv");
  csv::export_ablation(rows, p.string());
  const auto parsed = csv::read(p.string());
  ASSERT_EQ(parsed.size(), 13u);
  EXPECT_EQ(parsed[1][0], "lg+label");
  EXPECT_EQ(parsed[1][1], "em");
  EXPECT_EQ(parsed[1][2], "rrml");
  EXPECT_EQ(std::stod(parsed[1][4]), 0.75);
}

TEST(Csv, UnwritablePath) {
  EXPECT_THROW(csv::export_metrics(Metrics::from({1.0}), "/nonexistent-dir/x/out.csv"), DataError);
}

}  // namespace
}  // namespace lds
