/*
 * Copyright 2026 The Noteworthy Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "noteworthy/catalog.hpp"
#include "noteworthy/metrics.hpp"
#include "noteworthy/pipeline.hpp"
#include "noteworthy/synth.hpp"
#include "oracles.hpp"

namespace noteworthy {
namespace {

Transcript three() {
  return {"t", {{0, Speaker::kPhysician, 0, "How are you?"},
                {1, Speaker::kPatient, 10, "Chest pain, again."},
                {2, Speaker::kPhysician, 20, "Since when"}}};
}

TEST(Assemble, SelectedUtterancesInOrder) {
  const auto t = three();
  const std::vector<std::size_t> sel{2, 0};
  EXPECT_EQ(assemble_filtered_text(t, sel), (TokenSeq{"how", "are", "you", "since", "when"}));
  EXPECT_TRUE(assemble_filtered_text(t, std::vector<std::size_t>{}).empty());
  const std::vector<std::size_t> all{0, 1, 2};
  TokenSeq full;
  for (const auto& u : t.utterances)
    for (auto& tok : tokenize(u.text)) full.push_back(tok);
  EXPECT_EQ(assemble_filtered_text(t, all), full);
  EXPECT_THROW(assemble_filtered_text(t, std::vector<std::size_t>{3}), ValidationError);
}

TEST(PlanChunks, Arithmetic) {
  const auto c = plan_chunks(3000, 512, 2040);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c[0].length, 512u);
  EXPECT_EQ(c[1].length, 512u);
  EXPECT_EQ(c[2].length, 512u);
  EXPECT_EQ(c[3].length, 504u);
  EXPECT_EQ(c[3].begin, 1536u);
  EXPECT_EQ(plan_chunks(1024, 512, 2040).size(), 2u);
  EXPECT_TRUE(plan_chunks(0, 512, 2040).empty());
  EXPECT_THROW(plan_chunks(10, 0, 10), ConfigError);
  EXPECT_THROW(plan_chunks(10, 8, 4), ConfigError);
}

TokenSeq tokens(std::size_t n, std::size_t period = 97) {
  TokenSeq out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("tok" + std::to_string(i % period));
  return out;
}

TEST(ChunkAndPool, SingleChunkIsExact) {
  const HashedEmbeddingEncoder enc(16, 3);
  const auto t = tokens(100);
  EXPECT_EQ(chunk_and_pool(t, enc, 512, 2040), enc.encode(t));
}

TEST(ChunkAndPool, IdenticalChunks) {
  const HashedEmbeddingEncoder enc(8);
  const auto half = tokens(4, 4);
  TokenSeq twice = half;
  twice.insert(twice.end(), half.begin(), half.end());
  const auto pooled = chunk_and_pool(twice, enc, 4, 2040);
  const auto single = enc.encode(half);
  for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(pooled[j], single[j], 1e-15);
}

TEST(ChunkAndPool, MeanOfChunkVectors) {
  const HashedEmbeddingEncoder enc(12, 1);
  const auto t = tokens(3000);
  const auto pooled = chunk_and_pool(t, enc, 512, 2040);
  std::vector<double> mean(12, 0.0);
  for (std::size_t start : {0u, 512u, 1024u, 1536u}) {
    const std::size_t len = start == 1536 ? 504 : 512;
    const auto v = enc.encode(std::span<const std::string>(t).subspan(start, len));
    for (std::size_t j = 0; j < 12; ++j) mean[j] += v[j] / 4.0;
  }
  for (std::size_t j = 0; j < 12; ++j) EXPECT_NEAR(pooled[j], mean[j], 1e-12);
  EXPECT_EQ(chunk_and_pool(TokenSeq{}, enc, 512, 2040), std::vector<double>(12, 0.0));
}

class CountingEncoder : public SequenceEncoder {
 public:
  std::size_t dim() const override { return 1; }
  std::vector<double> encode(std::span<const std::string> t) const override {
    lengths.push_back(t.size());
    if (fail_on && lengths.size() == *fail_on + 1) throw std::runtime_error("boom");
    return {static_cast<double>(t.size())};
  }
  mutable std::vector<std::size_t> lengths;
  std::optional<std::size_t> fail_on;
};

TEST(ChunkAndPool, NoTrailingEmptyChunkAndErrorsCarryIndex) {
  CountingEncoder enc;
  chunk_and_pool(tokens(1024), enc, 512, 2040);
  EXPECT_EQ(enc.lengths, (std::vector<std::size_t>{512, 512}));
  CountingEncoder failing;
  failing.fail_on = 2;
  try {
    chunk_and_pool(tokens(3000), failing, 512, 2040);
    FAIL();
  } catch (const EncoderError& e) {
    EXPECT_EQ(e.chunk(), 2u);
    EXPECT_EQ(e.exit_code(), 3);
  }
}

TEST(InputAgnostic, MicroF1Prefix) {
  const auto dx = space_from_stats(Task::kDiagnosis, reference_diagnosis_prevalence());
  const auto prefix = micro_f1_optimal_prefix(dx.train_prevalence);
  std::vector<std::string> names;
  for (auto l : prefix) names.push_back(dx.labels[l]);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()),
            (std::set<std::string>{"atrial fibrillation", "hypertension", "diabetes"}));
  const auto ros = space_from_stats(Task::kRos, reference_ros_prevalence());
  EXPECT_EQ(micro_f1_optimal_prefix(ros.train_prevalence).size(), 2u);
}

// Score of each predictor against a matching test corpus.
double agnostic_metric(const std::vector<LabelStat>& stats, Task task, AgnosticMetric metric, Rng& rng) {
  const auto space = space_from_stats(task, stats);
  const auto truth = oracle::truth_with_counts(rng, space, space.train_prevalence, kReferenceTestSize);
  const auto s = input_agnostic_predict(space, metric, truth.example_ids);
  return evaluate(s, truth).aggregate.at(std::string(to_string(metric)));
}

TEST(InputAgnostic, ReferenceRows) {
  Rng rng(1);
  const auto& dx = reference_diagnosis_prevalence();
  const auto& ros = reference_ros_prevalence();
  EXPECT_NEAR(agnostic_metric(dx, Task::kDiagnosis, AgnosticMetric::kAccuracy, rng), 0.9189, 5e-4);
  EXPECT_NEAR(agnostic_metric(ros, Task::kRos, AgnosticMetric::kAccuracy, rng), 0.8677, 5e-4);
  EXPECT_NEAR(agnostic_metric(dx, Task::kDiagnosis, AgnosticMetric::kMacroF1, rng), 0.1414, 5e-4);
  EXPECT_NEAR(agnostic_metric(ros, Task::kRos, AgnosticMetric::kMacroF1, rng), 0.2235, 5e-4);
  EXPECT_NEAR(agnostic_metric(dx, Task::kDiagnosis, AgnosticMetric::kMicroF1, rng), 0.3109, 5e-4);
  EXPECT_NEAR(agnostic_metric(ros, Task::kRos, AgnosticMetric::kMicroF1, rng), 0.3453, 5e-4);
  EXPECT_DOUBLE_EQ(agnostic_metric(dx, Task::kDiagnosis, AgnosticMetric::kMacroAuc, rng), 0.5);
  EXPECT_DOUBLE_EQ(agnostic_metric(ros, Task::kRos, AgnosticMetric::kMacroAuc, rng), 0.5);
}

TEST(InputAgnostic, AccuracyIsMeanMajority) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    auto space = oracle::space_of(1 + rng.index(8));
    for (auto& p : space.train_prevalence) p = static_cast<double>(rng.index(101)) / 100.0;
    const auto truth = oracle::truth_with_counts(rng, space, space.train_prevalence, 100);
    const auto s = input_agnostic_predict(space, AgnosticMetric::kAccuracy, truth.example_ids);
    double expected = 0.0;
    for (double p : space.train_prevalence) expected += std::max(p, 1.0 - p);
    expected /= static_cast<double>(space.size());
    EXPECT_NEAR(evaluate(s, truth).aggregate.at("accuracy"), expected, 1e-12);
  }
}

TEST(InputAgnostic, PrevalenceTruthMatchesRandomPlacement) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto space = oracle::space_of(1 + rng.index(10));
    const std::size_t n = 20 + rng.index(200);
    for (auto& p : space.train_prevalence) p = static_cast<double>(rng.index(n + 1)) / static_cast<double>(n);
    auto ranking = space;
    for (auto& p : ranking.train_prevalence) p = rng.uniform();
    const auto truth = oracle::truth_with_counts(rng, space, space.train_prevalence, n);
    for (auto m : {AgnosticMetric::kAccuracy, AgnosticMetric::kMacroF1, AgnosticMetric::kMicroF1,
                   AgnosticMetric::kMacroAuc, AgnosticMetric::kMicroAuc, AgnosticMetric::kPrecisionAt1}) {
      auto s = input_agnostic_predict(ranking, m, truth.example_ids);
      s.space = space;
      const double expected = evaluate(s, truth).aggregate.at(std::string(to_string(m)));
      EXPECT_NEAR(input_agnostic_score(space, ranking, m, n), expected, 1e-12) << to_string(m);
    }
  }
  auto other = oracle::space_of(3);
  other.labels[0] = "elsewhere";
  EXPECT_THROW(input_agnostic_score(oracle::space_of(3), other, AgnosticMetric::kAccuracy, 10), ValidationError);
}

TEST(InputAgnostic, MetricNames) {
  for (auto m : {AgnosticMetric::kAccuracy, AgnosticMetric::kMacroF1, AgnosticMetric::kMicroF1,
                 AgnosticMetric::kMacroAuc, AgnosticMetric::kMicroAuc, AgnosticMetric::kPrecisionAt1})
    EXPECT_EQ(parse_agnostic_metric(to_string(m)), m);
  EXPECT_THROW(parse_agnostic_metric("recall"), ConfigError);
}

struct Data {
  SynthCorpus corpus;
  std::vector<Transcript> train, test;
};

const Data& data() {
  static const Data d = [] {
    Data d;
    GenConfig cfg;
    cfg.n_examples = 160;
    cfg.seed = 23;
    d.corpus = generate(cfg);
    const auto ts = d.corpus.transcripts();
    d.train.assign(ts.begin(), ts.begin() + 120);
    d.test.assign(ts.begin() + 120, ts.end());
    return d;
  }();
  return d;
}

TEST(Pipeline, NoneEqualsDirectTraining) {
  const auto& d = data();
  PipelineConfig cfg;
  cfg.task = Task::kRos;
  const auto models = train_pipeline(cfg, d.train, d.corpus.ros);
  const auto scores = run_pipeline(cfg, models, d.test);

  auto doc = [](const Transcript& t) {
    Document out;
    for (const auto& u : t.utterances) out.push_back(tokenize(u.text));
    return out;
  };
  std::vector<Document> train_docs;
  for (const auto& t : d.train) train_docs.push_back(doc(t));
  const auto vocab = fit_vocabulary(train_docs, FitOptions{kTranscriptMinDf, true});
  std::vector<SparseVector> x;
  for (const auto& dd : train_docs) x.push_back(tfidf_transform(vocab, dd));
  std::vector<std::string> ids;
  for (const auto& t : d.train) ids.push_back(t.id);
  const auto direct = train_ovr(x, select_rows(d.corpus.ros, ids), vocab.size());
  for (std::size_t i = 0; i < d.test.size(); ++i) {
    const auto xi = tfidf_transform(vocab, doc(d.test[i]));
    for (std::size_t l = 0; l < scores.cols(); ++l) EXPECT_EQ(scores.at(i, l), direct.predict(l, xi));
  }
}

TEST(Pipeline, BackendsProduceValidScores) {
  const auto& d = data();
  for (auto backend : {PipelineBackend::kLogistic, PipelineBackend::kNaiveBayes, PipelineBackend::kEncoder}) {
    PipelineConfig cfg;
    cfg.backend = backend;
    cfg.jobs = 2;
    const auto models = train_pipeline(cfg, d.train, d.corpus.diagnosis);
    const auto s = run_pipeline(cfg, models, d.test);
    EXPECT_NO_THROW(validate(s)) << to_string(backend);
    EXPECT_EQ(s.rows(), d.test.size());
    const auto back = trained_pipeline_from_json(nlohmann::json::parse(to_json(models).dump()));
    EXPECT_EQ(run_pipeline(cfg, back, d.test).probs, s.probs);
  }
}

TEST(Pipeline, EmptySelectionScoresWithBias) {
  const auto& d = data();
  PipelineConfig cfg;
  cfg.strategy = FilterStrategy::oracle(NoteworthyScope::kAll);
  FilterContext ctx;
  ctx.oracle = [](const Transcript& t) { return t.id == "synth-000000" ? std::vector<std::size_t>{0, 1, 2} : std::vector<std::size_t>{}; };
  const auto models = train_pipeline(cfg, d.train, d.corpus.diagnosis, ctx);
  const auto s = run_pipeline(cfg, models, d.test, ctx);
  for (std::size_t l = 0; l < s.cols(); ++l)
    EXPECT_DOUBLE_EQ(s.at(0, l), sigmoid(models.classifier.logistic[l].bias));
}

TEST(Pipeline, MismatchesAreConfigErrors) {
  const auto& d = data();
  PipelineConfig cfg;
  auto models = train_pipeline(cfg, d.train, d.corpus.diagnosis);
  PipelineConfig other = cfg;
  other.backend = PipelineBackend::kNaiveBayes;
  EXPECT_THROW(run_pipeline(other, models, d.test), ConfigError);
  models.vocabulary_hash ^= 1;
  EXPECT_THROW(run_pipeline(cfg, models, d.test), ConfigError);
  PipelineConfig ros = cfg;
  ros.task = Task::kRos;
  EXPECT_THROW(train_pipeline(ros, d.train, d.corpus.diagnosis), ConfigError);
  auto j = to_json(train_pipeline(cfg, d.train, d.corpus.diagnosis));
  j["classifier"]["vocabulary_hash"] = 12345;
  EXPECT_THROW(trained_pipeline_from_json(j), ConfigError);
  PipelineConfig bad;
  bad.encoder.chunk_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = PipelineConfig{};
  bad.encoder.token_cap = 10;
  bad.encoder.chunk_size = 20;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Pipeline, ConfigJsonRoundTrip) {
  PipelineConfig cfg;
  cfg.task = Task::kRos;
  cfg.strategy = FilterStrategy::fill_to_k(NoteworthyScope::kRos, 9);
  cfg.backend = PipelineBackend::kEncoder;
  cfg.reg_c = 0.25;
  cfg.encoder.chunk_size = 128;
  const auto back = pipeline_config_from_json(to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
  EXPECT_THROW(pipeline_config_from_json({{"backend", "svm"}}), ConfigError);
}

TEST(Pipeline, SelectRegC) {
  const auto& d = data();
  PipelineConfig cfg;
  const std::vector<double> grid{0.1, 1.0, 10.0};
  const auto train = std::span<const Transcript>(d.train).first(90);
  const auto val = std::span<const Transcript>(d.train).subspan(90);
  const double c = select_reg_c(cfg, train, val, d.corpus.diagnosis, {}, grid);
  EXPECT_NE(std::find(grid.begin(), grid.end(), c), grid.end());
}

}  // namespace
}  // namespace noteworthy
