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
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "noteworthy/catalog.hpp"
#include "noteworthy/filter.hpp"
#include "noteworthy/metrics.hpp"
#include "noteworthy/synth.hpp"

namespace noteworthy {
namespace {

TEST(FillToK, HandTrace) {
  std::vector<double> probs(10, 0.0);
  probs[5] = 0.9;
  probs[7] = 0.8;
  probs[1] = 0.2;
  const std::vector<std::size_t> umls{2, 9};
  EXPECT_EQ(fill_to_k(umls, probs, 4), (std::vector<std::size_t>{2, 5, 7, 9}));
  EXPECT_EQ(fill_to_k(umls, probs, 1), (std::vector<std::size_t>{2, 9}));
  EXPECT_EQ(fill_to_k({}, probs, 1), std::vector<std::size_t>{5});
  EXPECT_EQ(fill_to_k(umls, probs, 100).size(), 10u);
}

TEST(FillToK, TiesGoToLowerIndex) {
  const std::vector<double> probs{0.3, 0.5, 0.5, 0.5};
  EXPECT_EQ(fill_to_k({}, probs, 2), (std::vector<std::size_t>{1, 2}));
}

TEST(FillToK, RandomInvariants) {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = rng.index(40);
    std::vector<double> probs(n);
    for (auto& p : probs) p = std::floor(rng.uniform() * 8) / 8;
    std::set<std::size_t> u;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.15)) u.insert(i);
    const std::vector<std::size_t> umls(u.begin(), u.end());
    const std::size_t k = 1 + rng.index(30);
    const auto out = fill_to_k(umls, probs, k);
    EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
    EXPECT_EQ(std::set<std::size_t>(out.begin(), out.end()).size(), out.size());
    EXPECT_GE(out.size(), umls.size());
    EXPECT_LE(out.size(), std::max(k, umls.size()));
    EXPECT_EQ(out.size(), std::max(umls.size(), std::min(k, n)));
    for (auto ix : umls) EXPECT_TRUE(std::binary_search(out.begin(), out.end(), ix));
    // Every added index outranks every skipped non-UMLS index.
    for (auto a : out)
      if (!u.count(a))
        for (std::size_t b = 0; b < n; ++b)
          if (!u.count(b) && !std::binary_search(out.begin(), out.end(), b)) {
            EXPECT_TRUE(probs[a] > probs[b] || (probs[a] == probs[b] && a < b));
          }
  }
}

TEST(Strategy, ParseForms) {
  EXPECT_EQ(parse_strategy("none"), FilterStrategy::none());
  EXPECT_EQ(parse_strategy("umls"), FilterStrategy::umls());
  EXPECT_EQ(parse_strategy("pred:all@0.4"), FilterStrategy::predicted(NoteworthyScope::kAll, 0.4));
  EXPECT_EQ(parse_strategy("union:umls+pred:diagnosis@0.1"),
            FilterStrategy::union_with_umls(NoteworthyScope::kDiagnosis, 0.1));
  EXPECT_EQ(parse_strategy("f2k:umls+pred:ros@K=20"), FilterStrategy::fill_to_k(NoteworthyScope::kRos, 20));
  EXPECT_EQ(parse_strategy("f2k:umls+pred:all"), FilterStrategy::fill_to_k(NoteworthyScope::kAll, 50));
  EXPECT_EQ(parse_strategy("oracle:diagnosis"), FilterStrategy::oracle(NoteworthyScope::kDiagnosis));
  EXPECT_EQ(parse_strategy("DN"), FilterStrategy::predicted(NoteworthyScope::kDiagnosis));
  EXPECT_EQ(parse_strategy("UMLS+AN"), parse_strategy("UMLS-AN"));
  EXPECT_EQ(parse_strategy("UMLS+F2K-DN"), FilterStrategy::fill_to_k(NoteworthyScope::kDiagnosis, 15));
  for (const char* bad : {"", "pred:", "pred:all@2", "pred:all@x", "f2k:umls+pred:all@K=0", "f2k:umls+pred:all@K=1.5",
                          "UMLS+XN", "bogus"})
    EXPECT_THROW(parse_strategy(bad), ConfigError) << bad;
}

TEST(Strategy, RoundTripsThroughString) {
  for (const auto& s : {FilterStrategy::none(), FilterStrategy::umls(), FilterStrategy::predicted(NoteworthyScope::kRos, 0.02),
                        FilterStrategy::union_with_umls(NoteworthyScope::kAll, 0.4),
                        FilterStrategy::fill_to_k(NoteworthyScope::kDiagnosis, 7),
                        FilterStrategy::oracle(NoteworthyScope::kAll)})
    EXPECT_EQ(parse_strategy(to_string(s)), s);
}

TEST(Defaults, ThresholdsAndBudgets) {
  EXPECT_DOUBLE_EQ(default_threshold(NoteworthyScope::kAll), 0.4);
  EXPECT_DOUBLE_EQ(default_threshold(NoteworthyScope::kDiagnosis), 0.1);
  EXPECT_DOUBLE_EQ(default_threshold(NoteworthyScope::kRos), 0.02);
  EXPECT_EQ(default_fill_k(NoteworthyScope::kAll), 50u);
  EXPECT_EQ(default_fill_k(NoteworthyScope::kDiagnosis), 15u);
  EXPECT_EQ(default_fill_k(NoteworthyScope::kRos), 20u);
}

struct Fixture {
  SynthCorpus corpus;
  std::vector<Example> train, test;
  FilterModel model;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture f;
    GenConfig cfg;
    cfg.n_examples = 300;
    cfg.seed = 17;
    f.corpus = generate(cfg);
    f.train.assign(f.corpus.examples.begin(), f.corpus.examples.begin() + 200);
    f.test.assign(f.corpus.examples.begin() + 200, f.corpus.examples.end());
    std::vector<Transcript> ts;
    for (const auto& ex : f.train) ts.push_back(ex.transcript);
    const auto y = all_noteworthy_targets(f.train);
    f.model = train_filter(ts, y, NoteworthyScope::kAll);
    return f;
  }();
  return f;
}

TEST(TrainFilter, HeldOutAuc) {
  const auto& f = fixture();
  EXPECT_DOUBLE_EQ(f.model.threshold, 0.4);
  std::vector<double> scores;
  std::vector<std::uint8_t> truth;
  for (const auto& ex : f.test) {
    const auto p = f.model.probabilities(ex.transcript);
    const auto y = noteworthy_targets(ex.transcript, ex.note);
    scores.insert(scores.end(), p.begin(), p.end());
    truth.insert(truth.end(), y.begin(), y.end());
  }
  EXPECT_GE(*rank_auc(scores, truth), 0.90);
}

TEST(TrainFilter, ThresholdOverrideAndErrors) {
  Transcript t{"a", {{0, Speaker::kPatient, 0, "chest pain"}, {1, Speaker::kPhysician, 10, "okay then"}}};
  std::vector<Transcript> ts{t};
  std::vector<std::vector<std::uint8_t>> y{{1, 0}};
  FilterTrainConfig cfg;
  cfg.threshold = 0.25;
  EXPECT_DOUBLE_EQ(train_filter(ts, y, NoteworthyScope::kAll, cfg).threshold, 0.25);
  cfg.threshold = 1.5;
  EXPECT_THROW(train_filter(ts, y, NoteworthyScope::kAll, cfg), ConfigError);
  std::vector<std::vector<std::uint8_t>> none{{0, 0}};
  EXPECT_THROW(train_filter(ts, none, NoteworthyScope::kAll), TrainError);
  std::vector<std::vector<std::uint8_t>> wrong{{0}};
  EXPECT_THROW(train_filter(ts, wrong, NoteworthyScope::kAll), TrainError);
  std::vector<std::vector<std::uint8_t>> all{{1, 1}};
  const auto degenerate = train_filter(ts, all, NoteworthyScope::kAll);
  EXPECT_TRUE(degenerate.degenerate);
  EXPECT_GE(degenerate.probability(t.utterances[1]), 0.999);
}

TEST(TrainFilter, SpeakerFeature) {
  Transcript t{"a", {{0, Speaker::kPatient, 0, "same words"}, {1, Speaker::kPhysician, 10, "same words"}}};
  std::vector<Transcript> ts{t, t, t};
  std::vector<std::vector<std::uint8_t>> y(3, {1, 0});
  FilterTrainConfig cfg;
  cfg.speaker_feature = true;
  const auto fm = train_filter(ts, y, NoteworthyScope::kAll, cfg);
  EXPECT_GT(fm.probability(t.utterances[0]), fm.probability(t.utterances[1]));
  const auto plain = train_filter(ts, y, NoteworthyScope::kAll);
  EXPECT_DOUBLE_EQ(plain.probability(t.utterances[0]), plain.probability(t.utterances[1]));
}

TEST(ApplyFilter, Invariants) {
  const auto& f = fixture();
  const auto lex = demo_lexicon();
  const auto tl = demo_task_lexicon(Task::kDiagnosis);
  FilterContext ctx{&lex, &tl, &f.model, {}};
  for (const auto& ex : f.test) {
    const auto& t = ex.transcript;
    const auto none = apply_filter(FilterStrategy::none(), ctx, t);
    EXPECT_EQ(none.size(), t.size());
    const auto umls = apply_filter(FilterStrategy::umls(), ctx, t);
    std::vector<std::size_t> previous = none;
    for (double th : {0.0, 0.1, 0.4, 0.7, 1.0}) {
      const auto pred = apply_filter(FilterStrategy::predicted(NoteworthyScope::kAll, th), ctx, t);
      EXPECT_TRUE(std::includes(previous.begin(), previous.end(), pred.begin(), pred.end()));
      previous = pred;
      const auto uni = apply_filter(FilterStrategy::union_with_umls(NoteworthyScope::kAll, th), ctx, t);
      EXPECT_TRUE(std::includes(uni.begin(), uni.end(), pred.begin(), pred.end()));
      EXPECT_TRUE(std::includes(uni.begin(), uni.end(), umls.begin(), umls.end()));
    }
    for (const auto& s : {FilterStrategy::umls(), FilterStrategy::fill_to_k(NoteworthyScope::kAll, 50),
                          FilterStrategy::predicted(NoteworthyScope::kAll)}) {
      const auto out = apply_filter(s, ctx, t);
      EXPECT_TRUE(std::is_sorted(out.begin(), out.end()));
      EXPECT_EQ(std::adjacent_find(out.begin(), out.end()), out.end());
      if (!out.empty()) {
        EXPECT_LT(out.back(), t.size());
      }
    }
  }
}

TEST(ApplyFilter, MissingContext) {
  Transcript t{"a", {{0, Speaker::kPatient, 0, "hi"}}};
  EXPECT_THROW(apply_filter(FilterStrategy::umls(), {}, t), ConfigError);
  EXPECT_THROW(apply_filter(FilterStrategy::predicted(NoteworthyScope::kAll), {}, t), ConfigError);
  EXPECT_THROW(apply_filter(FilterStrategy::oracle(NoteworthyScope::kAll), {}, t), ConfigError);
  const auto& f = fixture();
  FilterContext wrong{nullptr, nullptr, &f.model, {}};
  EXPECT_THROW(apply_filter(FilterStrategy::predicted(NoteworthyScope::kRos), wrong, t), ConfigError);
  FilterContext oracle{nullptr, nullptr, nullptr, [](const Transcript&) { return std::vector<std::size_t>{3, 1, 3}; }};
  EXPECT_EQ(apply_filter(FilterStrategy::oracle(NoteworthyScope::kAll), oracle, t), (std::vector<std::size_t>{1, 3}));
}

TEST(Sweep, BoundaryThresholds) {
  const auto& f = fixture();
  std::vector<Transcript> ts;
  double utterances = 0.0;
  for (const auto& ex : f.test) {
    ts.push_back(ex.transcript);
    utterances += static_cast<double>(ex.transcript.size());
  }
  std::size_t calls = 0;
  const std::vector<double> grid{0.0, 1.1};
  const auto points = threshold_sweep(
      f.model, ts,
      [&](const std::vector<std::vector<std::size_t>>& sel) {
        ++calls;
        double n = 0;
        for (const auto& s : sel) n += static_cast<double>(s.size());
        return std::map<std::string, double>{{"total", n}};
      },
      grid);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_EQ(calls, 2u);
  EXPECT_DOUBLE_EQ(points[0].mean_selected, utterances / static_cast<double>(ts.size()));
  EXPECT_DOUBLE_EQ(points[1].mean_selected, 0.0);
  EXPECT_DOUBLE_EQ(points[1].metrics.at("total"), 0.0);
  const auto table = sweep_table(points);
  EXPECT_EQ(table.substr(0, table.find('\n')), "threshold\tmean_selected\ttotal");
}

TEST(FilterFormat, RoundTrip) {
  const auto& f = fixture();
  const auto back = filter_model_from_json(nlohmann::json::parse(to_json(f.model).dump()));
  const auto& t = f.test.front().transcript;
  EXPECT_EQ(back.probabilities(t), f.model.probabilities(t));
  EXPECT_EQ(back.threshold, f.model.threshold);
}

}  // namespace
}  // namespace noteworthy
