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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit status
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "noteworthy.hpp"
#include "oracles.hpp"

namespace {

using namespace noteworthy;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

void check_near(Outcome& o, const std::string& name, double got, double want, double tol) {
  const bool ok = std::abs(got - want) <= tol;
  o.require(ok, name + " " + fmt(got) + " vs " + fmt(want));
  if (ok) o.detail += (o.detail.empty() ? "" : ", ") + name + " " + fmt(got);
}

// ---------------------------------------------------------------------------
// 1, 2: input-agnostic rows from prevalence vectors

struct AgnosticTargets {
  double accuracy, macro_f1, macro_auc, micro_f1, p_at_1;
};

Outcome input_agnostic(Task task, const std::vector<LabelStat>& test_prevalence,
                       const std::vector<LabelStat>& train_frequency, const std::string& expected_top,
                       AgnosticTargets want) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  const auto space = space_from_stats(task, test_prevalence);
  const auto truth = oracle::truth_with_counts(rng, space, space.train_prevalence, kReferenceTestSize);
  const auto metric = [&](const LabelSpace& s, AgnosticMetric m) {
    return evaluate(input_agnostic_predict(s, m, truth.example_ids), truth).aggregate.at(std::string(to_string(m)));
  };
  check_near(o, "accuracy", metric(space, AgnosticMetric::kAccuracy), want.accuracy, 5e-4);
  check_near(o, "macro-F1", metric(space, AgnosticMetric::kMacroF1), want.macro_f1, 5e-4);
  check_near(o, "macro-AUC", metric(space, AgnosticMetric::kMacroAuc), want.macro_auc, 5e-4);
  check_near(o, "micro-F1", metric(space, AgnosticMetric::kMicroF1), want.micro_f1, 5e-4);

  auto ranked = with_prevalence(space, train_frequency);
  const double total = static_cast<double>(kReferenceTrainSize + kReferenceValidationSize);
  for (auto& p : ranked.train_prevalence) p /= total;
  const auto scores = input_agnostic_predict(ranked, AgnosticMetric::kPrecisionAt1, truth.example_ids);
  const auto top = noteworthy::top_label(scores.row(0));
  o.require(space.labels[top] == expected_top, "top-ranked label is " + space.labels[top]);
  check_near(o, "P@1", precision_at_1(scores, truth).p_at_1, want.p_at_1, 5e-4);

  const double elapsed = seconds_since(start);
  o.require(elapsed < 1.0, "runtime " + fmt(elapsed, 2) + " s");
  o.detail += " (" + fmt(elapsed, 3) + " s)";
  return o;
}

Outcome criterion1() {
  return input_agnostic(Task::kDiagnosis, reference_diagnosis_prevalence(), reference_diagnosis_frequency(),
                        "hypertension", {0.9189, 0.1414, 0.5, 0.3109, 0.2027});
}

Outcome criterion2() {
  return input_agnostic(Task::kRos, reference_ros_prevalence(), reference_ros_frequency(), "cardiovascular",
                        {0.8677, 0.2235, 0.5, 0.3453, 0.3040});
}

// ---------------------------------------------------------------------------
// 3: input-agnostic micro-AUC on a generated corpus

Outcome criterion3() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  GenConfig cfg;
  cfg.n_examples = 5000;
  cfg.seed = 3;
  const auto corpus = generate(cfg);
  const double total = static_cast<double>(kReferenceTrainSize + kReferenceValidationSize);
  struct Row {
    Task task;
    const std::vector<LabelStat>* frequency;
    double want;
  };
  for (const Row& r : {Row{Task::kDiagnosis, &reference_diagnosis_frequency(), 0.7434},
                       Row{Task::kRos, &reference_ros_frequency(), 0.7024}}) {
    const auto& truth = corpus.labels(r.task);
    auto space = with_prevalence(truth.space, *r.frequency);
    for (auto& p : space.train_prevalence) p /= total;
    auto scores = input_agnostic_predict(space, AgnosticMetric::kMicroAuc, truth.example_ids);
    scores.space = truth.space;
    check_near(o, std::string(to_string(r.task)) + " micro-AUC", auc_scores(scores, truth).micro_auc, r.want, 0.02);

    const std::vector<std::string> sub(truth.example_ids.begin(), truth.example_ids.begin() + 200);
    const auto sub_truth = select_rows(truth, sub);
    ScoreMatrix sub_scores{sub, scores.space, {scores.probs.begin(), scores.probs.begin() + 200 * scores.cols()}};
    const double diff = std::abs(auc_scores(sub_scores, sub_truth).micro_auc - oracle::micro_auc(sub_scores, sub_truth));
    o.require(diff <= 1e-12, "pairwise oracle differs by " + sci(diff));
  }
  const double elapsed = seconds_since(start);
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed, 2) + " s");
  o.detail += " (" + fmt(elapsed, 2) + " s)";
  return o;
}

// ---------------------------------------------------------------------------
// 4: metric implementations against naive oracles

Outcome criterion4() {
  Outcome o;
  Rng rng(4);
  double worst = 0.0;
  std::size_t cp_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto space = oracle::space_of(1 + rng.index(8));
    const std::size_t n = 1 + rng.index(30);
    const auto scores = oracle::random_scores(rng, space, n);
    const auto truth = oracle::random_truth(rng, space, n);
    const auto pred = binarize(scores);
    const auto f1 = f1_scores(pred, truth);
    const auto auc = auc_scores(scores, truth);
    const auto p1 = precision_at_1(scores, truth);
    const auto cp = oracle::cp_at_1(scores, truth);
    const std::vector<std::pair<double, double>> pairs{
        {accuracy(pred, truth), oracle::accuracy(pred, truth)}, {f1.macro_f1, oracle::macro_f1(pred, truth)},
        {f1.micro_f1, oracle::micro_f1(pred, truth)},           {auc.macro_auc, oracle::macro_auc(scores, truth)},
        {auc.micro_auc, oracle::micro_auc(scores, truth)},      {p1.p_at_1, oracle::p_at_1(scores, truth)}};
    for (const auto& [a, b] : pairs) worst = std::max(worst, std::abs(a - b));
    for (std::size_t l = 0; l < space.size(); ++l) worst = std::max(worst, std::abs(p1.contribution[l] - cp[l]));
    const double sum = std::accumulate(p1.contribution.begin(), p1.contribution.end(), 0.0);
    if (p1.p_at_1 > 0.0) {
      ++cp_checked;
      o.require(std::abs(sum - 1.0) <= 1e-9, "CP@1 sums to " + fmt(sum, 12));
    }
  }
  o.require(worst <= 1e-12, "max deviation " + sci(worst));
  o.detail = "max deviation " + sci(worst) + ", CP@1 sum checked on " + std::to_string(cp_checked) + " instances" +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// ---------------------------------------------------------------------------
// 5: logistic trainer against an independent optimizer

Outcome criterion5() {
  Outcome o;
  Rng rng(5);
  double worst_gap = 0.0, worst_fd = 0.0;
  for (int problem = 0; problem < 50; ++problem) {
    const std::size_t n = problem == 0 ? 200 : 20 + rng.index(181);
    const std::size_t d = problem == 0 ? 50 : 2 + rng.index(49);
    const auto pr = oracle::random_problem(rng, n, d);
    const auto x = pr.sparse();
    LogisticOptions opts;
    opts.reg_c = pr.c;
    const auto m = train_logistic(x, pr.y, d, opts);
    auto p = m.weights;
    p.push_back(m.bias);
    const auto ref = oracle::gradient_descent(pr);
    worst_gap = std::max(worst_gap, std::abs(pr.objective(p) - pr.objective(ref)));

    LogisticObjective obj(x, pr.y, pr.c, d);
    for (int point = 0; point < 20; ++point) {
      std::vector<double> q(d + 1);
      for (auto& v : q) v = 4.0 * rng.uniform() - 2.0;
      std::vector<double> g(d + 1);
      obj.value_and_gradient(q, g);
      for (std::size_t j = 0; j <= d; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(q[j]));
        auto plus = q, minus = q;
        plus[j] += h;
        minus[j] -= h;
        const double fd = (obj.value(plus) - obj.value(minus)) / (plus[j] - minus[j]);
        worst_fd = std::max(worst_fd, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
      }
    }
  }
  o.require(worst_gap <= 1e-4, "objective gap " + sci(worst_gap));
  o.require(worst_fd <= 1e-5, "finite-difference error " + sci(worst_fd));
  o.detail = "max objective gap " + sci(worst_gap) + ", max gradient relative error " + sci(worst_fd) +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// ---------------------------------------------------------------------------
// 6: filtering pipeline properties

std::vector<Transcript> transcripts_of(const std::vector<Example>& v) {
  std::vector<Transcript> out;
  for (const auto& e : v) out.push_back(e.transcript);
  return out;
}

Outcome criterion6() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  GenConfig cfg;
  cfg.n_examples = 1000;
  cfg.seed = 6;
  const auto corpus = generate(cfg);
  std::vector<std::string> ids;
  for (const auto& e : corpus.examples) ids.push_back(e.transcript.id);
  const auto split = split_ids(ids, 6, {0.15, 0.3});
  const auto train = subset(corpus.examples, split.train);
  const auto test = subset(corpus.examples, split.test);
  const auto train_t = transcripts_of(train), test_t = transcripts_of(test);
  const auto val_t = transcripts_of(subset(corpus.examples, split.validation));
  const std::vector<double> grid{0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0};

  // (a) oracle filtering vs unfiltered, (d) none vs direct features
  for (Task task : {Task::kDiagnosis, Task::kRos}) {
    const auto& labels = corpus.labels(task);
    std::map<std::string, std::vector<std::size_t>> truth_sel;
    for (const auto& r : corpus.oracle)
      truth_sel[r.id] = task == Task::kDiagnosis ? r.diagnosis_noteworthy : r.ros_noteworthy;
    FilterContext ctx;
    ctx.oracle = [&](const Transcript& t) { return truth_sel.at(t.id); };
    const auto scope = task == Task::kDiagnosis ? NoteworthyScope::kDiagnosis : NoteworthyScope::kRos;
    std::map<std::string, double> f1;
    std::string tuned;
    for (const auto& strategy : {FilterStrategy::none(), FilterStrategy::oracle(scope)}) {
      PipelineConfig pc;
      pc.task = task;
      pc.strategy = strategy;
      pc.reg_c = select_reg_c(pc, train_t, val_t, labels, ctx, grid);
      const auto models = train_pipeline(pc, train_t, labels, ctx);
      f1[to_string(strategy)] = evaluate(run_pipeline(pc, models, test_t, ctx), labels).aggregate.at("micro_f1");
      tuned += (tuned.empty() ? "C=" : "/") + fmt(pc.reg_c, 1);
    }
    const double none = f1.at("none"), oracle_f1 = f1.at("oracle:" + std::string(to_string(scope)));
    o.require(oracle_f1 >= none, std::string(to_string(task)) + " oracle micro-F1 below unfiltered");
    o.detail += std::string(o.detail.empty() ? "" : ", ") + "(a) " + std::string(to_string(task)) + " micro-F1 oracle " +
                fmt(oracle_f1) + " vs none " + fmt(none) + " (" + tuned + ")";

    PipelineConfig plain;
    plain.task = task;
    const auto unfiltered = run_pipeline(plain, train_pipeline(plain, train_t, labels, ctx), test_t, ctx);

    auto document = [](const Transcript& t) {
      Document d;
      for (const auto& u : t.utterances) d.push_back(tokenize(u.text));
      return d;
    };
    std::vector<Document> docs;
    for (const auto& t : train_t) docs.push_back(document(t));
    const auto vocab = fit_vocabulary(docs, FitOptions{kTranscriptMinDf, true});
    std::vector<SparseVector> x;
    for (const auto& d : docs) x.push_back(tfidf_transform(vocab, d));
    const auto direct = train_ovr(x, select_rows(labels, split.train), vocab.size());
    std::size_t differing = 0;
    for (std::size_t i = 0; i < test_t.size(); ++i) {
      const auto xi = tfidf_transform(vocab, document(test_t[i]));
      for (std::size_t l = 0; l < unfiltered.cols(); ++l) differing += unfiltered.at(i, l) != direct.predict(l, xi);
    }
    o.require(differing == 0, "(d) " + std::to_string(differing) + " scores differ from direct training");
  }
  o.detail += ", (d) none bit-identical";

  // (b) learned all-noteworthy filter
  const auto fm = train_filter(train_t, all_noteworthy_targets(train), NoteworthyScope::kAll);
  std::vector<double> scores;
  std::vector<std::uint8_t> truth;
  for (const auto& ex : test) {
    const auto p = fm.probabilities(ex.transcript);
    const auto y = noteworthy_targets(ex.transcript, ex.note);
    scores.insert(scores.end(), p.begin(), p.end());
    truth.insert(truth.end(), y.begin(), y.end());
  }
  const double auc = rank_auc(scores, truth).value_or(0.0);
  o.require(auc >= 0.90, "(b) filter AUC " + fmt(auc));
  o.detail += ", (b) filter AUC " + fmt(auc);

  // (c) fill_to_k invariants
  Rng rng(66);
  std::size_t violations = 0;
  for (int call = 0; call < 10000; ++call) {
    const std::size_t n = rng.index(60);
    std::vector<double> probs(n);
    for (auto& p : probs) p = rng.bernoulli(0.5) ? std::floor(rng.uniform() * 6.0) / 6.0 : rng.uniform();
    std::vector<std::size_t> umls;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.bernoulli(0.2)) umls.push_back(i);
    const std::size_t k = 1 + rng.index(40);
    const auto out = fill_to_k(umls, probs, k);
    const std::set<std::size_t> chosen(out.begin(), out.end());
    bool ok = std::is_sorted(out.begin(), out.end()) && chosen.size() == out.size() &&
              out.size() >= umls.size() && out.size() <= std::max(k, umls.size()) &&
              out.size() == std::max(umls.size(), std::min(k, n)) && (out.empty() || out.back() < n);
    for (auto u : umls) ok = ok && chosen.count(u);
    const std::set<std::size_t> u(umls.begin(), umls.end());
    for (auto a : out) {
      if (u.count(a)) continue;
      for (std::size_t b = 0; b < n && ok; ++b)
        if (!chosen.count(b)) ok = probs[a] > probs[b] || (probs[a] == probs[b] && a < b);
    }
    violations += ok ? 0 : 1;
  }
  o.require(violations == 0, "(c) " + std::to_string(violations) + " fill_to_k violations");
  o.detail += ", (c) 10000 fill_to_k calls, " + std::to_string(violations) + " violations";

  const double elapsed = seconds_since(start);
  o.require(elapsed < 300.0, "runtime " + fmt(elapsed, 1) + " s");
  o.detail += " (" + fmt(elapsed, 1) + " s)";
  return o;
}

// ---------------------------------------------------------------------------
// 7: entity baseline against planted mentions

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts entity_counts(const SynthCorpus& c, Task task, const ConceptLexicon& lex) {
  const auto& truth = c.labels(task);
  const auto tl = demo_task_lexicon(task).restricted_to(truth.space);
  Counts k;
  for (std::size_t i = 0; i < c.examples.size(); ++i) {
    const auto y = entity_baseline_predict(lex, tl, c.examples[i].transcript, truth.space);
    for (std::size_t l = 0; l < y.size(); ++l) {
      k.tp += y[l] && truth.at(i, l);
      k.fp += y[l] && !truth.at(i, l);
      k.fn += !y[l] && truth.at(i, l);
    }
  }
  return k;
}

Outcome criterion7() {
  Outcome o;
  GenConfig cfg;
  cfg.n_examples = 500;
  cfg.seed = 7;
  cfg.explicit_mention_prob = 1.0;
  cfg.paraphrase_rate = 0.0;
  cfg.distractor_rate = 0.0;
  cfg.history_distractor_rate = 0.0;
  cfg.denial_rate = 0.0;
  const auto clean = generate(cfg);
  cfg.paraphrase_rate = 1.0;
  const auto paraphrased = generate(cfg);
  const auto full = demo_lexicon(true);
  const auto canonical = demo_lexicon(false);
  for (Task task : {Task::kDiagnosis, Task::kRos}) {
    const std::string name(to_string(task));
    const auto k = entity_counts(clean, task, full);
    const double p = k.tp + k.fp ? static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fp) : 0.0;
    const double r = k.tp + k.fn ? static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fn) : 0.0;
    o.require(p == 1.0 && r == 1.0, name + " P " + fmt(p) + " R " + fmt(r));
    const auto neg = entity_counts(paraphrased, task, canonical);
    const double rn = neg.tp + neg.fn ? static_cast<double>(neg.tp) / static_cast<double>(neg.tp + neg.fn) : 0.0;
    o.require(neg.tp + neg.fn > 0 && rn == 0.0, name + " control recall " + fmt(rn));
    o.detail += std::string(o.detail.empty() ? "" : ", ") + name + " P " + fmt(p) + " R " + fmt(r) +
                " control R " + fmt(rn);
  }
  return o;
}

// ---------------------------------------------------------------------------
// 8: chunk adapter

Outcome criterion8() {
  Outcome o;
  TokenSeq tokens;
  for (int i = 0; i < 3000; ++i) tokens.push_back("w" + std::to_string(i % 211));
  const auto chunks = plan_chunks(tokens.size(), 512, 2040);
  std::vector<std::size_t> lengths;
  for (const auto& c : chunks) lengths.push_back(c.length);
  o.require(lengths == std::vector<std::size_t>{512, 512, 512, 504}, "unexpected chunk sizes");
  const HashedEmbeddingEncoder enc(32, 8);
  const auto pooled = chunk_and_pool(tokens, enc, 512, 2040);
  std::vector<double> mean(enc.dim(), 0.0);
  const std::vector<std::pair<std::size_t, std::size_t>> by_hand{{0, 512}, {512, 512}, {1024, 512}, {1536, 504}};
  for (const auto& [begin, length] : by_hand) {
    const auto v = enc.encode(std::span<const std::string>(tokens).subspan(begin, length));
    for (std::size_t j = 0; j < v.size(); ++j) mean[j] += v[j];
  }
  double worst = 0.0;
  for (std::size_t j = 0; j < mean.size(); ++j) worst = std::max(worst, std::abs(pooled[j] - mean[j] / 4.0));
  o.require(worst <= 1e-12, "pooled mean differs by " + sci(worst));
  const std::span<const std::string> single(tokens.data(), 300);
  o.require(chunk_and_pool(single, enc, 512, 2040) == enc.encode(single), "single chunk not exact");
  o.detail = "chunks 512,512,512,504; pooled deviation " + sci(worst) + "; single chunk exact" +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// ---------------------------------------------------------------------------
// 9: threshold sweep shape

Outcome criterion9() {
  Outcome o;
  GenConfig cfg;
  cfg.n_examples = 1000;
  cfg.seed = 11;
  const auto corpus = generate(cfg);
  std::vector<std::string> ids;
  for (const auto& e : corpus.examples) ids.push_back(e.transcript.id);
  const auto split = split_ids(ids, 1, {0.0, 0.3});
  const auto train = subset(corpus.examples, split.train);
  const auto train_t = transcripts_of(train), test_t = transcripts_of(subset(corpus.examples, split.test));
  const auto all_t = corpus.transcripts();

  const auto labeler = DiagnosisLabeler::fit(train, corpus.diagnosis.cols());
  const auto fm = train_filter(train_t, task_noteworthy_targets(train, labeler), NoteworthyScope::kDiagnosis);
  const auto evaluate_selection = [&](const std::vector<std::vector<std::size_t>>& selections) {
    std::map<std::string, std::vector<std::size_t>> by_id;
    for (std::size_t i = 0; i < all_t.size(); ++i) by_id[all_t[i].id] = selections[i];
    FilterContext ctx;
    ctx.oracle = [&](const Transcript& t) { return by_id.at(t.id); };
    PipelineConfig pc;
    pc.strategy = FilterStrategy::oracle(NoteworthyScope::kDiagnosis);
    const auto models = train_pipeline(pc, train_t, corpus.diagnosis, ctx);
    return evaluate(run_pipeline(pc, models, test_t, ctx), corpus.diagnosis).aggregate;
  };
  const auto grid = default_sweep_grid();
  const auto points = threshold_sweep(fm, all_t, evaluate_selection, grid);
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].metrics.at("precision_at_1") > points[best].metrics.at("precision_at_1")) best = i;
  const double peak = points[best].metrics.at("precision_at_1");
  const double first = points.front().metrics.at("precision_at_1"), last = points.back().metrics.at("precision_at_1");
  o.require(best != 0 && best + 1 != points.size(), "maximum at an end of the grid");
  o.require(peak > first && peak > last, "peak does not exceed both ends");
  o.detail = "P@1 " + fmt(first) + " at select-all (" + fmt(points.front().mean_selected, 1) + " utterances), peak " +
             fmt(peak) + " at threshold " + fmt(points[best].threshold, 2) + " (" +
             fmt(points[best].mean_selected, 1) + " utterances), " + fmt(last) + " at select-none" +
             (o.pass ? "" : "; " + o.detail);
  return o;
}

// ---------------------------------------------------------------------------
// 10: all-positive micro-F1 closed form

Outcome criterion10() {
  Outcome o;
  Rng rng(10);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = oracle::space_of(1 + rng.index(20));
    const std::size_t n = 50 + rng.index(600);
    std::vector<double> prevalence;
    for (std::size_t l = 0; l < space.size(); ++l)
      prevalence.push_back(static_cast<double>(rng.index(n + 1)) / static_cast<double>(n));
    const auto truth = oracle::truth_with_counts(rng, space, prevalence, n);
    LabelMatrix pred = truth;
    std::fill(pred.values.begin(), pred.values.end(), 1);
    const double t = std::accumulate(prevalence.begin(), prevalence.end(), 0.0);
    const double l = static_cast<double>(space.size());
    const double closed = t > 0 ? 2.0 * t / (l + t) : 0.0;
    worst = std::max(worst, std::abs(f1_scores(pred, truth).micro_f1 - closed));
  }
  o.require(worst <= 1e-12, "deviation " + sci(worst));
  o.detail = "max deviation " + sci(worst) + " over 100 prevalence vectors" + (o.pass ? "" : "; " + o.detail);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"input-agnostic baseline, diagnosis", criterion1},
      {"input-agnostic baseline, review of systems", criterion2},
      {"input-agnostic micro-AUC on generated corpora", criterion3},
      {"metric oracle equivalence", criterion4},
      {"logistic optimizer correctness", criterion5},
      {"filtering pipeline properties", criterion6},
      {"entity baseline oracle", criterion7},
      {"chunk adapter arithmetic", criterion8},
      {"threshold sweep interior maximum", criterion9},
      {"all-positive micro-F1 closed form", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
