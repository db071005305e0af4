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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/concept_matcher.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/linear.hpp"
#include "noteworthy/metrics.hpp"
#include "noteworthy/text_features.hpp"
#include "noteworthy/transcript.hpp"

namespace noteworthy {

// Which evidence counts as noteworthy: any cited line, or lines cited by an
// entry carrying diagnosis / review-of-systems labels.
enum class NoteworthyScope { kAll, kDiagnosis, kRos };

inline std::string_view to_string(NoteworthyScope s) {
  switch (s) {
    case NoteworthyScope::kAll: return "all";
    case NoteworthyScope::kDiagnosis: return "diagnosis";
    case NoteworthyScope::kRos: return "ros";
  }
  return "all";
}

inline NoteworthyScope parse_scope(std::string_view s) {
  if (s == "all") return NoteworthyScope::kAll;
  if (s == "diagnosis") return NoteworthyScope::kDiagnosis;
  if (s == "ros") return NoteworthyScope::kRos;
  throw ConfigError("unknown noteworthy scope \"" + std::string(s) + "\" (expected all, diagnosis or ros)");
}

// Tuned operating points of the filter classifiers.
inline double default_threshold(NoteworthyScope s) {
  switch (s) {
    case NoteworthyScope::kAll: return 0.4;
    case NoteworthyScope::kDiagnosis: return 0.1;
    case NoteworthyScope::kRos: return 0.02;
  }
  return 0.4;
}

// FillUptoK budget per predicted scope.
inline std::size_t default_fill_k(NoteworthyScope s) {
  switch (s) {
    case NoteworthyScope::kAll: return 50;
    case NoteworthyScope::kDiagnosis: return 15;
    case NoteworthyScope::kRos: return 20;
  }
  return 50;
}

// ---------------------------------------------------------------------------
// Targets

inline std::vector<std::vector<std::uint8_t>> all_noteworthy_targets(std::span<const Example> corpus) {
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(noteworthy_targets(ex.transcript, ex.note));
  return out;
}

// Task scope: lines cited by entries whose derived labels fall in the
// labeler's label space.
template <typename Labeler>
std::vector<std::vector<std::uint8_t>> task_noteworthy_targets(std::span<const Example> corpus,
                                                               const Labeler& labeler) {
  const std::set<std::string> labels(labeler.space().labels.begin(), labeler.space().labels.end());
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(corpus.size());
  for (const auto& ex : corpus) out.push_back(noteworthy_targets(ex.transcript, ex.note, labels, labeler));
  return out;
}

// ---------------------------------------------------------------------------
// Filter model

inline Document utterance_document(const Utterance& u, bool speaker_feature) {
  Document doc{tokenize(u.text)};
  // Underscores never survive tokenize(), so this token cannot collide.
  if (speaker_feature) doc.push_back({"__speaker_" + std::string(to_string(u.speaker))});
  return doc;
}

struct FilterModel {
  NoteworthyScope scope = NoteworthyScope::kAll;
  Vocabulary vocabulary;
  LogisticModel model;
  double threshold = 0.4;
  bool speaker_feature = false;
  bool degenerate = false;  // trained on all-positive targets

  double probability(const Utterance& u) const {
    return predict_proba(model, tfidf_transform(vocabulary, utterance_document(u, speaker_feature)));
  }
  std::vector<double> probabilities(const Transcript& t) const {
    std::vector<double> out;
    out.reserve(t.size());
    for (const auto& u : t.utterances) out.push_back(probability(u));
    return out;
  }
};

struct FilterTrainConfig {
  double reg_c = kDefaultRegC;
  std::size_t min_df = kUtteranceMinDf;
  std::optional<double> threshold;  // defaults per scope
  bool speaker_feature = false;
};

// Utterance-level logistic classifier over unigram+bigram TF-IDF.
inline FilterModel train_filter(std::span<const Transcript> transcripts,
                                std::span<const std::vector<std::uint8_t>> targets, NoteworthyScope scope,
                                const FilterTrainConfig& cfg = {}) {
  if (transcripts.size() != targets.size()) throw TrainError("one target vector per transcript is required");
  std::vector<Document> docs;
  std::vector<std::uint8_t> y;
  for (std::size_t i = 0; i < transcripts.size(); ++i) {
    if (targets[i].size() != transcripts[i].size())
      throw TrainError("target length differs from utterance count for " + transcripts[i].id);
    for (const auto& u : transcripts[i].utterances) {
      docs.push_back(utterance_document(u, cfg.speaker_feature));
      y.push_back(targets[i][u.index]);
    }
  }
  const auto positives = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (positives == 0) throw TrainError("no noteworthy utterances in the training corpus (degenerate filter)");

  FilterModel fm;
  fm.scope = scope;
  fm.speaker_feature = cfg.speaker_feature;
  fm.threshold = cfg.threshold.value_or(default_threshold(scope));
  if (!(fm.threshold >= 0.0 && fm.threshold <= 1.0)) throw ConfigError("filter threshold must lie in [0, 1]");
  fm.vocabulary = fit_vocabulary(docs, FitOptions{cfg.min_df, true});
  std::vector<SparseVector> x;
  x.reserve(docs.size());
  for (const auto& d : docs) x.push_back(tfidf_transform(fm.vocabulary, d));
  fm.degenerate = positives == y.size();
  LogisticOptions opts;
  opts.reg_c = cfg.reg_c;
  fm.model = train_logistic(x, y, fm.vocabulary.size(), opts);
  return fm;
}

inline nlohmann::json to_json(const FilterModel& fm) {
  return {{"scope", to_string(fm.scope)},
          {"threshold", fm.threshold},
          {"speaker_feature", fm.speaker_feature},
          {"degenerate", fm.degenerate},
          {"vocabulary", fm.vocabulary.to_json()},
          {"vocabulary_hash", fm.vocabulary.fingerprint()},
          {"model", to_json(fm.model)}};
}

inline FilterModel filter_model_from_json(const nlohmann::json& j) {
  try {
    FilterModel fm;
    fm.scope = parse_scope(j.at("scope").get<std::string>());
    fm.threshold = j.at("threshold").get<double>();
    fm.speaker_feature = j.value("speaker_feature", false);
    fm.degenerate = j.value("degenerate", false);
    fm.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
    fm.model = logistic_model_from_json(j.at("model"));
    if (j.contains("vocabulary_hash") && j["vocabulary_hash"].get<std::uint64_t>() != fm.vocabulary.fingerprint())
      throw ConfigError("filter model vocabulary hash mismatch");
    if (fm.model.dim() != fm.vocabulary.size()) throw ConfigError("filter model dimension mismatch");
    return fm;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid filter model: ") + e.what(), 0);
  }
}

// ---------------------------------------------------------------------------
// Strategies

struct FilterStrategy {
  enum class Kind { kNone, kUmls, kPredicted, kUnion, kFillToK, kOracle };

  Kind kind = Kind::kNone;
  NoteworthyScope scope = NoteworthyScope::kAll;
  std::optional<double> threshold;  // predicted/union; falls back to the model's
  std::size_t k = 0;                // fill_to_k

  bool needs_model() const { return kind == Kind::kPredicted || kind == Kind::kUnion || kind == Kind::kFillToK; }
  bool needs_lexicon() const { return kind == Kind::kUmls || kind == Kind::kUnion || kind == Kind::kFillToK; }

  static FilterStrategy none() { return {}; }
  static FilterStrategy umls() { return {Kind::kUmls, NoteworthyScope::kAll, std::nullopt, 0}; }
  static FilterStrategy predicted(NoteworthyScope s, std::optional<double> t = std::nullopt) {
    return {Kind::kPredicted, s, t, 0};
  }
  static FilterStrategy union_with_umls(NoteworthyScope s, std::optional<double> t = std::nullopt) {
    return {Kind::kUnion, s, t, 0};
  }
  static FilterStrategy fill_to_k(NoteworthyScope s, std::size_t k) { return {Kind::kFillToK, s, std::nullopt, k}; }
  static FilterStrategy oracle(NoteworthyScope s) { return {Kind::kOracle, s, std::nullopt, 0}; }

  friend bool operator==(const FilterStrategy&, const FilterStrategy&) = default;
};

namespace detail {

inline std::string format_threshold(double t) {
  std::ostringstream out;
  out << t;
  return out.str();
}

inline double parse_number(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    const std::string str(s);
    const double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid " + std::string(what) + " \"" + std::string(s) + "\"");
  }
}

inline NoteworthyScope alias_scope(std::string_view s) {
  if (s == "AN") return NoteworthyScope::kAll;
  if (s == "DN") return NoteworthyScope::kDiagnosis;
  if (s == "RN") return NoteworthyScope::kRos;
  throw ConfigError("unknown noteworthy alias \"" + std::string(s) + "\"");
}

// "pred:<scope>[@<threshold>]"
inline FilterStrategy parse_pred(std::string_view s, FilterStrategy::Kind kind) {
  if (s.substr(0, 5) != "pred:") throw ConfigError("expected pred:<scope> in \"" + std::string(s) + "\"");
  s.remove_prefix(5);
  FilterStrategy out{kind, NoteworthyScope::kAll, std::nullopt, 0};
  const auto at = s.find('@');
  out.scope = parse_scope(s.substr(0, at));
  if (at != std::string_view::npos) {
    auto rest = s.substr(at + 1);
    if (kind == FilterStrategy::Kind::kFillToK) {
      if (rest.substr(0, 2) != "K=") throw ConfigError("fill_to_k expects @K=<k>");
      const double k = parse_number(rest.substr(2), "K");
      if (k < 1 || k != static_cast<double>(static_cast<std::size_t>(k))) throw ConfigError("K must be a positive integer");
      out.k = static_cast<std::size_t>(k);
    } else {
      const double t = parse_number(rest, "threshold");
      if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
      out.threshold = t;
    }
  } else if (kind == FilterStrategy::Kind::kFillToK) {
    out.k = default_fill_k(out.scope);
  }
  return out;
}

}  // namespace detail

// Accepts `none`, `umls`, `pred:<scope>@<t>`, `union:umls+pred:<scope>@<t>`,
// `f2k:umls+pred:<scope>@K=<k>`, `oracle:<scope>`, and the short model-name
// forms AN/DN/RN, UMLS, UMLS+DN (or UMLS-DN), UMLS+F2K-DN, ORACLE-DN.
inline FilterStrategy parse_strategy(std::string_view s) {
  using Kind = FilterStrategy::Kind;
  if (s == "none") return FilterStrategy::none();
  if (s == "umls" || s == "UMLS") return FilterStrategy::umls();
  if (s.substr(0, 5) == "pred:") return detail::parse_pred(s, Kind::kPredicted);
  if (s.substr(0, 11) == "union:umls+") return detail::parse_pred(s.substr(11), Kind::kUnion);
  if (s.substr(0, 9) == "f2k:umls+") return detail::parse_pred(s.substr(9), Kind::kFillToK);
  if (s.substr(0, 7) == "oracle:") return FilterStrategy::oracle(parse_scope(s.substr(7)));
  if (s == "AN" || s == "DN" || s == "RN") return FilterStrategy::predicted(detail::alias_scope(s));
  if (s.substr(0, 7) == "ORACLE-") return FilterStrategy::oracle(detail::alias_scope(s.substr(7)));
  if (s.size() > 5 && s.substr(0, 4) == "UMLS" && (s[4] == '+' || s[4] == '-')) {
    auto rest = s.substr(5);
    if (rest.substr(0, 4) == "F2K-" || rest.substr(0, 4) == "F2K+") {
      const auto scope = detail::alias_scope(rest.substr(4));
      return FilterStrategy::fill_to_k(scope, default_fill_k(scope));
    }
    return FilterStrategy::union_with_umls(detail::alias_scope(rest));
  }
  throw ConfigError("unrecognized filter strategy \"" + std::string(s) + "\"");
}

inline std::string to_string(const FilterStrategy& s) {
  using Kind = FilterStrategy::Kind;
  const std::string scope(to_string(s.scope));
  const std::string t = s.threshold ? "@" + detail::format_threshold(*s.threshold) : "";
  switch (s.kind) {
    case Kind::kNone: return "none";
    case Kind::kUmls: return "umls";
    case Kind::kPredicted: return "pred:" + scope + t;
    case Kind::kUnion: return "union:umls+pred:" + scope + t;
    case Kind::kFillToK: return "f2k:umls+pred:" + scope + "@K=" + std::to_string(s.k);
    case Kind::kOracle: return "oracle:" + scope;
  }
  return "none";
}

// Everything apply_filter may need; unused members may stay empty.
struct FilterContext {
  const ConceptLexicon* lexicon = nullptr;
  const TaskLexicon* task_lexicon = nullptr;
  const FilterModel* model = nullptr;
  // Ground-truth noteworthy indices for oracle strategies.
  std::function<std::vector<std::size_t>(const Transcript&)> oracle;
};

// All of `umls`, then the highest-probability remaining utterances (ties to
// the lower index) until `k` are selected. Never drops UMLS hits. Output is
// ascending.
inline std::vector<std::size_t> fill_to_k(std::span<const std::size_t> umls, std::span<const double> probs,
                                          std::size_t k) {
  std::vector<std::uint8_t> chosen(probs.size(), 0);
  std::size_t total = 0;
  for (auto ix : umls) {
    if (ix < chosen.size() && !chosen[ix]) {
      chosen[ix] = 1;
      ++total;
    }
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (!chosen[i]) candidates.push_back(i);
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  for (auto ix : candidates) {
    if (total >= k) break;
    chosen[ix] = 1;
    ++total;
  }
  return indices_of(chosen);
}

inline std::vector<std::size_t> select_above(std::span<const double> probs, double threshold) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] >= threshold) out.push_back(i);
  return out;
}

// Selected utterance indices, ascending and duplicate-free. May be empty.
inline std::vector<std::size_t> apply_filter(const FilterStrategy& s, const FilterContext& ctx, const Transcript& t) {
  using Kind = FilterStrategy::Kind;
  if (s.needs_model()) {
    if (!ctx.model) throw ConfigError("strategy " + to_string(s) + " needs a filter model");
    if (ctx.model->scope != s.scope)
      throw ConfigError("strategy " + to_string(s) + " given a filter model of scope " +
                        std::string(to_string(ctx.model->scope)));
  }
  if (s.needs_lexicon() && !(ctx.lexicon && ctx.task_lexicon))
    throw ConfigError("strategy " + to_string(s) + " needs a lexicon and task map");

  switch (s.kind) {
    case Kind::kNone: {
      std::vector<std::size_t> all(t.size());
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    case Kind::kUmls: return umls_noteworthy(*ctx.lexicon, *ctx.task_lexicon, t);
    case Kind::kPredicted:
      return select_above(ctx.model->probabilities(t), s.threshold.value_or(ctx.model->threshold));
    case Kind::kUnion: {
      const auto predicted = select_above(ctx.model->probabilities(t), s.threshold.value_or(ctx.model->threshold));
      const auto umls = umls_noteworthy(*ctx.lexicon, *ctx.task_lexicon, t);
      std::vector<std::size_t> out;
      std::set_union(umls.begin(), umls.end(), predicted.begin(), predicted.end(), std::back_inserter(out));
      return out;
    }
    case Kind::kFillToK: {
      if (s.k == 0) throw ConfigError("fill_to_k needs K >= 1");
      const auto umls = umls_noteworthy(*ctx.lexicon, *ctx.task_lexicon, t);
      return fill_to_k(umls, ctx.model->probabilities(t), s.k);
    }
    case Kind::kOracle: {
      if (!ctx.oracle) throw ConfigError("oracle strategy needs ground-truth annotations");
      auto out = ctx.oracle(t);
      std::sort(out.begin(), out.end());
      out.erase(std::unique(out.begin(), out.end()), out.end());
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Threshold sweep

struct SweepPoint {
  double threshold = 0.0;
  double mean_selected = 0.0;
  std::map<std::string, double> metrics;
};

using SweepEvaluator = std::function<std::map<std::string, double>(const std::vector<std::vector<std::size_t>>&)>;

inline std::vector<double> default_sweep_grid() {
  return {0.0, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 1.1};
}

// For each threshold: the predicted-noteworthy selection of every
// transcript, its mean size, and whatever the evaluator reports for it.
inline std::vector<SweepPoint> threshold_sweep(const FilterModel& fm, std::span<const Transcript> corpus,
                                               const SweepEvaluator& evaluate, std::span<const double> grid) {
  std::vector<std::vector<double>> probs;
  probs.reserve(corpus.size());
  for (const auto& t : corpus) probs.push_back(fm.probabilities(t));
  std::vector<SweepPoint> out;
  for (double threshold : grid) {
    std::vector<std::vector<std::size_t>> selections;
    std::size_t total = 0;
    for (const auto& p : probs) {
      selections.push_back(select_above(p, threshold));
      total += selections.back().size();
    }
    SweepPoint pt{threshold, corpus.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(corpus.size()),
                  {}};
    pt.metrics = evaluate(selections);
    out.push_back(std::move(pt));
  }
  return out;
}

inline std::string sweep_table(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "threshold\tmean_selected";
  if (!points.empty())
    for (const auto& [k, v] : points.front().metrics) out << '\t' << k;
  out << '\n';
  for (const auto& p : points) {
    out << p.threshold << '\t' << detail::fixed4(p.mean_selected);
    for (const auto& [k, v] : p.metrics) out << '\t' << detail::fixed4(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace noteworthy
