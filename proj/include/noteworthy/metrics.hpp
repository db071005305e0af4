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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/error.hpp"

namespace noteworthy {

// Per-example, per-label probabilities (row-major N x L).
struct ScoreMatrix {
  std::vector<std::string> example_ids;
  LabelSpace space;
  std::vector<double> probs;

  std::size_t rows() const { return example_ids.size(); }
  std::size_t cols() const { return space.size(); }
  double at(std::size_t i, std::size_t l) const { return probs[i * cols() + l]; }
  double& at(std::size_t i, std::size_t l) { return probs[i * cols() + l]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(probs).subspan(i * cols(), cols());
  }
};

inline void validate(const ScoreMatrix& s) {
  if (s.probs.size() != s.rows() * s.cols()) throw ValidationError("score matrix shape mismatch");
  for (double p : s.probs)
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) throw ValidationError("score outside [0,1]");
}

inline void write_scores(std::ostream& out, const ScoreMatrix& s) {
  for (std::size_t i = 0; i < s.rows(); ++i) {
    nlohmann::json scores = nlohmann::json::object();
    for (std::size_t l = 0; l < s.cols(); ++l) scores[s.space.labels[l]] = s.at(i, l);
    out << nlohmann::json{{"id", s.example_ids[i]}, {"scores", scores}}.dump() << '\n';
  }
}

// Reads score JSONL against a known label space; every label must be present.
inline ScoreMatrix read_scores(std::istream& in, const LabelSpace& space) {
  ScoreMatrix s{{}, space, {}};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (detail::is_blank(raw)) continue;
    const auto obj = detail::parse_json_line(raw, line);
    if (!obj.is_object()) throw ParseError("row must be a JSON object", line);
    s.example_ids.push_back(detail::require_string(obj, "id", line));
    const auto& scores = detail::require(obj, "scores", line);
    for (const auto& label : space.labels) {
      auto it = scores.find(label);
      if (it == scores.end() || !it->is_number()) throw ParseError("missing score for label \"" + label + "\"", line);
      s.probs.push_back(it->get<double>());
    }
  }
  validate(s);
  return s;
}

namespace detail {

inline void check_shape(std::size_t rows_a, std::size_t cols_a, std::size_t rows_b, std::size_t cols_b) {
  if (rows_a != rows_b || cols_a != cols_b)
    throw ValidationError("shape mismatch: " + std::to_string(rows_a) + "x" + std::to_string(cols_a) + " vs " +
                          std::to_string(rows_b) + "x" + std::to_string(cols_b));
}

inline double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace detail

inline LabelMatrix binarize(const ScoreMatrix& s, double threshold = 0.5) {
  LabelMatrix out{s.example_ids, s.space, std::vector<std::uint8_t>(s.probs.size(), 0)};
  for (std::size_t k = 0; k < s.probs.size(); ++k) out.values[k] = s.probs[k] >= threshold ? 1 : 0;
  return out;
}

// Reorders truth rows to follow the score ids.
inline LabelMatrix align_truth(const ScoreMatrix& scores, const LabelMatrix& truth) {
  if (scores.space.labels != truth.space.labels) throw ValidationError("score and truth label spaces differ");
  if (scores.example_ids == truth.example_ids) return truth;
  return select_rows(truth, scores.example_ids);
}

// ---------------------------------------------------------------------------
// F1

struct LabelCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision() const { return detail::ratio(static_cast<double>(tp), static_cast<double>(tp + fp)); }
  double recall() const { return detail::ratio(static_cast<double>(tp), static_cast<double>(tp + fn)); }
  double f1() const { return detail::ratio(2.0 * static_cast<double>(tp), static_cast<double>(2 * tp + fp + fn)); }
};

struct F1Result {
  double macro_f1 = 0.0;
  double micro_f1 = 0.0;
  std::vector<LabelCounts> per_label;
};

inline F1Result f1_scores(const LabelMatrix& pred, const LabelMatrix& truth) {
  detail::check_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols());
  F1Result r;
  r.per_label.resize(truth.cols());
  LabelCounts pooled;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    for (std::size_t l = 0; l < truth.cols(); ++l) {
      auto& c = r.per_label[l];
      const bool p = pred.at(i, l) != 0, t = truth.at(i, l) != 0;
      if (p && t)
        ++c.tp;
      else if (p)
        ++c.fp;
      else if (t)
        ++c.fn;
      else
        ++c.tn;
    }
  }
  double sum = 0.0;
  for (const auto& c : r.per_label) {
    sum += c.f1();
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    pooled.tn += c.tn;
  }
  r.macro_f1 = r.per_label.empty() ? 0.0 : sum / static_cast<double>(r.per_label.size());
  r.micro_f1 = pooled.f1();
  return r;
}

// Cell-mean accuracy (equivalently the mean of per-label accuracies).
inline double accuracy(const LabelMatrix& pred, const LabelMatrix& truth) {
  detail::check_shape(pred.rows(), pred.cols(), truth.rows(), truth.cols());
  if (truth.values.empty()) return 0.0;
  std::size_t agree = 0;
  for (std::size_t k = 0; k < truth.values.size(); ++k) agree += (pred.values[k] != 0) == (truth.values[k] != 0);
  return static_cast<double>(agree) / static_cast<double>(truth.values.size());
}

// ---------------------------------------------------------------------------
// AUC

// Probability that a positive outscores a negative, ties counted half.
// nullopt when either class is absent.
inline std::optional<double> rank_auc(std::span<const double> scores, std::span<const std::uint8_t> truth) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double u2 = 0.0;  // twice the Mann-Whitney U, integral until the final division
  double neg_below = 0.0, pos_total = 0.0, neg_total = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t end = k;
    double pos = 0.0, neg = 0.0;
    while (end < order.size() && scores[order[end]] == scores[order[k]]) {
      (truth[order[end]] ? pos : neg) += 1.0;
      ++end;
    }
    u2 += pos * (2.0 * neg_below + neg);
    neg_below += neg;
    pos_total += pos;
    neg_total += neg;
    k = end;
  }
  if (pos_total == 0.0 || neg_total == 0.0) return std::nullopt;
  return u2 / (2.0 * pos_total * neg_total);
}

struct AucResult {
  double macro_auc = 0.5;
  double micro_auc = 0.5;
  std::vector<double> per_label;
  std::vector<bool> single_class;  // AUC reported as 0.5 and excluded from the macro mean
  bool micro_single_class = false;
};

inline AucResult auc_scores(const ScoreMatrix& scores, const LabelMatrix& truth) {
  detail::check_shape(scores.rows(), scores.cols(), truth.rows(), truth.cols());
  AucResult r;
  const std::size_t n = truth.rows(), labels = truth.cols();
  std::vector<double> col(n);
  std::vector<std::uint8_t> tcol(n);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t l = 0; l < labels; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      col[i] = scores.at(i, l);
      tcol[i] = truth.at(i, l);
    }
    auto a = rank_auc(col, tcol);
    r.per_label.push_back(a.value_or(0.5));
    r.single_class.push_back(!a.has_value());
    if (a) {
      sum += *a;
      ++counted;
    }
  }
  r.macro_auc = counted ? sum / static_cast<double>(counted) : 0.5;
  auto micro = rank_auc(scores.probs, truth.values);
  r.micro_auc = micro.value_or(0.5);
  r.micro_single_class = !micro.has_value();
  return r;
}

// ---------------------------------------------------------------------------
// Precision at 1

struct PrecisionAt1 {
  double p_at_1 = 0.0;
  double max_achievable = 0.0;
  std::vector<double> contribution;  // CP@1 per label
  std::vector<std::size_t> correct_top;
};

// Argmax ties go to the lowest label index.
inline std::size_t top_label(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t l = 1; l < row.size(); ++l)
    if (row[l] > row[best]) best = l;
  return best;
}

inline PrecisionAt1 precision_at_1(const ScoreMatrix& scores, const LabelMatrix& truth) {
  detail::check_shape(scores.rows(), scores.cols(), truth.rows(), truth.cols());
  if (truth.cols() == 0) throw ValidationError("precision-at-1 needs at least one label");
  PrecisionAt1 r;
  r.correct_top.assign(truth.cols(), 0);
  std::size_t correct = 0, any_positive = 0;
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    const auto top = top_label(scores.row(i));
    if (truth.at(i, top)) {
      ++correct;
      ++r.correct_top[top];
    }
    const auto row = truth.row(i);
    if (std::any_of(row.begin(), row.end(), [](auto v) { return v != 0; })) ++any_positive;
  }
  const auto n = static_cast<double>(truth.rows());
  r.p_at_1 = detail::ratio(static_cast<double>(correct), n);
  r.max_achievable = detail::ratio(static_cast<double>(any_positive), n);
  r.contribution.resize(truth.cols(), 0.0);
  for (std::size_t l = 0; l < truth.cols(); ++l)
    r.contribution[l] = detail::ratio(static_cast<double>(r.correct_top[l]), static_cast<double>(correct));
  return r;
}

// ---------------------------------------------------------------------------
// Report

struct LabelReport {
  std::string label;
  double prevalence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double auc = 0.5;
  double cp_at_1 = 0.0;
  bool single_class = false;
};

struct EvalReport {
  std::map<std::string, double> aggregate;
  std::vector<LabelReport> per_label;
  std::vector<std::string> flags;
  nlohmann::json config = nlohmann::json::object();
};

inline constexpr double kDefaultDecisionThreshold = 0.5;

// Binary metrics use `threshold`; ranking metrics use the raw scores. Truth
// rows are matched to score rows by id.
inline EvalReport evaluate(const ScoreMatrix& scores, const LabelMatrix& truth_in,
                           double threshold = kDefaultDecisionThreshold) {
  validate(scores);
  const auto truth = align_truth(scores, truth_in);
  const auto pred = binarize(scores, threshold);
  const auto f1 = f1_scores(pred, truth);
  const auto auc = auc_scores(scores, truth);
  const auto p1 = precision_at_1(scores, truth);
  const auto prevalence = column_prevalence(truth);

  EvalReport r;
  r.aggregate = {{"accuracy", accuracy(pred, truth)},    {"macro_auc", auc.macro_auc},
                 {"macro_f1", f1.macro_f1},              {"micro_auc", auc.micro_auc},
                 {"micro_f1", f1.micro_f1},              {"precision_at_1", p1.p_at_1},
                 {"max_precision_at_1", p1.max_achievable}};
  for (std::size_t l = 0; l < truth.cols(); ++l) {
    const auto& c = f1.per_label[l];
    const auto cells = static_cast<double>(c.tp + c.fp + c.fn + c.tn);
    LabelReport lr{truth.space.labels[l], prevalence[l], c.precision(), c.recall(), c.f1(),
                   detail::ratio(static_cast<double>(c.tp + c.tn), cells), auc.per_label[l], p1.contribution[l],
                   auc.single_class[l]};
    if (lr.single_class)
      r.flags.push_back("label \"" + lr.label + "\" has a single class: AUC 0.5, excluded from macro-AUC");
    r.per_label.push_back(std::move(lr));
  }
  if (auc.micro_single_class) r.flags.push_back("pooled cells have a single class: micro-AUC reported as 0.5");
  r.config = {{"threshold", threshold}, {"examples", truth.rows()}, {"labels", truth.cols()},
              {"task", to_string(truth.space.task)}};
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_label = nlohmann::json::array();
  for (const auto& l : r.per_label)
    per_label.push_back({{"label", l.label},     {"prevalence", l.prevalence}, {"precision", l.precision},
                         {"recall", l.recall},   {"f1", l.f1},                 {"accuracy", l.accuracy},
                         {"auc", l.auc},         {"cp_at_1", l.cp_at_1},       {"single_class", l.single_class}});
  return {{"aggregate", r.aggregate}, {"per_label", per_label}, {"flags", r.flags}, {"config", r.config}};
}

namespace detail {

inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

}  // namespace detail

// Model rows x aggregate metric columns.
inline std::string markdown_model_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  static const std::vector<std::pair<std::string, std::string>> kColumns = {
      {"Accuracy", "accuracy"}, {"M-AUC", "macro_auc"}, {"M-F1", "macro_f1"},
      {"m-AUC", "micro_auc"},   {"m-F1", "micro_f1"},   {"Precision-at-1", "precision_at_1"}};
  std::ostringstream out;
  out << "| Model |";
  for (const auto& [title, key] : kColumns) out << ' ' << title << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < kColumns.size(); ++i) out << "---|";
  out << '\n';
  for (const auto& [name, report] : rows) {
    out << "| " << name << " |";
    for (const auto& [title, key] : kColumns) {
      auto it = report.aggregate.find(key);
      out << ' ' << (it == report.aggregate.end() ? std::string("-") : detail::fixed4(it->second)) << " |";
    }
    out << '\n';
  }
  return out.str();
}

// Label rows x per-label metric columns.
inline std::string markdown_label_table(const EvalReport& r) {
  std::ostringstream out;
  out << "| Label | Prevalence rate | Precision | Recall | F1 | Accuracy | AUC | CP@1 |\n"
      << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& l : r.per_label) {
    out << "| " << l.label << (l.single_class ? " (single class)" : "") << " | " << detail::fixed4(l.prevalence)
        << " | " << detail::fixed4(l.precision) << " | " << detail::fixed4(l.recall) << " | " << detail::fixed4(l.f1)
        << " | " << detail::fixed4(l.accuracy) << " | " << detail::fixed4(l.auc) << " | "
        << detail::fixed4(l.cp_at_1) << " |\n";
  }
  return out.str();
}

inline std::string to_markdown(const EvalReport& r, const std::string& model_name = "model") {
  std::string out = markdown_model_table({{model_name, r}});
  out += "\n";
  out += markdown_label_table(r);
  if (!r.flags.empty()) {
    out += "\n";
    for (const auto& f : r.flags) out += "- " + f + "\n";
  }
  return out;
}

}  // namespace noteworthy
