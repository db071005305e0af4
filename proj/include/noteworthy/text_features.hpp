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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/error.hpp"
#include "noteworthy/util.hpp"

namespace noteworthy {

using TokenSeq = std::vector<std::string>;

// A document is a list of segments (one per utterance). N-grams never cross
// a segment boundary.
using Document = std::vector<TokenSeq>;

// Lowercase ASCII; every byte that is not an ASCII letter or digit separates
// tokens, except bytes >= 0x80, which are kept so UTF-8 words stay whole.
inline TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string cur;
  for (unsigned char c : text) {
    const bool word = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      cur.push_back(static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

// Unigrams followed by adjacent bigrams of each segment, in stream order.
inline std::vector<std::string> ngrams(const Document& doc) {
  std::vector<std::string> out;
  for (const auto& seg : doc) {
    for (std::size_t i = 0; i < seg.size(); ++i) {
      out.push_back(seg[i]);
      if (i + 1 < seg.size()) out.push_back(seg[i] + ' ' + seg[i + 1]);
    }
  }
  return out;
}

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly ascending
  std::vector<double> values;

  std::size_t nnz() const { return indices.size(); }
  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

inline SparseVector dense_to_sparse(std::span<const double> dense) {
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      out.values.push_back(dense[i]);
    }
  }
  return out;
}

inline constexpr std::size_t kTranscriptMinDf = 2;
inline constexpr std::size_t kUtteranceMinDf = 1;

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> terms, std::vector<std::size_t> df, std::size_t n_docs, std::size_t min_df)
      : terms_(std::move(terms)), df_(std::move(df)), n_docs_(n_docs), min_df_(min_df) {
    if (terms_.size() != df_.size()) throw FitError("vocabulary terms/df length mismatch");
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!index_.emplace(terms_[i], static_cast<std::uint32_t>(i)).second)
        throw FitError("duplicate vocabulary term \"" + terms_[i] + "\"");
      if (df_[i] > n_docs_) throw FitError("document frequency exceeds document count");
    }
  }

  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<std::size_t>& df() const { return df_; }
  std::size_t n_docs() const { return n_docs_; }
  std::size_t min_df() const { return min_df_; }
  std::size_t size() const { return terms_.size(); }

  std::optional<std::uint32_t> find(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Smoothed inverse document frequency.
  double idf(std::size_t i) const {
    return std::log((1.0 + static_cast<double>(n_docs_)) / (1.0 + static_cast<double>(df_[i]))) + 1.0;
  }

  std::uint64_t fingerprint() const {
    Fnv1a h;
    h.update_u64(n_docs_).update_u64(min_df_).update_u64(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) h.update(terms_[i]).update_u64(df_[i]);
    return h.digest();
  }

  nlohmann::json to_json() const {
    return {{"terms", terms_}, {"df", df_}, {"n_docs", n_docs_}, {"min_df", min_df_}};
  }

  static Vocabulary from_json(const nlohmann::json& j) {
    try {
      return Vocabulary(j.at("terms").get<std::vector<std::string>>(), j.at("df").get<std::vector<std::size_t>>(),
                        j.at("n_docs").get<std::size_t>(), j.at("min_df").get<std::size_t>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("invalid vocabulary: ") + e.what(), 0);
    }
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::size_t> df_;
  std::size_t n_docs_ = 0;
  std::size_t min_df_ = 1;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct FitOptions {
  std::size_t min_df = 1;
  // An empty result is an error unless this is set (the pipeline allows it
  // so that an all-empty filtered corpus still yields bias-only models).
  bool allow_empty = false;
};

// Unigrams and bigrams with document frequency >= min_df, first-seen order.
inline Vocabulary fit_vocabulary(std::span<const Document> docs, FitOptions opts) {
  if (docs.empty()) throw FitError("cannot fit a vocabulary on zero documents");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string> seen;
    for (auto& g : ngrams(doc)) {
      if (!seen.insert(g).second) continue;
      auto [it, fresh] = df.emplace(g, 0);
      if (fresh) order.push_back(g);
      ++it->second;
    }
  }
  std::vector<std::string> terms;
  std::vector<std::size_t> counts;
  for (auto& g : order) {
    const auto n = df.at(g);
    if (n >= opts.min_df) {
      counts.push_back(n);
      terms.push_back(std::move(g));
    }
  }
  if (terms.empty() && !opts.allow_empty)
    throw FitError("vocabulary is empty after applying min_df=" + std::to_string(opts.min_df));
  return Vocabulary(std::move(terms), std::move(counts), docs.size(), opts.min_df);
}

// Single-segment convenience form.
inline Vocabulary fit_vocabulary(std::span<const TokenSeq> docs, std::size_t min_df) {
  std::vector<Document> wrapped;
  wrapped.reserve(docs.size());
  for (const auto& d : docs) wrapped.push_back(Document{d});
  return fit_vocabulary(wrapped, FitOptions{min_df, false});
}

// Raw in-vocabulary n-gram counts.
inline SparseVector count_transform(const Vocabulary& v, const Document& doc) {
  std::unordered_map<std::uint32_t, double> tf;
  for (const auto& g : ngrams(doc))
    if (auto ix = v.find(g)) tf[*ix] += 1.0;
  SparseVector out;
  out.indices.reserve(tf.size());
  for (const auto& [ix, c] : tf) out.indices.push_back(ix);
  std::sort(out.indices.begin(), out.indices.end());
  out.values.reserve(out.indices.size());
  for (auto ix : out.indices) out.values.push_back(tf.at(ix));
  return out;
}

// tf * idf, then scaled to unit Euclidean norm. All-OOV documents map to
// the zero vector.
inline SparseVector tfidf_transform(const Vocabulary& v, const Document& doc) {
  auto out = count_transform(v, doc);
  for (std::size_t k = 0; k < out.nnz(); ++k) out.values[k] *= v.idf(out.indices[k]);
  const double norm = out.norm();
  if (norm > 0.0)
    for (auto& w : out.values) w /= norm;
  return out;
}

inline SparseVector tfidf_transform(const Vocabulary& v, const TokenSeq& doc) {
  return tfidf_transform(v, Document{doc});
}

}  // namespace noteworthy
