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
#include <exception>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/filter.hpp"
#include "noteworthy/linear.hpp"
#include "noteworthy/metrics.hpp"
#include "noteworthy/text_features.hpp"
#include "noteworthy/transcript.hpp"
#include "noteworthy/util.hpp"

namespace noteworthy {

// ---------------------------------------------------------------------------
// Text assembly

// Selected utterances' tokens, one segment per utterance, transcript order.
inline Document assemble_filtered_document(const Transcript& t, std::span<const std::size_t> indices) {
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  Document doc;
  doc.reserve(sorted.size());
  for (auto ix : sorted) {
    if (ix >= t.size()) throw ValidationError("utterance index " + std::to_string(ix) + " outside " + t.id);
    doc.push_back(tokenize(t.utterances[ix].text));
  }
  return doc;
}

inline TokenSeq flatten(const Document& doc) {
  TokenSeq out;
  for (const auto& seg : doc) out.insert(out.end(), seg.begin(), seg.end());
  return out;
}

inline TokenSeq assemble_filtered_text(const Transcript& t, std::span<const std::size_t> indices) {
  return flatten(assemble_filtered_document(t, indices));
}

// ---------------------------------------------------------------------------
// Chunk-and-pool adapter

class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;
  virtual std::size_t dim() const = 0;
  // Must accept any sequence of 1..chunk_size tokens; must be safe to call
  // concurrently.
  virtual std::vector<double> encode(std::span<const std::string> tokens) const = 0;
};

// Mean of per-token pseudo-random embeddings keyed by (token, seed): a
// stand-in for a pretrained sequence encoder.
class HashedEmbeddingEncoder : public SequenceEncoder {
 public:
  explicit HashedEmbeddingEncoder(std::size_t dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {
    if (dim_ == 0) throw ConfigError("encoder dimension must be positive");
  }
  std::size_t dim() const override { return dim_; }
  std::vector<double> encode(std::span<const std::string> tokens) const override {
    std::vector<double> out(dim_, 0.0);
    if (tokens.empty()) return out;
    for (const auto& tok : tokens) {
      const std::uint64_t key = Fnv1a().update(tok).update_u64(seed_).digest();
      for (std::size_t j = 0; j < dim_; ++j) {
        const auto bits = splitmix64(key + j * 0x9e3779b97f4a7c15ULL);
        out[j] += static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;  // uniform in [-1, 1)
      }
    }
    for (auto& v : out) v /= static_cast<double>(tokens.size());
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

class EncoderError : public Error {
 public:
  EncoderError(const std::string& what, std::size_t chunk)
      : Error("encoder failed on chunk " + std::to_string(chunk) + ": " + what, 3), chunk_(chunk) {}
  std::size_t chunk() const noexcept { return chunk_; }

 private:
  std::size_t chunk_;
};

inline constexpr std::size_t kDefaultChunkSize = 512;
inline constexpr std::size_t kDefaultTokenCap = 2040;

struct ChunkSpan {
  std::size_t begin = 0;
  std::size_t length = 0;
  friend bool operator==(const ChunkSpan&, const ChunkSpan&) = default;
};

// Consecutive chunks over the first min(n_tokens, token_cap) tokens; the
// last chunk may be short, and no empty chunk is ever produced.
inline std::vector<ChunkSpan> plan_chunks(std::size_t n_tokens, std::size_t chunk_size, std::size_t token_cap) {
  if (chunk_size == 0) throw ConfigError("chunk_size must be at least 1");
  if (token_cap < chunk_size) throw ConfigError("token_cap must be at least chunk_size");
  const std::size_t used = std::min(n_tokens, token_cap);
  std::vector<ChunkSpan> out;
  for (std::size_t b = 0; b < used; b += chunk_size) out.push_back({b, std::min(chunk_size, used - b)});
  return out;
}

// Arithmetic mean of the encoder outputs over all chunks; zero vector for
// empty input.
inline std::vector<double> chunk_and_pool(std::span<const std::string> tokens, const SequenceEncoder& encoder,
                                          std::size_t chunk_size = kDefaultChunkSize,
                                          std::size_t token_cap = kDefaultTokenCap) {
  const auto chunks = plan_chunks(tokens.size(), chunk_size, token_cap);
  std::vector<double> pooled(encoder.dim(), 0.0);
  if (chunks.empty()) return pooled;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    std::vector<double> v;
    try {
      v = encoder.encode(tokens.subspan(chunks[c].begin, chunks[c].length));
    } catch (const EncoderError&) {
      throw;
    } catch (const std::exception& e) {
      throw EncoderError(e.what(), c);
    }
    if (v.size() != pooled.size()) throw EncoderError("output dimension " + std::to_string(v.size()), c);
    for (std::size_t j = 0; j < v.size(); ++j) pooled[j] += v[j];
  }
  for (auto& v : pooled) v /= static_cast<double>(chunks.size());
  return pooled;
}

// ---------------------------------------------------------------------------
// Configuration

enum class PipelineBackend { kLogistic, kNaiveBayes, kEncoder };

inline std::string_view to_string(PipelineBackend b) {
  switch (b) {
    case PipelineBackend::kLogistic: return "logistic";
    case PipelineBackend::kNaiveBayes: return "naive_bayes";
    case PipelineBackend::kEncoder: return "encoder";
  }
  return "logistic";
}

inline PipelineBackend parse_backend(std::string_view s) {
  if (s == "logistic") return PipelineBackend::kLogistic;
  if (s == "naive_bayes") return PipelineBackend::kNaiveBayes;
  if (s == "encoder") return PipelineBackend::kEncoder;
  throw ConfigError("unknown backend \"" + std::string(s) + "\" (expected logistic, naive_bayes or encoder)");
}

struct EncoderConfig {
  std::size_t chunk_size = kDefaultChunkSize;
  std::size_t token_cap = kDefaultTokenCap;
  std::size_t dim = 64;
  std::uint64_t seed = 0;
};

struct PipelineConfig {
  Task task = Task::kDiagnosis;
  FilterStrategy strategy;
  PipelineBackend backend = PipelineBackend::kLogistic;
  std::size_t min_df = kTranscriptMinDf;
  double reg_c = kDefaultRegC;
  double nb_alpha = kDefaultNbAlpha;
  EncoderConfig encoder;
  std::size_t jobs = 1;

  void validate() const {
    if (encoder.chunk_size < 1) throw ConfigError("chunk_size must be at least 1");
    if (encoder.token_cap < encoder.chunk_size) throw ConfigError("token_cap must be at least chunk_size");
    if (!(reg_c > 0.0)) throw ConfigError("reg_c must be positive");
    if (strategy.kind == FilterStrategy::Kind::kFillToK && strategy.k < 1) throw ConfigError("K must be at least 1");
  }
};

inline nlohmann::json to_json(const PipelineConfig& c) {
  return {{"task", to_string(c.task)},
          {"strategy", to_string(c.strategy)},
          {"backend", to_string(c.backend)},
          {"min_df", c.min_df},
          {"reg_c", c.reg_c},
          {"nb_alpha", c.nb_alpha},
          {"encoder",
           {{"chunk_size", c.encoder.chunk_size},
            {"token_cap", c.encoder.token_cap},
            {"dim", c.encoder.dim},
            {"seed", c.encoder.seed}}}};
}

// Missing keys keep their defaults.
inline PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
  try {
    if (j.contains("task")) base.task = parse_task(j["task"].get<std::string>());
    if (j.contains("strategy")) base.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("backend")) base.backend = parse_backend(j["backend"].get<std::string>());
    base.min_df = j.value("min_df", base.min_df);
    base.reg_c = j.value("reg_c", base.reg_c);
    base.nb_alpha = j.value("nb_alpha", base.nb_alpha);
    if (j.contains("encoder")) {
      const auto& e = j["encoder"];
      base.encoder.chunk_size = e.value("chunk_size", base.encoder.chunk_size);
      base.encoder.token_cap = e.value("token_cap", base.encoder.token_cap);
      base.encoder.dim = e.value("dim", base.encoder.dim);
      base.encoder.seed = e.value("seed", base.encoder.seed);
    }
    base.validate();
    return base;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid pipeline config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training and scoring

struct TrainedPipeline {
  PipelineConfig config;
  Vocabulary vocabulary;  // empty for the encoder backend
  std::uint64_t vocabulary_hash = 0;
  OneVsRestModel classifier;
};

namespace detail {

inline SparseVector dense_features(std::span<const double> v) {
  SparseVector out;
  out.indices.resize(v.size());
  std::iota(out.indices.begin(), out.indices.end(), 0u);
  out.values.assign(v.begin(), v.end());
  return out;
}

inline std::unique_ptr<SequenceEncoder> default_encoder(const PipelineConfig& cfg) {
  return std::make_unique<HashedEmbeddingEncoder>(cfg.encoder.dim, cfg.encoder.seed);
}

inline std::vector<Document> filtered_documents(const PipelineConfig& cfg, const FilterContext& ctx,
                                                std::span<const Transcript> corpus) {
  std::vector<Document> docs(corpus.size());
  parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
    docs[i] = assemble_filtered_document(corpus[i], apply_filter(cfg.strategy, ctx, corpus[i]));
  });
  return docs;
}

inline std::vector<SparseVector> featurize(const PipelineConfig& cfg, const Vocabulary& vocab,
                                           const SequenceEncoder* encoder, std::span<const Document> docs) {
  std::vector<SparseVector> x(docs.size());
  parallel_for(docs.size(), cfg.jobs, [&](std::size_t i) {
    switch (cfg.backend) {
      case PipelineBackend::kLogistic: x[i] = tfidf_transform(vocab, docs[i]); break;
      case PipelineBackend::kNaiveBayes: x[i] = count_transform(vocab, docs[i]); break;
      case PipelineBackend::kEncoder:
        x[i] = dense_features(chunk_and_pool(flatten(docs[i]), *encoder, cfg.encoder.chunk_size, cfg.encoder.token_cap));
        break;
    }
  });
  return x;
}

}  // namespace detail

// Filters, assembles and featurizes each training transcript, then fits the
// one-vs-rest classifier. `labels` rows are matched by transcript id.
inline TrainedPipeline train_pipeline(const PipelineConfig& cfg, std::span<const Transcript> train,
                                      const LabelMatrix& labels, const FilterContext& ctx = {},
                                      const SequenceEncoder* encoder = nullptr) {
  cfg.validate();
  if (labels.space.task != cfg.task) throw ConfigError("label matrix task differs from pipeline task");
  std::vector<std::string> ids;
  ids.reserve(train.size());
  for (const auto& t : train) ids.push_back(t.id);
  const auto y = select_rows(labels, ids);

  TrainedPipeline out;
  out.config = cfg;
  const auto docs = detail::filtered_documents(cfg, ctx, train);
  std::unique_ptr<SequenceEncoder> owned;
  std::size_t dim = 0;
  if (cfg.backend == PipelineBackend::kEncoder) {
    if (!encoder) encoder = (owned = detail::default_encoder(cfg)).get();
    dim = encoder->dim();
  } else {
    out.vocabulary = fit_vocabulary(docs, FitOptions{cfg.min_df, true});
    dim = out.vocabulary.size();
  }
  out.vocabulary_hash = out.vocabulary.fingerprint();
  const auto x = detail::featurize(cfg, out.vocabulary, encoder, docs);
  OvrOptions opts;
  opts.backend = cfg.backend == PipelineBackend::kNaiveBayes ? Backend::kNaiveBayes : Backend::kLogistic;
  opts.logistic.reg_c = cfg.reg_c;
  opts.nb_alpha = cfg.nb_alpha;
  opts.jobs = cfg.jobs;
  out.classifier = train_ovr(x, y, dim, opts);
  return out;
}

// Per-example, per-label probabilities. Empty filtered text is scored by
// the bias terms alone.
inline ScoreMatrix run_pipeline(const PipelineConfig& cfg, const TrainedPipeline& models,
                                std::span<const Transcript> corpus, const FilterContext& ctx = {},
                                const SequenceEncoder* encoder = nullptr) {
  cfg.validate();
  if (cfg.task != models.config.task || cfg.backend != models.config.backend ||
      !(cfg.strategy == models.config.strategy))
    throw ConfigError("pipeline config does not match the trained models");
  if (models.vocabulary.fingerprint() != models.vocabulary_hash)
    throw ConfigError("vocabulary hash mismatch between features and classifier");
  std::unique_ptr<SequenceEncoder> owned;
  if (cfg.backend == PipelineBackend::kEncoder) {
    if (!encoder) encoder = (owned = detail::default_encoder(models.config)).get();
    if (encoder->dim() != models.classifier.dim) throw ConfigError("encoder dimension differs from classifier");
  } else if (models.vocabulary.size() != models.classifier.dim) {
    throw ConfigError("vocabulary size differs from classifier dimension");
  }
  const auto docs = detail::filtered_documents(cfg, ctx, corpus);
  const auto x = detail::featurize(cfg, models.vocabulary, encoder, docs);
  ScoreMatrix s{{}, models.classifier.space, std::vector<double>(corpus.size() * models.classifier.space.size())};
  for (const auto& t : corpus) s.example_ids.push_back(t.id);
  parallel_for(corpus.size(), cfg.jobs, [&](std::size_t i) {
    for (std::size_t l = 0; l < s.cols(); ++l) s.at(i, l) = models.classifier.predict(l, x[i]);
  });
  return s;
}

inline nlohmann::json to_json(const TrainedPipeline& p) {
  auto classifier = to_json(p.classifier);
  classifier["vocabulary_hash"] = p.vocabulary_hash;
  return {{"config", to_json(p.config)},
          {"vocabulary", p.vocabulary.to_json()},
          {"vocabulary_hash", p.vocabulary_hash},
          {"classifier", std::move(classifier)}};
}

inline TrainedPipeline trained_pipeline_from_json(const nlohmann::json& j) {
  try {
    TrainedPipeline p;
    p.config = pipeline_config_from_json(j.at("config"));
    p.vocabulary = Vocabulary::from_json(j.at("vocabulary"));
    p.vocabulary_hash = j.at("vocabulary_hash").get<std::uint64_t>();
    p.classifier = ovr_from_json(j.at("classifier"));
    if (j.at("classifier").value("vocabulary_hash", p.vocabulary_hash) != p.vocabulary_hash)
      throw ConfigError("classifier was trained against a different vocabulary");
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid model file: ") + e.what(), 0);
  }
}

// Picks reg_c from `grid` by validation micro-F1 (first best wins).
inline double select_reg_c(PipelineConfig cfg, std::span<const Transcript> train, std::span<const Transcript> validation,
                           const LabelMatrix& labels, const FilterContext& ctx, std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("empty reg_c grid");
  double best_c = grid.front(), best = -1.0;
  for (double c : grid) {
    cfg.reg_c = c;
    const auto models = train_pipeline(cfg, train, labels, ctx);
    const auto scores = run_pipeline(cfg, models, validation, ctx);
    const double f1 = evaluate(scores, labels).aggregate.at("micro_f1");
    if (f1 > best) {
      best = f1;
      best_c = c;
    }
  }
  return best_c;
}

// ---------------------------------------------------------------------------
// Input-agnostic baselines

enum class AgnosticMetric { kAccuracy, kMacroF1, kMicroF1, kMacroAuc, kMicroAuc, kPrecisionAt1 };

inline AgnosticMetric parse_agnostic_metric(std::string_view s) {
  if (s == "accuracy") return AgnosticMetric::kAccuracy;
  if (s == "macro_f1") return AgnosticMetric::kMacroF1;
  if (s == "micro_f1") return AgnosticMetric::kMicroF1;
  if (s == "macro_auc") return AgnosticMetric::kMacroAuc;
  if (s == "micro_auc") return AgnosticMetric::kMicroAuc;
  if (s == "precision_at_1") return AgnosticMetric::kPrecisionAt1;
  throw ConfigError("unknown metric \"" + std::string(s) + "\"");
}

inline std::string_view to_string(AgnosticMetric m) {
  switch (m) {
    case AgnosticMetric::kAccuracy: return "accuracy";
    case AgnosticMetric::kMacroF1: return "macro_f1";
    case AgnosticMetric::kMicroF1: return "micro_f1";
    case AgnosticMetric::kMacroAuc: return "macro_auc";
    case AgnosticMetric::kMicroAuc: return "micro_auc";
    case AgnosticMetric::kPrecisionAt1: return "precision_at_1";
  }
  return "accuracy";
}

// Labels predicted positive by the micro-F1-optimal constant predictor: the
// prevalence-sorted prefix S maximizing 2 P_S / (|S| + T).
inline std::vector<std::size_t> micro_f1_optimal_prefix(std::span<const double> prevalence) {
  std::vector<std::size_t> order(prevalence.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prevalence[a] > prevalence[b]; });
  const double total = std::accumulate(prevalence.begin(), prevalence.end(), 0.0);
  double best = 0.0, mass = 0.0;
  std::size_t best_k = 0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    mass += prevalence[order[k - 1]];
    const double f1 = 2.0 * mass / (static_cast<double>(k) + total);
    if (f1 > best) {
      best = f1;
      best_k = k;
    }
  }
  order.resize(best_k);
  std::sort(order.begin(), order.end());
  return order;
}

// The best constant predictor for `metric` given training prevalences.
// Binary metrics yield 0/1 scores; ranking metrics yield the prevalences.
inline ScoreMatrix input_agnostic_predict(const LabelSpace& space, AgnosticMetric metric,
                                          std::span<const std::string> example_ids) {
  validate(space);
  std::vector<double> row(space.size(), 0.0);
  switch (metric) {
    case AgnosticMetric::kAccuracy:
      for (std::size_t l = 0; l < row.size(); ++l) row[l] = space.train_prevalence[l] > 0.5 ? 1.0 : 0.0;
      break;
    case AgnosticMetric::kMacroF1: std::fill(row.begin(), row.end(), 1.0); break;
    case AgnosticMetric::kMicroF1:
      for (auto l : micro_f1_optimal_prefix(space.train_prevalence)) row[l] = 1.0;
      break;
    case AgnosticMetric::kMacroAuc:
    case AgnosticMetric::kMicroAuc:
    case AgnosticMetric::kPrecisionAt1: row = space.train_prevalence; break;
  }
  ScoreMatrix s{{example_ids.begin(), example_ids.end()}, space, {}};
  s.probs.reserve(example_ids.size() * row.size());
  for (std::size_t i = 0; i < example_ids.size(); ++i) s.probs.insert(s.probs.end(), row.begin(), row.end());
  return s;
}

inline ScoreMatrix input_agnostic_predict(const LabelSpace& space, AgnosticMetric metric, std::size_t n_examples) {
  std::vector<std::string> ids(n_examples);
  for (std::size_t i = 0; i < n_examples; ++i) ids[i] = std::to_string(i);
  return input_agnostic_predict(space, metric, ids);
}

// round(prevalence * n) positives per label in the leading rows. Against
// constant scores only the per-label counts matter.
inline LabelMatrix prevalence_truth(const LabelSpace& space, std::size_t n) {
  validate(space);
  LabelMatrix m{{}, space, std::vector<std::uint8_t>(n * space.size(), 0)};
  for (std::size_t i = 0; i < n; ++i) m.example_ids.push_back(std::to_string(i));
  for (std::size_t l = 0; l < space.size(); ++l) {
    const auto k = static_cast<std::size_t>(std::llround(space.train_prevalence[l] * static_cast<double>(n)));
    for (std::size_t i = 0; i < std::min(k, n); ++i) m.at(i, l) = 1;
  }
  return m;
}

// Score of the best constant predictor for `metric` on prevalence_truth().
// `ranking` supplies the prevalences the predictor was fit on.
inline double input_agnostic_score(const LabelSpace& truth_space, const LabelSpace& ranking, AgnosticMetric metric,
                                   std::size_t n) {
  if (ranking.labels != truth_space.labels) throw ValidationError("ranking and truth label spaces differ");
  const auto truth = prevalence_truth(truth_space, n);
  auto scores = input_agnostic_predict(ranking, metric, truth.example_ids);
  scores.space = truth_space;
  return evaluate(scores, truth).aggregate.at(std::string(to_string(metric)));
}

}  // namespace noteworthy
