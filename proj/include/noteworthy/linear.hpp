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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "noteworthy/annotation.hpp"
#include "noteworthy/error.hpp"
#include "noteworthy/text_features.hpp"
#include "noteworthy/util.hpp"

namespace noteworthy {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double dot(std::span<const double> w, const SparseVector& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.nnz(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

inline constexpr double kDefaultRegC = 1.0;
inline constexpr double kPriorLogOddsClip = 15.0;

struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double reg_c = kDefaultRegC;
  std::size_t iterations = 0;
  bool converged = true;
  bool constant = false;  // prior-only model from single-class targets

  std::size_t dim() const { return weights.size(); }
  double decision(const SparseVector& x) const { return dot(weights, x) + bias; }
};

inline double predict_proba(const LogisticModel& m, const SparseVector& x) { return sigmoid(m.decision(x)); }

// Sum of logistic losses plus ||w||^2 / (2 C); the bias is not penalized.
// Parameters are laid out as [w_0 .. w_{d-1}, bias].
class LogisticObjective {
 public:
  LogisticObjective(std::span<const SparseVector> x, std::span<const std::uint8_t> y, double reg_c, std::size_t dim)
      : x_(x), y_(y), reg_c_(reg_c), dim_(dim) {}

  std::size_t n_params() const { return dim_ + 1; }

  double value(std::span<const double> p) const {
    double f = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) f += softplus(-sign(i) * margin(p, i));
    return f + penalty(p);
  }

  // Value and gradient; also caches per-example curvature for hessian_times().
  double value_and_gradient(std::span<const double> p, std::span<double> grad) {
    std::fill(grad.begin(), grad.end(), 0.0);
    curvature_.assign(x_.size(), 0.0);
    double f = 0.0;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double z = margin(p, i);
      const double s = sign(i);
      f += softplus(-s * z);
      // d/dz softplus(-s z) = -s * sigmoid(-s z)
      const double coef = -s * sigmoid(-s * z);
      const auto& xi = x_[i];
      for (std::size_t k = 0; k < xi.nnz(); ++k) grad[xi.indices[k]] += coef * xi.values[k];
      grad[dim_] += coef;
      const double e = std::exp(-std::abs(z));
      curvature_[i] = e / ((1.0 + e) * (1.0 + e));
    }
    for (std::size_t j = 0; j < dim_; ++j) grad[j] += p[j] / reg_c_;
    return f + penalty(p);
  }

  // Hessian-vector product at the point of the last value_and_gradient call.
  void hessian_times(std::span<const double> v, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const auto& xi = x_[i];
      double xv = v[dim_];
      for (std::size_t k = 0; k < xi.nnz(); ++k) xv += v[xi.indices[k]] * xi.values[k];
      const double c = curvature_[i] * xv;
      for (std::size_t k = 0; k < xi.nnz(); ++k) out[xi.indices[k]] += c * xi.values[k];
      out[dim_] += c;
    }
    for (std::size_t j = 0; j < dim_; ++j) out[j] += v[j] / reg_c_;
  }

 private:
  double sign(std::size_t i) const { return y_[i] ? 1.0 : -1.0; }
  double margin(std::span<const double> p, std::size_t i) const { return dot(p.first(dim_), x_[i]) + p[dim_]; }
  double penalty(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) s += p[j] * p[j];
    return s / (2.0 * reg_c_);
  }

  std::span<const SparseVector> x_;
  std::span<const std::uint8_t> y_;
  double reg_c_;
  std::size_t dim_;
  std::vector<double> curvature_;
};

struct LogisticOptions {
  double reg_c = kDefaultRegC;
  double gradient_tolerance = 1e-6;  // on the infinity norm
  std::size_t max_iterations = 1000;
  std::optional<std::vector<double>> init;  // [w..., bias]
};

namespace detail {

inline double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void check_training_inputs(std::span<const SparseVector> x, std::size_t n_targets, std::size_t dim) {
  if (x.size() != n_targets)
    throw TrainError("feature rows (" + std::to_string(x.size()) + ") and targets (" + std::to_string(n_targets) +
                     ") differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].indices.size() != x[i].values.size()) throw TrainError("malformed sparse row " + std::to_string(i));
    for (std::size_t k = 0; k < x[i].nnz(); ++k) {
      if (x[i].indices[k] >= dim)
        throw TrainError("row " + std::to_string(i) + " has feature index " + std::to_string(x[i].indices[k]) +
                         " beyond dimension " + std::to_string(dim));
      if (!std::isfinite(x[i].values[k])) throw TrainError("row " + std::to_string(i) + " has a non-finite feature");
    }
  }
}

}  // namespace detail

// Constant model predicting the clipped log-odds of the observed class.
inline LogisticModel prior_model(std::span<const std::uint8_t> y, std::size_t dim, double reg_c) {
  std::size_t pos = 0;
  for (auto v : y) pos += v ? 1 : 0;
  double log_odds = 0.0;
  if (pos == 0)
    log_odds = -kPriorLogOddsClip;
  else if (pos == y.size())
    log_odds = kPriorLogOddsClip;
  else
    log_odds = std::log(static_cast<double>(pos) / static_cast<double>(y.size() - pos));
  LogisticModel m;
  m.weights.assign(dim, 0.0);
  m.bias = std::clamp(log_odds, -kPriorLogOddsClip, kPriorLogOddsClip);
  m.reg_c = reg_c;
  m.constant = true;
  return m;
}

// L2-regularized binary logistic regression, solved by truncated Newton
// (conjugate-gradient inner solve, backtracking line search) until the
// gradient infinity norm reaches the tolerance.
inline LogisticModel train_logistic(std::span<const SparseVector> x, std::span<const std::uint8_t> y, std::size_t dim,
                                    const LogisticOptions& opts = {}) {
  detail::check_training_inputs(x, y.size(), dim);
  if (y.size() < 2) throw TrainError("logistic regression needs at least two examples");
  if (!(opts.reg_c > 0.0)) throw TrainError("reg_c must be positive");
  const auto pos = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](auto v) { return v != 0; }));
  if (pos == 0 || pos == y.size()) return prior_model(y, dim, opts.reg_c);

  LogisticObjective obj(x, y, opts.reg_c, dim);
  const std::size_t n = obj.n_params();
  std::vector<double> p(n, 0.0);
  if (opts.init) {
    if (opts.init->size() != n) throw TrainError("initial parameter vector has the wrong dimension");
    p = *opts.init;
  }
  std::vector<double> g(n), d(n), r(n), q(n), hq(n), trial(n), g_trial(n);
  double f = obj.value_and_gradient(p, g);

  LogisticModel m;
  m.reg_c = opts.reg_c;
  m.converged = false;
  std::size_t iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const double gnorm = detail::inf_norm(g);
    if (gnorm <= opts.gradient_tolerance) {
      m.converged = true;
      break;
    }
    // Inner CG on H d = -g.
    std::fill(d.begin(), d.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) r[i] = -g[i];
    q = r;
    double rr = detail::dot(r, r);
    const double g2 = std::sqrt(rr);
    const double cg_tol = std::min(0.5, std::sqrt(g2)) * g2;
    for (std::size_t k = 0; k < std::max<std::size_t>(n, 10) && std::sqrt(rr) > cg_tol; ++k) {
      obj.hessian_times(q, hq);
      const double qhq = detail::dot(q, hq);
      if (qhq <= 0.0) break;
      const double alpha = rr / qhq;
      for (std::size_t i = 0; i < n; ++i) {
        d[i] += alpha * q[i];
        r[i] -= alpha * hq[i];
      }
      const double rr_next = detail::dot(r, r);
      const double beta = rr_next / rr;
      rr = rr_next;
      for (std::size_t i = 0; i < n; ++i) q[i] = r[i] + beta * q[i];
    }
    double slope = detail::dot(g, d);
    if (!(slope < 0.0)) {
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      slope = -detail::dot(g, g);
    }
    // Backtracking; near the optimum the decrease can fall below rounding
    // of f, so a step that does not increase f but shrinks the gradient is
    // also accepted.
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = p[i] + step * d[i];
      const double f_trial = obj.value_and_gradient(trial, g_trial);
      const bool armijo = f_trial <= f + 1e-4 * step * slope;
      const bool flat = f_trial <= f + 1e-12 * std::abs(f) && detail::inf_norm(g_trial) < gnorm;
      if (armijo || flat) {
        p.swap(trial);
        g.swap(g_trial);
        f = f_trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      obj.value_and_gradient(p, g);
      break;
    }
  }
  if (!m.converged && detail::inf_norm(g) <= opts.gradient_tolerance) m.converged = true;
  m.iterations = iter;
  m.bias = p[dim];
  p.resize(dim);
  m.weights = std::move(p);
  return m;
}

// ---------------------------------------------------------------------------
// Multinomial naive Bayes (binary, per label)

inline constexpr double kDefaultNbAlpha = 1.0;

struct NaiveBayesModel {
  std::array<double, 2> log_prior{};                 // [negative, positive]
  std::array<std::vector<double>, 2> log_likelihood;  // per class, per feature

  std::size_t dim() const { return log_likelihood[0].size(); }

  // P(negative | x), P(positive | x); sums to one.
  std::array<double, 2> posterior(const SparseVector& x) const {
    std::array<double, 2> joint = log_prior;
    for (int c = 0; c < 2; ++c) joint[c] += dot(log_likelihood[c], x);
    const double mx = std::max(joint[0], joint[1]);
    const double z = mx + std::log(std::exp(joint[0] - mx) + std::exp(joint[1] - mx));
    return {std::exp(joint[0] - z), std::exp(joint[1] - z)};
  }
};

inline double predict_proba(const NaiveBayesModel& m, const SparseVector& x) { return m.posterior(x)[1]; }

// Trained on raw term counts with add-alpha smoothing. Single-class targets
// give the same clipped constant prior as the logistic backend.
inline NaiveBayesModel train_naive_bayes(std::span<const SparseVector> x, std::span<const std::uint8_t> y,
                                         std::size_t dim, double alpha = kDefaultNbAlpha) {
  detail::check_training_inputs(x, y.size(), dim);
  if (y.empty()) throw TrainError("naive Bayes needs at least one example");
  NaiveBayesModel m;
  std::array<double, 2> docs{0.0, 0.0};
  std::array<std::vector<double>, 2> counts{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int c = y[i] ? 1 : 0;
    docs[c] += 1.0;
    for (std::size_t k = 0; k < x[i].nnz(); ++k) {
      if (!(x[i].values[k] >= 0.0)) throw TrainError("naive Bayes needs non-negative feature values");
      counts[c][x[i].indices[k]] += x[i].values[k];
    }
  }
  if (docs[0] == 0.0 || docs[1] == 0.0) {
    const double b = docs[1] == 0.0 ? -kPriorLogOddsClip : kPriorLogOddsClip;
    m.log_prior = {std::log(sigmoid(-b)), std::log(sigmoid(b))};
    const double uniform = dim ? -std::log(static_cast<double>(dim)) : 0.0;
    m.log_likelihood = {std::vector<double>(dim, uniform), std::vector<double>(dim, uniform)};
    return m;
  }
  const double total = docs[0] + docs[1];
  for (int c = 0; c < 2; ++c) {
    m.log_prior[c] = std::log(docs[c] / total);
    double mass = 0.0;
    for (double v : counts[c]) mass += v;
    const double denom = mass + alpha * static_cast<double>(dim);
    m.log_likelihood[c].resize(dim);
    for (std::size_t j = 0; j < dim; ++j) m.log_likelihood[c][j] = std::log((counts[c][j] + alpha) / denom);
  }
  return m;
}

// ---------------------------------------------------------------------------
// One-vs-rest

enum class Backend { kLogistic, kNaiveBayes };

inline std::string_view to_string(Backend b) { return b == Backend::kLogistic ? "logistic" : "naive_bayes"; }

struct OneVsRestModel {
  LabelSpace space;
  Backend backend = Backend::kLogistic;
  std::size_t dim = 0;
  std::vector<LogisticModel> logistic;
  std::vector<NaiveBayesModel> naive_bayes;

  double predict(std::size_t label, const SparseVector& x) const {
    return backend == Backend::kLogistic ? predict_proba(logistic[label], x) : predict_proba(naive_bayes[label], x);
  }
  std::vector<double> predict(const SparseVector& x) const {
    std::vector<double> out(space.size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = predict(l, x);
    return out;
  }
};

struct OvrOptions {
  Backend backend = Backend::kLogistic;
  LogisticOptions logistic;
  double nb_alpha = kDefaultNbAlpha;
  std::size_t jobs = 1;
};

// One independent binary model per label column. Rows of `x` must be the
// rows of `y` in order (TF-IDF for logistic, raw counts for naive Bayes).
inline OneVsRestModel train_ovr(std::span<const SparseVector> x, const LabelMatrix& y, std::size_t dim,
                                const OvrOptions& opts = {}) {
  if (x.size() != y.rows())
    throw TrainError("feature rows (" + std::to_string(x.size()) + ") and label rows (" + std::to_string(y.rows()) +
                     ") differ");
  OneVsRestModel m{y.space, opts.backend, dim, {}, {}};
  const std::size_t labels = y.cols();
  if (opts.backend == Backend::kLogistic)
    m.logistic.resize(labels);
  else
    m.naive_bayes.resize(labels);
  parallel_for(labels, opts.jobs, [&](std::size_t l) {
    std::vector<std::uint8_t> col(y.rows());
    for (std::size_t i = 0; i < y.rows(); ++i) col[i] = y.at(i, l);
    if (opts.backend == Backend::kLogistic)
      m.logistic[l] = train_logistic(x, col, dim, opts.logistic);
    else
      m.naive_bayes[l] = train_naive_bayes(x, col, dim, opts.nb_alpha);
  });
  return m;
}

inline nlohmann::json to_json(const LogisticModel& m) {
  return {{"weights", m.weights}, {"bias", m.bias},           {"reg_c", m.reg_c},
          {"iterations", m.iterations}, {"converged", m.converged}, {"constant", m.constant}};
}

inline LogisticModel logistic_model_from_json(const nlohmann::json& j) {
  LogisticModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.reg_c = j.at("reg_c").get<double>();
  m.iterations = j.value("iterations", std::size_t{0});
  m.converged = j.value("converged", true);
  m.constant = j.value("constant", false);
  return m;
}

inline nlohmann::json to_json(const NaiveBayesModel& m) {
  return {{"log_prior", m.log_prior}, {"log_likelihood", m.log_likelihood}};
}

inline NaiveBayesModel naive_bayes_from_json(const nlohmann::json& j) {
  NaiveBayesModel m;
  m.log_prior = j.at("log_prior").get<std::array<double, 2>>();
  m.log_likelihood = j.at("log_likelihood").get<std::array<std::vector<double>, 2>>();
  return m;
}

inline nlohmann::json to_json(const OneVsRestModel& m) {
  nlohmann::json models = nlohmann::json::array();
  if (m.backend == Backend::kLogistic)
    for (const auto& lm : m.logistic) models.push_back(to_json(lm));
  else
    for (const auto& nb : m.naive_bayes) models.push_back(to_json(nb));
  return {{"backend", to_string(m.backend)}, {"dim", m.dim}, {"label_space", to_json(m.space)}, {"models", models}};
}

inline OneVsRestModel ovr_from_json(const nlohmann::json& j) {
  try {
    OneVsRestModel m;
    const auto backend = j.at("backend").get<std::string>();
    if (backend == "logistic")
      m.backend = Backend::kLogistic;
    else if (backend == "naive_bayes")
      m.backend = Backend::kNaiveBayes;
    else
      throw ParseError("unknown backend \"" + backend + "\"", 0);
    m.dim = j.at("dim").get<std::size_t>();
    m.space = label_space_from_json(j.at("label_space"));
    for (const auto& e : j.at("models")) {
      if (m.backend == Backend::kLogistic)
        m.logistic.push_back(logistic_model_from_json(e));
      else
        m.naive_bayes.push_back(naive_bayes_from_json(e));
    }
    const auto count = m.backend == Backend::kLogistic ? m.logistic.size() : m.naive_bayes.size();
    if (count != m.space.size()) throw ParseError("model count does not match label space", 0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid one-vs-rest model: ") + e.what(), 0);
  }
}

}  // namespace noteworthy
