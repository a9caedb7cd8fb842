#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "rankmip/dataset.hpp"
#include "rankmip/ranking.hpp"

namespace rankmip {

// Convex-surrogate trainers over linear scorers. Callers are expected to feed
// column-scaled data (the ingestion paths map features onto [-1,1]); the loss
// evaluations are overflow-guarded regardless.
struct TrainConfig {
  int max_iters = 500;
  double step_size = 1.0;
  double grad_tol = 1e-7;  // infinity norm
  double l2_c = 0.0;       // quadratic penalty, hinge trainer only
  double p = 2.0;          // push exponent
  uint64_t seed = 0;
  bool fit_intercept = false;  // logistic only

  void validate() const {
    if (max_iters < 1) throw ValidationError("max_iters must be >= 1");
    if (!(step_size > 0.0)) throw ValidationError("step_size must be positive");
    if (!(grad_tol > 0.0)) throw ValidationError("grad_tol must be positive");
    if (l2_c < 0.0) throw ValidationError("l2_c must be non-negative");
    if (p < 1.0) throw ValidationError("push exponent must be >= 1");
  }
};

struct TrainedModel {
  LinearScorer scorer;
  double intercept = 0.0;  // only the logistic trainer may set this
  double final_loss = 0.0;
  int iterations_used = 0;
  bool converged = false;
};

// --- loss evaluations (exposed for the finite-difference checks) -----------

// sum_i ln(1 + e^{-y~ (w'x + b)}), y~ = 2y - 1
inline double logistic_loss(const Dataset& data, const std::vector<double>& w, double intercept,
                            std::vector<double>* grad_w = nullptr, double* grad_b = nullptr) {
  if (grad_w) grad_w->assign(data.dim(), 0.0);
  if (grad_b) *grad_b = 0.0;
  double loss = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const double* x = data.features.row(i);
    double f = intercept;
    for (int j = 0; j < data.dim(); ++j) f += w[j] * x[j];
    double y = data.labels[i] == 1 ? 1.0 : -1.0;
    loss += log1p_exp(-y * f);
    if (grad_w || grad_b) {
      double sig = 1.0 / (1.0 + exp_guarded(y * f));  // sigma(-y f)
      if (grad_w) {
        for (int j = 0; j < data.dim(); ++j) (*grad_w)[j] -= y * x[j] * sig;
      }
      if (grad_b) *grad_b -= y * sig;
    }
  }
  return loss;
}

// sum_{i+,k-} e^{-(s_i - s_k)}, factorized through the class sums with a
// midrange shift so both factors stay in range.
inline double exponential_pairwise_loss(const Dataset& data, const std::vector<double>& w,
                                        std::vector<double>* grad = nullptr) {
  detail::require_both_classes(data.labels);
  if (grad) grad->assign(data.dim(), 0.0);
  LinearScorer scorer(w);
  std::vector<double> s(data.n());
  for (int i = 0; i < data.n(); ++i) s[i] = scorer.score_row(data.features.row(i));
  double smin = *std::min_element(s.begin(), s.end());
  double smax = *std::max_element(s.begin(), s.end());
  double mid = 0.5 * (smin + smax);

  double pos_sum = 0.0, neg_sum = 0.0;
  std::vector<double> pos_x(data.dim(), 0.0), neg_x(data.dim(), 0.0);
  for (int i = 0; i < data.n(); ++i) {
    double e = exp_guarded(data.labels[i] == 1 ? -(s[i] - mid) : s[i] - mid);
    if (data.labels[i] == 1) {
      pos_sum += e;
      if (grad) {
        for (int j = 0; j < data.dim(); ++j) pos_x[j] += e * data.features.at(i, j);
      }
    } else {
      neg_sum += e;
      if (grad) {
        for (int j = 0; j < data.dim(); ++j) neg_x[j] += e * data.features.at(i, j);
      }
    }
  }
  if (grad) {
    for (int j = 0; j < data.dim(); ++j) (*grad)[j] = -pos_x[j] * neg_sum + pos_sum * neg_x[j];
  }
  return pos_sum * neg_sum;
}

// sum_{k-} (sum_{i+} e^{-(s_i - s_k)})^p; reduces to the exponential loss at p=1.
inline double pnorm_push_loss(const Dataset& data, const std::vector<double>& w, double p,
                              std::vector<double>* grad = nullptr) {
  detail::require_both_classes(data.labels);
  if (grad) grad->assign(data.dim(), 0.0);
  LinearScorer scorer(w);
  std::vector<double> s(data.n());
  for (int i = 0; i < data.n(); ++i) s[i] = scorer.score_row(data.features.row(i));
  double smin = *std::min_element(s.begin(), s.end());
  double smax = *std::max_element(s.begin(), s.end());
  double mid = 0.5 * (smin + smax);

  double pos_sum = 0.0;
  std::vector<double> pos_x(data.dim(), 0.0);
  for (int i = 0; i < data.n(); ++i) {
    if (data.labels[i] != 1) continue;
    double e = exp_guarded(-(s[i] - mid));
    pos_sum += e;
    for (int j = 0; j < data.dim(); ++j) pos_x[j] += e * data.features.at(i, j);
  }
  double loss = 0.0;
  for (int k = 0; k < data.n(); ++k) {
    if (data.labels[k] != 0) continue;
    double ek = exp_guarded(s[k] - mid);
    double sk = ek * pos_sum;  // the shift cancels exactly
    loss += std::pow(sk, p);
    if (grad && sk > 0.0) {
      double outer = p * std::pow(sk, p - 1.0);
      for (int j = 0; j < data.dim(); ++j) {
        double dsk = data.features.at(k, j) * sk - ek * pos_x[j];
        (*grad)[j] += outer * dsk;
      }
    }
  }
  return loss;
}

// sum_{i+,k-} max(0, 1 - (s_i - s_k)) + l2_c ||w||^2 with a subgradient.
inline double hinge_pairwise_objective(const Dataset& data, const std::vector<double>& w, double l2_c,
                                       std::vector<double>* subgrad = nullptr) {
  detail::require_both_classes(data.labels);
  if (subgrad) subgrad->assign(data.dim(), 0.0);
  LinearScorer scorer(w);
  std::vector<double> s(data.n());
  for (int i = 0; i < data.n(); ++i) s[i] = scorer.score_row(data.features.row(i));
  double loss = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    if (data.labels[i] != 1) continue;
    for (int k = 0; k < data.n(); ++k) {
      if (data.labels[k] != 0) continue;
      double margin = 1.0 - (s[i] - s[k]);
      if (margin > 0.0) {
        loss += margin;
        if (subgrad) {
          for (int j = 0; j < data.dim(); ++j) (*subgrad)[j] -= data.features.at(i, j) - data.features.at(k, j);
        }
      }
    }
  }
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  loss += l2_c * norm2;
  if (subgrad) {
    for (int j = 0; j < data.dim(); ++j) (*subgrad)[j] += 2.0 * l2_c * w[j];
  }
  return loss;
}

namespace detail {

inline double inf_norm(const std::vector<double>& v, double extra = 0.0) {
  double m = std::fabs(extra);
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

// Full-batch descent with halving line search; loss is non-increasing across
// accepted steps. Used by the three smooth trainers.
template <typename LossGrad>
TrainedModel descend(int dim, bool with_intercept, const TrainConfig& config, LossGrad&& eval) {
  std::vector<double> w(dim, 0.0), grad(dim, 0.0);
  double intercept = 0.0, grad_b = 0.0;
  TrainedModel out;
  double loss = eval(w, intercept, &grad, with_intercept ? &grad_b : nullptr);
  int iter = 0;
  for (; iter < config.max_iters; ++iter) {
    double gnorm = inf_norm(grad, with_intercept ? grad_b : 0.0);
    if (gnorm <= config.grad_tol) {
      out.converged = true;
      break;
    }
    double step = config.step_size;
    bool accepted = false;
    std::vector<double> w_try(dim);
    for (int bt = 0; bt < 60; ++bt) {
      for (int j = 0; j < dim; ++j) w_try[j] = w[j] - step * grad[j];
      double b_try = intercept - (with_intercept ? step * grad_b : 0.0);
      double loss_try = eval(w_try, b_try, nullptr, nullptr);
      if (loss_try < loss) {
        w = w_try;
        intercept = b_try;
        loss = loss_try;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // flat to machine precision near a minimum is fine; a large gradient
      // relative to the loss scale is a genuine line-search failure
      if (gnorm > 1e-4 * std::max(1.0, std::fabs(loss)))
        throw SolverError("line search failed to decrease the loss (gradient norm " +
                          std::to_string(gnorm) + ")");
      out.converged = gnorm <= config.grad_tol;
      break;
    }
    loss = eval(w, intercept, &grad, with_intercept ? &grad_b : nullptr);
  }
  out.scorer = LinearScorer(w);
  out.intercept = intercept;
  out.final_loss = loss;
  out.iterations_used = iter;
  return out;
}

}  // namespace detail

inline TrainedModel train_logistic(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw ValidationError("logistic training needs both classes");
  return detail::descend(data.dim(), config.fit_intercept, config,
                         [&](const std::vector<double>& w, double b, std::vector<double>* g, double* gb) {
                           return logistic_loss(data, w, b, g, gb);
                         });
}

// Direct minimization of the exponential pairwise loss over linear scorers.
inline TrainedModel train_exponential_pairwise(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw ValidationError("pairwise training needs both classes");
  return detail::descend(data.dim(), false, config,
                         [&](const std::vector<double>& w, double, std::vector<double>* g, double*) {
                           return exponential_pairwise_loss(data, w, g);
                         });
}

inline TrainedModel train_pnorm_push(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw ValidationError("pairwise training needs both classes");
  return detail::descend(data.dim(), false, config,
                         [&](const std::vector<double>& w, double, std::vector<double>* g, double*) {
                           return pnorm_push_loss(data, w, config.p, g);
                         });
}

// Subgradient descent with averaged iterates; returns the best averaged
// iterate seen, so the reported objective is the running minimum.
inline TrainedModel train_hinge_pairwise(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw ValidationError("pairwise training needs both classes");
  const int d = data.dim();
  std::vector<double> w(d, 0.0), avg(d, 0.0), best_w(d, 0.0), g(d, 0.0);
  double best = hinge_pairwise_objective(data, w, config.l2_c, &g);
  bool converged = false;
  int iter = 0;
  // step normalized by the quadratic term's curvature so large l2_c cannot
  // blow the iterates up
  const double step_scale = config.step_size / (1.0 + 2.0 * config.l2_c);
  for (; iter < config.max_iters; ++iter) {
    if (detail::inf_norm(g) <= config.grad_tol) {
      converged = true;
      break;
    }
    double step = step_scale / std::sqrt(iter + 1.0);
    for (int j = 0; j < d; ++j) w[j] -= step * g[j];
    for (int j = 0; j < d; ++j) avg[j] = (avg[j] * iter + w[j]) / (iter + 1.0);
    double value = hinge_pairwise_objective(data, avg, config.l2_c, nullptr);
    if (value < best) {
      best = value;
      best_w = avg;
    }
    hinge_pairwise_objective(data, w, config.l2_c, &g);
  }
  TrainedModel out;
  out.scorer = LinearScorer(best_w);
  out.final_loss = best;
  out.iterations_used = iter;
  out.converged = converged;
  return out;
}

enum class BaseMethod { Logistic, ExponentialPairwise, HingePairwise, PnormPush };

inline const char* base_method_name(BaseMethod m) {
  switch (m) {
    case BaseMethod::Logistic: return "logistic";
    case BaseMethod::ExponentialPairwise: return "exponential";
    case BaseMethod::HingePairwise: return "hinge";
    case BaseMethod::PnormPush: return "pnorm-push";
  }
  return "?";
}

inline BaseMethod parse_base_method(const std::string& s) {
  if (s == "logistic") return BaseMethod::Logistic;
  if (s == "exponential") return BaseMethod::ExponentialPairwise;
  if (s == "hinge") return BaseMethod::HingePairwise;
  if (s == "pnorm-push") return BaseMethod::PnormPush;
  throw ValidationError("unknown base method: " + s);
}

inline TrainedModel train_base(const Dataset& data, BaseMethod method, const TrainConfig& config) {
  switch (method) {
    case BaseMethod::Logistic: return train_logistic(data, config);
    case BaseMethod::ExponentialPairwise: return train_exponential_pairwise(data, config);
    case BaseMethod::HingePairwise: return train_hinge_pairwise(data, config);
    case BaseMethod::PnormPush: return train_pnorm_push(data, config);
  }
  throw ValidationError("unknown base method");
}

}  // namespace rankmip
