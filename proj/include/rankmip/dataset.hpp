#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rankmip/common.hpp"

namespace rankmip {

// Linear scoring function f(x) = w'x.
struct LinearScorer {
  std::vector<double> weights;

  LinearScorer() = default;
  explicit LinearScorer(std::vector<double> w) : weights(std::move(w)) {
    for (double v : weights) {
      if (!std::isfinite(v)) throw ValidationError("scorer weight not finite");
    }
  }

  int dim() const { return static_cast<int>(weights.size()); }

  double score_row(const double* x) const {
    double s = 0.0;
    for (int j = 0; j < dim(); ++j) s += weights[j] * x[j];
    return s;
  }

  // Count of weights with magnitude above tol (default matches the zero
  // classification used throughout).
  int l0_norm(double tol = 1e-12) const {
    int c = 0;
    for (double v : weights) {
      if (std::fabs(v) > tol) ++c;
    }
    return c;
  }
};

// Per-column affine map onto [-1, 1], kept so models can be applied to raw data.
struct ColumnScaling {
  std::vector<double> lo;
  std::vector<double> hi;

  double forward(double v, int j) const {
    double span = hi[j] - lo[j];
    if (span <= 0.0) return 0.0;  // constant column maps to 0
    return 2.0 * (v - lo[j]) / span - 1.0;
  }

  double inverse(double v, int j) const {
    double span = hi[j] - lo[j];
    if (span <= 0.0) return lo[j];
    return lo[j] + (v + 1.0) * span / 2.0;
  }
};

// Labeled observations: feature matrix plus binary labels.
class Dataset {
 public:
  Matrix features;
  std::vector<int> labels;  // 0 or 1
  std::vector<std::string> feature_names;
  std::optional<ColumnScaling> scaling;  // set when columns were mapped to [-1,1]

  Dataset() = default;

  Dataset(Matrix x, std::vector<int> y, std::vector<std::string> names = {})
      : features(std::move(x)), labels(std::move(y)), feature_names(std::move(names)) {
    validate();
  }

  void validate() const {
    if (features.rows < 1 || features.cols < 1) throw ValidationError("dataset must have n >= 1 and d >= 1");
    if (static_cast<int>(labels.size()) != features.rows) throw ValidationError("label count != row count");
    if (!feature_names.empty() && static_cast<int>(feature_names.size()) != features.cols)
      throw ValidationError("feature name count != column count");
    for (double v : features.data) {
      if (!std::isfinite(v)) throw ValidationError("non-finite feature value");
    }
    for (int y : labels) {
      if (y != 0 && y != 1) throw ValidationError("label must be 0 or 1, got " + std::to_string(y));
    }
  }

  int n() const { return features.rows; }
  int dim() const { return features.cols; }

  std::vector<int> positives() const { return indices_with_label(1); }
  std::vector<int> negatives() const { return indices_with_label(0); }

  int num_positives() const { return static_cast<int>(std::count(labels.begin(), labels.end(), 1)); }
  int num_negatives() const { return n() - num_positives(); }

  bool has_both_classes() const {
    int p = num_positives();
    return p > 0 && p < n();
  }

  // M = max_{i,j} |x_ij| (Lemma-2 style bound on feature magnitude).
  double max_abs_feature() const {
    double m = 0.0;
    for (double v : features.data) m = std::max(m, std::fabs(v));
    return m;
  }

  // Pairs (i, k), i < k, with exactly equal feature rows.
  std::vector<std::pair<int, int>> duplicate_row_pairs() const {
    std::vector<int> order(n());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      for (int j = 0; j < dim(); ++j) {
        if (features.at(a, j) != features.at(b, j)) return features.at(a, j) < features.at(b, j);
      }
      return a < b;
    });
    std::vector<std::pair<int, int>> out;
    for (size_t s = 0; s < order.size(); ++s) {
      for (size_t t = s + 1; t < order.size(); ++t) {
        if (!rows_equal(order[s], order[t])) break;
        out.emplace_back(std::min(order[s], order[t]), std::max(order[s], order[t]));
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  bool rows_equal(int a, int b) const {
    for (int j = 0; j < dim(); ++j) {
      if (features.at(a, j) != features.at(b, j)) return false;
    }
    return true;
  }

  Dataset subset(const std::vector<int>& idx) const {
    Matrix x(static_cast<int>(idx.size()), dim());
    std::vector<int> y(idx.size());
    for (size_t r = 0; r < idx.size(); ++r) {
      for (int j = 0; j < dim(); ++j) x.at(static_cast<int>(r), j) = features.at(idx[r], j);
      y[r] = labels[idx[r]];
    }
    Dataset d(std::move(x), std::move(y), feature_names);
    d.scaling = scaling;
    return d;
  }

  // Map every column onto [-1, 1] and remember the transform.
  Dataset scaled_to_unit() const {
    ColumnScaling sc;
    sc.lo.resize(dim());
    sc.hi.resize(dim());
    for (int j = 0; j < dim(); ++j) {
      double lo = kInf, hi = -kInf;
      for (int i = 0; i < n(); ++i) {
        lo = std::min(lo, features.at(i, j));
        hi = std::max(hi, features.at(i, j));
      }
      sc.lo[j] = lo;
      sc.hi[j] = hi;
    }
    Matrix x(n(), dim());
    for (int i = 0; i < n(); ++i) {
      for (int j = 0; j < dim(); ++j) x.at(i, j) = sc.forward(features.at(i, j), j);
    }
    Dataset d(std::move(x), labels, feature_names);
    d.scaling = sc;
    return d;
  }

  Dataset unscaled() const {
    if (!scaling) return *this;
    Matrix x(n(), dim());
    for (int i = 0; i < n(); ++i) {
      for (int j = 0; j < dim(); ++j) x.at(i, j) = scaling->inverse(features.at(i, j), j);
    }
    return Dataset(std::move(x), labels, feature_names);
  }

 private:
  std::vector<int> indices_with_label(int y) const {
    std::vector<int> out;
    for (int i = 0; i < n(); ++i) {
      if (labels[i] == y) out.push_back(i);
    }
    return out;
  }
};

}  // namespace rankmip
