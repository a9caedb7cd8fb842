#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "rankmip/common.hpp"

namespace rankmip {

// Non-decreasing, non-negative rank weights a_1..a_n together with the
// increments a~_l = a_l - a_{l-1} (a_0 = 0) and the support
// S_r = { l >= 2 : a~_l > 0 } used by the MIP objectives.
//
// Ranks are bottom-indexed: l = n is the top of the list.
class RankWeightVector {
 public:
  RankWeightVector() = default;

  static RankWeightVector from_values(std::vector<double> a) {
    RankWeightVector w;
    w.a_ = std::move(a);
    if (w.a_.empty()) throw ValidationError("rank weights must be non-empty");
    double prev = 0.0;
    for (size_t i = 0; i < w.a_.size(); ++i) {
      double v = w.a_[i];
      if (!std::isfinite(v)) throw ValidationError("rank weight not finite");
      if (v < 0.0) throw ValidationError("rank weights must be non-negative");
      if (v + 1e-15 < prev) throw ValidationError("rank weights must be non-decreasing");
      w.a_tilde_.push_back(v - prev);
      prev = v;
    }
    for (int l = 2; l <= w.n(); ++l) {
      if (w.a_tilde_[l - 1] > 0.0) w.support_.push_back(l);
    }
    return w;
  }

  // a_l = l: Wilcoxon rank sum.
  static RankWeightVector wrs(int n) {
    std::vector<double> a(n);
    for (int l = 1; l <= n; ++l) a[l - 1] = l;
    return from_values(std::move(a));
  }

  // a_l = 1[l = n]: winner takes all.
  static RankWeightVector wta(int n) {
    std::vector<double> a(n, 0.0);
    a[n - 1] = 1.0;
    return from_values(std::move(a));
  }

  // a_l = 1 / (n - l + 1): mean reciprocal rank.
  static RankWeightVector mrr(int n) {
    std::vector<double> a(n);
    for (int l = 1; l <= n; ++l) a[l - 1] = 1.0 / (n - l + 1);
    return from_values(std::move(a));
  }

  // a_l = 1 / log2(n - l + 2): discounted cumulative gain.
  static RankWeightVector dcg(int n) {
    std::vector<double> a(n);
    for (int l = 1; l <= n; ++l) a[l - 1] = 1.0 / std::log2(static_cast<double>(n - l + 2));
    return from_values(std::move(a));
  }

  // DCG truncated so only the top k list positions contribute.
  static RankWeightVector dcg_top(int n, int k) {
    check_top_k(n, k);
    std::vector<double> a(n, 0.0);
    for (int l = n - k + 1; l <= n; ++l) a[l - 1] = 1.0 / std::log2(static_cast<double>(n - l + 2));
    return from_values(std::move(a));
  }

  // Raw thresholded DCG: a_l = 1[l >= min_rank] / log2(n - l + 2).
  static RankWeightVector dcg_min_rank(int n, int min_rank) {
    check_min_rank(n, min_rank);
    std::vector<double> a(n, 0.0);
    for (int l = min_rank; l <= n; ++l) a[l - 1] = 1.0 / std::log2(static_cast<double>(n - l + 2));
    return from_values(std::move(a));
  }

  // Partial WRS where only the top k list positions contribute.
  static RankWeightVector partial_auc_top(int n, int k) {
    check_top_k(n, k);
    std::vector<double> a(n, 0.0);
    for (int l = n - k + 1; l <= n; ++l) a[l - 1] = l;
    return from_values(std::move(a));
  }

  // Raw thresholded WRS: a_l = l * 1[l >= min_rank].
  static RankWeightVector partial_auc_min_rank(int n, int min_rank) {
    check_min_rank(n, min_rank);
    std::vector<double> a(n, 0.0);
    for (int l = min_rank; l <= n; ++l) a[l - 1] = l;
    return from_values(std::move(a));
  }

  // a_l = l^p: p-norm-push style emphasis on the top.
  static RankWeightVector power(int n, double p) {
    if (p < 1.0) throw ValidationError("power weight exponent must be >= 1");
    std::vector<double> a(n);
    for (int l = 1; l <= n; ++l) a[l - 1] = std::pow(static_cast<double>(l), p);
    return from_values(std::move(a));
  }

  int n() const { return static_cast<int>(a_.size()); }

  // a_l, 1-indexed rank position.
  double value_at(int l) const { return a_[l - 1]; }
  // a~_l, 1-indexed (a~_1 = a_1).
  double increment_at(int l) const { return a_tilde_[l - 1]; }

  const std::vector<double>& values() const { return a_; }
  const std::vector<double>& increments() const { return a_tilde_; }
  const std::vector<int>& support() const { return support_; }

 private:
  static void check_top_k(int n, int k) {
    if (k < 1 || k > n) throw ValidationError("top-k cutoff must be in [1, n]");
  }
  static void check_min_rank(int n, int t) {
    if (t < 1 || t > n) throw ValidationError("rank threshold must be in [1, n]");
  }

  std::vector<double> a_;
  std::vector<double> a_tilde_;
  std::vector<int> support_;
};

// Statistic family selector plus its parameter; materialized per list length.
// This is what configs and the CLI carry around, since concrete weights
// depend on n (head-local lists use the head size).
struct WeightSpec {
  enum class Kind { Wrs, Wta, Mrr, Dcg, DcgTop, DcgMinRank, PartialAucTop, PartialAucMinRank, Power };
  Kind kind = Kind::Wrs;
  int k = 0;        // cutoff for the @k / min-rank forms
  double p = 2.0;   // exponent for Kind::Power

  RankWeightVector materialize(int n) const {
    switch (kind) {
      case Kind::Wrs: return RankWeightVector::wrs(n);
      case Kind::Wta: return RankWeightVector::wta(n);
      case Kind::Mrr: return RankWeightVector::mrr(n);
      case Kind::Dcg: return RankWeightVector::dcg(n);
      case Kind::DcgTop: return RankWeightVector::dcg_top(n, std::min(k, n));
      case Kind::DcgMinRank: return RankWeightVector::dcg_min_rank(n, std::min(k, n));
      case Kind::PartialAucTop: return RankWeightVector::partial_auc_top(n, std::min(k, n));
      case Kind::PartialAucMinRank: return RankWeightVector::partial_auc_min_rank(n, std::min(k, n));
      case Kind::Power: return RankWeightVector::power(n, p);
    }
    throw ValidationError("unknown weight kind");
  }

  // Accepts: wrs | wta | mrr | dcg | dcg@K | pauc@K | dcg-minrank@T | pauc-minrank@T | pow:P
  static WeightSpec parse(const std::string& s) {
    WeightSpec spec;
    auto at_param = [&](const std::string& prefix) -> bool {
      if (s.rfind(prefix + "@", 0) != 0) return false;
      spec.k = std::stoi(s.substr(prefix.size() + 1));
      return true;
    };
    if (s == "wrs") spec.kind = Kind::Wrs;
    else if (s == "wta") spec.kind = Kind::Wta;
    else if (s == "mrr") spec.kind = Kind::Mrr;
    else if (s == "dcg") spec.kind = Kind::Dcg;
    else if (at_param("dcg")) spec.kind = Kind::DcgTop;
    else if (at_param("pauc")) spec.kind = Kind::PartialAucTop;
    else if (at_param("dcg-minrank")) spec.kind = Kind::DcgMinRank;
    else if (at_param("pauc-minrank")) spec.kind = Kind::PartialAucMinRank;
    else if (s.rfind("pow:", 0) == 0) {
      spec.kind = Kind::Power;
      spec.p = std::stod(s.substr(4));
    } else {
      throw ValidationError("unknown statistic spec: " + s);
    }
    return spec;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::Wrs: return "wrs";
      case Kind::Wta: return "wta";
      case Kind::Mrr: return "mrr";
      case Kind::Dcg: return "dcg";
      case Kind::DcgTop: return "dcg@" + std::to_string(k);
      case Kind::DcgMinRank: return "dcg-minrank@" + std::to_string(k);
      case Kind::PartialAucTop: return "pauc@" + std::to_string(k);
      case Kind::PartialAucMinRank: return "pauc-minrank@" + std::to_string(k);
      case Kind::Power: {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "pow:%g", p);
        return buf;
      }
    }
    return "?";
  }
};

}  // namespace rankmip
