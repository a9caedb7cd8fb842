#pragma once

#include <string>
#include <vector>

#include "rankmip/common.hpp"
#include "rankmip/dataset.hpp"

namespace rankmip {

// One-dimensional four-clump construction on which reversed rankings split
// the rank statistics: 10 negatives near x=3, 3000 positives near x=1,
// 3000 negatives near x=0, 80 positives near x=-10, each clump jittered
// with sigma = 0.05 so scores are tie-free.
inline Dataset generate_flip_1d(uint64_t seed) {
  Rng rng(seed);
  struct Clump {
    int count;
    double mean;
    int label;
  };
  const Clump clumps[] = {{10, 3.0, 0}, {3000, 1.0, 1}, {3000, 0.0, 0}, {80, -10.0, 1}};
  int n = 0;
  for (const auto& c : clumps) n += c.count;
  Matrix x(n, 1);
  std::vector<int> y(n);
  int row = 0;
  for (const auto& c : clumps) {
    for (int i = 0; i < c.count; ++i, ++row) {
      x.at(row, 0) = rng.normal(c.mean, 0.05);
      y[row] = c.label;
    }
  }
  return Dataset(std::move(x), std::move(y), {"x"});
}

// Two-dimensional Gaussians: two big clumps (3000 positives at (0,1), 3000
// negatives at (0,0), per-entry variance 0.5), a 10-point negative clump at
// (10,1) and a 200-point positive clump at (0,-3) with sigma = 0.05; 1250
// points subsampled uniformly without replacement.
inline Dataset generate_gaussians_2d(uint64_t seed) {
  Rng rng(seed);
  struct Clump {
    int count;
    double mx, my, sigma;
    int label;
  };
  const double big_sigma = std::sqrt(0.5);
  const Clump clumps[] = {{3000, 0.0, 1.0, big_sigma, 1},
                          {3000, 0.0, 0.0, big_sigma, 0},
                          {10, 10.0, 1.0, 0.05, 0},
                          {200, 0.0, -3.0, 0.05, 1}};
  int total = 0;
  for (const auto& c : clumps) total += c.count;
  Matrix all(total, 2);
  std::vector<int> all_y(total);
  int row = 0;
  for (const auto& c : clumps) {
    for (int i = 0; i < c.count; ++i, ++row) {
      all.at(row, 0) = rng.normal(c.mx, c.sigma);
      all.at(row, 1) = rng.normal(c.my, c.sigma);
      all_y[row] = c.label;
    }
  }
  const int keep = 1250;
  std::vector<int> idx(total);
  for (int i = 0; i < total; ++i) idx[i] = i;
  for (int i = 0; i < keep; ++i) {
    int j = i + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(total - i));
    std::swap(idx[i], idx[j]);
  }
  Matrix x(keep, 2);
  std::vector<int> y(keep);
  for (int i = 0; i < keep; ++i) {
    x.at(i, 0) = all.at(idx[i], 0);
    x.at(i, 1) = all.at(idx[i], 1);
    y[i] = all_y[idx[i]];
  }
  return Dataset(std::move(x), std::move(y), {"x1", "x2"});
}

inline Dataset generate_synthetic(const std::string& name, uint64_t seed) {
  if (name == "flip-1d") return generate_flip_1d(seed);
  if (name == "gaussians-2d") return generate_gaussians_2d(seed);
  throw ValidationError("unknown synthetic dataset: " + name + " (expected flip-1d or gaussians-2d)");
}

}  // namespace rankmip
