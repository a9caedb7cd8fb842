#pragma once

#include <chrono>

namespace rankmip {

// Solve clock. Wall mode reads the steady clock; deterministic mode derives
// "seconds" from a work counter (simplex pivot volume) so that traces and
// time-limit truncation points are bit-reproducible across runs.
class WorkClock {
 public:
  enum class Mode { Wall, Deterministic };

  // Nominal work units per second for deterministic mode, calibrated to the
  // dense pivot loop so deterministic seconds track wall seconds roughly.
  static constexpr double kWorkPerSecond = 2.5e8;

  explicit WorkClock(Mode mode = Mode::Wall, double limit_s = -1.0)
      : mode_(mode), limit_s_(limit_s), start_(std::chrono::steady_clock::now()) {}

  void add_work(double units) { work_ += units; }

  double elapsed_s() const {
    if (mode_ == Mode::Deterministic) return work_ / kWorkPerSecond;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  bool expired() const { return limit_s_ >= 0.0 && elapsed_s() >= limit_s_; }

  Mode mode() const { return mode_; }

 private:
  Mode mode_;
  double limit_s_;
  std::chrono::steady_clock::time_point start_;
  double work_ = 0.0;
};

}  // namespace rankmip
