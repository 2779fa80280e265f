#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace erlab::prob {

/// Neumaier compensated accumulator.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Monte Carlo mean with its standard error (sample std / sqrt(reps)).
struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
};

/// Summarizes replicate values in index order; the result depends only on the
/// sequence, not on how it was produced.
inline Estimate summarize(std::span<const double> values) {
  Estimate est;
  est.reps = values.size();
  if (values.empty()) return est;
  CompensatedSum total;
  for (double v : values) total.add(v);
  est.mean = total.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - est.mean) * (v - est.mean));
    const double var = sq.value() / static_cast<double>(values.size() - 1);
    est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  }
  return est;
}

}  // namespace erlab::prob
