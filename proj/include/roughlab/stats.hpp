#pragma once

#include <cstddef>
#include <span>

namespace roughlab {

inline constexpr double kNormalQuantile975 = 1.959963984540054;

// Mean with a two-sided 95% confidence half-width.
struct Estimate {
  double mean = 0.0;
  double ci = 0.0;
  double stddev = 0.0;
  long count = 0;
};

// Welford accumulator; merge() combines partial results in a fixed order.
class RunningStats {
 public:
  void add(double x) noexcept;
  void merge(const RunningStats& other) noexcept;

  long count() const noexcept { return count_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept;
  double stddev() const noexcept;
  Estimate estimate() const noexcept;

 private:
  long count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

Estimate summarize(std::span<const double> values);

double student_t_quantile(double probability, double dof);

}  // namespace roughlab
