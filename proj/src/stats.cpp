#include "roughlab/stats.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>

#include "roughlab/errors.hpp"

namespace roughlab {

void RunningStats::add(double x) noexcept {
  ++count_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) noexcept {
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(count_ + other.count_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.count_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(count_) * static_cast<double>(other.count_) / total;
  count_ += other.count_;
}

double RunningStats::variance() const noexcept {
  return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double RunningStats::stddev() const noexcept { return std::sqrt(variance()); }

Estimate RunningStats::estimate() const noexcept {
  Estimate e;
  e.mean = mean_;
  e.count = count_;
  e.stddev = stddev();
  e.ci = count_ > 0 ? kNormalQuantile975 * e.stddev / std::sqrt(static_cast<double>(count_)) : 0.0;
  return e;
}

Estimate summarize(std::span<const double> values) {
  RunningStats s;
  for (double v : values) s.add(v);
  return s.estimate();
}

double student_t_quantile(double probability, double dof) {
  if (!(dof > 0.0)) throw DomainError("Student-t quantile needs positive degrees of freedom");
  return boost::math::quantile(boost::math::students_t(dof), probability);
}

}  // namespace roughlab
