#pragma once

#include <cstddef>
#include <span>

namespace roughlab {

class UniformGrid {
 public:
  UniformGrid(double horizon, long steps);

  double horizon() const noexcept { return horizon_; }
  long steps() const noexcept { return steps_; }
  double dt() const noexcept { return horizon_ / static_cast<double>(steps_); }
  double node(long i) const noexcept {
    return horizon_ * static_cast<double>(i) / static_cast<double>(steps_);
  }

  bool operator==(const UniformGrid& other) const noexcept = default;

 private:
  double horizon_;
  long steps_;
};

// Coarse/fine coupling on nested uniform grids: a coarse increment is the
// sum of `ratio` consecutive fine increments, coarse node i is fine node
// i * ratio.
class LevelCoupling {
 public:
  LevelCoupling(const UniformGrid& coarse, const UniformGrid& fine);

  long ratio() const noexcept { return ratio_; }
  const UniformGrid& coarse() const noexcept { return coarse_; }
  const UniformGrid& fine() const noexcept { return fine_; }

  long fine_node(long coarse_node) const noexcept { return coarse_node * ratio_; }

  // fine.size() == fine steps, coarse.size() == coarse steps
  void aggregate(std::span<const double> fine, std::span<double> coarse) const;

  // Coarse node values (1..N) picked from fine node values (1..N_f).
  void restrict_nodes(std::span<const double> fine, std::span<double> coarse) const;

 private:
  UniformGrid coarse_;
  UniformGrid fine_;
  long ratio_;
};

}  // namespace roughlab
