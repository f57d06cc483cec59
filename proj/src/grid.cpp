#include "roughlab/grid.hpp"

#include <cmath>

#include "roughlab/errors.hpp"

namespace roughlab {

UniformGrid::UniformGrid(double horizon, long steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("grid horizon must be positive");
  if (steps < 1) throw DomainError("grid needs at least one step");
}

LevelCoupling::LevelCoupling(const UniformGrid& coarse, const UniformGrid& fine)
    : coarse_(coarse), fine_(fine), ratio_(0) {
  if (coarse.horizon() != fine.horizon()) throw DomainError("coupled grids must share the horizon");
  if (fine.steps() % coarse.steps() != 0) {
    throw DomainError("fine step count must be a multiple of the coarse step count");
  }
  ratio_ = fine.steps() / coarse.steps();
}

void LevelCoupling::aggregate(std::span<const double> fine, std::span<double> coarse) const {
  if (static_cast<long>(fine.size()) != fine_.steps() ||
      static_cast<long>(coarse.size()) != coarse_.steps()) {
    throw DomainError("increment arrays do not match the coupled grids");
  }
  for (long i = 0; i < coarse_.steps(); ++i) {
    double sum = 0.0;
    for (long k = i * ratio_; k < (i + 1) * ratio_; ++k) sum += fine[k];
    coarse[i] = sum;
  }
}

void LevelCoupling::restrict_nodes(std::span<const double> fine, std::span<double> coarse) const {
  if (static_cast<long>(fine.size()) != fine_.steps() ||
      static_cast<long>(coarse.size()) != coarse_.steps()) {
    throw DomainError("node arrays do not match the coupled grids");
  }
  for (long i = 1; i <= coarse_.steps(); ++i) coarse[i - 1] = fine[i * ratio_ - 1];
}

}  // namespace roughlab
