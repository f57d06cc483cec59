#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "roughlab/gaussian_sampler.hpp"
#include "roughlab/model.hpp"

namespace roughlab {

// Terminal Euler values at several coarse levels and at the fine level, from
// the fine-grid noise of a single path.
class MultiLevelEuler {
 public:
  MultiLevelEuler(const ModelConfig& config, long fine_steps, std::span<const long> levels);

  const std::vector<long>& levels() const noexcept { return levels_; }
  long fine_steps() const noexcept { return fine_steps_; }
  // Output slots: one per coarse level in the given order, fine level last.
  std::size_t outputs() const noexcept { return levels_.size() + 1; }

  // v: V at fine nodes 1..N_f; db: fine increments; scratch grows as needed.
  void evaluate(std::span<const double> v, std::span<const double> db, std::span<double> out,
                std::vector<double>& scratch) const;

 private:
  ModelConfig config_;
  long fine_steps_;
  std::vector<long> levels_;
  std::vector<long> ratios_;
};

std::vector<double> euler_terminal(const NoiseBundle& bundle, const ModelConfig& config);

struct TerminalSample {
  std::vector<double> coarse;
  std::vector<double> reference;
  long steps = 0;
  long fine_steps = 0;
  std::uint64_t seed = 0;
};

TerminalSample coupled_terminals(const ModelConfig& config, long steps, long fine_steps, long paths,
                                 std::uint64_t seed, int threads = 1);
TerminalSample coupled_terminals(const ModelConfig& config, const JointGaussianSpec& fine, long steps,
                                 long paths, std::uint64_t seed, int threads = 1);

// Path-major table of terminal values, paths x (levels + 1), fine level last.
struct LevelTerminals {
  std::vector<long> levels;
  long fine_steps = 0;
  long paths = 0;
  std::vector<double> values;

  double at(long path, std::size_t slot) const { return values[path * (levels.size() + 1) + slot]; }
  std::vector<double> column(std::size_t slot) const;
};

LevelTerminals level_terminals(const ModelConfig& config, const JointGaussianSpec& fine,
                               std::span<const long> levels, long paths, std::uint64_t seed,
                               int threads = 1);

struct StrongError {
  double rms = 0.0;
  double ci = 0.0;
  long paths = 0;
};

inline constexpr long kMinStrongPaths = 100;
inline constexpr int kStrongBatches = 20;

StrongError strong_error(const TerminalSample& sample);
StrongError strong_error(std::span<const double> coarse, std::span<const double> reference);

}  // namespace roughlab
