#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roughlab/model.hpp"

namespace roughlab {

struct RatePoint {
  long steps = 0;
  double error = 0.0;
  double ci = 0.0;
};

struct RateEstimate {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  std::vector<RatePoint> points;
};

// Least squares of log(error) on log(steps).
RateEstimate regress_loglog(std::span<const RatePoint> points);

struct ExperimentPlan {
  ModelConfig config;
  std::vector<long> levels{16, 32, 64, 128, 256};
  long fine_steps = 4096;
  long paths = 200000;
  std::uint64_t seed = 1;
  int replications = 8;
  int threads = 1;

  // Sorted copy of the levels; throws on duplicates or non-positive entries.
  std::vector<long> sorted_levels() const;
  void validate_monte_carlo() const;
};

struct LevelRow {
  long steps = 0;
  double error = 0.0;  // signed
  double ci = 0.0;
  bool used = false;
};

enum class RateStatus { ok, inconclusive };

struct WeakRateReport {
  std::vector<LevelRow> rows;
  std::optional<RateEstimate> estimate;
  RateStatus status = RateStatus::inconclusive;
  std::string message;
};

inline constexpr double kNoiseGate = 3.0;
inline constexpr char kDegenerateMessage[] = "degenerate: zero error";

// Analytic weak errors; throws InconclusiveError when every level is zero.
RateEstimate run_case1(const ExperimentPlan& plan);
std::vector<LevelRow> case1_rows(const ExperimentPlan& plan);

// Signed Monte Carlo estimates of E[phi(X^{N_f})] - E[phi(X^N)] for several
// payoffs on the same coupled paths; CI from the spread of replications.
std::vector<std::vector<LevelRow>> weak_error_tables(const ExperimentPlan& plan,
                                                     std::span<const PayoffSpec> payoffs);

// Keeps levels with |error| > 3 CI and regresses if at least three remain.
WeakRateReport gate_and_regress(std::vector<LevelRow> rows);

WeakRateReport run_case2(const ExperimentPlan& plan);

std::vector<LevelRow> strong_rows(const ExperimentPlan& plan);
RateEstimate run_strong(const ExperimentPlan& plan);

}  // namespace roughlab
