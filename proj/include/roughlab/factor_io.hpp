#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "roughlab/gaussian_sampler.hpp"

namespace roughlab {

// Binary cache layout (little-endian):
//   "VLTC" | version u8 | factor order u8 | N u16 | H f64 | T f64 | jitter f64
//   covariance (2N)^2 f64 row-major, V-first order
//   factor     (2N)^2 f64 row-major, order given by the factor order byte
inline constexpr std::uint8_t kFactorFormatVersion = 1;
inline constexpr std::uint8_t kOrderVFirst = 0;
inline constexpr std::uint8_t kOrderIncrementsFirst = 1;

struct FactorDump {
  std::uint8_t version = kFactorFormatVersion;
  std::uint8_t factor_order = kOrderIncrementsFirst;
  long steps = 0;
  double hurst = 0.0;
  double horizon = 0.0;
  double jitter = 0.0;
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd factor;
};

void write_factor_dump(const std::filesystem::path& file, const JointGaussianSpec& spec);
FactorDump read_factor_dump(const std::filesystem::path& file);

// One row per path: V_1..V_N, dW_0..dW_{N-1}.
void write_path_csv(std::ostream& out, const NoiseBundle& bundle);

}  // namespace roughlab
