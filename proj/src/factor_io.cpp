#include "roughlab/factor_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <ostream>

#include "roughlab/csv.hpp"
#include "roughlab/errors.hpp"

namespace roughlab {

namespace {

constexpr std::array<char, 4> kMagic{'V', 'L', 'T', 'C'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int k = 0; k < 8; ++k) bytes[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
  out.write(bytes, 8);
}

void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw ConfigError("factor dump truncated");
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

Eigen::MatrixXd get_matrix(std::istream& in, long dim) {
  Eigen::MatrixXd m(dim, dim);
  for (long r = 0; r < dim; ++r) {
    for (long c = 0; c < dim; ++c) m(r, c) = get_f64(in);
  }
  return m;
}

}  // namespace

void write_factor_dump(const std::filesystem::path& file, const JointGaussianSpec& spec) {
  const long n = spec.steps();
  if (n > 0xFFFF) throw DomainError("factor dump supports at most 65535 steps");
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot open factor dump for writing: " + file.string());
  out.write(kMagic.data(), kMagic.size());
  const char header[4] = {static_cast<char>(kFactorFormatVersion), static_cast<char>(kOrderIncrementsFirst),
                          static_cast<char>(n & 0xFF), static_cast<char>((n >> 8) & 0xFF)};
  out.write(header, 4);
  put_f64(out, spec.hurst());
  put_f64(out, spec.grid().horizon());
  put_f64(out, spec.jitter());
  put_matrix(out, spec.covariance());
  put_matrix(out, spec.factor());
  if (!out) throw NumericalError("failed writing factor dump");
}

FactorDump read_factor_dump(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open factor dump: " + file.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kMagic) throw ConfigError("not a factor dump (bad magic)");
  unsigned char header[4];
  in.read(reinterpret_cast<char*>(header), 4);
  if (!in) throw ConfigError("factor dump truncated");
  FactorDump dump;
  dump.version = header[0];
  if (dump.version != kFactorFormatVersion) throw ConfigError("unsupported factor dump version");
  dump.factor_order = header[1];
  dump.steps = static_cast<long>(header[2]) | (static_cast<long>(header[3]) << 8);
  dump.hurst = get_f64(in);
  dump.horizon = get_f64(in);
  dump.jitter = get_f64(in);
  dump.covariance = get_matrix(in, 2 * dump.steps);
  dump.factor = get_matrix(in, 2 * dump.steps);
  return dump;
}

void write_path_csv(std::ostream& out, const NoiseBundle& bundle) {
  const long n = bundle.grid.steps();
  CsvWriter csv(out);
  for (long i = 1; i <= n; ++i) csv.cell("V_" + std::to_string(i));
  for (long i = 0; i < n; ++i) csv.cell("dW_" + std::to_string(i));
  csv.end_row();
  for (long p = 0; p < bundle.paths; ++p) {
    for (double v : bundle.v(p)) csv.cell(v);
    for (double w : bundle.dw(p)) csv.cell(w);
    csv.end_row();
  }
}

}  // namespace roughlab
