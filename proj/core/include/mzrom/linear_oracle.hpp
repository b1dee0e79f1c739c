#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/kernel.hpp"

namespace mzrom::linear_oracle {

/// x' = y, y' = -x - 2y with x resolved. The Markovian term vanishes and the
/// memory kernels in the degree-1 basis are exactly
///   K_0(t) = -mu e^{-2t},  K_1(t) = -sigma e^{-2t}.
FullOrderSystem system();

struct Config {
  double mu = 0.7;
  double sigma = 0.4;
  std::size_t n_quad = 4;
  double T = 5.0;
  double dt_full = 1e-4;
  double dt_kernel = 1e-3;
  double x0 = 1.1;  // ROM initial value; exact resolved solution x0 (1 + t) e^{-t}
  std::size_t workers = 0;

  void validate() const;
};

struct Result {
  KernelTable kernels;
  std::vector<double> times;
  std::vector<double> k0, k1, k0_exact, k1_exact;
  std::vector<double> rom, rom_exact;
  double kernel_error = 0.0;  // sup over both kernels and [0, T]
  double rom_error = 0.0;
};

Result run(const Config& config);

/// oracle_linear.csv: t,K0,K0_exact,K1,K1_exact,x_rom,x_exact.
void write_outputs(const Result& result, const std::filesystem::path& dir);

}  // namespace mzrom::linear_oracle
