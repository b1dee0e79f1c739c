#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/hermite.hpp"
#include "mzrom/kernel.hpp"

namespace mzrom::nl {

/// phi1' = -phi1^2 + 8 phi1 phi2,  phi2' = cos(phi1 + phi2); phi1 resolved.
FullOrderSystem system();

/// Liouville action on the initial noise 8 x1 x2, evaluated pointwise:
/// 8 x1 [-x1 x2 + 8 x2^2 + cos(x1 + x2)].
void la0_observable(std::span<const double> x, std::span<double> out);

/// (1/sigma) h_j'((x1 - mu)/sigma) (-x1^2 + 8 x1 x2): the g-integrand for
/// basis function j at a full state.
double g_observable(const PolyBasis& basis, const ScalingParams& scaling, std::size_t j,
                    std::span<const double> x);

struct Config {
  unsigned max_degree = 3;
  std::size_t n_quad = 40;
  std::vector<double> x1_cases{1.0, 2.0, 3.0, 7.0};
  double mu = 2.5;
  double sigma = 0.0;  // 0: 1.5 / max node, so every node lies in [1, 4]
  double dt_full = 1e-4;
  double dt_kernel = 1e-3;
  double T = 10.0;
  std::size_t workers = 0;

  double resolved_sigma(const QuadratureRule& rule) const;
  void validate() const;
};

struct CaseResult {
  double x1 = 0.0;
  bool extrapolation = false;  // x1 outside the sampled node interval
  std::vector<double> times;
  std::vector<double> reference;
  std::vector<double> markovian;
  std::vector<double> memory;
  double mean_error_markovian = 0.0;
  double mean_error_memory = 0.0;
  double terminal_error_markovian = 0.0;
  double terminal_error_memory = 0.0;
};

struct Experiment {
  Config config;
  QuadratureRule rule;
  ScalingParams scaling;
  KernelTable kernels;
  std::vector<CaseResult> cases;
};

Experiment run_experiment(const Config& config);

/// Writes nl_case_<x1>_<d>.csv and nl_kernels_<d>.csv into dir.
void write_outputs(const Experiment& experiment, const std::filesystem::path& dir);

}  // namespace mzrom::nl
