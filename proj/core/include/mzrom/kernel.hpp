#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/hermite.hpp"

namespace mzrom {

/// Tensor-product quadrature ensemble over the resolved variables.
/// Member e sets x_k = mu_k + sigma_k z_{i_k} for the resolved block and
/// zeros everything else. Members are ordered with the last resolved
/// variable's node index varying fastest.
struct EnsembleGrid {
  QuadratureRule rule;
  ScalingParams scaling;
  std::size_t n_resolved = 0;
  std::size_t dimension = 0;
  std::vector<std::vector<double>> member_ics;
  std::vector<double> member_weights;

  std::size_t size() const noexcept { return member_weights.size(); }
};

EnsembleGrid ensemble_grid(const QuadratureRule& rule, const ScalingParams& scaling,
                           std::size_t n_resolved, std::size_t dimension);

/// Pointwise observable on a full state; writes n_resolved values.
using StateObservable = std::function<void(std::span<const double> x, std::span<double> out)>;

/// f_{lk}(t_n) and g_{lj}(t_n) sampled on the kernel grid t_n = n dt.
struct CorrelationTables {
  double dt = 0.0;
  std::size_t n_times = 0;  // N_t + 1
  std::size_t n_basis = 0;  // J
  std::size_t n_resolved = 0;
  std::vector<double> f;  // [n][l][k]
  std::vector<double> g;  // [l][n][j], lag-contiguous per row l

  double& f_at(std::size_t n, std::size_t l, std::size_t k) {
    return f[(n * n_basis + l) * n_resolved + k];
  }
  double f_at(std::size_t n, std::size_t l, std::size_t k) const {
    return f[(n * n_basis + l) * n_resolved + k];
  }
  double& g_at(std::size_t n, std::size_t l, std::size_t j) {
    return g[(l * n_times + n) * n_basis + j];
  }
  double g_at(std::size_t n, std::size_t l, std::size_t j) const {
    return g[(l * n_times + n) * n_basis + j];
  }

  static CorrelationTables zeros(double dt, std::size_t n_times, std::size_t n_basis,
                                 std::size_t n_resolved);
};

struct CorrelationOptions {
  double solver_dt = 1e-4;
  double kernel_dt = 1e-3;
  double T = 1.0;
  RkScheme scheme = RkScheme::RK4;
  std::size_t workers = 0;        // 0: hardware concurrency
  std::size_t member_block = 32;  // trajectories buffered between reductions
  bool compensated = false;       // Neumaier summation in the reduction
};

/// Integrates every ensemble member and accumulates
///   f_{lk}(t_n) = sum_e w_e h_l(xhat_e(0)) [la0(x_e(t_n))]_k
///   g_{lj}(t_n) = sum_e w_e h_l(xhat_e(0)) grad h_j(xhat_e(t_n)) . Rhat(x_e(t_n))
/// Reduction is in member order regardless of worker count.
CorrelationTables compute_correlations(const FullOrderSystem& system, const EnsembleGrid& ensemble,
                                       const PolyBasis& basis, const StateObservable& la0,
                                       const CorrelationOptions& options);

/// Sub-tables for a basis whose multi-indices all appear in `full`
/// (for instance the degree-1 basis inside the degree-3 one), so one
/// ensemble serves several kernel degrees.
CorrelationTables restrict_tables(const CorrelationTables& tables, const PolyBasis& full,
                                  const PolyBasis& sub);

/// Memory kernels K_{jk}(t_n) on the kernel grid plus the basis descriptor.
struct KernelTable {
  double dt = 0.0;
  std::size_t n_times = 0;
  std::size_t n_resolved = 0;
  unsigned max_degree = 0;
  ScalingParams scaling;
  std::vector<MultiIndex> multi_indices;
  std::vector<double> K;  // [n][j][k]

  std::size_t n_basis() const noexcept { return multi_indices.size(); }
  double& at(std::size_t n, std::size_t j, std::size_t k) {
    return K[(n * n_basis() + j) * n_resolved + k];
  }
  double at(std::size_t n, std::size_t j, std::size_t k) const {
    return K[(n * n_basis() + j) * n_resolved + k];
  }
  PolyBasis basis() const;
};

struct VolterraOptions {
  double condition_limit = 1e12;
};

/// Trapezoidal solve of K(t) = f(t) - int_0^t G(t-s) K(s) ds, one J x J
/// linear system per time level (all resolved columns at once).
KernelTable solve_volterra(const CorrelationTables& tables, const PolyBasis& basis,
                           const ScalingParams& scaling, const VolterraOptions& options = {});

/// Kernel-table file: ASCII header, then little-endian float64 payload.
/// See docs/formats.md.
void save_kernel_table(const KernelTable& table, const std::filesystem::path& path);
KernelTable load_kernel_table(const std::filesystem::path& path);

}  // namespace mzrom
