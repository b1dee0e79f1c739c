#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/hermite.hpp"
#include "mzrom/kernel.hpp"
#include "mzrom/spectral.hpp"

namespace mzrom::vb {

/// Mori-Zwanzig ROM of viscous Burgers' on the resolved modes 1..M.
///
/// ResolvedVector layout of a zero-mean state with K = N_g/2 - 1 active modes:
///   [phi_1..phi_M, psi_1..psi_M, phi_{M+1}..phi_K, psi_{M+1}..psi_K]
/// with theta_k = phi_k + i psi_k. The first 2M entries are the resolved block.
struct Config {
  std::size_t M = 3;
  unsigned linear_degree = 1;
  unsigned cubic_degree = 3;
  double nu = 0.1;
  std::size_t n_quad = 2;  // 4 for the full-size study
  double dt_full = 1e-4;
  double dt_kernel = 1e-3;
  double T = 5.0;          // 20 for the full-size study
  double sample_dt = 1e-2; // error-curve spacing
  std::size_t grid_size = 256;
  std::vector<std::string> ics{"sin"};
  std::size_t workers = 0;
  std::size_t member_block = 32;

  std::size_t n_rom() const noexcept { return 2 * M; }
  /// sigma_k = e^{-k} for phi_k and psi_k, mu = 0.
  ScalingParams scaling() const;
  void validate() const;
};

std::size_t active_modes(std::size_t grid_size);

std::vector<double> pack(const SpectralState& state, std::size_t M);
void pack_into(const SpectralState& state, std::size_t M, std::span<double> x);
/// Inverse of pack on a grid of the given size (zero mean, zero Nyquist).
SpectralState unpack(std::span<const double> x, std::size_t M, std::size_t grid_size);
void unpack_into(std::span<const double> x, std::size_t M, SpectralState& state);

/// Full-order pseudospectral system on the ResolvedVector layout.
FullOrderSystem system(const Config& config);

struct Observables {
  std::vector<double> la0_phi;  // -Re F_k, k = 1..M
  std::vector<double> la0_psi;  // -Im F_k
  std::vector<double> markov_phi;
  std::vector<double> markov_psi;
};

/// Liouville action on the initial noise in physical-space form,
///   F = d/dz[u r] - d/dz[(P_M u)(P_M r)],  r = -u u_z + nu u_zz,
/// where r is the exact Galerkin right-hand side of the state (products are
/// formed on a twice-finer grid, so no aliasing reaches modes <= M).
/// Also returns the truncated Markovian right-hand side on modes 1..M.
Observables observables(const SpectralState& state, std::size_t M, double nu);

/// Same quantity from the truncated double sums
///   k sum_{|p| or |q| > M, p+q=k} (y_q T_p + x_q S_p)   and its psi analog,
/// evaluated directly (test oracle; O(K^2) per mode).
Observables observables_direct(const SpectralState& state, std::size_t M, double nu);

EnsembleGrid ensemble(const Config& config);

struct KernelSet {
  KernelTable linear;
  KernelTable cubic;
};

/// One ensemble run; the linear kernels reuse the cubic correlation tables.
KernelSet compute_kernels(const Config& config);

struct IcResult {
  std::string ic;
  std::vector<double> times;
  std::vector<double> err_markovian;  // NaN after a blow-up
  std::vector<double> err_linear;
  std::vector<double> err_cubic;
  double mean_markovian = 0.0;  // +inf if the run blew up
  double mean_linear = 0.0;
  double mean_cubic = 0.0;
  std::optional<double> blowup_markovian;
  std::optional<double> blowup_linear;
  std::optional<double> blowup_cubic;
};

/// "sin" is sin z; "expsin" and "cos2sin" are P_M applied to e^{sin z} and
/// cos(2 sin z).
SpectralState experiment_initial_condition(const std::string& name, std::size_t M, std::size_t grid_size);

std::vector<IcResult> rom_experiment(const Config& config, const KernelSet& kernels);

/// vb_<ic>.csv per case with t,err_markovian,err_linear,err_cubic (empty
/// cells after a blow-up) and vb_events.csv with blow-up times.
void write_outputs(const std::vector<IcResult>& results, const std::filesystem::path& dir);

}  // namespace mzrom::vb
