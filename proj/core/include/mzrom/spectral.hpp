#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/fourier.hpp"

namespace mzrom {

/// Fourier coefficients theta_k, k = 0..N_g/2, of a real 2 pi-periodic field
/// sampled on N_g points. Negative modes are implied by theta_{-k} =
/// conj(theta_k). The Nyquist coefficient is kept real.
struct SpectralState {
  std::size_t grid_size = 0;
  std::vector<cplx> coeffs;

  SpectralState() = default;
  explicit SpectralState(std::size_t n) : grid_size(n), coeffs(n / 2 + 1, cplx(0.0)) {}

  std::size_t max_mode() const noexcept { return grid_size / 2; }
  double mean() const noexcept { return coeffs.empty() ? 0.0 : coeffs[0].real(); }
};

SpectralState from_grid(std::span<const double> values);
std::vector<double> to_grid(const SpectralState& state);
/// Evaluates the field at the grid of another size (spectral interpolation).
std::vector<double> to_grid(const SpectralState& state, std::size_t grid_size);

/// Copies modes into a state of a different grid size, truncating or
/// zero-padding. The new Nyquist mode is zeroed when truncating.
SpectralState resample(const SpectralState& state, std::size_t grid_size);

/// L2 norm on [0, 2 pi) via Parseval.
double l2_norm(const SpectralState& state);
/// L2 distance; the states may live on different grids.
double l2_distance(const SpectralState& a, const SpectralState& b);
double sup_norm(const SpectralState& state);

/// Exponential dealiasing filter exp(-alpha (|k|/k_max)^order).
struct ExpFilter {
  double alpha = 36.0;
  double order = 36.0;
  bool enabled = true;

  double factor(std::size_t k, std::size_t k_max) const;
};

/// Zeroes every coefficient with |k| > cutoff.
SpectralState project_lowpass(const SpectralState& state, std::size_t cutoff);
void project_lowpass_inplace(SpectralState& state, std::size_t cutoff);

/// Pseudospectral viscous Burgers' right-hand side
///   theta_k' = -(ik/2) s_k [u^2]_k - nu k^2 theta_k
/// with u^2 formed on the grid and s_k the dealiasing filter. Not thread-safe
/// (owns transform scratch); use one instance per worker.
class BurgersOperator {
public:
  BurgersOperator(std::size_t grid_size, double nu, ExpFilter filter = {});

  void rhs(const SpectralState& state, SpectralState& out);
  SpectralState rhs(const SpectralState& state);

  std::size_t grid_size() const noexcept { return n_; }
  double nu() const noexcept { return nu_; }
  const ExpFilter& filter() const noexcept { return filter_; }

private:
  std::size_t n_;
  double nu_;
  ExpFilter filter_;
  std::vector<double> damping_;  // filter factors per mode
  RealFft fft_;
  std::vector<double> grid_;
  std::vector<cplx> spec_;
};

/// Full-order Burgers' solve on the spectral coefficients (RK4 by default).
struct BurgersSolveOptions {
  std::size_t grid_size = 256;
  double nu = 0.1;
  double dt = 1e-4;
  double T = 1.0;
  double sample_dt = 1e-3;  // snapshot spacing
  RkScheme scheme = RkScheme::RK4;
  ExpFilter filter{};
};

struct BurgersSolution {
  std::vector<double> times;
  std::vector<SpectralState> snapshots;
  std::optional<Divergence> divergence;
};

/// The initial state is resampled to options.grid_size first.
BurgersSolution solve_burgers(const SpectralState& u0, const BurgersSolveOptions& options);

/// Reference ("exact") solutions: N_g = 2^9, RK4, dt = 1e-4.
BurgersSolveOptions reference_options(double nu, double T, double sample_dt);

/// u0(z) = sum_{l<=L} a_l cos(lz) + sum_{1<=l<=L} b_l sin(lz) with
/// a_l, b_l ~ unif(-1,1)/(1+l^2) from a seeded 64-bit Mersenne twister.
SpectralState sample_initial_condition(std::size_t band_limit, std::uint64_t seed,
                                       std::size_t grid_size);

/// Uniform double in [-1, 1) from a 64-bit draw (53-bit mantissa).
double unit_symmetric(std::uint64_t bits) noexcept;

struct ZeroModeSplit {
  double mean;
  SpectralState fluctuation;
};

ZeroModeSplit reduce_zero_mode(const SpectralState& u0);
/// u(t, z) = mean + w(t, z - t mean), as the phase shift theta_k e^{-ik t mean}.
SpectralState reconstruct(double mean, const SpectralState& w, double t);

/// Real/imaginary splitting on modes 1..K (zero mode excluded):
///   T_k = k sum_{p+q=k} x_p y_q - nu k^2 x_k
///   S_k = -(k/2) sum_{p+q=k} (x_p x_q - y_p y_q) - nu k^2 y_k
/// with x_{-p} = x_p, y_{-p} = -y_p. With `truncate` set, only pairs with
/// |p|,|q| <= truncate enter the sums and only k <= truncate is returned.
struct RealImagRhs {
  std::vector<double> T;
  std::vector<double> S;
};

RealImagRhs real_imag_rhs(std::span<const double> x, std::span<const double> y, double nu,
                          std::optional<std::size_t> truncate = std::nullopt);

/// Exact Galerkin right-hand side of the complex Fourier system truncated
/// at |k| <= K = coeffs.size()-1, by direct convolution sums (test oracle
/// and small-system reference).
std::vector<cplx> galerkin_rhs_direct(std::span<const cplx> theta, double nu);

/// z,u rows on the physical grid.
void save_state_csv(const SpectralState& state, const std::filesystem::path& path);
/// k,re,im rows.
void save_spectrum_csv(const SpectralState& state, const std::filesystem::path& path);

}  // namespace mzrom
