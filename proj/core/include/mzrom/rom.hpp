#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/hermite.hpp"
#include "mzrom/kernel.hpp"

namespace mzrom {

/// Basis values h_j(xhat(t_m)) for every completed ROM step m.
class HistoryBuffer {
public:
  explicit HistoryBuffer(std::size_t n_basis) : n_basis_(n_basis) {}

  void push(std::span<const double> values);
  std::size_t size() const noexcept { return n_basis_ == 0 ? 0 : data_.size() / n_basis_; }
  std::size_t n_basis() const noexcept { return n_basis_; }
  std::span<const double> at(std::size_t m) const {
    return {data_.data() + m * n_basis_, n_basis_};
  }
  void reserve(std::size_t steps) { data_.reserve(steps * n_basis_); }

private:
  std::size_t n_basis_;
  std::vector<double> data_;
};

/// Trapezoidal memory convolution at step n:
///   out_k = sum_j int_0^{t_n} h_j(xhat(s)) K_{jk}(t_n - s) ds.
/// With cutoff_lag set, only lags <= cutoff_lag contribute.
/// Cost is O(n J N_rom) multiply-adds; macs, if given, is incremented by the
/// number performed.
void memory_term(const HistoryBuffer& history, const KernelTable& kernels, std::size_t n,
                 std::span<double> out, std::optional<std::size_t> cutoff_lag = std::nullopt,
                 std::uint64_t* macs = nullptr);

std::vector<double> memory_term(const HistoryBuffer& history, const KernelTable& kernels,
                                std::size_t n);

struct RomOptions {
  std::optional<std::size_t> cutoff_lag;
  bool allow_divergence = false;  // stop and report instead of throwing
};

struct RomRun {
  Trajectory trajectory;
  std::uint64_t memory_macs = 0;
  std::optional<Divergence> divergence;  // only with allow_divergence
};

/// Explicit midpoint integration of xhat' = markovian(xhat) + memory(t).
///
/// Each step's memory term is evaluated once from the completed history at
/// t_n and held fixed over both stages; the history grows after the step.
/// dt must equal kernels.dt. A non-finite state throws DivergenceError unless
/// options.allow_divergence is set, in which case the trajectory ends there.
RomRun integrate_rom(const RhsFn& markovian, const PolyBasis& basis, const ScalingParams& scaling,
                     const KernelTable& kernels, std::span<const double> xhat0, double dt, double T,
                     const RomOptions& options = {});

/// Markovian-only ROM (no memory) with the same stepping.
Trajectory integrate_markovian(const RhsFn& markovian, std::span<const double> xhat0, double dt,
                               double T);

}  // namespace mzrom
