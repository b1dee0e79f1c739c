#include "mzrom/rom.hpp"

#include <cmath>
#include <string>

#include "mzrom/errors.hpp"

namespace mzrom {

void HistoryBuffer::push(std::span<const double> values) {
  if (values.size() != n_basis_) throw InvalidArgument("HistoryBuffer: record width mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
}

void memory_term(const HistoryBuffer& history, const KernelTable& kernels, std::size_t n,
                 std::span<double> out, std::optional<std::size_t> cutoff_lag, std::uint64_t* macs) {
  const std::size_t J = kernels.n_basis();
  const std::size_t R = kernels.n_resolved;
  if (history.n_basis() != J) throw InvalidArgument("memory_term: history/kernel basis mismatch");
  if (out.size() != R) throw InvalidArgument("memory_term: output has wrong length");
  if (history.size() < n + 1) throw InvalidArgument("memory_term: history does not cover step n");
  if (kernels.n_times < n + 1) {
    throw InvalidArgument("memory_term: kernel table has " + std::to_string(kernels.n_times) +
                          " lags, step " + std::to_string(n) + " needs " + std::to_string(n + 1));
  }
  std::fill(out.begin(), out.end(), 0.0);
  if (n == 0) return;

  const std::size_t m_lo = cutoff_lag && n > *cutoff_lag ? n - *cutoff_lag : 0;
  if (m_lo == n) return;
  const double* K = kernels.K.data();
  auto accumulate = [&](std::size_t m, double weight) {
    const double* h = history.at(m).data();
    const double* k = K + (n - m) * J * R;
    for (std::size_t j = 0; j < J; ++j) {
      const double hw = weight * h[j];
      for (std::size_t c = 0; c < R; ++c) out[c] += hw * k[j * R + c];
    }
  };
  accumulate(m_lo, 0.5);
  for (std::size_t m = m_lo + 1; m < n; ++m) accumulate(m, 1.0);
  accumulate(n, 0.5);
  const double dt = kernels.dt;
  for (double& v : out) v *= dt;
  if (macs) *macs += std::uint64_t(n - m_lo + 1) * J * R;
}

std::vector<double> memory_term(const HistoryBuffer& history, const KernelTable& kernels,
                                std::size_t n) {
  std::vector<double> out(kernels.n_resolved);
  memory_term(history, kernels, n, out);
  return out;
}

RomRun integrate_rom(const RhsFn& markovian, const PolyBasis& basis, const ScalingParams& scaling,
                     const KernelTable& kernels, std::span<const double> xhat0, double dt, double T,
                     const RomOptions& options) {
  const std::size_t R = kernels.n_resolved;
  if (xhat0.size() != R || basis.n_vars != R) throw InvalidArgument("integrate_rom: dimension mismatch");
  if (basis.size() != kernels.n_basis()) throw InvalidArgument("integrate_rom: basis/kernel mismatch");
  if (std::abs(dt - kernels.dt) > 1e-12 * kernels.dt) {
    throw InvalidArgument("integrate_rom: dt must equal the kernel-table dt");
  }
  const std::size_t n_steps = step_count(dt, T);
  if (kernels.n_times < n_steps + 1) {
    throw InvalidArgument("integrate_rom: kernel table shorter than the integration horizon");
  }

  BasisEvaluator eval(basis, scaling);
  const std::size_t J = basis.size();
  HistoryBuffer history(J);
  history.reserve(n_steps + 1);
  std::vector<double> h(J);

  RomRun run;
  Trajectory& traj = run.trajectory;
  traj.dt = dt;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);

  std::vector<double> x(xhat0.begin(), xhat0.end()), mem(R), k1(R), k2(R), tmp(R);
  traj.times.push_back(0.0);
  traj.states.push_back(x);
  eval.values(x, h);
  history.push(h);

  for (std::size_t n = 0; n < n_steps; ++n) {
    memory_term(history, kernels, n, mem, options.cutoff_lag, &run.memory_macs);
    markovian(x, k1);
    for (std::size_t i = 0; i < R; ++i) tmp[i] = x[i] + 0.5 * dt * (k1[i] + mem[i]);
    markovian(tmp, k2);
    for (std::size_t i = 0; i < R; ++i) x[i] += dt * (k2[i] + mem[i]);
    const double t = double(n + 1) * dt;
    if (!all_finite(x)) {
      if (options.allow_divergence) {
        run.divergence = Divergence{t, n + 1};
        break;
      }
      throw DivergenceError("integrate_rom: non-finite state at t=" + std::to_string(t), t, n + 1);
    }
    traj.times.push_back(t);
    traj.states.push_back(x);
    eval.values(x, h);
    history.push(h);
  }
  return run;
}

Trajectory integrate_markovian(const RhsFn& markovian, std::span<const double> xhat0, double dt,
                               double T) {
  FullOrderSystem sys{xhat0.size(), xhat0.size(), markovian};
  return rk_integrate(sys, xhat0, dt, T, RkScheme::RK2);
}

}  // namespace mzrom
