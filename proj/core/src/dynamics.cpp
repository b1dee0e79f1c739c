#include "mzrom/dynamics.hpp"

#include <cmath>
#include <string>

#include "mzrom/errors.hpp"

namespace mzrom {

void FullOrderSystem::validate() const {
  if (dimension == 0) throw InvalidArgument("system: dimension must be positive");
  if (n_resolved == 0 || n_resolved > dimension) {
    throw InvalidArgument("system: resolved count must lie in [1, dimension]");
  }
  if (!rhs) throw InvalidArgument("system: missing right-hand side");
}

bool all_finite(std::span<const double> x) noexcept {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::size_t step_count(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidArgument("time grid: dt and T must be positive");
  const double ratio = T / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw InvalidArgument("time grid: T/dt = " + std::to_string(ratio) + " is not an integer");
  }
  return static_cast<std::size_t>(rounded);
}

RkStepper::RkStepper(RhsFn rhs, std::size_t dimension, RkScheme scheme)
    : rhs_(std::move(rhs)),
      scheme_(scheme),
      k1_(dimension),
      k2_(dimension),
      k3_(scheme == RkScheme::RK4 ? dimension : 0),
      k4_(scheme == RkScheme::RK4 ? dimension : 0),
      tmp_(dimension) {}

void RkStepper::step(std::span<double> x, double dt) {
  const std::size_t n = x.size();
  if (scheme_ == RkScheme::RK2) {
    rhs_(x, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * dt * k1_[i];
    rhs_(tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) x[i] += dt * k2_[i];
    return;
  }
  rhs_(x, k1_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * dt * k1_[i];
  rhs_(tmp_, k2_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * dt * k2_[i];
  rhs_(tmp_, k3_);
  for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
  rhs_(tmp_, k4_);
  const double c = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    x[i] += c * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }
}

std::optional<Divergence> rk_evolve(const RhsFn& rhs, std::span<double> x, double dt,
                                    std::size_t n_steps, RkScheme scheme,
                                    std::size_t sample_every, const StepObserver& observer) {
  if (sample_every == 0) sample_every = 1;
  RkStepper stepper(rhs, x.size(), scheme);
  if (!all_finite(x)) return Divergence{0.0, 0};
  if (observer) observer(0, 0.0, x);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    stepper.step(x, dt);
    const double t = double(n) * dt;
    if (!all_finite(x)) return Divergence{t, n};
    if (observer && n % sample_every == 0) observer(n, t, x);
  }
  return std::nullopt;
}

Trajectory rk_integrate(const FullOrderSystem& system, std::span<const double> x0, double dt,
                        double T, RkScheme scheme) {
  system.validate();
  if (x0.size() != system.dimension) throw InvalidArgument("rk_integrate: x0 has wrong length");
  const std::size_t n_steps = step_count(dt, T);

  Trajectory traj;
  traj.dt = dt;
  traj.times.reserve(n_steps + 1);
  traj.states.reserve(n_steps + 1);
  std::vector<double> x(x0.begin(), x0.end());
  const auto div = rk_evolve(system.rhs, x, dt, n_steps, scheme, 1,
                             [&](std::size_t, double t, std::span<const double> s) {
                               traj.times.push_back(t);
                               traj.states.emplace_back(s.begin(), s.end());
                             });
  if (div) {
    throw DivergenceError("rk_integrate: non-finite state at t=" + std::to_string(div->time),
                          div->time, div->step);
  }
  return traj;
}

std::vector<double> markovian_rhs(const FullOrderSystem& system, std::span<const double> xhat) {
  system.validate();
  if (xhat.size() != system.n_resolved) {
    throw InvalidArgument("markovian_rhs: xhat has wrong length");
  }
  std::vector<double> x(system.dimension, 0.0);
  std::copy(xhat.begin(), xhat.end(), x.begin());
  std::vector<double> r(system.dimension);
  system.rhs(x, r);
  r.resize(system.n_resolved);
  return r;
}

std::vector<double> noise_initial(const FullOrderSystem& system, std::span<const double> x) {
  system.validate();
  if (x.size() != system.dimension) throw InvalidArgument("noise_initial: x has wrong length");
  std::vector<double> full(system.dimension);
  system.rhs(x, full);
  const auto check = markovian_rhs(system, x.first(system.n_resolved));
  std::vector<double> out(system.n_resolved);
  for (std::size_t k = 0; k < system.n_resolved; ++k) out[k] = full[k] - check[k];
  return out;
}

}  // namespace mzrom
