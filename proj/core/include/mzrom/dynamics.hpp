#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace mzrom {

/// Right-hand side x -> R(x). Writes into out (same length as x).
using RhsFn = std::function<void(std::span<const double> x, std::span<double> out)>;

/// Full-order ODE system x' = R(x). The resolved variables are the first
/// n_resolved components of the state.
struct FullOrderSystem {
  std::size_t dimension = 0;
  std::size_t n_resolved = 0;
  RhsFn rhs;

  void validate() const;
};

enum class RkScheme { RK2, RK4 };

struct Trajectory {
  double dt = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;

  std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
};

struct Divergence {
  double time;
  std::size_t step;
};

/// Called at every sampled step with (step index, time, state).
using StepObserver = std::function<void(std::size_t step, double t, std::span<const double> x)>;

/// Number of steps of size dt that cover [0, T]; throws InvalidArgument if
/// T/dt is not an integer to within rounding.
std::size_t step_count(double dt, double T);

/// Explicit Runge-Kutta stepper with preallocated stage storage.
/// RK2 is the explicit midpoint rule, RK4 the classical four-stage scheme.
class RkStepper {
public:
  RkStepper(RhsFn rhs, std::size_t dimension, RkScheme scheme);

  /// Advances x in place by one step.
  void step(std::span<double> x, double dt);

private:
  RhsFn rhs_;
  RkScheme scheme_;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Integrates from x (updated in place) for n_steps, calling observer at
/// step 0 and every sample_every steps. Returns the divergence point if a
/// non-finite state is produced; the observer is not called for it.
std::optional<Divergence> rk_evolve(const RhsFn& rhs, std::span<double> x, double dt,
                                    std::size_t n_steps, RkScheme scheme,
                                    std::size_t sample_every, const StepObserver& observer);

/// Full trajectory on the uniform grid t_n = n dt. Throws DivergenceError.
Trajectory rk_integrate(const FullOrderSystem& system, std::span<const double> x0, double dt,
                        double T, RkScheme scheme);

/// First n_resolved components of R evaluated at (xhat, 0).
std::vector<double> markovian_rhs(const FullOrderSystem& system, std::span<const double> xhat);

/// R_k(x) - R_k(xhat, 0) for the resolved components: the initial noise.
std::vector<double> noise_initial(const FullOrderSystem& system, std::span<const double> x);

bool all_finite(std::span<const double> x) noexcept;

}  // namespace mzrom
