#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/surrogate.hpp"

namespace mzrom {

namespace {

std::span<double> as_real(std::vector<cplx>& v) {
  return {reinterpret_cast<double*>(v.data()), 2 * v.size()};
}

}  // namespace

SpectralState named_initial_condition(const std::string& name, std::size_t grid_size) {
  std::vector<double> u(grid_size);
  for (std::size_t j = 0; j < grid_size; ++j) {
    const double z = 2.0 * std::numbers::pi * double(j) / double(grid_size);
    if (name == "sin") {
      u[j] = std::sin(z);
    } else if (name == "expsin") {
      u[j] = std::exp(std::sin(z));
    } else if (name == "cos2sin") {
      u[j] = std::cos(2.0 * std::sin(z));
    } else {
      throw InvalidArgument("unknown initial condition '" + name + "' (expected sin, expsin, cos2sin)");
    }
  }
  SpectralState s = from_grid(u);
  s.coeffs.back() = 0.0;
  return s;
}

StabilityResult stability_experiment(const SurrogateNet& net, const StabilityConfig& c) {
  if (net.input != c.grid_size) throw InvalidArgument("stability: network width does not match grid size");
  const std::size_t n_steps = step_count(c.dt, c.T);
  const std::size_t stride = step_count(c.dt, c.sample_dt);
  const std::size_t n_samples = n_steps / stride + 1;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  StabilityResult result;
  for (const auto& ic : c.ics) {
    StabilityCase sc;
    sc.ic = ic;
    const SpectralState u0_ref = named_initial_condition(ic, 512);
    const BurgersSolution ref = solve_burgers(u0_ref, reference_options(c.nu, c.T, c.sample_dt));
    if (ref.divergence) throw DivergenceError("stability: reference diverged", ref.divergence->time, ref.divergence->step);
    sc.times = ref.times;

    for (std::size_t M : c.cutoffs) {
      CutoffRun run;
      run.cutoff = M;
      run.errors.assign(n_samples, nan);
      SurrogateOperator op(net, c.nu, M);
      SpectralState state = project_lowpass(resample(u0_ref, c.grid_size), M);
      run.initial_sup = sup_norm(state);
      SpectralState in(c.grid_size), out(c.grid_size);
      const RhsFn rhs = [&](std::span<const double> x, std::span<double> dx) {
        std::copy(x.begin(), x.end(), as_real(in.coeffs).begin());
        op.rhs(in, out);
        std::copy_n(as_real(out.coeffs).begin(), dx.size(), dx.begin());
      };
      double sum = 0.0;
      std::size_t count = 0;
      auto observer = [&](std::size_t step, double, std::span<const double> x) {
        std::copy(x.begin(), x.end(), as_real(in.coeffs).begin());
        const std::size_t i = step / stride;
        const double e = l2_distance(in, ref.snapshots[i]);
        run.errors[i] = e;
        run.max_sup = std::max(run.max_sup, sup_norm(in));
        sum += e;
        ++count;
      };
      run.divergence = rk_evolve(rhs, as_real(state.coeffs), c.dt, n_steps, RkScheme::RK2, stride, observer);
      run.mean_error = count ? sum / double(count) : nan;
      run.final_relative_error = run.divergence ? std::numeric_limits<double>::infinity()
                                                : run.errors.back() / l2_norm(ref.snapshots.back());
      sc.runs.push_back(std::move(run));
    }
    result.cases.push_back(std::move(sc));
  }
  return result;
}

void write_stability_outputs(const StabilityResult& result, const std::filesystem::path& dir) {
  for (const auto& sc : result.cases) {
    std::vector<std::string> header{"t"};
    for (const auto& r : sc.runs) header.push_back("err_M" + std::to_string(r.cutoff));
    CsvTable t(header);
    for (std::size_t i = 0; i < sc.times.size(); ++i) {
      std::vector<double> row{sc.times[i]};
      for (const auto& r : sc.runs) row.push_back(r.errors[i]);
      t.add_partial_row(row, row.size());
    }
    t.save(dir / ("stability_" + sc.ic + ".csv"));

    CsvTable ev({"M", "blowup_time", "blowup_step", "max_sup", "final_relative_error"});
    for (const auto& r : sc.runs) {
      constexpr double nan = std::numeric_limits<double>::quiet_NaN();
      const double row[] = {double(r.cutoff), r.divergence ? r.divergence->time : nan,
                            r.divergence ? double(r.divergence->step) : nan, r.max_sup,
                            r.final_relative_error};
      ev.add_partial_row(row, 5);
    }
    ev.save(dir / ("stability_" + sc.ic + "_events.csv"));
  }
}

}  // namespace mzrom
