#include "mzrom/linear_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/rom.hpp"

namespace mzrom::linear_oracle {

FullOrderSystem system() {
  return {2, 1, [](std::span<const double> x, std::span<double> out) {
            out[0] = x[1];
            out[1] = -x[0] - 2.0 * x[1];
          }};
}

void Config::validate() const {
  if (!(sigma > 0.0)) throw InvalidArgument("oracle: sigma must be positive");
  if (n_quad < 2) throw InvalidArgument("oracle: n_quad must be >= 2 for a degree-1 basis");
  step_count(dt_full, dt_kernel);
  step_count(dt_kernel, T);
}

Result run(const Config& c) {
  c.validate();
  const FullOrderSystem sys = system();
  const ScalingParams scaling{{c.mu}, {c.sigma}};
  const PolyBasis basis = build_basis(1, 1);
  const EnsembleGrid grid = ensemble_grid(gauss_hermite_rule(c.n_quad), scaling, 1, 2);
  // L applied to the initial noise y.
  const StateObservable la0 = [](std::span<const double> x, std::span<double> out) {
    out[0] = -x[0] - 2.0 * x[1];
  };
  CorrelationOptions opt;
  opt.solver_dt = c.dt_full;
  opt.kernel_dt = c.dt_kernel;
  opt.T = c.T;
  opt.workers = c.workers;

  Result r;
  r.kernels = solve_volterra(compute_correlations(sys, grid, basis, la0, opt), basis, scaling);

  const RhsFn markov = [](std::span<const double>, std::span<double> out) { out[0] = 0.0; };
  const std::vector<double> x0{c.x0};
  const RomRun rom = integrate_rom(markov, basis, scaling, r.kernels, x0, c.dt_kernel, c.T);

  for (std::size_t n = 0; n < r.kernels.n_times; ++n) {
    const double t = double(n) * c.dt_kernel;
    const double decay = std::exp(-2.0 * t);
    r.times.push_back(t);
    r.k0.push_back(r.kernels.at(n, 0, 0));
    r.k1.push_back(r.kernels.at(n, 1, 0));
    r.k0_exact.push_back(-c.mu * decay);
    r.k1_exact.push_back(-c.sigma * decay);
    r.rom.push_back(rom.trajectory.states[n][0]);
    r.rom_exact.push_back(c.x0 * (1.0 + t) * std::exp(-t));
    r.kernel_error = std::max({r.kernel_error, std::abs(r.k0.back() - r.k0_exact.back()),
                               std::abs(r.k1.back() - r.k1_exact.back())});
    r.rom_error = std::max(r.rom_error, std::abs(r.rom.back() - r.rom_exact.back()));
  }
  return r;
}

void write_outputs(const Result& r, const std::filesystem::path& dir) {
  CsvTable t({"t", "K0", "K0_exact", "K1", "K1_exact", "x_rom", "x_exact"});
  for (std::size_t n = 0; n < r.times.size(); ++n) {
    const double row[] = {r.times[n], r.k0[n], r.k0_exact[n], r.k1[n], r.k1_exact[n], r.rom[n], r.rom_exact[n]};
    t.add_row(row);
  }
  t.save(dir / "oracle_linear.csv");
}

}  // namespace mzrom::linear_oracle
