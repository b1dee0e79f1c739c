#include "mzrom/nl_showcase.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/rom.hpp"

namespace mzrom::nl {

FullOrderSystem system() {
  return {2, 1, [](std::span<const double> x, std::span<double> out) {
            out[0] = -x[0] * x[0] + 8.0 * x[0] * x[1];
            out[1] = std::cos(x[0] + x[1]);
          }};
}

void la0_observable(std::span<const double> x, std::span<double> out) {
  const double a = x[0], b = x[1];
  out[0] = 8.0 * a * (-a * b + 8.0 * b * b + std::cos(a + b));
}

double g_observable(const PolyBasis& basis, const ScalingParams& scaling, std::size_t j,
                    std::span<const double> x) {
  const BasisValue h = basis_eval(basis, j, x.first(1), scaling);
  return h.gradient[0] * (-x[0] * x[0] + 8.0 * x[0] * x[1]);
}

double Config::resolved_sigma(const QuadratureRule& rule) const {
  if (sigma > 0.0) return sigma;
  const double zmax = rule.nodes.back();
  return zmax > 0.0 ? 1.5 / zmax : 1.5;
}

void Config::validate() const {
  if (max_degree < 1) throw InvalidArgument("nl config: max_degree must be >= 1");
  if (n_quad < 1) throw InvalidArgument("nl config: n_quad must be >= 1");
  if (sigma < 0.0) throw InvalidArgument("nl config: sigma must be positive (or 0 for auto)");
  if (x1_cases.empty()) throw InvalidArgument("nl config: no x1 cases");
  step_count(dt_full, dt_kernel);
  step_count(dt_kernel, T);
}

namespace {

std::string case_label(double x1) {
  if (x1 == std::floor(x1) && std::abs(x1) < 1e15) return std::to_string(static_cast<long long>(x1));
  return format_double(x1);
}

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / double(a.size());
}

}  // namespace

Experiment run_experiment(const Config& config) {
  config.validate();
  Experiment ex;
  ex.config = config;
  ex.rule = gauss_hermite_rule(config.n_quad);
  const double sigma = config.resolved_sigma(ex.rule);
  ex.scaling = {{config.mu}, {sigma}};
  const double lo = config.mu + sigma * ex.rule.nodes.front();
  const double hi = config.mu + sigma * ex.rule.nodes.back();
  if (config.sigma == 0.0 && (lo < 1.0 - 1e-12 || hi > 4.0 + 1e-12)) {
    throw InvalidArgument("nl config: quadrature nodes fall outside [1, 4]");
  }

  const FullOrderSystem sys = system();
  const PolyBasis basis = build_basis(1, config.max_degree);
  const EnsembleGrid grid = ensemble_grid(ex.rule, ex.scaling, 1, 2);

  CorrelationOptions copt;
  copt.solver_dt = config.dt_full;
  copt.kernel_dt = config.dt_kernel;
  copt.T = config.T;
  copt.scheme = RkScheme::RK4;
  copt.workers = config.workers;
  const CorrelationTables tables = compute_correlations(sys, grid, basis, la0_observable, copt);
  ex.kernels = solve_volterra(tables, basis, ex.scaling);

  const RhsFn markov = [](std::span<const double> x, std::span<double> out) {
    out[0] = -x[0] * x[0];
  };
  const std::size_t stride = step_count(config.dt_full, config.dt_kernel);
  const std::size_t n_fine = step_count(config.dt_full, config.T);

  for (double x1 : config.x1_cases) {
    CaseResult c;
    c.x1 = x1;
    c.extrapolation = x1 < lo || x1 > hi;

    std::vector<double> x{x1, 0.0};
    c.reference.push_back(x1);
    const auto div = rk_evolve(sys.rhs, x, config.dt_full, n_fine, RkScheme::RK4, stride,
                               [&](std::size_t step, double, std::span<const double> s) {
                                 if (step > 0) c.reference.push_back(s[0]);
                               });
    if (div) throw DivergenceError("nl reference diverged", div->time, div->step);

    const std::vector<double> x0{x1};
    const Trajectory mk = integrate_markovian(markov, x0, config.dt_kernel, config.T);
    const RomRun mem =
        integrate_rom(markov, basis, ex.scaling, ex.kernels, x0, config.dt_kernel, config.T);
    c.times = mk.times;
    for (const auto& s : mk.states) c.markovian.push_back(s[0]);
    for (const auto& s : mem.trajectory.states) c.memory.push_back(s[0]);

    c.mean_error_markovian = mean_abs_diff(c.reference, c.markovian);
    c.mean_error_memory = mean_abs_diff(c.reference, c.memory);
    c.terminal_error_markovian = std::abs(c.reference.back() - c.markovian.back());
    c.terminal_error_memory = std::abs(c.reference.back() - c.memory.back());
    ex.cases.push_back(std::move(c));
  }
  return ex;
}

void write_outputs(const Experiment& ex, const std::filesystem::path& dir) {
  const std::string d = std::to_string(ex.config.max_degree);
  for (const CaseResult& c : ex.cases) {
    CsvTable t({"t", "reference", "markovian", "memory"});
    for (std::size_t n = 0; n < c.times.size(); ++n) {
      const double row[] = {c.times[n], c.reference[n], c.markovian[n], c.memory[n]};
      t.add_row(row);
    }
    t.save(dir / ("nl_case_" + case_label(c.x1) + "_" + d + ".csv"));
  }
  std::vector<std::string> header{"t"};
  const std::size_t J = ex.kernels.n_basis();
  for (std::size_t j = 0; j < J; ++j) header.push_back("K_" + std::to_string(j));
  CsvTable k(header);
  std::vector<double> row(J + 1);
  for (std::size_t n = 0; n < ex.kernels.n_times; ++n) {
    row[0] = double(n) * ex.kernels.dt;
    for (std::size_t j = 0; j < J; ++j) row[j + 1] = std::abs(ex.kernels.at(n, j, 0));
    k.add_row(row);
  }
  k.save(dir / ("nl_kernels_" + d + ".csv"));

  CsvTable summary({"x1", "extrapolation", "mean_err_markovian", "mean_err_memory",
                    "terminal_err_markovian", "terminal_err_memory"});
  for (const CaseResult& c : ex.cases) {
    const double row2[] = {c.x1, c.extrapolation ? 1.0 : 0.0, c.mean_error_markovian,
                           c.mean_error_memory, c.terminal_error_markovian, c.terminal_error_memory};
    summary.add_row(row2);
  }
  summary.save(dir / ("nl_summary_" + d + ".csv"));
}

}  // namespace mzrom::nl
