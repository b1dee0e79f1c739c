#include "mzrom/burgers_mz.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/rom.hpp"
#include "mzrom/surrogate.hpp"

namespace mzrom::vb {

namespace {

// Per-thread scratch for the full-order right-hand side.
struct RhsWorkspace {
  std::unique_ptr<BurgersOperator> op;
  SpectralState in, out;
};

BurgersOperator& workspace_operator(RhsWorkspace& ws, std::size_t n, double nu) {
  if (!ws.op || ws.op->grid_size() != n || ws.op->nu() != nu) {
    ws.op = std::make_unique<BurgersOperator>(n, nu);
    ws.in = SpectralState(n);
    ws.out = SpectralState(n);
  }
  return *ws.op;
}

RealFft& padded_fft(std::size_t n) {
  thread_local std::unique_ptr<RealFft> fft;
  if (!fft || fft->size() != n) fft = std::make_unique<RealFft>(n);
  return *fft;
}

cplx mode(std::span<const cplx> c, long p) {
  const auto a = std::size_t(std::abs(p));
  if (a >= c.size()) return 0.0;
  return p >= 0 ? c[a] : std::conj(c[a]);
}

SpectralState resolved_state(std::span<const double> xhat, std::size_t M, std::size_t grid_size) {
  SpectralState s(grid_size);
  for (std::size_t k = 1; k <= M; ++k) s.coeffs[k] = cplx(xhat[k - 1], xhat[M + k - 1]);
  return s;
}

}  // namespace

ScalingParams Config::scaling() const {
  ScalingParams s;
  s.mu.assign(2 * M, 0.0);
  s.sigma.resize(2 * M);
  for (std::size_t k = 1; k <= M; ++k) {
    s.sigma[k - 1] = std::exp(-double(k));
    s.sigma[M + k - 1] = std::exp(-double(k));
  }
  return s;
}

void Config::validate() const {
  if (M == 0) throw InvalidArgument("vb: M must be >= 1");
  if (grid_size < 8 || (grid_size & (grid_size - 1)) != 0) {
    throw InvalidArgument("vb: grid_size must be a power of two >= 8");
  }
  if (M >= active_modes(grid_size)) throw InvalidArgument("vb: M must be below N_g/2 - 1");
  if (linear_degree > cubic_degree) throw InvalidArgument("vb: linear_degree must not exceed cubic_degree");
  if (n_quad == 0) throw InvalidArgument("vb: n_quad must be >= 1");
  if (!(nu > 0.0)) throw InvalidArgument("vb: nu must be positive");
  step_count(dt_full, dt_kernel);
  step_count(dt_kernel, T);
  step_count(dt_kernel, sample_dt);
  step_count(sample_dt, T);
  if (ics.empty()) throw InvalidArgument("vb: at least one initial condition is required");
  for (const auto& ic : ics) {
    if (ic != "sin" && ic != "expsin" && ic != "cos2sin") {
      throw InvalidArgument("vb: unknown initial condition '" + ic + "'");
    }
  }
}

std::size_t active_modes(std::size_t grid_size) { return grid_size / 2 - 1; }

void pack_into(const SpectralState& state, std::size_t M, std::span<double> x) {
  const std::size_t K = active_modes(state.grid_size);
  if (M > K) throw InvalidArgument("vb::pack: M exceeds the active modes");
  if (x.size() != 2 * K) throw InvalidArgument("vb::pack: vector length does not match grid");
  const std::size_t U = K - M;
  for (std::size_t k = 1; k <= K; ++k) {
    const std::size_t re = k <= M ? k - 1 : 2 * M + (k - M - 1);
    const std::size_t im = k <= M ? M + k - 1 : 2 * M + U + (k - M - 1);
    x[re] = state.coeffs[k].real();
    x[im] = state.coeffs[k].imag();
  }
}

void unpack_into(std::span<const double> x, std::size_t M, SpectralState& state) {
  const std::size_t K = active_modes(state.grid_size);
  if (x.size() != 2 * K) throw InvalidArgument("vb::unpack: vector length does not match grid");
  if (M > K) throw InvalidArgument("vb::unpack: M exceeds the active modes");
  const std::size_t U = K - M;
  state.coeffs[0] = 0.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const std::size_t re = k <= M ? k - 1 : 2 * M + (k - M - 1);
    const std::size_t im = k <= M ? M + k - 1 : 2 * M + U + (k - M - 1);
    state.coeffs[k] = cplx(x[re], x[im]);
  }
  state.coeffs[K + 1] = 0.0;
}

std::vector<double> pack(const SpectralState& state, std::size_t M) {
  std::vector<double> x(2 * active_modes(state.grid_size));
  pack_into(state, M, x);
  return x;
}

SpectralState unpack(std::span<const double> x, std::size_t M, std::size_t grid_size) {
  SpectralState s(grid_size);
  unpack_into(x, M, s);
  return s;
}

FullOrderSystem system(const Config& config) {
  config.validate();
  const std::size_t n = config.grid_size;
  const std::size_t M = config.M;
  const double nu = config.nu;
  FullOrderSystem sys;
  sys.dimension = 2 * active_modes(n);
  sys.n_resolved = 2 * M;
  sys.rhs = [n, M, nu](std::span<const double> x, std::span<double> out) {
    thread_local RhsWorkspace ws;
    BurgersOperator& op = workspace_operator(ws, n, nu);
    unpack_into(x, M, ws.in);
    op.rhs(ws.in, ws.out);
    pack_into(ws.out, M, out);
  };
  return sys;
}

Observables observables(const SpectralState& state, std::size_t M, double nu) {
  const std::size_t n = state.grid_size;
  const std::size_t K = active_modes(n);
  if (M == 0 || M > K) throw InvalidArgument("vb::observables: need 1 <= M <= N_g/2 - 1");
  const std::size_t P = 2 * n;
  RealFft& fft = padded_fft(P);
  const std::size_t half = P / 2 + 1;

  std::vector<cplx> theta(state.coeffs.begin(), state.coeffs.begin() + long(K + 1));
  std::vector<cplx> c(half, cplx(0.0));
  for (std::size_t k = 0; k <= K; ++k) c[k] = theta[k];
  std::vector<double> u(P), w(P);
  fft.inverse(c, u);
  for (std::size_t j = 0; j < P; ++j) w[j] = u[j] * u[j];
  fft.forward(w, c);

  // Exact Galerkin right-hand side on modes <= K.
  std::vector<cplx> R(K + 1, cplx(0.0));
  for (std::size_t p = 1; p <= K; ++p) {
    const double pp = double(p);
    R[p] = cplx(0.0, -0.5 * pp) * c[p] - nu * pp * pp * theta[p];
  }
  std::fill(c.begin(), c.end(), cplx(0.0));
  for (std::size_t p = 0; p <= K; ++p) c[p] = R[p];
  fft.inverse(c, w);
  for (std::size_t j = 0; j < P; ++j) w[j] *= u[j];
  fft.forward(w, c);

  Observables o;
  o.la0_phi.resize(M);
  o.la0_psi.resize(M);
  const auto Ml = long(M);
  for (long k = 1; k <= Ml; ++k) {
    cplx low = 0.0;
    for (long p = k - Ml; p <= Ml; ++p) low += mode(theta, k - p) * mode(R, p);
    const cplx F = cplx(0.0, double(k)) * (c[std::size_t(k)] - low);
    o.la0_phi[std::size_t(k - 1)] = -F.real();
    o.la0_psi[std::size_t(k - 1)] = -F.imag();
  }

  std::vector<double> x(M), y(M);
  for (std::size_t k = 1; k <= M; ++k) {
    x[k - 1] = theta[k].real();
    y[k - 1] = theta[k].imag();
  }
  auto markov = real_imag_rhs(x, y, nu, M);
  o.markov_phi = std::move(markov.T);
  o.markov_psi = std::move(markov.S);
  return o;
}

Observables observables_direct(const SpectralState& state, std::size_t M, double nu) {
  const std::size_t K = active_modes(state.grid_size);
  if (M == 0 || M > K) throw InvalidArgument("vb::observables_direct: need 1 <= M <= N_g/2 - 1");
  std::vector<double> x(K), y(K);
  for (std::size_t k = 1; k <= K; ++k) {
    x[k - 1] = state.coeffs[k].real();
    y[k - 1] = state.coeffs[k].imag();
  }
  const RealImagRhs full = real_imag_rhs(x, y, nu);
  const auto Kl = long(K), Ml = long(M);
  auto X = [&](long p) { return p == 0 || std::abs(p) > Kl ? 0.0 : x[std::size_t(std::abs(p) - 1)]; };
  auto Y = [&](long p) {
    if (p == 0 || std::abs(p) > Kl) return 0.0;
    return p > 0 ? y[std::size_t(p - 1)] : -y[std::size_t(-p - 1)];
  };
  auto Tf = [&](long p) { return p == 0 ? 0.0 : full.T[std::size_t(std::abs(p) - 1)]; };
  auto Sf = [&](long p) {
    if (p == 0) return 0.0;
    return p > 0 ? full.S[std::size_t(p - 1)] : -full.S[std::size_t(-p - 1)];
  };

  Observables o;
  o.la0_phi.assign(M, 0.0);
  o.la0_psi.assign(M, 0.0);
  for (long k = 1; k <= Ml; ++k) {
    double s1 = 0.0, s2 = 0.0;
    for (long p = k - Kl; p <= Kl; ++p) {
      const long q = k - p;
      if (std::abs(p) <= Ml && std::abs(q) <= Ml) continue;
      s1 += Y(q) * Tf(p) + X(q) * Sf(p);
      s2 += X(q) * Tf(p) - Y(q) * Sf(p);
    }
    o.la0_phi[std::size_t(k - 1)] = double(k) * s1;
    o.la0_psi[std::size_t(k - 1)] = -double(k) * s2;
  }
  auto markov = real_imag_rhs(std::span<const double>(x).first(M), std::span<const double>(y).first(M), nu, M);
  o.markov_phi = std::move(markov.T);
  o.markov_psi = std::move(markov.S);
  return o;
}

EnsembleGrid ensemble(const Config& config) {
  config.validate();
  return ensemble_grid(gauss_hermite_rule(config.n_quad), config.scaling(), config.n_rom(),
                       2 * active_modes(config.grid_size));
}

KernelSet compute_kernels(const Config& config) {
  config.validate();
  const FullOrderSystem sys = system(config);
  const EnsembleGrid ens = ensemble(config);
  const PolyBasis cubic = build_basis(config.n_rom(), config.cubic_degree);
  const PolyBasis linear = build_basis(config.n_rom(), config.linear_degree);
  const std::size_t n = config.grid_size, M = config.M;
  const double nu = config.nu;
  const StateObservable la0 = [n, M, nu](std::span<const double> x, std::span<double> out) {
    const Observables o = observables(unpack(x, M, n), M, nu);
    std::copy(o.la0_phi.begin(), o.la0_phi.end(), out.begin());
    std::copy(o.la0_psi.begin(), o.la0_psi.end(), out.begin() + long(M));
  };
  CorrelationOptions opt;
  opt.solver_dt = config.dt_full;
  opt.kernel_dt = config.dt_kernel;
  opt.T = config.T;
  opt.scheme = RkScheme::RK4;
  opt.workers = config.workers;
  opt.member_block = config.member_block;
  const CorrelationTables tables = compute_correlations(sys, ens, cubic, la0, opt);
  KernelSet set;
  set.cubic = solve_volterra(tables, cubic, ens.scaling);
  set.linear = solve_volterra(restrict_tables(tables, cubic, linear), linear, ens.scaling);
  return set;
}

SpectralState experiment_initial_condition(const std::string& name, std::size_t M, std::size_t grid_size) {
  SpectralState u0 = named_initial_condition(name, grid_size);
  if (name != "sin") project_lowpass_inplace(u0, M);
  return u0;
}

std::vector<IcResult> rom_experiment(const Config& config, const KernelSet& kernels) {
  config.validate();
  const std::size_t M = config.M;
  const double nu = config.nu;
  const double dt = config.dt_kernel;
  const std::size_t stride = step_count(dt, config.sample_dt);
  const RhsFn markov = [M, nu](std::span<const double> x, std::span<double> out) {
    const RealImagRhs r = real_imag_rhs(x.first(M), x.subspan(M, M), nu, M);
    std::copy(r.T.begin(), r.T.end(), out.begin());
    std::copy(r.S.begin(), r.S.end(), out.begin() + long(M));
  };
  const PolyBasis linear = kernels.linear.basis();
  const PolyBasis cubic = kernels.cubic.basis();

  std::vector<IcResult> results;
  for (const auto& name : config.ics) {
    const SpectralState u0 = experiment_initial_condition(name, M, 512);
    const BurgersSolution ref = solve_burgers(u0, reference_options(nu, config.T, config.sample_dt));
    if (ref.divergence) throw DivergenceError("vb: reference solve diverged", ref.divergence->time, ref.divergence->step);

    const ZeroModeSplit split = reduce_zero_mode(u0);
    std::vector<double> xhat0(2 * M);
    for (std::size_t k = 1; k <= M; ++k) {
      xhat0[k - 1] = split.fluctuation.coeffs[k].real();
      xhat0[M + k - 1] = split.fluctuation.coeffs[k].imag();
    }
    struct Run {
      std::vector<std::vector<double>> states;
      std::optional<Divergence> divergence;
    };
    const std::size_t n_steps = step_count(dt, config.T);
    Run rm;
    {
      std::vector<double> x = xhat0;
      rm.divergence = rk_evolve(markov, x, dt, n_steps, RkScheme::RK2, 1,
                                [&](std::size_t, double, std::span<const double> s) {
                                  rm.states.emplace_back(s.begin(), s.end());
                                });
    }
    RomOptions ro;
    ro.allow_divergence = true;
    auto memory_run = [&](const PolyBasis& basis, const KernelTable& kt) {
      RomRun run = integrate_rom(markov, basis, kt.scaling, kt, xhat0, dt, config.T, ro);
      return Run{std::move(run.trajectory.states), run.divergence};
    };
    const Run rl = memory_run(linear, kernels.linear);
    const Run rc = memory_run(cubic, kernels.cubic);

    IcResult r;
    r.ic = name;
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < ref.times.size(); ++i) {
      const double t = ref.times[i];
      const SpectralState target = project_lowpass(ref.snapshots[i], M);
      auto err = [&](const Run& run) {
        if (i * stride >= run.states.size()) return nan;
        return l2_distance(target, reconstruct(split.mean, resolved_state(run.states[i * stride], M, 512), t));
      };
      r.times.push_back(t);
      r.err_markovian.push_back(err(rm));
      r.err_linear.push_back(err(rl));
      r.err_cubic.push_back(err(rc));
    }
    auto mean = [](const std::vector<double>& v, const Run& run) {
      if (run.divergence) return std::numeric_limits<double>::infinity();
      double s = 0.0;
      for (double e : v) s += e;
      return s / double(v.size());
    };
    auto when = [](const Run& run) -> std::optional<double> {
      if (run.divergence) return run.divergence->time;
      return std::nullopt;
    };
    r.mean_markovian = mean(r.err_markovian, rm);
    r.mean_linear = mean(r.err_linear, rl);
    r.mean_cubic = mean(r.err_cubic, rc);
    r.blowup_markovian = when(rm);
    r.blowup_linear = when(rl);
    r.blowup_cubic = when(rc);
    results.push_back(std::move(r));
  }
  return results;
}

void write_outputs(const std::vector<IcResult>& results, const std::filesystem::path& dir) {
  for (const auto& r : results) {
    CsvTable t({"t", "err_markovian", "err_linear", "err_cubic"});
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      const double row[] = {r.times[i], r.err_markovian[i], r.err_linear[i], r.err_cubic[i]};
      t.add_row(row);
    }
    t.save(dir / ("vb_" + r.ic + ".csv"));
  }
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::string ev = "ic,model,blowup_time,mean_error\n";
  for (const auto& r : results) {
    const std::pair<const char*, std::pair<std::optional<double>, double>> rows[] = {
        {"markovian", {r.blowup_markovian, r.mean_markovian}},
        {"linear", {r.blowup_linear, r.mean_linear}},
        {"cubic", {r.blowup_cubic, r.mean_cubic}}};
    for (const auto& [model, info] : rows) {
      const double bt = info.first.value_or(nan);
      ev += r.ic + ',' + model + ',' + (std::isfinite(bt) ? format_double(bt) : "") + ',' +
            (std::isfinite(info.second) ? format_double(info.second) : "") + '\n';
    }
  }
  write_file_atomic(dir / "vb_events.csv", ev);
}

}  // namespace mzrom::vb
