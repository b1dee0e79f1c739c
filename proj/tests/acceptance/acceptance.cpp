// Acceptance suite: one PASS/FAIL line per criterion.
//
//   mzrom_acceptance [--criterion N]... [--expect-fail 4,8] [--work DIR] [--full-scale]
//
// Criteria listed in --expect-fail still run and print their real verdict,
// but do not make the process exit nonzero.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "mzrom/burgers_mz.hpp"
#include "mzrom/hermite.hpp"
#include "mzrom/io.hpp"
#include "mzrom/linear_oracle.hpp"
#include "mzrom/nl_showcase.hpp"
#include "mzrom/spectral.hpp"
#include "mzrom/surrogate.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using namespace mzrom;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Options {
  fs::path work;
  bool full_scale = false;
  std::size_t workers = 0;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Gaussian moments E[z^m] = (m-1)!! for even m.
double moment(unsigned m) {
  if (m % 2) return 0.0;
  double v = 1.0;
  for (unsigned k = m; k > 1; k -= 2) v *= double(k - 1);
  return v;
}

Verdict quadrature(const Options&) {
  double worst = 0.0;
  for (std::size_t n = 2; n <= 10; ++n) {
    const auto r = gauss_hermite_rule(n);
    for (unsigned m = 0; m <= 2 * n - 1; ++m) {
      double q = 0.0;
      for (std::size_t i = 0; i < n; ++i) q += r.weights[i] * std::pow(r.nodes[i], m);
      // Odd moments vanish; measure them against the neighbouring even one.
      const double ref = m % 2 ? moment(m + 1) : moment(m);
      worst = std::max(worst, std::abs(q - moment(m)) / ref);
    }
  }
  return {worst <= 1e-10, "max relative moment error " + fmt(worst)};
}

double gram_error(std::size_t n_vars, unsigned d, std::size_t nq) {
  const auto basis = build_basis(n_vars, d);
  const auto rule = gauss_hermite_rule(nq);
  const std::size_t J = basis.size();
  BasisEvaluator ev(basis, ScalingParams::standard(n_vars));
  std::vector<double> gram(J * J, 0.0), v(J), x(n_vars);
  std::vector<std::size_t> idx(n_vars, 0);
  for (bool more = true; more;) {
    double w = 1.0;
    for (std::size_t i = 0; i < n_vars; ++i) {
      x[i] = rule.nodes[idx[i]];
      w *= rule.weights[idx[i]];
    }
    ev.values(x, v);
    for (std::size_t i = 0; i < J; ++i)
      for (std::size_t j = 0; j < J; ++j) gram[i * J + j] += w * v[i] * v[j];
    std::size_t k = n_vars;
    while (k > 0 && ++idx[k - 1] == nq) idx[--k] = 0;
    more = k > 0;
  }
  double e = 0.0;
  for (std::size_t i = 0; i < J; ++i)
    for (std::size_t j = 0; j < J; ++j) e = std::max(e, std::abs(gram[i * J + j] - (i == j ? 1.0 : 0.0)));
  return e;
}

Verdict orthonormality(const Options&) {
  const double e1 = gram_error(2, 3, 6), e2 = gram_error(6, 1, 4);
  const std::size_t j1 = build_basis(6, 1).size(), j2 = build_basis(6, 3).size();
  const bool ok = e1 <= 1e-8 && e2 <= 1e-8 && j1 == 7 && j2 == 84;
  return {ok, "Gram error " + fmt(e1) + " / " + fmt(e2) + ", J = " + std::to_string(j1) + ", " +
                  std::to_string(j2)};
}

Verdict linear_kernel(const Options& o) {
  linear_oracle::Config c;
  c.workers = o.workers;
  const auto r = linear_oracle::run(c);
  return {r.kernel_error <= 1e-4 && r.rom_error <= 1e-3,
          "kernel sup error " + fmt(r.kernel_error) + ", ROM sup error " + fmt(r.rom_error)};
}

Verdict nl_showcase(const Options& o) {
  auto run = [&](unsigned d, std::size_t nq) {
    nl::Config c;
    c.max_degree = d;
    c.n_quad = nq;
    c.workers = o.workers;
    auto ex = nl::run_experiment(c);
    nl::write_outputs(ex, o.work / "nl");
    return ex;
  };
  fs::create_directories(o.work / "nl");
  const auto d3 = run(3, 40);
  const auto d1 = run(1, 20);
  bool mean_ok = true, terminal_ok = true;
  std::ostringstream s;
  for (std::size_t i = 0; i < d3.cases.size(); ++i) {
    const auto& c3 = d3.cases[i];
    if (c3.extrapolation) continue;
    const auto& c1 = d1.cases[i];
    mean_ok = mean_ok && c3.mean_error_memory < c3.mean_error_markovian;
    terminal_ok = terminal_ok && c3.terminal_error_memory <= c1.terminal_error_memory;
    s << " x1=" << c3.x1 << ": mean " << fmt(c3.mean_error_memory) << "<" << fmt(c3.mean_error_markovian)
      << ", terminal d3 " << fmt(c3.terminal_error_memory) << " vs d1 " << fmt(c1.terminal_error_memory) << ";";
  }
  auto kmax = [&](double t) {
    const auto n = std::size_t(std::lround(t / d3.kernels.dt));
    double m = 0.0;
    for (std::size_t j = 0; j < d3.kernels.n_basis(); ++j) m = std::max(m, std::abs(d3.kernels.at(n, j, 0)));
    return m;
  };
  const bool decay_ok = kmax(5.0) < kmax(0.5);
  s << " max|K|(5)=" << fmt(kmax(5.0)) << " max|K|(0.5)=" << fmt(kmax(0.5));
  std::string clauses = std::string("memory<markovian ") + (mean_ok ? "ok" : "FAILED") + ", terminal order " +
                        (terminal_ok ? "ok" : "FAILED") + ", kernel decay " + (decay_ok ? "ok" : "FAILED") + ";";
  return {mean_ok && terminal_ok && decay_ok, clauses + s.str()};
}

Verdict full_order(const Options&) {
  std::vector<double> u(256);
  for (std::size_t j = 0; j < 256; ++j) u[j] = std::sin(2.0 * std::numbers::pi * double(j) / 256.0);
  BurgersOperator op(256, 0.1);
  const auto sinz = from_grid(u);
  const auto r = op.rhs(sinz);
  double rhs_err = 0.0;
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) {
    const cplx expect = k == 1 ? cplx(0.0, 0.05) : k == 2 ? cplx(0.0, 0.25) : cplx(0.0);
    rhs_err = std::max(rhs_err, std::abs(r.coeffs[k] - expect));
  }

  double growth = -INFINITY, diff = 0.0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto u0 = reduce_zero_mode(sample_initial_condition(24, seed, 256)).fluctuation;
    BurgersSolveOptions opt;
    opt.sample_dt = 1e-3;
    const auto sol = solve_burgers(u0, opt);
    if (sol.divergence) return {false, "full-order solve diverged"};
    for (std::size_t i = 1; i < sol.snapshots.size(); ++i)
      growth = std::max(growth, l2_norm(sol.snapshots[i]) - l2_norm(sol.snapshots[i - 1]));
    const auto fine = solve_burgers(u0, reference_options(0.1, 1.0, 1.0));
    diff = std::max(diff, l2_distance(sol.snapshots.back(), fine.snapshots.back()));
  }
  {
    BurgersSolveOptions opt;
    opt.sample_dt = 1.0;
    const auto a = solve_burgers(sinz, opt);
    const auto b = solve_burgers(sinz, reference_options(0.1, 1.0, 1.0));
    diff = std::max(diff, l2_distance(a.snapshots.back(), b.snapshots.back()));
  }
  const bool ok = rhs_err <= 1e-12 && growth <= 1e-10 && diff < 1e-8;
  return {ok, "sin z rhs error " + fmt(rhs_err) + ", max L2 growth per step " + fmt(growth) +
                  ", 2^8 vs 2^9 difference " + fmt(diff)};
}

Verdict splitting(const Options&) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 127;
    std::vector<cplx> theta(K + 1, 0.0);
    std::vector<double> x(K), y(K);
    for (std::size_t k = 1; k <= K; ++k) {
      const double a = 1.0 / (1.0 + double(k));
      theta[k] = cplx(a * z(rng), a * z(rng));
      x[k - 1] = theta[k].real();
      y[k - 1] = theta[k].imag();
    }
    const auto g = galerkin_rhs_direct(theta, 0.1);
    const auto ri = real_imag_rhs(x, y, 0.1);
    for (std::size_t k = 1; k <= K; ++k)
      worst = std::max({worst, std::abs(ri.T[k - 1] - g[k].real()), std::abs(ri.S[k - 1] - g[k].imag())});
  }
  return {worst <= 1e-12, "max |(T + iS) - R| " + fmt(worst)};
}

Verdict observables(const Options&) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    SpectralState s(64);
    for (std::size_t k = 1; k < 32; ++k) {
      const double a = 0.8 * std::exp(-0.3 * double(k));
      s.coeffs[k] = cplx(a * z(rng), a * z(rng));
    }
    const auto a = vb::observables(s, 3, 0.1);
    const auto b = vb::observables_direct(s, 3, 0.1);
    for (std::size_t k = 0; k < 3; ++k)
      worst = std::max({worst, std::abs(a.la0_phi[k] - b.la0_phi[k]), std::abs(a.la0_psi[k] - b.la0_psi[k])});
  }
  return {worst <= 1e-10, "max |physical - double sum| " + fmt(worst)};
}

Verdict stabilization(const Options& o) {
  const std::size_t n_seeds = 5;
  std::size_t passed = 0;
  std::ostringstream s;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    cli::RunConfig cfg = cli::default_config();
    cfg.seed = seed;
    cfg.workers = o.workers;
    if (o.full_scale) {
      cfg.training.data.n_ics = 50;
      cfg.training.data.windows_per_ic = 250;
    }
    cfg.finalize();
    const auto set = make_training_set(cfg.training.data);
    const auto trained = train_surrogate(set, cfg.training.train);
    save_checkpoint(trained.net, o.work / ("surrogate_seed" + std::to_string(seed) + ".ckpt"));
    const auto res = stability_experiment(trained.net, cfg.stability.run);
    const fs::path dir = o.work / ("stability_seed" + std::to_string(seed));
    fs::create_directories(dir);
    write_stability_outputs(res, dir);

    bool ok = true;
    s << " seed " << seed << ":";
    for (const auto& c : res.cases) {
      const CutoffRun *m3 = nullptr, *m12 = nullptr, *m127 = nullptr;
      for (const auto& r : c.runs) {
        if (r.cutoff == 3) m3 = &r;
        if (r.cutoff == 12) m12 = &r;
        if (r.cutoff == 127) m127 = &r;
      }
      const bool bounded = !m12->divergence && m12->max_sup < 4.0 * m12->initial_sup;
      const bool better = m12->mean_error < m3->mean_error;
      const bool wild = m127->divergence.has_value() || m127->final_relative_error > 0.5;
      ok = ok && bounded && better && wild;
      s << " " << c.ic << " [M3 " << fmt(m3->mean_error) << ", M12 " << fmt(m12->mean_error)
        << (bounded ? "" : " unbounded") << ", M127 "
        << (m127->divergence ? "blow-up t=" + fmt(m127->divergence->time)
                             : "rel " + fmt(m127->final_relative_error))
        << "]";
    }
    s << (ok ? " pass;" : " fail;");
    if (ok) ++passed;
  }
  return {passed >= 4, std::to_string(passed) + "/" + std::to_string(n_seeds) + " seeds;" + s.str()};
}

Verdict adjoint(const Options& o) {
  TrainingSetConfig dc;
  dc.n_ics = 1;
  dc.windows_per_ic = 2;
  dc.workers = o.workers;
  const auto set = make_training_set(dc);
  auto net = SurrogateNet::initialize(256, 512, 5);
  std::vector<SampleRef> samples;
  for (const auto& w : set.windows) samples.push_back({&w.states, 0, w.states.size() - 1});
  RolloutLoss loss(set.grid_size, set.nu, set.dt);
  const std::size_t P = net.parameter_count();
  std::vector<double> grad(P), p0 = net.parameters(), p(P);
  loss.evaluate(net, samples, grad);

  std::mt19937_64 rng(99);
  std::normal_distribution<double> z;
  double worst = 0.0;
  for (int d = 0; d < 20; ++d) {
    std::vector<double> dir(P);
    double nrm = 0.0;
    for (auto& v : dir) {
      v = z(rng);
      nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    double analytic = 0.0;
    for (std::size_t i = 0; i < P; ++i) analytic += grad[i] * (dir[i] /= nrm);
    auto at = [&](double h) {
      for (std::size_t i = 0; i < P; ++i) p[i] = p0[i] + h * dir[i];
      auto n2 = net;
      n2.set_parameters(p);
      return loss.evaluate(n2, samples, {});
    };
    const double h = 1e-5;
    const double fd = (at(h) - at(-h)) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic - fd) / std::max(std::abs(fd), 1e-12));
  }
  return {worst <= 1e-4, "max relative error over 20 directions " + fmt(worst)};
}

Verdict burgers_rom(const Options& o) {
  vb::Config c;
  c.workers = o.workers;
  if (o.full_scale) {
    c.n_quad = 4;
    c.T = 20.0;
    c.ics = {"sin", "expsin", "cos2sin"};
  }
  const auto kernels = vb::compute_kernels(c);
  const fs::path dir = o.work / "vb";
  fs::create_directories(dir);
  save_kernel_table(kernels.linear, dir / "vb_kernel_linear.mzk");
  save_kernel_table(kernels.cubic, dir / "vb_kernel_cubic.mzk");
  const auto res = vb::rom_experiment(c, kernels);
  vb::write_outputs(res, dir);
  bool ok = true;
  std::ostringstream s;
  for (const auto& r : res) {
    ok = ok && r.mean_cubic < r.mean_markovian;
    s << " " << r.ic << ": markovian " << fmt(r.mean_markovian) << ", linear " << fmt(r.mean_linear)
      << ", cubic " << fmt(r.mean_cubic);
    if (r.blowup_cubic) s << " (cubic ROM blow-up t=" << fmt(*r.blowup_cubic) << ")";
    s << ";";
  }
  return {ok, "time-averaged L2 error" + s.str()};
}

int cli_call(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"mzrom"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(int(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Verdict determinism(const Options& o) {
  const fs::path root = o.work / "determinism";
  fs::remove_all(root);
  struct Run {
    std::string sub;
    std::vector<std::string> args;
  };
  const std::string ckpt = (root / "train-surrogate" / "a" / "surrogate.ckpt").string();
  const std::string kdir = (root / "vb-kernels" / "a").string();
  const std::vector<Run> runs{
      {"full-solve", {"--set", "full_solve.T=0.2", "--set", "full_solve.initial_condition=random"}},
      {"train-surrogate", {"--set", "training.iterations=20", "--set", "training.n_ics=2", "--set",
                           "training.windows_per_ic=4", "--set", "training.hidden=64"}},
      {"stability", {"--set", "stability.T=0.5", "--set", "stability.checkpoint=\"" + ckpt + "\""}},
      {"nl-demo", {"--set", "nl.max_degree=1", "--set", "nl.n_quad=20", "--set", "nl.T=2"}},
      {"vb-kernels", {"--set", "vb.T=0.2"}},
      {"vb-rom", {"--set", "vb.T=0.2", "--set", "vb.ics=[\"sin\",\"expsin\",\"cos2sin\"]", "--set",
                  "vb.kernels=\"" + kdir + "\""}},
      {"oracle-linear", {"--set", "oracle.T=1"}},
  };
  std::size_t files = 0;
  for (const auto& r : runs) {
    const fs::path a = root / r.sub / "a", b = root / r.sub / "b";
    std::vector<std::string> first{"--out", a.string()};
    if (o.workers) first.insert(first.end(), {"--workers", std::to_string(o.workers)});
    first.insert(first.end(), r.args.begin(), r.args.end());
    first.push_back(r.sub);
    if (cli_call(first) != 0) return {false, r.sub + ": first run failed"};
    if (cli_call({"--config", (a / "manifest.json").string(), "--out", b.string(), r.sub}) != 0)
      return {false, r.sub + ": rerun from manifest failed"};
    const auto m = cli::json::parse(read_file(a / "manifest.json"));
    for (const auto& f : m["outputs"]) {
      const std::string name = f.get<std::string>();
      if (read_file(a / name) != read_file(b / name)) return {false, r.sub + ": " + name + " differs"};
      ++files;
    }
  }
  return {true, std::to_string(runs.size()) + " subcommands, " + std::to_string(files) +
                    " artifacts byte-identical on rerun from the manifest"};
}

struct Criterion {
  int id;
  const char* title;
  double budget_s;
  std::function<Verdict(const Options&)> fn;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mzrom acceptance suite"};
  std::vector<int> selected;
  std::string expect_fail;
  Options o;
  std::string work = "acceptance-out";
  app.add_option("--criterion", selected, "Criterion to run (repeatable; default all)");
  app.add_option("--expect-fail", expect_fail, "Comma-separated criteria whose failure is tolerated");
  app.add_option("--work", work, "Directory for artifacts");
  app.add_option("--workers", o.workers, "Worker threads (default: available parallelism)");
  app.add_flag("--full-scale", o.full_scale, "Full-size ensembles and training sets (long)");
  CLI11_PARSE(app, argc, argv);
  o.work = work;
  fs::create_directories(o.work);

  std::set<int> tolerated;
  {
    std::stringstream ss(expect_fail);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) tolerated.insert(std::stoi(tok));
  }

  const std::vector<Criterion> all{
      {1, "quadrature exactness", 1, quadrature},
      {2, "basis orthonormality", 5, orthonormality},
      {3, "linear-system kernel oracle", 30, linear_kernel},
      {4, "nonlinear showcase", 600, nl_showcase},
      {5, "Burgers' full-order solver", 60, full_order},
      {6, "real/imag splitting", 10, splitting},
      {7, "observable equivalence", 30, observables},
      {8, "stabilization by low-pass filtering", 900, stabilization},
      {9, "adjoint gradient check", 60, adjoint},
      {10, "Burgers' MZ ROM", 600, burgers_rom},
      {11, "determinism", 1e9, determinism},
  };

  int unexpected = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.fn(o);
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.full_scale == false && secs > c.budget_s) {
      v.pass = false;
      v.detail += "; over the " + fmt(c.budget_s) + " s budget";
    }
    std::string tag;
    if (!v.pass && tolerated.count(c.id)) {
      tag = " [known CI-scale failure]";
    } else if (!v.pass) {
      ++unexpected;
    }
    std::cout << "criterion " << c.id << " (" << c.title << "): " << (v.pass ? "PASS" : "FAIL") << tag << " - "
              << v.detail << " [" << fmt(secs) << " s]" << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
