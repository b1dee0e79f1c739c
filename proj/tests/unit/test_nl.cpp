#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "mzrom/dynamics.hpp"
#include "mzrom/io.hpp"
#include "mzrom/nl_showcase.hpp"
#include "mzrom/rom.hpp"

using namespace mzrom;

TEST_CASE("nl observables") {
  std::vector<double> out(1);
  for (double x1 : {0.5, 1.0, 2.0, 3.7}) {
    const double a[] = {x1, 0.0};
    nl::la0_observable(a, out);
    CHECK(out[0] == doctest::Approx(8.0 * x1 * std::cos(x1)));
    const double b[] = {0.0, x1};
    nl::la0_observable(b, out);
    CHECK(out[0] == 0.0);
  }
  const auto basis = build_basis(1, 3);
  const ScalingParams s{{2.5}, {0.4}};
  const double x[] = {1.3, 0.7};
  CHECK(nl::g_observable(basis, s, 0, x) == 0.0);
  // j = 1: (1/sigma) * R1.
  CHECK(nl::g_observable(basis, s, 1, x) == doctest::Approx((-1.3 * 1.3 + 8.0 * 1.3 * 0.7) / 0.4));
}

TEST_CASE("nl Markovian closed form and reference self-convergence") {
  const RhsFn markov = [](std::span<const double> x, std::span<double> out) { out[0] = -x[0] * x[0]; };
  const double x0[] = {2.0};
  const auto mk = integrate_markovian(markov, x0, 1e-3, 1.0);
  CHECK(std::abs(mk.states.back()[0] - 1.0 / (0.5 + 1.0)) < 1e-6);

  const auto sys = nl::system();
  const double full0[] = {1.0, 0.0};
  const auto a = rk_integrate(sys, full0, 1e-4, 10.0, RkScheme::RK4);
  const auto b = rk_integrate(sys, full0, 5e-5, 10.0, RkScheme::RK4);
  double worst = 0.0;
  for (std::size_t n = 0; n < a.states.size(); n += 100)
    worst = std::max(worst, std::abs(a.states[n][0] - b.states[2 * n][0]));
  CHECK(worst < 1e-8);
}

TEST_CASE("nl config places nodes in [1, 4]") {
  for (std::size_t nq : {20u, 30u, 40u}) {
    nl::Config c;
    c.n_quad = nq;
    const auto r = gauss_hermite_rule(nq);
    const double s = c.resolved_sigma(r);
    CHECK(c.mu + s * r.nodes.front() >= 1.0 - 1e-12);
    CHECK(c.mu + s * r.nodes.back() <= 4.0 + 1e-12);
  }
}

TEST_CASE("nl experiment at reduced horizon") {
  nl::Config c;
  c.max_degree = 1;
  c.n_quad = 20;
  c.T = 5.0;
  c.dt_full = 2e-4;
  c.dt_kernel = 2e-3;
  c.workers = 1;
  const auto ex = nl::run_experiment(c);
  REQUIRE(ex.cases.size() == 4);
  for (const auto& cs : ex.cases) {
    CAPTURE(cs.x1);
    CHECK(cs.times.size() == cs.reference.size());
    CHECK(cs.reference.front() == cs.x1);
    CHECK(cs.extrapolation == (cs.x1 > 4.0));
    if (!cs.extrapolation) CHECK(cs.mean_error_memory < cs.mean_error_markovian);
  }
  auto kmax = [&](double t) {
    const std::size_t n = std::size_t(std::lround(t / ex.kernels.dt));
    double m = 0.0;
    for (std::size_t j = 0; j < ex.kernels.n_basis(); ++j) m = std::max(m, std::abs(ex.kernels.at(n, j, 0)));
    return m;
  };
  CHECK(kmax(5.0) < kmax(0.5));

  const auto dir = std::filesystem::temp_directory_path() / "mzrom-unit" / "nl";
  std::filesystem::create_directories(dir);
  nl::write_outputs(ex, dir);
  const auto cs = read_csv(dir / "nl_case_2_1.csv");
  CHECK(cs.header == std::vector<std::string>{"t", "reference", "markovian", "memory"});
  CHECK(cs.columns[0].size() == ex.cases[1].times.size());
  const auto ks = read_csv(dir / "nl_kernels_1.csv");
  CHECK(ks.header == std::vector<std::string>{"t", "K_0", "K_1"});
  for (double v : ks.column("K_1")) CHECK(v >= 0.0);
}
