#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "mzrom/fourier.hpp"
#include "mzrom/io.hpp"
#include "mzrom/spectral.hpp"

using namespace mzrom;

namespace {
constexpr double kPi = std::numbers::pi;

SpectralState from_function(std::size_t n, double (*f)(double)) {
  std::vector<double> u(n);
  for (std::size_t j = 0; j < n; ++j) u[j] = f(2.0 * kPi * double(j) / double(n));
  return from_grid(u);
}

SpectralState random_state(std::mt19937_64& rng, std::size_t n, std::size_t band, bool zero_mean) {
  std::normal_distribution<double> z;
  SpectralState s(n);
  for (std::size_t k = zero_mean ? 1 : 0; k <= band; ++k) {
    const double a = 1.0 / (1.0 + double(k * k));
    s.coeffs[k] = k == 0 ? cplx(z(rng) * a, 0.0) : cplx(z(rng) * a, z(rng) * a);
  }
  return s;
}
}  // namespace

TEST_CASE("fft synthesis and analysis") {
  RealFft fft(16);
  std::vector<double> u(16);
  for (std::size_t j = 0; j < 16; ++j) u[j] = 2.0 + std::cos(3.0 * 2.0 * kPi * double(j) / 16.0);
  std::vector<cplx> c(9);
  fft.forward(u, c);
  CHECK(std::abs(c[0] - cplx(2.0)) < 1e-14);
  CHECK(std::abs(c[3] - cplx(0.5)) < 1e-14);
  std::vector<double> back(16);
  fft.inverse(c, back);
  for (std::size_t j = 0; j < 16; ++j) CHECK(std::abs(back[j] - u[j]) < 1e-14);
  // Short coefficient arrays are zero padded.
  const std::vector<cplx> one{cplx(0.0), cplx(0.0, -0.5)};
  fft.inverse(one, back);
  for (std::size_t j = 0; j < 16; ++j) CHECK(std::abs(back[j] - std::sin(2.0 * kPi * double(j) / 16.0)) < 1e-14);
}

TEST_CASE("grid round trip, norms and resampling") {
  const auto s = from_function(64, [](double z) { return std::sin(z); });
  CHECK(std::abs(s.coeffs[1] - cplx(0.0, -0.5)) < 1e-15);
  CHECK(l2_norm(s) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-13));
  CHECK(sup_norm(s) == doctest::Approx(1.0).epsilon(1e-12));
  const auto r = resample(s, 256);
  CHECK(l2_distance(s, r) < 1e-14);
  const auto u = to_grid(s, 128);
  for (std::size_t j = 0; j < 128; ++j) CHECK(std::abs(u[j] - std::sin(2.0 * kPi * double(j) / 128.0)) < 1e-13);
  const auto t = resample(r, 16);
  CHECK(t.coeffs[8] == cplx(0.0));
}

TEST_CASE("burgers_rhs examples") {
  BurgersOperator op(256, 0.1);
  const auto s = from_function(256, [](double z) { return std::sin(z); });
  const auto r = op.rhs(s);
  CHECK(std::abs(r.coeffs[1] - cplx(0.0, 0.05)) < 1e-12);
  CHECK(std::abs(r.coeffs[2] - cplx(0.0, 0.25)) < 1e-12);
  for (std::size_t k = 0; k < r.coeffs.size(); ++k)
    if (k != 1 && k != 2) CHECK(std::abs(r.coeffs[k]) < 1e-12);
  // Physical-space cross-check: -u u_z + nu u_zz = -sin(2z)/2 - 0.1 sin z.
  const auto g = to_grid(r);
  for (std::size_t j = 0; j < 256; ++j) {
    const double z = 2.0 * kPi * double(j) / 256.0;
    CHECK(std::abs(g[j] - (-0.5 * std::sin(2.0 * z) - 0.1 * std::sin(z))) < 1e-12);
  }

  for (double v : to_grid(op.rhs(SpectralState(256)))) CHECK(v == 0.0);
  BurgersOperator inviscid(256, 0.0);
  SpectralState c(256);
  c.coeffs[0] = 1.3;
  for (const auto& v : inviscid.rhs(c).coeffs) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("pseudospectral rhs equals the Galerkin sums on unaliased states") {
  std::mt19937_64 rng(4);
  ExpFilter off;
  off.enabled = false;
  BurgersOperator op(64, 0.3, off);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(rng, 64, 20, trial % 2 == 0);
    const auto r = op.rhs(s);
    const std::vector<cplx> theta(s.coeffs.begin(), s.coeffs.begin() + 21);
    const auto g = galerkin_rhs_direct(theta, 0.3);
    for (std::size_t k = 0; k <= 20; ++k) CHECK(std::abs(r.coeffs[k] - g[k]) < 1e-13);
  }
}

TEST_CASE("real/imag splitting equals the complex system") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t K = 5 + trial % 40;
    const auto s = random_state(rng, 128, K, true);
    std::vector<double> x(K), y(K);
    for (std::size_t k = 1; k <= K; ++k) {
      x[k - 1] = s.coeffs[k].real();
      y[k - 1] = s.coeffs[k].imag();
    }
    const auto ri = real_imag_rhs(x, y, 0.1);
    const std::vector<cplx> theta(s.coeffs.begin(), s.coeffs.begin() + K + 1);
    const auto g = galerkin_rhs_direct(theta, 0.1);
    CHECK(g[0] == cplx(0.0));
    for (std::size_t k = 1; k <= K; ++k) {
      CHECK(std::abs(ri.T[k - 1] - g[k].real()) < 1e-12);
      CHECK(std::abs(ri.S[k - 1] - g[k].imag()) < 1e-12);
    }
  }
}

TEST_CASE("truncated splitting") {
  std::vector<double> x(10, 0.0), y(10, 0.0);
  x[0] = 0.7;
  y[0] = -0.2;
  const auto full = real_imag_rhs(x, y, 0.1);
  const auto tr = real_imag_rhs(x, y, 0.1, std::size_t{3});
  REQUIRE(tr.T.size() == 3);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(tr.T[k] == full.T[k]);
    CHECK(tr.S[k] == full.S[k]);
  }
  // Truncated sums equal the full sums of the projected state.
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z;
  for (auto& v : x) v = z(rng);
  for (auto& v : y) v = z(rng);
  const auto t3 = real_imag_rhs(x, y, 0.2, std::size_t{3});
  const auto p3 = real_imag_rhs(std::span<const double>(x).first(3), std::span<const double>(y).first(3), 0.2);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(t3.T[k] == doctest::Approx(p3.T[k]).epsilon(1e-14));
    CHECK(t3.S[k] == doctest::Approx(p3.S[k]).epsilon(1e-14));
  }
}

TEST_CASE("project_lowpass") {
  std::mt19937_64 rng(1);
  SpectralState sinz(64);
  sinz.coeffs[1] = cplx(0.0, -0.5);
  CHECK(project_lowpass(sinz, 1).coeffs == sinz.coeffs);
  CHECK(project_lowpass(sinz, 5).coeffs == sinz.coeffs);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = random_state(rng, 64, 32, true);
    const auto p = project_lowpass(s, 7);
    CHECK(project_lowpass(p, 7).coeffs == p.coeffs);
    for (std::size_t k = 8; k < p.coeffs.size(); ++k) CHECK(p.coeffs[k] == cplx(0.0));
    for (std::size_t k = 0; k <= 7; ++k) CHECK(p.coeffs[k] == s.coeffs[k]);
    for (const auto& c : project_lowpass(s, 0).coeffs) CHECK(c == cplx(0.0));
  }
}

TEST_CASE("sample_initial_condition") {
  const auto a = sample_initial_condition(24, 42, 256);
  const auto b = sample_initial_condition(24, 42, 256);
  CHECK(a.coeffs == b.coeffs);
  CHECK(sample_initial_condition(24, 43, 256).coeffs != a.coeffs);
  // u = sum a_l cos + b_l sin: theta_l = (a_l - i b_l)/2, theta_0 = a_0.
  CHECK(std::abs(a.coeffs[0].real()) <= 1.0);
  for (std::size_t l = 1; l <= 24; ++l) {
    const double bound = 1.0 / (1.0 + double(l * l));
    CHECK(std::abs(2.0 * a.coeffs[l].real()) <= bound + 1e-15);
    CHECK(std::abs(2.0 * a.coeffs[l].imag()) <= bound + 1e-15);
  }
  for (std::size_t l = 25; l < a.coeffs.size(); ++l) CHECK(a.coeffs[l] == cplx(0.0));
  for (std::uint64_t bits : {0ull, ~0ull, 1ull << 63}) {
    const double v = unit_symmetric(bits);
    CHECK(v >= -1.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("zero-mode reduction and Galilean reconstruction") {
  std::mt19937_64 rng(6);
  const auto zm = random_state(rng, 64, 10, true);
  const auto split = reduce_zero_mode(zm);
  CHECK(split.mean == 0.0);
  CHECK(split.fluctuation.coeffs == zm.coeffs);
  CHECK(reconstruct(0.0, zm, 3.0).coeffs == zm.coeffs);
  const auto nz = random_state(rng, 64, 10, false);
  CHECK(reduce_zero_mode(nz).fluctuation.coeffs[0] == cplx(0.0));
  CHECK(reduce_zero_mode(nz).mean == nz.coeffs[0].real());

  auto u0 = from_function(256, [](double z) { return 1.0 + std::sin(z); });
  BurgersSolveOptions opt;
  opt.T = 1.0;
  opt.sample_dt = 0.25;
  const auto direct = solve_burgers(u0, opt);
  const auto s = reduce_zero_mode(u0);
  CHECK(s.mean == doctest::Approx(1.0));
  const auto reduced = solve_burgers(s.fluctuation, opt);
  for (std::size_t i = 0; i < direct.times.size(); ++i) {
    const auto rec = reconstruct(s.mean, reduced.snapshots[i], direct.times[i]);
    CHECK(l2_distance(rec, direct.snapshots[i]) < 1e-8);
  }
}

TEST_CASE("full-order solve: energy decay and resolution independence") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    auto u0 = sample_initial_condition(24, 100 + trial, 256);
    u0 = reduce_zero_mode(u0).fluctuation;
    BurgersSolveOptions opt;
    opt.T = 1.0;
    opt.sample_dt = 1e-3;
    const auto sol = solve_burgers(u0, opt);
    REQUIRE(!sol.divergence);
    double prev = l2_norm(sol.snapshots.front());
    for (const auto& s : sol.snapshots) {
      const double e = l2_norm(s);
      CHECK(e <= prev + 1e-10);
      prev = e;
    }
    const auto ref = solve_burgers(u0, reference_options(0.1, 1.0, 1.0));
    CHECK(l2_distance(sol.snapshots.back(), ref.snapshots.back()) < 1e-8);
  }
  const auto sinz = from_function(256, [](double z) { return std::sin(z); });
  BurgersSolveOptions opt;
  opt.sample_dt = 1.0;
  const auto a = solve_burgers(sinz, opt);
  const auto b = solve_burgers(sinz, reference_options(0.1, 1.0, 1.0));
  CHECK(l2_distance(a.snapshots.back(), b.snapshots.back()) < 1e-8);
  (void)rng;
}

TEST_CASE("state csv dumps") {
  const auto dir = std::filesystem::temp_directory_path() / "mzrom-unit";
  std::filesystem::create_directories(dir);
  const auto s = from_function(32, [](double z) { return std::cos(2.0 * z); });
  save_state_csv(s, dir / "state.csv");
  save_spectrum_csv(s, dir / "spec.csv");
  const auto st = read_csv(dir / "state.csv");
  CHECK(st.header == std::vector<std::string>{"z", "u"});
  CHECK(st.column("u").size() == 32);
  CHECK(st.column("u")[0] == doctest::Approx(1.0));
  const auto sp = read_csv(dir / "spec.csv");
  CHECK(sp.header == std::vector<std::string>{"k", "re", "im"});
  CHECK(sp.column("re")[2] == doctest::Approx(0.5));
}
