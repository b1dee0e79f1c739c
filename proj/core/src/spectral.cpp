#include "mzrom/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"

namespace mzrom {

namespace {

void check_grid(std::size_t n) {
  if (n < 4 || (n & (n - 1)) != 0) {
    throw InvalidArgument("grid size must be a power of two >= 4 (got " + std::to_string(n) + ")");
  }
}

std::span<double> as_real(std::vector<cplx>& v) {
  return {reinterpret_cast<double*>(v.data()), 2 * v.size()};
}

}  // namespace

SpectralState from_grid(std::span<const double> values) {
  check_grid(values.size());
  SpectralState s(values.size());
  RealFft fft(values.size());
  fft.forward(values, s.coeffs);
  s.coeffs.back() = cplx(s.coeffs.back().real(), 0.0);
  return s;
}

std::vector<double> to_grid(const SpectralState& state) { return to_grid(state, state.grid_size); }

std::vector<double> to_grid(const SpectralState& state, std::size_t grid_size) {
  check_grid(grid_size);
  const SpectralState s = resample(state, grid_size);
  std::vector<double> out(grid_size);
  RealFft fft(grid_size);
  fft.inverse(s.coeffs, out);
  return out;
}

SpectralState resample(const SpectralState& state, std::size_t grid_size) {
  check_grid(grid_size);
  SpectralState out(grid_size);
  const std::size_t keep = std::min(state.coeffs.size(), out.coeffs.size());
  std::copy_n(state.coeffs.begin(), keep, out.coeffs.begin());
  if (grid_size < state.grid_size) out.coeffs.back() = 0.0;
  if (grid_size > state.grid_size && keep > 0) {
    // The old Nyquist entry carries both +-N/2 contributions; split it.
    out.coeffs[keep - 1] = 0.5 * state.coeffs[keep - 1];
  }
  return out;
}

double l2_norm(const SpectralState& state) {
  SpectralState zero(state.grid_size);
  return l2_distance(state, zero);
}

double l2_distance(const SpectralState& a, const SpectralState& b) {
  const std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const cplx ca = k < a.coeffs.size() ? a.coeffs[k] : cplx(0.0);
    const cplx cb = k < b.coeffs.size() ? b.coeffs[k] : cplx(0.0);
    const bool nyquist = (k + 1 == a.coeffs.size() || k + 1 == b.coeffs.size()) &&
                         a.coeffs.size() == b.coeffs.size();
    s += (k == 0 || nyquist ? 1.0 : 2.0) * std::norm(ca - cb);
  }
  return std::sqrt(2.0 * std::numbers::pi * s);
}

double sup_norm(const SpectralState& state) {
  const auto g = to_grid(state, std::max<std::size_t>(state.grid_size, 64));
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

double ExpFilter::factor(std::size_t k, std::size_t k_max) const {
  if (!enabled) return 1.0;
  return std::exp(-alpha * std::pow(double(k) / double(k_max), order));
}

SpectralState project_lowpass(const SpectralState& state, std::size_t cutoff) {
  SpectralState out = state;
  project_lowpass_inplace(out, cutoff);
  return out;
}

void project_lowpass_inplace(SpectralState& state, std::size_t cutoff) {
  if (cutoff > state.max_mode()) {
    throw InvalidArgument("project_lowpass: cutoff " + std::to_string(cutoff) + " exceeds N_g/2");
  }
  for (std::size_t k = cutoff + 1; k < state.coeffs.size(); ++k) state.coeffs[k] = 0.0;
}

BurgersOperator::BurgersOperator(std::size_t grid_size, double nu, ExpFilter filter)
    : n_(grid_size), nu_(nu), filter_(filter), fft_(grid_size), grid_(grid_size), spec_(grid_size / 2 + 1) {
  check_grid(grid_size);
  if (!(nu >= 0.0)) throw InvalidArgument("BurgersOperator: viscosity must be non-negative");
  damping_.resize(grid_size / 2 + 1);
  for (std::size_t k = 0; k < damping_.size(); ++k) damping_[k] = filter_.factor(k, n_ / 2);
}

void BurgersOperator::rhs(const SpectralState& state, SpectralState& out) {
  if (state.grid_size != n_) throw InvalidArgument("BurgersOperator: grid size mismatch");
  if (out.grid_size != n_) out = SpectralState(n_);
  const std::size_t kn = n_ / 2;
  for (std::size_t k = 0; k <= kn; ++k) spec_[k] = state.coeffs[k];
  spec_[kn] = 0.0;
  fft_.inverse(spec_, grid_);
  for (double& v : grid_) v *= v;
  fft_.forward(grid_, spec_);
  for (std::size_t k = 0; k < kn; ++k) {
    const double kk = double(k);
    out.coeffs[k] = cplx(0.0, -0.5 * kk) * damping_[k] * spec_[k] - nu_ * kk * kk * state.coeffs[k];
  }
  out.coeffs[kn] = 0.0;
}

SpectralState BurgersOperator::rhs(const SpectralState& state) {
  SpectralState out(n_);
  rhs(state, out);
  return out;
}

BurgersSolution solve_burgers(const SpectralState& u0, const BurgersSolveOptions& opt) {
  const std::size_t n_steps = step_count(opt.dt, opt.T);
  const std::size_t stride = step_count(opt.dt, opt.sample_dt);
  BurgersOperator op(opt.grid_size, opt.nu, opt.filter);

  SpectralState state = resample(u0, opt.grid_size);
  state.coeffs.back() = 0.0;
  SpectralState tmp_in(opt.grid_size), tmp_out(opt.grid_size);
  const RhsFn rhs = [&](std::span<const double> x, std::span<double> out) {
    std::copy(x.begin(), x.end(), as_real(tmp_in.coeffs).begin());
    op.rhs(tmp_in, tmp_out);
    std::copy_n(as_real(tmp_out.coeffs).begin(), out.size(), out.begin());
  };

  BurgersSolution sol;
  auto observer = [&](std::size_t, double t, std::span<const double> x) {
    SpectralState snap(opt.grid_size);
    std::copy(x.begin(), x.end(), as_real(snap.coeffs).begin());
    sol.times.push_back(t);
    sol.snapshots.push_back(std::move(snap));
  };
  sol.divergence = rk_evolve(rhs, as_real(state.coeffs), opt.dt, n_steps, opt.scheme, stride, observer);
  return sol;
}

BurgersSolveOptions reference_options(double nu, double T, double sample_dt) {
  BurgersSolveOptions o;
  o.grid_size = 512;
  o.nu = nu;
  o.dt = 1e-4;
  o.T = T;
  o.sample_dt = sample_dt;
  o.scheme = RkScheme::RK4;
  return o;
}

double unit_symmetric(std::uint64_t bits) noexcept {
  return double(bits >> 11) * 0x1.0p-52 - 1.0;
}

SpectralState sample_initial_condition(std::size_t band_limit, std::uint64_t seed,
                                       std::size_t grid_size) {
  check_grid(grid_size);
  if (band_limit >= grid_size / 2) {
    throw InvalidArgument("sample_initial_condition: band limit must be below N_g/2");
  }
  std::mt19937_64 rng(seed);
  SpectralState s(grid_size);
  const double a0 = unit_symmetric(rng());
  s.coeffs[0] = a0;
  for (std::size_t l = 1; l <= band_limit; ++l) {
    const double scale = 1.0 / (1.0 + double(l * l));
    const double a = unit_symmetric(rng()) * scale;
    const double b = unit_symmetric(rng()) * scale;
    s.coeffs[l] = cplx(0.5 * a, -0.5 * b);
  }
  return s;
}

ZeroModeSplit reduce_zero_mode(const SpectralState& u0) {
  ZeroModeSplit split{u0.mean(), u0};
  split.fluctuation.coeffs[0] = 0.0;
  return split;
}

SpectralState reconstruct(double mean, const SpectralState& w, double t) {
  SpectralState u = w;
  for (std::size_t k = 1; k < u.coeffs.size(); ++k) {
    u.coeffs[k] *= std::polar(1.0, -double(k) * t * mean);
  }
  u.coeffs[0] = w.coeffs[0] + mean;
  if (u.coeffs.size() > 1) u.coeffs.back() = cplx(u.coeffs.back().real(), 0.0);
  return u;
}

RealImagRhs real_imag_rhs(std::span<const double> x, std::span<const double> y, double nu,
                          std::optional<std::size_t> truncate) {
  if (x.size() != y.size()) throw InvalidArgument("real_imag_rhs: length mismatch");
  // x[i], y[i] hold modes k = i + 1.
  const auto K = static_cast<long>(x.size());
  const long band = truncate ? std::min<long>(static_cast<long>(*truncate), K) : K;
  auto X = [&](long p) -> double {
    if (p == 0 || std::abs(p) > band) return 0.0;
    return x[static_cast<std::size_t>(std::abs(p) - 1)];
  };
  auto Y = [&](long p) -> double {
    if (p == 0 || std::abs(p) > band) return 0.0;
    const double v = y[static_cast<std::size_t>(std::abs(p) - 1)];
    return p > 0 ? v : -v;
  };
  RealImagRhs out;
  const long kmax = truncate ? band : K;
  out.T.resize(static_cast<std::size_t>(kmax));
  out.S.resize(static_cast<std::size_t>(kmax));
  for (long k = 1; k <= kmax; ++k) {
    double sxy = 0.0, sxx = 0.0;
    for (long p = k - band; p <= band; ++p) {
      const long q = k - p;
      sxy += X(p) * Y(q);
      sxx += X(p) * X(q) - Y(p) * Y(q);
    }
    const double kk = double(k);
    out.T[static_cast<std::size_t>(k - 1)] = kk * sxy - nu * kk * kk * X(k);
    out.S[static_cast<std::size_t>(k - 1)] = -0.5 * kk * sxx - nu * kk * kk * Y(k);
  }
  return out;
}

std::vector<cplx> galerkin_rhs_direct(std::span<const cplx> theta, double nu) {
  const auto K = static_cast<long>(theta.size()) - 1;
  auto th = [&](long p) -> cplx {
    if (std::abs(p) > K) return 0.0;
    return p >= 0 ? theta[static_cast<std::size_t>(p)] : std::conj(theta[static_cast<std::size_t>(-p)]);
  };
  std::vector<cplx> out(theta.size());
  for (long k = 0; k <= K; ++k) {
    cplx s = 0.0;
    for (long p = k - K; p <= K; ++p) s += th(p) * th(k - p);
    const double kk = double(k);
    out[static_cast<std::size_t>(k)] = cplx(0.0, -0.5 * kk) * s - nu * kk * kk * th(k);
  }
  return out;
}

void save_state_csv(const SpectralState& state, const std::filesystem::path& path) {
  const auto u = to_grid(state);
  CsvTable t({"z", "u"});
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double row[] = {2.0 * std::numbers::pi * double(j) / double(u.size()), u[j]};
    t.add_row(row);
  }
  t.save(path);
}

void save_spectrum_csv(const SpectralState& state, const std::filesystem::path& path) {
  CsvTable t({"k", "re", "im"});
  for (std::size_t k = 0; k < state.coeffs.size(); ++k) {
    const double row[] = {double(k), state.coeffs[k].real(), state.coeffs[k].imag()};
    t.add_row(row);
  }
  t.save(path);
}

}  // namespace mzrom
