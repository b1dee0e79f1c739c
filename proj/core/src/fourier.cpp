#include "mzrom/fourier.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <utility>

#include "mzrom/errors.hpp"

namespace mzrom {

namespace {
// The FFTW planner is not reentrant; execution on distinct arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n), real_(n), spec_(n / 2 + 1) {
  if (n < 2 || (n & (n - 1)) != 0) throw InvalidArgument("RealFft: size must be a power of two >= 2");
  std::lock_guard lock(planner_mutex());
  auto* spec = reinterpret_cast<fftw_complex*>(spec_.data());
  forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), real_.data(), spec, FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec, real_.data(), FFTW_ESTIMATE);
  if (!forward_plan_ || !inverse_plan_) throw NumericalFailure("RealFft: planning failed", 0);
}

RealFft::RealFft(RealFft&& other) noexcept
    : n_(other.n_),
      forward_plan_(std::exchange(other.forward_plan_, nullptr)),
      inverse_plan_(std::exchange(other.inverse_plan_, nullptr)),
      real_(std::move(other.real_)),
      spec_(std::move(other.spec_)) {}

RealFft::~RealFft() {
  if (!forward_plan_ && !inverse_plan_) return;
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void RealFft::forward(std::span<const double> grid, std::span<cplx> coeffs) {
  std::copy(grid.begin(), grid.end(), real_.begin());
  fftw_execute(static_cast<fftw_plan>(forward_plan_));
  const double scale = 1.0 / double(n_);
  const std::size_t m = std::min(coeffs.size(), spec_.size());
  for (std::size_t k = 0; k < m; ++k) coeffs[k] = spec_[k] * scale;
  for (std::size_t k = m; k < coeffs.size(); ++k) coeffs[k] = 0.0;
}

void RealFft::inverse(std::span<const cplx> coeffs, std::span<double> grid) {
  const std::size_t m = std::min(coeffs.size(), spec_.size());
  std::copy(coeffs.begin(), coeffs.begin() + static_cast<std::ptrdiff_t>(m), spec_.begin());
  std::fill(spec_.begin() + static_cast<std::ptrdiff_t>(m), spec_.end(), cplx(0.0));
  // c2r ignores imaginary parts of the DC and Nyquist bins.
  fftw_execute(static_cast<fftw_plan>(inverse_plan_));
  std::copy(real_.begin(), real_.end(), grid.begin());
}

}  // namespace mzrom
