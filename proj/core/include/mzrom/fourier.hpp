#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mzrom {

using cplx = std::complex<double>;

/// Real <-> half-spectrum transform on a uniform periodic grid of n points on
/// [0, 2 pi). Coefficients are normalized so that u(z) = sum_k c_k e^{ikz},
/// i.e. c_k = (1/n) sum_j u_j e^{-ik z_j}; only k = 0..n/2 are stored.
///
/// Instances own scratch buffers and must not be shared between threads;
/// creating them from multiple threads is safe.
class RealFft {
public:
  explicit RealFft(std::size_t n);
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;
  RealFft(RealFft&& other) noexcept;
  RealFft& operator=(RealFft&&) = delete;
  ~RealFft();

  std::size_t size() const noexcept { return n_; }
  std::size_t modes() const noexcept { return n_ / 2 + 1; }

  void forward(std::span<const double> grid, std::span<cplx> coeffs);
  /// Synthesis u_j = sum_k c_k e^{ik z_j}; coefficients beyond coeffs.size()
  /// are treated as zero (zero padding).
  void inverse(std::span<const cplx> coeffs, std::span<double> grid);

private:
  std::size_t n_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
  std::vector<double> real_;
  std::vector<cplx> spec_;
};

}  // namespace mzrom
