#include "mzrom/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "mzrom/errors.hpp"

namespace mzrom {

void ScalingParams::validate() const {
  if (mu.size() != sigma.size()) {
    throw InvalidArgument("scaling: mu and sigma lengths differ");
  }
  for (double s : sigma) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidArgument("scaling: sigma must be finite and strictly positive");
    }
  }
}

ScalingParams ScalingParams::standard(std::size_t n_vars) {
  return {std::vector<double>(n_vars, 0.0), std::vector<double>(n_vars, 1.0)};
}

HermiteValue hermite_poly(unsigned degree, double z) {
  // Orthonormal recurrence: h_{j+1} = (z h_j - sqrt(j) h_{j-1}) / sqrt(j+1).
  double prev = 0.0;
  double cur = 1.0;
  for (unsigned j = 0; j < degree; ++j) {
    const double next = (z * cur - std::sqrt(double(j)) * prev) / std::sqrt(double(j + 1));
    prev = cur;
    cur = next;
  }
  return {cur, degree == 0 ? 0.0 : std::sqrt(double(degree)) * prev};
}

void hermite_table(unsigned max_degree, double z, std::span<double> values,
                   std::span<double> derivs) {
  values[0] = 1.0;
  derivs[0] = 0.0;
  if (max_degree == 0) return;
  values[1] = z;
  derivs[1] = 1.0;
  for (unsigned j = 1; j < max_degree; ++j) {
    values[j + 1] = (z * values[j] - std::sqrt(double(j)) * values[j - 1]) / std::sqrt(double(j + 1));
    derivs[j + 1] = std::sqrt(double(j + 1)) * values[j];
  }
}

QuadratureRule gauss_hermite_rule(std::size_t order) {
  if (order == 0) throw InvalidArgument("gauss_hermite_rule: order must be >= 1");
  const auto n = static_cast<Eigen::Index>(order);

  // Jacobi matrix of the monic recurrence He_{j+1} = z He_j - j He_{j-1}.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index j = 0; j + 1 < n; ++j) sub[j] = std::sqrt(double(j + 1));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("gauss_hermite_rule: tridiagonal eigensolve failed", order);
  }

  std::vector<double> nodes(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
  std::sort(nodes.begin(), nodes.end());

  // Newton polish on h_n, then Christoffel weights 1 / sum_j h_j(z)^2.
  const auto deg = static_cast<unsigned>(order);
  std::vector<double> vals(order + 1), ders(order + 1);
  std::vector<double> weights(order);
  for (std::size_t i = 0; i < order; ++i) {
    double z = nodes[i];
    for (int it = 0; it < 3; ++it) {
      hermite_table(deg, z, vals, ders);
      if (ders[deg] == 0.0) break;
      const double step = vals[deg] / ders[deg];
      z -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(z))) break;
    }
    nodes[i] = z;
    hermite_table(deg, z, vals, ders);
    double s = 0.0;
    for (unsigned j = 0; j < deg; ++j) s += vals[j] * vals[j];
    weights[i] = 1.0 / s;
  }

  // Enforce exact symmetry; pairs are averaged.
  for (std::size_t i = 0; i < order / 2; ++i) {
    const std::size_t k = order - 1 - i;
    const double z = 0.5 * (nodes[k] - nodes[i]);
    const double w = 0.5 * (weights[k] + weights[i]);
    nodes[i] = -z;
    nodes[k] = z;
    weights[i] = w;
    weights[k] = w;
  }
  if (order % 2 == 1) nodes[order / 2] = 0.0;

  // Sum small weights first.
  std::vector<double> sorted = weights;
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  for (double& w : weights) w /= total;

  return {std::move(nodes), std::move(weights)};
}

std::size_t basis_count(std::size_t n_vars, unsigned max_degree) {
  // C(n+d, d) built incrementally; each partial product is itself a binomial.
  std::size_t result = 1;
  for (unsigned i = 1; i <= max_degree; ++i) {
    const std::size_t num = n_vars + i;
    if (result > std::numeric_limits<std::size_t>::max() / num) {
      throw InvalidArgument("build_basis: basis size C(" + std::to_string(n_vars + max_degree) +
                            ", " + std::to_string(max_degree) + ") overflows");
    }
    result = result * num / i;
  }
  return result;
}

PolyBasis build_basis(std::size_t n_vars, unsigned max_degree) {
  if (n_vars == 0) throw InvalidArgument("build_basis: n_vars must be >= 1");
  const std::size_t count = basis_count(n_vars, max_degree);

  PolyBasis basis;
  basis.n_vars = n_vars;
  basis.max_degree = max_degree;
  basis.multi_indices.reserve(count);

  MultiIndex alpha(n_vars, 0);
  // Within a total degree, enumerate with the leading variable's degree
  // descending (lexicographic descending order).
  std::function<void(std::size_t, unsigned)> fill = [&](std::size_t var, unsigned remaining) {
    if (var + 1 == n_vars) {
      alpha[var] = remaining;
      basis.multi_indices.push_back(alpha);
      return;
    }
    for (unsigned a = remaining + 1; a-- > 0;) {
      alpha[var] = a;
      fill(var + 1, remaining - a);
    }
  };
  for (unsigned total = 0; total <= max_degree; ++total) fill(0, total);
  return basis;
}

BasisValue basis_eval(const PolyBasis& basis, std::size_t j, std::span<const double> x,
                      const ScalingParams& scaling) {
  if (j >= basis.size()) {
    throw InvalidArgument("basis_eval: index " + std::to_string(j) + " out of range (J=" +
                          std::to_string(basis.size()) + ")");
  }
  if (x.size() != basis.n_vars || scaling.size() != basis.n_vars) {
    throw InvalidArgument("basis_eval: dimension mismatch");
  }
  const MultiIndex& alpha = basis.multi_indices[j];
  const std::size_t n = basis.n_vars;
  std::vector<double> v(n), dv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (x[i] - scaling.mu[i]) / scaling.sigma[i];
    const HermiteValue h = hermite_poly(alpha[i], z);
    v[i] = h.value;
    dv[i] = h.derivative / scaling.sigma[i];
  }
  BasisValue out{1.0, std::vector<double>(n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) out.value *= v[i];
  for (std::size_t i = 0; i < n; ++i) {
    double g = dv[i];
    for (std::size_t m = 0; m < n; ++m) {
      if (m != i) g *= v[m];
    }
    out.gradient[i] = g;
  }
  return out;
}

BasisEvaluator::BasisEvaluator(const PolyBasis& basis, const ScalingParams& scaling)
    : basis_(&basis),
      scaling_(scaling),
      table_(basis.n_vars * (basis.max_degree + 1)),
      dtable_(basis.n_vars * (basis.max_degree + 1)) {
  scaling_.validate();
  if (scaling_.size() != basis.n_vars) {
    throw InvalidArgument("BasisEvaluator: scaling dimension does not match basis");
  }
}

void BasisEvaluator::fill_tables(std::span<const double> x) {
  const std::size_t stride = basis_->max_degree + 1;
  for (std::size_t i = 0; i < basis_->n_vars; ++i) {
    const double z = (x[i] - scaling_.mu[i]) / scaling_.sigma[i];
    std::span<double> v(table_.data() + i * stride, stride);
    std::span<double> dv(dtable_.data() + i * stride, stride);
    hermite_table(basis_->max_degree, z, v, dv);
    for (double& d : dv) d /= scaling_.sigma[i];
  }
}

void BasisEvaluator::values(std::span<const double> x, std::span<double> out) {
  fill_tables(x);
  const std::size_t stride = basis_->max_degree + 1;
  const std::size_t n = basis_->n_vars;
  for (std::size_t j = 0; j < basis_->size(); ++j) {
    const MultiIndex& alpha = basis_->multi_indices[j];
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= table_[i * stride + alpha[i]];
    out[j] = p;
  }
}

void BasisEvaluator::values_and_gradients(std::span<const double> x, std::span<double> values,
                                          std::span<double> gradients) {
  fill_tables(x);
  const std::size_t stride = basis_->max_degree + 1;
  const std::size_t n = basis_->n_vars;
  for (std::size_t j = 0; j < basis_->size(); ++j) {
    const MultiIndex& alpha = basis_->multi_indices[j];
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= table_[i * stride + alpha[i]];
    values[j] = p;
    for (std::size_t i = 0; i < n; ++i) {
      double g = dtable_[i * stride + alpha[i]];
      for (std::size_t m = 0; m < n; ++m) {
        if (m != i) g *= table_[m * stride + alpha[m]];
      }
      gradients[j * n + i] = g;
    }
  }
}

void BasisEvaluator::directional(std::span<const double> x, std::span<const double> direction,
                                 std::span<double> out) {
  fill_tables(x);
  const std::size_t stride = basis_->max_degree + 1;
  const std::size_t n = basis_->n_vars;
  for (std::size_t j = 0; j < basis_->size(); ++j) {
    const MultiIndex& alpha = basis_->multi_indices[j];
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      double g = dtable_[i * stride + alpha[i]];
      for (std::size_t m = 0; m < n; ++m) {
        if (m != i) g *= table_[m * stride + alpha[m]];
      }
      acc += g * direction[i];
    }
    out[j] = acc;
  }
}

}  // namespace mzrom
