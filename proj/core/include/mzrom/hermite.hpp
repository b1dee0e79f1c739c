#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mzrom {

/// Gauss rule for the standard normal density e^{-z^2/2}/sqrt(2 pi).
///
/// Nodes are sorted ascending and symmetric about zero; weights are
/// probability weights (they sum to one).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t order() const noexcept { return nodes.size(); }
};

/// Per-variable centering and scaling, x = mu + sigma * z.
struct ScalingParams {
  std::vector<double> mu;
  std::vector<double> sigma;

  std::size_t size() const noexcept { return mu.size(); }

  /// Throws InvalidArgument on mismatched lengths or non-positive sigma.
  void validate() const;

  static ScalingParams standard(std::size_t n_vars);
};

/// Multi-index of per-variable polynomial degrees.
using MultiIndex = std::vector<unsigned>;

/// Orthonormal tensor-product Hermite basis of total degree <= max_degree.
///
/// Multi-indices are stored in graded lexicographic order: by total degree,
/// then lexicographically descending in the leading variable, so the first
/// element is the constant and for one variable the order is (0),(1),(2),...
struct PolyBasis {
  std::size_t n_vars = 0;
  unsigned max_degree = 0;
  std::vector<MultiIndex> multi_indices;

  std::size_t size() const noexcept { return multi_indices.size(); }
};

struct HermiteValue {
  double value;
  double derivative;
};

/// Gauss-Hermite rule (probabilists' weight) via the Golub-Welsch tridiagonal
/// eigenproblem, with Newton polish of the nodes and Christoffel weights.
QuadratureRule gauss_hermite_rule(std::size_t order);

/// Normalized probabilists' Hermite polynomial He_j(z)/sqrt(j!) and its
/// derivative sqrt(j) * h_{j-1}(z).
HermiteValue hermite_poly(unsigned degree, double z);

/// Fills values[0..max_degree] with h_0(z)..h_max(z) and derivs likewise.
void hermite_table(unsigned max_degree, double z, std::span<double> values,
                   std::span<double> derivs);

/// Binomial C(n_vars + max_degree, max_degree); throws InvalidArgument on
/// overflow of std::size_t.
std::size_t basis_count(std::size_t n_vars, unsigned max_degree);

PolyBasis build_basis(std::size_t n_vars, unsigned max_degree);

struct BasisValue {
  double value;
  std::vector<double> gradient;
};

/// Evaluates basis function j at x with the chain-rule 1/sigma_i factors in
/// the gradient.
BasisValue basis_eval(const PolyBasis& basis, std::size_t j,
                      std::span<const double> x, const ScalingParams& scaling);

/// Evaluates every basis function (and optionally all gradients) at one
/// point, sharing the univariate tables.
///
/// values has length J; gradients, if non-empty, is row-major J x n_vars.
class BasisEvaluator {
public:
  BasisEvaluator(const PolyBasis& basis, const ScalingParams& scaling);

  void values(std::span<const double> x, std::span<double> out);
  void values_and_gradients(std::span<const double> x, std::span<double> values,
                            std::span<double> gradients);

  /// out[j] = grad h_j(x) . direction, for all j.
  void directional(std::span<const double> x, std::span<const double> direction,
                   std::span<double> out);

  const PolyBasis& basis() const noexcept { return *basis_; }

private:
  void fill_tables(std::span<const double> x);

  const PolyBasis* basis_;
  ScalingParams scaling_;
  std::vector<double> table_;   // n_vars x (d+1)
  std::vector<double> dtable_;  // n_vars x (d+1), already divided by sigma
};

}  // namespace mzrom
