#include "mzrom/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mzrom/errors.hpp"
#include "mzrom/parallel.hpp"

namespace mzrom {

namespace {

// Addressable ensembles are capped well below size_t overflow.
constexpr std::size_t kMaxMembers = std::size_t{1} << 32;

inline void neumaier_add(double& sum, double& comp, double v) {
  const double t = sum + v;
  if (std::abs(sum) >= std::abs(v)) {
    comp += (sum - t) + v;
  } else {
    comp += (v - t) + sum;
  }
  sum = t;
}

}  // namespace

EnsembleGrid ensemble_grid(const QuadratureRule& rule, const ScalingParams& scaling,
                           std::size_t n_resolved, std::size_t dimension) {
  if (n_resolved == 0) throw InvalidArgument("ensemble_grid: n_resolved must be >= 1");
  if (dimension < n_resolved) throw InvalidArgument("ensemble_grid: dimension < n_resolved");
  if (scaling.size() != n_resolved) {
    throw InvalidArgument("ensemble_grid: scaling has " + std::to_string(scaling.size()) +
                          " entries, expected " + std::to_string(n_resolved));
  }
  scaling.validate();
  const std::size_t q = rule.order();
  if (q == 0) throw InvalidArgument("ensemble_grid: empty quadrature rule");

  std::size_t members = 1;
  for (std::size_t i = 0; i < n_resolved; ++i) {
    if (members > kMaxMembers / q) {
      throw InvalidArgument("ensemble_grid: " + std::to_string(q) + "^" +
                            std::to_string(n_resolved) + " members exceeds the addressable limit");
    }
    members *= q;
  }

  EnsembleGrid grid;
  grid.rule = rule;
  grid.scaling = scaling;
  grid.n_resolved = n_resolved;
  grid.dimension = dimension;
  grid.member_ics.reserve(members);
  grid.member_weights.reserve(members);

  std::vector<std::size_t> idx(n_resolved, 0);
  for (std::size_t e = 0; e < members; ++e) {
    std::vector<double> x(dimension, 0.0);
    double w = 1.0;
    for (std::size_t k = 0; k < n_resolved; ++k) {
      x[k] = scaling.mu[k] + scaling.sigma[k] * rule.nodes[idx[k]];
      w *= rule.weights[idx[k]];
    }
    grid.member_ics.push_back(std::move(x));
    grid.member_weights.push_back(w);
    for (std::size_t k = n_resolved; k-- > 0;) {
      if (++idx[k] < q) break;
      idx[k] = 0;
    }
  }
  return grid;
}

CorrelationTables CorrelationTables::zeros(double dt, std::size_t n_times, std::size_t n_basis,
                                           std::size_t n_resolved) {
  CorrelationTables t;
  t.dt = dt;
  t.n_times = n_times;
  t.n_basis = n_basis;
  t.n_resolved = n_resolved;
  t.f.assign(n_times * n_basis * n_resolved, 0.0);
  t.g.assign(n_times * n_basis * n_basis, 0.0);
  return t;
}

CorrelationTables compute_correlations(const FullOrderSystem& system, const EnsembleGrid& ensemble,
                                       const PolyBasis& basis, const StateObservable& la0,
                                       const CorrelationOptions& options) {
  system.validate();
  if (ensemble.n_resolved != system.n_resolved || ensemble.dimension != system.dimension) {
    throw InvalidArgument("compute_correlations: ensemble does not match the system");
  }
  if (basis.n_vars != system.n_resolved) {
    throw InvalidArgument("compute_correlations: basis dimension does not match the system");
  }
  if (!la0) throw InvalidArgument("compute_correlations: missing observable");

  const std::size_t n_steps = step_count(options.solver_dt, options.T);
  const std::size_t stride = step_count(options.solver_dt, options.kernel_dt);
  if (n_steps % stride != 0) {
    throw InvalidArgument("compute_correlations: kernel grid does not divide [0, T]");
  }
  const std::size_t n_times = n_steps / stride + 1;
  const std::size_t J = basis.size();
  const std::size_t R = system.n_resolved;
  const std::size_t N = system.dimension;
  const std::size_t E = ensemble.size();

  auto tables = CorrelationTables::zeros(options.kernel_dt, n_times, J, R);
  std::vector<double> comp_f, comp_g;
  if (options.compensated) {
    comp_f.assign(tables.f.size(), 0.0);
    comp_g.assign(tables.g.size(), 0.0);
  }

  const std::size_t block = std::max<std::size_t>(1, options.member_block);
  std::vector<std::vector<double>> h0(block), obs(block), vdir(block);

  for (std::size_t start = 0; start < E; start += block) {
    const std::size_t count = std::min(block, E - start);

    parallel_for(count, options.workers, [&](std::size_t local) {
      const std::size_t e = start + local;
      BasisEvaluator eval(basis, ensemble.scaling);
      std::vector<double> x = ensemble.member_ics[e];
      h0[local].resize(J);
      eval.values(std::span<const double>(x).first(R), h0[local]);
      obs[local].assign(n_times * R, 0.0);
      vdir[local].assign(n_times * J, 0.0);
      std::vector<double> r(N);

      const auto div = rk_evolve(
          system.rhs, x, options.solver_dt, n_steps, options.scheme, stride,
          [&](std::size_t step, double, std::span<const double> s) {
            const std::size_t n = step / stride;
            la0(s, std::span<double>(obs[local]).subspan(n * R, R));
            system.rhs(s, r);
            eval.directional(s.first(R), std::span<const double>(r).first(R),
                             std::span<double>(vdir[local]).subspan(n * J, J));
          });
      if (div) {
        throw DivergenceError("compute_correlations: ensemble member " + std::to_string(e) +
                                  " diverged at t=" + std::to_string(div->time),
                              div->time, div->step);
      }
    });

    // Row l of f and g only receives contributions with basis index l, so
    // rows are reduced independently; within a row, members are added in order.
    parallel_for(J, options.workers, [&](std::size_t l) {
      for (std::size_t local = 0; local < count; ++local) {
        const double coeff = ensemble.member_weights[start + local] * h0[local][l];
        const double* o = obs[local].data();
        const double* v = vdir[local].data();
        for (std::size_t n = 0; n < n_times; ++n) {
          const std::size_t fbase = (n * J + l) * R;
          const std::size_t gbase = (l * n_times + n) * J;
          if (options.compensated) {
            for (std::size_t k = 0; k < R; ++k) {
              neumaier_add(tables.f[fbase + k], comp_f[fbase + k], coeff * o[n * R + k]);
            }
            for (std::size_t j = 0; j < J; ++j) {
              neumaier_add(tables.g[gbase + j], comp_g[gbase + j], coeff * v[n * J + j]);
            }
          } else {
            for (std::size_t k = 0; k < R; ++k) tables.f[fbase + k] += coeff * o[n * R + k];
            for (std::size_t j = 0; j < J; ++j) tables.g[gbase + j] += coeff * v[n * J + j];
          }
        }
      }
    });
  }

  if (options.compensated) {
    for (std::size_t i = 0; i < tables.f.size(); ++i) tables.f[i] += comp_f[i];
    for (std::size_t i = 0; i < tables.g.size(); ++i) tables.g[i] += comp_g[i];
  }
  return tables;
}

CorrelationTables restrict_tables(const CorrelationTables& t, const PolyBasis& full,
                                  const PolyBasis& sub) {
  if (full.size() != t.n_basis) throw InvalidArgument("restrict_tables: basis does not match tables");
  std::vector<std::size_t> map;
  map.reserve(sub.size());
  for (const auto& alpha : sub.multi_indices) {
    const auto it = std::find(full.multi_indices.begin(), full.multi_indices.end(), alpha);
    if (it == full.multi_indices.end()) {
      throw InvalidArgument("restrict_tables: sub-basis function missing from the full basis");
    }
    map.push_back(std::size_t(it - full.multi_indices.begin()));
  }
  auto out = CorrelationTables::zeros(t.dt, t.n_times, sub.size(), t.n_resolved);
  for (std::size_t n = 0; n < t.n_times; ++n) {
    for (std::size_t l = 0; l < sub.size(); ++l) {
      for (std::size_t k = 0; k < t.n_resolved; ++k) out.f_at(n, l, k) = t.f_at(n, map[l], k);
      for (std::size_t j = 0; j < sub.size(); ++j) out.g_at(n, l, j) = t.g_at(n, map[l], map[j]);
    }
  }
  return out;
}

PolyBasis KernelTable::basis() const {
  PolyBasis b;
  b.n_vars = n_resolved;
  b.max_degree = max_degree;
  b.multi_indices = multi_indices;
  return b;
}

KernelTable solve_volterra(const CorrelationTables& tables, const PolyBasis& basis,
                           const ScalingParams& scaling, const VolterraOptions& options) {
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMap = Eigen::Map<const RowMat>;

  const std::size_t J = tables.n_basis;
  const std::size_t R = tables.n_resolved;
  const std::size_t NT = tables.n_times;
  if (J != basis.size() || R != basis.n_vars) {
    throw InvalidArgument("solve_volterra: tables do not match the basis");
  }
  if (NT == 0) throw InvalidArgument("solve_volterra: empty tables");
  const double dt = tables.dt;
  const auto Ji = static_cast<Eigen::Index>(J);
  const auto Ri = static_cast<Eigen::Index>(R);

  KernelTable out;
  out.dt = dt;
  out.n_times = NT;
  out.n_resolved = R;
  out.max_degree = basis.max_degree;
  out.scaling = scaling;
  out.multi_indices = basis.multi_indices;
  out.K.assign(NT * J * R, 0.0);

  // Row l of g is a contiguous (NT x J) block, so the whole table is the
  // J x (NT*J) matrix [G(0) | G(1) | ...].
  const ConstMap gcat(tables.g.data(), Ji, static_cast<Eigen::Index>(NT * J));
  auto G = [&](std::size_t n) { return gcat.middleCols(static_cast<Eigen::Index>(n * J), Ji); };
  auto f = [&](std::size_t n) { return ConstMap(tables.f.data() + n * J * R, Ji, Ri); };

  // K stored in reverse time order so sum_{m=1}^{n-1} G(n-m) K(m) is one
  // product against a contiguous block: block r holds K(NT-1-r).
  RowMat krev = RowMat::Zero(static_cast<Eigen::Index>(NT * J), Ri);
  auto krev_block = [&](std::size_t m) {
    return krev.middleRows(static_cast<Eigen::Index>((NT - 1 - m) * J), Ji);
  };

  RowMat k0 = f(0);
  Eigen::Map<RowMat>(out.K.data(), Ji, Ri) = k0;
  krev_block(0) = k0;
  if (NT == 1) return out;

  const RowMat step = RowMat::Identity(Ji, Ji) + 0.5 * dt * RowMat(G(0));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(step);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond) || 1.0 / rcond > options.condition_limit) {
    throw NumericalFailure("solve_volterra: step matrix I + (dt/2) G(0) is singular or "
                           "ill-conditioned (condition estimate " +
                               std::to_string(rcond > 0.0 ? 1.0 / rcond : INFINITY) + ") at n=1",
                           1);
  }

  RowMat rhs(Ji, Ri);
  for (std::size_t n = 1; n < NT; ++n) {
    rhs = f(n) - 0.5 * dt * (G(n) * k0);
    if (n > 1) {
      // Lags 1..n-1 pair with K(n-1)..K(1), which sit in consecutive blocks.
      const auto lags = gcat.middleCols(Ji, static_cast<Eigen::Index>((n - 1) * J));
      const auto hist = krev.middleRows(static_cast<Eigen::Index>((NT - n) * J),
                                        static_cast<Eigen::Index>((n - 1) * J));
      rhs.noalias() -= dt * (lags * hist);
    }
    const RowMat kn = lu.solve(Eigen::MatrixXd(rhs));
    if (!kn.allFinite()) {
      throw NumericalFailure("solve_volterra: non-finite kernel at n=" + std::to_string(n), n);
    }
    Eigen::Map<RowMat>(out.K.data() + n * J * R, Ji, Ri) = kn;
    krev_block(n) = kn;
  }
  return out;
}

}  // namespace mzrom
