#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "mzrom/errors.hpp"
#include "mzrom/parallel.hpp"
#include "mzrom/surrogate.hpp"

namespace mzrom {

TrainingSet make_training_set(const TrainingSetConfig& c) {
  if (c.steps_per_window == 0) throw InvalidArgument("training set: steps_per_window must be positive");
  const std::size_t n_max = step_count(c.dt, c.t_max);
  if (n_max < c.steps_per_window) throw InvalidArgument("training set: windows longer than t_max");
  const std::size_t n_starts = n_max - c.steps_per_window + 1;
  if (c.windows_per_ic > n_starts) throw InvalidArgument("training set: too many windows per IC");

  std::mt19937_64 rng(c.seed);
  std::vector<std::uint64_t> ic_seeds(c.n_ics);
  std::vector<std::vector<std::size_t>> starts(c.n_ics);
  for (std::size_t i = 0; i < c.n_ics; ++i) {
    ic_seeds[i] = rng();
    std::set<std::size_t> picked;
    while (picked.size() < c.windows_per_ic) picked.insert(std::size_t(rng() % n_starts));
    starts[i].assign(picked.begin(), picked.end());
  }

  TrainingSet set;
  set.grid_size = c.grid_size;
  set.nu = c.nu;
  set.dt = c.dt;
  std::vector<std::vector<SnapshotWindow>> per_ic(c.n_ics);
  const std::size_t ref_grid = std::max<std::size_t>(512, c.grid_size);
  parallel_for(c.n_ics, c.workers ? c.workers : default_workers(), [&](std::size_t i) {
    const SpectralState u0 = sample_initial_condition(c.band_limit, ic_seeds[i], ref_grid);
    BurgersSolveOptions opt = reference_options(c.nu, c.t_max, c.dt);
    opt.grid_size = ref_grid;
    const BurgersSolution sol = solve_burgers(u0, opt);
    if (sol.divergence) {
      throw DivergenceError("training set: reference solve diverged", sol.divergence->time, sol.divergence->step);
    }
    for (std::size_t s : starts[i]) {
      SnapshotWindow w;
      w.ic = i;
      w.start_time = double(s) * c.dt;
      for (std::size_t n = 0; n <= c.steps_per_window; ++n) {
        w.states.push_back(to_grid(sol.snapshots[s + n], c.grid_size));
      }
      per_ic[i].push_back(std::move(w));
    }
  });
  for (auto& v : per_ic)
    for (auto& w : v) set.windows.push_back(std::move(w));
  return set;
}

RolloutLoss::RolloutLoss(std::size_t grid_size, double nu, double dt, ExpFilter filter)
    : n_(grid_size), nu_(nu), dt_(dt), fft_(grid_size), col_(grid_size), a_hat_(grid_size / 2 + 1),
      b_hat_(grid_size / 2 + 1) {
  if (!(nu > 0.0) || !(dt > 0.0)) throw InvalidArgument("RolloutLoss: nu and dt must be positive");
  damping_.resize(grid_size / 2 + 1);
  for (std::size_t k = 0; k < damping_.size(); ++k) damping_[k] = filter.factor(k, grid_size / 2);
}

// f(w) = D(-(1/2) F[w^2] + nu N[w]), column by column.
void RolloutLoss::rhs_batch(const SurrogateNet& net, const Eigen::MatrixXd& w, Eigen::MatrixXd& out,
                            Eigen::MatrixXd& hidden) {
  hidden = ((net.W1 * w).colwise() + net.b1).array().tanh().matrix();
  Eigen::MatrixXd nn = (net.W2 * hidden).colwise() + net.b2;
  out.resize(w.rows(), w.cols());
  const std::size_t kn = n_ / 2;
  for (Eigen::Index c = 0; c < w.cols(); ++c) {
    for (std::size_t j = 0; j < n_; ++j) col_[j] = w(Eigen::Index(j), c) * w(Eigen::Index(j), c);
    fft_.forward(col_, a_hat_);
    fft_.forward({nn.col(c).data(), n_}, b_hat_);
    for (std::size_t k = 0; k < kn; ++k) {
      a_hat_[k] = cplx(0.0, double(k)) * (-0.5 * damping_[k] * a_hat_[k] + nu_ * b_hat_[k]);
    }
    a_hat_[kn] = 0.0;
    fft_.inverse(a_hat_, {out.col(c).data(), n_});
  }
}

void RolloutLoss::derivative(const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
  out.resize(in.rows(), in.cols());
  const std::size_t kn = n_ / 2;
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    fft_.forward({in.col(c).data(), n_}, a_hat_);
    for (std::size_t k = 0; k < kn; ++k) a_hat_[k] *= cplx(0.0, double(k));
    a_hat_[kn] = 0.0;
    fft_.inverse(a_hat_, {out.col(c).data(), n_});
  }
}

// Pullback of lambda through f at w. D is skew and F symmetric on the grid, so
// with mu = -D lambda:  grad_w = -w .* F[mu] + nu J_N^T mu.
void RolloutLoss::vjp_batch(const SurrogateNet& net, const Eigen::MatrixXd& w, const Eigen::MatrixXd& hidden,
                            const Eigen::MatrixXd& lambda, Eigen::MatrixXd& grad_w, SurrogateNet& grad) {
  const std::size_t kn = n_ / 2;
  Eigen::MatrixXd mu(lambda.rows(), lambda.cols()), fmu(lambda.rows(), lambda.cols());
  for (Eigen::Index c = 0; c < lambda.cols(); ++c) {
    fft_.forward({lambda.col(c).data(), n_}, a_hat_);
    for (std::size_t k = 0; k < kn; ++k) {
      a_hat_[k] *= cplx(0.0, -double(k));
      b_hat_[k] = damping_[k] * a_hat_[k];
    }
    a_hat_[kn] = 0.0;
    b_hat_[kn] = 0.0;
    fft_.inverse(a_hat_, {mu.col(c).data(), n_});
    fft_.inverse(b_hat_, {fmu.col(c).data(), n_});
  }
  const Eigen::MatrixXd q = nu_ * mu;
  grad.W2.noalias() += q * hidden.transpose();
  grad.b2 += q.rowwise().sum();
  const Eigen::MatrixXd da =
      ((net.W2.transpose() * q).array() * (1.0 - hidden.array().square())).matrix();
  grad.W1.noalias() += da * w.transpose();
  grad.b1 += da.rowwise().sum();
  grad_w = -(w.array() * fmu.array()).matrix();
  grad_w.noalias() += net.W1.transpose() * da;
}

double RolloutLoss::evaluate(const SurrogateNet& net, std::span<const SampleRef> samples, std::span<double> grad) {
  if (net.input != n_) throw InvalidArgument("RolloutLoss: network width does not match grid");
  if (samples.empty()) throw InvalidArgument("RolloutLoss: empty batch");
  const std::size_t S = samples.front().steps;
  const auto B = Eigen::Index(samples.size());
  const auto N = Eigen::Index(n_);
  for (const auto& s : samples) {
    if (s.steps != S || S == 0) throw InvalidArgument("RolloutLoss: samples must share a positive step count");
    if (!s.states || s.first + S >= s.states->size()) {
      throw InvalidArgument("RolloutLoss: sample exceeds its window");
    }
  }
  auto truth = [&](std::size_t n) {
    Eigen::MatrixXd u(N, B);
    for (Eigen::Index b = 0; b < B; ++b) {
      const auto& v = (*samples[std::size_t(b)].states)[samples[std::size_t(b)].first + n];
      if (v.size() != n_) throw InvalidArgument("RolloutLoss: state size mismatch");
      u.col(b) = Eigen::Map<const Eigen::VectorXd>(v.data(), N);
    }
    return u;
  };

  const double scale = 1.0 / (double(B) * double(S) * double(n_) * (nu_ * dt_) * (nu_ * dt_));
  const bool want_grad = !grad.empty();

  std::vector<Eigen::MatrixXd> w(S + 1), wh(S), h1(S), h2(S), diff(S + 1);
  w[0] = truth(0);
  Eigen::MatrixXd k1, k2;
  double loss = 0.0;
  for (std::size_t n = 1; n <= S; ++n) {
    rhs_batch(net, w[n - 1], k1, h1[n - 1]);
    wh[n - 1] = w[n - 1] + 0.5 * dt_ * k1;
    rhs_batch(net, wh[n - 1], k2, h2[n - 1]);
    w[n] = w[n - 1] + dt_ * k2;
    diff[n] = w[n] - truth(n);
    loss += scale * diff[n].squaredNorm();
  }
  if (!want_grad) return loss;
  if (grad.size() != net.parameter_count()) throw InvalidArgument("RolloutLoss: gradient size mismatch");

  SurrogateNet g = SurrogateNet::zeros(net.input, net.hidden);
  Eigen::MatrixXd lambda = 2.0 * scale * diff[S];
  Eigen::MatrixXd g_mid, g_start;
  for (std::size_t n = S; n >= 1; --n) {
    vjp_batch(net, wh[n - 1], h2[n - 1], dt_ * lambda, g_mid, g);
    vjp_batch(net, w[n - 1], h1[n - 1], 0.5 * dt_ * g_mid, g_start, g);
    lambda += g_mid + g_start;
    if (n - 1 >= 1) lambda += 2.0 * scale * diff[n - 1];
  }
  const auto p = g.parameters();
  std::copy(p.begin(), p.end(), grad.begin());
  return loss;
}

TrainResult train_surrogate(const TrainingSet& training, const TrainConfig& c) {
  if (c.batch_size == 0) throw InvalidArgument("train_surrogate: batch_size must be positive");
  if (!(c.learning_rate > 0.0)) throw InvalidArgument("train_surrogate: learning rate must be positive");
  TrainResult result;
  result.net = SurrogateNet::initialize(training.grid_size, c.hidden, c.seed);
  result.net.W1 *= c.input_gain;
  result.net.W2 *= c.output_gain;
  if (training.windows.empty()) return result;

  const std::size_t S = training.windows.front().states.size() - 1;
  std::vector<SampleRef> pool;
  for (const auto& w : training.windows) {
    if (w.states.size() != S + 1) throw InvalidArgument("train_surrogate: windows differ in length");
    if (c.mode == TrainingMode::Rollout) {
      pool.push_back({&w.states, 0, S});
    } else {
      for (std::size_t n = 0; n < S; ++n) pool.push_back({&w.states, n, 1});
    }
  }

  RolloutLoss objective(training.grid_size, training.nu, training.dt);
  const std::size_t P = result.net.parameter_count();
  std::vector<double> theta = result.net.parameters(), grad(P), m(P, 0.0), v(P, 0.0);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t bs = std::min(c.batch_size, pool.size());
  std::size_t cursor = pool.size();
  std::vector<SampleRef> batch(bs);

  double b1t = 1.0, b2t = 1.0;
  for (std::size_t it = 0; it < c.iterations; ++it) {
    if (bs == pool.size()) {
      batch = pool;
    } else {
      for (std::size_t b = 0; b < bs; ++b) {
        if (cursor == pool.size()) {
          std::shuffle(order.begin(), order.end(), rng);
          cursor = 0;
        }
        batch[b] = pool[order[cursor++]];
      }
    }
    const double loss = objective.evaluate(result.net, batch, grad);
    if (!std::isfinite(loss)) {
      throw TrainingFailure("non-finite training loss at iteration " + std::to_string(it));
    }
    result.loss_curve.push_back(loss);
    b1t *= c.beta1;
    b2t *= c.beta2;
    for (std::size_t i = 0; i < P; ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
      const double mh = m[i] / (1.0 - b1t);
      const double vh = v[i] / (1.0 - b2t);
      theta[i] -= c.learning_rate * mh / (std::sqrt(vh) + c.epsilon);
    }
    result.net.set_parameters(theta);
  }
  if (!result.net.finite()) throw TrainingFailure("non-finite network parameters after training");
  return result;
}

}  // namespace mzrom
