#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mzrom/fourier.hpp"
#include "mzrom/spectral.hpp"

namespace mzrom {

/// Dense network N[w] on grid values: input -> tanh(hidden) -> input.
/// Two weight layers (W1, b1), (W2, b2).
struct SurrogateNet {
  std::size_t input = 256;
  std::size_t hidden = 512;
  std::string activation = "tanh";
  std::uint64_t seed = 0;
  Eigen::MatrixXd W1;  // hidden x input
  Eigen::VectorXd b1;
  Eigen::MatrixXd W2;  // input x hidden
  Eigen::VectorXd b2;

  /// Glorot-uniform weights, zero biases.
  static SurrogateNet initialize(std::size_t input, std::size_t hidden, std::uint64_t seed);
  static SurrogateNet zeros(std::size_t input, std::size_t hidden);

  std::size_t parameter_count() const noexcept;
  /// Flattened order: W1 (row-major), b1, W2 (row-major), b2.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> p);

  /// Batched forward; columns of x are samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  bool finite() const;
};

/// Checkpoint: ASCII header {widths, activation, seed} then float64-le
/// parameters in the flattened order. See docs/formats.md.
void save_checkpoint(const SurrogateNet& net, const std::filesystem::path& path);
SurrogateNet load_checkpoint(const std::filesystem::path& path);

/// Coupled PDE-ML right-hand side in divergence form
///   phi_t = d/dz( -(1/2) P_M[phi^2] + nu P_M[N[phi]] ),
/// with the dealiasing filter on the quadratic product. Without a cutoff
/// this is the unfiltered surrogate system. Output is band-limited to
/// |k| <= M exactly. One instance per thread.
class SurrogateOperator {
public:
  SurrogateOperator(const SurrogateNet& net, double nu, std::optional<std::size_t> cutoff = std::nullopt,
                    ExpFilter filter = {});

  void rhs(const SpectralState& phi, SpectralState& out);
  SpectralState rhs(const SpectralState& phi);

private:
  const SurrogateNet* net_;
  double nu_;
  std::optional<std::size_t> cutoff_;
  std::vector<double> damping_;
  RealFft fft_;
  Eigen::VectorXd grid_;
  std::vector<double> sq_;
  std::vector<cplx> s_hat_, n_hat_;
};

SpectralState surrogate_rhs(const SpectralState& w, const SurrogateNet& net, double nu);
SpectralState filtered_surrogate_rhs(const SpectralState& phi, const SurrogateNet& net, double nu,
                                     std::size_t cutoff);

// ---------------------------------------------------------------- training

/// One window: grid values u(t_i), u(t_i + dt), ..., u(t_i + S dt).
struct SnapshotWindow {
  std::size_t ic = 0;
  double start_time = 0.0;
  std::vector<std::vector<double>> states;
};

struct TrainingSet {
  std::size_t grid_size = 256;
  double nu = 0.1;
  double dt = 1e-3;
  std::vector<SnapshotWindow> windows;
};

struct TrainingSetConfig {
  std::size_t n_ics = 8;
  std::size_t windows_per_ic = 32;
  std::size_t steps_per_window = 10;
  double dt = 1e-3;
  double t_max = 4.0;
  std::size_t band_limit = 24;
  double nu = 0.1;
  std::size_t grid_size = 256;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
};

/// Samples ICs, solves them with the reference solver, and cuts windows with
/// start times on the dt grid such that every window lies in [0, t_max].
TrainingSet make_training_set(const TrainingSetConfig& config);

enum class TrainingMode {
  Rollout,         // unrolled RK2 over each full window
  TeacherForcing,  // each transition from the true state
};

struct TrainConfig {
  std::size_t hidden = 512;
  std::size_t iterations = 2000;
  std::size_t batch_size = 64;  // windows (rollout) or transitions (teacher forcing)
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  TrainingMode mode = TrainingMode::TeacherForcing;
  std::uint64_t seed = 1;
  double input_gain = 1.0;   // multiplies the Glorot-initialized W1
  double output_gain = 1.0;  // multiplies the Glorot-initialized W2
};

struct TrainResult {
  SurrogateNet net;
  std::vector<double> loss_curve;
};

/// Batched loss and gradient for a set of samples: each sample is a true
/// trajectory u_0..u_S; the prediction starts from u_0 and takes S RK2 steps
/// of the unfiltered surrogate system. Loss is the mean squared grid error
/// over samples, steps and grid points, in units of (nu dt)^2.
struct SampleRef {
  const std::vector<std::vector<double>>* states = nullptr;
  std::size_t first = 0;
  std::size_t steps = 1;
};

class RolloutLoss {
public:
  RolloutLoss(std::size_t grid_size, double nu, double dt, ExpFilter filter = {});

  /// Returns the loss; writes d loss/d parameters into grad if non-empty.
  /// All samples must have the same number of steps.
  double evaluate(const SurrogateNet& net, std::span<const SampleRef> samples, std::span<double> grad);

private:
  void rhs_batch(const SurrogateNet& net, const Eigen::MatrixXd& w, Eigen::MatrixXd& out,
                 Eigen::MatrixXd& hidden);
  void vjp_batch(const SurrogateNet& net, const Eigen::MatrixXd& w, const Eigen::MatrixXd& hidden,
                 const Eigen::MatrixXd& lambda, Eigen::MatrixXd& grad_w, SurrogateNet& grad);
  void derivative(const Eigen::MatrixXd& in, Eigen::MatrixXd& out);

  std::size_t n_;
  double nu_, dt_;
  std::vector<double> damping_;
  RealFft fft_;
  std::vector<double> col_;
  std::vector<cplx> a_hat_, b_hat_;
};

TrainResult train_surrogate(const TrainingSet& training, const TrainConfig& config);

// --------------------------------------------------------------- stability

/// Named initial conditions: "sin" (sin z), "expsin" (e^{sin z}),
/// "cos2sin" (cos(2 sin z)), sampled on the given grid.
SpectralState named_initial_condition(const std::string& name, std::size_t grid_size);

struct StabilityConfig {
  std::vector<std::size_t> cutoffs{3, 12, 127};
  std::vector<std::string> ics{"sin", "expsin"};
  double nu = 0.1;
  double T = 4.0;
  double dt = 1e-3;
  double sample_dt = 1e-2;
  std::size_t grid_size = 256;
};

struct CutoffRun {
  std::size_t cutoff = 0;
  std::vector<double> errors;  // NaN after blow-up
  std::optional<Divergence> divergence;
  double initial_sup = 0.0;
  double max_sup = 0.0;
  double mean_error = 0.0;         // over finite samples
  double final_relative_error = 0.0;
};

struct StabilityCase {
  std::string ic;
  std::vector<double> times;
  std::vector<CutoffRun> runs;
};

struct StabilityResult {
  std::vector<StabilityCase> cases;
};

StabilityResult stability_experiment(const SurrogateNet& net, const StabilityConfig& config);

/// stability_<ic>.csv with t,err_M<c>... and stability_<ic>_events.csv.
void write_stability_outputs(const StabilityResult& result, const std::filesystem::path& dir);

}  // namespace mzrom
