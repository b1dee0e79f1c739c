#include "mzrom/surrogate.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"

namespace mzrom {

namespace {
constexpr const char* kMagic = "mzrom-surrogate 1";
constexpr const char* kEnd = "end_header";
}  // namespace

SurrogateNet SurrogateNet::zeros(std::size_t input, std::size_t hidden) {
  if (input == 0 || hidden == 0) throw InvalidArgument("SurrogateNet: widths must be positive");
  SurrogateNet n;
  n.input = input;
  n.hidden = hidden;
  n.W1 = Eigen::MatrixXd::Zero(Eigen::Index(hidden), Eigen::Index(input));
  n.b1 = Eigen::VectorXd::Zero(Eigen::Index(hidden));
  n.W2 = Eigen::MatrixXd::Zero(Eigen::Index(input), Eigen::Index(hidden));
  n.b2 = Eigen::VectorXd::Zero(Eigen::Index(input));
  return n;
}

SurrogateNet SurrogateNet::initialize(std::size_t input, std::size_t hidden, std::uint64_t seed) {
  SurrogateNet n = zeros(input, hidden);
  n.seed = seed;
  std::mt19937_64 rng(seed);
  const double a = std::sqrt(6.0 / double(input + hidden));
  // Row-major fill so the draw order matches the checkpoint layout.
  for (Eigen::Index i = 0; i < n.W1.rows(); ++i)
    for (Eigen::Index j = 0; j < n.W1.cols(); ++j) n.W1(i, j) = a * unit_symmetric(rng());
  for (Eigen::Index i = 0; i < n.W2.rows(); ++i)
    for (Eigen::Index j = 0; j < n.W2.cols(); ++j) n.W2(i, j) = a * unit_symmetric(rng());
  return n;
}

std::size_t SurrogateNet::parameter_count() const noexcept {
  return 2 * input * hidden + input + hidden;
}

std::vector<double> SurrogateNet::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (Eigen::Index i = 0; i < W1.rows(); ++i)
    for (Eigen::Index j = 0; j < W1.cols(); ++j) p.push_back(W1(i, j));
  for (Eigen::Index i = 0; i < b1.size(); ++i) p.push_back(b1(i));
  for (Eigen::Index i = 0; i < W2.rows(); ++i)
    for (Eigen::Index j = 0; j < W2.cols(); ++j) p.push_back(W2(i, j));
  for (Eigen::Index i = 0; i < b2.size(); ++i) p.push_back(b2(i));
  return p;
}

void SurrogateNet::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw InvalidArgument("SurrogateNet: parameter count mismatch");
  std::size_t c = 0;
  for (Eigen::Index i = 0; i < W1.rows(); ++i)
    for (Eigen::Index j = 0; j < W1.cols(); ++j) W1(i, j) = p[c++];
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1(i) = p[c++];
  for (Eigen::Index i = 0; i < W2.rows(); ++i)
    for (Eigen::Index j = 0; j < W2.cols(); ++j) W2(i, j) = p[c++];
  for (Eigen::Index i = 0; i < b2.size(); ++i) b2(i) = p[c++];
}

Eigen::MatrixXd SurrogateNet::forward(const Eigen::MatrixXd& x) const {
  if (std::size_t(x.rows()) != input) throw InvalidArgument("SurrogateNet: input width mismatch");
  Eigen::MatrixXd h = ((W1 * x).colwise() + b1).array().tanh().matrix();
  return (W2 * h).colwise() + b2;
}

Eigen::VectorXd SurrogateNet::forward(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd m = x;
  return forward(m).col(0);
}

bool SurrogateNet::finite() const {
  return W1.allFinite() && b1.allFinite() && W2.allFinite() && b2.allFinite();
}

void save_checkpoint(const SurrogateNet& net, const std::filesystem::path& path) {
  std::string out = kMagic;
  out += '\n';
  out += "widths " + std::to_string(net.input) + ' ' + std::to_string(net.hidden) + ' ' +
         std::to_string(net.input) + '\n';
  out += "activation " + net.activation + '\n';
  out += "seed " + std::to_string(net.seed) + '\n';
  out += "layout W1 b1 W2 b2 row-major float64-le\n";
  out += kEnd;
  out += '\n';
  append_f64(out, net.parameters());
  write_file_atomic(path, out);
}

SurrogateNet load_checkpoint(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::size_t end = data.find(std::string(kEnd) + '\n');
  if (data.rfind(kMagic, 0) != 0 || end == std::string::npos) {
    throw IoError("checkpoint " + path.string() + ": missing header");
  }
  std::istringstream header(data.substr(0, end));
  std::string line;
  std::getline(header, line);
  std::size_t in = 0, hid = 0, outw = 0;
  std::string activation;
  std::uint64_t seed = 0;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "widths") {
      ls >> in >> hid >> outw;
    } else if (key == "activation") {
      ls >> activation;
    } else if (key == "seed") {
      ls >> seed;
    }
    if (ls.fail()) throw IoError("checkpoint " + path.string() + ": bad header line '" + line + "'");
  }
  if (in == 0 || hid == 0 || outw != in) throw IoError("checkpoint " + path.string() + ": bad widths");
  if (activation != "tanh") {
    throw IoError("checkpoint " + path.string() + ": unsupported activation '" + activation + "'");
  }
  SurrogateNet net = SurrogateNet::zeros(in, hid);
  net.seed = seed;
  std::vector<double> p(net.parameter_count());
  std::size_t offset = end + std::string(kEnd).size() + 1;
  if (data.size() - offset != p.size() * sizeof(double)) {
    throw IoError("checkpoint " + path.string() + ": payload size mismatch");
  }
  read_f64(data, offset, p);
  net.set_parameters(p);
  return net;
}

SurrogateOperator::SurrogateOperator(const SurrogateNet& net, double nu, std::optional<std::size_t> cutoff,
                                     ExpFilter filter)
    : net_(&net), nu_(nu), cutoff_(cutoff), fft_(net.input), grid_(Eigen::Index(net.input)),
      sq_(net.input), s_hat_(net.input / 2 + 1), n_hat_(net.input / 2 + 1) {
  const std::size_t n = net.input;
  if (n < 4 || (n & (n - 1)) != 0) throw InvalidArgument("SurrogateOperator: input width must be a power of two");
  if (cutoff && *cutoff > n / 2) throw InvalidArgument("SurrogateOperator: cutoff exceeds N_g/2");
  damping_.resize(n / 2 + 1);
  for (std::size_t k = 0; k < damping_.size(); ++k) damping_[k] = filter.factor(k, n / 2);
}

void SurrogateOperator::rhs(const SpectralState& phi, SpectralState& out) {
  const std::size_t n = net_->input;
  if (phi.grid_size != n) throw InvalidArgument("SurrogateOperator: grid size mismatch");
  if (out.grid_size != n) out = SpectralState(n);
  const std::size_t kn = n / 2;
  for (std::size_t k = 0; k <= kn; ++k) s_hat_[k] = phi.coeffs[k];
  s_hat_[kn] = 0.0;
  fft_.inverse(s_hat_, {grid_.data(), n});
  for (std::size_t j = 0; j < n; ++j) sq_[j] = grid_[Eigen::Index(j)] * grid_[Eigen::Index(j)];
  const Eigen::VectorXd nn = net_->forward(grid_);
  fft_.forward(sq_, s_hat_);
  fft_.forward({nn.data(), n}, n_hat_);
  const std::size_t top = cutoff_ ? std::min(*cutoff_, kn - 1) : kn - 1;
  for (std::size_t k = 0; k <= kn; ++k) {
    if (k > top) {
      out.coeffs[k] = 0.0;
      continue;
    }
    const cplx b = -0.5 * damping_[k] * s_hat_[k] + nu_ * n_hat_[k];
    out.coeffs[k] = cplx(0.0, double(k)) * b;
  }
}

SpectralState SurrogateOperator::rhs(const SpectralState& phi) {
  SpectralState out(net_->input);
  rhs(phi, out);
  return out;
}

SpectralState surrogate_rhs(const SpectralState& w, const SurrogateNet& net, double nu) {
  SurrogateOperator op(net, nu);
  return op.rhs(w);
}

SpectralState filtered_surrogate_rhs(const SpectralState& phi, const SurrogateNet& net, double nu,
                                     std::size_t cutoff) {
  SurrogateOperator op(net, nu, cutoff);
  return op.rhs(phi);
}

}  // namespace mzrom
