#include <sstream>
#include <string>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "mzrom/kernel.hpp"

namespace mzrom {

namespace {
constexpr const char* kMagic = "mzrom-kernel-table 1";
constexpr const char* kEnd = "end_header";

double parse_double(const std::string& s, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("kernel table " + path.string() + ": bad number '" + s + "'");
  }
}
}  // namespace

void save_kernel_table(const KernelTable& t, const std::filesystem::path& path) {
  if (t.K.size() != t.n_times * t.n_basis() * t.n_resolved) {
    throw InvalidArgument("save_kernel_table: payload size does not match header");
  }
  std::string out;
  out += kMagic;
  out += '\n';
  out += "n_resolved " + std::to_string(t.n_resolved) + '\n';
  out += "max_degree " + std::to_string(t.max_degree) + '\n';
  out += "n_basis " + std::to_string(t.n_basis()) + '\n';
  out += "dt " + format_double(t.dt) + '\n';
  out += "n_times " + std::to_string(t.n_times) + '\n';
  out += "mu";
  for (double v : t.scaling.mu) out += ' ' + format_double(v);
  out += "\nsigma";
  for (double v : t.scaling.sigma) out += ' ' + format_double(v);
  out += '\n';
  for (const auto& alpha : t.multi_indices) {
    out += "index";
    for (unsigned a : alpha) out += ' ' + std::to_string(a);
    out += '\n';
  }
  out += "layout K[n][j][k] float64-le\n";
  out += kEnd;
  out += '\n';
  append_f64(out, t.K);
  write_file_atomic(path, out);
}

KernelTable load_kernel_table(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  const std::size_t end = data.find(std::string(kEnd) + '\n');
  if (data.rfind(kMagic, 0) != 0 || end == std::string::npos) {
    throw IoError("kernel table " + path.string() + ": missing header");
  }
  std::istringstream header(data.substr(0, end));
  std::string line;
  std::getline(header, line);

  KernelTable t;
  std::size_t n_basis = 0;
  while (std::getline(header, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::string tok;
    if (key == "n_resolved") {
      ls >> t.n_resolved;
    } else if (key == "max_degree") {
      ls >> t.max_degree;
    } else if (key == "n_basis") {
      ls >> n_basis;
    } else if (key == "dt") {
      ls >> tok;
      t.dt = parse_double(tok, path);
    } else if (key == "n_times") {
      ls >> t.n_times;
    } else if (key == "mu") {
      while (ls >> tok) t.scaling.mu.push_back(parse_double(tok, path));
    } else if (key == "sigma") {
      while (ls >> tok) t.scaling.sigma.push_back(parse_double(tok, path));
    } else if (key == "index") {
      MultiIndex alpha;
      unsigned a = 0;
      while (ls >> a) alpha.push_back(a);
      if (alpha.size() != t.n_resolved) throw IoError("kernel table " + path.string() + ": bad index line");
      t.multi_indices.push_back(std::move(alpha));
    } else if (key == "layout") {
      continue;
    } else {
      throw IoError("kernel table " + path.string() + ": unknown header key '" + key + "'");
    }
    if (ls.fail() && !ls.eof()) throw IoError("kernel table " + path.string() + ": bad line '" + line + "'");
  }
  if (t.multi_indices.size() != n_basis || t.scaling.mu.size() != t.n_resolved ||
      t.scaling.sigma.size() != t.n_resolved) {
    throw IoError("kernel table " + path.string() + ": inconsistent header");
  }
  t.K.resize(t.n_times * n_basis * t.n_resolved);
  std::size_t offset = end + std::string(kEnd).size() + 1;
  read_f64(data, offset, t.K);
  if (offset != data.size()) throw IoError("kernel table " + path.string() + ": trailing bytes");
  return t;
}

}  // namespace mzrom
