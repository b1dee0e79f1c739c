#include "run_config.hpp"

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"

namespace mzrom::cli {

namespace {

std::string scheme_name(RkScheme s) { return s == RkScheme::RK2 ? "rk2" : "rk4"; }

RkScheme parse_scheme(const std::string& s) {
  if (s == "rk2") return RkScheme::RK2;
  if (s == "rk4") return RkScheme::RK4;
  throw InvalidArgument("scheme must be rk2 or rk4 (got '" + s + "')");
}

std::string mode_name(TrainingMode m) { return m == TrainingMode::Rollout ? "rollout" : "teacher-forcing"; }

TrainingMode parse_mode(const std::string& s) {
  if (s == "rollout") return TrainingMode::Rollout;
  if (s == "teacher-forcing") return TrainingMode::TeacherForcing;
  throw InvalidArgument("training mode must be rollout or teacher-forcing (got '" + s + "')");
}

json filter_json(const ExpFilter& f) { return {{"enabled", f.enabled}, {"alpha", f.alpha}, {"order", f.order}}; }

ExpFilter parse_filter(const json& j) {
  ExpFilter f;
  f.enabled = j.at("enabled").get<bool>();
  f.alpha = j.at("alpha").get<double>();
  f.order = j.at("order").get<double>();
  return f;
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  c.full_solve.solver.T = 1.0;
  c.full_solve.solver.sample_dt = 1e-2;
  c.training.train.iterations = 4000;
  c.training.train.output_gain = 0.0;
  c.nl.T = 10.0;
  return c;
}

void RunConfig::finalize() {
  training.data.seed = seed;
  training.train.seed = seed;
  training.data.workers = workers;
  vb.run.workers = workers;
  nl.workers = workers;
  oracle.run.workers = workers;

  const auto& s = full_solve;
  if (s.initial_condition != "sin" && s.initial_condition != "expsin" && s.initial_condition != "cos2sin" &&
      s.initial_condition != "random") {
    throw InvalidArgument("full_solve.initial_condition must be sin, expsin, cos2sin or random");
  }
  if (!(s.solver.nu >= 0.0)) throw InvalidArgument("full_solve.nu must be non-negative");
  step_count(s.solver.dt, s.solver.T);
  step_count(s.solver.dt, s.solver.sample_dt);
  if (s.initial_condition == "random" && s.band_limit >= s.solver.grid_size / 2) {
    throw InvalidArgument("full_solve.band_limit must be below grid_size/2");
  }

  const auto& d = training.data;
  if (d.grid_size < 4 || (d.grid_size & (d.grid_size - 1)) != 0) {
    throw InvalidArgument("training.grid_size must be a power of two");
  }
  step_count(d.dt, d.t_max);
  if (training.train.batch_size == 0) throw InvalidArgument("training.batch_size must be positive");
  if (!(training.train.learning_rate > 0.0)) throw InvalidArgument("training.learning_rate must be positive");
  if (training.train.hidden == 0) throw InvalidArgument("training.hidden must be positive");

  const auto& st = stability.run;
  if (st.cutoffs.empty()) throw InvalidArgument("stability.cutoffs must not be empty");
  for (std::size_t M : st.cutoffs) {
    if (M > st.grid_size / 2) throw InvalidArgument("stability.cutoffs must not exceed grid_size/2");
  }
  for (const auto& ic : st.ics) {
    if (ic != "sin" && ic != "expsin" && ic != "cos2sin") {
      throw InvalidArgument("stability.ics: unknown initial condition '" + ic + "'");
    }
  }
  if (st.grid_size != training.data.grid_size) {
    throw InvalidArgument("stability.grid_size must equal training.grid_size");
  }
  step_count(st.dt, st.T);
  step_count(st.dt, st.sample_dt);
  step_count(st.sample_dt, st.T);

  nl.validate();
  vb.run.validate();
  oracle.run.validate();
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["output"] = c.output;

  const auto& fs = c.full_solve;
  j["full_solve"] = {{"initial_condition", fs.initial_condition},
                     {"band_limit", fs.band_limit},
                     {"grid_size", fs.solver.grid_size},
                     {"nu", fs.solver.nu},
                     {"dt", fs.solver.dt},
                     {"T", fs.solver.T},
                     {"sample_dt", fs.solver.sample_dt},
                     {"scheme", scheme_name(fs.solver.scheme)},
                     {"filter", filter_json(fs.solver.filter)}};

  const auto& d = c.training.data;
  const auto& t = c.training.train;
  j["training"] = {{"n_ics", d.n_ics},
                   {"windows_per_ic", d.windows_per_ic},
                   {"steps_per_window", d.steps_per_window},
                   {"dt", d.dt},
                   {"t_max", d.t_max},
                   {"band_limit", d.band_limit},
                   {"nu", d.nu},
                   {"grid_size", d.grid_size},
                   {"hidden", t.hidden},
                   {"iterations", t.iterations},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.learning_rate},
                   {"beta1", t.beta1},
                   {"beta2", t.beta2},
                   {"epsilon", t.epsilon},
                   {"mode", mode_name(t.mode)},
                   {"input_gain", t.input_gain},
                   {"output_gain", t.output_gain}};

  const auto& s = c.stability.run;
  j["stability"] = {{"cutoffs", s.cutoffs},   {"ics", s.ics}, {"nu", s.nu},
                    {"T", s.T},               {"dt", s.dt},   {"sample_dt", s.sample_dt},
                    {"grid_size", s.grid_size}, {"checkpoint", c.stability.checkpoint}};

  const auto& n = c.nl;
  j["nl"] = {{"max_degree", n.max_degree}, {"n_quad", n.n_quad},   {"x1_cases", n.x1_cases},
             {"mu", n.mu},                 {"sigma", n.sigma},     {"dt_full", n.dt_full},
             {"dt_kernel", n.dt_kernel},   {"T", n.T}};

  const auto& v = c.vb.run;
  j["vb"] = {{"M", v.M},
             {"linear_degree", v.linear_degree},
             {"cubic_degree", v.cubic_degree},
             {"nu", v.nu},
             {"n_quad", v.n_quad},
             {"dt_full", v.dt_full},
             {"dt_kernel", v.dt_kernel},
             {"T", v.T},
             {"sample_dt", v.sample_dt},
             {"grid_size", v.grid_size},
             {"ics", v.ics},
             {"member_block", v.member_block},
             {"kernels", c.vb.kernels}};

  const auto& o = c.oracle.run;
  j["oracle"] = {{"mu", o.mu},
                 {"sigma", o.sigma},
                 {"n_quad", o.n_quad},
                 {"T", o.T},
                 {"dt_full", o.dt_full},
                 {"dt_kernel", o.dt_kernel},
                 {"x0", o.x0},
                 {"kernel_tolerance", c.oracle.kernel_tolerance},
                 {"rom_tolerance", c.oracle.rom_tolerance}};
  return j;
}

RunConfig from_json(const json& in) {
  json j = to_json(default_config());
  merge_strict(j, in);
  try {
    RunConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.at("workers").get<std::size_t>();
    c.output = j.at("output").get<std::string>();

    const json& fs = j.at("full_solve");
    c.full_solve.initial_condition = fs.at("initial_condition").get<std::string>();
    c.full_solve.band_limit = fs.at("band_limit").get<std::size_t>();
    c.full_solve.solver.grid_size = fs.at("grid_size").get<std::size_t>();
    c.full_solve.solver.nu = fs.at("nu").get<double>();
    c.full_solve.solver.dt = fs.at("dt").get<double>();
    c.full_solve.solver.T = fs.at("T").get<double>();
    c.full_solve.solver.sample_dt = fs.at("sample_dt").get<double>();
    c.full_solve.solver.scheme = parse_scheme(fs.at("scheme").get<std::string>());
    c.full_solve.solver.filter = parse_filter(fs.at("filter"));

    const json& tr = j.at("training");
    auto& d = c.training.data;
    auto& t = c.training.train;
    d.n_ics = tr.at("n_ics").get<std::size_t>();
    d.windows_per_ic = tr.at("windows_per_ic").get<std::size_t>();
    d.steps_per_window = tr.at("steps_per_window").get<std::size_t>();
    d.dt = tr.at("dt").get<double>();
    d.t_max = tr.at("t_max").get<double>();
    d.band_limit = tr.at("band_limit").get<std::size_t>();
    d.nu = tr.at("nu").get<double>();
    d.grid_size = tr.at("grid_size").get<std::size_t>();
    t.hidden = tr.at("hidden").get<std::size_t>();
    t.iterations = tr.at("iterations").get<std::size_t>();
    t.batch_size = tr.at("batch_size").get<std::size_t>();
    t.learning_rate = tr.at("learning_rate").get<double>();
    t.beta1 = tr.at("beta1").get<double>();
    t.beta2 = tr.at("beta2").get<double>();
    t.epsilon = tr.at("epsilon").get<double>();
    t.mode = parse_mode(tr.at("mode").get<std::string>());
    t.input_gain = tr.at("input_gain").get<double>();
    t.output_gain = tr.at("output_gain").get<double>();

    const json& st = j.at("stability");
    auto& s = c.stability.run;
    s.cutoffs = st.at("cutoffs").get<std::vector<std::size_t>>();
    s.ics = st.at("ics").get<std::vector<std::string>>();
    s.nu = st.at("nu").get<double>();
    s.T = st.at("T").get<double>();
    s.dt = st.at("dt").get<double>();
    s.sample_dt = st.at("sample_dt").get<double>();
    s.grid_size = st.at("grid_size").get<std::size_t>();
    c.stability.checkpoint = st.at("checkpoint").get<std::string>();

    const json& nl = j.at("nl");
    c.nl.max_degree = nl.at("max_degree").get<unsigned>();
    c.nl.n_quad = nl.at("n_quad").get<std::size_t>();
    c.nl.x1_cases = nl.at("x1_cases").get<std::vector<double>>();
    c.nl.mu = nl.at("mu").get<double>();
    c.nl.sigma = nl.at("sigma").get<double>();
    c.nl.dt_full = nl.at("dt_full").get<double>();
    c.nl.dt_kernel = nl.at("dt_kernel").get<double>();
    c.nl.T = nl.at("T").get<double>();

    const json& vb = j.at("vb");
    auto& v = c.vb.run;
    v.M = vb.at("M").get<std::size_t>();
    v.linear_degree = vb.at("linear_degree").get<unsigned>();
    v.cubic_degree = vb.at("cubic_degree").get<unsigned>();
    v.nu = vb.at("nu").get<double>();
    v.n_quad = vb.at("n_quad").get<std::size_t>();
    v.dt_full = vb.at("dt_full").get<double>();
    v.dt_kernel = vb.at("dt_kernel").get<double>();
    v.T = vb.at("T").get<double>();
    v.sample_dt = vb.at("sample_dt").get<double>();
    v.grid_size = vb.at("grid_size").get<std::size_t>();
    v.ics = vb.at("ics").get<std::vector<std::string>>();
    v.member_block = vb.at("member_block").get<std::size_t>();
    c.vb.kernels = vb.at("kernels").get<std::string>();

    const json& o = j.at("oracle");
    auto& r = c.oracle.run;
    r.mu = o.at("mu").get<double>();
    r.sigma = o.at("sigma").get<double>();
    r.n_quad = o.at("n_quad").get<std::size_t>();
    r.T = o.at("T").get<double>();
    r.dt_full = o.at("dt_full").get<double>();
    r.dt_kernel = o.at("dt_kernel").get<double>();
    r.x0 = o.at("x0").get<double>();
    c.oracle.kernel_tolerance = o.at("kernel_tolerance").get<double>();
    c.oracle.rom_tolerance = o.at("rom_tolerance").get<double>();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

void merge_strict(json& base, const json& overlay, const std::string& path) {
  if (!overlay.is_object()) throw InvalidArgument("config: expected an object at '" + (path.empty() ? "<root>" : path) + "'");
  for (auto it = overlay.begin(); it != overlay.end(); ++it) {
    const std::string key = path.empty() ? it.key() : path + "." + it.key();
    if (!base.contains(it.key())) throw InvalidArgument("config: unknown key '" + key + "'");
    json& slot = base[it.key()];
    if (slot.is_object()) {
      merge_strict(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override '" + assignment + "' must have the form key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json overlay = value;
  std::size_t end = path.size();
  while (true) {
    const std::size_t dot = path.rfind('.', end - 1);
    const std::size_t begin = dot == std::string::npos ? 0 : dot + 1;
    overlay = json{{path.substr(begin, end - begin), overlay}};
    if (dot == std::string::npos) break;
    end = dot;
  }
  merge_strict(j, overlay);
}

json load_config_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidArgument("config " + path.string() + ": not valid JSON");
  if (j.is_object() && j.contains("tool") && j.contains("config")) return j.at("config");
  return j;
}

}  // namespace mzrom::cli
