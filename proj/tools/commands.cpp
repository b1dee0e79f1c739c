#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>

#include "mzrom/errors.hpp"
#include "mzrom/io.hpp"
#include "run_config.hpp"

namespace mzrom::cli {

namespace {

namespace fs = std::filesystem;

struct Context {
  RunConfig config;
  fs::path out_dir;
  std::ostream& log;
  std::vector<std::string> outputs;
  int status = kOk;

  void wrote(const std::string& name) { outputs.push_back(name); }
};

SpectralState full_solve_ic(const FullSolveBlock& b, std::uint64_t seed) {
  if (b.initial_condition == "random") return sample_initial_condition(b.band_limit, seed, b.solver.grid_size);
  return named_initial_condition(b.initial_condition, b.solver.grid_size);
}

void cmd_full_solve(Context& ctx) {
  const auto& b = ctx.config.full_solve;
  const BurgersSolution sol = solve_burgers(full_solve_ic(b, ctx.config.seed), b.solver);
  CsvTable energy({"t", "l2_norm"});
  for (std::size_t i = 0; i < sol.times.size(); ++i) {
    const double row[] = {sol.times[i], l2_norm(sol.snapshots[i])};
    energy.add_row(row);
  }
  energy.save(ctx.out_dir / "full_solve_energy.csv");
  ctx.wrote("full_solve_energy.csv");
  if (!sol.snapshots.empty()) {
    save_state_csv(sol.snapshots.back(), ctx.out_dir / "full_solve_state.csv");
    save_spectrum_csv(sol.snapshots.back(), ctx.out_dir / "full_solve_spectrum.csv");
    ctx.wrote("full_solve_state.csv");
    ctx.wrote("full_solve_spectrum.csv");
  }
  if (sol.divergence) {
    ctx.log << "full-solve: diverged at t=" << sol.divergence->time << "\n";
    ctx.status = kDivergence;
    return;
  }
  ctx.log << "full-solve: " << sol.times.size() << " snapshots, final L2 norm "
          << l2_norm(sol.snapshots.back()) << "\n";
}

SurrogateNet train(Context& ctx) {
  const auto& b = ctx.config.training;
  const TrainingSet set = make_training_set(b.data);
  const TrainResult res = train_surrogate(set, b.train);
  CsvTable curve({"iteration", "loss"});
  for (std::size_t i = 0; i < res.loss_curve.size(); ++i) {
    const double row[] = {double(i), res.loss_curve[i]};
    curve.add_row(row);
  }
  curve.save(ctx.out_dir / "loss_curve.csv");
  save_checkpoint(res.net, ctx.out_dir / "surrogate.ckpt");
  ctx.wrote("loss_curve.csv");
  ctx.wrote("surrogate.ckpt");
  ctx.log << "train-surrogate: " << set.windows.size() << " windows, " << res.loss_curve.size()
          << " iterations";
  if (!res.loss_curve.empty()) ctx.log << ", loss " << res.loss_curve.front() << " -> " << res.loss_curve.back();
  ctx.log << "\n";
  return res.net;
}

void cmd_train(Context& ctx) { train(ctx); }

void cmd_stability(Context& ctx) {
  const auto& b = ctx.config.stability;
  const SurrogateNet net = b.checkpoint.empty() ? train(ctx) : load_checkpoint(b.checkpoint);
  const StabilityResult res = stability_experiment(net, b.run);
  write_stability_outputs(res, ctx.out_dir);
  for (const auto& c : res.cases) {
    ctx.wrote("stability_" + c.ic + ".csv");
    ctx.wrote("stability_" + c.ic + "_events.csv");
    for (const auto& r : c.runs) {
      ctx.log << "stability: " << c.ic << " M=" << r.cutoff << " mean L2 error " << r.mean_error;
      if (r.divergence) ctx.log << ", blow-up at t=" << r.divergence->time;
      ctx.log << "\n";
    }
  }
}

void cmd_nl(Context& ctx) {
  const nl::Experiment ex = nl::run_experiment(ctx.config.nl);
  nl::write_outputs(ex, ctx.out_dir);
  const std::string d = std::to_string(ex.config.max_degree);
  for (const auto& c : ex.cases) {
    ctx.log << "nl-demo: x1=" << c.x1 << " mean error markovian " << c.mean_error_markovian << " memory "
            << c.mean_error_memory << (c.extrapolation ? " (outside sampled range)" : "") << "\n";
  }
  for (const auto& e : fs::directory_iterator(ctx.out_dir)) {
    const std::string name = e.path().filename().string();
    const std::string suffix = "_" + d + ".csv";
    if (name.rfind("nl_", 0) == 0 && name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ctx.wrote(name);
    }
  }
}

vb::KernelSet vb_kernels(Context& ctx) {
  const auto set = vb::compute_kernels(ctx.config.vb.run);
  save_kernel_table(set.linear, ctx.out_dir / "vb_kernel_linear.mzk");
  save_kernel_table(set.cubic, ctx.out_dir / "vb_kernel_cubic.mzk");
  ctx.wrote("vb_kernel_linear.mzk");
  ctx.wrote("vb_kernel_cubic.mzk");
  ctx.log << "vb-kernels: J=" << set.linear.n_basis() << " and J=" << set.cubic.n_basis() << ", "
          << set.cubic.n_times << " time levels\n";
  return set;
}

void cmd_vb_kernels(Context& ctx) { vb_kernels(ctx); }

void cmd_vb_rom(Context& ctx) {
  const auto& b = ctx.config.vb;
  vb::KernelSet set;
  if (b.kernels.empty()) {
    set = vb_kernels(ctx);
  } else {
    set.linear = load_kernel_table(fs::path(b.kernels) / "vb_kernel_linear.mzk");
    set.cubic = load_kernel_table(fs::path(b.kernels) / "vb_kernel_cubic.mzk");
  }
  const auto results = vb::rom_experiment(b.run, set);
  vb::write_outputs(results, ctx.out_dir);
  for (const auto& r : results) {
    ctx.wrote("vb_" + r.ic + ".csv");
    ctx.log << "vb-rom: " << r.ic << " mean error markovian " << r.mean_markovian << " linear " << r.mean_linear
            << " cubic " << r.mean_cubic << "\n";
  }
  ctx.wrote("vb_events.csv");
}

void cmd_oracle(Context& ctx) {
  const auto& b = ctx.config.oracle;
  const auto r = linear_oracle::run(b.run);
  linear_oracle::write_outputs(r, ctx.out_dir);
  ctx.wrote("oracle_linear.csv");
  const bool ok = r.kernel_error <= b.kernel_tolerance && r.rom_error <= b.rom_tolerance;
  ctx.log << "oracle-linear: kernel sup error " << r.kernel_error << " (tol " << b.kernel_tolerance
          << "), ROM sup error " << r.rom_error << " (tol " << b.rom_tolerance << "): " << (ok ? "ok" : "FAILED")
          << "\n";
  if (!ok) ctx.status = kNumerical;
}

fs::path resolve_output(const RunConfig& c, const std::string& sub) {
  if (!c.output.empty()) return c.output;
  if (const char* root = std::getenv("MZROM_OUTPUT_ROOT"); root && *root) return fs::path(root) / sub;
  return fs::path("mzrom-out") / sub;
}

void write_manifest(const Context& ctx, const std::string& sub) {
  json m;
  m["tool"] = "mzrom";
  m["version"] = MZROM_VERSION;
  m["subcommand"] = sub;
  m["config"] = to_json(ctx.config);
  std::vector<std::string> outputs = ctx.outputs;
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());
  m["outputs"] = outputs;
  m["status"] = ctx.status;
  write_file_atomic(ctx.out_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"mzrom: Mori-Zwanzig reduced-order models and the Burgers'-ML experiments", "mzrom"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(MZROM_VERSION));

  std::string config_path, out_path;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON config file or a previous run's manifest.json");
  app.add_option("--out", out_path, "Output directory (default: $MZROM_OUTPUT_ROOT/<subcommand>)");
  app.add_option("--workers", workers, "Ensemble worker threads (default: available parallelism)");
  app.add_option("--seed", seed, "Global seed");
  app.add_option("--set", sets, "Override a config value, e.g. --set vb.T=2 (repeatable)");

  // Flat per-subcommand flags map onto config keys.
  std::map<std::string, std::string> flag_values;
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(
        name, [&flag_values, key](const std::string& v) { flag_values[key] = v; }, help);
  };

  struct Sub {
    const char* name;
    const char* help;
    std::function<void(Context&)> fn;
  };
  const Sub subs[] = {
      {"full-solve", "Pseudospectral viscous Burgers' solve", cmd_full_solve},
      {"train-surrogate", "Train the ML diffusion surrogate", cmd_train},
      {"stability", "Low-pass stabilization experiment for the coupled PDE-ML system", cmd_stability},
      {"nl-demo", "Memory-kernel ROM for the 2-D nonlinear showcase system", cmd_nl},
      {"vb-kernels", "Memory kernels for viscous Burgers' on the resolved modes", cmd_vb_kernels},
      {"vb-rom", "Markovian vs memory ROMs for viscous Burgers'", cmd_vb_rom},
      {"oracle-linear", "Kernel extraction self-test on a linear system with known kernels", cmd_oracle},
  };
  std::map<std::string, CLI::App*> handles;
  for (const auto& s : subs) handles[s.name] = app.add_subcommand(s.name, s.help);
  flag(handles["full-solve"], "--ic", "full_solve.initial_condition", "sin, expsin, cos2sin or random");
  flag(handles["full-solve"], "--T", "full_solve.T", "Final time");
  flag(handles["full-solve"], "--grid", "full_solve.grid_size", "Grid size");
  flag(handles["train-surrogate"], "--iterations", "training.iterations", "Optimizer iterations");
  flag(handles["train-surrogate"], "--ics", "training.n_ics", "Number of training initial conditions");
  flag(handles["train-surrogate"], "--windows", "training.windows_per_ic", "Windows per initial condition");
  flag(handles["train-surrogate"], "--mode", "training.mode", "rollout or teacher-forcing");
  flag(handles["stability"], "--checkpoint", "stability.checkpoint", "Trained network checkpoint");
  flag(handles["stability"], "--iterations", "training.iterations", "Optimizer iterations when training inline");
  flag(handles["nl-demo"], "--d", "nl.max_degree", "Basis degree");
  flag(handles["nl-demo"], "--nq", "nl.n_quad", "Quadrature points");
  flag(handles["nl-demo"], "--T", "nl.T", "Final time");
  for (const char* name : {"vb-kernels", "vb-rom"}) {
    flag(handles[name], "--nq", "vb.n_quad", "Quadrature points per resolved variable");
    flag(handles[name], "--T", "vb.T", "Final time");
  }
  flag(handles["vb-rom"], "--kernels", "vb.kernels", "Directory holding vb_kernel_*.mzk");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  std::string sub_name;
  for (const auto& s : subs) {
    if (handles[s.name]->parsed()) sub_name = s.name;
  }
  const Sub* sub = nullptr;
  for (const auto& s : subs) {
    if (sub_name == s.name) sub = &s;
  }

  try {
    json j = to_json(default_config());
    if (!config_path.empty()) merge_strict(j, load_config_file(config_path));
    for (const auto& s : sets) apply_override(j, s);
    for (const auto& [key, value] : flag_values) apply_override(j, key + "=" + value);
    if (workers) j["workers"] = *workers;
    if (seed) j["seed"] = *seed;
    RunConfig cfg = from_json(j);
    cfg.output = out_path.empty() ? resolve_output(cfg, sub_name).string() : out_path;
    cfg.finalize();

    Context ctx{cfg, cfg.output, out, {}, kOk};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
    sub->fn(ctx);
    write_manifest(ctx, sub_name);
    return ctx.status;
  } catch (const InvalidArgument& e) {
    err << "mzrom " << sub_name << ": invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "mzrom " << sub_name << ": " << e.what() << "\n";
    return kValidation;
  } catch (const DivergenceError& e) {
    err << "mzrom " << sub_name << ": divergence: " << e.what() << "\n";
    return kDivergence;
  } catch (const NumericalFailure& e) {
    err << "mzrom " << sub_name << ": numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const TrainingFailure& e) {
    err << "mzrom " << sub_name << ": training failed: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "mzrom " << sub_name << ": error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace mzrom::cli
