#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mzrom/burgers_mz.hpp"
#include "mzrom/linear_oracle.hpp"
#include "mzrom/nl_showcase.hpp"
#include "mzrom/spectral.hpp"
#include "mzrom/surrogate.hpp"

namespace mzrom::cli {

using nlohmann::json;

struct FullSolveBlock {
  std::string initial_condition = "sin";  // sin | expsin | cos2sin | random
  std::size_t band_limit = 24;             // for "random"
  BurgersSolveOptions solver{};
};

struct TrainingBlock {
  TrainingSetConfig data{};
  TrainConfig train{};
};

struct StabilityBlock {
  StabilityConfig run{};
  std::string checkpoint;  // empty: train with the training block first
};

struct VbBlock {
  vb::Config run{};
  std::string kernels;  // directory with vb_kernel_*.mzk; empty: compute
};

struct OracleBlock {
  linear_oracle::Config run{};
  double kernel_tolerance = 1e-4;
  double rom_tolerance = 1e-3;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::string output;
  FullSolveBlock full_solve;
  TrainingBlock training;
  StabilityBlock stability;
  nl::Config nl;
  VbBlock vb;
  OracleBlock oracle;

  /// Pushes seed and workers into the blocks and validates every block.
  void finalize();
};

/// Defaults with CI-scale settings.
RunConfig default_config();

json to_json(const RunConfig& config);
/// Strict: every key must exist in the schema (the serialized defaults).
RunConfig from_json(const json& j);

/// Overlays `overlay` onto `base`; unknown keys throw InvalidArgument.
void merge_strict(json& base, const json& overlay, const std::string& path = "");

/// "a.b.c=value"; the value is parsed as JSON, falling back to a string.
void apply_override(json& j, const std::string& assignment);

/// Loads a config file or a run manifest (uses its "config" member).
json load_config_file(const std::filesystem::path& path);

}  // namespace mzrom::cli
