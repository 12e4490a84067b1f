#pragma once

#include "pcicorr/mask.hpp"
#include "pcicorr/synthgen.hpp"
#include "pcicorr/trainer.hpp"

#include <map>
#include <optional>
#include <string>

namespace pcicorr {

/// The tuned default synthetic recipe: four modalities, two pair blocks
/// plus one global block, and enough private noise that junk dimensions
/// must be suppressed by the mask budget.
SynthSpec default_synth_spec();

/// Full run configuration, assembled from built-in defaults, an optional
/// INI-style config file, and command-line overrides (in that order).
struct RunConfig {
  SynthSpec synth;
  TrainConfig train;

  // [pgd] — budget and tolerance default from the feature dimension.
  double alpha = 2.0;
  std::optional<double> c;
  std::optional<double> e;
  double b1 = 0.0;
  std::optional<double> b2;
  int max_iterations = 500;
  double stop_tolerance = 1e-6;

  // [io]
  std::string out_dir = "out";
  std::string dataset_dir = "data";

  /// Resolves the PGD settings for a given feature dimension:
  /// c defaults to dims / 4 and e to c / 100.
  PgdConfig pgd(int dims) const;

  /// Key = value echo of every effective setting, for run reports.
  std::string echo() const;
};

/// Parses sections [synth], [pgd], [train], [io] from an INI-style file
/// ('#' starts a comment; unknown keys are rejected). Missing keys keep
/// their defaults.
RunConfig load_run_config(const std::string& path);

/// Applies the parsed file on top of defaults without touching disk.
RunConfig parse_run_config(const std::string& text, const std::string& origin);

}  // namespace pcicorr
