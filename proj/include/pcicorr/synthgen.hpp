#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace pcicorr {

/// One latent block shared by a subset of modalities.
struct SubsetSpec {
  std::vector<int> members;  // modality ids, sorted, unique, size >= 2
  int latent_dim = 1;        // coordinates in the block
  double signal = 1.0;       // scale the block enters raw coordinates with
};

/// Recipe for a synthetic multi-modal dataset with planted shared
/// structure: each subset's latent block is embedded (scaled by its
/// signal) into the raw coordinates of its member modalities, isotropic
/// private noise is added everywhere, and each modality is scrambled by a
/// private random rotation.
struct SynthSpec {
  int modalities = 4;      // k
  int raw_dim = 16;        // observed coordinates per modality
  int feature_dim = 16;    // encoder output dimension the dataset targets
  long samples = 4096;     // generated sample count
  std::vector<SubsetSpec> subsets;
  double private_noise = 0.25;  // noise scale on every raw coordinate
  int classes = 4;
  std::uint64_t seed = 7;

  /// Throws std::invalid_argument on an inconsistent recipe (fewer than
  /// two modalities, bad members, latent blocks overflowing raw_dim, ...).
  void validate() const;

  /// Sum of all latent block dimensions.
  int total_latent_dim() const;

  /// Start of each subset's block in the global latent coordinate order
  /// (subsets in listed order).
  std::vector<int> subset_offsets() const;

  /// One placement of a subset's block inside a modality's raw coordinates.
  struct Run {
    int subset = 0;  // index into subsets
    int start = 0;   // first raw coordinate of the block in this modality
  };

  /// Per-modality block placements: for modality i, the subsets containing
  /// i in listed order, packed from raw coordinate 0.
  std::vector<std::vector<Run>> modality_runs() const;

  /// Global latent coordinates of every block shared by both i and j; the
  /// ground-truth dimensions a pair's mask should recover (under the
  /// canonical encoder convention these equal feature dimensions).
  std::vector<int> planted_latent_dims(int i, int j) const;
};

/// Everything needed to score recovery: the generating recipe and each
/// modality's private rotation.
struct GroundTruth {
  SynthSpec spec;
  std::vector<Eigen::MatrixXd> rotations;  // k orthonormal raw_dim x raw_dim
};

/// A generated dataset: per-modality observations (samples x raw_dim),
/// class labels, and the ground truth.
struct Dataset {
  std::vector<Eigen::MatrixXd> observations;
  Eigen::VectorXi labels;
  GroundTruth truth;
};

/// Deterministically generates a dataset from the recipe. Identical specs
/// produce bit-identical datasets; every random stream is derived from
/// spec.seed and a component name.
Dataset generate(const SynthSpec& spec);

/// Parses/serializes the compact subset list syntax
/// "0,1:2:0.8; 2,3:2:0.8" (members : latent_dim : signal).
std::vector<SubsetSpec> parse_subsets(const std::string& text);
std::string format_subsets(const std::vector<SubsetSpec>& subsets);

/// Ground truth round-trip as a key = value text file with one line per
/// rotation (row-major).
void save_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

/// Dataset directory layout: modality_<i>.csv, labels.csv,
/// ground_truth.txt.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

}  // namespace pcicorr
