#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string_view>

namespace pcicorr {

/// Derives a child seed from a master seed and a component name.
/// The split is stable: adding new components never perturbs the
/// streams of existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view component);

/// Deterministic RNG wrapper. Distributions are implemented here rather
/// than taken from <random> so that sampled sequences are identical on
/// every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();

  /// Standard normal via Box-Muller (two uniforms per draw).
  double gaussian();

  /// Matrix of i.i.d. N(0, 1) entries, filled row-major.
  Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols);

  /// Vector of i.i.d. U[0, 1) entries.
  Eigen::VectorXd uniform_vector(Eigen::Index size);

  /// Haar-like random orthonormal matrix (QR of a Gaussian matrix with
  /// the sign convention diag(R) > 0).
  Eigen::MatrixXd orthonormal_matrix(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
};

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace pcicorr
