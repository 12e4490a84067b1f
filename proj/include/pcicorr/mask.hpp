#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pcicorr {

/// Settings for projected gradient steps on mask weights and for the
/// bisection inside the feasible-set projection.
struct PgdConfig {
  double step_size = 2.0;       // gradient step length (alpha)
  double sum_threshold = 1.0;   // mask budget (c), must be > 0
  double tolerable_error = 0.01;  // bisection sum tolerance (e), must be > 0
  double bisect_lo = 0.0;       // lower bisection bound (b1)
  std::optional<double> bisect_hi;  // upper bound (b2); defaults to max(weights)
  int max_iterations = 500;     // PGD iteration cap (0 = no steps)
  double stop_tolerance = 1e-6;  // stop when the max-norm step falls below

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// Default configuration for a given feature dimension: budget c = m / 4
/// and sum tolerance e = c / 100.
PgdConfig default_pgd_config(Eigen::Index dims);

/// Per-dimension mask weights for one unordered modality pair.
struct PciMask {
  Eigen::VectorXd weights;      // in [0,1]^m with sum <= c + e after projection
  double sum_threshold = 1.0;   // budget c the weights were projected against
  std::pair<int, int> pair{0, 1};  // normalized: first < second

  Eigen::Index dims() const { return weights.size(); }
};

/// Normalizes an unordered modality pair to (min, max); throws if i == j.
std::pair<int, int> make_pair_key(int i, int j);

/// Throws std::invalid_argument unless the weights are inside the box
/// [0,1]^m and their sum is at most c + e.
void require_feasible(const PciMask& mask, double tolerable_error);

/// The feasible-set projection cannot bracket a solution: the sums of the
/// truncated weights at both bisection endpoints are carried so a caller
/// can retry with wider bounds.
class BracketError : public std::runtime_error {
 public:
  BracketError(double lower_sum, double upper_sum, const std::string& what)
      : std::runtime_error(what), lower_sum_(lower_sum), upper_sum_(upper_sum) {}
  double lower_sum() const { return lower_sum_; }
  double upper_sum() const { return upper_sum_; }

 private:
  double lower_sum_;
  double upper_sum_;
};

/// Result of projecting raw weights onto the feasible set.
struct Projection {
  Eigen::VectorXd weights;
  double sum = 0.0;    // achieved sum of the projected weights
  double shift = 0.0;  // uniform shift found by bisection (0 if unused)
  int iterations = 0;  // bisection iterations performed
};

/// Clamps every entry to [0, 1]; entries already inside are untouched.
Eigen::VectorXd truncate_weights(const Eigen::VectorXd& weights);

/// Projects raw weights onto {w : 0 <= w_i <= 1, sum w <= c}. If the
/// truncated weights already satisfy the budget they are returned as-is;
/// otherwise a uniform shift r is found by bisection so that the sum of
/// truncate(weights - r) lands within tolerable_error of the budget.
/// Throws BracketError when the configured bounds do not bracket a
/// solution.
Projection project(const Eigen::VectorXd& weights, const PgdConfig& cfg);

/// One projected gradient descent step: project(weights - alpha * grad).
PciMask pgd_step(const PciMask& mask, const Eigen::VectorXd& loss_gradient,
                 const PgdConfig& cfg);

/// Draws i.i.d. U[0,1) weights and projects them; the canonical mask
/// initialization.
PciMask random_mask(Eigen::Index dims, std::pair<int, int> pair,
                    const PgdConfig& cfg, std::uint64_t seed);

/// All pairwise masks of a k-modality model, keyed by normalized pair.
struct MaskSet {
  int modalities = 0;
  std::map<std::pair<int, int>, PciMask> masks;

  const PciMask& at(int i, int j) const;
  PciMask& at(int i, int j);

  /// Checks completeness (one mask per unordered pair), consistent
  /// dimension, and a shared budget across masks.
  void validate() const;
};

/// Writes one row lambda_0,...,lambda_{m-1} (values only, LF ending) plus
/// a key=value metadata sidecar at <path>.meta recording pair, budget,
/// tolerance, and the generator seed (when known).
void save_mask_csv(const PciMask& mask, const std::string& path,
                   double tolerable_error,
                   std::optional<std::uint64_t> seed = std::nullopt);

/// Reads a mask written by save_mask_csv. Deserialized weights are always
/// validated and re-projected against the sidecar budget, so the result is
/// feasible even if the file was edited.
PciMask load_mask_csv(const std::string& path);

/// Renders mask weights as a plain-text PGM (P2) heatmap, height 1, one
/// pixel per dimension, gray = round(255 * (1 - lambda)): darker pixels
/// mark heavier weights. With fixed_width_128 the image is exactly 128
/// wide: the first min(m, 128) weights, padded with white.
void save_mask_pgm(const PciMask& mask, const std::string& path,
                   bool fixed_width_128 = false);

}  // namespace pcicorr
