#pragma once

#include "pcicorr/correlation.hpp"
#include "pcicorr/mask.hpp"
#include "pcicorr/synthgen.hpp"
#include "pcicorr/trainer.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace pcicorr {

/// Central finite-difference gradient of a scalar function; the reference
/// every analytic gradient in the library is checked against.
Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& point, double h = 1e-5);

/// Exact Euclidean projection onto {w : 0 <= w_i <= 1, sum w <= c} by
/// KKT active-set enumeration (3^m patterns); intended for small m as the
/// reference for the bisection-based projection.
Eigen::VectorXd brute_projection(const Eigen::VectorXd& point, double budget);

/// Exhaustive grid maximization of the masked correlation over the
/// feasible mask set with the given step; returns the best weights found.
Eigen::VectorXd grid_search_mask(const PairStats& stats, double budget,
                                 double step);

/// Evaluates the same quantity both ways: scaling each feature dimension
/// of both batches by s and scoring with soft_hgr, versus the masked
/// correlation with weights s^2. The two are equal analytically.
std::pair<double, double> svec_equivalence(const FeatureBatch& f,
                                           const FeatureBatch& g,
                                           const Eigen::VectorXd& s);

/// Maximal correlation of a bivariate Gaussian with correlation rho.
double gaussian_hgr_oracle(double rho);

/// Pearson correlation of two equal-length vectors.
double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Largest eigenvalue of a symmetric PSD matrix by a fixed number of
/// power iterations; used to pick provably contractive PGD step sizes.
double power_lmax(const Eigen::MatrixXd& m, int iterations = 300);

/// Recovery quality of one pair's mask against the planted structure.
struct PairRecovery {
  std::pair<int, int> pair{0, 1};
  double mass_on_planted = 0.0;
  double support_iou = 0.0;
};

/// Macro-averaged recovery over all pairs.
struct RecoveryReport {
  double mass_on_planted = 0.0;
  double support_iou = 0.0;
  std::vector<PairRecovery> pairs;
};

/// Scores how well the learned masks recover the planted shared structure.
/// Encoder rows are mapped back to raw coordinates through the known
/// rotations; a feature dimension counts as planted for a pair when, in
/// both modalities, at least half of its variance (geometric mean across
/// the two) comes from latent blocks shared by the pair. mass_on_planted
/// is the fraction of mask weight on planted dimensions; support_iou is
/// the intersection-over-union between {d : lambda_d >= 0.5 max lambda}
/// and the planted dimensions (empty vs empty scores 1).
RecoveryReport score_recovery(const MaskSet& masks, const GroundTruth& truth,
                              const std::vector<LinearEncoder>& encoders);

}  // namespace pcicorr
