#pragma once

#include "pcicorr/features.hpp"
#include "pcicorr/mask.hpp"

#include <utility>
#include <vector>

namespace pcicorr {

/// A correlation score between two feature batches.
struct CorrelationValue {
  double value = 0.0;
  std::pair<int, int> pair{0, 1};  // modality ids of the two batches
};

/// Sufficient statistics of a feature-batch pair for every masked
/// correlation quantity: cross(d) is the per-dimension empirical cross
/// moment sum_s f_s[d] g_s[d] / (n - 1) and hadamard is the entrywise
/// product of the two covariance matrices (PSD by the Schur product
/// theorem). In terms of these, the masked correlation of weights w is
/// cross . w - w' hadamard w / 2.
struct PairStats {
  Eigen::VectorXd cross;     // m
  Eigen::MatrixXd hadamard;  // m x m, symmetric PSD
};

/// Computes the pair statistics of two centered batches of equal shape.
PairStats pair_stats(const FeatureBatch& f, const FeatureBatch& g);

/// Masked correlation as a function of raw weights, without any
/// feasibility constraint on the weights. This is the bare objective the
/// mask optimizer ascends; gradient checks and grid searches evaluate it
/// outside the feasible set as well.
double masked_corr_raw(const PairStats& stats, const Eigen::VectorXd& weights);
double masked_corr_raw(const FeatureBatch& f, const FeatureBatch& g,
                       const Eigen::VectorXd& weights);

/// Soft whitening-free correlation score of two centered batches:
/// the mean inner product of paired samples minus half the trace of the
/// covariance product. Zero-mean independent batches score near zero;
/// identical whitened batches score m / 2.
CorrelationValue soft_hgr(const FeatureBatch& f, const FeatureBatch& g);

/// Masked correlation: the soft correlation score with a per-dimension
/// diagonal reweighting by the mask. With all-ones weights it reduces to
/// soft_hgr; with all-zero weights it is exactly zero. The mask must be
/// feasible within the given sum slack (defaults to 1% of its budget).
CorrelationValue masked_corr(const FeatureBatch& f, const FeatureBatch& g,
                             const PciMask& mask,
                             double feasibility_slack = -1.0);

/// Ascent gradient of the masked correlation with respect to the mask
/// weights: cross - hadamard * weights. The gradient of the loss is its
/// negation.
Eigen::VectorXd mask_gradient(const FeatureBatch& f, const FeatureBatch& g,
                              const PciMask& mask);

/// Sum of masked correlations over all ordered modality pairs (i, j),
/// i != j, with the pair's shared mask; equal to twice the sum over
/// unordered pairs, accumulated in a fixed pair order.
double total_masked_corr(const std::vector<FeatureBatch>& batches,
                         const MaskSet& masks);

/// Training objective contribution: the negated total masked correlation.
double correlation_loss(const std::vector<FeatureBatch>& batches,
                        const MaskSet& masks);

/// Outcome of projected gradient ascent on the masked correlation.
struct OptimizeResult {
  PciMask mask;
  std::vector<double> loss_trace;  // negated correlation at each iterate
  int iterations = 0;              // PGD steps taken
  bool converged = false;          // stopped by the step-size criterion
};

/// Maximizes the masked correlation over the feasible mask set by
/// projected gradient ascent from the given feasible mask. Stops when the
/// max-norm displacement of one step falls to cfg.stop_tolerance or after
/// cfg.max_iterations steps (a zero cap returns the input unchanged).
OptimizeResult optimize_mask(const FeatureBatch& f, const FeatureBatch& g,
                             const PciMask& initial, const PgdConfig& cfg);

}  // namespace pcicorr
