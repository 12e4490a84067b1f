#pragma once

#include "pcicorr/correlation.hpp"
#include "pcicorr/features.hpp"
#include "pcicorr/mask.hpp"
#include "pcicorr/synthgen.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pcicorr {

/// Linear map from one modality's raw observations to features.
struct LinearEncoder {
  Eigen::MatrixXd weight;  // feature_dim x raw_dim
  int modality_id = 0;
};

/// Linear softmax classifier on the concatenated (centered) features.
struct TaskHead {
  Eigen::MatrixXd weight;  // classes x (modalities * feature_dim)
};

/// Joint training settings. theta trades the correlation term against the
/// cross-entropy term; mask_update_cadence re-optimizes the masks every
/// that many minibatches.
struct TrainConfig {
  double theta = 0.003;
  double learning_rate = 1e-4;
  int batch_size = 32;
  int epochs = 0;
  int mask_update_cadence = 1;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Per-epoch loss summary (means over the epoch's minibatches).
struct EpochStats {
  double correlation_loss = 0.0;
  double task_loss = 0.0;
  double total_loss = 0.0;
};

/// Training outcome.
struct TrainedModel {
  std::vector<LinearEncoder> encoders;
  TaskHead head;
  MaskSet masks;
  std::vector<EpochStats> history;
};

/// Applies each encoder to its modality and centers the resulting feature
/// batch (features are re-centered per batch of observations).
std::vector<FeatureBatch> encode_centered(
    const std::vector<LinearEncoder>& encoders,
    const std::vector<Eigen::MatrixXd>& observations);

/// Mean softmax cross-entropy of the head on concatenated centered
/// features.
double cross_entropy(const TaskHead& head,
                     const std::vector<FeatureBatch>& batches,
                     const Eigen::VectorXi& labels);

/// Joint objective: theta * correlation_loss(batches, masks) + mean
/// cross-entropy of the task head.
double total_loss(const std::vector<FeatureBatch>& batches,
                  const MaskSet& masks, const TaskHead& head,
                  const Eigen::VectorXi& labels, double theta);

/// Joint objective value and its analytic gradients with respect to the
/// encoder weights and the head, with masks held fixed. The gradient
/// chains through the per-batch centering of the features.
struct LossGradients {
  double total = 0.0;
  double correlation = 0.0;  // correlation_loss component
  double task = 0.0;         // cross-entropy component
  std::vector<Eigen::MatrixXd> encoder_grads;  // one per modality
  Eigen::MatrixXd head_grad;
};
LossGradients total_loss_gradients(
    const std::vector<Eigen::MatrixXd>& observations,
    const std::vector<LinearEncoder>& encoders, const TaskHead& head,
    const MaskSet& masks, const Eigen::VectorXi& labels, double theta);

/// Spectral encoder initialization: each modality's weight rows are the
/// top feature_dim principal directions of its observations, then the
/// modalities are sequentially aligned by orthogonal Procrustes on their
/// cross-covariances so that shared structure lands on matching feature
/// dimensions with matching signs. Purely data-driven and deterministic;
/// the seed is used only if feature_dim exceeds raw_dim and extra rows
/// must be drawn at random.
std::vector<LinearEncoder> init_encoders(
    const std::vector<Eigen::MatrixXd>& observations, int feature_dim,
    std::uint64_t seed);

/// Jointly trains encoders, task head, and masks by plain gradient
/// descent with per-minibatch mask re-optimization. Masks are finally
/// re-optimized on the features of the full dataset so the returned mask
/// set reflects more than the last minibatch. Bit-deterministic for a
/// fixed dataset and configuration.
TrainedModel train(const Dataset& dataset, const TrainConfig& cfg,
                   const PgdConfig& mask_cfg);

/// Classification accuracy of the model on a labeled observation set.
double accuracy(const std::vector<LinearEncoder>& encoders,
                const TaskHead& head,
                const std::vector<Eigen::MatrixXd>& observations,
                const Eigen::VectorXi& labels);

/// Checkpoint layout: encoder_<i>.csv, head.csv, mask_<i>_<j>.csv(.meta),
/// history.csv under the given directory.
void save_model(const TrainedModel& model, const std::string& dir,
                double tolerable_error);
TrainedModel load_model(const std::string& dir, int modalities);

}  // namespace pcicorr
