#include "pcicorr/trainer.hpp"

#include "pcicorr/csvio.hpp"
#include "pcicorr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcicorr {

namespace {

void require_model_inputs(const std::vector<Eigen::MatrixXd>& observations,
                          const std::vector<LinearEncoder>& encoders) {
  if (observations.size() != encoders.size())
    throw std::invalid_argument("one encoder per modality is required");
  if (observations.empty())
    throw std::invalid_argument("at least one modality is required");
  for (std::size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].cols() != encoders[i].weight.cols())
      throw std::invalid_argument("encoder input dimension mismatch");
    if (encoders[i].weight.rows() != encoders.front().weight.rows())
      throw std::invalid_argument("encoders disagree on feature dimension");
    if (observations[i].rows() != observations.front().rows())
      throw std::invalid_argument("modalities disagree on sample count");
  }
}

Eigen::MatrixXd concat_features(const std::vector<FeatureBatch>& batches) {
  const Eigen::Index n = batches.front().samples();
  const Eigen::Index m = batches.front().dims();
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(batches.size()) * m);
  for (std::size_t i = 0; i < batches.size(); ++i)
    z.middleCols(static_cast<Eigen::Index>(i) * m, m) = batches[i].data;
  return z;
}

/// Softmax probabilities with the standard max-shift stabilization.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    p.row(r).array() -= p.row(r).maxCoeff();
    p.row(r) = p.row(r).array().exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

double mean_cross_entropy(const Eigen::MatrixXd& logits,
                          const Eigen::VectorXi& labels) {
  double loss = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double mx = logits.row(r).maxCoeff();
    const double lse =
        mx + std::log((logits.row(r).array() - mx).exp().sum());
    loss += lse - logits(r, labels(r));
  }
  return loss / static_cast<double>(logits.rows());
}

void require_labels(const Eigen::VectorXi& labels, Eigen::Index n,
                    Eigen::Index classes) {
  if (labels.size() != n)
    throw std::invalid_argument("label count does not match sample count");
  if (labels.size() > 0 &&
      (labels.minCoeff() < 0 || labels.maxCoeff() >= classes))
    throw std::invalid_argument("label outside the head's class range");
}

/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<int> shuffled_indices(long n, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (long i = n - 1; i > 0; --i) {
    const long j = static_cast<long>(rng.uniform() * (i + 1));
    std::swap(idx[i], idx[std::min(j, i)]);
  }
  return idx;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(theta >= 0.0) || !std::isfinite(theta))
    throw std::invalid_argument("theta must be non-negative and finite");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning_rate must be positive");
  if (batch_size < 2)
    throw std::invalid_argument("batch_size must be at least 2 (per-batch "
                                "centering and covariance need it)");
  if (epochs < 0) throw std::invalid_argument("epochs must be non-negative");
  if (mask_update_cadence < 1)
    throw std::invalid_argument("mask_update_cadence must be at least 1");
}

std::vector<FeatureBatch> encode_centered(
    const std::vector<LinearEncoder>& encoders,
    const std::vector<Eigen::MatrixXd>& observations) {
  require_model_inputs(observations, encoders);
  std::vector<FeatureBatch> batches(encoders.size());
  for (std::size_t i = 0; i < encoders.size(); ++i) {
    FeatureBatch raw;
    raw.data.noalias() = observations[i] * encoders[i].weight.transpose();
    raw.modality_id = encoders[i].modality_id;
    batches[i] = center(raw);
  }
  return batches;
}

double cross_entropy(const TaskHead& head,
                     const std::vector<FeatureBatch>& batches,
                     const Eigen::VectorXi& labels) {
  const Eigen::MatrixXd z = concat_features(batches);
  if (z.cols() != head.weight.cols())
    throw std::invalid_argument("head input dimension mismatch");
  require_labels(labels, z.rows(), head.weight.rows());
  return mean_cross_entropy(z * head.weight.transpose(), labels);
}

double total_loss(const std::vector<FeatureBatch>& batches,
                  const MaskSet& masks, const TaskHead& head,
                  const Eigen::VectorXi& labels, double theta) {
  return theta * correlation_loss(batches, masks) +
         cross_entropy(head, batches, labels);
}

LossGradients total_loss_gradients(
    const std::vector<Eigen::MatrixXd>& observations,
    const std::vector<LinearEncoder>& encoders, const TaskHead& head,
    const MaskSet& masks, const Eigen::VectorXi& labels, double theta) {
  const auto batches = encode_centered(encoders, observations);
  const int k = static_cast<int>(batches.size());
  const Eigen::Index n = batches.front().samples();
  const Eigen::Index m = batches.front().dims();
  const double scale = 1.0 / static_cast<double>(n - 1);

  LossGradients out;
  out.correlation = correlation_loss(batches, masks);

  // Gradient of the correlation loss with respect to each centered
  // feature matrix. Each unordered pair contributes to both members; the
  // ordered-pair definition doubles the unordered sum, hence the factor
  // -2 theta on the ascent directions.
  std::vector<Eigen::MatrixXd> feature_grads(
      k, Eigen::MatrixXd::Zero(n, m));
  std::vector<Eigen::MatrixXd> covariances(k);
  for (int i = 0; i < k; ++i) covariances[i] = covariance(batches[i]).matrix;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const Eigen::VectorXd& w = masks.at(i, j).weights;
      // d corr / d F_i = scale * (G Lambda - F Lambda Sigma_g Lambda)
      const Eigen::MatrixXd lam_sj_lam =
          w.asDiagonal() * covariances[j] * w.asDiagonal();
      const Eigen::MatrixXd lam_si_lam =
          w.asDiagonal() * covariances[i] * w.asDiagonal();
      feature_grads[i].noalias() -=
          2.0 * theta * scale *
          (batches[j].data * w.asDiagonal() - batches[i].data * lam_sj_lam);
      feature_grads[j].noalias() -=
          2.0 * theta * scale *
          (batches[i].data * w.asDiagonal() - batches[j].data * lam_si_lam);
    }
  }

  // Cross-entropy on the concatenated features.
  const Eigen::MatrixXd z = concat_features(batches);
  if (z.cols() != head.weight.cols())
    throw std::invalid_argument("head input dimension mismatch");
  require_labels(labels, n, head.weight.rows());
  const Eigen::MatrixXd logits = z * head.weight.transpose();
  out.task = mean_cross_entropy(logits, labels);
  Eigen::MatrixXd g = softmax_rows(logits);
  for (Eigen::Index r = 0; r < n; ++r) g(r, labels(r)) -= 1.0;
  g /= static_cast<double>(n);
  out.head_grad.noalias() = g.transpose() * z;
  const Eigen::MatrixXd grad_z = g * head.weight;
  for (int i = 0; i < k; ++i)
    feature_grads[i] += grad_z.middleCols(static_cast<Eigen::Index>(i) * m, m);

  // Chain through the per-batch centering (the centering matrix is
  // symmetric idempotent: subtract the column means of the gradient) and
  // into the encoder weights.
  out.encoder_grads.resize(k);
  for (int i = 0; i < k; ++i) {
    feature_grads[i].rowwise() -= feature_grads[i].colwise().mean().eval();
    out.encoder_grads[i].noalias() =
        feature_grads[i].transpose() * observations[i];
  }
  out.total = theta * out.correlation + out.task;
  return out;
}

std::vector<LinearEncoder> init_encoders(
    const std::vector<Eigen::MatrixXd>& observations, int feature_dim,
    std::uint64_t seed) {
  if (feature_dim < 1)
    throw std::invalid_argument("feature_dim must be positive");
  const int k = static_cast<int>(observations.size());
  std::vector<LinearEncoder> encoders(k);

  // Per-modality principal directions, eigenvalue-descending.
  for (int i = 0; i < k; ++i) {
    FeatureBatch obs;
    obs.data = observations[i];
    obs.modality_id = i;
    const Eigen::MatrixXd cov = covariance(center(obs)).matrix;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::Index d = cov.rows();
    const Eigen::Index top = std::min<Eigen::Index>(feature_dim, d);
    Eigen::MatrixXd w(feature_dim, d);
    for (Eigen::Index r = 0; r < top; ++r)
      w.row(r) = eig.eigenvectors().col(d - 1 - r).transpose();
    if (top < feature_dim) {
      // More features than raw coordinates: fill the surplus with small
      // random rows so every feature dimension stays active.
      Rng rng(derive_seed(seed, "encoder_fill:" + std::to_string(i)));
      w.bottomRows(feature_dim - top) =
          0.01 * rng.gaussian_matrix(feature_dim - top, d);
    }
    encoders[i].weight = std::move(w);
    encoders[i].modality_id = i;
  }

  // Principal directions are defined only up to sign (and rotation inside
  // eigenvalue ties), so shared structure does not land consistently
  // across modalities. Align each modality to its predecessors with an
  // orthogonal Procrustes solve on the summed feature cross-covariances.
  auto features = encode_centered(encoders, observations);
  const double scale =
      1.0 / static_cast<double>(features.front().samples() - 1);
  for (int i = 1; i < k; ++i) {
    Eigen::MatrixXd cross =
        Eigen::MatrixXd::Zero(feature_dim, feature_dim);
    for (int j = 0; j < i; ++j)
      cross.noalias() +=
          scale * features[j].data.transpose() * features[i].data;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(
        cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd t = svd.matrixU() * svd.matrixV().transpose();
    encoders[i].weight = t * encoders[i].weight;
    FeatureBatch raw;
    raw.data.noalias() = observations[i] * encoders[i].weight.transpose();
    raw.modality_id = i;
    features[i] = center(raw);
  }
  return encoders;
}

TrainedModel train(const Dataset& dataset, const TrainConfig& cfg,
                   const PgdConfig& mask_cfg) {
  cfg.validate();
  mask_cfg.validate();
  const int k = dataset.truth.spec.modalities;
  const int m = dataset.truth.spec.feature_dim;
  const long n = dataset.labels.size();
  if (static_cast<int>(dataset.observations.size()) != k)
    throw std::invalid_argument("dataset modality count mismatch");
  if (cfg.batch_size > n)
    throw std::invalid_argument("batch_size exceeds the dataset size");

  TrainedModel model;
  model.encoders =
      init_encoders(dataset.observations, m, derive_seed(cfg.seed, "encoder"));
  model.head.weight =
      Eigen::MatrixXd::Zero(dataset.truth.spec.classes,
                            static_cast<Eigen::Index>(k) * m);
  model.masks.modalities = k;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const auto key = make_pair_key(i, j);
      const std::uint64_t seed = derive_seed(
          cfg.seed, "mask_init:" + std::to_string(i) + ":" + std::to_string(j));
      model.masks.masks.emplace(key, random_mask(m, key, mask_cfg, seed));
    }
  }
  if (cfg.epochs == 0) return model;

  Rng shuffle_rng(derive_seed(cfg.seed, "shuffle"));
  const long batches_per_epoch = n / cfg.batch_size;
  if (batches_per_epoch == 0)
    throw std::invalid_argument("dataset smaller than one batch");
  long tick = 0;
  std::vector<Eigen::MatrixXd> batch_obs(k);
  Eigen::VectorXi batch_labels(cfg.batch_size);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = shuffled_indices(n, shuffle_rng);
    EpochStats stats;
    for (long b = 0; b < batches_per_epoch; ++b) {
      const auto first = order.begin() + b * cfg.batch_size;
      const std::vector<int> rows(first, first + cfg.batch_size);
      for (int i = 0; i < k; ++i)
        batch_obs[i] = dataset.observations[i](rows, Eigen::all);
      for (int r = 0; r < cfg.batch_size; ++r)
        batch_labels(r) = dataset.labels(rows[r]);

      if (tick % cfg.mask_update_cadence == 0) {
        const auto features = encode_centered(model.encoders, batch_obs);
        for (int i = 0; i < k; ++i)
          for (int j = i + 1; j < k; ++j)
            model.masks.at(i, j) =
                optimize_mask(features[i], features[j], model.masks.at(i, j),
                              mask_cfg)
                    .mask;
      }
      ++tick;

      const LossGradients grads =
          total_loss_gradients(batch_obs, model.encoders, model.head,
                               model.masks, batch_labels, cfg.theta);
      for (int i = 0; i < k; ++i)
        model.encoders[i].weight -= cfg.learning_rate * grads.encoder_grads[i];
      model.head.weight -= cfg.learning_rate * grads.head_grad;

      stats.correlation_loss += grads.correlation;
      stats.task_loss += grads.task;
      stats.total_loss += grads.total;
    }
    const double inv = 1.0 / static_cast<double>(batches_per_epoch);
    stats.correlation_loss *= inv;
    stats.task_loss *= inv;
    stats.total_loss *= inv;
    model.history.push_back(stats);
  }

  // Consolidate the masks on the full dataset: a 32-sample minibatch is a
  // noisy estimator of the pair statistics, so the returned masks are
  // re-optimized (warm-started) on all samples.
  const auto features = encode_centered(model.encoders, dataset.observations);
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      model.masks.at(i, j) =
          optimize_mask(features[i], features[j], model.masks.at(i, j),
                        mask_cfg)
              .mask;
  return model;
}

double accuracy(const std::vector<LinearEncoder>& encoders,
                const TaskHead& head,
                const std::vector<Eigen::MatrixXd>& observations,
                const Eigen::VectorXi& labels) {
  const auto batches = encode_centered(encoders, observations);
  const Eigen::MatrixXd logits =
      concat_features(batches) * head.weight.transpose();
  require_labels(labels, logits.rows(), head.weight.rows());
  long hits = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    hits += (static_cast<int>(best) == labels(r));
  }
  return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

void save_model(const TrainedModel& model, const std::string& dir,
                double tolerable_error) {
  for (std::size_t i = 0; i < model.encoders.size(); ++i)
    save_matrix_csv(model.encoders[i].weight,
                    dir + "/encoder_" + std::to_string(i) + ".csv");
  save_matrix_csv(model.head.weight, dir + "/head.csv");
  for (const auto& [key, mask] : model.masks.masks)
    save_mask_csv(mask,
                  dir + "/mask_" + std::to_string(key.first) + "_" +
                      std::to_string(key.second) + ".csv",
                  tolerable_error);
  std::string history = "correlation_loss,task_loss,total_loss\n";
  for (const EpochStats& e : model.history) {
    history += format_double(e.correlation_loss);
    history += ',';
    history += format_double(e.task_loss);
    history += ',';
    history += format_double(e.total_loss);
    history += '\n';
  }
  write_file(dir + "/history.csv", history);
}

TrainedModel load_model(const std::string& dir, int modalities) {
  TrainedModel model;
  model.encoders.resize(modalities);
  for (int i = 0; i < modalities; ++i) {
    model.encoders[i].weight =
        load_matrix_csv(dir + "/encoder_" + std::to_string(i) + ".csv");
    model.encoders[i].modality_id = i;
  }
  model.head.weight = load_matrix_csv(dir + "/head.csv");
  model.masks.modalities = modalities;
  for (int i = 0; i < modalities; ++i)
    for (int j = i + 1; j < modalities; ++j)
      model.masks.masks.emplace(
          std::make_pair(i, j),
          load_mask_csv(dir + "/mask_" + std::to_string(i) + "_" +
                        std::to_string(j) + ".csv"));
  const Eigen::MatrixXd history = load_matrix_csv(dir + "/history.csv");
  for (Eigen::Index e = 0; e < history.rows(); ++e)
    model.history.push_back(
        EpochStats{history(e, 0), history(e, 1), history(e, 2)});
  return model;
}

}  // namespace pcicorr
