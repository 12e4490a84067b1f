#include "pcicorr/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pcicorr {

namespace {

void require_compatible(const FeatureBatch& f, const FeatureBatch& g) {
  validate_batch(f);
  validate_batch(g);
  if (f.samples() != g.samples())
    throw std::invalid_argument("paired batches must have the same sample count");
  if (f.dims() != g.dims())
    throw std::invalid_argument("paired batches must have the same dimension");
  require_centered(f);
  require_centered(g);
}

std::pair<int, int> batch_pair(const FeatureBatch& f, const FeatureBatch& g) {
  return std::minmax(f.modality_id, g.modality_id);
}

}  // namespace

PairStats pair_stats(const FeatureBatch& f, const FeatureBatch& g) {
  require_compatible(f, g);
  const double scale = 1.0 / static_cast<double>(f.samples() - 1);
  PairStats stats;
  stats.cross =
      ((f.data.array() * g.data.array()).colwise().sum() * scale)
          .matrix()
          .transpose();
  stats.hadamard =
      covariance(f).matrix.cwiseProduct(covariance(g).matrix);
  return stats;
}

double masked_corr_raw(const PairStats& stats, const Eigen::VectorXd& weights) {
  if (weights.size() != stats.cross.size())
    throw std::invalid_argument("weight dimension does not match the batches");
  return stats.cross.dot(weights) -
         0.5 * weights.dot(stats.hadamard * weights);
}

double masked_corr_raw(const FeatureBatch& f, const FeatureBatch& g,
                       const Eigen::VectorXd& weights) {
  return masked_corr_raw(pair_stats(f, g), weights);
}

CorrelationValue soft_hgr(const FeatureBatch& f, const FeatureBatch& g) {
  require_compatible(f, g);
  const double scale = 1.0 / static_cast<double>(f.samples() - 1);
  const double cross = (f.data.array() * g.data.array()).sum() * scale;
  const double trace =
      covariance(f).matrix.cwiseProduct(covariance(g).matrix).sum();
  return CorrelationValue{cross - 0.5 * trace, batch_pair(f, g)};
}

CorrelationValue masked_corr(const FeatureBatch& f, const FeatureBatch& g,
                             const PciMask& mask, double feasibility_slack) {
  if (mask.dims() != f.dims())
    throw std::invalid_argument("mask dimension does not match the batches");
  const double slack =
      feasibility_slack >= 0.0 ? feasibility_slack : 0.01 * mask.sum_threshold;
  require_feasible(mask, slack);
  return CorrelationValue{masked_corr_raw(f, g, mask.weights),
                          batch_pair(f, g)};
}

Eigen::VectorXd mask_gradient(const FeatureBatch& f, const FeatureBatch& g,
                              const PciMask& mask) {
  if (mask.dims() != f.dims())
    throw std::invalid_argument("mask dimension does not match the batches");
  const PairStats stats = pair_stats(f, g);
  return stats.cross - stats.hadamard * mask.weights;
}

double total_masked_corr(const std::vector<FeatureBatch>& batches,
                         const MaskSet& masks) {
  const int k = static_cast<int>(batches.size());
  if (k < 2)
    throw std::invalid_argument("total masked correlation needs two modalities");
  if (masks.modalities != k)
    throw std::invalid_argument("mask set modality count does not match batches");
  masks.validate();
  for (const auto& b : batches) {
    if (b.dims() != batches.front().dims() ||
        b.samples() != batches.front().samples())
      throw std::invalid_argument("batches disagree on shape");
  }
  // Fixed pair order keeps the floating-point sum reproducible; each
  // unordered pair appears twice in the ordered-pair definition.
  double sum = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      sum += 2.0 * masked_corr(batches[i], batches[j], masks.at(i, j)).value;
  return sum;
}

double correlation_loss(const std::vector<FeatureBatch>& batches,
                        const MaskSet& masks) {
  return -total_masked_corr(batches, masks);
}

OptimizeResult optimize_mask(const FeatureBatch& f, const FeatureBatch& g,
                             const PciMask& initial, const PgdConfig& cfg) {
  cfg.validate();
  if (initial.dims() != f.dims())
    throw std::invalid_argument("mask dimension does not match the batches");

  OptimizeResult result;
  result.mask = initial;
  result.mask.sum_threshold = cfg.sum_threshold;
  require_feasible(result.mask, cfg.tolerable_error);

  const PairStats stats = pair_stats(f, g);
  result.loss_trace.push_back(-masked_corr_raw(stats, result.mask.weights));

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const Eigen::VectorXd ascent =
        stats.cross - stats.hadamard * result.mask.weights;
    const Eigen::VectorXd next =
        project(result.mask.weights + cfg.step_size * ascent, cfg).weights;
    const double displacement =
        (next - result.mask.weights).cwiseAbs().maxCoeff();
    result.mask.weights = next;
    result.loss_trace.push_back(-masked_corr_raw(stats, next));
    ++result.iterations;
    if (displacement <= cfg.stop_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace pcicorr
