#include "pcicorr/features.hpp"

#include "pcicorr/csvio.hpp"

#include <sstream>
#include <stdexcept>

namespace pcicorr {

double max_abs_column_mean(const Eigen::MatrixXd& data) {
  if (data.rows() == 0) return 0.0;
  return data.colwise().mean().cwiseAbs().maxCoeff();
}

void validate_batch(const FeatureBatch& batch) {
  if (batch.samples() < 2)
    throw std::invalid_argument("feature batch needs at least two samples");
  if (batch.dims() < 1)
    throw std::invalid_argument("feature batch needs at least one dimension");
  if (!batch.data.allFinite())
    throw std::invalid_argument("feature batch has non-finite entries");
}

void require_centered(const FeatureBatch& batch) {
  const double worst = max_abs_column_mean(batch.data);
  if (worst > 1e-10) {
    std::ostringstream msg;
    msg << "feature batch is not centered (max |column mean| = " << worst
        << ")";
    throw std::invalid_argument(msg.str());
  }
}

FeatureBatch center(const FeatureBatch& batch) {
  validate_batch(batch);
  FeatureBatch out = batch;
  out.data.rowwise() -= batch.data.colwise().mean();
  // Second pass removes the floating-point residual of the first.
  out.data.rowwise() -= out.data.colwise().mean();
  return out;
}

Covariance covariance(const FeatureBatch& batch) {
  validate_batch(batch);
  require_centered(batch);
  const Eigen::Index m = batch.dims();
  const double scale = 1.0 / static_cast<double>(batch.samples() - 1);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m, m);
  // Rank update on the lower triangle, then mirror: the result is exactly
  // symmetric rather than symmetric up to rounding.
  cov.selfadjointView<Eigen::Lower>().rankUpdate(batch.data.transpose(),
                                                 scale);
  cov = cov.selfadjointView<Eigen::Lower>();
  return Covariance{std::move(cov)};
}

void save_features_csv(const FeatureBatch& batch, const std::string& path) {
  save_matrix_csv(batch.data, path, "dim");
}

FeatureBatch load_features_csv(const std::string& path, int modality_id) {
  FeatureBatch batch;
  batch.data = load_matrix_csv(path);
  batch.modality_id = modality_id;
  return batch;
}

}  // namespace pcicorr
