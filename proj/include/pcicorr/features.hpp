#pragma once

#include <Eigen/Dense>

#include <string>

namespace pcicorr {

/// A batch of feature vectors for one modality: one sample per row,
/// one feature dimension per column.
struct FeatureBatch {
  Eigen::MatrixXd data;  // n x m
  int modality_id = 0;

  Eigen::Index samples() const { return data.rows(); }
  Eigen::Index dims() const { return data.cols(); }
};

/// Unbiased empirical covariance of a centered batch.
struct Covariance {
  Eigen::MatrixXd matrix;  // m x m, symmetric PSD
};

/// Largest absolute column mean; zero for an exactly centered batch.
double max_abs_column_mean(const Eigen::MatrixXd& data);

/// Throws std::invalid_argument if the batch has fewer than two samples,
/// zero columns, or non-finite entries.
void validate_batch(const FeatureBatch& batch);

/// Throws std::invalid_argument unless every column mean of the batch is
/// within 1e-10 of zero.
void require_centered(const FeatureBatch& batch);

/// Subtracts the per-column empirical mean from every sample. A second
/// correction pass removes the floating-point residual, so the output
/// satisfies require_centered even for large-magnitude inputs.
FeatureBatch center(const FeatureBatch& batch);

/// Unbiased covariance (divisor n - 1) of a centered batch. The result is
/// exactly symmetric by construction (built from a rank update on one
/// triangle).
Covariance covariance(const FeatureBatch& batch);

/// Writes the batch as CSV: header dim_0,...,dim_{m-1}, one sample per
/// line, LF line endings, round-trip-exact number formatting.
void save_features_csv(const FeatureBatch& batch, const std::string& path);

/// Reads a CSV produced by save_features_csv (or any CSV with the same
/// header convention).
FeatureBatch load_features_csv(const std::string& path, int modality_id = 0);

}  // namespace pcicorr
