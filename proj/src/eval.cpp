#include "pcicorr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace pcicorr {

Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& point, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw std::invalid_argument("finite-difference step must be positive");
  if (!point.allFinite())
    throw std::invalid_argument("finite-difference point must be finite");
  Eigen::VectorXd grad(point.size());
  Eigen::VectorXd probe = point;
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    probe(i) = point(i) + h;
    const double up = objective(probe);
    probe(i) = point(i) - h;
    const double down = objective(probe);
    probe(i) = point(i);
    grad(i) = (up - down) / (2.0 * h);
  }
  return grad;
}

Eigen::VectorXd brute_projection(const Eigen::VectorXd& point, double budget) {
  const Eigen::Index m = point.size();
  if (m < 1 || m > 12)
    throw std::invalid_argument("brute projection supports 1..12 dimensions");
  if (!(budget > 0.0))
    throw std::invalid_argument("budget must be positive");

  // Within the budget the projection is plain clamping.
  Eigen::VectorXd clamped = point.cwiseMax(0.0).cwiseMin(1.0);
  if (clamped.sum() <= budget) return clamped;

  // Otherwise the sum constraint is active. Enumerate every active-set
  // pattern (each coordinate at 0, free, or at 1), solve the stationarity
  // condition for the shared multiplier, and keep the consistent candidate
  // closest to the point.
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> pattern(m, 0);
  const double eps = 1e-12;
  while (true) {
    double fixed = 0.0;
    double free_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (pattern[i] == 2) fixed += 1.0;
      if (pattern[i] == 1) {
        free_sum += point(i);
        ++free_count;
      }
    }
    bool ok = true;
    double mu = 0.0;
    if (free_count > 0) {
      mu = (free_sum + fixed - budget) / free_count;
    } else {
      ok = std::abs(fixed - budget) <= eps;
    }
    if (ok && mu >= -eps) {
      Eigen::VectorXd cand(m);
      for (Eigen::Index i = 0; i < m && ok; ++i) {
        switch (pattern[i]) {
          case 0:
            cand(i) = 0.0;
            ok = point(i) - mu <= eps;
            break;
          case 1:
            cand(i) = point(i) - mu;
            ok = cand(i) >= -eps && cand(i) <= 1.0 + eps;
            cand(i) = std::clamp(cand(i), 0.0, 1.0);
            break;
          default:
            cand(i) = 1.0;
            ok = point(i) - mu >= 1.0 - eps;
        }
      }
      if (ok) {
        const double dist = (cand - point).squaredNorm();
        if (dist < best_dist) {
          best_dist = dist;
          best = cand;
        }
      }
    }
    // Next ternary pattern.
    Eigen::Index i = 0;
    while (i < m && pattern[i] == 2) pattern[i++] = 0;
    if (i == m) break;
    ++pattern[i];
  }
  if (best.size() == 0)
    throw std::runtime_error("brute projection found no consistent pattern");
  return best;
}

namespace {

void grid_search_rec(const PairStats& stats, double step, Eigen::Index dim,
                     double remaining, Eigen::VectorXd& current,
                     double& best_value, Eigen::VectorXd& best) {
  if (dim == current.size()) {
    const double value = masked_corr_raw(stats, current);
    if (value > best_value) {
      best_value = value;
      best = current;
    }
    return;
  }
  const int steps =
      static_cast<int>(std::floor(std::min(1.0, remaining) / step + 1e-9));
  for (int s = 0; s <= steps; ++s) {
    current(dim) = s * step;
    grid_search_rec(stats, step, dim + 1, remaining - current(dim), current,
                    best_value, best);
  }
  current(dim) = 0.0;
}

}  // namespace

Eigen::VectorXd grid_search_mask(const PairStats& stats, double budget,
                                 double step) {
  if (!(step > 0.0) || !(budget > 0.0))
    throw std::invalid_argument("grid search needs positive step and budget");
  Eigen::VectorXd current = Eigen::VectorXd::Zero(stats.cross.size());
  Eigen::VectorXd best = current;
  double best_value = masked_corr_raw(stats, best);
  grid_search_rec(stats, step, 0, budget, current, best_value, best);
  return best;
}

std::pair<double, double> svec_equivalence(const FeatureBatch& f,
                                           const FeatureBatch& g,
                                           const Eigen::VectorXd& s) {
  if (s.size() != f.dims())
    throw std::invalid_argument("scaling vector dimension mismatch");
  if (!s.allFinite())
    throw std::invalid_argument("scaling vector must be finite");
  FeatureBatch fs = f;
  FeatureBatch gs = g;
  fs.data = f.data * s.asDiagonal();
  gs.data = g.data * s.asDiagonal();
  const double scaled = soft_hgr(fs, gs).value;
  const double masked = masked_corr_raw(f, g, s.array().square().matrix());
  return {scaled, masked};
}

double gaussian_hgr_oracle(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0))
    throw std::invalid_argument("correlation must lie in [-1, 1]");
  return std::abs(rho);
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson needs two equal-length vectors");
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  if (denom == 0.0)
    throw std::invalid_argument("pearson undefined for a constant vector");
  return xc.dot(yc) / denom;
}

double power_lmax(const Eigen::MatrixXd& m, int iterations) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw std::invalid_argument("power iteration needs a square matrix");
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd next = m * v;
    const double norm = next.norm();
    if (norm == 0.0) return 0.0;
    v = next / norm;
  }
  return v.dot(m * v);
}

RecoveryReport score_recovery(const MaskSet& masks, const GroundTruth& truth,
                              const std::vector<LinearEncoder>& encoders) {
  masks.validate();
  const SynthSpec& spec = truth.spec;
  if (masks.modalities != spec.modalities)
    throw std::invalid_argument("mask set does not match the ground truth");
  if (static_cast<int>(encoders.size()) != spec.modalities)
    throw std::invalid_argument("one encoder per modality is required");
  if (static_cast<int>(truth.rotations.size()) != spec.modalities)
    throw std::invalid_argument("ground truth is missing rotations");
  const auto runs = spec.modality_runs();
  const double noise_var = spec.private_noise * spec.private_noise;

  // shares[i](d, s): fraction of feature dimension d's variance in
  // modality i that is explained by latent block s.
  std::vector<Eigen::MatrixXd> shares(spec.modalities);
  for (int i = 0; i < spec.modalities; ++i) {
    const Eigen::MatrixXd& w = encoders[i].weight;
    if (w.cols() != spec.raw_dim || w.rows() != masks.masks.begin()->second.dims())
      throw std::invalid_argument("encoder shape does not match the dataset");
    // Loadings on the un-rotated raw coordinates.
    const Eigen::MatrixXd v = w * truth.rotations[i];
    const Eigen::Index m = v.rows();
    shares[i] = Eigen::MatrixXd::Zero(m, spec.subsets.size());
    for (Eigen::Index d = 0; d < m; ++d) {
      double total = noise_var * v.row(d).squaredNorm();
      Eigen::VectorXd block_energy =
          Eigen::VectorXd::Zero(spec.subsets.size());
      for (const auto& run : runs[i]) {
        const auto& subset = spec.subsets[run.subset];
        block_energy(run.subset) =
            subset.signal * subset.signal *
            v.row(d).segment(run.start, subset.latent_dim).squaredNorm();
        total += block_energy(run.subset);
      }
      if (total > 0.0) shares[i].row(d) = block_energy.transpose() / total;
    }
  }

  RecoveryReport report;
  for (const auto& [key, mask] : masks.masks) {
    const auto [i, j] = key;
    const Eigen::Index m = mask.dims();

    // A dimension is planted for the pair when the geometric mean of its
    // pair-shared variance fractions across the two modalities reaches
    // one half.
    std::set<Eigen::Index> planted;
    for (Eigen::Index d = 0; d < m; ++d) {
      double score = 0.0;
      for (std::size_t s = 0; s < spec.subsets.size(); ++s) {
        const auto& members = spec.subsets[s].members;
        if (std::binary_search(members.begin(), members.end(), i) &&
            std::binary_search(members.begin(), members.end(), j))
          score += std::sqrt(shares[i](d, s) * shares[j](d, s));
      }
      if (score >= 0.5) planted.insert(d);
    }

    PairRecovery pr;
    pr.pair = key;
    const double mask_sum = mask.weights.sum();
    if (mask_sum > 0.0) {
      double planted_sum = 0.0;
      for (Eigen::Index d : planted) planted_sum += mask.weights(d);
      pr.mass_on_planted = planted_sum / mask_sum;
    }
    std::set<Eigen::Index> support;
    const double peak = mask.weights.maxCoeff();
    if (peak > 0.0)
      for (Eigen::Index d = 0; d < m; ++d)
        if (mask.weights(d) >= 0.5 * peak) support.insert(d);
    std::vector<Eigen::Index> join;
    std::set_union(planted.begin(), planted.end(), support.begin(),
                   support.end(), std::back_inserter(join));
    if (join.empty()) {
      pr.support_iou = 1.0;  // nothing planted, nothing selected
    } else {
      std::vector<Eigen::Index> meet;
      std::set_intersection(planted.begin(), planted.end(), support.begin(),
                            support.end(), std::back_inserter(meet));
      pr.support_iou =
          static_cast<double>(meet.size()) / static_cast<double>(join.size());
    }
    report.mass_on_planted += pr.mass_on_planted;
    report.support_iou += pr.support_iou;
    report.pairs.push_back(pr);
  }
  const double inv = 1.0 / static_cast<double>(report.pairs.size());
  report.mass_on_planted *= inv;
  report.support_iou *= inv;
  return report;
}

}  // namespace pcicorr
