#include "pcicorr/mask.hpp"

#include "pcicorr/csvio.hpp"
#include "pcicorr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcicorr {

namespace {

constexpr int kMaxBisectionIterations = 200;

void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

}  // namespace

void PgdConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size))
    throw std::invalid_argument("step_size must be positive and finite");
  if (!(sum_threshold > 0.0) || !std::isfinite(sum_threshold))
    throw std::invalid_argument("sum_threshold must be positive and finite");
  if (!(tolerable_error > 0.0) || !std::isfinite(tolerable_error))
    throw std::invalid_argument("tolerable_error must be positive and finite");
  if (!std::isfinite(bisect_lo))
    throw std::invalid_argument("bisect_lo must be finite");
  if (bisect_hi && (!std::isfinite(*bisect_hi) || !(bisect_lo < *bisect_hi)))
    throw std::invalid_argument("bisection bounds must satisfy b1 < b2");
  if (max_iterations < 0)
    throw std::invalid_argument("max_iterations must be non-negative");
  if (!(stop_tolerance >= 0.0))
    throw std::invalid_argument("stop_tolerance must be non-negative");
}

PgdConfig default_pgd_config(Eigen::Index dims) {
  if (dims < 1) throw std::invalid_argument("dims must be positive");
  PgdConfig cfg;
  cfg.sum_threshold = static_cast<double>(dims) / 4.0;
  cfg.tolerable_error = 0.01 * cfg.sum_threshold;
  return cfg;
}

std::pair<int, int> make_pair_key(int i, int j) {
  if (i == j)
    throw std::invalid_argument("mask pair must name two distinct modalities");
  return {std::min(i, j), std::max(i, j)};
}

void require_feasible(const PciMask& mask, double tolerable_error) {
  require_finite(mask.weights, "mask");
  if ((mask.weights.array() < 0.0).any() || (mask.weights.array() > 1.0).any())
    throw std::invalid_argument("mask weights fall outside [0, 1]");
  const double sum = mask.weights.sum();
  if (sum > mask.sum_threshold + tolerable_error) {
    std::ostringstream msg;
    msg << "mask weight sum " << sum << " exceeds budget "
        << mask.sum_threshold << " + " << tolerable_error;
    throw std::invalid_argument(msg.str());
  }
}

Eigen::VectorXd truncate_weights(const Eigen::VectorXd& weights) {
  require_finite(weights, "weights");
  return weights.cwiseMax(0.0).cwiseMin(1.0);
}

Projection project(const Eigen::VectorXd& weights, const PgdConfig& cfg) {
  cfg.validate();
  require_finite(weights, "weights");
  const double c = cfg.sum_threshold;
  const double e = cfg.tolerable_error;

  Projection out;
  out.weights = truncate_weights(weights);
  out.sum = out.weights.sum();
  if (out.sum <= c) return out;

  // The truncated sum exceeds the budget: bisect a uniform shift r so that
  // sum(truncate(weights - r)) lands within e of c. The shifted truncation
  // is always taken from the raw weights, which makes the limit point the
  // exact Euclidean projection onto the feasible set.
  const auto shifted_sum = [&weights](double r) {
    return truncate_weights(weights.array() - r).sum();
  };
  double lo = cfg.bisect_lo;
  double hi = cfg.bisect_hi ? *cfg.bisect_hi : weights.maxCoeff();
  const double lo_sum = shifted_sum(lo);
  const double hi_sum = shifted_sum(hi);
  if (!(hi > lo) || lo_sum < c - e || hi_sum > c + e) {
    std::ostringstream msg;
    msg << "projection bisection bounds [" << lo << ", " << hi
        << "] do not bracket the budget " << c << " (endpoint sums " << lo_sum
        << ", " << hi_sum << "); widen the bounds and retry";
    throw BracketError(lo_sum, hi_sum, msg.str());
  }

  for (int iter = 1; iter <= kMaxBisectionIterations; ++iter) {
    const double r = 0.5 * (lo + hi);
    Eigen::VectorXd candidate = truncate_weights(weights.array() - r);
    const double sum = candidate.sum();
    if (std::abs(sum - c) <= e) {
      out.weights = std::move(candidate);
      out.sum = sum;
      out.shift = r;
      out.iterations = iter;
      return out;
    }
    (sum > c ? lo : hi) = r;
  }
  throw BracketError(shifted_sum(lo), shifted_sum(hi),
                     "projection bisection failed to converge; the sum "
                     "tolerance may be smaller than representable");
}

PciMask pgd_step(const PciMask& mask, const Eigen::VectorXd& loss_gradient,
                 const PgdConfig& cfg) {
  cfg.validate();
  require_finite(mask.weights, "mask");
  require_finite(loss_gradient, "gradient");
  if (loss_gradient.size() != mask.weights.size())
    throw std::invalid_argument("gradient dimension does not match mask");
  PciMask next = mask;
  next.sum_threshold = cfg.sum_threshold;
  next.weights =
      project(mask.weights - cfg.step_size * loss_gradient, cfg).weights;
  return next;
}

PciMask random_mask(Eigen::Index dims, std::pair<int, int> pair,
                    const PgdConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  PciMask mask;
  mask.pair = make_pair_key(pair.first, pair.second);
  mask.sum_threshold = cfg.sum_threshold;
  mask.weights = project(rng.uniform_vector(dims), cfg).weights;
  return mask;
}

const PciMask& MaskSet::at(int i, int j) const {
  const auto it = masks.find(make_pair_key(i, j));
  if (it == masks.end())
    throw std::invalid_argument("mask set has no entry for the requested pair");
  return it->second;
}

PciMask& MaskSet::at(int i, int j) {
  return const_cast<PciMask&>(std::as_const(*this).at(i, j));
}

void MaskSet::validate() const {
  if (modalities < 2)
    throw std::invalid_argument("mask set needs at least two modalities");
  const std::size_t expected =
      static_cast<std::size_t>(modalities) * (modalities - 1) / 2;
  if (masks.size() != expected)
    throw std::invalid_argument("mask set must hold one mask per unordered pair");
  Eigen::Index dims = -1;
  double budget = 0.0;
  for (const auto& [key, mask] : masks) {
    if (key.first < 0 || key.second >= modalities || key.first >= key.second)
      throw std::invalid_argument("mask set contains an invalid pair key");
    if (mask.pair != key)
      throw std::invalid_argument("mask pair does not match its key");
    if (dims < 0) {
      dims = mask.dims();
      budget = mask.sum_threshold;
    } else if (mask.dims() != dims) {
      throw std::invalid_argument("masks disagree on dimension");
    } else if (mask.sum_threshold != budget) {
      throw std::invalid_argument("masks disagree on the budget");
    }
  }
}

void save_mask_csv(const PciMask& mask, const std::string& path,
                   double tolerable_error, std::optional<std::uint64_t> seed) {
  std::ostringstream row;
  for (Eigen::Index i = 0; i < mask.weights.size(); ++i) {
    if (i) row << ',';
    row << format_double(mask.weights(i));
  }
  row << '\n';
  write_file(path, row.str());

  std::ostringstream meta;
  meta << "pair = " << mask.pair.first << ',' << mask.pair.second << '\n'
       << "c = " << format_double(mask.sum_threshold) << '\n'
       << "e = " << format_double(tolerable_error) << '\n';
  if (seed) meta << "seed = " << *seed << '\n';
  meta << "sum = " << format_double(mask.weights.sum()) << '\n';
  write_file(path + ".meta", meta.str());
}

namespace {

std::string meta_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string k = line.substr(0, eq);
    k.erase(0, k.find_first_not_of(" \t"));
    k.erase(k.find_last_not_of(" \t") + 1);
    if (k != key) continue;
    std::string v = line.substr(eq + 1);
    v.erase(0, v.find_first_not_of(" \t"));
    v.erase(v.find_last_not_of(" \t\r") + 1);
    return v;
  }
  throw std::runtime_error("mask metadata is missing key '" + key + "'");
}

}  // namespace

PciMask load_mask_csv(const std::string& path) {
  const std::string text = read_file(path);
  const auto eol = text.find('\n');
  const auto fields =
      split_csv_line(eol == std::string::npos ? text : text.substr(0, eol));
  PciMask mask;
  mask.weights.resize(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i)
    mask.weights(i) = std::stod(fields[i]);

  const std::string meta = read_file(path + ".meta");
  const auto pair_fields = split_csv_line(meta_value(meta, "pair"));
  if (pair_fields.size() != 2)
    throw std::runtime_error(path + ".meta: malformed pair");
  mask.pair = make_pair_key(std::stoi(pair_fields[0]), std::stoi(pair_fields[1]));
  mask.sum_threshold = std::stod(meta_value(meta, "c"));

  // Stored weights may predate edits or have drifted: always validate and
  // re-project instead of trusting the file.
  PgdConfig cfg;
  cfg.sum_threshold = mask.sum_threshold;
  cfg.tolerable_error = std::stod(meta_value(meta, "e"));
  mask.weights = project(mask.weights, cfg).weights;
  return mask;
}

void save_mask_pgm(const PciMask& mask, const std::string& path,
                   bool fixed_width_128) {
  const Eigen::Index m = mask.weights.size();
  const Eigen::Index width = fixed_width_128 ? 128 : m;
  std::ostringstream out;
  out << "P2\n" << width << " 1\n255\n";
  for (Eigen::Index i = 0; i < width; ++i) {
    if (i) out << ' ';
    if (i < m) {
      const double lambda = std::clamp(mask.weights(i), 0.0, 1.0);
      out << static_cast<int>(std::lround(255.0 * (1.0 - lambda)));
    } else {
      out << 255;  // padding reads as weight zero
    }
  }
  out << '\n';
  write_file(path, out.str());
}

}  // namespace pcicorr
