#include "pcicorr/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pcicorr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view component) {
  return splitmix64(master ^ splitmix64(fnv1a64(component)));
}

double Rng::uniform() {
  // 53 random bits -> double in [0, 1).
  return (engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  // Box-Muller without caching the second deviate: deterministic stream
  // consumption (exactly two engine draws per sample).
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::MatrixXd Rng::gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) out(r, c) = gaussian();
  return out;
}

Eigen::VectorXd Rng::uniform_vector(Eigen::Index size) {
  Eigen::VectorXd out(size);
  for (Eigen::Index i = 0; i < size; ++i) out(i) = uniform();
  return out;
}

Eigen::MatrixXd Rng::orthonormal_matrix(Eigen::Index dim) {
  if (dim <= 0) throw std::invalid_argument("orthonormal_matrix: dim must be positive");
  const Eigen::MatrixXd a = gaussian_matrix(dim, dim);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the sign ambiguity so the distribution does not depend on the QR
  // implementation's column sign choices.
  for (Eigen::Index i = 0; i < dim; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

}  // namespace pcicorr
