#include "qinst/linalg.hpp"

#include <cmath>
#include <numbers>

namespace qinst {

double Rng::uniform() {
  // 53 random mantissa bits; never returns exactly 0.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

Matrix Rng::ginibre(Index rows, Index cols) {
  Matrix g(rows, cols);
  // Fill row-major so the stream order does not depend on Eigen's storage.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = complex_normal();
  return g;
}

namespace {

void require_positive(Index n, const char* what) {
  if (n < 1) throw Error(ErrorKind::DimMismatch, std::string(what) + " must be >= 1");
}

}  // namespace

Matrix random_state(Index dim, Rng& rng) {
  require_positive(dim, "dim");
  Matrix g = rng.ginibre(dim, dim);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return hermitize(rho);
}

Matrix random_state(Index dim, std::uint64_t seed) {
  Rng rng(seed);
  return random_state(dim, rng);
}

std::vector<Matrix> random_povm(Index dim, Index n_outcomes, Rng& rng, const Tolerances& tol) {
  require_positive(dim, "dim");
  require_positive(n_outcomes, "n_outcomes");
  std::vector<Matrix> parts;
  parts.reserve(n_outcomes);
  Matrix total = Matrix::Zero(dim, dim);
  for (Index x = 0; x < n_outcomes; ++x) {
    Matrix g = rng.ginibre(dim, dim);
    parts.push_back(g * g.adjoint());
    total += parts.back();
  }
  const Matrix normalizer = psd_inv_sqrt(total, tol);
  for (auto& p : parts) p = hermitize(normalizer * p * normalizer);
  return parts;
}

std::vector<Matrix> random_povm(Index dim, Index n_outcomes, std::uint64_t seed, const Tolerances& tol) {
  Rng rng(seed);
  return random_povm(dim, n_outcomes, rng, tol);
}

KrausGrid random_instrument(Index dim_in, Index dim_out, Index n_outcomes, Index kraus_per_outcome, Rng& rng,
                            const Tolerances& tol) {
  require_positive(dim_in, "dim_in");
  require_positive(dim_out, "dim_out");
  require_positive(n_outcomes, "n_outcomes");
  require_positive(kraus_per_outcome, "kraus_per_outcome");
  KrausGrid grid(n_outcomes);
  Matrix total = Matrix::Zero(dim_in, dim_in);
  for (auto& ops : grid) {
    for (Index i = 0; i < kraus_per_outcome; ++i) {
      ops.push_back(rng.ginibre(dim_out, dim_in));
      total += ops.back().adjoint() * ops.back();
    }
  }
  const Matrix normalizer = psd_inv_sqrt(total, tol);
  for (auto& ops : grid)
    for (auto& k : ops) k = k * normalizer;
  return grid;
}

KrausGrid random_instrument(Index dim_in, Index dim_out, Index n_outcomes, Index kraus_per_outcome,
                            std::uint64_t seed, const Tolerances& tol) {
  Rng rng(seed);
  return random_instrument(dim_in, dim_out, n_outcomes, kraus_per_outcome, rng, tol);
}

Matrix random_unitary(Index dim, Rng& rng) {
  require_positive(dim, "dim");
  Eigen::HouseholderQR<Matrix> qr(rng.ginibre(dim, dim));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix column phases so the distribution is Haar.
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0) q.col(j) *= d / a;
  }
  return q;
}

Matrix random_hermitian(Index dim, Rng& rng) {
  Matrix g = rng.ginibre(dim, dim);
  return hermitize(g);
}

RealVector random_simplex(Index n, Rng& rng) {
  require_positive(n, "n");
  RealVector w(n);
  for (Index i = 0; i < n; ++i) w(i) = -std::log(rng.uniform());
  return w / w.sum();
}

}  // namespace qinst
