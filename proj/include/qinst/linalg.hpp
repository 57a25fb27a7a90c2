#pragma once

// Dense complex kernel shared by every other module.
//
// Composite-space convention: for H1 (dim d1) tensor H2 (dim d2) the basis
// vector |i> (x) |k> sits at index i * d2 + k. kron, partial_trace, the
// Choi matrix and the partial-trace channels all follow it.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "qinst/error.hpp"

namespace qinst {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Absolute tolerances, all measured in the max-entry norm.
struct Tolerances {
  double hermitian = 1e-9;
  double psd = 1e-9;
  double trace = 1e-9;
  double eq = 1e-9;

  static Tolerances uniform(double t) { return {t, t, t, t}; }

  void validate() const {
    if (!(hermitian > 0 && psd > 0 && trace > 0 && eq > 0))
      throw Error(ErrorKind::InvariantViolation, "tolerances must be strictly positive");
  }
};

/// Which tensor factor a partial trace keeps.
enum class Keep { First = 1, Second = 2 };

template <typename Derived>
using PlainOf = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return static_cast<double>(m.cwiseAbs().maxCoeff());
}

template <typename Derived>
double hermitian_residual(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(m - m.adjoint());
}

template <typename Derived>
PlainOf<Derived> hermitize(const Eigen::MatrixBase<Derived>& m) {
  return (m + m.adjoint()) / 2.0;
}

template <typename DA, typename DB>
PlainOf<DA> kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  const Index rb = b.rows();
  const Index cb = b.cols();
  PlainOf<DA> out(a.rows() * rb, a.cols() * cb);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
  return out;
}

template <typename DA, typename DB>
PlainOf<DA> commutator(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  return a * b - b * a;
}

/// tr_{H2} for keep == First, tr_{H1} for keep == Second.
template <typename Derived>
PlainOf<Derived> partial_trace(const Eigen::MatrixBase<Derived>& m, Index dim1, Index dim2, Keep keep) {
  if (m.rows() != dim1 * dim2 || m.cols() != dim1 * dim2)
    throw Error(ErrorKind::DimMismatch, "partial_trace: matrix is not (dim1*dim2) square");
  if (keep == Keep::First) {
    PlainOf<Derived> out = PlainOf<Derived>::Zero(dim1, dim1);
    for (Index i = 0; i < dim1; ++i)
      for (Index j = 0; j < dim1; ++j)
        for (Index k = 0; k < dim2; ++k) out(i, j) += m(i * dim2 + k, j * dim2 + k);
    return out;
  }
  PlainOf<Derived> out = PlainOf<Derived>::Zero(dim2, dim2);
  for (Index k = 0; k < dim2; ++k)
    for (Index l = 0; l < dim2; ++l)
      for (Index i = 0; i < dim1; ++i) out(k, l) += m(i * dim2 + k, i * dim2 + l);
  return out;
}

template <typename Scalar>
struct HermitianEigen {
  Eigen::Matrix<typename Eigen::NumTraits<Scalar>::Real, Eigen::Dynamic, 1> values;  // ascending
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;                    // columns
};

template <typename Derived>
HermitianEigen<typename Derived::Scalar> hermitian_eig(const Eigen::MatrixBase<Derived>& m,
                                                       const Tolerances& tol = {}) {
  if (hermitian_residual(m) > tol.hermitian)
    throw Error(ErrorKind::NotHermitian, "hermitian_eig: input is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<PlainOf<Derived>> solver(hermitize(m));
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::NotHermitian, "hermitian_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Principal square root of a PSD matrix. Eigenvalues in [-psd, 0) are
/// clamped to zero; anything more negative is rejected. Eigenvalues at the
/// rounding floor of the spectrum are zeroed too, since their roots would
/// be of order sqrt(eps).
template <typename Derived>
PlainOf<Derived> psd_sqrt(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  auto eig = hermitian_eig(m, tol);
  if (eig.values.size() > 0 && eig.values.minCoeff() < -tol.psd)
    throw Error(ErrorKind::NotPSD, "psd_sqrt: negative eigenvalue below -psd_tol");
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  const Real floor = eig.values.size() ? static_cast<Real>(eig.values.size()) *
                                             Eigen::NumTraits<Real>::epsilon() * eig.values.cwiseAbs().maxCoeff()
                                       : Real(0);
  auto roots = eig.values.unaryExpr([floor](Real v) { return v <= floor ? Real(0) : std::sqrt(v); })
                   .template cast<typename Derived::Scalar>();
  PlainOf<Derived> out = eig.vectors * roots.asDiagonal() * eig.vectors.adjoint();
  return hermitize(out);
}

/// S^{-1/2} for positive definite S; SingularNormalizer if any eigenvalue < psd.
template <typename Derived>
PlainOf<Derived> psd_inv_sqrt(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  auto eig = hermitian_eig(m, tol);
  if (eig.values.size() > 0 && eig.values.minCoeff() < tol.psd)
    throw Error(ErrorKind::SingularNormalizer, "normalizer has an eigenvalue below psd_tol");
  auto inv = eig.values.cwiseSqrt().cwiseInverse().template cast<typename Derived::Scalar>();
  PlainOf<Derived> out = eig.vectors * inv.asDiagonal() * eig.vectors.adjoint();
  return hermitize(out);
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  auto eig = hermitian_eig(m, tol);
  return eig.values.size() ? static_cast<double>(eig.values.minCoeff()) : 0.0;
}

template <typename Derived>
double max_eigenvalue(const Eigen::MatrixBase<Derived>& m, const Tolerances& tol = {}) {
  auto eig = hermitian_eig(m, tol);
  return eig.values.size() ? static_cast<double>(eig.values.maxCoeff()) : 0.0;
}

inline Matrix identity(Index n) { return Matrix::Identity(n, n); }

/// E_ij = |i><j| on an n-dimensional space.
inline Matrix matrix_unit(Index n, Index i, Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

inline Vector basis_ket(Index n, Index i) {
  Vector v = Vector::Zero(n);
  v(i) = 1.0;
  return v;
}

inline Matrix projector(const Vector& v) { return v * v.adjoint(); }

inline double trace_real(const Matrix& m) { return m.trace().real(); }

// ---------------------------------------------------------------------------
// Seeded generators

/// Deterministic source of uniforms and complex Gaussians. Built directly
/// on mt19937_64 output so the stream is identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  Complex complex_normal();

  /// Matrix of i.i.d. standard complex Gaussians.
  Matrix ginibre(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Kraus operators grouped by outcome: grid[x][i].
using KrausGrid = std::vector<std::vector<Matrix>>;

Matrix random_state(Index dim, Rng& rng);
Matrix random_state(Index dim, std::uint64_t seed);
std::vector<Matrix> random_povm(Index dim, Index n_outcomes, Rng& rng, const Tolerances& tol = {});
std::vector<Matrix> random_povm(Index dim, Index n_outcomes, std::uint64_t seed, const Tolerances& tol = {});
KrausGrid random_instrument(Index dim_in, Index dim_out, Index n_outcomes, Index kraus_per_outcome, Rng& rng,
                            const Tolerances& tol = {});
KrausGrid random_instrument(Index dim_in, Index dim_out, Index n_outcomes, Index kraus_per_outcome,
                            std::uint64_t seed, const Tolerances& tol = {});
Matrix random_unitary(Index dim, Rng& rng);
Matrix random_hermitian(Index dim, Rng& rng);
/// Probability vector drawn from a flat Dirichlet.
RealVector random_simplex(Index n, Rng& rng);

}  // namespace qinst
