#include "qinst/operations.hpp"

#include <cmath>

namespace qinst {

Operation Operation::create(Index dim_in, Index dim_out, std::vector<Matrix> kraus, const Tolerances& tol) {
  Operation op(dim_in, dim_out, std::move(kraus));
  op.validate(tol);
  return op;
}

Operation Operation::unchecked(Index dim_in, Index dim_out, std::vector<Matrix> kraus) {
  if (kraus.empty()) kraus.push_back(Matrix::Zero(dim_out, dim_in));
  return Operation(dim_in, dim_out, std::move(kraus));
}

Operation Operation::identity(Index dim) { return Operation(dim, dim, {qinst::identity(dim)}); }

Operation Operation::zero(Index dim_in, Index dim_out) {
  return Operation(dim_in, dim_out, {Matrix::Zero(dim_out, dim_in)});
}

Operation Operation::unitary(const Matrix& u) { return Operation(u.cols(), u.rows(), {u}); }

void Operation::validate(const Tolerances& tol) const {
  if (dim_in_ < 1 || dim_out_ < 1) throw Error(ErrorKind::DimMismatch, "operation dims must be >= 1");
  if (kraus_.empty()) throw Error(ErrorKind::InvariantViolation, "operation needs at least one Kraus operator");
  for (const auto& k : kraus_)
    if (k.rows() != dim_out_ || k.cols() != dim_in_)
      throw Error(ErrorKind::DimMismatch, "Kraus operator shape differs from dim_out x dim_in");
  const double top = max_eigenvalue(kraus_normalizer(*this), tol);
  if (top > 1.0 + tol.psd)
    throw Error(ErrorKind::InvariantViolation, "operation is trace increasing (sum K^*K exceeds I by " +
                                                   std::to_string(top - 1.0) + ")");
}

Matrix apply(const Operation& op, const Matrix& m) {
  if (m.rows() != op.dim_in() || m.cols() != op.dim_in())
    throw Error(ErrorKind::DimMismatch, "apply: input is not dim_in x dim_in");
  Matrix out = Matrix::Zero(op.dim_out(), op.dim_out());
  for (const auto& k : op.kraus()) out.noalias() += k * m * k.adjoint();
  return out;
}

Matrix dual_apply(const Operation& op, const Matrix& b) {
  if (b.rows() != op.dim_out() || b.cols() != op.dim_out())
    throw Error(ErrorKind::DimMismatch, "dual_apply: input is not dim_out x dim_out");
  Matrix out = Matrix::Zero(op.dim_in(), op.dim_in());
  for (const auto& k : op.kraus()) out.noalias() += k.adjoint() * b * k;
  return out;
}

Operation compose(const Operation& j1, const Operation& j2) {
  if (j1.dim_out() != j2.dim_in()) throw Error(ErrorKind::DimMismatch, "compose: dim_out(j1) != dim_in(j2)");
  std::vector<Matrix> kraus;
  kraus.reserve(j1.kraus().size() * j2.kraus().size());
  for (const auto& k1 : j1.kraus())
    for (const auto& k2 : j2.kraus()) kraus.push_back(k2 * k1);
  return Operation::unchecked(j1.dim_in(), j2.dim_out(), std::move(kraus));
}

Operation tensor(const Operation& j1, const Operation& j2) {
  std::vector<Matrix> kraus;
  kraus.reserve(j1.kraus().size() * j2.kraus().size());
  for (const auto& k1 : j1.kraus())
    for (const auto& k2 : j2.kraus()) kraus.push_back(kron(k1, k2));
  return Operation::unchecked(j1.dim_in() * j2.dim_in(), j1.dim_out() * j2.dim_out(), std::move(kraus));
}

Operation sum(const std::vector<Operation>& ops) {
  if (ops.empty()) throw Error(ErrorKind::DimMismatch, "sum: no operations");
  std::vector<Matrix> kraus;
  for (const auto& op : ops) {
    if (op.dim_in() != ops.front().dim_in() || op.dim_out() != ops.front().dim_out())
      throw Error(ErrorKind::DimMismatch, "sum: operations have different dims");
    kraus.insert(kraus.end(), op.kraus().begin(), op.kraus().end());
  }
  return Operation::unchecked(ops.front().dim_in(), ops.front().dim_out(), std::move(kraus));
}

Operation sum(const Operation& a, const Operation& b) { return sum(std::vector<Operation>{a, b}); }

Operation scale(const Operation& op, double c) {
  if (c < 0) throw Error(ErrorKind::BadWeights, "scale: negative weight");
  std::vector<Matrix> kraus = op.kraus();
  const double s = std::sqrt(c);
  for (auto& k : kraus) k *= s;
  return Operation::unchecked(op.dim_in(), op.dim_out(), std::move(kraus));
}

Matrix kraus_normalizer(const Operation& op) {
  Matrix s = Matrix::Zero(op.dim_in(), op.dim_in());
  for (const auto& k : op.kraus()) s.noalias() += k.adjoint() * k;
  return s;
}

double channel_residual(const Operation& op) { return max_abs(kraus_normalizer(op) - identity(op.dim_in())); }

bool is_channel(const Operation& op, const Tolerances& tol) { return channel_residual(op) < tol.eq; }

Operation preparation(const Matrix& sigma, const Tolerances& tol) {
  auto eig = hermitian_eig(sigma, tol);
  if (eig.values.size() && eig.values.minCoeff() < -tol.psd)
    throw Error(ErrorKind::NotPSD, "preparation: matrix is not PSD");
  std::vector<Matrix> kraus;
  for (Index m = 0; m < eig.values.size(); ++m) {
    if (eig.values(m) <= 0.0) continue;
    kraus.push_back(std::sqrt(eig.values(m)) * eig.vectors.col(m));
  }
  return Operation::unchecked(1, sigma.rows(), std::move(kraus));
}

Operation partial_trace_channel(Index dim1, Index dim2, Keep keep) {
  std::vector<Matrix> kraus;
  if (keep == Keep::First) {
    for (Index k = 0; k < dim2; ++k) kraus.push_back(kron(identity(dim1), Matrix(basis_ket(dim2, k).adjoint())));
    return Operation::unchecked(dim1 * dim2, dim1, std::move(kraus));
  }
  for (Index k = 0; k < dim1; ++k) kraus.push_back(kron(Matrix(basis_ket(dim1, k).adjoint()), identity(dim2)));
  return Operation::unchecked(dim1 * dim2, dim2, std::move(kraus));
}

Matrix choi_of_map(const std::function<Matrix(const Matrix&)>& map, Index dim_in, Index dim_out) {
  Matrix c = Matrix::Zero(dim_in * dim_out, dim_in * dim_out);
  for (Index i = 0; i < dim_in; ++i) {
    for (Index j = 0; j < dim_in; ++j) {
      const Matrix image = map(matrix_unit(dim_in, i, j));
      if (image.rows() != dim_out || image.cols() != dim_out)
        throw Error(ErrorKind::DimMismatch, "choi_of_map: image has wrong shape");
      c.block(i * dim_out, j * dim_out, dim_out, dim_out) = image;
    }
  }
  return c;
}

Matrix choi(const Operation& op) {
  return choi_of_map([&op](const Matrix& e) { return qinst::apply(op, e); }, op.dim_in(), op.dim_out());
}

Operation kraus_from_choi(const Matrix& choi_matrix, Index dim_in, Index dim_out, const Tolerances& tol) {
  if (choi_matrix.rows() != dim_in * dim_out || choi_matrix.cols() != dim_in * dim_out)
    throw Error(ErrorKind::DimMismatch, "kraus_from_choi: Choi matrix is not (dim_in*dim_out) square");
  auto eig = hermitian_eig(choi_matrix, tol);
  if (eig.values.minCoeff() < -tol.psd)
    throw Error(ErrorKind::NotPSD, "Choi matrix has eigenvalue " + std::to_string(eig.values.minCoeff()) +
                                       "; the map is not completely positive");
  std::vector<Matrix> kraus;
  for (Index n = 0; n < eig.values.size(); ++n) {
    if (eig.values(n) <= tol.psd) continue;
    const double s = std::sqrt(eig.values(n));
    // v = sum_i |i> (x) K|i>, so K(k, i) = v(i * dim_out + k).
    Matrix k(dim_out, dim_in);
    for (Index i = 0; i < dim_in; ++i)
      for (Index r = 0; r < dim_out; ++r) k(r, i) = s * eig.vectors(i * dim_out + r, n);
    kraus.push_back(std::move(k));
  }
  return Operation::unchecked(dim_in, dim_out, std::move(kraus));
}

Index choi_rank(const Operation& op, const Tolerances& tol) {
  auto eig = hermitian_eig(choi(op), tol);
  Index rank = 0;
  for (Index n = 0; n < eig.values.size(); ++n)
    if (eig.values(n) > tol.psd) ++rank;
  return rank;
}

double map_distance(const Operation& a, const Operation& b) {
  if (a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out())
    throw Error(ErrorKind::DimMismatch, "map_distance: operations have different dims");
  return max_abs(choi(a) - choi(b));
}

}  // namespace qinst
