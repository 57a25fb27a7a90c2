#pragma once

#include <functional>
#include <vector>

#include "qinst/linalg.hpp"

namespace qinst {

/// Completely positive, trace non-increasing map in Kraus form,
/// m -> sum_i K_i m K_i^*, with K_i of shape dim_out x dim_in.
///
/// Kraus lists are not unique, so two Operations are compared as maps
/// (see map_distance), never by their operator lists.
class Operation {
 public:
  /// Validates shapes and sum_i K_i^* K_i <= I within tol.psd.
  static Operation create(Index dim_in, Index dim_out, std::vector<Matrix> kraus, const Tolerances& tol = {});
  static Operation unchecked(Index dim_in, Index dim_out, std::vector<Matrix> kraus);

  static Operation identity(Index dim);
  static Operation zero(Index dim_in, Index dim_out);
  /// m -> U m U^*.
  static Operation unitary(const Matrix& u);

  Index dim_in() const { return dim_in_; }
  Index dim_out() const { return dim_out_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  void validate(const Tolerances& tol = {}) const;

 private:
  Operation(Index din, Index dout, std::vector<Matrix> kraus)
      : dim_in_(din), dim_out_(dout), kraus_(std::move(kraus)) {}
  Index dim_in_;
  Index dim_out_;
  std::vector<Matrix> kraus_;
};

Matrix apply(const Operation& op, const Matrix& m);
Matrix dual_apply(const Operation& op, const Matrix& b);

/// Run j1 first, then j2. Kraus operators are the products K2 * K1.
Operation compose(const Operation& j1, const Operation& j2);

/// Operation on the product space with Kraus operators K_i (x) J_j.
Operation tensor(const Operation& j1, const Operation& j2);

/// Operation-level sum; Kraus lists are concatenated.
Operation sum(const std::vector<Operation>& ops);
Operation sum(const Operation& a, const Operation& b);

/// c * op for c >= 0, realised by scaling each Kraus operator by sqrt(c).
Operation scale(const Operation& op, double c);

/// sum_i K_i^* K_i.
Matrix kraus_normalizer(const Operation& op);

bool is_channel(const Operation& op, const Tolerances& tol = {});
double channel_residual(const Operation& op);

/// Preparation map C -> C^dim, 1 -> sigma, for PSD sigma.
Operation preparation(const Matrix& sigma, const Tolerances& tol = {});

/// Trace-out channel on H1 (x) H2 keeping one factor. Kraus operators are
/// I (x) <k| (keep First) or <k| (x) I (keep Second).
Operation partial_trace_channel(Index dim1, Index dim2, Keep keep);

/// sum_ij E_ij (x) op(E_ij), input factor first.
Matrix choi(const Operation& op);

/// Choi matrix of an arbitrary linear map given by its action on matrix units.
Matrix choi_of_map(const std::function<Matrix(const Matrix&)>& map, Index dim_in, Index dim_out);

/// Kraus operators from the eigenvectors of a PSD Choi matrix; eigenvalues
/// at or below tol.psd are discarded. NotPSD signals a map that is not CP.
Operation kraus_from_choi(const Matrix& choi_matrix, Index dim_in, Index dim_out, const Tolerances& tol = {});

/// Number of Choi eigenvalues above tol.psd.
Index choi_rank(const Operation& op, const Tolerances& tol = {});

/// max over matrix units E_ij of |a(E_ij) - b(E_ij)|_max. Equals
/// max_abs(choi(a) - choi(b)).
double map_distance(const Operation& a, const Operation& b);

}  // namespace qinst
