#pragma once

#include "qinst/instruments.hpp"

namespace qinst {

/// Witness that a bi-instrument into H1 (x) H2 reproduces two instruments as
/// its reduced marginals.
struct JointCertificate {
  BiInstrument joint;
  Index n1 = 0;
  Index n2 = 0;
  double residual_1 = 0.0;  // max over outcomes of the map distance to i
  double residual_2 = 0.0;  // max over outcomes of the map distance to j
  double tolerance = 0.0;

  double residual() const { return std::max(residual_1, residual_2); }
  bool pass() const { return residual_1 < tolerance && residual_2 < tolerance; }
};

/// Checks k against (i, j) with n1 = dim_out(i), n2 = dim_out(j).
JointCertificate verify_joint_instrument(const BiInstrument& k, const Instrument& i, const Instrument& j,
                                         const Tolerances& tol = {});

/// K_xy(rho) = I_x(rho) (x) beta_y, a joint for i and trivial(betas).
BiInstrument trivial_joint(const Instrument& i, Labels labels, const std::vector<Matrix>& betas,
                           const Tolerances& tol = {});

/// L_zy = sum_x lambda(x, z) K_xy; joint for (post_process(i, lambda), j)
/// whenever k is a joint for (i, j).
BiInstrument postprocess_joint(const BiInstrument& k, const Eigen::MatrixXd& lambda, Labels new_labels,
                               const Tolerances& tol = {});

/// M_xy = L_xy after the channel of k; joint for ((i|k), (j|k)).
BiInstrument condition_joint(const BiInstrument& l, const Instrument& k);

/// D_xy = Ibar^*(C_xy); joint for ((a|i), (b|i)) when c is a joint for (a, b).
BiObservable observable_joint_transfer(const BiObservable& c, const Instrument& i);

/// B_xy = I_x^*(A_y). Its first marginal is the measured observable of i and
/// its second is (A|i).
BiObservable measured_conditioned_joint(const Instrument& i, const Observable& a);

/// C_xy = K_xy^*(I) of a certified joint; UncertifiedJoint otherwise.
BiObservable measured_joint_observable(const JointCertificate& cert);

}  // namespace qinst
