#include "qinst/coexistence.hpp"

#include <cmath>

#include "qinst/families.hpp"

namespace qinst {

JointCertificate verify_joint_instrument(const BiInstrument& k, const Instrument& i, const Instrument& j,
                                         const Tolerances& tol) {
  if (k.labels1() != i.labels() || k.labels2() != j.labels())
    throw Error(ErrorKind::LabelMismatch, "verify_joint_instrument: joint labels are not labels(i) x labels(j)");
  if (k.dim_in() != i.dim_in() || k.dim_in() != j.dim_in())
    throw Error(ErrorKind::DimMismatch, "verify_joint_instrument: input dims differ");
  const Index n1 = i.dim_out();
  const Index n2 = j.dim_out();
  if (k.dim_out() != n1 * n2)
    throw Error(ErrorKind::BadFactorization, "verify_joint_instrument: dim_out(k) != dim_out(i) * dim_out(j)");
  const MixedMarginals mm = mixed_marginals(k, n1, n2);
  return {k, n1, n2, map_distance(mm.marginal1_keep1, i), map_distance(mm.marginal2_keep2, j), tol.eq};
}

BiInstrument trivial_joint(const Instrument& i, Labels labels, const std::vector<Matrix>& betas,
                           const Tolerances& tol) {
  // Validates the betas the same way the partner instrument does.
  const Instrument partner = trivial(i.dim_in(), std::move(labels), betas, tol);
  std::vector<Operation> grid;
  for (const auto& ix : i.operations())
    for (const auto& b : betas) grid.push_back(tensor(ix, preparation(b, tol)));
  return BiInstrument::create(i.labels(), partner.labels(), std::move(grid), tol);
}

BiInstrument postprocess_joint(const BiInstrument& k, const Eigen::MatrixXd& lambda, Labels new_labels,
                               const Tolerances& tol) {
  const std::size_t n1 = k.labels1().size();
  const std::size_t n2 = k.labels2().size();
  if (static_cast<std::size_t>(lambda.rows()) != n1 || static_cast<std::size_t>(lambda.cols()) != new_labels.size())
    throw Error(ErrorKind::BadStochasticMatrix, "postprocess_joint: lambda must be |x| by |z|");
  for (Index x = 0; x < lambda.rows(); ++x) {
    if (lambda.row(x).minCoeff() < 0.0 || std::abs(lambda.row(x).sum() - 1.0) > tol.trace)
      throw Error(ErrorKind::BadStochasticMatrix, "postprocess_joint: row " + std::to_string(x) + " is not stochastic");
  }
  require_unique(new_labels, "postprocess_joint");
  std::vector<Operation> grid;
  for (std::size_t z = 0; z < new_labels.size(); ++z) {
    for (std::size_t y = 0; y < n2; ++y) {
      std::vector<Operation> terms;
      for (std::size_t x = 0; x < n1; ++x)
        if (lambda(x, z) > 0.0) terms.push_back(scale(k.at(x, y), lambda(x, z)));
      grid.push_back(terms.empty() ? Operation::zero(k.dim_in(), k.dim_out()) : sum(terms));
    }
  }
  return BiInstrument::unchecked(std::move(new_labels), k.labels2(), std::move(grid));
}

BiInstrument condition_joint(const BiInstrument& l, const Instrument& k) {
  if (k.dim_out() != l.dim_in()) throw Error(ErrorKind::DimMismatch, "condition_joint: dim_out(k) != dim_in(l)");
  const Operation kbar = k.channel();
  std::vector<Operation> grid;
  for (const auto& op : l.grid()) grid.push_back(compose(kbar, op));
  return BiInstrument::unchecked(l.labels1(), l.labels2(), std::move(grid));
}

BiObservable observable_joint_transfer(const BiObservable& c, const Instrument& i) {
  if (c.dim() != i.dim_out())
    throw Error(ErrorKind::DimMismatch, "observable_joint_transfer: dim(c) != dim_out(i)");
  const Operation ibar = i.channel();
  std::vector<Matrix> grid;
  for (const auto& e : c.grid()) grid.push_back(hermitize(dual_apply(ibar, e)));
  return BiObservable::unchecked(i.dim_in(), c.labels1(), c.labels2(), std::move(grid));
}

BiObservable measured_conditioned_joint(const Instrument& i, const Observable& a) {
  if (a.dim() != i.dim_out())
    throw Error(ErrorKind::DimMismatch, "measured_conditioned_joint: dim(a) != dim_out(i)");
  return conditioned_biobservable(a, i);
}

BiObservable measured_joint_observable(const JointCertificate& cert) {
  if (!cert.pass())
    throw Error(ErrorKind::UncertifiedJoint, "measured_joint_observable: certificate residual " +
                                                 std::to_string(cert.residual()) + " is not below tolerance");
  const Matrix id = identity(cert.joint.dim_out());
  std::vector<Matrix> grid;
  for (const auto& op : cert.joint.grid()) grid.push_back(hermitize(dual_apply(op, id)));
  return BiObservable::unchecked(cert.joint.dim_in(), cert.joint.labels1(), cert.joint.labels2(), std::move(grid));
}

}  // namespace qinst
