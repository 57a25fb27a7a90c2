#include "qinst/measurement_models.hpp"

namespace qinst {

MeasurementModel MeasurementModel::create(Index base_dim, Index aux_dim, Instrument interaction, Observable probe,
                                          const Tolerances& tol) {
  MeasurementModel m(base_dim, aux_dim, std::move(interaction), std::move(probe));
  m.validate(tol);
  return m;
}

void MeasurementModel::validate(const Tolerances& tol) const {
  if (base_dim_ < 1 || aux_dim_ < 1) throw Error(ErrorKind::DimMismatch, "model dims must be >= 1");
  if (interaction_.dim_in() != base_dim_)
    throw Error(ErrorKind::DimMismatch, "model: interaction input dim != base_dim");
  if (interaction_.dim_out() != base_dim_ * aux_dim_)
    throw Error(ErrorKind::DimMismatch, "model: interaction output dim != base_dim * aux_dim");
  if (probe_.dim() != aux_dim_) throw Error(ErrorKind::DimMismatch, "model: probe dim != aux_dim");
  interaction_.validate(tol);
  probe_.validate(tol);
}

BiInstrument measurement_instrument(const MeasurementModel& m) {
  const Matrix id = identity(m.base_dim());
  std::vector<Operation> grid;
  for (const auto& p : m.probe().effects()) {
    // sqrt(I (x) P) = I (x) sqrt(P)
    const Operation probe = Operation::unitary(kron(id, psd_sqrt(p)));
    for (const auto& iy : m.interaction().operations()) grid.push_back(compose(iy, probe));
  }
  return BiInstrument::unchecked(m.probe().labels(), m.interaction().labels(), std::move(grid));
}

Instrument measured_instrument(const MeasurementModel& m) {
  return reduced_instrument(bi_marginal_instrument(measurement_instrument(m), Side::First), m.base_dim(),
                            m.aux_dim(), Keep::First);
}

Observable measured_observable(const MeasurementModel& m) {
  const Operation ibar = m.interaction().channel();
  const Matrix id = identity(m.base_dim());
  std::vector<Matrix> effects;
  for (const auto& p : m.probe().effects()) effects.push_back(hermitize(dual_apply(ibar, kron(id, p))));
  return Observable::unchecked(m.base_dim(), m.probe().labels(), std::move(effects));
}

MeasurementModel sequential_model_product(const MeasurementModel& m, const MeasurementModel& m1,
                                          const Tolerances& tol) {
  if (m1.base_dim() != m.base_dim() * m.aux_dim())
    throw Error(ErrorKind::DimMismatch, "sequential_model_product: base of m1 != H (x) K of m");
  Instrument interaction = sequential_product(m.interaction(), m1.interaction()).flatten();
  Observable probe = tensor_biobservable(m.probe(), m1.probe()).flatten();
  return MeasurementModel::create(m.base_dim(), m.aux_dim() * m1.aux_dim(), std::move(interaction),
                                  std::move(probe), tol);
}

}  // namespace qinst
