#pragma once

#include "qinst/instruments.hpp"

namespace qinst {

/// (H, K, I, P): interaction I from H to H (x) K and probe P on K.
class MeasurementModel {
 public:
  static MeasurementModel create(Index base_dim, Index aux_dim, Instrument interaction, Observable probe,
                                 const Tolerances& tol = {});

  Index base_dim() const { return base_dim_; }
  Index aux_dim() const { return aux_dim_; }
  const Instrument& interaction() const { return interaction_; }
  const Observable& probe() const { return probe_; }

  void validate(const Tolerances& tol = {}) const;

 private:
  MeasurementModel(Index base, Index aux, Instrument i, Observable p)
      : base_dim_(base), aux_dim_(aux), interaction_(std::move(i)), probe_(std::move(p)) {}
  Index base_dim_;
  Index aux_dim_;
  Instrument interaction_;
  Observable probe_;
};

/// M_xy = interaction outcome y followed by the Lueders operation of I (x) P_x.
/// The grid's first index runs over probe labels, the second over interaction labels.
BiInstrument measurement_instrument(const MeasurementModel& m);

/// x -> tr_K sum_y M_xy, an instrument on H.
Instrument measured_instrument(const MeasurementModel& m);

/// x -> Ibar^*(I (x) P_x).
Observable measured_observable(const MeasurementModel& m);

/// Model on H with auxiliary space K (x) K1: interaction is m's followed by
/// m1's with paired labels, probe is P_x (x) P1_y with paired labels.
MeasurementModel sequential_model_product(const MeasurementModel& m, const MeasurementModel& m1,
                                          const Tolerances& tol = {});

}  // namespace qinst
