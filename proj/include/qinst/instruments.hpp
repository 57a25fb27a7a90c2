#pragma once

#include <vector>

#include "qinst/labels.hpp"
#include "qinst/operations.hpp"
#include "qinst/quantum_objects.hpp"

namespace qinst {

/// Outcome-labelled family of operations whose sum is a channel.
class Instrument {
 public:
  static Instrument create(Labels labels, std::vector<Operation> ops, const Tolerances& tol = {});
  static Instrument unchecked(Labels labels, std::vector<Operation> ops);
  /// One operation per outcome, each with a single Kraus operator per entry of the grid row.
  static Instrument from_kraus(Labels labels, const KrausGrid& grid, const Tolerances& tol = {});
  /// Single-outcome instrument wrapping a channel.
  static Instrument from_channel(const Operation& channel, Label label = "0", const Tolerances& tol = {});

  Index dim_in() const { return ops_.front().dim_in(); }
  Index dim_out() const { return ops_.front().dim_out(); }
  std::size_t size() const { return labels_.size(); }
  const Labels& labels() const { return labels_; }
  const std::vector<Operation>& operations() const { return ops_; }
  const Operation& operation(std::size_t x) const { return ops_[x]; }
  const Operation& operation(const Label& label) const { return ops_[index_of(labels_, label)]; }

  /// The summed channel sum_x I_x.
  Operation channel() const { return sum(ops_); }

  void validate(const Tolerances& tol = {}) const;

 private:
  Instrument(Labels labels, std::vector<Operation> ops) : labels_(std::move(labels)), ops_(std::move(ops)) {}
  Labels labels_;
  std::vector<Operation> ops_;
};

/// Instrument indexed by labels1 x labels2, stored row-major (x * n2 + y).
class BiInstrument {
 public:
  static BiInstrument create(Labels labels1, Labels labels2, std::vector<Operation> grid, const Tolerances& tol = {});
  static BiInstrument unchecked(Labels labels1, Labels labels2, std::vector<Operation> grid);

  Index dim_in() const { return grid_.front().dim_in(); }
  Index dim_out() const { return grid_.front().dim_out(); }
  const Labels& labels1() const { return labels1_; }
  const Labels& labels2() const { return labels2_; }
  const std::vector<Operation>& grid() const { return grid_; }
  const Operation& at(std::size_t x, std::size_t y) const { return grid_[x * labels2_.size() + y]; }

  Operation channel() const { return sum(grid_); }
  /// Single-index instrument with labels pair_label(x, y).
  Instrument flatten() const;
  /// Grid with the roles of the two indices swapped.
  BiInstrument transposed() const;

  void validate(const Tolerances& tol = {}) const;

 private:
  BiInstrument(Labels l1, Labels l2, std::vector<Operation> grid)
      : labels1_(std::move(l1)), labels2_(std::move(l2)), grid_(std::move(grid)) {}
  Labels labels1_;
  Labels labels2_;
  std::vector<Operation> grid_;
};

/// Max map distance over outcomes; LabelMismatch when label lists differ.
double map_distance(const Instrument& a, const Instrument& b);
double map_distance(const BiInstrument& a, const BiInstrument& b);

/// Born rule x -> tr[I_x(rho)].
Distribution born_distribution(const Instrument& i, const State& rho, const Tolerances& tol = {});

/// I_x(rho) / tr[I_x(rho)]; ZeroProbability when the outcome cannot occur.
State update_state(const Instrument& i, const Label& x, const State& rho, const Tolerances& tol = {});

/// Observable with effects I_x^*(I).
Observable measured_observable(const Instrument& i);

/// (I o J)_xy = J_y after I_x.
BiInstrument sequential_product(const Instrument& i, const Instrument& j);

/// (J | I)_y = J_y after the channel of I.
Instrument conditioned(const Instrument& j, const Instrument& i);

/// (I T J)_x = the channel of J after I_x.
Instrument then_instrument(const Instrument& i, const Instrument& j);

Instrument bi_marginal_instrument(const BiInstrument& k, Side which);

/// Composes each outcome with the trace-out channel on a dim_out = n1 * n2 output.
Instrument reduced_instrument(const Instrument& k, Index n1, Index n2, Keep keep);

/// Reduced marginals of a bi-instrument into H1 (x) H2. The first word is
/// the outcome index kept, the second the tensor factor kept.
struct MixedMarginals {
  Instrument marginal1_keep1;  // x -> sum_y tr_H2 K_xy
  Instrument marginal2_keep2;  // y -> sum_x tr_H1 K_xy
  Instrument marginal2_keep1;  // y -> sum_x tr_H2 K_xy
  Instrument marginal1_keep2;  // x -> sum_y tr_H1 K_xy
};
MixedMarginals mixed_marginals(const BiInstrument& k, Index n1, Index n2);

/// Outcome-wise mixture sum_i w_i I_i.
Instrument convex_combination(const std::vector<Instrument>& is, const std::vector<double>& weights,
                              const Tolerances& tol = {});

/// P_z = sum_x lambda(x, z) I_x with a row-stochastic lambda.
Instrument post_process(const Instrument& i, const Eigen::MatrixXd& lambda, Labels new_labels,
                        const Tolerances& tol = {});

/// K_xy = I_x (x) J_y.
BiInstrument tensor_instrument(const Instrument& i, const Instrument& j);

/// (A | I)_x = Ibar^*(A_x).
Observable conditioned_observable(const Observable& a, const Instrument& i);

/// (B | I)_xy = I_x^*(B_y).
BiObservable conditioned_biobservable(const Observable& b, const Instrument& i);

/// (A[I]B)_y = sum_x I_x^*(B_y); requires i to measure a.
Observable obs_sequential_product(const Observable& a, const Instrument& i, const Observable& b,
                                  const Tolerances& tol = {});

}  // namespace qinst
