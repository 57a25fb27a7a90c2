#pragma once

#include <optional>
#include <vector>

#include "qinst/labels.hpp"
#include "qinst/linalg.hpp"

namespace qinst {

/// Which outcome index a marginal keeps (the other one is summed).
enum class Side { First = 1, Second = 2 };

/// Density operator: Hermitian, PSD, unit trace.
class State {
 public:
  static State create(Matrix m, const Tolerances& tol = {});
  /// Skips validation; for intermediate results that are re-checked later.
  static State unchecked(Matrix m) { return State(std::move(m)); }

  Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }

 private:
  explicit State(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

/// Operator 0 <= a <= I.
class Effect {
 public:
  static Effect create(Matrix m, const Tolerances& tol = {});
  static Effect unchecked(Matrix m) { return Effect(std::move(m)); }

  Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }

 private:
  explicit Effect(Matrix m) : mat_(std::move(m)) {}
  Matrix mat_;
};

/// a' = I - a.
Effect complement(const Effect& a);

/// Outcome-labelled POVM.
class Observable {
 public:
  static Observable create(Labels labels, std::vector<Matrix> effects, const Tolerances& tol = {});
  static Observable unchecked(Index dim, Labels labels, std::vector<Matrix> effects);

  Index dim() const { return dim_; }
  std::size_t size() const { return labels_.size(); }
  const Labels& labels() const { return labels_; }
  const std::vector<Matrix>& effects() const { return effects_; }
  const Matrix& effect(std::size_t x) const { return effects_[x]; }
  const Matrix& effect(const Label& label) const { return effects_[index_of(labels_, label)]; }

  /// Re-runs the construction checks on an unchecked value.
  void validate(const Tolerances& tol = {}) const;

 private:
  Observable(Index dim, Labels labels, std::vector<Matrix> effects)
      : dim_(dim), labels_(std::move(labels)), effects_(std::move(effects)) {}
  Index dim_;
  Labels labels_;
  std::vector<Matrix> effects_;
};

/// POVM over the full grid labels1 x labels2, stored row-major (x * n2 + y).
class BiObservable {
 public:
  static BiObservable create(Labels labels1, Labels labels2, std::vector<Matrix> grid, const Tolerances& tol = {});
  static BiObservable unchecked(Index dim, Labels labels1, Labels labels2, std::vector<Matrix> grid);

  Index dim() const { return dim_; }
  const Labels& labels1() const { return labels1_; }
  const Labels& labels2() const { return labels2_; }
  const std::vector<Matrix>& grid() const { return grid_; }
  const Matrix& at(std::size_t x, std::size_t y) const { return grid_[x * labels2_.size() + y]; }

  void validate(const Tolerances& tol = {}) const;
  /// Single-index observable with labels pair_label(x, y).
  Observable flatten() const;

 private:
  BiObservable(Index dim, Labels l1, Labels l2, std::vector<Matrix> grid)
      : dim_(dim), labels1_(std::move(l1)), labels2_(std::move(l2)), grid_(std::move(grid)) {}
  Index dim_;
  Labels labels1_;
  Labels labels2_;
  std::vector<Matrix> grid_;
};

struct Distribution {
  Labels labels;
  std::vector<double> probabilities;

  double at(const Label& label) const { return probabilities[index_of(labels, label)]; }
};

/// x -> tr(rho A_x), clamped into [0, 1] after the tolerance check.
Distribution rho_distribution(const Observable& a, const State& rho, const Tolerances& tol = {});

Observable bi_marginal(const BiObservable& c, Side which);

/// (A (x) B)_xy = A_x (x) B_y on dim(a) * dim(b).
BiObservable tensor_biobservable(const Observable& a, const Observable& b);

struct JointReport {
  bool pass = false;
  double residual_1 = 0.0;  // max-entry distance of marginal 1 from a
  double residual_2 = 0.0;  // max-entry distance of marginal 2 from b
  double residual() const { return std::max(residual_1, residual_2); }
};

/// Checks that c is a joint for (a, b). Labels of c must be labels(a) x labels(b).
JointReport verify_joint_biobservable(const BiObservable& c, const Observable& a, const Observable& b,
                                      const Tolerances& tol = {});

/// max_x |A_x^2 - A_x|.
double sharpness_residual(const Observable& a);
bool is_sharp(const Observable& a, const Tolerances& tol = {});

/// C_xy = A_x B_y for pairwise commuting a, b.
BiObservable commuting_joint(const Observable& a, const Observable& b, const Tolerances& tol = {});

/// Effect-wise max-entry distance; LabelMismatch if the label lists differ.
double distance(const Observable& a, const Observable& b);
double distance(const BiObservable& a, const BiObservable& b);

/// Sum of effects minus identity, max-entry.
double normalization_residual(const Observable& a);

}  // namespace qinst
