#include "qinst/quantum_objects.hpp"

#include <algorithm>
#include <sstream>

namespace qinst {

namespace {

std::string fmt_residual(const char* what, double r) {
  std::ostringstream os;
  os << what << " (residual " << r << ")";
  return os.str();
}

void check_effect(const Matrix& m, const Tolerances& tol, const char* context) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::DimMismatch, std::string(context) + ": effect is not square");
  const double herm = hermitian_residual(m);
  if (herm > tol.hermitian)
    throw Error(ErrorKind::InvariantViolation, fmt_residual((std::string(context) + ": effect not Hermitian").c_str(), herm));
  auto eig = hermitian_eig(m, tol);
  if (eig.values.size() == 0) return;
  const double lo = eig.values.minCoeff();
  const double hi = eig.values.maxCoeff();
  if (lo < -tol.psd)
    throw Error(ErrorKind::InvariantViolation, fmt_residual((std::string(context) + ": effect not PSD").c_str(), -lo));
  if (hi > 1.0 + tol.psd)
    throw Error(ErrorKind::InvariantViolation,
                fmt_residual((std::string(context) + ": effect exceeds identity").c_str(), hi - 1.0));
}

double sum_residual(const std::vector<Matrix>& effects, Index dim) {
  Matrix total = Matrix::Zero(dim, dim);
  for (const auto& e : effects) total += e;
  return max_abs(total - identity(dim));
}

}  // namespace

State State::create(Matrix m, const Tolerances& tol) {
  if (m.rows() != m.cols() || m.rows() == 0) throw Error(ErrorKind::DimMismatch, "state must be a nonempty square matrix");
  const double herm = hermitian_residual(m);
  if (herm > tol.hermitian) throw Error(ErrorKind::InvariantViolation, fmt_residual("state not Hermitian", herm));
  const double lo = min_eigenvalue(m, tol);
  if (lo < -tol.psd) throw Error(ErrorKind::InvariantViolation, fmt_residual("state not PSD", -lo));
  const double tr_err = std::abs(m.trace() - Complex(1.0));
  if (tr_err > tol.trace) throw Error(ErrorKind::InvariantViolation, fmt_residual("state trace != 1", tr_err));
  return State(std::move(m));
}

Effect Effect::create(Matrix m, const Tolerances& tol) {
  check_effect(m, tol, "effect");
  return Effect(std::move(m));
}

Effect complement(const Effect& a) {
  return Effect::unchecked(identity(a.dim()) - a.mat());
}

Observable Observable::create(Labels labels, std::vector<Matrix> effects, const Tolerances& tol) {
  if (effects.empty()) throw Error(ErrorKind::InvariantViolation, "observable needs at least one outcome");
  const Index dim = effects.front().rows();
  Observable a(dim, std::move(labels), std::move(effects));
  a.validate(tol);
  return a;
}

Observable Observable::unchecked(Index dim, Labels labels, std::vector<Matrix> effects) {
  return Observable(dim, std::move(labels), std::move(effects));
}

void Observable::validate(const Tolerances& tol) const {
  if (labels_.size() != effects_.size())
    throw Error(ErrorKind::LabelMismatch, "observable: label count differs from effect count");
  require_unique(labels_, "observable");
  for (const auto& e : effects_) {
    if (e.rows() != dim_) throw Error(ErrorKind::DimMismatch, "observable: effects of different dimensions");
    check_effect(e, tol, "observable");
  }
  const double r = sum_residual(effects_, dim_);
  if (r > tol.eq) throw Error(ErrorKind::InvariantViolation, fmt_residual("observable effects do not sum to I", r));
}

BiObservable BiObservable::create(Labels labels1, Labels labels2, std::vector<Matrix> grid, const Tolerances& tol) {
  if (grid.empty()) throw Error(ErrorKind::InvariantViolation, "bi-observable needs at least one outcome");
  const Index dim = grid.front().rows();
  BiObservable c(dim, std::move(labels1), std::move(labels2), std::move(grid));
  c.validate(tol);
  return c;
}

BiObservable BiObservable::unchecked(Index dim, Labels labels1, Labels labels2, std::vector<Matrix> grid) {
  return BiObservable(dim, std::move(labels1), std::move(labels2), std::move(grid));
}

void BiObservable::validate(const Tolerances& tol) const {
  if (labels1_.size() * labels2_.size() != grid_.size())
    throw Error(ErrorKind::LabelMismatch, "bi-observable: grid is not the full label product");
  require_unique(labels1_, "bi-observable labels1");
  require_unique(labels2_, "bi-observable labels2");
  for (const auto& e : grid_) {
    if (e.rows() != dim_) throw Error(ErrorKind::DimMismatch, "bi-observable: effects of different dimensions");
    check_effect(e, tol, "bi-observable");
  }
  const double r = sum_residual(grid_, dim_);
  if (r > tol.eq) throw Error(ErrorKind::InvariantViolation, fmt_residual("bi-observable grid does not sum to I", r));
}

Observable BiObservable::flatten() const {
  Labels labels;
  labels.reserve(grid_.size());
  for (const auto& x : labels1_)
    for (const auto& y : labels2_) labels.push_back(pair_label(x, y));
  return Observable::unchecked(dim_, std::move(labels), grid_);
}

Distribution rho_distribution(const Observable& a, const State& rho, const Tolerances& tol) {
  if (a.dim() != rho.dim()) throw Error(ErrorKind::DimMismatch, "rho_distribution: observable and state dims differ");
  Distribution d{a.labels(), {}};
  d.probabilities.reserve(a.size());
  double total = 0.0;
  for (const auto& e : a.effects()) {
    const double p = (rho.mat() * e).trace().real();
    if (p < -tol.psd || p > 1.0 + tol.psd)
      throw Error(ErrorKind::InvariantViolation, fmt_residual("probability outside [0,1]", p));
    total += p;
    d.probabilities.push_back(std::clamp(p, 0.0, 1.0));
  }
  if (std::abs(total - 1.0) > tol.trace)
    throw Error(ErrorKind::InvariantViolation, fmt_residual("distribution does not sum to 1", std::abs(total - 1.0)));
  return d;
}

Observable bi_marginal(const BiObservable& c, Side which) {
  const std::size_t n1 = c.labels1().size();
  const std::size_t n2 = c.labels2().size();
  std::vector<Matrix> effects;
  if (which == Side::First) {
    for (std::size_t x = 0; x < n1; ++x) {
      Matrix sum = Matrix::Zero(c.dim(), c.dim());
      for (std::size_t y = 0; y < n2; ++y) sum += c.at(x, y);
      effects.push_back(std::move(sum));
    }
    return Observable::unchecked(c.dim(), c.labels1(), std::move(effects));
  }
  for (std::size_t y = 0; y < n2; ++y) {
    Matrix sum = Matrix::Zero(c.dim(), c.dim());
    for (std::size_t x = 0; x < n1; ++x) sum += c.at(x, y);
    effects.push_back(std::move(sum));
  }
  return Observable::unchecked(c.dim(), c.labels2(), std::move(effects));
}

BiObservable tensor_biobservable(const Observable& a, const Observable& b) {
  std::vector<Matrix> grid;
  grid.reserve(a.size() * b.size());
  for (const auto& ax : a.effects())
    for (const auto& by : b.effects()) grid.push_back(kron(ax, by));
  return BiObservable::unchecked(a.dim() * b.dim(), a.labels(), b.labels(), std::move(grid));
}

JointReport verify_joint_biobservable(const BiObservable& c, const Observable& a, const Observable& b,
                                      const Tolerances& tol) {
  if (c.labels1() != a.labels() || c.labels2() != b.labels())
    throw Error(ErrorKind::LabelMismatch, "verify_joint_biobservable: grid labels are not labels(a) x labels(b)");
  if (c.dim() != a.dim() || c.dim() != b.dim())
    throw Error(ErrorKind::DimMismatch, "verify_joint_biobservable: dimensions differ");
  JointReport report;
  report.residual_1 = distance(bi_marginal(c, Side::First), a);
  report.residual_2 = distance(bi_marginal(c, Side::Second), b);
  report.pass = report.residual_1 < tol.eq && report.residual_2 < tol.eq;
  return report;
}

double sharpness_residual(const Observable& a) {
  double r = 0.0;
  for (const auto& e : a.effects()) r = std::max(r, max_abs(e * e - e));
  return r;
}

bool is_sharp(const Observable& a, const Tolerances& tol) { return sharpness_residual(a) < tol.eq; }

BiObservable commuting_joint(const Observable& a, const Observable& b, const Tolerances& tol) {
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "commuting_joint: dimensions differ");
  std::vector<Matrix> grid;
  grid.reserve(a.size() * b.size());
  for (const auto& ax : a.effects()) {
    for (const auto& by : b.effects()) {
      const double c = max_abs(commutator(ax, by));
      if (c > tol.eq) throw Error(ErrorKind::NonCommuting, fmt_residual("commuting_joint: effects do not commute", c));
      grid.push_back(hermitize(Matrix(ax * by)));
    }
  }
  return BiObservable::unchecked(a.dim(), a.labels(), b.labels(), std::move(grid));
}

double distance(const Observable& a, const Observable& b) {
  if (a.labels() != b.labels()) throw Error(ErrorKind::LabelMismatch, "observables have different label lists");
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "observables have different dimensions");
  double r = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) r = std::max(r, max_abs(a.effect(x) - b.effect(x)));
  return r;
}

double distance(const BiObservable& a, const BiObservable& b) {
  if (a.labels1() != b.labels1() || a.labels2() != b.labels2())
    throw Error(ErrorKind::LabelMismatch, "bi-observables have different label grids");
  if (a.dim() != b.dim()) throw Error(ErrorKind::DimMismatch, "bi-observables have different dimensions");
  double r = 0.0;
  for (std::size_t k = 0; k < a.grid().size(); ++k) r = std::max(r, max_abs(a.grid()[k] - b.grid()[k]));
  return r;
}

double normalization_residual(const Observable& a) { return sum_residual(a.effects(), a.dim()); }

}  // namespace qinst
