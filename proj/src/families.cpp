#include "qinst/families.hpp"

#include <cmath>

namespace qinst {

namespace {

void check_weights(const std::vector<double>& weights, const Tolerances& tol, const char* context) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || w > 1.0 + tol.trace) throw Error(ErrorKind::BadWeights, std::string(context) + ": weight outside [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > tol.trace) throw Error(ErrorKind::BadWeights, std::string(context) + ": weights do not sum to 1");
}

Matrix maximally_mixed(Index dim) { return identity(dim) / static_cast<double>(dim); }

}  // namespace

void HolevoSpec::validate(const Tolerances& tol) const {
  observable.validate(tol);
  if (states.size() != observable.size())
    throw Error(ErrorKind::LabelMismatch, "Holevo spec: need one state per outcome");
  for (const auto& s : states)
    if (s.dim() != states.front().dim()) throw Error(ErrorKind::DimMismatch, "Holevo spec: states of different dims");
}

void KrausSpec::validate(const Tolerances& tol) const {
  if (ops.empty() || ops.size() != labels.size())
    throw Error(ErrorKind::LabelMismatch, "Kraus spec: need one operator per label");
  require_unique(labels, "Kraus spec");
  Matrix total = Matrix::Zero(ops.front().cols(), ops.front().cols());
  for (const auto& k : ops) {
    if (k.rows() != ops.front().rows() || k.cols() != ops.front().cols())
      throw Error(ErrorKind::DimMismatch, "Kraus spec: operators of different shapes");
    total += k.adjoint() * k;
  }
  const double r = max_abs(total - identity(total.rows()));
  if (r > tol.eq) throw Error(ErrorKind::InvariantViolation, "Kraus spec: sum K^*K != I (residual " + std::to_string(r) + ")");
}

Operation holevo_operation(const Matrix& a, const Matrix& sigma, const Tolerances& tol) {
  auto ea = hermitian_eig(a, tol);
  auto es = hermitian_eig(sigma, tol);
  if (ea.values.minCoeff() < -tol.psd || es.values.minCoeff() < -tol.psd)
    throw Error(ErrorKind::NotPSD, "holevo_operation: effect or state is not PSD");
  std::vector<Matrix> kraus;
  for (Index k = 0; k < ea.values.size(); ++k) {
    if (ea.values(k) <= 0.0) continue;
    for (Index m = 0; m < es.values.size(); ++m) {
      if (es.values(m) <= 0.0) continue;
      kraus.push_back(std::sqrt(ea.values(k) * es.values(m)) * es.vectors.col(m) * ea.vectors.col(k).adjoint());
    }
  }
  return Operation::unchecked(a.rows(), sigma.rows(), std::move(kraus));
}

Instrument holevo(const HolevoSpec& spec, const Tolerances& tol) {
  spec.validate(tol);
  std::vector<Operation> ops;
  ops.reserve(spec.states.size());
  for (std::size_t x = 0; x < spec.states.size(); ++x)
    ops.push_back(holevo_operation(spec.observable.effect(x), spec.states[x].mat(), tol));
  return Instrument::create(spec.observable.labels(), std::move(ops), tol);
}

BiInstrument holevo(const HolevoBiSpec& spec, const Tolerances& tol) {
  const auto& grid = spec.observable.grid();
  if (spec.states.size() != grid.size()) throw Error(ErrorKind::LabelMismatch, "Holevo bi-spec: need one state per grid entry");
  std::vector<Operation> ops;
  ops.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (spec.states[k])
      ops.push_back(holevo_operation(grid[k], spec.states[k]->mat(), tol));
    else
      ops.push_back(Operation::zero(spec.observable.dim(), spec.dim_out));
  }
  return BiInstrument::create(spec.observable.labels1(), spec.observable.labels2(), std::move(ops), tol);
}

Instrument kraus_instrument(const KrausSpec& spec, const Tolerances& tol) {
  spec.validate(tol);
  std::vector<Operation> ops;
  ops.reserve(spec.ops.size());
  for (const auto& k : spec.ops) ops.push_back(Operation::unchecked(k.cols(), k.rows(), {k}));
  return Instrument::create(spec.labels, std::move(ops), tol);
}

Instrument lueders(const Observable& a, const Tolerances& tol) {
  std::vector<Operation> ops;
  ops.reserve(a.size());
  for (const auto& e : a.effects()) ops.push_back(Operation::unchecked(a.dim(), a.dim(), {psd_sqrt(e, tol)}));
  return Instrument::create(a.labels(), std::move(ops), tol);
}

Instrument trivial(Index dim_in, Labels labels, const std::vector<Matrix>& betas, const Tolerances& tol) {
  if (betas.empty() || betas.size() != labels.size())
    throw Error(ErrorKind::LabelMismatch, "trivial: need one output operator per label");
  Matrix total = Matrix::Zero(betas.front().rows(), betas.front().rows());
  for (const auto& b : betas) {
    if (b.rows() != total.rows() || b.cols() != total.cols())
      throw Error(ErrorKind::DimMismatch, "trivial: output operators of different dims");
    if (min_eigenvalue(b, tol) < -tol.psd) throw Error(ErrorKind::NotPSD, "trivial: output operator is not PSD");
    total += b;
  }
  State::create(total, tol);
  std::vector<Operation> ops;
  ops.reserve(betas.size());
  for (const auto& b : betas) {
    const double t = trace_real(b);
    if (t <= tol.trace)
      ops.push_back(Operation::zero(dim_in, b.rows()));
    else
      ops.push_back(holevo_operation(t * identity(dim_in), b / t, tol));
  }
  return Instrument::create(std::move(labels), std::move(ops), tol);
}

HolevoBiSpec holevo_compose_closed_form(const HolevoSpec& first, const HolevoSpec& second, const Tolerances& tol) {
  first.validate(tol);
  second.validate(tol);
  if (first.states.front().dim() != second.observable.dim())
    throw Error(ErrorKind::DimMismatch, "holevo_compose_closed_form: output of first != input of second");
  const auto& a = first.observable;
  const auto& b = second.observable;
  std::vector<Matrix> c;
  std::vector<std::optional<State>> states;
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (std::size_t y = 0; y < b.size(); ++y) {
      const double w = (first.states[x].mat() * b.effect(y)).trace().real();
      c.push_back(w * a.effect(x));
      states.emplace_back(second.states[y]);
    }
  }
  return {BiObservable::unchecked(a.dim(), a.labels(), b.labels(), std::move(c)), std::move(states),
          second.states.front().dim()};
}

HolevoBiSpec arbitrary_then_holevo(const Instrument& k, const HolevoSpec& h, const Tolerances& tol) {
  h.validate(tol);
  if (k.dim_out() != h.observable.dim())
    throw Error(ErrorKind::DimMismatch, "arbitrary_then_holevo: dim_out(k) != dim of Holevo observable");
  const auto& a = h.observable;
  std::vector<Matrix> b;
  std::vector<std::optional<State>> states;
  for (const auto& kx : k.operations()) {
    for (std::size_t y = 0; y < a.size(); ++y) {
      b.push_back(hermitize(dual_apply(kx, a.effect(y))));
      states.emplace_back(h.states[y]);
    }
  }
  return {BiObservable::unchecked(k.dim_in(), k.labels(), a.labels(), std::move(b)), std::move(states),
          h.states.front().dim()};
}

HolevoBiSpec holevo_then_arbitrary(const HolevoSpec& h, const Instrument& k, const Tolerances& tol) {
  h.validate(tol);
  if (h.states.front().dim() != k.dim_in())
    throw Error(ErrorKind::DimMismatch, "holevo_then_arbitrary: Holevo output dim != dim_in(k)");
  const auto& a = h.observable;
  std::vector<Matrix> b;
  std::vector<std::optional<State>> states;
  for (std::size_t x = 0; x < a.size(); ++x) {
    for (const auto& ky : k.operations()) {
      const Matrix out = qinst::apply(ky, h.states[x].mat());
      const double t = trace_real(out);
      b.push_back(t * a.effect(x));
      if (t > tol.trace)
        states.emplace_back(State::unchecked(hermitize(Matrix(out / t))));
      else
        states.emplace_back(std::nullopt);
    }
  }
  return {BiObservable::unchecked(a.dim(), a.labels(), k.labels(), std::move(b)), std::move(states), k.dim_out()};
}

HolevoSpec convex_holevo(const std::vector<HolevoSpec>& specs, const std::vector<double>& weights,
                         const Tolerances& tol) {
  if (specs.empty() || specs.size() != weights.size())
    throw Error(ErrorKind::BadWeights, "convex_holevo: need one weight per spec");
  check_weights(weights, tol, "convex_holevo");
  const auto& ref = specs.front();
  std::vector<Matrix> effects(ref.observable.size(), Matrix::Zero(ref.observable.dim(), ref.observable.dim()));
  for (std::size_t n = 0; n < specs.size(); ++n) {
    const auto& s = specs[n];
    s.validate(tol);
    if (s.observable.labels() != ref.observable.labels())
      throw Error(ErrorKind::LabelMismatch, "convex_holevo: specs have different outcome spaces");
    for (std::size_t x = 0; x < s.states.size(); ++x) {
      if (s.states[x].dim() != ref.states[x].dim() || max_abs(s.states[x].mat() - ref.states[x].mat()) > tol.eq)
        throw Error(ErrorKind::StateMismatch, "convex_holevo: specs do not share their states");
      effects[x] += weights[n] * s.observable.effect(x);
    }
  }
  return {Observable::create(ref.observable.labels(), std::move(effects), tol), ref.states};
}

std::vector<std::optional<State>> mixture_holevo_states(const std::vector<HolevoSpec>& specs,
                                                        const std::vector<double>& weights, const Tolerances& tol) {
  if (specs.empty() || specs.size() != weights.size())
    throw Error(ErrorKind::BadWeights, "mixture_holevo_states: need one weight per spec");
  check_weights(weights, tol, "mixture_holevo_states");
  const auto& ref = specs.front();
  std::vector<std::optional<State>> out;
  for (std::size_t x = 0; x < ref.observable.size(); ++x) {
    double denom = 0.0;
    Matrix num = Matrix::Zero(ref.states[x].dim(), ref.states[x].dim());
    for (std::size_t n = 0; n < specs.size(); ++n) {
      if (specs[n].observable.labels() != ref.observable.labels())
        throw Error(ErrorKind::LabelMismatch, "mixture_holevo_states: specs have different outcome spaces");
      const double t = weights[n] * trace_real(specs[n].observable.effect(x));
      denom += t;
      num += t * specs[n].states[x].mat();
    }
    if (denom > tol.trace)
      out.emplace_back(State::unchecked(hermitize(Matrix(num / denom))));
    else
      out.emplace_back(std::nullopt);
  }
  return out;
}

namespace {

// Observable and candidate states shared by the Holevo detector and its defect.
struct HolevoCandidate {
  Observable observable;
  std::vector<State> states;
  double defect = 0.0;
};

HolevoCandidate holevo_candidate(const Instrument& i, const Tolerances& tol) {
  HolevoCandidate c{measured_observable(i), {}, 0.0};
  const Index n = i.dim_in();
  for (std::size_t x = 0; x < i.size(); ++x) {
    const Matrix& ax = c.observable.effect(x);
    if (max_abs(ax) <= tol.eq) {
      c.states.push_back(State::unchecked(maximally_mixed(i.dim_out())));
      continue;
    }
    const Matrix out = qinst::apply(i.operation(x), maximally_mixed(n));
    const Matrix alpha = hermitize(Matrix(out / trace_real(out)));
    for (Index j = 0; j < n; ++j) {
      for (Index k = 0; k < n; ++k) {
        // tr(E_jk A_x) = A_x(k, j)
        const Matrix expected = ax(k, j) * alpha;
        c.defect = std::max(c.defect, max_abs(qinst::apply(i.operation(x), matrix_unit(n, j, k)) - expected));
      }
    }
    c.states.push_back(State::unchecked(alpha));
  }
  return c;
}

}  // namespace

double holevo_defect(const Instrument& i, const Tolerances& tol) { return holevo_candidate(i, tol).defect; }

std::optional<HolevoSpec> detect_holevo(const Instrument& i, const Tolerances& tol) {
  HolevoCandidate c = holevo_candidate(i, tol);
  if (c.defect > tol.eq) return std::nullopt;
  return HolevoSpec{std::move(c.observable), std::move(c.states)};
}

double kraus_defect(const Instrument& i, const Tolerances& tol) {
  double worst = 0.0;
  for (const auto& op : i.operations()) {
    auto eig = hermitian_eig(choi(op), tol);
    if (eig.values.size() > 1) worst = std::max(worst, eig.values(eig.values.size() - 2));
  }
  return worst;
}

std::optional<KrausSpec> detect_kraus(const Instrument& i, const Tolerances& tol) {
  KrausSpec spec;
  spec.labels = i.labels();
  for (const auto& op : i.operations()) {
    auto eig = hermitian_eig(choi(op), tol);
    const Index top = eig.values.size() - 1;
    if (top > 0 && eig.values(top - 1) > tol.psd) return std::nullopt;
    Matrix k = Matrix::Zero(op.dim_out(), op.dim_in());
    if (eig.values(top) > tol.psd) {
      const double s = std::sqrt(eig.values(top));
      for (Index c = 0; c < op.dim_in(); ++c)
        for (Index r = 0; r < op.dim_out(); ++r) k(r, c) = s * eig.vectors(c * op.dim_out() + r, top);
    }
    spec.ops.push_back(std::move(k));
  }
  return spec;
}

BiInstrument convex_tensor_product(const Instrument& i, const Instrument& j, const std::vector<State>& alphas,
                                   const std::vector<State>& betas, const std::vector<double>& lambda,
                                   const std::vector<double>& mu, const Tolerances& tol) {
  if (i.dim_in() != j.dim_in()) throw Error(ErrorKind::DimMismatch, "convex_tensor_product: input dims differ");
  if (alphas.size() != i.size() || mu.size() != i.size() || betas.size() != j.size() || lambda.size() != j.size())
    throw Error(ErrorKind::LabelMismatch, "convex_tensor_product: parameter counts do not match outcome counts");
  std::vector<double> all(lambda);
  all.insert(all.end(), mu.begin(), mu.end());
  check_weights(all, tol, "convex_tensor_product");
  for (const auto& a : alphas)
    if (a.dim() != i.dim_out()) throw Error(ErrorKind::DimMismatch, "convex_tensor_product: alpha dim != dim_out(i)");
  for (const auto& b : betas)
    if (b.dim() != j.dim_out()) throw Error(ErrorKind::DimMismatch, "convex_tensor_product: beta dim != dim_out(j)");

  std::vector<Operation> grid;
  for (std::size_t x = 0; x < i.size(); ++x) {
    const Operation prep_alpha = preparation(alphas[x].mat(), tol);
    for (std::size_t y = 0; y < j.size(); ++y) {
      const Operation left = scale(tensor(i.operation(x), preparation(betas[y].mat(), tol)), lambda[y]);
      const Operation right = scale(tensor(prep_alpha, j.operation(y)), mu[x]);
      grid.push_back(sum(left, right));
    }
  }
  return BiInstrument::create(i.labels(), j.labels(), std::move(grid), tol);
}

}  // namespace qinst
