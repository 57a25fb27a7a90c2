#include "qinst/instruments.hpp"

#include <algorithm>
#include <cmath>

namespace qinst {

namespace {

void check_same_dims(const std::vector<Operation>& ops, const char* context) {
  if (ops.empty()) throw Error(ErrorKind::InvariantViolation, std::string(context) + ": no outcomes");
  for (const auto& op : ops)
    if (op.dim_in() != ops.front().dim_in() || op.dim_out() != ops.front().dim_out())
      throw Error(ErrorKind::DimMismatch, std::string(context) + ": operations have different dims");
}

void check_channel(const std::vector<Operation>& ops, const Tolerances& tol, const char* context) {
  for (const auto& op : ops) op.validate(tol);
  const double r = channel_residual(sum(ops));
  if (r > tol.eq)
    throw Error(ErrorKind::InvariantViolation,
                std::string(context) + ": summed operation is not a channel (residual " + std::to_string(r) + ")");
}

}  // namespace

Instrument Instrument::create(Labels labels, std::vector<Operation> ops, const Tolerances& tol) {
  Instrument i(std::move(labels), std::move(ops));
  i.validate(tol);
  return i;
}

Instrument Instrument::unchecked(Labels labels, std::vector<Operation> ops) {
  return Instrument(std::move(labels), std::move(ops));
}

Instrument Instrument::from_kraus(Labels labels, const KrausGrid& grid, const Tolerances& tol) {
  std::vector<Operation> ops;
  ops.reserve(grid.size());
  for (const auto& row : grid) {
    if (row.empty()) throw Error(ErrorKind::InvariantViolation, "from_kraus: outcome without Kraus operators");
    ops.push_back(Operation::unchecked(row.front().cols(), row.front().rows(), row));
  }
  return create(std::move(labels), std::move(ops), tol);
}

Instrument Instrument::from_channel(const Operation& channel, Label label, const Tolerances& tol) {
  return create({std::move(label)}, {channel}, tol);
}

void Instrument::validate(const Tolerances& tol) const {
  if (labels_.size() != ops_.size()) throw Error(ErrorKind::LabelMismatch, "instrument: label count differs from outcome count");
  require_unique(labels_, "instrument");
  check_same_dims(ops_, "instrument");
  check_channel(ops_, tol, "instrument");
}

BiInstrument BiInstrument::create(Labels labels1, Labels labels2, std::vector<Operation> grid, const Tolerances& tol) {
  BiInstrument k(std::move(labels1), std::move(labels2), std::move(grid));
  k.validate(tol);
  return k;
}

BiInstrument BiInstrument::unchecked(Labels labels1, Labels labels2, std::vector<Operation> grid) {
  return BiInstrument(std::move(labels1), std::move(labels2), std::move(grid));
}

void BiInstrument::validate(const Tolerances& tol) const {
  if (labels1_.size() * labels2_.size() != grid_.size())
    throw Error(ErrorKind::LabelMismatch, "bi-instrument: grid is not the full label product");
  require_unique(labels1_, "bi-instrument labels1");
  require_unique(labels2_, "bi-instrument labels2");
  check_same_dims(grid_, "bi-instrument");
  check_channel(grid_, tol, "bi-instrument");
}

Instrument BiInstrument::flatten() const {
  Labels labels;
  labels.reserve(grid_.size());
  for (const auto& x : labels1_)
    for (const auto& y : labels2_) labels.push_back(pair_label(x, y));
  return Instrument::unchecked(std::move(labels), grid_);
}

BiInstrument BiInstrument::transposed() const {
  std::vector<Operation> grid;
  grid.reserve(grid_.size());
  for (std::size_t y = 0; y < labels2_.size(); ++y)
    for (std::size_t x = 0; x < labels1_.size(); ++x) grid.push_back(at(x, y));
  return BiInstrument(labels2_, labels1_, std::move(grid));
}

double map_distance(const Instrument& a, const Instrument& b) {
  if (a.labels() != b.labels()) throw Error(ErrorKind::LabelMismatch, "instruments have different label lists");
  double r = 0.0;
  for (std::size_t x = 0; x < a.size(); ++x) r = std::max(r, map_distance(a.operation(x), b.operation(x)));
  return r;
}

double map_distance(const BiInstrument& a, const BiInstrument& b) {
  if (a.labels1() != b.labels1() || a.labels2() != b.labels2())
    throw Error(ErrorKind::LabelMismatch, "bi-instruments have different label grids");
  double r = 0.0;
  for (std::size_t k = 0; k < a.grid().size(); ++k) r = std::max(r, map_distance(a.grid()[k], b.grid()[k]));
  return r;
}

Distribution born_distribution(const Instrument& i, const State& rho, const Tolerances& tol) {
  if (i.dim_in() != rho.dim()) throw Error(ErrorKind::DimMismatch, "born_distribution: state dim != dim_in");
  Distribution d{i.labels(), {}};
  double total = 0.0;
  for (const auto& op : i.operations()) {
    const double p = trace_real(qinst::apply(op, rho.mat()));
    if (p < -tol.psd) throw Error(ErrorKind::InvariantViolation, "born_distribution: negative probability");
    total += p;
    d.probabilities.push_back(std::clamp(p, 0.0, 1.0));
  }
  if (std::abs(total - 1.0) > tol.trace)
    throw Error(ErrorKind::InvariantViolation, "born_distribution: probabilities do not sum to 1");
  return d;
}

State update_state(const Instrument& i, const Label& x, const State& rho, const Tolerances& tol) {
  if (i.dim_in() != rho.dim()) throw Error(ErrorKind::DimMismatch, "update_state: state dim != dim_in");
  const Matrix out = qinst::apply(i.operation(x), rho.mat());
  const double p = trace_real(out);
  if (p <= tol.trace) throw Error(ErrorKind::ZeroProbability, "update_state: outcome '" + x + "' has probability " + std::to_string(p));
  return State::create(hermitize(Matrix(out / p)), tol);
}

Observable measured_observable(const Instrument& i) {
  std::vector<Matrix> effects;
  effects.reserve(i.size());
  const Matrix id = identity(i.dim_out());
  for (const auto& op : i.operations()) effects.push_back(hermitize(dual_apply(op, id)));
  return Observable::unchecked(i.dim_in(), i.labels(), std::move(effects));
}

BiInstrument sequential_product(const Instrument& i, const Instrument& j) {
  if (i.dim_out() != j.dim_in()) throw Error(ErrorKind::DimMismatch, "sequential_product: dim_out(i) != dim_in(j)");
  std::vector<Operation> grid;
  grid.reserve(i.size() * j.size());
  for (const auto& ix : i.operations())
    for (const auto& jy : j.operations()) grid.push_back(compose(ix, jy));
  return BiInstrument::unchecked(i.labels(), j.labels(), std::move(grid));
}

Instrument conditioned(const Instrument& j, const Instrument& i) {
  if (i.dim_out() != j.dim_in()) throw Error(ErrorKind::DimMismatch, "conditioned: dim_out(i) != dim_in(j)");
  const Operation ibar = i.channel();
  std::vector<Operation> ops;
  ops.reserve(j.size());
  for (const auto& jy : j.operations()) ops.push_back(compose(ibar, jy));
  return Instrument::unchecked(j.labels(), std::move(ops));
}

Instrument then_instrument(const Instrument& i, const Instrument& j) {
  if (i.dim_out() != j.dim_in()) throw Error(ErrorKind::DimMismatch, "then_instrument: dim_out(i) != dim_in(j)");
  const Operation jbar = j.channel();
  std::vector<Operation> ops;
  ops.reserve(i.size());
  for (const auto& ix : i.operations()) ops.push_back(compose(ix, jbar));
  return Instrument::unchecked(i.labels(), std::move(ops));
}

Instrument bi_marginal_instrument(const BiInstrument& k, Side which) {
  const std::size_t n1 = k.labels1().size();
  const std::size_t n2 = k.labels2().size();
  std::vector<Operation> ops;
  if (which == Side::First) {
    for (std::size_t x = 0; x < n1; ++x) {
      std::vector<Operation> row;
      for (std::size_t y = 0; y < n2; ++y) row.push_back(k.at(x, y));
      ops.push_back(sum(row));
    }
    return Instrument::unchecked(k.labels1(), std::move(ops));
  }
  for (std::size_t y = 0; y < n2; ++y) {
    std::vector<Operation> col;
    for (std::size_t x = 0; x < n1; ++x) col.push_back(k.at(x, y));
    ops.push_back(sum(col));
  }
  return Instrument::unchecked(k.labels2(), std::move(ops));
}

Instrument reduced_instrument(const Instrument& k, Index n1, Index n2, Keep keep) {
  if (n1 < 1 || n2 < 1 || k.dim_out() != n1 * n2)
    throw Error(ErrorKind::BadFactorization, "reduced_instrument: dim_out != n1 * n2");
  const Operation trace_out = partial_trace_channel(n1, n2, keep);
  std::vector<Operation> ops;
  ops.reserve(k.size());
  for (const auto& op : k.operations()) ops.push_back(compose(op, trace_out));
  return Instrument::unchecked(k.labels(), std::move(ops));
}

MixedMarginals mixed_marginals(const BiInstrument& k, Index n1, Index n2) {
  if (n1 < 1 || n2 < 1 || k.dim_out() != n1 * n2)
    throw Error(ErrorKind::BadFactorization, "mixed_marginals: dim_out != n1 * n2");
  const Instrument m1 = bi_marginal_instrument(k, Side::First);
  const Instrument m2 = bi_marginal_instrument(k, Side::Second);
  return {reduced_instrument(m1, n1, n2, Keep::First), reduced_instrument(m2, n1, n2, Keep::Second),
          reduced_instrument(m2, n1, n2, Keep::First), reduced_instrument(m1, n1, n2, Keep::Second)};
}

Instrument convex_combination(const std::vector<Instrument>& is, const std::vector<double>& weights,
                              const Tolerances& tol) {
  if (is.empty() || is.size() != weights.size())
    throw Error(ErrorKind::BadWeights, "convex_combination: need one weight per instrument");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || w > 1.0 + tol.trace) throw Error(ErrorKind::BadWeights, "convex_combination: weight outside [0,1]");
    total += w;
  }
  if (std::abs(total - 1.0) > tol.trace) throw Error(ErrorKind::BadWeights, "convex_combination: weights do not sum to 1");
  for (const auto& i : is) {
    if (i.labels() != is.front().labels())
      throw Error(ErrorKind::LabelMismatch, "convex_combination: instruments have different outcome spaces");
    if (i.dim_in() != is.front().dim_in() || i.dim_out() != is.front().dim_out())
      throw Error(ErrorKind::DimMismatch, "convex_combination: instruments have different dims");
  }
  std::vector<Operation> ops;
  for (std::size_t x = 0; x < is.front().size(); ++x) {
    std::vector<Operation> parts;
    for (std::size_t n = 0; n < is.size(); ++n)
      if (weights[n] > 0.0) parts.push_back(scale(is[n].operation(x), weights[n]));
    ops.push_back(sum(parts));
  }
  return Instrument::unchecked(is.front().labels(), std::move(ops));
}

Instrument post_process(const Instrument& i, const Eigen::MatrixXd& lambda, Labels new_labels, const Tolerances& tol) {
  if (lambda.rows() != static_cast<Index>(i.size()) || lambda.cols() != static_cast<Index>(new_labels.size()))
    throw Error(ErrorKind::BadStochasticMatrix, "post_process: lambda must be |outcomes| x |new labels|");
  for (Index x = 0; x < lambda.rows(); ++x) {
    for (Index z = 0; z < lambda.cols(); ++z)
      if (!(lambda(x, z) >= 0.0) || lambda(x, z) > 1.0 + tol.trace)
        throw Error(ErrorKind::BadStochasticMatrix, "post_process: entry outside [0,1]");
    if (std::abs(lambda.row(x).sum() - 1.0) > tol.trace)
      throw Error(ErrorKind::BadStochasticMatrix, "post_process: row does not sum to 1");
  }
  require_unique(new_labels, "post_process");
  std::vector<Operation> ops;
  for (Index z = 0; z < lambda.cols(); ++z) {
    std::vector<Operation> parts;
    for (Index x = 0; x < lambda.rows(); ++x)
      if (lambda(x, z) > 0.0) parts.push_back(scale(i.operation(x), lambda(x, z)));
    ops.push_back(parts.empty() ? Operation::zero(i.dim_in(), i.dim_out()) : sum(parts));
  }
  return Instrument::unchecked(std::move(new_labels), std::move(ops));
}

BiInstrument tensor_instrument(const Instrument& i, const Instrument& j) {
  std::vector<Operation> grid;
  grid.reserve(i.size() * j.size());
  for (const auto& ix : i.operations())
    for (const auto& jy : j.operations()) grid.push_back(tensor(ix, jy));
  return BiInstrument::unchecked(i.labels(), j.labels(), std::move(grid));
}

Observable conditioned_observable(const Observable& a, const Instrument& i) {
  if (a.dim() != i.dim_out()) throw Error(ErrorKind::DimMismatch, "conditioned_observable: dim(a) != dim_out(i)");
  const Operation ibar = i.channel();
  std::vector<Matrix> effects;
  effects.reserve(a.size());
  for (const auto& e : a.effects()) effects.push_back(hermitize(dual_apply(ibar, e)));
  return Observable::unchecked(i.dim_in(), a.labels(), std::move(effects));
}

BiObservable conditioned_biobservable(const Observable& b, const Instrument& i) {
  if (b.dim() != i.dim_out()) throw Error(ErrorKind::DimMismatch, "conditioned_biobservable: dim(b) != dim_out(i)");
  std::vector<Matrix> grid;
  grid.reserve(i.size() * b.size());
  for (const auto& ix : i.operations())
    for (const auto& by : b.effects()) grid.push_back(hermitize(dual_apply(ix, by)));
  return BiObservable::unchecked(i.dim_in(), i.labels(), b.labels(), std::move(grid));
}

Observable obs_sequential_product(const Observable& a, const Instrument& i, const Observable& b, const Tolerances& tol) {
  if (b.dim() != i.dim_out()) throw Error(ErrorKind::DimMismatch, "obs_sequential_product: dim(b) != dim_out(i)");
  const Observable measured = measured_observable(i);
  if (measured.labels() != a.labels() || measured.dim() != a.dim() || distance(measured, a) > tol.eq)
    throw Error(ErrorKind::InstrumentDoesNotMeasureA, "obs_sequential_product: instrument does not measure a");
  return bi_marginal(conditioned_biobservable(b, i), Side::Second);
}

}  // namespace qinst
