#include "qinst/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "qinst/coexistence.hpp"
#include "qinst/families.hpp"
#include "qinst/measurement_models.hpp"
#include "qinst/scenario.hpp"

namespace qinst {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Inputs are generated with default tolerances; only the checks use the
// tolerances under test.
const Tolerances gen{};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Labels make_labels(std::size_t n) {
  Labels out;
  for (std::size_t k = 0; k < n; ++k) out.push_back(std::to_string(k));
  return out;
}

State rand_state(Rng& r, Index d) { return State::create(random_state(d, r), gen); }
Observable rand_obs(Rng& r, Index d, Index n) { return Observable::create(make_labels(n), random_povm(d, n, r, gen), gen); }
Instrument rand_inst(Rng& r, Index din, Index dout, Index n, Index kpo = 2) {
  return Instrument::from_kraus(make_labels(n), random_instrument(din, dout, n, kpo, r, gen), gen);
}
Operation rand_op(Rng& r, Index din, Index dout) {
  const KrausGrid g = random_instrument(din, dout, 1, 2, r, gen);
  return scale(Operation::unchecked(din, dout, g[0]), r.uniform());
}
HolevoSpec rand_holevo(Rng& r, Index din, Index dout, Index n) {
  HolevoSpec s{rand_obs(r, din, n), {}};
  for (Index x = 0; x < n; ++x) s.states.push_back(rand_state(r, dout));
  return s;
}
KrausSpec rand_kraus(Rng& r, Index din, Index dout, Index n) {
  const KrausGrid g = random_instrument(din, dout, n, 1, r, gen);
  KrausSpec s{make_labels(n), {}};
  for (const auto& row : g) s.ops.push_back(row[0]);
  return s;
}
Eigen::MatrixXd rand_stochastic(Rng& r, Index nx, Index nz) {
  Eigen::MatrixXd m(nx, nz);
  for (Index x = 0; x < nx; ++x) m.row(x) = random_simplex(nz, r).transpose();
  return m;
}
// Rank-one projections onto the columns of a random unitary.
Observable rand_sharp(Rng& r, Index d) {
  const Matrix u = random_unitary(d, r);
  std::vector<Matrix> effects;
  for (Index k = 0; k < d; ++k) effects.push_back(projector(u.col(k)));
  return Observable::create(make_labels(static_cast<std::size_t>(d)), std::move(effects), gen);
}
// Observable diagonal in the basis u with random weights per basis vector.
Observable rand_diagonal_obs(Rng& r, const Matrix& u, Index n) {
  const Index d = u.rows();
  std::vector<Matrix> effects(n, Matrix::Zero(d, d));
  for (Index k = 0; k < d; ++k) {
    const RealVector p = random_simplex(n, r);
    for (Index x = 0; x < n; ++x) effects[x] += p(x) * projector(u.col(k));
  }
  return Observable::create(make_labels(n), std::move(effects), gen);
}
// PSD operators summing to a random state.
std::vector<Matrix> rand_betas(Rng& r, Index d, Index n) {
  const Matrix s = psd_sqrt(random_state(d, r), gen);
  std::vector<Matrix> out;
  for (const auto& e : random_povm(d, n, r, gen)) out.push_back(s * e * s);
  return out;
}
BiInstrument rand_bi(Rng& r, Index din, Index dout, Index n1, Index n2) {
  const KrausGrid g = random_instrument(din, dout, n1 * n2, 2, r, gen);
  std::vector<Operation> ops;
  for (const auto& row : g) ops.push_back(Operation::unchecked(din, dout, row));
  return BiInstrument::create(make_labels(n1), make_labels(n2), std::move(ops), gen);
}

double map_to(const Operation& op, const std::function<Matrix(const Matrix&)>& f) {
  return max_abs(choi(op) - choi_of_map(f, op.dim_in(), op.dim_out()));
}

class Suite {
 public:
  explicit Suite(const SelftestOptions& o) : opt_(o) {}

  Index dim(int t) const { return opt_.dims[static_cast<std::size_t>(t) % opt_.dims.size()]; }
  Index dim2(int t) const {
    return opt_.dims[(static_cast<std::size_t>(t) / opt_.dims.size() + 1) % opt_.dims.size()];
  }
  const Tolerances& tol() const { return opt_.tol; }

  void add(const char* module, const char* name, double bound, bool upper, const std::function<double(Rng&, int)>& body,
           int trials = -1) {
    PropertyResult p{module, name, upper ? 0.0 : kInf, bound, upper};
    Rng rng(splitmix(opt_.seed ^ splitmix(static_cast<std::uint64_t>(results_.size()) + 1)));
    const int n = trials < 0 ? opt_.trials : trials;
    for (int t = 0; t < n; ++t) {
      double v;
      try {
        v = body(rng, t);
      } catch (const Error&) {
        v = upper ? kInf : -kInf;
      }
      if (std::isnan(v)) v = upper ? kInf : -kInf;
      p.value = upper ? std::max(p.value, v) : std::min(p.value, v);
    }
    results_.push_back(std::move(p));
  }

  std::vector<PropertyResult> take() { return std::move(results_); }

 private:
  const SelftestOptions& opt_;
  std::vector<PropertyResult> results_;
};

void linalg_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("linalg", "kron is associative", eq, true, [](Rng& r, int) {
    const Matrix a = r.ginibre(2, 3), b = r.ginibre(3, 2), c = r.ginibre(2, 2);
    return max_abs(kron(kron(a, b), c) - kron(a, kron(b, c)));
  });
  s.add("linalg", "partial trace is linear and trace preserving", eq, true, [&s](Rng& r, int t) {
    const Index d1 = s.dim(t), d2 = s.dim2(t);
    const Matrix m = r.ginibre(d1 * d2, d1 * d2), n = r.ginibre(d1 * d2, d1 * d2);
    const Complex a = r.complex_normal(), b = r.complex_normal();
    double worst = 0.0;
    for (Keep k : {Keep::First, Keep::Second}) {
      const Matrix mix = a * m + b * n;
      worst = std::max(worst, max_abs(partial_trace(mix, d1, d2, k) -
                                      (a * partial_trace(m, d1, d2, k) + b * partial_trace(n, d1, d2, k))));
      worst = std::max(worst, std::abs(partial_trace(m, d1, d2, k).trace() - m.trace()));
    }
    const Matrix x = r.ginibre(d1, d1), y = r.ginibre(d2, d2);
    return std::max(worst, std::abs(kron(x, y).trace() - x.trace() * y.trace()));
  });
  s.add("linalg", "psd_sqrt squares back", 10 * eq, true, [](Rng& r, int t) {
    const Index d = 2 + t % 7;
    const Matrix m = random_state(d, r) * 2.0;
    const Matrix q = psd_sqrt(m, gen);
    return max_abs(q * q - m);
  });
  s.add("linalg", "eigendecomposition reconstructs and is unitary", eq, true, [](Rng& r, int) {
    const Matrix h = random_hermitian(4, r);
    const auto e = hermitian_eig(h, gen);
    const Matrix v = e.vectors;
    const Matrix back = v * e.values.cast<Complex>().asDiagonal() * v.adjoint();
    return std::max(max_abs(back - h), max_abs(v.adjoint() * v - identity(4)));
  });
  s.add("linalg", "seeded generators are reproducible", eq, true, [&s](Rng& r, int t) {
    const std::uint64_t seed = static_cast<std::uint64_t>(r.uniform() * 1e12);
    const Index d = s.dim(t);
    Rng a(seed), b(seed);
    double worst = max_abs(random_state(d, a) - random_state(d, b));
    const auto ia = random_instrument(d, d, 2, 2, a, gen), ib = random_instrument(d, d, 2, 2, b, gen);
    for (std::size_t x = 0; x < ia.size(); ++x)
      for (std::size_t k = 0; k < ia[x].size(); ++k) worst = std::max(worst, max_abs(ia[x][k] - ib[x][k]));
    return worst == 0.0 ? 0.0 : kInf;
  });
}

void object_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("quantum_objects", "observables sum to identity", eq, true, [&s](Rng& r, int t) {
    return normalization_residual(rand_obs(r, s.dim(t), 2 + t % 3));
  });
  s.add("quantum_objects", "rho distributions sum to one", s.tol().trace, true, [&s](Rng& r, int t) {
    const auto d = rho_distribution(rand_obs(r, s.dim(t), 3), rand_state(r, s.dim(t)), s.tol());
    double sum = 0.0;
    for (double p : d.probabilities) sum += p;
    return std::abs(sum - 1.0);
  });
  s.add("quantum_objects", "tensor bi-observable marginal is A_x (x) I", eq, true, [&s](Rng& r, int t) {
    const Observable a = rand_obs(r, s.dim(t), 2), b = rand_obs(r, s.dim2(t), 3);
    const Observable m = bi_marginal(tensor_biobservable(a, b), Side::First);
    double worst = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x)
      worst = std::max(worst, max_abs(m.effect(x) - kron(a.effect(x), identity(b.dim()))));
    return worst;
  });
  s.add("quantum_objects", "sharp effects have spectrum in {0,1}", s.tol().psd, true, [&s](Rng& r, int t) {
    const Observable a = rand_sharp(r, s.dim(t));
    if (!is_sharp(a, s.tol())) return kInf;
    double worst = 0.0;
    for (const auto& e : a.effects()) {
      const auto eig = hermitian_eig(e, gen);
      for (Index k = 0; k < eig.values.size(); ++k)
        worst = std::max(worst, std::min(std::abs(eig.values(k)), std::abs(eig.values(k) - 1.0)));
    }
    return worst;
  });
}

void operation_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("operations", "dual map satisfies tr[b J(m)] = tr[J*(b) m]", eq, true, [&s](Rng& r, int t) {
    const Operation op = rand_op(r, s.dim(t), s.dim2(t));
    const Matrix b = random_hermitian(s.dim2(t), r), m = random_hermitian(s.dim(t), r);
    return std::abs((b * qinst::apply(op, m)).trace() - (dual_apply(op, b) * m).trace());
  });
  s.add("operations", "dual of a composition reverses the duals", eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const Operation j1 = rand_op(r, d, d2), j2 = rand_op(r, d2, d);
    const Operation both = compose(j1, j2);
    double worst = 0.0;
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) {
        const Matrix e = matrix_unit(d, i, j);
        worst = std::max(worst, max_abs(dual_apply(both, e) - dual_apply(j1, dual_apply(j2, e))));
      }
    return worst;
  });
  s.add("operations", "operations do not increase trace", s.tol().trace, true, [&s](Rng& r, int t) {
    const Operation op = rand_op(r, s.dim(t), s.dim2(t));
    const double tr = trace_real(qinst::apply(op, rand_state(r, s.dim(t)).mat()));
    return std::max({0.0, tr - 1.0, -tr});
  });
  s.add("operations", "Kraus operators recovered from the Choi matrix give the same map", 10 * eq, true,
        [&s](Rng& r, int t) {
          const Operation op = rand_op(r, s.dim(t), s.dim2(t));
          return map_distance(op, kraus_from_choi(choi(op), op.dim_in(), op.dim_out(), gen));
        });
  s.add("operations", "Choi matrices are positive", s.tol().psd, true, [&s](Rng& r, int t) {
    return std::max(0.0, -min_eigenvalue(choi(rand_op(r, s.dim(t), s.dim2(t))), gen));
  });
}

void instrument_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("instruments", "combinators return instruments", eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const Instrument i = rand_inst(r, d, d2, 2), j = rand_inst(r, d2, d, 3), i2 = rand_inst(r, d, d2, 2);
    const BiInstrument seq = sequential_product(i, j);
    const Instrument flat = tensor_instrument(i, j).flatten();
    const std::vector<Instrument> all = {
        seq.flatten(),
        conditioned(j, i),
        then_instrument(i, j),
        bi_marginal_instrument(seq, Side::First),
        bi_marginal_instrument(seq, Side::Second),
        reduced_instrument(flat, d2, d, Keep::First),
        reduced_instrument(flat, d2, d, Keep::Second),
        convex_combination({i, i2}, {0.3, 0.7}, gen),
        post_process(i, rand_stochastic(r, 2, 3), make_labels(3), gen),
    };
    double worst = 0.0;
    for (const auto& x : all) worst = std::max(worst, channel_residual(x.channel()));
    return worst;
  });
  s.add("instruments", "conditioned and then are marginals of the sequential product", eq, true, [&s](Rng& r, int t) {
    const Instrument i = rand_inst(r, s.dim(t), s.dim2(t), 2), j = rand_inst(r, s.dim2(t), s.dim(t), 3);
    const BiInstrument seq = sequential_product(i, j);
    return std::max(map_distance(conditioned(j, i), bi_marginal_instrument(seq, Side::Second)),
                    map_distance(then_instrument(i, j), bi_marginal_instrument(seq, Side::First)));
  });
  s.add("instruments", "bi-instrument marginals share one channel", eq, true, [&s](Rng& r, int t) {
    const BiInstrument k = rand_bi(r, s.dim(t), s.dim2(t), 2, 3);
    const Operation c = k.channel();
    return std::max(map_distance(c, bi_marginal_instrument(k, Side::First).channel()),
                    map_distance(c, bi_marginal_instrument(k, Side::Second).channel()));
  });
  s.add("instruments", "Born rule matches the measured observable", eq, true, [&s](Rng& r, int t) {
    const Instrument i = rand_inst(r, s.dim(t), s.dim2(t), 3);
    const State rho = rand_state(r, s.dim(t));
    const auto p = born_distribution(i, rho, s.tol()), q = rho_distribution(measured_observable(i), rho, s.tol());
    double worst = 0.0;
    for (std::size_t x = 0; x < p.probabilities.size(); ++x)
      worst = std::max(worst, std::abs(p.probabilities[x] - q.probabilities[x]));
    return worst;
  });
  s.add("instruments", "mixtures mix channels and measured observables", eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const Instrument a = rand_inst(r, d, d2, 2), b = rand_inst(r, d, d2, 2), c = rand_inst(r, d, d2, 2);
    const RealVector w = random_simplex(3, r);
    const Instrument mix = convex_combination({a, b, c}, {w(0), w(1), w(2)}, gen);
    const Operation chan = sum({scale(a.channel(), w(0)), scale(b.channel(), w(1)), scale(c.channel(), w(2))});
    double worst = map_distance(mix.channel(), chan);
    const Observable m = measured_observable(mix);
    const Observable ma = measured_observable(a), mb = measured_observable(b), mc = measured_observable(c);
    for (std::size_t x = 0; x < m.size(); ++x)
      worst = std::max(worst, max_abs(m.effect(x) - (w(0) * ma.effect(x) + w(1) * mb.effect(x) + w(2) * mc.effect(x))));
    return worst;
  });
  s.add("instruments", "tensor instrument identities", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d1 = s.dim(t), d2 = s.dim2(t), o1 = 2, o2 = 3;
    const Instrument i = rand_inst(r, d1, o1, 2), j = rand_inst(r, d2, o2, 2);
    const BiInstrument k = tensor_instrument(i, j);
    const Observable ki = measured_observable(i), kj = measured_observable(j);
    double worst = 0.0;
    for (std::size_t x = 0; x < i.size(); ++x)
      for (std::size_t y = 0; y < j.size(); ++y)
        worst = std::max(worst, max_abs(dual_apply(k.at(x, y), identity(o1 * o2)) - kron(ki.effect(x), kj.effect(y))));
    const MixedMarginals mm = mixed_marginals(k, o1, o2);
    for (std::size_t x = 0; x < i.size(); ++x) {
      const Operation& op = mm.marginal1_keep1.operation(x);
      worst = std::max(worst, map_to(op, [&](const Matrix& m) {
                         return qinst::apply(i.operation(x), partial_trace(m, d1, d2, Keep::First));
                       }));
      const Matrix rho1 = rand_state(r, d1).mat();
      worst = std::max(worst, max_abs(qinst::apply(op, kron(rho1, identity(d2))) / static_cast<double>(d2) -
                                      qinst::apply(i.operation(x), rho1)));
    }
    for (std::size_t y = 0; y < j.size(); ++y) {
      const Matrix rho2 = rand_state(r, d2).mat();
      worst = std::max(worst, max_abs(qinst::apply(mm.marginal2_keep2.operation(y), kron(identity(d1), rho2)) /
                                          static_cast<double>(d1) -
                                      qinst::apply(j.operation(y), rho2)));
    }
    return worst;
  });
  s.add("instruments", "commuting instruments have matching duals and fixed measured observables", eq, true,
        [&s](Rng& r, int t) {
          const Matrix u = random_unitary(s.dim(t), r);
          const Instrument i = lueders(rand_diagonal_obs(r, u, 2), gen), j = lueders(rand_diagonal_obs(r, u, 3), gen);
          double worst = map_distance(sequential_product(i, j), sequential_product(j, i).transposed());
          const Observable ii = measured_observable(i), jj = measured_observable(j);
          for (std::size_t x = 0; x < i.size(); ++x)
            for (std::size_t y = 0; y < j.size(); ++y)
              worst = std::max(worst, max_abs(dual_apply(i.operation(x), jj.effect(y)) -
                                              dual_apply(j.operation(y), ii.effect(x))));
          worst = std::max(worst, distance(conditioned_observable(ii, j), ii));
          return std::max(worst, distance(conditioned_observable(jj, i), jj));
        });
  s.add("instruments", "observable sequential product equals the conditioned observable", eq, true,
        [&s](Rng& r, int t) {
          const Instrument i = rand_inst(r, s.dim(t), s.dim2(t), 2);
          const Observable b = rand_obs(r, s.dim2(t), 3);
          return distance(obs_sequential_product(measured_observable(i), i, b, s.tol()), conditioned_observable(b, i));
        });
}

void family_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("families", "closed-form compositions match the generic product", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const HolevoSpec h1 = rand_holevo(r, d, d2, 2), h2 = rand_holevo(r, d2, d, 3);
    double worst = map_distance(holevo(holevo_compose_closed_form(h1, h2, gen), gen),
                                sequential_product(holevo(h1, gen), holevo(h2, gen)));
    const KrausSpec k1 = rand_kraus(r, d, d2, 2), k2 = rand_kraus(r, d2, d, 2);
    std::vector<Operation> grid;
    for (const auto& a : k1.ops)
      for (const auto& b : k2.ops) grid.push_back(Operation::unchecked(d, d, {b * a}));
    worst = std::max(worst, map_distance(BiInstrument::unchecked(k1.labels, k2.labels, grid),
                                         sequential_product(kraus_instrument(k1, gen), kraus_instrument(k2, gen))));
    const Instrument k = rand_inst(r, d, d2, 2);
    worst = std::max(worst, map_distance(holevo(arbitrary_then_holevo(k, h2, gen), gen),
                                         sequential_product(k, holevo(h2, gen))));
    const Instrument k3 = rand_inst(r, d2, d, 3);
    return std::max(worst, map_distance(holevo(holevo_then_arbitrary(h1, k3, gen), gen),
                                        sequential_product(holevo(h1, gen), k3)));
  });
  s.add("families", "Holevo and Kraus detection round-trip", 10 * eq, true, [&s](Rng& r, int t) {
    const HolevoSpec h = rand_holevo(r, s.dim(t), s.dim2(t), 3);
    const auto found = detect_holevo(holevo(h, gen), s.tol());
    if (!found) return kInf;
    double worst = distance(found->observable, h.observable);
    for (std::size_t x = 0; x < h.states.size(); ++x)
      worst = std::max(worst, max_abs(found->states[x].mat() - h.states[x].mat()));
    const KrausSpec k = rand_kraus(r, s.dim(t), s.dim2(t), 3);
    const Instrument ki = kraus_instrument(k, gen);
    const auto kfound = detect_kraus(ki, s.tol());
    if (!kfound) return kInf;
    return std::max(worst, map_distance(kraus_instrument(*kfound, gen), ki));
  });
  s.add("families", "post-processing a shared-state Holevo instrument stays Holevo", eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const State alpha = rand_state(r, d2);
    const HolevoSpec h{rand_obs(r, d, 3), {alpha, alpha, alpha}};
    const Eigen::MatrixXd lambda = rand_stochastic(r, 3, 2);
    const auto found = detect_holevo(post_process(holevo(h, gen), lambda, make_labels(2), gen), s.tol());
    if (!found) return kInf;
    double worst = 0.0;
    for (Index z = 0; z < 2; ++z) {
      Matrix b = Matrix::Zero(d, d);
      for (Index x = 0; x < 3; ++x) b += lambda(x, z) * h.observable.effect(x);
      worst = std::max(worst, max_abs(found->observable.effect(z) - b));
    }
    return worst;
  });
  s.add("families", "trivial instruments measure identity observables", eq, true, [&s](Rng& r, int t) {
    const auto betas = rand_betas(r, s.dim2(t), 3);
    const Observable m = measured_observable(trivial(s.dim(t), make_labels(3), betas, gen));
    double worst = 0.0;
    for (std::size_t y = 0; y < betas.size(); ++y)
      worst = std::max(worst, max_abs(m.effect(y) - trace_real(betas[y]) * identity(s.dim(t))));
    return worst;
  });
  s.add("families", "Holevo mixtures with shared states", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const HolevoSpec a = rand_holevo(r, d, d2, 3);
    const HolevoSpec b{rand_obs(r, d, 3), a.states};
    const RealVector w = random_simplex(2, r);
    const HolevoSpec mix = convex_holevo({a, b}, {w(0), w(1)}, gen);
    return map_distance(holevo(mix, gen), convex_combination({holevo(a, gen), holevo(b, gen)}, {w(0), w(1)}, gen));
  });
  s.add("families", "mixed-state Holevo mixtures follow the weighted state formula", 10 * eq, true,
        [&s](Rng& r, int t) {
          const Index d = s.dim(t), d2 = s.dim2(t), n = 3;
          std::vector<HolevoSpec> specs;
          const Observable shared = rand_obs(r, d, n);
          for (int k = 0; k < 3; ++k) {
            HolevoSpec h{shared, {}};
            if (t % 2 == 0) {
              // Identity observables c_x I with their own states.
              const RealVector c = random_simplex(n, r);
              std::vector<Matrix> eff;
              for (Index x = 0; x < n; ++x) eff.push_back(c(x) * identity(d));
              h.observable = Observable::create(make_labels(n), eff, gen);
            }
            for (Index x = 0; x < n; ++x) h.states.push_back(rand_state(r, d2));
            specs.push_back(h);
          }
          const RealVector w = random_simplex(3, r);
          const std::vector<double> wv = {w(0), w(1), w(2)};
          std::vector<Instrument> is;
          for (const auto& h : specs) is.push_back(holevo(h, gen));
          const auto found = detect_holevo(convex_combination(is, wv, gen), s.tol());
          if (!found) return kInf;
          const auto expected = mixture_holevo_states(specs, wv, gen);
          double worst = 0.0;
          for (Index x = 0; x < n; ++x) {
            if (!expected[x]) continue;
            worst = std::max(worst, max_abs(found->states[x].mat() - expected[x]->mat()));
          }
          return worst;
        });
  s.add("families", "convex tensor product marginals", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t);
    const Instrument i = rand_inst(r, d, 2, 2), j = rand_inst(r, d, 3, 2);
    const std::vector<State> alphas = {rand_state(r, 2), rand_state(r, 2)};
    const std::vector<State> betas = {rand_state(r, 3), rand_state(r, 3)};
    const RealVector w = random_simplex(4, r);
    const std::vector<double> lambda = {w(0), w(1)}, mu = {w(2), w(3)};
    const double lam = w(0) + w(1), mutot = w(2) + w(3);
    const BiInstrument k = convex_tensor_product(i, j, alphas, betas, lambda, mu, gen);
    double worst = channel_residual(k.channel());
    const MixedMarginals mm = mixed_marginals(k, 2, 3);
    const Observable ii = measured_observable(i), jj = measured_observable(j);
    for (std::size_t x = 0; x < 2; ++x) {
      worst = std::max(worst, map_to(mm.marginal1_keep1.operation(x), [&](const Matrix& m) {
                         return Matrix(lam * qinst::apply(i.operation(x), m) + mu[x] * m.trace() * alphas[x].mat());
                       }));
    }
    for (std::size_t y = 0; y < 2; ++y) {
      worst = std::max(worst, map_to(mm.marginal2_keep2.operation(y), [&](const Matrix& m) {
                         return Matrix(lambda[y] * m.trace() * betas[y].mat() + mutot * qinst::apply(j.operation(y), m));
                       }));
    }
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        worst = std::max(worst, max_abs(dual_apply(k.at(x, y), identity(6)) -
                                        (lambda[y] * ii.effect(x) + mu[x] * jj.effect(y))));
    return worst;
  });
  s.add("families", "Holevo pairs with agreeing composition orders commute", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t);
    const State gamma = rand_state(r, d);
    const RealVector a = random_simplex(2, r), b = random_simplex(3, r);
    std::vector<Matrix> ea, eb;
    for (Index x = 0; x < 2; ++x) ea.push_back(a(x) * identity(d));
    for (Index y = 0; y < 3; ++y) eb.push_back(b(y) * identity(d));
    const HolevoSpec ha{Observable::create(make_labels(2), ea, gen), {gamma, gamma}};
    const HolevoSpec hb{Observable::create(make_labels(3), eb, gen), {gamma, gamma, gamma}};
    const Instrument i = holevo(ha, gen), j = holevo(hb, gen);
    double worst = map_distance(sequential_product(i, j), sequential_product(j, i).transposed());
    for (const auto& x : ea)
      for (const auto& y : eb) worst = std::max(worst, max_abs(commutator(x, y)));
    worst = std::max(worst, distance(conditioned_observable(measured_observable(i), j), measured_observable(i)));
    return std::max(worst, distance(conditioned_observable(measured_observable(j), i), measured_observable(j)));
  });
  s.add("families", "commuting observables can still give order-dependent Holevo products", 1e-6, false,
        [&s](Rng& r, int t) {
          const Index d = s.dim(t);
          const Matrix u = random_unitary(d, r);
          const State gamma = rand_state(r, d);
          const HolevoSpec ha{rand_diagonal_obs(r, u, 2), {gamma, gamma}};
          const HolevoSpec hb{rand_diagonal_obs(r, u, 2), {gamma, gamma}};
          const Instrument i = holevo(ha, gen), j = holevo(hb, gen);
          return map_distance(sequential_product(i, j), sequential_product(j, i).transposed());
        });
}

void coexistence_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("coexistence", "joint constructions pass their verifiers", 10 * eq, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const Instrument i = rand_inst(r, d, d2, 2);
    const auto betas = rand_betas(r, 2, 2);
    const Labels bl = {"b0", "b1"};
    const Instrument partner = trivial(d, bl, betas, gen);
    const BiInstrument k = trivial_joint(i, bl, betas, gen);
    const auto c1 = verify_joint_instrument(k, i, partner, s.tol());
    double worst = std::max(c1.residual(), channel_residual(k.channel()));

    const Eigen::MatrixXd lambda = rand_stochastic(r, 2, 3);
    const BiInstrument l = postprocess_joint(k, lambda, make_labels(3), gen);
    worst = std::max(worst, verify_joint_instrument(l, post_process(i, lambda, make_labels(3), gen), partner, s.tol())
                                .residual());

    const Instrument pre = rand_inst(r, d2, d, 2);
    const BiInstrument m = condition_joint(k, pre);
    worst = std::max(worst,
                     verify_joint_instrument(m, conditioned(i, pre), conditioned(partner, pre), s.tol()).residual());

    const Matrix u = random_unitary(d2, r);
    const Observable a = rand_diagonal_obs(r, u, 2), b = rand_diagonal_obs(r, u, 3);
    const BiObservable dj = observable_joint_transfer(commuting_joint(a, b, s.tol()), i);
    worst = std::max(worst, verify_joint_biobservable(dj, conditioned_observable(a, i), conditioned_observable(b, i),
                                                      s.tol())
                                .residual());

    const Observable target = rand_obs(r, d2, 3);
    const BiObservable bj = measured_conditioned_joint(i, target);
    worst = std::max(worst, verify_joint_biobservable(bj, measured_observable(i), conditioned_observable(target, i),
                                                      s.tol())
                                .residual());

    const BiObservable cj = measured_joint_observable(c1);
    worst = std::max(worst,
                     verify_joint_biobservable(cj, measured_observable(i), measured_observable(partner), s.tol()).residual());
    const Observable mi = measured_observable(i);
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y)
        worst = std::max(worst, max_abs(cj.at(x, y) - trace_real(betas[y]) * mi.effect(x)));
    return worst;
  });
  s.add("coexistence", "planted violations are caught", 0.99, false, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    const Instrument i = rand_inst(r, d, d2, 2);
    const auto betas = rand_betas(r, 2, 2);
    const Labels bl = {"b0", "b1"};
    const BiInstrument k = trivial_joint(i, bl, betas, gen);
    const double delta = 100 * s.tol().eq;
    // Adds rho -> delta tr(rho) |0><0| to one grid entry.
    std::vector<Matrix> extra;
    for (Index c = 0; c < d; ++c) {
      Matrix e = Matrix::Zero(2 * d2, d);
      e(0, c) = std::sqrt(delta);
      extra.push_back(e);
    }
    const std::size_t target = static_cast<std::size_t>(r.uniform() * 4) % 4;
    std::vector<Operation> grid = k.grid();
    grid[target] = sum(grid[target], Operation::unchecked(d, 2 * d2, extra));
    const BiInstrument bad = BiInstrument::unchecked(k.labels1(), k.labels2(), grid);
    const auto cert = verify_joint_instrument(bad, i, trivial(d, bl, betas, gen), s.tol());
    return cert.pass() ? 0.0 : cert.residual() / delta;
  });
  s.add("coexistence", "noncommuting sharp qubit observables have no product joint", 0.5, true,
        [&s](Rng&, int) {
          const Observable z = Observable::create({"0", "1"}, {projector(basis_ket(2, 0)), projector(basis_ket(2, 1))}, gen);
          Vector plus = Vector::Ones(2) / std::sqrt(2.0), minus = plus;
          minus(1) = -minus(1);
          const Observable x = Observable::create({"+", "-"}, {projector(plus), projector(minus)}, gen);
          try {
            commuting_joint(z, x, s.tol());
          } catch (const Error& e) {
            return e.kind() == ErrorKind::NonCommuting ? 0.0 : 1.0;
          }
          return 1.0;
        },
        1);
  s.add("coexistence", "sharp instruments commute with conditioned observables", 10 * eq, true, [](Rng& r, int) {
    const Index d = 3;
    const Instrument l = lueders(rand_sharp(r, d), gen);
    const Operation u = Operation::unitary(random_unitary(d, r));
    std::vector<Operation> ops;
    for (const auto& op : l.operations()) ops.push_back(compose(op, u));
    const Instrument i = Instrument::create(l.labels(), ops, gen);
    const Observable a = rand_obs(r, d, 3);
    const Observable ii = measured_observable(i), cond = conditioned_observable(a, i);
    double worst = 0.0;
    for (const auto& x : ii.effects())
      for (const auto& y : cond.effects()) worst = std::max(worst, max_abs(commutator(x, y)));
    return worst;
  });
}

MeasurementModel rand_model(Rng& r, Index d, Index k, Index n_probe, Index kpo = 2) {
  return MeasurementModel::create(d, k, rand_inst(r, d, d * k, 2, kpo), rand_obs(r, k, n_probe), gen);
}

void model_properties(Suite& s) {
  const double eq = s.tol().eq;
  s.add("measurement_models", "measured instruments are instruments", 10 * eq, true, [&s](Rng& r, int t) {
    const MeasurementModel m = rand_model(r, 2, s.dim(t), 3);
    return std::max(channel_residual(measured_instrument(m).channel()),
                    channel_residual(measurement_instrument(m).channel()));
  });
  s.add("measurement_models", "model statistics match the model observable", eq, true, [&s](Rng& r, int t) {
    const MeasurementModel m = rand_model(r, 2, s.dim(t), 3);
    const State rho = rand_state(r, 2);
    const Observable obs = measured_observable(m);
    const BiInstrument mi = measurement_instrument(m);
    double worst = 0.0;
    for (std::size_t x = 0; x < obs.size(); ++x) {
      double p = 0.0;
      for (std::size_t y = 0; y < m.interaction().size(); ++y) p += trace_real(qinst::apply(mi.at(x, y), rho.mat()));
      worst = std::max(worst, std::abs(trace_real(rho.mat() * obs.effect(x)) - p));
    }
    return worst;
  });
  s.add("measurement_models", "model observable equals the measured instrument's observable", eq, true,
        [&s](Rng& r, int t) {
          const MeasurementModel m = rand_model(r, 2, s.dim(t), 3);
          return distance(measured_observable(m), measured_observable(measured_instrument(m)));
        });
  s.add("measurement_models", "ancilla preparation measures an identity observable", eq, true, [&s](Rng& r, int t) {
    const Index k = s.dim(t);
    const State xi = rand_state(r, k);
    const Instrument attach = Instrument::from_channel(tensor(Operation::identity(2), preparation(xi.mat(), gen)), "0", gen);
    const Observable probe = rand_obs(r, k, 3);
    const Observable obs = measured_observable(MeasurementModel::create(2, k, attach, probe, gen));
    double worst = 0.0;
    for (std::size_t x = 0; x < probe.size(); ++x)
      worst = std::max(worst, max_abs(obs.effect(x) - trace_real(xi.mat() * probe.effect(x)) * identity(2)));
    return worst;
  });
  s.add("measurement_models", "Holevo interactions give post-processed observables", 10 * eq, true,
        [&s](Rng& r, int t) {
          const Index d = 2, k = s.dim(t);
          const HolevoSpec h = rand_holevo(r, d, d * k, 2);
          const Observable probe = rand_obs(r, k, 3);
          const Observable obs = measured_observable(MeasurementModel::create(d, k, holevo(h, gen), probe, gen));
          double worst = 0.0;
          std::vector<double> colsum(2, 0.0);
          for (std::size_t x = 0; x < probe.size(); ++x) {
            Matrix expect = Matrix::Zero(d, d);
            for (std::size_t y = 0; y < 2; ++y) {
              const double w = trace_real(h.states[y].mat() * kron(identity(d), probe.effect(x)));
              colsum[y] += w;
              expect += w * h.observable.effect(y);
            }
            worst = std::max(worst, max_abs(obs.effect(x) - expect));
          }
          for (double c : colsum) worst = std::max(worst, std::abs(c - 1.0));
          // Product states and a sharp probe.
          const Observable sharp = rand_sharp(r, k);
          std::vector<State> betas, gammas, prods;
          for (int y = 0; y < 2; ++y) {
            betas.push_back(rand_state(r, d));
            gammas.push_back(rand_state(r, k));
            prods.push_back(State::create(kron(betas.back().mat(), gammas.back().mat()), gen));
          }
          const HolevoSpec hp{h.observable, prods};
          const MeasurementModel mp = MeasurementModel::create(d, k, holevo(hp, gen), sharp, gen);
          const Instrument mi = measured_instrument(mp);
          const BiInstrument full = measurement_instrument(mp);
          for (std::size_t x = 0; x < sharp.size(); ++x) {
            const Matrix& p = sharp.effect(x);
            worst = std::max(worst, map_to(mi.operation(x), [&](const Matrix& rho) {
                               Matrix out = Matrix::Zero(d, d);
                               for (int y = 0; y < 2; ++y)
                                 out += (rho * h.observable.effect(y)).trace() * trace_real(p * gammas[y].mat()) *
                                        betas[y].mat();
                               return out;
                             }));
            for (std::size_t y = 0; y < 2; ++y)
              worst = std::max(worst, map_to(full.at(x, y), [&](const Matrix& rho) {
                                 return Matrix((rho * h.observable.effect(y)).trace() *
                                               kron(betas[y].mat(), Matrix(p * gammas[y].mat() * p)));
                               }));
          }
          return worst;
        });
  s.add("measurement_models", "sequential model product observable is the nested dual", 100 * eq, true,
        [](Rng& r, int) {
          const Index d = 2, k = 2, k1 = 2;
          const MeasurementModel m = rand_model(r, d, k, 2);
          const MeasurementModel m1 = rand_model(r, d * k, k1, 2, 1);
          const MeasurementModel m2 = sequential_model_product(m, m1, gen);
          const Observable obs = measured_observable(m2);
          const Operation c = m.interaction().channel(), c1 = m1.interaction().channel();
          double worst = 0.0;
          for (std::size_t x = 0; x < m.probe().size(); ++x)
            for (std::size_t y = 0; y < m1.probe().size(); ++y) {
              const Matrix e = kron(kron(identity(d), m.probe().effect(x)), m1.probe().effect(y));
              worst = std::max(worst, max_abs(obs.effect(pair_label(m.probe().labels()[x], m1.probe().labels()[y])) -
                                              dual_apply(c, dual_apply(c1, e))));
            }
          return worst;
        });
  s.add("measurement_models", "sequential model product traces out K (x) K1 consistently", eq, true, [](Rng& r, int) {
    const Index d = 2, k = 2, k1 = 2;
    const MeasurementModel m = rand_model(r, d, k, 2);
    const MeasurementModel m1 = rand_model(r, d * k, k1, 2, 1);
    const MeasurementModel m2 = sequential_model_product(m, m1, gen);
    const Instrument joint = bi_marginal_instrument(measurement_instrument(m2), Side::First);
    const Instrument once = reduced_instrument(joint, d, k * k1, Keep::First);
    const Instrument twice = reduced_instrument(reduced_instrument(joint, d * k, k1, Keep::First), d, k, Keep::First);
    return std::max(map_distance(once, twice), map_distance(once, measured_instrument(m2)));
  });
}

void scenario_properties(Suite& s) {
  s.add("scenario_cli", "serialization round-trips objects", s.tol().eq * 1e-3, true, [&s](Rng& r, int t) {
    const Index d = s.dim(t), d2 = s.dim2(t);
    Scenario sc;
    sc.objects.push_back({"rho", rand_state(r, d)});
    sc.objects.push_back({"a", rand_obs(r, d, 3)});
    sc.objects.push_back({"op", rand_op(r, d, d2)});
    sc.objects.push_back({"i", rand_inst(r, d, d2, 2)});
    sc.objects.push_back({"k", rand_bi(r, d, d2, 2, 2)});
    sc.objects.push_back({"c", commuting_joint(rand_obs(r, d, 2), Observable::create({"1"}, {identity(d)}, gen), gen)});
    const Scenario back = parse_scenario(dump_json(serialize_scenario(sc)), "roundtrip");
    return scenario_distance(sc, back);
  });
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

bool SelftestReport::pass() const {
  for (const auto& p : properties)
    if (!p.pass()) return false;
  return true;
}

SelftestReport run_selftest(const SelftestOptions& options) {
  if (options.trials < 1) throw Error(ErrorKind::InvariantViolation, "selftest: trials must be >= 1");
  if (options.dims.empty()) throw Error(ErrorKind::DimMismatch, "selftest: need at least one dimension");
  for (Index d : options.dims)
    if (d < 1 || d > 8) throw Error(ErrorKind::DimMismatch, "selftest: dims must be in 1..8");
  options.tol.validate();
  Suite suite(options);
  linalg_properties(suite);
  object_properties(suite);
  operation_properties(suite);
  instrument_properties(suite);
  family_properties(suite);
  coexistence_properties(suite);
  model_properties(suite);
  scenario_properties(suite);
  return {options, suite.take()};
}

Json selftest_to_json(const SelftestReport& r) {
  Json props = Json::array();
  for (const auto& p : r.properties)
    props.push_back(Json{{"module", p.module},
                         {"name", p.name},
                         {"value", std::isfinite(p.value) ? Json(p.value) : Json(p.value > 0 ? "inf" : "-inf")},
                         {"bound", p.bound},
                         {"kind", p.upper ? "max" : "min"},
                         {"status", p.pass() ? "pass" : "fail"}});
  return Json{{"seed", r.options.seed},
              {"trials", r.options.trials},
              {"dims", r.options.dims},
              {"tolerances", to_json(r.options.tol)},
              {"properties", std::move(props)},
              {"status", r.pass() ? "pass" : "fail"}};
}

std::string selftest_to_text(const SelftestReport& r) {
  std::string out = "selftest seed=" + std::to_string(r.options.seed) + " trials=" + std::to_string(r.options.trials) +
                    " dims=";
  for (std::size_t n = 0; n < r.options.dims.size(); ++n) out += (n ? "," : "") + std::to_string(r.options.dims[n]);
  out += '\n';
  std::size_t passed = 0;
  for (const auto& p : r.properties) {
    out += (p.pass() ? "PASS  " : "FAIL  ") + p.module + ": " + p.name + "  " + (p.upper ? "max=" : "min=") +
           fmt(p.value) + (p.upper ? " < " : " > ") + fmt(p.bound) + '\n';
    passed += p.pass();
  }
  out += std::to_string(passed) + "/" + std::to_string(r.properties.size()) + " properties passed\n";
  return out;
}

}  // namespace qinst
