// Runs the acceptance criteria at their stated thresholds and prints one
// line per criterion. Exit status is nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "qinst/coexistence.hpp"
#include "qinst/families.hpp"
#include "qinst/measurement_models.hpp"
#include "qinst/scenario.hpp"
#include "qinst/selftest.hpp"

using namespace qinst;

namespace {

constexpr int kTrials = 100;
const Tolerances gen{};

Labels labels(Index n, const std::string& prefix = "o") {
  Labels l;
  for (Index x = 0; x < n; ++x) l.push_back(prefix + std::to_string(x));
  return l;
}
State rand_state(Rng& r, Index d) { return State::create(random_state(d, r)); }
Observable rand_obs(Rng& r, Index d, Index n) { return Observable::create(labels(n), random_povm(d, n, r)); }
Instrument rand_inst(Rng& r, Index din, Index dout, Index n, Index kpo = 2) {
  return Instrument::from_kraus(labels(n), random_instrument(din, dout, n, kpo, r));
}
Operation rand_op(Rng& r, Index din, Index dout) {
  return scale(Operation::unchecked(din, dout, random_instrument(din, dout, 1, 3, r)[0]), 0.5 + 0.5 * r.uniform());
}
HolevoSpec rand_holevo(Rng& r, Index din, Index dout, Index n) {
  HolevoSpec h{rand_obs(r, din, n), {}};
  for (Index x = 0; x < n; ++x) h.states.push_back(rand_state(r, dout));
  return h;
}
Eigen::MatrixXd rand_stochastic(Rng& r, Index nx, Index nz) {
  Eigen::MatrixXd m(nx, nz);
  for (Index x = 0; x < nx; ++x) m.row(x) = random_simplex(nz, r).transpose();
  return m;
}
std::vector<Matrix> rand_betas(Rng& r, Index d, Index n) {
  const Matrix s = psd_sqrt(random_state(d, r));
  std::vector<Matrix> out;
  for (const auto& e : random_povm(d, n, r)) out.push_back(s * e * s);
  return out;
}
Observable diagonal_obs(Rng& r, const Matrix& u, Index n) {
  std::vector<Matrix> effects(n, Matrix::Zero(u.rows(), u.rows()));
  for (Index k = 0; k < u.rows(); ++k) {
    const RealVector p = random_simplex(n, r);
    for (Index x = 0; x < n; ++x) effects[x] += p(x) * projector(u.col(k));
  }
  return Observable::create(labels(n), effects);
}
std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Line {
  bool pass = true;
  std::string detail;
  void bound(const char* what, double value, double limit) {
    const bool ok = value < limit;
    pass = pass && ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s%s=%.2e<%.0e%s", detail.empty() ? "" : "; ", what, value, limit, ok ? "" : "!");
    detail += buf;
  }
  void require(const char* what, bool ok) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + std::string(what) + (ok ? "" : " FAILED");
  }
};

Line duality() {
  Line line;
  double dual = 0.0, comp = 0.0;
  Rng r(101);
  for (Index d : {2, 3, 4}) {
    for (int t = 0; t < kTrials; ++t) {
      const Operation op = rand_op(r, d, d);
      const Matrix b = r.ginibre(d, d), m = r.ginibre(d, d);
      dual = std::max(dual, std::abs((b * qinst::apply(op, m)).trace() - (dual_apply(op, b) * m).trace()));
      const Operation j = rand_op(r, d, d);
      const Operation both = compose(op, j);
      for (Index i = 0; i < d; ++i)
        for (Index k = 0; k < d; ++k)
          comp = std::max(comp, max_abs(dual_apply(both, matrix_unit(d, i, k)) -
                                        dual_apply(op, dual_apply(j, matrix_unit(d, i, k)))));
    }
  }
  line.bound("duality", dual, 1e-9);
  line.bound("composition dual", comp, 1e-8);
  return line;
}

Line algebra() {
  Line line;
  double marg = 0.0, chan = 0.0;
  Rng r(202);
  for (int t = 0; t < kTrials; ++t) {
    const Index d = 2 + t % 3, d2 = 2 + (t / 3) % 3;
    const Instrument i = rand_inst(r, d, d2, 2), j = rand_inst(r, d2, d, 3);
    const BiInstrument k = sequential_product(i, j);
    marg = std::max({marg, map_distance(conditioned(j, i), bi_marginal_instrument(k, Side::Second)),
                     map_distance(then_instrument(i, j), bi_marginal_instrument(k, Side::First))});
    const BiInstrument g = BiInstrument::create(labels(2), labels(2, "p"),
                                                rand_inst(r, d, d2, 4).operations());
    for (const BiInstrument* b : {&k, &g})
      chan = std::max({chan, map_distance(bi_marginal_instrument(*b, Side::First).channel(), b->channel()),
                       map_distance(bi_marginal_instrument(*b, Side::Second).channel(), b->channel())});
  }
  line.bound("marginals", marg, 1e-8);
  line.bound("shared channel", chan, 1e-9);
  return line;
}

Line convexity() {
  Line line;
  double mix = 0.0, hol = 0.0, states = 0.0;
  Rng r(303);
  for (int t = 0; t < kTrials; ++t) {
    const Index d = 2 + t % 3, d2 = 2 + (t / 3) % 3;
    const Instrument a = rand_inst(r, d, d2, 3), b = rand_inst(r, d, d2, 3);
    const double w = r.uniform();
    const Instrument c = convex_combination({a, b}, {w, 1 - w});
    mix = std::max(mix, map_distance(c.channel(), sum(scale(a.channel(), w), scale(b.channel(), 1 - w))));
    const Observable mc = measured_observable(c), ma = measured_observable(a), mb = measured_observable(b);
    for (std::size_t x = 0; x < 3; ++x)
      mix = std::max(mix, max_abs(mc.effect(x) - (w * ma.effect(x) + (1 - w) * mb.effect(x))));

    const HolevoSpec h1 = rand_holevo(r, d, d2, 3);
    const HolevoSpec h2{rand_obs(r, d, 3), h1.states};
    hol = std::max(hol, map_distance(holevo(convex_holevo({h1, h2}, {w, 1 - w})),
                                     convex_combination({holevo(h1), holevo(h2)}, {w, 1 - w})));

    // Mixed-state families that stay Holevo: identity-proportional effects, or a shared observable.
    std::vector<HolevoSpec> specs;
    const Observable shared = rand_obs(r, d, 3);
    for (int k = 0; k < 3; ++k) {
      HolevoSpec s{shared, {}};
      if (t % 2 == 0) {
        const RealVector p = random_simplex(3, r);
        s.observable = Observable::create(labels(3), {p(0) * identity(d), p(1) * identity(d), p(2) * identity(d)});
      }
      for (int x = 0; x < 3; ++x) s.states.push_back(rand_state(r, d2));
      specs.push_back(s);
    }
    const RealVector lam = random_simplex(3, r);
    const std::vector<double> lv = {lam(0), lam(1), lam(2)};
    std::vector<Instrument> is;
    for (const auto& s : specs) is.push_back(holevo(s));
    const auto found = detect_holevo(convex_combination(is, lv));
    const auto expect = mixture_holevo_states(specs, lv);
    if (!found) {
      states = INFINITY;
      continue;
    }
    for (std::size_t x = 0; x < 3; ++x)
      if (expect[x]) states = std::max(states, max_abs(found->states[x].mat() - expect[x]->mat()));
  }
  line.bound("mixture", mix, 1e-8);
  line.bound("Holevo closed form", hol, 1e-8);
  line.bound("mixed-state formula", states, 1e-8);
  return line;
}

Line tensor_suite() {
  Line line;
  double eff = 0.0, scaled = 0.0;
  Rng r(404);
  for (int t = 0; t < kTrials; ++t) {
    const Instrument i = rand_inst(r, 2, 2, 2), j = rand_inst(r, 2, 3, 3);
    const BiInstrument k = tensor_instrument(i, j);
    const Observable mi = measured_observable(i), mj = measured_observable(j);
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 3; ++y)
        eff = std::max(eff, max_abs(dual_apply(k.at(x, y), identity(6)) - kron(mi.effect(x), mj.effect(y))));
    const MixedMarginals mm = mixed_marginals(k, 2, 3);
    const Matrix r1 = random_state(2, r), r2 = random_state(2, r);
    for (std::size_t x = 0; x < 2; ++x)
      scaled = std::max(scaled, max_abs(qinst::apply(mm.marginal1_keep1.operation(x), kron(r1, identity(2))) / 2.0 -
                                        qinst::apply(i.operation(x), r1)));
    for (std::size_t y = 0; y < 3; ++y)
      scaled = std::max(scaled, max_abs(qinst::apply(mm.marginal2_keep2.operation(y), kron(identity(2), r2)) / 2.0 -
                                        qinst::apply(j.operation(y), r2)));
  }
  line.bound("effects", eff, 1e-8);
  line.bound("scaled marginals", scaled, 1e-8);
  return line;
}

Line closed_forms() {
  Line line;
  double hh = 0.0, kk = 0.0, ah = 0.0, ha = 0.0;
  Rng r(505);
  for (int t = 0; t < kTrials; ++t) {
    const Index d = 2 + t % 3, d2 = 2 + (t / 3) % 3;
    const HolevoSpec h1 = rand_holevo(r, d, d2, 2), h2 = rand_holevo(r, d2, d, 3);
    hh = std::max(hh, map_distance(holevo(holevo_compose_closed_form(h1, h2)), sequential_product(holevo(h1), holevo(h2))));
    const auto g1 = random_instrument(d, d2, 2, 1, r), g2 = random_instrument(d2, d, 3, 1, r);
    const KrausSpec k1{labels(2), {g1[0][0], g1[1][0]}}, k2{labels(3), {g2[0][0], g2[1][0], g2[2][0]}};
    std::vector<Operation> grid;
    for (const auto& kx : k1.ops)
      for (const auto& jy : k2.ops) grid.push_back(Operation::create(d, d, {jy * kx}));
    kk = std::max(kk, map_distance(BiInstrument::create(k1.labels, k2.labels, grid),
                                   sequential_product(kraus_instrument(k1), kraus_instrument(k2))));
    const Instrument a = rand_inst(r, d, d2, 2), b = rand_inst(r, d2, d, 3);
    ah = std::max(ah, map_distance(holevo(arbitrary_then_holevo(a, h2)), sequential_product(a, holevo(h2))));
    ha = std::max(ha, map_distance(holevo(holevo_then_arbitrary(h1, b)), sequential_product(holevo(h1), b)));
  }
  line.bound("Holevo-Holevo", hh, 1e-8);
  line.bound("Kraus-Kraus", kk, 1e-8);
  line.bound("arbitrary-Holevo", ah, 1e-8);
  line.bound("Holevo-arbitrary", ha, 1e-8);
  return line;
}

Line negative_detections(const std::string& dir) {
  Line line;
  for (const char* name : {"holevo_mixture_not_holevo.json", "kraus_mixture_not_kraus.json"}) {
    const std::string path = dir + "/" + name;
    const Report rep = run_scenario(parse_scenario(slurp(path), path));
    line.require(name, rep.pass());
  }
  const Matrix p0 = projector(basis_ket(2, 0)), p1 = projector(basis_ket(2, 1));
  const Instrument k = kraus_instrument(KrausSpec{{"x", "y"}, {p0, p1}});
  const Instrument j = kraus_instrument(KrausSpec{{"x", "y"}, {p1, p0}});
  const double second = kraus_defect(convex_combination({k, j}, {0.5, 0.5}));
  line.require("Kraus mixture second Choi eigenvalue > 0.1", second > 0.1);
  return line;
}

Line coexistence() {
  Line line;
  double worst = 0.0;
  bool caught = true;
  Rng r(707);
  for (int t = 0; t < kTrials; ++t) {
    const Index d = 2 + t % 3, d2 = 2 + (t / 3) % 2;
    const Instrument i = rand_inst(r, d, d2, 2);
    const auto betas = rand_betas(r, 2, 2);
    const Labels bl = {"b0", "b1"};
    const Instrument partner = trivial(d, bl, betas);
    const BiInstrument k = trivial_joint(i, bl, betas);
    const auto cert = verify_joint_instrument(k, i, partner);
    worst = std::max(worst, cert.residual());

    const Eigen::MatrixXd lambda = rand_stochastic(r, 2, 3);
    worst = std::max(worst, verify_joint_instrument(postprocess_joint(k, lambda, labels(3, "z")),
                                                    post_process(i, lambda, labels(3, "z")), partner)
                                .residual());
    const Instrument pre = rand_inst(r, 2, d, 2);
    worst = std::max(worst, verify_joint_instrument(condition_joint(k, pre), conditioned(i, pre),
                                                    conditioned(partner, pre))
                                .residual());
    const Matrix u = random_unitary(d2, r);
    const Observable a = diagonal_obs(r, u, 2), b = diagonal_obs(r, u, 3);
    worst = std::max(worst, verify_joint_biobservable(observable_joint_transfer(commuting_joint(a, b), i),
                                                      conditioned_observable(a, i), conditioned_observable(b, i))
                                .residual());
    const Observable target = rand_obs(r, d2, 3);
    worst = std::max(worst, verify_joint_biobservable(measured_conditioned_joint(i, target), measured_observable(i),
                                                      conditioned_observable(target, i))
                                .residual());

    // Plant rho -> 0.01 tr(rho) |0><0| at a random grid entry.
    std::vector<Matrix> extra;
    for (Index c = 0; c < d; ++c) {
      Matrix e = Matrix::Zero(2 * d2, d);
      e(0, c) = 0.1;
      extra.push_back(e);
    }
    std::vector<Operation> grid = k.grid();
    const std::size_t at = static_cast<std::size_t>(4 * r.uniform()) % 4;
    grid[at] = sum(grid[at], Operation::unchecked(d, 2 * d2, extra));
    const auto bad = verify_joint_instrument(BiInstrument::unchecked(k.labels1(), k.labels2(), grid), i, partner);
    caught = caught && !bad.pass() && bad.residual() > 0.99e-2;
  }
  line.bound("constructions", worst, 1e-8);
  line.require("planted 1e-2 violations caught", caught);
  return line;
}

Line sharp_commute() {
  Line line;
  double worst = 0.0;
  Rng r(808);
  for (int t = 0; t < kTrials; ++t) {
    const Matrix basis = random_unitary(3, r);
    std::vector<Matrix> proj;
    for (Index k = 0; k < 3; ++k) proj.push_back(projector(basis.col(k)));
    const Instrument l = lueders(Observable::create(labels(3), proj));
    const Operation u = Operation::unitary(random_unitary(3, r));
    std::vector<Operation> ops;
    for (const auto& op : l.operations()) ops.push_back(compose(op, u));
    const Instrument i = Instrument::create(l.labels(), ops);
    const Observable mi = measured_observable(i), c = conditioned_observable(rand_obs(r, 3, 3), i);
    for (const auto& x : mi.effects())
      for (const auto& y : c.effects()) worst = std::max(worst, max_abs(commutator(x, y)));
  }
  line.bound("commutator", worst, 1e-8);
  return line;
}

Line commuting_holevo() {
  Line line;
  double fixed = 0.0, comm = 0.0;
  Rng r(909);
  for (int t = 0; t < kTrials; ++t) {
    const Index d = 2 + t % 3;
    const State gamma = rand_state(r, d);
    const RealVector a = random_simplex(2, r), b = random_simplex(3, r);
    std::vector<Matrix> ea, eb;
    for (Index x = 0; x < 2; ++x) ea.push_back(a(x) * identity(d));
    for (Index y = 0; y < 3; ++y) eb.push_back(b(y) * identity(d));
    const Instrument i = holevo(HolevoSpec{Observable::create(labels(2), ea), {gamma, gamma}});
    const Instrument j = holevo(HolevoSpec{Observable::create(labels(3), eb), {gamma, gamma, gamma}});
    fixed = std::max({fixed, map_distance(sequential_product(i, j), sequential_product(j, i).transposed()),
                      distance(conditioned_observable(measured_observable(i), j), measured_observable(i)),
                      distance(conditioned_observable(measured_observable(j), i), measured_observable(j))});
    for (const auto& x : ea)
      for (const auto& y : eb) comm = std::max(comm, max_abs(commutator(x, y)));
  }
  line.bound("fixed measured observables", fixed, 1e-8);
  line.bound("A-B commutator", comm, 1e-8);
  return line;
}

Line models() {
  Line line;
  double obs = 0.0, weights = 0.0, nested = 0.0;
  Rng r(1010);
  for (int t = 0; t < kTrials; ++t) {
    const Index k = 2 + t % 2;
    const MeasurementModel m = MeasurementModel::create(2, k, rand_inst(r, 2, 2 * k, 2), rand_obs(r, k, 3));
    obs = std::max(obs, distance(measured_observable(m), measured_observable(measured_instrument(m))));

    const HolevoSpec h = rand_holevo(r, 2, 2 * k, 2);
    const Observable probe = rand_obs(r, k, 3);
    const Observable mh = measured_observable(MeasurementModel::create(2, k, holevo(h), probe));
    for (std::size_t y = 0; y < 2; ++y) {
      double s = 0.0;
      for (std::size_t x = 0; x < 3; ++x) s += trace_real(h.states[y].mat() * kron(identity(2), probe.effect(x)));
      weights = std::max(weights, std::abs(s - 1.0));
    }
    for (std::size_t x = 0; x < 3; ++x) {
      Matrix e = Matrix::Zero(2, 2);
      for (std::size_t y = 0; y < 2; ++y)
        e += trace_real(h.states[y].mat() * kron(identity(2), probe.effect(x))) * h.observable.effect(y);
      obs = std::max(obs, max_abs(mh.effect(x) - e));
    }

    const MeasurementModel a = MeasurementModel::create(2, 2, rand_inst(r, 2, 4, 2), rand_obs(r, 2, 2));
    const MeasurementModel b = MeasurementModel::create(4, 2, rand_inst(r, 4, 8, 2, 1), rand_obs(r, 2, 2));
    const Observable p = measured_observable(sequential_model_product(a, b));
    const Operation ca = a.interaction().channel(), cb = b.interaction().channel();
    for (std::size_t x = 0; x < 2; ++x)
      for (std::size_t y = 0; y < 2; ++y) {
        const Matrix e = kron(kron(identity(2), a.probe().effect(x)), b.probe().effect(y));
        nested = std::max(nested, max_abs(p.effect(pair_label(a.probe().labels()[x], b.probe().labels()[y])) -
                                          dual_apply(ca, dual_apply(cb, e))));
      }
  }
  line.bound("model observable", obs, 1e-8);
  line.bound("weights sum to 1", weights, 1e-9);
  line.bound("nested dual", nested, 1e-7);
  return line;
}

Line determinism(const std::string& dir) {
  Line line;
  SelftestOptions o;
  o.seed = 42;
  const std::string first = dump_json(selftest_to_json(run_selftest(o)));
  const std::string second = dump_json(selftest_to_json(run_selftest(o)));
  line.require("selftest reports byte-identical", first == second);
  double worst = 0.0;
  for (const char* name : {"qubit_lueders.json", "trivial_partner_joint.json", "holevo_mixture_not_holevo.json",
                           "kraus_mixture_not_kraus.json", "qubit_probe_model.json"}) {
    const std::string path = dir + "/" + name;
    const Scenario s = parse_scenario(slurp(path), path);
    worst = std::max(worst, scenario_distance(s, parse_scenario(dump_json(serialize_scenario(s)), path)));
  }
  Rng r(1111);
  Scenario s;
  s.objects.push_back({"rho", rand_state(r, 3)});
  s.objects.push_back({"a", rand_obs(r, 3, 4)});
  s.objects.push_back({"i", rand_inst(r, 3, 2, 3)});
  s.objects.push_back({"k", sequential_product(rand_inst(r, 3, 2, 2), rand_inst(r, 2, 2, 2))});
  worst = std::max(worst, scenario_distance(s, parse_scenario(dump_json(serialize_scenario(s)), "random")));
  line.bound("scenario round-trip", worst, 1e-12);
  return line;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "scenarios";
  const std::vector<std::pair<const char*, std::function<Line()>>> criteria = {
      {"duality suite", duality},
      {"instrument algebra", algebra},
      {"convexity", convexity},
      {"tensor suite", tensor_suite},
      {"family closed forms", closed_forms},
      {"negative detections", [&] { return negative_detections(dir); }},
      {"coexistence constructions", coexistence},
      {"sharp instruments commute with conditioned observables", sharp_commute},
      {"commuting Holevo pairs", commuting_holevo},
      {"measurement models", models},
      {"CLI determinism", [&] { return determinism(dir); }},
  };
  int failed = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    Line line;
    try {
      line = criteria[n].second();
    } catch (const Error& e) {
      line.require(e.what(), false);
    }
    failed += !line.pass;
    std::printf("criterion %2zu %s  %s  (%s)\n", n + 1, line.pass ? "PASS" : "FAIL", criteria[n].first,
                line.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
