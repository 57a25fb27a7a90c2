#include "oracles.hpp"
#include "qinst/families.hpp"
#include "qinst/instruments.hpp"

using namespace qinst;

namespace {
Instrument z_lueders() { return Instrument::from_kraus({"0", "1"}, {{oracle::zero()}, {oracle::one()}}); }
Instrument x_lueders() { return Instrument::from_kraus({"+", "-"}, {{oracle::plus()}, {oracle::minus()}}); }
Observable x_obs() { return Observable::create({"+", "-"}, {oracle::plus(), oracle::minus()}); }
Observable z_obs() { return Observable::create({"0", "1"}, {oracle::zero(), oracle::one()}); }

Instrument random_inst(std::uint64_t seed, Index din, Index dout, Index n) {
  Labels l;
  for (Index x = 0; x < n; ++x) l.push_back("o" + std::to_string(x));
  return Instrument::from_kraus(l, random_instrument(din, dout, n, 2, seed));
}

std::function<Matrix(const Matrix&)> as_map(const Operation& op) {
  return [op](const Matrix& m) { return oracle::kraus_apply(op.kraus(), m); };
}
}  // namespace

TEST_CASE("instrument validation") {
  CHECK_ERROR_KIND(Instrument::from_kraus({"0", "1"}, {{oracle::zero()}, {oracle::zero()}}),
                   ErrorKind::InvariantViolation);
  CHECK_ERROR_KIND(Instrument::from_kraus({"0"}, {{oracle::zero()}, {oracle::one()}}), ErrorKind::LabelMismatch);
  CHECK_ERROR_KIND(Instrument::from_kraus({"0", "0"}, {{oracle::zero()}, {oracle::one()}}), ErrorKind::LabelMismatch);
  CHECK_ERROR_KIND(Instrument::create({"0", "1"}, {Operation::zero(2, 2), Operation::identity(3)}),
                   ErrorKind::DimMismatch);
  CHECK(is_channel(z_lueders().channel()));
}

TEST_CASE("Born rule and state update") {
  const State plus = State::create(oracle::plus());
  const auto d = born_distribution(z_lueders(), plus);
  CHECK(d.at("0") == doctest::Approx(0.5));
  CHECK(d.at("1") == doctest::Approx(0.5));
  CHECK(max_abs(update_state(z_lueders(), "1", plus).mat() - oracle::one()) < 1e-15);
  CHECK_ERROR_KIND(update_state(z_lueders(), "1", State::create(oracle::zero())), ErrorKind::ZeroProbability);
  CHECK_ERROR_KIND(update_state(z_lueders(), "2", plus), ErrorKind::LabelMismatch);
  CHECK_ERROR_KIND(born_distribution(z_lueders(), State::create(identity(3) / 3.0)), ErrorKind::DimMismatch);
}

TEST_CASE("measured observable is I_x*(I)") {
  const Instrument i = random_inst(11, 2, 3, 3);
  const Observable m = measured_observable(i);
  for (std::size_t x = 0; x < i.size(); ++x)
    CHECK(max_abs(m.effect(x) - oracle::kraus_dual(i.operation(x).kraus(), identity(3))) < 1e-14);
}

TEST_CASE("sequential product of Z then X") {
  const BiInstrument k = sequential_product(z_lueders(), x_lueders());
  const Matrix px[2] = {oracle::plus(), oracle::minus()};
  const Matrix pz[2] = {oracle::zero(), oracle::one()};
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y) {
      const Matrix kxy = px[y] * pz[x];
      CHECK(oracle::map_gap(as_map(k.at(x, y)), [&](const Matrix& m) { return Matrix(kxy * m * kxy.adjoint()); }, 2) <
            1e-15);
    }
  CHECK(k.labels1() == Labels{"0", "1"});
  CHECK(k.labels2() == Labels{"+", "-"});
  CHECK_ERROR_KIND(sequential_product(z_lueders(), random_inst(1, 3, 3, 2)), ErrorKind::DimMismatch);
}

TEST_CASE("X conditioned on Z dephases into I/2") {
  const Observable c = conditioned_observable(x_obs(), z_lueders());
  CHECK(max_abs(c.effect("+") - identity(2) / 2.0) < 1e-15);
  CHECK(max_abs(c.effect("-") - identity(2) / 2.0) < 1e-15);
  const Instrument j = conditioned(x_lueders(), z_lueders());
  CHECK(j.labels() == Labels{"+", "-"});
  CHECK(oracle::map_gap(as_map(j.operation("+")),
                        [](const Matrix& m) {
                          const Matrix dep = oracle::zero() * m * oracle::zero() + oracle::one() * m * oracle::one();
                          return Matrix(oracle::plus() * dep * oracle::plus());
                        },
                        2) < 1e-15);
}

TEST_CASE("then_instrument applies the later channel") {
  const Instrument t = then_instrument(z_lueders(), x_lueders());
  CHECK(t.labels() == Labels{"0", "1"});
  // Dephasing in X after projecting on |0> gives I/2 with weight <0|rho|0>.
  const Matrix out = qinst::apply(t.operation("0"), oracle::plus());
  CHECK(max_abs(out - identity(2) / 4.0) < 1e-15);
}

TEST_CASE("bi-instrument marginals, transpose and flatten") {
  const BiInstrument k = sequential_product(random_inst(2, 2, 2, 2), random_inst(3, 2, 2, 3));
  const Instrument m1 = bi_marginal_instrument(k, Side::First), m2 = bi_marginal_instrument(k, Side::Second);
  CHECK(m1.size() == 2);
  CHECK(m2.size() == 3);
  CHECK(map_distance(m1.channel(), m2.channel()) < 1e-14);
  const BiInstrument t = k.transposed();
  CHECK(map_distance(t.at(2, 1), k.at(1, 2)) == 0.0);
  const Instrument f = k.flatten();
  CHECK(f.labels()[4] == pair_label("o1", "o1"));
  CHECK(map_distance(f.operation(4), k.at(1, 1)) == 0.0);
}

TEST_CASE("reduced instrument traces a factor") {
  const Instrument i = random_inst(5, 2, 6, 2);
  const Instrument r1 = reduced_instrument(i, 2, 3, Keep::First);
  const Instrument r2 = reduced_instrument(i, 2, 3, Keep::Second);
  for (std::size_t x = 0; x < 2; ++x) {
    const auto full = as_map(i.operation(x));
    CHECK(oracle::map_gap(as_map(r1.operation(x)), [&](const Matrix& m) { return oracle::trace_second(full(m), 2, 3); },
                          2) < 1e-14);
    CHECK(oracle::map_gap(as_map(r2.operation(x)), [&](const Matrix& m) { return oracle::trace_first(full(m), 2, 3); },
                          2) < 1e-14);
  }
  CHECK_ERROR_KIND(reduced_instrument(i, 2, 2, Keep::First), ErrorKind::BadFactorization);
}

TEST_CASE("mixed marginals of a tensor product") {
  const Instrument i = random_inst(6, 2, 2, 2), j = random_inst(7, 2, 3, 2);
  const BiInstrument k = tensor_instrument(i, j);
  const MixedMarginals mm = mixed_marginals(k, 2, 3);
  // On product inputs the first marginal kept on the first factor is I_x(rho1) tr(rho2).
  const Matrix r1 = random_state(2, 8), r2 = random_state(2, 9);
  for (std::size_t x = 0; x < 2; ++x)
    CHECK(max_abs(qinst::apply(mm.marginal1_keep1.operation(x), oracle::kron(r1, r2)) -
                  oracle::kraus_apply(i.operation(x).kraus(), r1)) < 1e-14);
  for (std::size_t y = 0; y < 2; ++y)
    CHECK(max_abs(qinst::apply(mm.marginal2_keep2.operation(y), oracle::kron(r1, r2)) -
                  oracle::kraus_apply(j.operation(y).kraus(), r2)) < 1e-14);
  CHECK_ERROR_KIND(mixed_marginals(k, 3, 3), ErrorKind::BadFactorization);
}

TEST_CASE("convex combination") {
  const Instrument a = random_inst(10, 2, 2, 2), b = random_inst(12, 2, 2, 2);
  const Instrument c = convex_combination({a, b}, {0.25, 0.75});
  for (std::size_t x = 0; x < 2; ++x)
    CHECK(oracle::map_gap(as_map(c.operation(x)),
                          [&](const Matrix& m) {
                            return Matrix(0.25 * oracle::kraus_apply(a.operation(x).kraus(), m) +
                                          0.75 * oracle::kraus_apply(b.operation(x).kraus(), m));
                          },
                          2) < 1e-14);
  CHECK_ERROR_KIND(convex_combination({a, b}, {0.5, 0.6}), ErrorKind::BadWeights);
  CHECK_ERROR_KIND(convex_combination({a, b}, {1.5, -0.5}), ErrorKind::BadWeights);
  CHECK_ERROR_KIND(convex_combination({a, b}, {1.0}), ErrorKind::BadWeights);
  CHECK_ERROR_KIND(convex_combination({a, z_lueders()}, {0.5, 0.5}), ErrorKind::LabelMismatch);
  CHECK_ERROR_KIND(convex_combination({a, random_inst(1, 3, 2, 2)}, {0.5, 0.5}), ErrorKind::DimMismatch);
}

TEST_CASE("post-processing") {
  const Instrument i = random_inst(13, 2, 2, 3);
  Eigen::MatrixXd lambda(3, 2);
  lambda << 1, 0, 0.5, 0.5, 0, 1;
  const Instrument j = post_process(i, lambda, {"a", "b"});
  CHECK(oracle::map_gap(as_map(j.operation("a")),
                        [&](const Matrix& m) {
                          return Matrix(oracle::kraus_apply(i.operation(0).kraus(), m) +
                                        0.5 * oracle::kraus_apply(i.operation(1).kraus(), m));
                        },
                        2) < 1e-14);
  Eigen::MatrixXd bad = lambda;
  bad(0, 0) = 0.9;
  CHECK_ERROR_KIND(post_process(i, bad, {"a", "b"}), ErrorKind::BadStochasticMatrix);
  CHECK_ERROR_KIND(post_process(i, lambda.topRows(2), {"a", "b"}), ErrorKind::BadStochasticMatrix);
  bad = lambda;
  bad(0, 0) = 1.5;
  bad(0, 1) = -0.5;
  CHECK_ERROR_KIND(post_process(i, bad, {"a", "b"}), ErrorKind::BadStochasticMatrix);
}

TEST_CASE("tensor instrument measures products") {
  const BiInstrument k = tensor_instrument(z_lueders(), x_lueders());
  CHECK(k.dim_in() == 4);
  const Matrix e = dual_apply(k.at(1, 0), identity(4));
  CHECK(max_abs(e - oracle::kron(oracle::one(), oracle::plus())) < 1e-15);
}

TEST_CASE("observable sequential product") {
  const Observable b = obs_sequential_product(z_obs(), z_lueders(), x_obs());
  CHECK(max_abs(b.effect("+") - identity(2) / 2.0) < 1e-15);
  CHECK_ERROR_KIND(obs_sequential_product(x_obs(), z_lueders(), x_obs()), ErrorKind::InstrumentDoesNotMeasureA);
  CHECK_ERROR_KIND(obs_sequential_product(z_obs(), z_lueders(), Observable::create({"1"}, {identity(3)})),
                   ErrorKind::DimMismatch);
}

TEST_CASE("conditioned bi-observable") {
  const BiObservable c = conditioned_biobservable(x_obs(), z_lueders());
  // (I_x)*(B_y) = P_x B_y P_x.
  CHECK(max_abs(c.at(0, 1) - oracle::zero() * oracle::minus() * oracle::zero()) < 1e-15);
  CHECK(max_abs(bi_marginal(c, Side::First).effect("0") - oracle::zero()) < 1e-15);
}

TEST_CASE("map distance requires equal labels") {
  CHECK_ERROR_KIND(map_distance(z_lueders(), x_lueders()), ErrorKind::LabelMismatch);
  CHECK(map_distance(z_lueders(), lueders(z_obs())) < 1e-15);
}

TEST_CASE("from_channel wraps a channel") {
  const Instrument i = Instrument::from_channel(Operation::identity(2));
  CHECK(i.size() == 1);
  CHECK(i.labels()[0] == "0");
  CHECK_ERROR_KIND(Instrument::from_channel(scale(Operation::identity(2), 0.5)), ErrorKind::InvariantViolation);
}
