#include <doctest.h>

#include "mmlab/parser.hpp"
#include "mmlab/tracepoly.hpp"
#include "test_support.hpp"

using namespace mmlab;
using namespace mmlab::testing;

namespace {

ScalarTracePoly tr(int m, Word w, Complex c = 1.0) { return ScalarTracePoly::trace(m, w, c); }

Complex coef(const ScalarTracePoly& f, std::vector<Word> words) {
  std::vector<TracedWord> fac;
  for (auto& w : words) fac.emplace_back(w);
  return f.coefficient(make_monomial(fac));
}

double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("cyclic identification cancels rotated words") {
  auto f = tr(2, {0, 1}) - tr(2, {1, 0});
  CHECK(f.is_zero());

  auto g = tr(2, {0, 1, 0, 1}, 2.0);
  auto h = tr(2, {1, 0, 1, 0}, 2.0);
  CHECK(g == h);

  ScalarTracePoly p(2);
  p.add_term({TracedWord({0}), TracedWord({1})}, 1.0);
  p.add_term({TracedWord({1}), TracedWord({0})}, 1.0);
  CHECK(p.terms().size() == 1);
  CHECK(p.terms().begin()->second == Complex(2.0));
}

TEST_CASE("canonicalize is idempotent and rotation invariant on random words") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Word p = random_word(rng, 3, 1 + trial % 4);
    Word q = random_word(rng, 3, 1 + (trial / 4) % 4);
    auto a = tr(3, p + q);
    auto b = tr(3, q + p);
    CHECK(canonicalize(a) == canonicalize(b));
    CHECK(canonicalize(canonicalize(a)) == canonicalize(a));
  }
}

TEST_CASE("algebra operations") {
  auto op = tr(1, {0, 0}) * OperatorTracePoly::variable(1, 0);
  REQUIRE(op.terms().size() == 1);
  const auto& key = op.terms().begin()->first;
  CHECK(key.word == Word{0});
  CHECK(key.traces.size() == 1);
  CHECK(key.traces[0].word() == Word{0, 0});

  auto w = OperatorTracePoly::word(2, {0, 1}, Complex(0, 1));
  auto a = adjoint(w);
  CHECK(a == OperatorTracePoly::word(2, {1, 0}, Complex(0, -1)));

  auto tp = trace_pair(OperatorTracePoly::variable(2, 0), OperatorTracePoly::variable(2, 1));
  CHECK(tp == tr(2, {0, 1}));

  CHECK_THROWS_AS(tr(1, {0}) + tr(2, {0}), std::invalid_argument);
}

TEST_CASE("evaluation examples") {
  const int n = 4;
  MatrixTuple x(1, n);
  x[0] = Matrix::Identity(n, n);
  CHECK(std::abs(evaluate_scalar(tr(1, {0, 0}), x) - Complex(1.0)) < 1e-15);

  MatrixTuple d(1, 2);
  d[0](0, 0) = 1;
  d[0](1, 1) = -1;
  ScalarTracePoly sq(1);
  sq.add_term({TracedWord({0}), TracedWord({0})}, 1.0);
  CHECK(std::abs(evaluate_scalar(sq, d)) < 1e-15);

  MatrixTuple y(2, 2);
  y[0](0, 0) = 2;
  y[1](0, 0) = 2;
  CHECK(std::abs(evaluate_scalar(tr(2, {0, 1}), y) - Complex(2.0)) < 1e-15);

  MatrixTuple z(1, 2);
  z[0](0, 0) = 2;
  auto f = tr(1, {0, 0}) * OperatorTracePoly::variable(1, 0);
  Matrix fz = evaluate_operator(f, z);
  CHECK(std::abs(fz(0, 0) - Complex(4.0)) < 1e-15);
  CHECK(std::abs(fz(1, 1)) < 1e-15);

  CHECK_THROWS_AS(evaluate_scalar(tr(2, {0, 1}), z), std::invalid_argument);
}

TEST_CASE("evaluation is a *-homomorphism") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 3, n = 2 + trial % 7;
    auto x = random_tuple(rng, m, n);
    OperatorTracePoly f(m), g(m);
    f.add_term({TracedWord(random_word(rng, m, 2))}, random_word(rng, m, 3), Complex(rng.normal(), rng.normal()));
    f.add_term({}, random_word(rng, m, 2), Complex(rng.normal(), rng.normal()));
    g.add_term({TracedWord(random_word(rng, m, 1))}, random_word(rng, m, 2), Complex(rng.normal(), rng.normal()));
    Matrix fx = evaluate_operator(f, x), gx = evaluate_operator(g, x);
    Matrix fgx = evaluate_operator(f * g, x);
    CHECK((fgx - fx * gx).norm() <= 1e-12 * std::max(1.0, fgx.norm()));
    Matrix fsx = evaluate_operator(adjoint(f), x);
    CHECK((fsx - fx.adjoint()).norm() <= 1e-12 * std::max(1.0, fx.norm()));
    auto s = random_potential(rng, m, 4, 2);
    auto t = random_potential(rng, m, 3, 2);
    CHECK(rel_err(evaluate_scalar(s * t, x), evaluate_scalar(s, x) * evaluate_scalar(t, x)) < 1e-12);
  }
}

TEST_CASE("cyclic gradient examples") {
  auto V = 0.5 * tr(1, {0, 0});
  CHECK(cyclic_gradient(V, 0) == OperatorTracePoly::variable(1, 0));
  CHECK(cyclic_gradient(tr(1, {0, 0, 0, 0}), 0) == OperatorTracePoly::word(1, {0, 0, 0}, 4.0));
  CHECK(cyclic_gradient(tr(2, {0, 1, 0, 1}), 0) == OperatorTracePoly::word(2, {1, 0, 1}, 2.0));
  CHECK_THROWS_AS(cyclic_gradient(V, 1), std::out_of_range);
}

TEST_CASE("cyclic gradient matches finite differences") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 1 + trial % 2, n = 2 + trial % 3;
    auto V = random_potential(rng, m, 5, 3);
    auto x = random_tuple(rng, m, n);
    for (int j = 0; j < m; ++j) {
      Matrix h = gue(rng, n);
      Matrix g = evaluate_operator(cyclic_gradient(V, j), x);
      const double sym = (g.adjoint() * h).trace().real() / n;
      const long double fd = fd_directional(
          [&](const BasicMatrixTuple<long double>& y) { return evaluate_scalar(V, y).real(); }, x, j, h);
      CHECK(std::abs(sym - double(fd)) <= 1e-6 * std::max(1.0, std::abs(sym)));
    }
  }
}

TEST_CASE("free difference quotient") {
  auto d = free_difference_quotient({0, 0, 0}, 0);
  BiWord expect;
  expect.add_term({}, {0, 0}, 1.0);
  expect.add_term({0}, {0}, 1.0);
  expect.add_term({0, 0}, {}, 1.0);
  CHECK(d == expect);
  CHECK(free_difference_quotient({1}, 0).is_zero());
  BiWord e2;
  e2.add_term({}, {1, 0}, 1.0);
  e2.add_term({0, 1}, {}, 1.0);
  CHECK(free_difference_quotient({0, 1, 0}, 0) == e2);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Word p = random_word(rng, 2, trial % 5), q = random_word(rng, 2, (trial / 5) % 5);
    BiWord lhs = free_difference_quotient(p + q, 0);
    BiWord rhs = free_difference_quotient(p, 0).right_mul(q);
    rhs += free_difference_quotient(q, 0).left_mul(p);
    CHECK(lhs == rhs);
  }
}

TEST_CASE("laplacian closed forms") {
  for (int n : {2, 4, 8}) {
    auto L = LaplacianMode::finite(n);
    CHECK(laplacian(tr(1, {0, 0}), L) == ScalarTracePoly::constant(1, 2.0));
    auto l4 = laplacian(tr(1, {0, 0, 0, 0}), L);
    CHECK(l4.terms().size() == 2);
    CHECK(coef(l4, {{0, 0}}) == Complex(8.0));
    CHECK(coef(l4, {{0}, {0}}) == Complex(4.0));
    ScalarTracePoly sq(1);
    sq.add_term({TracedWord({0}), TracedWord({0})}, 1.0);
    auto ls = laplacian(sq, L);
    CHECK(std::abs(ls.constant_term() - Complex(2.0 / (n * n))) < 1e-15);
    CHECK(laplacian(sq, LaplacianMode::large()).is_zero());
  }
}

TEST_CASE("laplacian matches the finite-difference Laplacian") {
  Rng rng(17);
  for (int n : {2, 3, 4})
    for (int trial = 0; trial < 6; ++trial) {
      const int m = 1 + trial % 2;
      auto V = random_potential(rng, m, 6, 3);
      auto x = random_tuple(rng, m, n);
      std::vector<int> vars;
      for (int j = 0; j < m; ++j) vars.push_back(j);
      const Complex sym = evaluate_scalar(laplacian(V, LaplacianMode::finite(n)), x);
      const long double fd =
          fd_laplacian([&](const BasicMatrixTuple<long double>& y) { return evaluate_scalar(V, y).real(); }, x, vars);
      CHECK(std::abs(sym.imag()) < 1e-10);
      CHECK(std::abs(sym.real() - double(fd)) <= 1e-5 * std::max(1.0, std::abs(sym.real())));
      CHECK(laplacian(V, LaplacianMode::finite(n)).degree() <= V.degree() - 2);
    }
}

TEST_CASE("partial laplacian acts only on the block") {
  Rng rng(19);
  const int n = 3;
  auto V = random_potential(rng, 2, 5, 3);
  auto x = random_tuple(rng, 2, n);
  const Complex sym = evaluate_scalar(laplacian(V, LaplacianMode::finite(n), {true, false}), x);
  const long double fd =
      fd_laplacian([&](const BasicMatrixTuple<long double>& y) { return evaluate_scalar(V, y).real(); }, x, {0});
  CHECK(std::abs(sym.real() - double(fd)) <= 1e-5 * std::max(1.0, std::abs(sym.real())));
}

TEST_CASE("operator laplacian matches entrywise finite differences") {
  Rng rng(23);
  const int n = 3;
  OperatorTracePoly f(2);
  f.add_term({TracedWord({0, 1})}, {0, 0, 1}, 1.0);
  f.add_term({}, {1, 0, 1, 0}, Complex(0.5, 0.25));
  f.add_term({TracedWord({0}), TracedWord({1, 1})}, {0}, 2.0);
  auto x = random_tuple(rng, 2, n);
  Matrix sym = evaluate_operator(laplacian(f, LaplacianMode::finite(n)), x);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int part = 0; part < 2; ++part) {
        auto entry = [&](const BasicMatrixTuple<long double>& y) {
          auto v = evaluate_operator(f, y)(a, b);
          return part == 0 ? v.real() : v.imag();
        };
        const long double fd = fd_laplacian(entry, x, {0, 1});
        const double s = part == 0 ? sym(a, b).real() : sym(a, b).imag();
        CHECK(std::abs(s - double(fd)) <= 1e-5 * std::max(1.0, std::abs(s)));
      }
}

TEST_CASE("heat semigroup closed forms") {
  auto L = LaplacianMode::large();
  CHECK(heat_apply(tr(1, {0}), 0.7, L) == tr(1, {0}));
  auto h2 = heat_apply(tr(1, {0, 0}), 0.3, LaplacianMode::finite(5));
  CHECK(std::abs(h2.constant_term() - Complex(0.3)) < 1e-14);
  CHECK(std::abs(coef(h2, {{0, 0}}) - Complex(1.0)) < 1e-14);

  const double t = 0.8;
  auto h4 = heat_apply(tr(1, {0, 0, 0, 0}), t, L);
  CHECK(std::abs(coef(h4, {{0, 0, 0, 0}}) - Complex(1.0)) < 1e-12);
  CHECK(std::abs(coef(h4, {{0, 0}}) - Complex(4 * t)) < 1e-12);
  CHECK(std::abs(coef(h4, {{0}, {0}}) - Complex(2 * t)) < 1e-12);
  CHECK(std::abs(h4.constant_term() - Complex(2 * t * t)) < 1e-12);
}

TEST_CASE("heat semigroup law") {
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = random_potential(rng, 2, 6, 3);
    auto L = LaplacianMode::finite(3);
    auto a = heat_apply(heat_apply(f, 0.4, L), 0.7, L);
    auto b = heat_apply(f, 1.1, L);
    auto d = a - b;
    for (const auto& [k, c] : d.terms()) CHECK(std::abs(c) < 1e-10);
  }
  OperatorTracePoly q = OperatorTracePoly::word(1, {0, 0, 0});
  auto a = heat_apply(heat_apply(q, 0.2, LaplacianMode::finite(4)), 0.5, LaplacianMode::finite(4));
  auto b = heat_apply(q, 0.7, LaplacianMode::finite(4));
  auto diff = a - b;
  for (const auto& [k, c] : diff.terms()) CHECK(std::abs(c) < 1e-10);
  CHECK_THROWS_AS(heat_apply(tr(1, Word(14, 0)), 1.0, LaplacianMode::large()), std::invalid_argument);
}

TEST_CASE("heat identity against Monte Carlo") {
  Rng rng(31);
  const int n = 3;
  auto f = parse_scalar("tr(x1^4) + 0.5*tr(x1 x2 x1 x2) + tr(x1)*tr(x2^2)");
  auto x = random_tuple(rng, 2, n);
  for (double t : {0.1, 1.0}) {
    auto hf = heat_apply(f, t, LaplacianMode::finite(n));
    const double exact = evaluate_scalar(hf, x).real();
    std::vector<double> v;
    for (int s = 0; s < 10000; ++s) {
      auto y = x;
      y.axpy(std::sqrt(t), gue_tuple(rng, 2, n));
      v.push_back(evaluate_scalar(f, y).real());
    }
    auto e = iid_estimate(v);
    CHECK(std::abs(e.mean - exact) <= 4 * e.se);
  }
}
