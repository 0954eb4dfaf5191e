#include <doctest.h>

#include "mmlab/parser.hpp"
#include "test_support.hpp"

using namespace mmlab;

TEST_CASE("potential text parses to canonical trace polynomials") {
  auto V = parse_potential("0.5*tr(x1^2) + 0.25*tr(x1 x2 x1 x2)");
  CHECK(V.nvars() == 2);
  auto W = 0.5 * ScalarTracePoly::trace(2, {0, 0}) + Complex(0.25) * ScalarTracePoly::trace(2, {1, 0, 1, 0});
  CHECK(V == canonicalize(W));
}

TEST_CASE("operator-valued terms") {
  auto f = parse_operator("tr(x1^2)*x1");
  Matrix a = Matrix::Zero(2, 2);
  a(0, 0) = 2;
  Matrix v = evaluate_operator(f, MatrixTuple({a}));
  CHECK(v(0, 0) == Complex(4.0));
  CHECK(v(1, 1) == Complex(0.0));
}

TEST_CASE("x means x1 and implicit products") {
  auto a = parse_scalar("tr(x^3) - 2 tr(x)tr(x x)");
  auto b = parse_scalar("tr(x1 x1 x1) - 2*tr(x1)*tr(x1^2)");
  CHECK(a == b);
}

TEST_CASE("imaginary unit and cyclic cancellation") {
  auto f = parse_scalar("i*tr(x1 x2) - i*tr(x2 x1)", 2);
  CHECK(f.is_zero());
  CHECK_FALSE(is_self_adjoint(parse_scalar("i*tr(x1 x2 x2)", 2)));
}

TEST_CASE("non-self-adjoint potentials are rejected") {
  CHECK_THROWS_AS(parse_potential("i*tr(x1 x2 x2)", 2), ParseError);
  CHECK_NOTHROW(parse_potential("i*tr(x1 x2 x2) - i*tr(x2 x2 x1)", 2));
  CHECK_THROWS_AS(parse_potential("x1^2"), ParseError);
}

TEST_CASE("parse errors name the offending token and its position") {
  try {
    parse_scalar("tr(x1^2) + $ tr(x1)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 12);
    CHECK(e.token() == "$");
  }
  try {
    parse_scalar("tr(x1^2)\n + tr(x3", 3);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_scalar("tr(x4)", 2), ParseError);
  CHECK_THROWS_AS(parse_scalar("tr(x1^)"), ParseError);
}

TEST_CASE("single words") {
  CHECK(parse_word("x1^2 x2", 2) == Word{0, 0, 1});
  CHECK(parse_word("x2 x1", 2) == Word{1, 0});
  CHECK_THROWS_AS(parse_word("x1 + x2", 2), ParseError);
}
