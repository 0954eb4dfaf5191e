#pragma once

#include "mmlab/tracepoly.hpp"

#include <stdexcept>
#include <string>

namespace mmlab {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column, std::string token)
      : std::runtime_error(what), line_(line), column_(column), token_(std::move(token)) {}
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& token() const { return token_; }

 private:
  int line_;
  int column_;
  std::string token_;
};

struct ParsedPoly {
  bool is_operator = false;
  ScalarTracePoly scalar;
  OperatorTracePoly op;
};

// Grammar (x = x1 when only one variable is meant):
//   expr   := ['+'|'-'] term { ('+'|'-') term }
//   term   := factor { ['*'] factor }
//   factor := atom ['^' integer]
//   atom   := number ['i'] | 'i' | 'x'k | 'tr' '(' expr ')' | '(' expr ')'
// nvars < 0 infers the variable count from the largest index used.
ParsedPoly parse_trace_poly(const std::string& text, int nvars = -1);
ScalarTracePoly parse_scalar(const std::string& text, int nvars = -1);
OperatorTracePoly parse_operator(const std::string& text, int nvars = -1);
// Scalar and self-adjoint, as required of a potential.
ScalarTracePoly parse_potential(const std::string& text, int nvars = -1);
// A single monomial such as "x1^2 x2".
Word parse_word(const std::string& text, int nvars = -1);

}  // namespace mmlab
