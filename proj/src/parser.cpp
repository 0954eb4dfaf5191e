#include "mmlab/parser.hpp"

#include <cctype>
#include <cstdlib>

namespace mmlab {

namespace {

enum class Tok { Number, Imag, Var, Tr, Plus, Minus, Star, Caret, LParen, RParen, End };

struct Token {
  Tok kind;
  std::string text;
  int line;
  int column;
  double number = 0;
  int var = -1;
};

[[noreturn]] void lex_error(const std::string& msg, int line, int col, const std::string& tok) {
  throw ParseError(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col), line, col, tok);
}

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    const char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      advance(1);
      continue;
    }
    Token t{Tok::End, std::string(1, ch), line, col};
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      const char* begin = s.c_str() + i;
      char* end = nullptr;
      t.number = std::strtod(begin, &end);
      std::size_t len = static_cast<std::size_t>(end - begin);
      if (len == 0) lex_error("invalid number", line, col, t.text);
      t.kind = Tok::Number;
      if (i + len < s.size() && s[i + len] == 'i' &&
          !(i + len + 1 < s.size() && std::isalnum(static_cast<unsigned char>(s[i + len + 1]))))
        t.kind = Tok::Imag, ++len;
      t.text = s.substr(i, len);
      out.push_back(t);
      advance(len);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      std::size_t len = 0;
      while (i + len < s.size() && (std::isalnum(static_cast<unsigned char>(s[i + len])) || s[i + len] == '_')) ++len;
      t.text = s.substr(i, len);
      if (t.text == "tr") {
        t.kind = Tok::Tr;
      } else if (t.text == "i") {
        t.kind = Tok::Imag;
        t.number = 1;
      } else if (t.text == "x") {
        t.kind = Tok::Var;
        t.var = 0;
      } else if (t.text[0] == 'x' && t.text.size() > 1 &&
                 t.text.find_first_not_of("0123456789", 1) == std::string::npos) {
        t.kind = Tok::Var;
        t.var = std::atoi(t.text.c_str() + 1) - 1;
        if (t.var < 0) lex_error("variable indices start at 1", line, col, t.text);
      } else {
        lex_error("unknown identifier '" + t.text + "'", line, col, t.text);
      }
      out.push_back(t);
      advance(len);
      continue;
    }
    switch (ch) {
      case '+': t.kind = Tok::Plus; break;
      case '-': t.kind = Tok::Minus; break;
      case '*': t.kind = Tok::Star; break;
      case '^': t.kind = Tok::Caret; break;
      case '(': t.kind = Tok::LParen; break;
      case ')': t.kind = Tok::RParen; break;
      default: lex_error(std::string("unexpected character '") + ch + "'", line, col, t.text);
    }
    out.push_back(t);
    advance(1);
  }
  out.push_back(Token{Tok::End, "<end>", line, col});
  return out;
}

struct Value {
  bool is_operator = false;
  OperatorTracePoly p;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, int nvars) : toks_(std::move(toks)), nvars_(nvars) {}

  Value parse() {
    Value v = expr();
    if (peek().kind != Tok::End) fail("unexpected token '" + peek().text + "'");
    return v;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }
  [[noreturn]] void fail(const std::string& msg) const {
    const Token& t = peek();
    throw ParseError(msg + " at line " + std::to_string(t.line) + ", column " + std::to_string(t.column), t.line,
                     t.column, t.text);
  }
  void expect(Tok k, const char* what) {
    if (peek().kind != k) fail(std::string("expected ") + what + " but found '" + peek().text + "'");
    ++pos_;
  }

  Value constant(Complex c) {
    Value v;
    v.p = OperatorTracePoly(nvars_);
    v.p.add_term({}, {}, c);
    return v;
  }

  static Value multiply(const Value& a, const Value& b) {
    return Value{a.is_operator || b.is_operator, a.p * b.p};
  }

  Value expr() {
    Value acc = constant(0.0);
    bool first = true;
    for (;;) {
      double sign = 1;
      if (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
        sign = next().kind == Tok::Minus ? -1 : 1;
      } else if (!first) {
        break;
      }
      Value t = term();
      acc.is_operator = acc.is_operator || t.is_operator;
      acc.p += Complex(sign) * t.p;
      first = false;
    }
    return acc;
  }

  bool starts_factor() const {
    switch (peek().kind) {
      case Tok::Number:
      case Tok::Imag:
      case Tok::Var:
      case Tok::Tr:
      case Tok::LParen: return true;
      default: return false;
    }
  }

  Value term() {
    Value acc = factor();
    for (;;) {
      if (peek().kind == Tok::Star) {
        ++pos_;
        if (!starts_factor()) fail("expected a factor after '*' but found '" + peek().text + "'");
      } else if (!starts_factor()) {
        break;
      }
      acc = multiply(acc, factor());
    }
    return acc;
  }

  Value factor() {
    Value base = atom();
    if (peek().kind != Tok::Caret) return base;
    ++pos_;
    const Token& e = peek();
    if (e.kind != Tok::Number || e.number != static_cast<int>(e.number) || e.number < 0)
      fail("exponent must be a nonnegative integer, found '" + e.text + "'");
    const int k = static_cast<int>(next().number);
    Value out = constant(1.0);
    out.is_operator = base.is_operator;
    for (int r = 0; r < k; ++r) out = multiply(out, base);
    return out;
  }

  Value atom() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::Number: ++pos_; return constant(t.number);
      case Tok::Imag: ++pos_; return constant(Complex(0.0, t.number));
      case Tok::Var: {
        if (t.var >= nvars_) fail("variable '" + t.text + "' exceeds the declared " + std::to_string(nvars_) + " variables");
        ++pos_;
        return Value{true, OperatorTracePoly::variable(nvars_, t.var)};
      }
      case Tok::Tr: {
        ++pos_;
        expect(Tok::LParen, "'('");
        Value inner = expr();
        expect(Tok::RParen, "')'");
        Value v;
        v.p = OperatorTracePoly(nvars_);
        const ScalarTracePoly traced = trace(inner.p);
        for (const auto& [k, c] : traced.terms()) v.p.add_key(OperatorKey{k, {}}, c);
        return v;
      }
      case Tok::LParen: {
        ++pos_;
        Value inner = expr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      default: fail("unexpected token '" + t.text + "'");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int nvars_;
};

int infer_nvars(const std::vector<Token>& toks) {
  int m = 0;
  for (const auto& t : toks)
    if (t.kind == Tok::Var) m = std::max(m, t.var + 1);
  return std::max(m, 1);
}

ScalarTracePoly to_scalar(const OperatorTracePoly& p) {
  ScalarTracePoly s(p.nvars());
  for (const auto& [k, c] : p.terms()) s.add_monomial(k.traces, c);
  return s;
}

}  // namespace

ParsedPoly parse_trace_poly(const std::string& text, int nvars) {
  auto toks = tokenize(text);
  if (nvars < 0) nvars = infer_nvars(toks);
  Parser parser(std::move(toks), nvars);
  Value v = parser.parse();
  ParsedPoly out;
  out.is_operator = v.is_operator;
  out.op = v.p;
  if (!v.is_operator) out.scalar = to_scalar(v.p);
  return out;
}

ScalarTracePoly parse_scalar(const std::string& text, int nvars) {
  auto p = parse_trace_poly(text, nvars);
  if (p.is_operator) throw ParseError("expected a scalar trace polynomial but the expression is operator-valued", 1, 1, text);
  return p.scalar;
}

OperatorTracePoly parse_operator(const std::string& text, int nvars) { return parse_trace_poly(text, nvars).op; }

ScalarTracePoly parse_potential(const std::string& text, int nvars) {
  ScalarTracePoly V = parse_scalar(text, nvars);
  if (!is_self_adjoint(V)) throw ParseError("potential is not self-adjoint: " + to_string(V), 1, 1, text);
  return V;
}

Word parse_word(const std::string& text, int nvars) {
  if (text == "1" || text.empty()) return {};
  auto p = parse_operator(text, nvars);
  if (p.terms().size() != 1 || !p.terms().begin()->first.traces.empty() || p.terms().begin()->second != Complex(1.0))
    throw ParseError("expected a single word such as 'x1^2 x2'", 1, 1, text);
  return p.terms().begin()->first.word;
}

}  // namespace mmlab
