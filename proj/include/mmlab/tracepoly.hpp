#pragma once

#include "mmlab/matrix_tuple.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mmlab {

// Letters are 0-based variable indices; the empty word is the identity.
using Word = std::vector<int>;

Word min_rotation(const Word& w);
Word reversed(const Word& w);
Word operator+(const Word& a, const Word& b);
// Rotation of w starting right after position p, with w[p] removed.
Word rotation_after(const Word& w, std::size_t p);
std::string to_string(const Word& w);

struct DegLex {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

class TracedWord {
 public:
  TracedWord() = default;
  explicit TracedWord(const Word& w) : rep_(min_rotation(w)) {}
  const Word& word() const { return rep_; }
  std::size_t degree() const { return rep_.size(); }
  friend bool operator==(const TracedWord& a, const TracedWord& b) { return a.rep_ == b.rep_; }
  friend bool operator<(const TracedWord& a, const TracedWord& b) { return DegLex{}(a.rep_, b.rep_); }

 private:
  Word rep_;
};

// Sorted multiset of traced words; empty means the constant 1.
using TraceMonomial = std::vector<TracedWord>;

std::size_t degree(const TraceMonomial& mono);
TraceMonomial make_monomial(std::vector<TracedWord> factors);
TraceMonomial merge(const TraceMonomial& a, const TraceMonomial& b);

struct MonomialLess {
  bool operator()(const TraceMonomial& a, const TraceMonomial& b) const;
};

struct OperatorKey {
  TraceMonomial traces;
  Word word;
};

struct OperatorKeyLess {
  bool operator()(const OperatorKey& a, const OperatorKey& b) const;
};

class ScalarTracePoly {
 public:
  using Terms = std::map<TraceMonomial, Complex, MonomialLess>;

  ScalarTracePoly() = default;
  explicit ScalarTracePoly(int nvars) : nvars_(nvars) {}

  static ScalarTracePoly constant(int nvars, Complex c);
  static ScalarTracePoly trace(int nvars, const Word& w, Complex c = 1.0);

  // Canonicalizes the factors (rotation, sorting, tau(1) = 1) and merges.
  void add_term(std::vector<TracedWord> factors, Complex c);
  void add_monomial(const TraceMonomial& mono, Complex c);

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;
  Complex constant_term() const;
  Complex coefficient(const TraceMonomial& mono) const;

  ScalarTracePoly& operator+=(const ScalarTracePoly& o);
  ScalarTracePoly& operator-=(const ScalarTracePoly& o);
  ScalarTracePoly& operator*=(Complex s);

 private:
  int nvars_ = 0;
  Terms terms_;
};

class OperatorTracePoly {
 public:
  using Terms = std::map<OperatorKey, Complex, OperatorKeyLess>;

  OperatorTracePoly() = default;
  explicit OperatorTracePoly(int nvars) : nvars_(nvars) {}

  static OperatorTracePoly word(int nvars, const Word& w, Complex c = 1.0);
  static OperatorTracePoly variable(int nvars, int j) { return word(nvars, Word{j}); }

  void add_term(std::vector<TracedWord> traces, Word w, Complex c);
  void add_key(const OperatorKey& key, Complex c);

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const;

  OperatorTracePoly& operator+=(const OperatorTracePoly& o);
  OperatorTracePoly& operator-=(const OperatorTracePoly& o);
  OperatorTracePoly& operator*=(Complex s);

 private:
  int nvars_ = 0;
  Terms terms_;
};

// Element of NCP (x) NCP.
class BiWord {
 public:
  using Key = std::pair<Word, Word>;
  struct KeyLess {
    bool operator()(const Key& a, const Key& b) const {
      if (a.first != b.first) return DegLex{}(a.first, b.first);
      return DegLex{}(a.second, b.second);
    }
  };
  using Terms = std::map<Key, Complex, KeyLess>;

  void add_term(Word a, Word b, Complex c);
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  BiWord& operator+=(const BiWord& o);
  BiWord left_mul(const Word& p) const;   // (p (x) 1) . this
  BiWord right_mul(const Word& q) const;  // this . (1 (x) q)
  friend bool operator==(const BiWord& a, const BiWord& b) { return a.terms_ == b.terms_; }

 private:
  Terms terms_;
};

bool operator==(const ScalarTracePoly& a, const ScalarTracePoly& b);
bool operator==(const OperatorTracePoly& a, const OperatorTracePoly& b);

ScalarTracePoly operator+(ScalarTracePoly a, const ScalarTracePoly& b);
ScalarTracePoly operator-(ScalarTracePoly a, const ScalarTracePoly& b);
ScalarTracePoly operator*(const ScalarTracePoly& a, const ScalarTracePoly& b);
ScalarTracePoly operator*(Complex s, ScalarTracePoly a);
OperatorTracePoly operator+(OperatorTracePoly a, const OperatorTracePoly& b);
OperatorTracePoly operator-(OperatorTracePoly a, const OperatorTracePoly& b);
OperatorTracePoly operator*(const OperatorTracePoly& a, const OperatorTracePoly& b);
OperatorTracePoly operator*(const ScalarTracePoly& a, const OperatorTracePoly& b);
OperatorTracePoly operator*(const OperatorTracePoly& a, const ScalarTracePoly& b);
OperatorTracePoly operator*(Complex s, OperatorTracePoly a);

ScalarTracePoly canonicalize(const ScalarTracePoly& f);
OperatorTracePoly canonicalize(const OperatorTracePoly& f);
ScalarTracePoly adjoint(const ScalarTracePoly& f);
OperatorTracePoly adjoint(const OperatorTracePoly& f);
ScalarTracePoly trace(const OperatorTracePoly& f);
ScalarTracePoly trace_pair(const OperatorTracePoly& f, const OperatorTracePoly& g);
bool is_self_adjoint(const ScalarTracePoly& f, double tol = 1e-12);
// Drops coefficients with |c| <= tol.
ScalarTracePoly prune(const ScalarTracePoly& f, double tol);
OperatorTracePoly prune(const OperatorTracePoly& f, double tol);

OperatorTracePoly cyclic_gradient(const ScalarTracePoly& V, int j);
BiWord free_difference_quotient(const Word& p, int j);

struct LaplacianMode {
  bool large_n = false;
  int n = 0;
  static LaplacianMode finite(int n) { return {false, n}; }
  static LaplacianMode large() { return {true, 0}; }
};

// (1/N) Delta in Tr-orthonormal coordinates of the variables where block[j]
// is true (all variables when block is empty).
ScalarTracePoly laplacian(const ScalarTracePoly& f, LaplacianMode mode, const std::vector<bool>& block = {});
OperatorTracePoly laplacian(const OperatorTracePoly& f, LaplacianMode mode, const std::vector<bool>& block = {});

// exp(tL/2) f on the span generated by repeated application of L.
ScalarTracePoly heat_apply(const ScalarTracePoly& f, double t, LaplacianMode mode,
                           const std::vector<bool>& block = {}, int max_degree = 12);
OperatorTracePoly heat_apply(const OperatorTracePoly& f, double t, LaplacianMode mode,
                             const std::vector<bool>& block = {}, int max_degree = 12);

std::string to_string(const ScalarTracePoly& f);
std::string to_string(const OperatorTracePoly& f);

// Caches products and normalized traces of words on a fixed tuple.
template <typename Real>
class WordEvaluator {
 public:
  using MatrixType = BasicMatrix<Real>;
  explicit WordEvaluator(const BasicMatrixTuple<Real>& x) : x_(x) {}

  const MatrixType& product(const Word& w);
  std::complex<Real> trace(const Word& w);
  const BasicMatrixTuple<Real>& point() const { return x_; }

 private:
  const BasicMatrixTuple<Real>& x_;
  std::map<Word, MatrixType> products_;
  std::map<Word, std::complex<Real>> traces_;
};

template <typename Real>
std::complex<Real> evaluate_scalar(const ScalarTracePoly& f, WordEvaluator<Real>& ev);
template <typename Real>
std::complex<Real> evaluate_scalar(const ScalarTracePoly& f, const BasicMatrixTuple<Real>& x);
template <typename Real>
BasicMatrix<Real> evaluate_operator(const OperatorTracePoly& f, WordEvaluator<Real>& ev);
template <typename Real>
BasicMatrix<Real> evaluate_operator(const OperatorTracePoly& f, const BasicMatrixTuple<Real>& x);
// (tau (x) tau) of a biword.
template <typename Real>
std::complex<Real> evaluate_tau_tensor(const BiWord& b, WordEvaluator<Real>& ev);

}  // namespace mmlab
