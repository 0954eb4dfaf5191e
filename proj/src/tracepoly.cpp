#include "mmlab/tracepoly.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace mmlab {

Word min_rotation(const Word& w) {
  Word best = w;
  Word rot = w;
  for (std::size_t k = 1; k < w.size(); ++k) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (rot < best) best = rot;
  }
  return best;
}

Word reversed(const Word& w) { return Word(w.rbegin(), w.rend()); }

Word operator+(const Word& a, const Word& b) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Word rotation_after(const Word& w, std::size_t p) {
  Word out(w.begin() + static_cast<long>(p) + 1, w.end());
  out.insert(out.end(), w.begin(), w.begin() + static_cast<long>(p));
  return out;
}

std::string to_string(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (k) s += ' ';
    s += "x" + std::to_string(w[k] + 1);
  }
  return s;
}

std::size_t degree(const TraceMonomial& mono) {
  std::size_t d = 0;
  for (const auto& t : mono) d += t.degree();
  return d;
}

TraceMonomial make_monomial(std::vector<TracedWord> factors) {
  factors.erase(std::remove_if(factors.begin(), factors.end(), [](const TracedWord& t) { return t.degree() == 0; }),
                factors.end());
  std::sort(factors.begin(), factors.end());
  return factors;
}

TraceMonomial merge(const TraceMonomial& a, const TraceMonomial& b) {
  TraceMonomial out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool MonomialLess::operator()(const TraceMonomial& a, const TraceMonomial& b) const {
  const auto da = degree(a), db = degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool OperatorKeyLess::operator()(const OperatorKey& a, const OperatorKey& b) const {
  const auto da = degree(a.traces) + a.word.size(), db = degree(b.traces) + b.word.size();
  if (da != db) return da < db;
  if (a.word != b.word) return DegLex{}(a.word, b.word);
  return MonomialLess{}(a.traces, b.traces);
}

namespace {

void check_letters(const Word& w, int nvars) {
  for (int l : w)
    if (l < 0 || l >= nvars)
      throw std::invalid_argument("trace polynomial: letter x" + std::to_string(l + 1) + " outside " +
                                  std::to_string(nvars) + " variables");
}

template <class Map, class Key>
void accumulate(Map& terms, const Key& key, Complex c) {
  if (c == Complex(0.0)) return;
  auto [it, inserted] = terms.emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == Complex(0.0)) terms.erase(it);
  }
}

void check_vars(int a, int b) {
  if (a != b)
    throw std::invalid_argument("trace polynomial: variable-count mismatch (" + std::to_string(a) + " vs " +
                                std::to_string(b) + ")");
}

}  // namespace

ScalarTracePoly ScalarTracePoly::constant(int nvars, Complex c) {
  ScalarTracePoly f(nvars);
  f.add_term({}, c);
  return f;
}

ScalarTracePoly ScalarTracePoly::trace(int nvars, const Word& w, Complex c) {
  ScalarTracePoly f(nvars);
  f.add_term({TracedWord(w)}, c);
  return f;
}

void ScalarTracePoly::add_term(std::vector<TracedWord> factors, Complex c) {
  for (const auto& t : factors) check_letters(t.word(), nvars_);
  accumulate(terms_, make_monomial(std::move(factors)), c);
}

void ScalarTracePoly::add_monomial(const TraceMonomial& mono, Complex c) { accumulate(terms_, mono, c); }

int ScalarTracePoly::degree() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, static_cast<int>(mmlab::degree(k)));
  return d;
}

Complex ScalarTracePoly::constant_term() const { return coefficient({}); }

Complex ScalarTracePoly::coefficient(const TraceMonomial& mono) const {
  auto it = terms_.find(mono);
  return it == terms_.end() ? Complex(0.0) : it->second;
}

ScalarTracePoly& ScalarTracePoly::operator+=(const ScalarTracePoly& o) {
  check_vars(nvars_, o.nvars_);
  for (const auto& [k, c] : o.terms_) accumulate(terms_, k, c);
  return *this;
}

ScalarTracePoly& ScalarTracePoly::operator-=(const ScalarTracePoly& o) {
  check_vars(nvars_, o.nvars_);
  for (const auto& [k, c] : o.terms_) accumulate(terms_, k, -c);
  return *this;
}

ScalarTracePoly& ScalarTracePoly::operator*=(Complex s) {
  if (s == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

OperatorTracePoly OperatorTracePoly::word(int nvars, const Word& w, Complex c) {
  OperatorTracePoly f(nvars);
  f.add_term({}, w, c);
  return f;
}

void OperatorTracePoly::add_term(std::vector<TracedWord> traces, Word w, Complex c) {
  for (const auto& t : traces) check_letters(t.word(), nvars_);
  check_letters(w, nvars_);
  accumulate(terms_, OperatorKey{make_monomial(std::move(traces)), std::move(w)}, c);
}

void OperatorTracePoly::add_key(const OperatorKey& key, Complex c) { accumulate(terms_, key, c); }

int OperatorTracePoly::degree() const {
  int d = -1;
  for (const auto& [k, c] : terms_) d = std::max(d, static_cast<int>(mmlab::degree(k.traces) + k.word.size()));
  return d;
}

OperatorTracePoly& OperatorTracePoly::operator+=(const OperatorTracePoly& o) {
  check_vars(nvars_, o.nvars_);
  for (const auto& [k, c] : o.terms_) accumulate(terms_, k, c);
  return *this;
}

OperatorTracePoly& OperatorTracePoly::operator-=(const OperatorTracePoly& o) {
  check_vars(nvars_, o.nvars_);
  for (const auto& [k, c] : o.terms_) accumulate(terms_, k, -c);
  return *this;
}

OperatorTracePoly& OperatorTracePoly::operator*=(Complex s) {
  if (s == Complex(0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [k, c] : terms_) c *= s;
  return *this;
}

void BiWord::add_term(Word a, Word b, Complex c) { accumulate(terms_, Key{std::move(a), std::move(b)}, c); }

BiWord& BiWord::operator+=(const BiWord& o) {
  for (const auto& [k, c] : o.terms_) accumulate(terms_, k, c);
  return *this;
}

BiWord BiWord::left_mul(const Word& p) const {
  BiWord out;
  for (const auto& [k, c] : terms_) out.add_term(p + k.first, k.second, c);
  return out;
}

BiWord BiWord::right_mul(const Word& q) const {
  BiWord out;
  for (const auto& [k, c] : terms_) out.add_term(k.first, k.second + q, c);
  return out;
}

bool operator==(const ScalarTracePoly& a, const ScalarTracePoly& b) {
  return a.nvars() == b.nvars() && a.terms() == b.terms();
}

bool operator==(const OperatorTracePoly& a, const OperatorTracePoly& b) {
  if (a.nvars() != b.nvars() || a.terms().size() != b.terms().size()) return false;
  auto ia = a.terms().begin();
  for (auto ib = b.terms().begin(); ib != b.terms().end(); ++ia, ++ib)
    if (ia->first.traces != ib->first.traces || ia->first.word != ib->first.word || ia->second != ib->second)
      return false;
  return true;
}

ScalarTracePoly operator+(ScalarTracePoly a, const ScalarTracePoly& b) { return a += b; }
ScalarTracePoly operator-(ScalarTracePoly a, const ScalarTracePoly& b) { return a -= b; }
ScalarTracePoly operator*(Complex s, ScalarTracePoly a) { return a *= s; }
OperatorTracePoly operator+(OperatorTracePoly a, const OperatorTracePoly& b) { return a += b; }
OperatorTracePoly operator-(OperatorTracePoly a, const OperatorTracePoly& b) { return a -= b; }
OperatorTracePoly operator*(Complex s, OperatorTracePoly a) { return a *= s; }

ScalarTracePoly operator*(const ScalarTracePoly& a, const ScalarTracePoly& b) {
  check_vars(a.nvars(), b.nvars());
  ScalarTracePoly out(a.nvars());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) out.add_monomial(merge(ka, kb), ca * cb);
  return out;
}

OperatorTracePoly operator*(const OperatorTracePoly& a, const OperatorTracePoly& b) {
  check_vars(a.nvars(), b.nvars());
  OperatorTracePoly out(a.nvars());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms())
      out.add_key(OperatorKey{merge(ka.traces, kb.traces), ka.word + kb.word}, ca * cb);
  return out;
}

OperatorTracePoly operator*(const ScalarTracePoly& a, const OperatorTracePoly& b) {
  check_vars(a.nvars(), b.nvars());
  OperatorTracePoly out(a.nvars());
  for (const auto& [ka, ca] : a.terms())
    for (const auto& [kb, cb] : b.terms()) out.add_key(OperatorKey{merge(ka, kb.traces), kb.word}, ca * cb);
  return out;
}

OperatorTracePoly operator*(const OperatorTracePoly& a, const ScalarTracePoly& b) { return b * a; }

ScalarTracePoly canonicalize(const ScalarTracePoly& f) {
  ScalarTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms()) out.add_term(std::vector<TracedWord>(k.begin(), k.end()), c);
  return out;
}

OperatorTracePoly canonicalize(const OperatorTracePoly& f) {
  OperatorTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms()) out.add_term(std::vector<TracedWord>(k.traces.begin(), k.traces.end()), k.word, c);
  return out;
}

namespace {
std::vector<TracedWord> adjoint_traces(const TraceMonomial& mono) {
  std::vector<TracedWord> out;
  for (const auto& t : mono) out.emplace_back(reversed(t.word()));
  return out;
}
}  // namespace

ScalarTracePoly adjoint(const ScalarTracePoly& f) {
  ScalarTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms()) out.add_term(adjoint_traces(k), std::conj(c));
  return out;
}

OperatorTracePoly adjoint(const OperatorTracePoly& f) {
  OperatorTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms()) out.add_term(adjoint_traces(k.traces), reversed(k.word), std::conj(c));
  return out;
}

ScalarTracePoly trace(const OperatorTracePoly& f) {
  ScalarTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms()) {
    std::vector<TracedWord> factors(k.traces.begin(), k.traces.end());
    factors.emplace_back(k.word);
    out.add_term(std::move(factors), c);
  }
  return out;
}

ScalarTracePoly trace_pair(const OperatorTracePoly& f, const OperatorTracePoly& g) { return trace(f * g); }

bool is_self_adjoint(const ScalarTracePoly& f, double tol) {
  auto d = f - adjoint(f);
  for (const auto& [k, c] : d.terms())
    if (std::abs(c) > tol) return false;
  return true;
}

ScalarTracePoly prune(const ScalarTracePoly& f, double tol) {
  ScalarTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms())
    if (std::abs(c) > tol) out.add_monomial(k, c);
  return out;
}

OperatorTracePoly prune(const OperatorTracePoly& f, double tol) {
  OperatorTracePoly out(f.nvars());
  for (const auto& [k, c] : f.terms())
    if (std::abs(c) > tol) out.add_key(k, c);
  return out;
}

OperatorTracePoly cyclic_gradient(const ScalarTracePoly& V, int j) {
  if (j < 0 || j >= V.nvars()) throw std::out_of_range("cyclic_gradient: variable index out of range");
  OperatorTracePoly out(V.nvars());
  for (const auto& [mono, c] : V.terms()) {
    for (std::size_t r = 0; r < mono.size(); ++r) {
      std::vector<TracedWord> rest;
      for (std::size_t s = 0; s < mono.size(); ++s)
        if (s != r) rest.push_back(mono[s]);
      const Word& w = mono[r].word();
      for (std::size_t p = 0; p < w.size(); ++p)
        if (w[p] == j) out.add_term(rest, rotation_after(w, p), c);
    }
  }
  return out;
}

BiWord free_difference_quotient(const Word& p, int j) {
  BiWord out;
  for (std::size_t k = 0; k < p.size(); ++k)
    if (p[k] == j) out.add_term(Word(p.begin(), p.begin() + static_cast<long>(k)), Word(p.begin() + static_cast<long>(k) + 1, p.end()), 1.0);
  return out;
}

namespace {

bool in_block(const std::vector<bool>& block, int letter) {
  return block.empty() || block[static_cast<std::size_t>(letter)];
}

std::vector<TracedWord> without(const TraceMonomial& mono, std::size_t r, std::size_t s = static_cast<std::size_t>(-1)) {
  std::vector<TracedWord> out;
  for (std::size_t k = 0; k < mono.size(); ++k)
    if (k != r && k != s) out.push_back(mono[k]);
  return out;
}

Word sub(const Word& w, std::size_t from, std::size_t to) {
  return Word(w.begin() + static_cast<long>(from), w.begin() + static_cast<long>(to));
}

// Contributions to L(product of traces) as (trace factors, coefficient) pairs,
// to be multiplied by `tail` (an operator word or nothing).
template <class Sink>
void scalar_part(const TraceMonomial& mono, Complex c, LaplacianMode mode, const std::vector<bool>& block, Sink&& sink) {
  for (std::size_t r = 0; r < mono.size(); ++r) {
    const Word& w = mono[r].word();
    for (std::size_t p = 0; p < w.size(); ++p) {
      if (!in_block(block, w[p])) continue;
      for (std::size_t q = p + 1; q < w.size(); ++q) {
        if (w[q] != w[p]) continue;
        auto f = without(mono, r);
        f.emplace_back(sub(w, p + 1, q));
        f.emplace_back(sub(w, q + 1, w.size()) + sub(w, 0, p));
        sink(std::move(f), 2.0 * c);
      }
    }
  }
  if (mode.large_n) return;
  const double n2 = double(mode.n) * double(mode.n);
  for (std::size_t r = 0; r < mono.size(); ++r)
    for (std::size_t s = r + 1; s < mono.size(); ++s) {
      const Word& a = mono[r].word();
      const Word& b = mono[s].word();
      for (std::size_t p = 0; p < a.size(); ++p) {
        if (!in_block(block, a[p])) continue;
        for (std::size_t q = 0; q < b.size(); ++q) {
          if (b[q] != a[p]) continue;
          auto f = without(mono, r, s);
          f.emplace_back(rotation_after(a, p) + rotation_after(b, q));
          sink(std::move(f), 2.0 * c / n2);
        }
      }
    }
}

void check_mode(LaplacianMode mode) {
  if (!mode.large_n && mode.n < 1) throw std::invalid_argument("laplacian: finite mode needs N >= 1");
}

void check_block(const std::vector<bool>& block, int nvars) {
  if (!block.empty() && static_cast<int>(block.size()) != nvars)
    throw std::invalid_argument("laplacian: block mask size does not match variable count");
}

}  // namespace

ScalarTracePoly laplacian(const ScalarTracePoly& f, LaplacianMode mode, const std::vector<bool>& block) {
  check_mode(mode);
  check_block(block, f.nvars());
  ScalarTracePoly out(f.nvars());
  for (const auto& [mono, c] : f.terms())
    scalar_part(mono, c, mode, block, [&](std::vector<TracedWord> fac, Complex v) { out.add_term(std::move(fac), v); });
  return out;
}

OperatorTracePoly laplacian(const OperatorTracePoly& f, LaplacianMode mode, const std::vector<bool>& block) {
  check_mode(mode);
  check_block(block, f.nvars());
  OperatorTracePoly out(f.nvars());
  for (const auto& [key, c] : f.terms()) {
    const auto& mono = key.traces;
    const Word& q = key.word;
    scalar_part(mono, c, mode, block,
                [&](std::vector<TracedWord> fac, Complex v) { out.add_term(std::move(fac), q, v); });
    for (std::size_t p = 0; p < q.size(); ++p) {
      if (!in_block(block, q[p])) continue;
      for (std::size_t r = p + 1; r < q.size(); ++r) {
        if (q[r] != q[p]) continue;
        std::vector<TracedWord> fac(mono.begin(), mono.end());
        fac.emplace_back(sub(q, p + 1, r));
        out.add_term(std::move(fac), sub(q, 0, p) + sub(q, r + 1, q.size()), 2.0 * c);
      }
    }
    if (mode.large_n) continue;
    const double n2 = double(mode.n) * double(mode.n);
    for (std::size_t s = 0; s < mono.size(); ++s) {
      const Word& w = mono[s].word();
      for (std::size_t p = 0; p < w.size(); ++p) {
        if (!in_block(block, w[p])) continue;
        for (std::size_t r = 0; r < q.size(); ++r) {
          if (q[r] != w[p]) continue;
          out.add_term(without(mono, s), sub(q, 0, r) + rotation_after(w, p) + sub(q, r + 1, q.size()), 2.0 * c / n2);
        }
      }
    }
  }
  return out;
}

namespace {

ScalarTracePoly single(int nvars, const TraceMonomial& k) {
  ScalarTracePoly f(nvars);
  f.add_monomial(k, 1.0);
  return f;
}

OperatorTracePoly single(int nvars, const OperatorKey& k) {
  OperatorTracePoly f(nvars);
  f.add_key(k, 1.0);
  return f;
}

template <class Poly, class Less>
Poly heat_impl(const Poly& f, double t, LaplacianMode mode, const std::vector<bool>& block, int max_degree) {
  if (t < 0) throw std::invalid_argument("heat_apply: t must be nonnegative");
  if (f.degree() > max_degree)
    throw std::invalid_argument("heat_apply: degree " + std::to_string(f.degree()) + " exceeds configured bound " +
                                std::to_string(max_degree));
  using Key = typename Poly::Terms::key_type;
  std::map<Key, int, Less> index;
  std::vector<Key> keys;
  std::vector<Poly> images;
  for (const auto& [k, c] : f.terms()) {
    index.emplace(k, static_cast<int>(keys.size()));
    keys.push_back(k);
  }
  for (std::size_t i = 0; i < keys.size(); ++i) {
    Poly img = laplacian(single(f.nvars(), keys[i]), mode, block);
    for (const auto& [k, c] : img.terms())
      if (index.emplace(k, static_cast<int>(keys.size())).second) keys.push_back(k);
    images.push_back(std::move(img));
  }
  const int n = static_cast<int>(keys.size());
  Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (const auto& [k, c] : images[i].terms()) L(index.at(k), i) = c;
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
  for (const auto& [k, c] : f.terms()) v(index.at(k)) = c;
  Eigen::MatrixXcd E = (L * Complex(0.5 * t)).exp();
  Eigen::VectorXcd w = E * v;
  Poly out(f.nvars());
  for (int i = 0; i < n; ++i)
    if (w(i) != Complex(0.0)) out += w(i) * single(f.nvars(), keys[i]);
  return out;
}

}  // namespace

ScalarTracePoly heat_apply(const ScalarTracePoly& f, double t, LaplacianMode mode, const std::vector<bool>& block,
                           int max_degree) {
  check_mode(mode);
  check_block(block, f.nvars());
  return heat_impl<ScalarTracePoly, MonomialLess>(f, t, mode, block, max_degree);
}

OperatorTracePoly heat_apply(const OperatorTracePoly& f, double t, LaplacianMode mode, const std::vector<bool>& block,
                             int max_degree) {
  check_mode(mode);
  check_block(block, f.nvars());
  return heat_impl<OperatorTracePoly, OperatorKeyLess>(f, t, mode, block, max_degree);
}

namespace {

std::string coef_string(Complex c) {
  char buf[96];
  if (c.imag() == 0.0)
    std::snprintf(buf, sizeof buf, "%.17g", c.real());
  else
    std::snprintf(buf, sizeof buf, "(%.17g%+.17gi)", c.real(), c.imag());
  return buf;
}

std::string mono_string(const TraceMonomial& m) {
  std::string s;
  for (const auto& t : m) s += "*tr(" + to_string(t.word()) + ")";
  return s;
}

}  // namespace

std::string to_string(const ScalarTracePoly& f) {
  if (f.is_zero()) return "0";
  std::string s;
  for (const auto& [k, c] : f.terms()) {
    if (!s.empty()) s += " + ";
    s += coef_string(c) + mono_string(k);
  }
  return s;
}

std::string to_string(const OperatorTracePoly& f) {
  if (f.is_zero()) return "0";
  std::string s;
  for (const auto& [k, c] : f.terms()) {
    if (!s.empty()) s += " + ";
    s += coef_string(c) + mono_string(k.traces);
    if (!k.word.empty()) s += "*" + to_string(k.word);
  }
  return s;
}

template <typename Real>
const BasicMatrix<Real>& WordEvaluator<Real>::product(const Word& w) {
  auto it = products_.find(w);
  if (it != products_.end()) return it->second;
  for (int l : w)
    if (l < 0 || l >= x_.size()) throw std::invalid_argument("evaluate: letter outside the tuple");
  MatrixType value;
  if (w.empty())
    value = MatrixType::Identity(x_.dim(), x_.dim());
  else if (w.size() == 1)
    value = x_[w[0]];
  else
    value = product(Word(w.begin(), w.end() - 1)) * x_[w.back()];
  return products_.emplace(w, std::move(value)).first->second;
}

template <typename Real>
std::complex<Real> WordEvaluator<Real>::trace(const Word& w) {
  if (w.empty()) return std::complex<Real>(1);
  auto it = traces_.find(w);
  if (it != traces_.end()) return it->second;
  std::complex<Real> value;
  if (w.size() == 1) {
    if (w[0] < 0 || w[0] >= x_.size()) throw std::invalid_argument("evaluate: letter outside the tuple");
    value = tau(x_[w[0]]);
  } else {
    const MatrixType& p = product(Word(w.begin(), w.end() - 1));
    const MatrixType& last = x_[w.back()];
    value = (p.array() * last.transpose().array()).sum() / std::complex<Real>(Real(x_.dim()));
  }
  traces_.emplace(w, value);
  return value;
}

namespace {
template <typename Real>
void check_tuple(int nvars, const BasicMatrixTuple<Real>& x) {
  if (x.size() != nvars)
    throw std::invalid_argument("evaluate: polynomial has " + std::to_string(nvars) + " variables but tuple has " +
                                std::to_string(x.size()));
}
}  // namespace

template <typename Real>
std::complex<Real> evaluate_scalar(const ScalarTracePoly& f, WordEvaluator<Real>& ev) {
  check_tuple(f.nvars(), ev.point());
  std::complex<Real> s(0);
  for (const auto& [k, c] : f.terms()) {
    std::complex<Real> term(Real(c.real()), Real(c.imag()));
    for (const auto& t : k) term *= ev.trace(t.word());
    s += term;
  }
  return s;
}

template <typename Real>
std::complex<Real> evaluate_scalar(const ScalarTracePoly& f, const BasicMatrixTuple<Real>& x) {
  WordEvaluator<Real> ev(x);
  return evaluate_scalar(f, ev);
}

template <typename Real>
BasicMatrix<Real> evaluate_operator(const OperatorTracePoly& f, WordEvaluator<Real>& ev) {
  check_tuple(f.nvars(), ev.point());
  const int n = ev.point().dim();
  BasicMatrix<Real> out = BasicMatrix<Real>::Zero(n, n);
  for (const auto& [k, c] : f.terms()) {
    std::complex<Real> s(Real(c.real()), Real(c.imag()));
    for (const auto& t : k.traces) s *= ev.trace(t.word());
    if (k.word.empty())
      out.diagonal().array() += s;
    else
      out += s * ev.product(k.word);
  }
  return out;
}

template <typename Real>
BasicMatrix<Real> evaluate_operator(const OperatorTracePoly& f, const BasicMatrixTuple<Real>& x) {
  WordEvaluator<Real> ev(x);
  return evaluate_operator(f, ev);
}

template <typename Real>
std::complex<Real> evaluate_tau_tensor(const BiWord& b, WordEvaluator<Real>& ev) {
  std::complex<Real> s(0);
  for (const auto& [k, c] : b.terms())
    s += std::complex<Real>(Real(c.real()), Real(c.imag())) * ev.trace(min_rotation(k.first)) *
         ev.trace(min_rotation(k.second));
  return s;
}

template class WordEvaluator<double>;
template class WordEvaluator<long double>;
template std::complex<double> evaluate_scalar(const ScalarTracePoly&, WordEvaluator<double>&);
template std::complex<long double> evaluate_scalar(const ScalarTracePoly&, WordEvaluator<long double>&);
template std::complex<double> evaluate_scalar(const ScalarTracePoly&, const BasicMatrixTuple<double>&);
template std::complex<long double> evaluate_scalar(const ScalarTracePoly&, const BasicMatrixTuple<long double>&);
template BasicMatrix<double> evaluate_operator(const OperatorTracePoly&, WordEvaluator<double>&);
template BasicMatrix<long double> evaluate_operator(const OperatorTracePoly&, WordEvaluator<long double>&);
template BasicMatrix<double> evaluate_operator(const OperatorTracePoly&, const BasicMatrixTuple<double>&);
template BasicMatrix<long double> evaluate_operator(const OperatorTracePoly&, const BasicMatrixTuple<long double>&);
template std::complex<double> evaluate_tau_tensor(const BiWord&, WordEvaluator<double>&);
template std::complex<long double> evaluate_tau_tensor(const BiWord&, WordEvaluator<long double>&);

}  // namespace mmlab
