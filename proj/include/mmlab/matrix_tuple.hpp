#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mmlab {

template <typename Real>
using BasicMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

using Matrix = BasicMatrix<double>;
using Complex = std::complex<double>;

// Normalized trace (1/N) Tr.
template <typename Derived>
auto tau(const Eigen::MatrixBase<Derived>& a) {
  using S = typename Derived::Scalar;
  return a.trace() / S(static_cast<typename Eigen::NumTraits<S>::Real>(a.rows()));
}

// A tuple of m square matrices of common size N, with the normalized
// inner product <a,b>_2 = sum_j Re tau(a_j^* b_j).
template <typename Real>
class BasicMatrixTuple {
 public:
  using RealScalar = Real;
  using Scalar = std::complex<Real>;
  using MatrixType = BasicMatrix<Real>;

  BasicMatrixTuple() = default;
  BasicMatrixTuple(int count, int dim) : mats_(count, MatrixType::Zero(dim, dim)), dim_(dim) {}

  explicit BasicMatrixTuple(std::vector<MatrixType> mats) : mats_(std::move(mats)) {
    if (!mats_.empty()) dim_ = static_cast<int>(mats_.front().rows());
    for (const auto& a : mats_)
      if (a.rows() != dim_ || a.cols() != dim_)
        throw std::invalid_argument("matrix tuple: inconsistent matrix dimensions");
  }

  static BasicMatrixTuple zeros(int count, int dim) { return BasicMatrixTuple(count, dim); }

  static BasicMatrixTuple scalars(const std::vector<double>& values, int dim) {
    BasicMatrixTuple t(static_cast<int>(values.size()), dim);
    for (std::size_t j = 0; j < values.size(); ++j)
      t.mats_[j] = MatrixType::Identity(dim, dim) * Scalar(Real(values[j]));
    return t;
  }

  int size() const { return static_cast<int>(mats_.size()); }
  int dim() const { return dim_; }
  bool empty() const { return mats_.empty(); }

  MatrixType& operator[](int j) { return mats_[j]; }
  const MatrixType& operator[](int j) const { return mats_[j]; }

  auto begin() { return mats_.begin(); }
  auto end() { return mats_.end(); }
  auto begin() const { return mats_.begin(); }
  auto end() const { return mats_.end(); }

  void push_back(MatrixType a) {
    if (mats_.empty()) dim_ = static_cast<int>(a.rows());
    if (a.rows() != dim_ || a.cols() != dim_)
      throw std::invalid_argument("matrix tuple: inconsistent matrix dimensions");
    mats_.push_back(std::move(a));
  }

  BasicMatrixTuple& operator+=(const BasicMatrixTuple& o) {
    check_same(o);
    for (int j = 0; j < size(); ++j) mats_[j] += o.mats_[j];
    return *this;
  }
  BasicMatrixTuple& operator-=(const BasicMatrixTuple& o) {
    check_same(o);
    for (int j = 0; j < size(); ++j) mats_[j] -= o.mats_[j];
    return *this;
  }
  BasicMatrixTuple& operator*=(Real s) {
    for (auto& a : mats_) a *= Scalar(s);
    return *this;
  }

  // this += s * o
  BasicMatrixTuple& axpy(Real s, const BasicMatrixTuple& o) {
    check_same(o);
    for (int j = 0; j < size(); ++j) mats_[j] += Scalar(s) * o.mats_[j];
    return *this;
  }

  template <typename Other>
  BasicMatrixTuple<Other> cast() const {
    std::vector<BasicMatrix<Other>> out;
    out.reserve(mats_.size());
    for (const auto& a : mats_) out.push_back(a.template cast<std::complex<Other>>());
    return BasicMatrixTuple<Other>(std::move(out));
  }

  void check_same(const BasicMatrixTuple& o) const {
    if (o.size() != size() || (size() > 0 && o.dim() != dim()))
      throw std::invalid_argument("matrix tuple: shape mismatch (" + std::to_string(size()) + "x" +
                                  std::to_string(dim()) + " vs " + std::to_string(o.size()) + "x" +
                                  std::to_string(o.dim()) + ")");
  }

 private:
  std::vector<MatrixType> mats_;
  int dim_ = 0;
};

using MatrixTuple = BasicMatrixTuple<double>;

template <typename Real>
BasicMatrixTuple<Real> operator+(BasicMatrixTuple<Real> a, const BasicMatrixTuple<Real>& b) {
  return a += b;
}
template <typename Real>
BasicMatrixTuple<Real> operator-(BasicMatrixTuple<Real> a, const BasicMatrixTuple<Real>& b) {
  return a -= b;
}
template <typename Real>
BasicMatrixTuple<Real> operator*(Real s, BasicMatrixTuple<Real> a) {
  return a *= s;
}
template <typename Real>
BasicMatrixTuple<Real> operator*(BasicMatrixTuple<Real> a, Real s) {
  return a *= s;
}

template <typename Real>
Real inner(const BasicMatrixTuple<Real>& a, const BasicMatrixTuple<Real>& b) {
  a.check_same(b);
  Real s = 0;
  // Re tau(a^* b) = (1/N) sum_ik Re(conj(a_ik) b_ik)
  for (int j = 0; j < a.size(); ++j) s += (a[j].array().conjugate() * b[j].array()).real().sum();
  return a.size() == 0 ? Real(0) : s / Real(a.dim());
}

template <typename Real>
Real norm2_squared(const BasicMatrixTuple<Real>& a) {
  Real s = 0;
  for (const auto& m : a) s += m.squaredNorm();
  return a.size() == 0 ? Real(0) : s / Real(a.dim());
}

template <typename Real>
Real norm2(const BasicMatrixTuple<Real>& a) {
  return std::sqrt(norm2_squared(a));
}

// Largest operator norm among the entries.
template <typename Real>
Real opnorm(const BasicMatrixTuple<Real>& a) {
  Real best = 0;
  for (const auto& m : a) {
    Eigen::SelfAdjointEigenSolver<BasicMatrix<Real>> es(m, Eigen::EigenvaluesOnly);
    best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

template <typename Real>
Real hermiticity_defect(const BasicMatrixTuple<Real>& a) {
  Real d = 0;
  for (const auto& m : a) d = std::max(d, (m - m.adjoint()).cwiseAbs().maxCoeff());
  return d;
}

template <typename Real>
void hermitize(BasicMatrixTuple<Real>& a) {
  for (auto& m : a) m = (m + m.adjoint()).eval() * std::complex<Real>(Real(0.5));
}

template <typename Real>
BasicMatrixTuple<Real> select(const BasicMatrixTuple<Real>& a, const std::vector<int>& idx) {
  BasicMatrixTuple<Real> out(static_cast<int>(idx.size()), a.dim());
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<int>(k)] = a[idx[k]];
  return out;
}

template <typename Real>
void scatter(BasicMatrixTuple<Real>& into, const std::vector<int>& idx, const BasicMatrixTuple<Real>& part) {
  if (part.size() != static_cast<int>(idx.size())) throw std::invalid_argument("scatter: size mismatch");
  for (std::size_t k = 0; k < idx.size(); ++k) into[idx[k]] = part[static_cast<int>(k)];
}

template <typename Real>
BasicMatrixTuple<Real> concat(const BasicMatrixTuple<Real>& a, const BasicMatrixTuple<Real>& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dim() != b.dim()) throw std::invalid_argument("concat: dimension mismatch");
  BasicMatrixTuple<Real> out = a;
  for (const auto& m : b) out.push_back(m);
  return out;
}

template <typename Real>
BasicMatrixTuple<Real> slice(const BasicMatrixTuple<Real>& a, int first, int count) {
  BasicMatrixTuple<Real> out(count, a.dim());
  for (int k = 0; k < count; ++k) out[k] = a[first + k];
  return out;
}

// Real linear recombination: out_i = sum_j A_ij a_j.
template <typename Real>
BasicMatrixTuple<Real> mix(const Eigen::MatrixXd& A, const BasicMatrixTuple<Real>& a) {
  if (A.cols() != a.size()) throw std::invalid_argument("mix: coefficient matrix does not match tuple size");
  BasicMatrixTuple<Real> out(static_cast<int>(A.rows()), a.dim());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      if (A(i, j) != 0.0) out[i] += std::complex<Real>(Real(A(i, j))) * a[j];
  return out;
}

}  // namespace mmlab
