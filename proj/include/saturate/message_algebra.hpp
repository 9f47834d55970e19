#ifndef SATURATE_MESSAGE_ALGEBRA_HPP
#define SATURATE_MESSAGE_ALGEBRA_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "saturate/combinatorics.hpp"
#include "saturate/rational.hpp"

namespace saturate {

// Message distributions for decoding over GF(2^m): a length-(m+1) probability
// vector over message dimensions, and its length-m tail-sum (CCDF) transform.
// Both carry a double and an exact-rational backend with the same contracts;
// the exact backend feeds symbolic extraction, the double backend feeds DE.

inline constexpr double kSumTol = 1e-12;    // simplex / monotonicity tolerance
inline constexpr double kClampTol = 1e-14;  // negative mass treated as roundoff

namespace detail {
template <class T>
constexpr bool is_exact = !std::is_floating_point_v<T>;
}

template <class T>
class ProbVec {
 public:
  explicit ProbVec(int m) : m_(m), e_(static_cast<size_t>(m) + 1, T(0)) {
    if (m < 1) throw std::invalid_argument("ProbVec: m must be >= 1");
  }

  // Unit mass at dimension k.
  static ProbVec delta(int m, int k) {
    ProbVec p(m);
    if (k < 0 || k > m) throw std::invalid_argument("ProbVec::delta: k out of range");
    p.e_[static_cast<size_t>(k)] = T(1);
    return p;
  }

  int dim() const { return m_; }
  T& operator[](int i) { return e_[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return e_[static_cast<size_t>(i)]; }
  std::span<const T> entries() const { return e_; }
  std::span<T> entries() { return e_; }

 private:
  int m_;
  std::vector<T> e_;
};

template <class T>
class CcdfVec {
 public:
  explicit CcdfVec(int m) : m_(m), e_(static_cast<size_t>(m), T(0)) {
    if (m < 1) throw std::invalid_argument("CcdfVec: m must be >= 1");
  }

  static CcdfVec ones(int m) {
    CcdfVec x(m);
    for (auto& v : x.e_) v = T(1);
    return x;
  }

  int dim() const { return m_; }
  // entry i holds x_{i+1} in 1-based math notation
  T& operator[](int i) { return e_[static_cast<size_t>(i)]; }
  const T& operator[](int i) const { return e_[static_cast<size_t>(i)]; }
  std::span<const T> entries() const { return e_; }
  std::span<T> entries() { return e_; }

  bool is_zero() const {
    for (const auto& v : e_)
      if (v != T(0)) return false;
    return true;
  }

 private:
  int m_;
  std::vector<T> e_;
};

using ProbVecD = ProbVec<double>;
using ProbVecQ = ProbVec<Rational>;
using CcdfVecD = CcdfVec<double>;
using CcdfVecQ = CcdfVec<Rational>;

// --- validation --------------------------------------------------------

template <class T>
void validate(const ProbVec<T>& p) {
  T sum(0);
  for (int i = 0; i <= p.dim(); ++i) {
    const T& v = p[i];
    if constexpr (detail::is_exact<T>) {
      if (v < 0) throw std::invalid_argument("ProbVec: negative entry");
    } else {
      if (v < -kClampTol) throw std::invalid_argument("ProbVec: negative entry beyond tolerance");
    }
    sum += v;
  }
  if constexpr (detail::is_exact<T>) {
    if (sum != 1) throw std::invalid_argument("ProbVec: entries must sum to 1");
  } else {
    if (std::abs(sum - 1.0) > kSumTol) throw std::invalid_argument("ProbVec: entries must sum to 1");
  }
}

template <class T>
void validate(const CcdfVec<T>& x) {
  T prev(1);
  for (int i = 0; i < x.dim(); ++i) {
    const T& v = x[i];
    if constexpr (detail::is_exact<T>) {
      if (v > prev || v < 0) throw std::invalid_argument("CcdfVec: not a monotone vector in [0,1]");
    } else {
      if (v > prev + kSumTol || v < -kSumTol)
        throw std::invalid_argument("CcdfVec: not a monotone vector in [0,1]");
    }
    prev = v;
  }
}

// Clamp roundoff negatives to zero and renormalize (double backend only).
void normalize(ProbVec<double>& p);
inline void normalize(ProbVec<Rational>&) {}

// --- H map and its inverse ---------------------------------------------

template <class T>
CcdfVec<T> to_ccdf(const ProbVec<T>& p) {
  validate(p);
  const int m = p.dim();
  CcdfVec<T> x(m);
  T acc(0);
  for (int i = m; i >= 1; --i) {
    acc += p[i];
    x[i - 1] = acc;
  }
  return x;
}

template <class T>
ProbVec<T> from_ccdf(const CcdfVec<T>& x) {
  validate(x);
  const int m = x.dim();
  ProbVec<T> p(m);
  p[0] = T(1) - x[0];
  for (int i = 1; i < m; ++i) p[i] = x[i - 1] - x[i];
  p[m] = x[m - 1];
  normalize(p);
  return p;
}

// --- channel and the two convolutions ----------------------------------

namespace detail {
template <class T>
T scalar_from(const BigInt& n) {
  if constexpr (is_exact<T>) {
    return Rational(n);
  } else {
    return n.convert_to<double>();
  }
}
}  // namespace detail

// Entry i: binom(m,i) eps^i (1-eps)^(m-i).
template <class T>
ProbVec<T> channel_vector(int m, const T& eps) {
  if (eps < T(0) || eps > T(1)) throw std::invalid_argument("channel_vector: eps out of [0,1]");
  ProbVec<T> p(m);
  for (int i = 0; i <= m; ++i) {
    T v = detail::scalar_from<T>(binomial(m, i));
    for (int t = 0; t < i; ++t) v *= eps;
    for (int t = 0; t < m - i; ++t) v *= (T(1) - eps);
    p[i] = v;
  }
  return p;
}

namespace detail {
template <class T>
const SubspaceCoeffs<T>& coeffs_for(int m);
template <>
inline const SubspaceCoeffs<double>& coeffs_for<double>(int m) {
  return double_coeffs(m);
}
template <>
inline const SubspaceCoeffs<Rational>& coeffs_for<Rational>(int m) {
  return exact_coeffs(m);
}
}  // namespace detail

// [a (.) b]_k = sum_{i=k..m} sum_{j=k..m+k-i} V^m_{i,j,k} a_i b_j  (intersection)
template <class T>
ProbVec<T> boxdot(const ProbVec<T>& a, const ProbVec<T>& b, const SubspaceCoeffs<T>& tab) {
  const int m = a.dim();
  if (b.dim() != m || tab.m != m) throw std::invalid_argument("boxdot: dimension mismatch");
  ProbVec<T> out(m);
  for (int k = 0; k <= m; ++k) {
    T acc(0);
    for (int i = k; i <= m; ++i) {
      for (int j = k; j <= m + k - i; ++j) {
        acc += tab.v(i, j, k) * a[i] * b[j];
      }
    }
    out[k] = acc;
  }
  normalize(out);
  return out;
}

// [a (+) b]_k = sum_{i=0..k} sum_{j=k-i..k} C^m_{i,j,k} a_i b_j  (sum of subspaces)
template <class T>
ProbVec<T> boxtimes(const ProbVec<T>& a, const ProbVec<T>& b, const SubspaceCoeffs<T>& tab) {
  const int m = a.dim();
  if (b.dim() != m || tab.m != m) throw std::invalid_argument("boxtimes: dimension mismatch");
  ProbVec<T> out(m);
  for (int k = 0; k <= m; ++k) {
    T acc(0);
    for (int i = 0; i <= k; ++i) {
      for (int j = k - i; j <= k; ++j) {
        acc += tab.c(i, j, k) * a[i] * b[j];
      }
    }
    out[k] = acc;
  }
  normalize(out);
  return out;
}

template <class T>
ProbVec<T> boxdot(const ProbVec<T>& a, const ProbVec<T>& b) {
  return boxdot(a, b, detail::coeffs_for<T>(a.dim()));
}

template <class T>
ProbVec<T> boxtimes(const ProbVec<T>& a, const ProbVec<T>& b) {
  return boxtimes(a, b, detail::coeffs_for<T>(a.dim()));
}

// componentwise partial order on CCDF vectors
template <class T>
bool preceq(const CcdfVec<T>& a, const CcdfVec<T>& b, double tol = 0.0) {
  if (a.dim() != b.dim()) throw std::invalid_argument("preceq: dimension mismatch");
  for (int i = 0; i < a.dim(); ++i) {
    if constexpr (detail::is_exact<T>) {
      if (a[i] > b[i]) return false;
    } else {
      if (a[i] > b[i] + tol) return false;
    }
  }
  return true;
}

template <class T>
T sup_norm(const CcdfVec<T>& x) {
  T r(0);
  for (int i = 0; i < x.dim(); ++i) {
    T a = x[i] < T(0) ? T(-x[i]) : x[i];
    if (a > r) r = a;
  }
  return r;
}

}  // namespace saturate

#endif
