#ifndef SATURATE_COMBINATORICS_HPP
#define SATURATE_COMBINATORICS_HPP

#include <memory>
#include <vector>

#include "saturate/rational.hpp"

namespace saturate {

// Subspace-counting kernel for GF(2)^m: Gaussian binomials and the
// intersection/sum transition coefficients. Everything is exact; doubles are
// produced only by the table conversion below.

// Tables are memoized per m up to this cap (configurable to bound memory).
int max_table_m();
void set_max_table_m(int m);

// Number of k-dimensional subspaces of GF(2)^m. Zero outside 0 <= k <= m.
Rational gaussian_binomial(int m, int k);

// Probability that a uniform subspace of dimension j intersects a fixed
// subspace of dimension i in dimension k. Zero off the support
// max(i+j-m,0) <= k <= min(i,j).
Rational v_coeff(int m, int i, int j, int k);

// Probability that a uniform subspace of dimension j sums with a fixed
// subspace of dimension i to dimension k. Zero off the support
// max(i,j) <= k <= min(i+j,m).
Rational c_coeff(int m, int i, int j, int k);

// Dense (m+1)^3 lookup tables for one m. Built once, then read-only; the
// double variant is the numeric DE hot path.
template <class T>
struct SubspaceCoeffs {
  int m = 0;
  std::vector<T> vtab;  // v(i,j,k), row-major
  std::vector<T> ctab;

  const T& v(int i, int j, int k) const {
    return vtab[(static_cast<size_t>(i) * (m + 1) + j) * (m + 1) + k];
  }
  const T& c(int i, int j, int k) const {
    return ctab[(static_cast<size_t>(i) * (m + 1) + j) * (m + 1) + k];
  }
};

SubspaceCoeffs<Rational> make_exact_coeffs(int m);
SubspaceCoeffs<double> make_double_coeffs(int m);

// Shared per-m tables (thread-safe; built on first use).
const SubspaceCoeffs<Rational>& exact_coeffs(int m);
const SubspaceCoeffs<double>& double_coeffs(int m);

}  // namespace saturate

#endif
