#include "saturate/combinatorics.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <stdexcept>

namespace saturate {

namespace {

std::atomic<int> g_max_m{12};

void check_m(int m, int lower) {
  if (m < lower) throw std::invalid_argument("combinatorics: m out of range");
  if (m > g_max_m.load()) {
    throw std::invalid_argument("combinatorics: m exceeds table cap (see set_max_table_m)");
  }
}

Rational gauss_impl(int m, int k) {
  if (k < 0 || k > m) return Rational(0);
  if (k == 0 || k == m) return Rational(1);
  Rational r(1);
  for (int l = 0; l < k; ++l) {
    r *= Rational(pow2(m) - pow2(l), pow2(k) - pow2(l));
  }
  return r;
}

Rational v_impl(int m, int i, int j, int k) {
  if (i < 0 || i > m || j < 0 || j > m) return Rational(0);
  if (k < std::max(i + j - m, 0) || k > std::min(i, j)) return Rational(0);
  Rational r = gauss_impl(i, k) * gauss_impl(m - i, j - k);
  r *= Rational(pow2((i - k) * (j - k)));
  r /= gauss_impl(m, j);
  return r;
}

Rational c_impl(int m, int i, int j, int k) {
  if (i < 0 || i > m || j < 0 || j > m) return Rational(0);
  if (k < std::max(i, j) || k > std::min(i + j, m)) return Rational(0);
  Rational r = gauss_impl(m - i, m - k) * gauss_impl(i, k - j);
  r *= Rational(pow2((k - i) * (k - j)));
  r /= gauss_impl(m, m - j);
  return r;
}

}  // namespace

int max_table_m() { return g_max_m.load(); }
void set_max_table_m(int m) { g_max_m.store(m); }

Rational gaussian_binomial(int m, int k) {
  check_m(m, 0);
  static std::mutex mu;
  static std::map<std::pair<int, int>, Rational> memo;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(m, k);
  auto it = memo.find(key);
  if (it != memo.end()) return it->second;
  return memo.emplace(key, gauss_impl(m, k)).first->second;
}

Rational v_coeff(int m, int i, int j, int k) {
  check_m(m, 1);
  if (i < 0 || i > m || j < 0 || j > m || k < 0 || k > m) return Rational(0);
  return exact_coeffs(m).v(i, j, k);
}

Rational c_coeff(int m, int i, int j, int k) {
  check_m(m, 1);
  if (i < 0 || i > m || j < 0 || j > m || k < 0 || k > m) return Rational(0);
  return exact_coeffs(m).c(i, j, k);
}

SubspaceCoeffs<Rational> make_exact_coeffs(int m) {
  check_m(m, 1);
  SubspaceCoeffs<Rational> t;
  t.m = m;
  const size_t n = static_cast<size_t>(m + 1) * (m + 1) * (m + 1);
  t.vtab.resize(n);
  t.ctab.resize(n);
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      for (int k = 0; k <= m; ++k) {
        const size_t at = (static_cast<size_t>(i) * (m + 1) + j) * (m + 1) + k;
        t.vtab[at] = v_impl(m, i, j, k);
        t.ctab[at] = c_impl(m, i, j, k);
      }
    }
  }
  return t;
}

SubspaceCoeffs<double> make_double_coeffs(int m) {
  const SubspaceCoeffs<Rational>& ex = exact_coeffs(m);
  SubspaceCoeffs<double> t;
  t.m = m;
  t.vtab.reserve(ex.vtab.size());
  t.ctab.reserve(ex.ctab.size());
  for (const auto& r : ex.vtab) t.vtab.push_back(to_double(r));
  for (const auto& r : ex.ctab) t.ctab.push_back(to_double(r));
  return t;
}

namespace {

template <class T>
const SubspaceCoeffs<T>& cached(int m, SubspaceCoeffs<T> (*make)(int)) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<SubspaceCoeffs<T>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(m);
  if (it == cache.end()) {
    it = cache.emplace(m, std::make_unique<SubspaceCoeffs<T>>(make(m))).first;
  }
  return *it->second;
}

}  // namespace

const SubspaceCoeffs<Rational>& exact_coeffs(int m) { return cached<Rational>(m, &make_exact_coeffs); }
const SubspaceCoeffs<double>& double_coeffs(int m) { return cached<double>(m, &make_double_coeffs); }

}  // namespace saturate
