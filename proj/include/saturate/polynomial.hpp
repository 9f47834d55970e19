#ifndef SATURATE_POLYNOMIAL_HPP
#define SATURATE_POLYNOMIAL_HPP

#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "saturate/de_engine.hpp"
#include "saturate/rational.hpp"

namespace saturate {

// Sparse multivariate polynomials with exact univariate-in-eps coefficients.
// These carry the DE maps in closed form: the check/variable updates, their
// supports, and the integrals/derivatives the potential construction needs.

// Univariate polynomial in eps, exact coefficients, trailing zeros trimmed.
class EpsPoly {
 public:
  EpsPoly() = default;
  explicit EpsPoly(Rational constant) { coeffs_.push_back(std::move(constant)); trim(); }
  explicit EpsPoly(std::vector<Rational> coeffs) : coeffs_(std::move(coeffs)) { trim(); }

  static EpsPoly monomial(int power, Rational c);

  bool is_zero() const { return coeffs_.empty(); }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }  // -1 for zero
  Rational coeff(int power) const {
    return power >= 0 && power < static_cast<int>(coeffs_.size()) ? coeffs_[static_cast<size_t>(power)]
                                                                  : Rational(0);
  }
  const std::vector<Rational>& coeffs() const { return coeffs_; }

  EpsPoly& operator+=(const EpsPoly& o);
  EpsPoly& operator-=(const EpsPoly& o);
  EpsPoly operator*(const EpsPoly& o) const;
  EpsPoly& operator*=(const Rational& s);
  friend EpsPoly operator+(EpsPoly a, const EpsPoly& b) { a += b; return a; }
  friend EpsPoly operator-(EpsPoly a, const EpsPoly& b) { a -= b; return a; }
  bool operator==(const EpsPoly& o) const { return coeffs_ == o.coeffs_; }

  Rational eval(const Rational& eps) const;
  double eval(double eps) const;

  // degree <= points-1 polynomial through (xs[i], ys[i]); xs distinct
  static EpsPoly interpolate(std::span<const Rational> xs, std::span<const Rational> ys);

  std::string str() const;

 private:
  void trim() {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
  }
  std::vector<Rational> coeffs_;  // coeffs_[k] * eps^k
};

using Monomial = std::vector<int>;  // exponent vector, length = ambient m

// graded lexicographic: total degree first, then lex
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

using SupportSet = std::set<Monomial, GradedLexLess>;

int total_degree(const Monomial& mo);

// adds 1 to coordinate k (1-based) of every element
SupportSet shift_set(const SupportSet& s, int k);
// subtracts 1 from coordinate k, dropping elements with that coordinate zero
SupportSet unshift_set(const SupportSet& s, int k);

class MultiPoly {
 public:
  using TermMap = std::map<Monomial, EpsPoly, GradedLexLess>;

  explicit MultiPoly(int m) : m_(m) {
    if (m < 1) throw std::invalid_argument("MultiPoly: m must be >= 1");
  }

  static MultiPoly constant(int m, Rational c);
  static MultiPoly variable(int m, int k);  // x_k, 1-based

  int vars() const { return m_; }
  bool is_zero() const { return terms_.empty(); }
  const TermMap& terms() const { return terms_; }

  // adds c * x^mo, dropping the term if it cancels
  void add_term(const Monomial& mo, const EpsPoly& c);

  EpsPoly coeff(const Monomial& mo) const;

  MultiPoly& operator+=(const MultiPoly& o);
  MultiPoly& operator-=(const MultiPoly& o);
  MultiPoly operator*(const MultiPoly& o) const;
  MultiPoly& operator*=(const Rational& s);
  MultiPoly& operator*=(const EpsPoly& s);
  friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { a += b; return a; }
  friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { a -= b; return a; }
  bool operator==(const MultiPoly& o) const { return m_ == o.m_ && terms_ == o.terms_; }

  SupportSet support() const;
  int eps_degree() const;    // max over coefficients, -1 if zero
  int total_degree() const;  // max monomial degree, -1 if zero

  MultiPoly differentiate(int k) const;  // d/dx_k, 1-based
  MultiPoly integrate(int k) const;      // antiderivative from 0 in x_k

  Rational eval_exact(std::span<const Rational> x, const Rational& eps) const;
  double eval(std::span<const double> x, double eps) const;

  // canonical text form, e.g. "(1/3 + 1/6 e) y1^2 + ..."
  std::string str(const std::string& var = "x") const;

 private:
  int m_;
  TermMap terms_;
};

// Flattened double-precision form for hot evaluation loops.
class CompiledPoly {
 public:
  CompiledPoly() = default;
  explicit CompiledPoly(const MultiPoly& p);
  double eval(std::span<const double> x, double eps) const;

 private:
  struct Term {
    std::vector<int> exps;
    std::vector<double> eps_coeffs;
  };
  std::vector<Term> terms_;
};

// Symbolic expansion of the DE maps in CCDF coordinates: f (eps-dependent)
// and g componentwise, exact coefficients. Guarded by max_m since the term
// count grows quickly with m.
struct DePolynomials {
  std::vector<MultiPoly> f;  // size m
  std::vector<MultiPoly> g;  // size m
};

DePolynomials extract_de_polynomials(const EnsembleParams& p, int max_m = 6);

}  // namespace saturate

#endif
