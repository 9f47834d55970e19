#include "saturate/polynomial.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace saturate {

// --- EpsPoly -------------------------------------------------------------

EpsPoly EpsPoly::monomial(int power, Rational c) {
  if (power < 0) throw std::invalid_argument("EpsPoly::monomial: negative power");
  EpsPoly p;
  if (c != 0) {
    p.coeffs_.assign(static_cast<size_t>(power) + 1, Rational(0));
    p.coeffs_.back() = std::move(c);
  }
  return p;
}

EpsPoly& EpsPoly::operator+=(const EpsPoly& o) {
  if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  trim();
  return *this;
}

EpsPoly& EpsPoly::operator-=(const EpsPoly& o) {
  if (coeffs_.size() < o.coeffs_.size()) coeffs_.resize(o.coeffs_.size(), Rational(0));
  for (size_t i = 0; i < o.coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  trim();
  return *this;
}

EpsPoly EpsPoly::operator*(const EpsPoly& o) const {
  EpsPoly r;
  if (is_zero() || o.is_zero()) return r;
  r.coeffs_.assign(coeffs_.size() + o.coeffs_.size() - 1, Rational(0));
  for (size_t i = 0; i < coeffs_.size(); ++i) {
    for (size_t j = 0; j < o.coeffs_.size(); ++j) r.coeffs_[i + j] += coeffs_[i] * o.coeffs_[j];
  }
  r.trim();
  return r;
}

EpsPoly& EpsPoly::operator*=(const Rational& s) {
  if (s == 0) {
    coeffs_.clear();
    return *this;
  }
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Rational EpsPoly::eval(const Rational& eps) const {
  Rational r(0);
  for (size_t i = coeffs_.size(); i-- > 0;) r = r * eps + coeffs_[i];
  return r;
}

double EpsPoly::eval(double eps) const {
  double r = 0.0;
  for (size_t i = coeffs_.size(); i-- > 0;) r = r * eps + to_double(coeffs_[i]);
  return r;
}

EpsPoly EpsPoly::interpolate(std::span<const Rational> xs, std::span<const Rational> ys) {
  if (xs.size() != ys.size() || xs.empty()) throw std::invalid_argument("interpolate: bad points");
  const size_t n = xs.size();
  std::vector<Rational> acc(n, Rational(0));
  for (size_t i = 0; i < n; ++i) {
    // Lagrange basis polynomial for node i
    std::vector<Rational> num{Rational(1)};
    Rational den(1);
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<Rational> next(num.size() + 1, Rational(0));
      for (size_t k = 0; k < num.size(); ++k) {
        next[k] += num[k] * (-xs[j]);
        next[k + 1] += num[k];
      }
      num = std::move(next);
      den *= xs[i] - xs[j];
      if (den == 0) throw std::invalid_argument("interpolate: duplicate node");
    }
    for (size_t k = 0; k < num.size(); ++k) acc[k] += ys[i] * num[k] / den;
  }
  return EpsPoly(std::move(acc));
}

std::string EpsPoly::str() const {
  if (is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (size_t k = 0; k < coeffs_.size(); ++k) {
    if (coeffs_[k] == 0) continue;
    if (!first) os << " + ";
    os << to_string(coeffs_[k]);
    if (k >= 1) os << "*e";
    if (k >= 2) os << "^" << k;
    first = false;
  }
  return os.str();
}

// --- monomials -----------------------------------------------------------

int total_degree(const Monomial& mo) { return std::accumulate(mo.begin(), mo.end(), 0); }

bool GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  const int da = total_degree(a), db = total_degree(b);
  if (da != db) return da < db;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

SupportSet shift_set(const SupportSet& s, int k) {
  SupportSet out;
  for (const auto& mo : s) {
    Monomial e = mo;
    e[static_cast<size_t>(k - 1)] += 1;
    out.insert(std::move(e));
  }
  return out;
}

SupportSet unshift_set(const SupportSet& s, int k) {
  SupportSet out;
  for (const auto& mo : s) {
    if (mo[static_cast<size_t>(k - 1)] == 0) continue;
    Monomial e = mo;
    e[static_cast<size_t>(k - 1)] -= 1;
    out.insert(std::move(e));
  }
  return out;
}

// --- MultiPoly -----------------------------------------------------------

MultiPoly MultiPoly::constant(int m, Rational c) {
  MultiPoly p(m);
  p.add_term(Monomial(static_cast<size_t>(m), 0), EpsPoly(std::move(c)));
  return p;
}

MultiPoly MultiPoly::variable(int m, int k) {
  if (k < 1 || k > m) throw std::invalid_argument("MultiPoly::variable: index out of range");
  MultiPoly p(m);
  Monomial mo(static_cast<size_t>(m), 0);
  mo[static_cast<size_t>(k - 1)] = 1;
  p.add_term(mo, EpsPoly(Rational(1)));
  return p;
}

void MultiPoly::add_term(const Monomial& mo, const EpsPoly& c) {
  if (static_cast<int>(mo.size()) != m_) throw std::invalid_argument("MultiPoly: monomial length mismatch");
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.try_emplace(mo, c);
  if (!inserted) {
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

EpsPoly MultiPoly::coeff(const Monomial& mo) const {
  auto it = terms_.find(mo);
  return it == terms_.end() ? EpsPoly() : it->second;
}

MultiPoly& MultiPoly::operator+=(const MultiPoly& o) {
  if (o.m_ != m_) throw std::invalid_argument("MultiPoly: dimension mismatch");
  for (const auto& [mo, c] : o.terms_) add_term(mo, c);
  return *this;
}

MultiPoly& MultiPoly::operator-=(const MultiPoly& o) {
  if (o.m_ != m_) throw std::invalid_argument("MultiPoly: dimension mismatch");
  for (const auto& [mo, c] : o.terms_) {
    EpsPoly neg;
    neg -= c;
    add_term(mo, neg);
  }
  return *this;
}

MultiPoly MultiPoly::operator*(const MultiPoly& o) const {
  if (o.m_ != m_) throw std::invalid_argument("MultiPoly: dimension mismatch");
  MultiPoly r(m_);
  for (const auto& [ma, ca] : terms_) {
    for (const auto& [mb, cb] : o.terms_) {
      Monomial mo(static_cast<size_t>(m_));
      for (int i = 0; i < m_; ++i) mo[static_cast<size_t>(i)] = ma[static_cast<size_t>(i)] + mb[static_cast<size_t>(i)];
      r.add_term(mo, ca * cb);
    }
  }
  return r;
}

MultiPoly& MultiPoly::operator*=(const Rational& s) {
  if (s == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [mo, c] : terms_) c *= s;
  return *this;
}

MultiPoly& MultiPoly::operator*=(const EpsPoly& s) {
  if (s.is_zero()) {
    terms_.clear();
    return *this;
  }
  for (auto& [mo, c] : terms_) c = c * s;
  return *this;
}

SupportSet MultiPoly::support() const {
  SupportSet s;
  for (const auto& [mo, c] : terms_) s.insert(mo);
  return s;
}

int MultiPoly::eps_degree() const {
  int d = -1;
  for (const auto& [mo, c] : terms_) d = std::max(d, c.degree());
  return d;
}

int MultiPoly::total_degree() const {
  int d = -1;
  for (const auto& [mo, c] : terms_) d = std::max(d, saturate::total_degree(mo));
  return d;
}

MultiPoly MultiPoly::differentiate(int k) const {
  if (k < 1 || k > m_) throw std::invalid_argument("differentiate: index out of range");
  MultiPoly r(m_);
  for (const auto& [mo, c] : terms_) {
    const int e = mo[static_cast<size_t>(k - 1)];
    if (e == 0) continue;
    Monomial d = mo;
    d[static_cast<size_t>(k - 1)] = e - 1;
    EpsPoly cc = c;
    cc *= Rational(e);
    r.add_term(d, cc);
  }
  return r;
}

MultiPoly MultiPoly::integrate(int k) const {
  if (k < 1 || k > m_) throw std::invalid_argument("integrate: index out of range");
  MultiPoly r(m_);
  for (const auto& [mo, c] : terms_) {
    Monomial d = mo;
    const int e = ++d[static_cast<size_t>(k - 1)];
    EpsPoly cc = c;
    cc *= Rational(1, e);
    r.add_term(d, cc);
  }
  return r;
}

Rational MultiPoly::eval_exact(std::span<const Rational> x, const Rational& eps) const {
  if (static_cast<int>(x.size()) != m_) throw std::invalid_argument("eval: point dimension mismatch");
  Rational r(0);
  for (const auto& [mo, c] : terms_) {
    Rational t = c.eval(eps);
    for (int i = 0; i < m_; ++i) {
      for (int e = 0; e < mo[static_cast<size_t>(i)]; ++e) t *= x[static_cast<size_t>(i)];
    }
    r += t;
  }
  return r;
}

double MultiPoly::eval(std::span<const double> x, double eps) const {
  if (static_cast<int>(x.size()) != m_) throw std::invalid_argument("eval: point dimension mismatch");
  double r = 0.0;
  for (const auto& [mo, c] : terms_) {
    double t = c.eval(eps);
    for (int i = 0; i < m_; ++i) {
      const int e = mo[static_cast<size_t>(i)];
      for (int q = 0; q < e; ++q) t *= x[static_cast<size_t>(i)];
    }
    r += t;
  }
  return r;
}

std::string MultiPoly::str(const std::string& var) const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [mo, c] : terms_) {
    if (!first) os << " + ";
    os << "(" << c.str() << ")";
    for (int i = 0; i < m_; ++i) {
      const int e = mo[static_cast<size_t>(i)];
      if (e == 0) continue;
      os << "*" << var << (i + 1);
      if (e > 1) os << "^" << e;
    }
    first = false;
  }
  return os.str();
}

// --- CompiledPoly ---------------------------------------------------------

CompiledPoly::CompiledPoly(const MultiPoly& p) {
  for (const auto& [mo, c] : p.terms()) {
    Term t;
    t.exps = mo;
    t.eps_coeffs.reserve(static_cast<size_t>(c.degree()) + 1);
    for (int k = 0; k <= c.degree(); ++k) t.eps_coeffs.push_back(to_double(c.coeff(k)));
    terms_.push_back(std::move(t));
  }
}

double CompiledPoly::eval(std::span<const double> x, double eps) const {
  double r = 0.0;
  for (const auto& t : terms_) {
    double c = 0.0;
    for (size_t i = t.eps_coeffs.size(); i-- > 0;) c = c * eps + t.eps_coeffs[i];
    for (size_t i = 0; i < t.exps.size(); ++i) {
      for (int q = 0; q < t.exps[i]; ++q) c *= x[i];
    }
    r += c;
  }
  return r;
}

// --- DE extraction ---------------------------------------------------------

namespace {

// probability coordinates of a symbolic CCDF vector: m+1 affine polynomials
std::vector<MultiPoly> prob_coords(int m) {
  std::vector<MultiPoly> out;
  out.reserve(static_cast<size_t>(m) + 1);
  MultiPoly x0 = MultiPoly::constant(m, Rational(1));
  x0 -= MultiPoly::variable(m, 1);
  out.push_back(std::move(x0));
  for (int i = 1; i < m; ++i) {
    MultiPoly xi = MultiPoly::variable(m, i);
    xi -= MultiPoly::variable(m, i + 1);
    out.push_back(std::move(xi));
  }
  out.push_back(MultiPoly::variable(m, m));
  return out;
}

std::vector<MultiPoly> boxdot_sym(int m, const std::vector<MultiPoly>& a,
                                  const std::vector<MultiPoly>& b) {
  const auto& tab = exact_coeffs(m);
  std::vector<MultiPoly> out(static_cast<size_t>(m) + 1, MultiPoly(m));
  for (int k = 0; k <= m; ++k) {
    for (int i = k; i <= m; ++i) {
      for (int j = k; j <= m + k - i; ++j) {
        const Rational& v = tab.v(i, j, k);
        if (v == 0) continue;
        MultiPoly t = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)];
        t *= v;
        out[static_cast<size_t>(k)] += t;
      }
    }
  }
  return out;
}

std::vector<MultiPoly> boxtimes_sym(int m, const std::vector<MultiPoly>& a,
                                    const std::vector<MultiPoly>& b) {
  const auto& tab = exact_coeffs(m);
  std::vector<MultiPoly> out(static_cast<size_t>(m) + 1, MultiPoly(m));
  for (int k = 0; k <= m; ++k) {
    for (int i = 0; i <= k; ++i) {
      for (int j = k - i; j <= k; ++j) {
        const Rational& c = tab.c(i, j, k);
        if (c == 0) continue;
        MultiPoly t = a[static_cast<size_t>(i)] * b[static_cast<size_t>(j)];
        t *= c;
        out[static_cast<size_t>(k)] += t;
      }
    }
  }
  return out;
}

// p_o(eps) as constant-in-x polynomials with eps-polynomial coefficients
std::vector<MultiPoly> channel_sym(int m) {
  std::vector<MultiPoly> out;
  out.reserve(static_cast<size_t>(m) + 1);
  const Monomial zero(static_cast<size_t>(m), 0);
  for (int i = 0; i <= m; ++i) {
    // binom(m,i) eps^i (1-eps)^(m-i) expanded in powers of eps
    std::vector<Rational> coeffs(static_cast<size_t>(m) + 1, Rational(0));
    const BigInt bi = binomial(m, i);
    for (int t = 0; t <= m - i; ++t) {
      Rational c(bi * binomial(m - i, t));
      if (t % 2 == 1) c = -c;
      coeffs[static_cast<size_t>(i + t)] += c;
    }
    MultiPoly p(m);
    p.add_term(zero, EpsPoly(std::move(coeffs)));
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<MultiPoly> ccdf_components(int m, const std::vector<MultiPoly>& po) {
  std::vector<MultiPoly> out;
  out.reserve(static_cast<size_t>(m));
  for (int i = 1; i <= m; ++i) {
    MultiPoly acc(m);
    for (int k = i; k <= m; ++k) acc += po[static_cast<size_t>(k)];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace

DePolynomials extract_de_polynomials(const EnsembleParams& p, int max_m) {
  p.validate();
  if (p.m > max_m) throw std::invalid_argument("extract_de_polynomials: m exceeds expansion guard");
  const int m = p.m;

  const std::vector<MultiPoly> yo = prob_coords(m);
  std::vector<MultiPoly> acc = yo;
  for (int t = 0; t < p.dv - 2; ++t) acc = boxdot_sym(m, acc, yo);
  acc = boxdot_sym(m, channel_sym(m), acc);
  DePolynomials out{ccdf_components(m, acc), {}};

  const std::vector<MultiPoly> xo = prob_coords(m);
  acc = xo;
  for (int t = 0; t < p.dc - 2; ++t) acc = boxtimes_sym(m, acc, xo);
  out.g = ccdf_components(m, acc);
  return out;
}

}  // namespace saturate
