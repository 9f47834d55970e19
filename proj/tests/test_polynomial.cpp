#include <doctest.h>

#include <random>

#include "oracle_subspace.hpp"
#include "saturate/json_io.hpp"
#include "saturate/polynomial.hpp"

using namespace saturate;

namespace {

EpsPoly ep(std::initializer_list<Rational> cs) { return EpsPoly(std::vector<Rational>(cs)); }

// the worked (2,3,2) update polynomials
DePolynomials worked_232() {
  DePolynomials out;
  MultiPoly f1(2), f2(2), g1(2), g2(2);
  f1.add_term({1, 0}, ep({Rational(0), Rational(2, 3), Rational(1, 3)}));
  f1.add_term({0, 1}, ep({Rational(0), Rational(4, 3), Rational(-4, 3)}));
  f2.add_term({0, 1}, ep({Rational(0), Rational(0), Rational(1)}));
  g1.add_term({1, 0}, EpsPoly(Rational(2)));
  g1.add_term({2, 0}, EpsPoly(Rational(-1)));
  g2.add_term({2, 0}, EpsPoly(Rational(2, 3)));
  g2.add_term({1, 1}, EpsPoly(Rational(-4, 3)));
  g2.add_term({0, 1}, EpsPoly(Rational(2)));
  g2.add_term({0, 2}, EpsPoly(Rational(-1, 3)));
  out.f = {f1, f2};
  out.g = {g1, g2};
  return out;
}

}  // namespace

TEST_CASE("eps polynomial basics") {
  const EpsPoly p = ep({Rational(1), Rational(0), Rational(3)});
  CHECK(p.degree() == 2);
  CHECK(p.eval(Rational(2)) == Rational(13));
  CHECK(p.eval(0.5) == doctest::Approx(1.75));
  const EpsPoly z = ep({Rational(0)});
  CHECK(z.is_zero());
  CHECK(z.degree() == -1);
  CHECK((p * ep({Rational(0), Rational(1)})).degree() == 3);
  EpsPoly q = p;
  q -= p;
  CHECK(q.is_zero());
}

TEST_CASE("eps polynomial interpolation is exact") {
  const EpsPoly p = ep({Rational(1, 3), Rational(-2), Rational(5, 7)});
  std::vector<Rational> xs{Rational(1, 7), Rational(2, 7), Rational(3, 7)};
  std::vector<Rational> ys;
  for (const auto& x : xs) ys.push_back(p.eval(x));
  CHECK(EpsPoly::interpolate(xs, ys) == p);
}

TEST_CASE("support shifting") {
  SupportSet s;
  s.insert({1, 0});
  CHECK(shift_set(s, 2) == SupportSet{{1, 1}});
  SupportSet t;
  t.insert({1, 1});
  t.insert({0, 2});
  CHECK(unshift_set(t, 1) == SupportSet{{0, 1}});
  CHECK(shift_set(t, 1).size() == t.size());
}

TEST_CASE("graded lexicographic order") {
  GradedLexLess less;
  CHECK(less({1, 0}, {0, 2}));       // lower total degree first
  CHECK(less({0, 2}, {1, 1}));       // same degree: lex
  CHECK_FALSE(less({1, 1}, {1, 1}));
}

TEST_CASE("calculus on sparse polynomials") {
  MultiPoly p = MultiPoly::variable(2, 1);
  const MultiPoly ip = p.integrate(1);  // x1^2/2
  CHECK(ip.coeff({2, 0}) == EpsPoly(Rational(1, 2)));
  MultiPoly q(2);
  q.add_term({2, 1}, EpsPoly(Rational(1)));
  const MultiPoly dq = q.differentiate(1);  // 2 x1 x2
  CHECK(dq.coeff({1, 1}) == EpsPoly(Rational(2)));

  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> e(0, 3), c(-5, 5), k(1, 3);
  for (int t = 0; t < 50; ++t) {
    MultiPoly r(3);
    for (int i = 0; i < 6; ++i) {
      r.add_term({e(rng), e(rng), e(rng)}, EpsPoly(Rational(c(rng))));
    }
    const int axis = k(rng);
    CHECK(r.integrate(axis).differentiate(axis) == r);
  }
}

TEST_CASE("extraction reproduces the worked (2,3,2) system") {
  const DePolynomials got = extract_de_polynomials({2, 3, 2});
  const DePolynomials want = worked_232();
  for (int i = 0; i < 2; ++i) {
    CHECK(got.f[static_cast<size_t>(i)] == want.f[static_cast<size_t>(i)]);
    CHECK(got.g[static_cast<size_t>(i)] == want.g[static_cast<size_t>(i)]);
  }
}

TEST_CASE("extraction at m=1 gives the scalar polynomials") {
  const DePolynomials de = extract_de_polynomials({3, 6, 1});
  MultiPoly f(1), g(1);
  f.add_term({2}, EpsPoly::monomial(1, Rational(1)));  // eps y^2
  // 1-(1-x)^5 = 5x - 10x^2 + 10x^3 - 5x^4 + x^5
  g.add_term({1}, EpsPoly(Rational(5)));
  g.add_term({2}, EpsPoly(Rational(-10)));
  g.add_term({3}, EpsPoly(Rational(10)));
  g.add_term({4}, EpsPoly(Rational(-5)));
  g.add_term({5}, EpsPoly(Rational(1)));
  CHECK(de.f[0] == f);
  CHECK(de.g[0] == g);
}

TEST_CASE("supports of the worked system") {
  const DePolynomials de = extract_de_polynomials({2, 3, 2});
  CHECK(de.f[0].support() == SupportSet{{1, 0}, {0, 1}});
  CHECK(de.f[1].support() == SupportSet{{0, 1}});
  CHECK(de.g[1].support() == SupportSet{{2, 0}, {1, 1}, {0, 1}, {0, 2}});
  CHECK(MultiPoly(2).support().empty());
}

TEST_CASE("evaluation special cases") {
  const DePolynomials de = extract_de_polynomials({2, 3, 2});
  // second component is eps^2 y2
  const std::vector<double> y{0.35, 1.0};
  CHECK(de.f[1].eval(y, 0.6) == doctest::Approx(0.36));
  // every DE map vanishes at the origin
  const std::vector<double> zero{0.0, 0.0};
  for (const auto& p : de.f) CHECK(p.eval(zero, 0.7) == 0.0);
  for (const auto& p : de.g) CHECK(p.eval(zero, 0.0) == 0.0);
}

TEST_CASE("exact evaluation matches the subspace-folding oracle") {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> num(1, 99);
  for (const auto& [dv, dc] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}}) {
    for (int m = 2; m <= 3; ++m) {
      const DePolynomials de = extract_de_polynomials({dv, dc, m});
      for (int t = 0; t < 6; ++t) {
        std::vector<Rational> x(static_cast<size_t>(m));
        for (auto& v : x) v = Rational(num(rng), 100);
        std::sort(x.begin(), x.end(), std::greater<>());
        const Rational eps(num(rng), 100);
        CcdfVecQ cc(m);
        for (int i = 0; i < m; ++i) cc[i] = x[static_cast<size_t>(i)];
        const CcdfVecQ fo = to_ccdf(oracle::f_update_oracle(m, dv, from_ccdf(cc), eps));
        const CcdfVecQ go = to_ccdf(oracle::g_update_oracle(m, dc, from_ccdf(cc)));
        for (int i = 0; i < m; ++i) {
          CHECK(de.f[static_cast<size_t>(i)].eval_exact(x, eps) == fo[i]);
          CHECK(de.g[static_cast<size_t>(i)].eval_exact(x, Rational(0)) == go[i]);
        }
      }
    }
  }
}

TEST_CASE("compiled form tracks the exact polynomial") {
  const DePolynomials de = extract_de_polynomials({3, 6, 2});
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& p : de.f) {
    const CompiledPoly cp(p);
    for (int t = 0; t < 20; ++t) {
      const double b = unit(rng);
      const std::vector<double> x{std::max(b, unit(rng)), std::min(b, unit(rng))};
      const double eps = unit(rng);
      CHECK(cp.eval(x, eps) == doctest::Approx(p.eval(x, eps)).epsilon(1e-14));
    }
  }
}

TEST_CASE("expansion guard") {
  CHECK_THROWS_AS(extract_de_polynomials({3, 6, 5}, 4), std::invalid_argument);
  CHECK_NOTHROW(extract_de_polynomials({3, 6, 2}, 4));
}

TEST_CASE("json round trip is exact and canonical") {
  const DePolynomials de = extract_de_polynomials({2, 3, 2});
  for (const auto& p : de.f) {
    const Json j = to_json(p);
    CHECK(multi_poly_from_json(j) == p);
    CHECK(to_json(multi_poly_from_json(j)) == j);
  }
  const Json sys = to_json(de);
  const DePolynomials back = de_polynomials_from_json(sys);
  for (int i = 0; i < 2; ++i) {
    CHECK(back.f[static_cast<size_t>(i)] == de.f[static_cast<size_t>(i)]);
    CHECK(back.g[static_cast<size_t>(i)] == de.g[static_cast<size_t>(i)]);
  }
}

TEST_CASE("canonical text form") {
  MultiPoly p(2);
  p.add_term({1, 0}, ep({Rational(0), Rational(2, 3)}));
  p.add_term({0, 2}, EpsPoly(Rational(-1, 3)));
  CHECK(p.str("y") == "(2/3*e)*y1 + (-1/3)*y2^2");
}
