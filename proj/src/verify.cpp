#include "saturate/verify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "saturate/json_io.hpp"

namespace saturate {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

CcdfVecD random_ccdf(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(static_cast<size_t>(m));
  for (auto& x : v) x = unit(rng);
  std::sort(v.begin(), v.end(), std::greater<>());
  CcdfVecD out(m);
  for (int i = 0; i < m; ++i) out[i] = v[static_cast<size_t>(i)];
  return out;
}

ProbVecD random_prob(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ProbVecD p(m);
  double sum = 0.0;
  for (int i = 0; i <= m; ++i) {
    p[i] = unit(rng);
    sum += p[i];
  }
  for (int i = 0; i <= m; ++i) p[i] /= sum;
  return p;
}

ProbVecQ random_prob_exact(int m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(0, 1000);
  ProbVecQ p(m);
  Rational sum(0);
  for (int i = 0; i <= m; ++i) {
    p[i] = Rational(num(rng) + 1, 1001);
    sum += p[i];
  }
  for (int i = 0; i <= m; ++i) p[i] /= sum;
  return p;
}

}  // namespace

SuiteResult verify_appendix_identities(const VerifyOptions& opt) {
  SuiteResult res{"appendix-a", {}};
  const int M = opt.appendix_max_m;

  {
    CheckResult c{"gaussian ratio identities (exact)", true, ""};
    for (int m = 1; m <= M && c.pass; ++m) {
      for (int i = 0; i <= m; ++i) {
        const Rational lhs1 = gaussian_binomial(m, i + 1) / gaussian_binomial(m, i);
        const Rational rhs1 = Rational(pow2(m - i) - 1, pow2(i + 1) - 1);
        const Rational lhs2 = gaussian_binomial(m + 1, i) / gaussian_binomial(m, i);
        const Rational rhs2 = Rational(pow2(m + 1) - 1, pow2(m - i + 1) - 1);
        const Rational lhs3 = gaussian_binomial(m + 1, i + 1) / gaussian_binomial(m, i);
        const Rational rhs3 = Rational(pow2(m + 1) - 1, pow2(i + 1) - 1);
        if (lhs1 != rhs1 || lhs2 != rhs2 || lhs3 != rhs3) {
          c.pass = false;
          c.detail = "mismatch at m=" + std::to_string(m) + " i=" + std::to_string(i);
          break;
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"v-coefficient ratio in i (exact)", true, ""};
    for (int m = 1; m <= M && c.pass; ++m) {
      for (int l = 0; l <= m && c.pass; ++l) {
        for (int i = l + 1; i <= m && c.pass; ++i) {
          for (int j = l; j <= m + l - i; ++j) {
            const Rational va = v_coeff(m, i, j, l), vb = v_coeff(m, i - 1, j, l);
            if (va == 0 || vb == 0) continue;
            const Rational lhs = va / vb;
            const Rational rhs = (Rational(pow2(i - l)) - Rational(1, pow2(l))) /
                                 (Rational(pow2(i - l)) - 1) *
                                 Rational(pow2(m + l - i + 1) - pow2(j), pow2(m - i + 1) - 1);
            if (lhs != rhs) {
              c.pass = false;
              c.detail = "ratio mismatch at m=" + std::to_string(m) + " i=" + std::to_string(i) +
                         " j=" + std::to_string(j) + " l=" + std::to_string(l);
              break;
            }
            if (l > 0 && j - l <= m - i && !(lhs > Rational(pow2(l - 1)))) {
              c.pass = false;
              c.detail = "strict lower bound fails at m=" + std::to_string(m);
              break;
            }
          }
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"v-coefficient ratio in (i,l) and its fixed point (exact)", true, ""};
    for (int m = 1; m <= M && c.pass; ++m) {
      for (int l = 1; l <= m && c.pass; ++l) {
        for (int i = l; i <= m && c.pass; ++i) {
          for (int j = l + 1; j <= m + l - i; ++j) {
            const Rational va = v_coeff(m, i, j, l), vb = v_coeff(m, i - 1, j, l - 1);
            if (va == 0 || vb == 0) continue;
            const Rational rhs = Rational(pow2(i) - 1, pow2(m + 1) - pow2(i)) *
                                 Rational(pow2(j + 1) - pow2(l), pow2(l) - 1);
            if (va / vb != rhs) {
              c.pass = false;
              c.detail = "mixed ratio mismatch at m=" + std::to_string(m);
              break;
            }
          }
        }
        if (c.pass && v_coeff(m, l, m, l) != v_coeff(m, l - 1, m, l - 1)) {
          c.pass = false;
          c.detail = "full-space ratio is not 1 at m=" + std::to_string(m) + " l=" + std::to_string(l);
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  return res;
}

SuiteResult verify_stochasticity(const VerifyOptions& opt) {
  SuiteResult res{"stochasticity", {}};
  const int M = std::min(opt.max_m + 2, 6);
  CheckResult c{"rows of V and C sum to 1 and are nonnegative (exact, m <= 6)", true, ""};
  for (int m = 1; m <= M && c.pass; ++m) {
    for (int i = 0; i <= m && c.pass; ++i) {
      for (int j = 0; j <= m; ++j) {
        Rational sv(0), sc(0);
        for (int k = 0; k <= m; ++k) {
          const Rational v = v_coeff(m, i, j, k), cc = c_coeff(m, i, j, k);
          if (v < 0 || cc < 0) {
            c.pass = false;
            c.detail = "negative coefficient";
            break;
          }
          sv += v;
          sc += cc;
        }
        if (c.pass && (sv != 1 || sc != 1)) {
          c.pass = false;
          c.detail = "row sum != 1 at m=" + std::to_string(m) + " i=" + std::to_string(i) +
                     " j=" + std::to_string(j);
          break;
        }
      }
    }
  }
  res.checks.push_back(std::move(c));
  return res;
}

SuiteResult verify_simplex(const VerifyOptions& opt) {
  SuiteResult res{"simplex", {}};
  std::mt19937_64 rng(opt.seed);
  if (opt.backend == Backend::Exact) {
    CheckResult c{"boxdot/boxtimes preserve the simplex (exact)", true, ""};
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      for (int t = 0; t < opt.trials / 4 + 1; ++t) {
        const ProbVecQ a = random_prob_exact(m, rng), b = random_prob_exact(m, rng);
        Rational s1(0), s2(0);
        const ProbVecQ d = boxdot(a, b), e = boxtimes(a, b);
        for (int i = 0; i <= m; ++i) {
          s1 += d[i];
          s2 += e[i];
          if (d[i] < 0 || e[i] < 0) c.pass = false;
        }
        if (s1 != 1 || s2 != 1) c.pass = false;
        if (!c.pass) {
          c.detail = "simplex violated at m=" + std::to_string(m);
          break;
        }
      }
    }
    res.checks.push_back(std::move(c));
  } else {
    CheckResult c{"boxdot/boxtimes preserve the simplex (double, 1e-12)", true, ""};
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      const auto& tab = double_coeffs(m);
      for (int t = 0; t < opt.trials; ++t) {
        const ProbVecD a = random_prob(m, rng), b = random_prob(m, rng);
        // raw bilinear sums, before any renormalization
        double s1 = 0.0, s2 = 0.0;
        for (int k = 0; k <= m; ++k) {
          for (int i = 0; i <= m; ++i) {
            for (int j = 0; j <= m; ++j) {
              s1 += tab.v(i, j, k) * a[i] * b[j];
              s2 += tab.c(i, j, k) * a[i] * b[j];
            }
          }
        }
        if (std::abs(s1 - 1.0) > 1e-12 || std::abs(s2 - 1.0) > 1e-12) {
          c.pass = false;
          c.detail = "mass drift " + fmt(std::max(std::abs(s1 - 1.0), std::abs(s2 - 1.0)));
          break;
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"boxdot/boxtimes commutative and associative (random)", true, ""};
    std::mt19937_64 rng2(opt.seed + 1);
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      for (int t = 0; t < 50; ++t) {
        const ProbVecD a = random_prob(m, rng2), b = random_prob(m, rng2), d = random_prob(m, rng2);
        const ProbVecD ab = boxdot(a, b), ba = boxdot(b, a);
        const ProbVecD ab_d = boxdot(boxdot(a, b), d), a_bd = boxdot(a, boxdot(b, d));
        const ProbVecD tb = boxtimes(a, b), tba = boxtimes(b, a);
        const ProbVecD tab_d = boxtimes(boxtimes(a, b), d), ta_bd = boxtimes(a, boxtimes(b, d));
        for (int i = 0; i <= m; ++i) {
          if (std::abs(ab[i] - ba[i]) > 1e-12 || std::abs(ab_d[i] - a_bd[i]) > 1e-12 ||
              std::abs(tb[i] - tba[i]) > 1e-12 || std::abs(tab_d[i] - ta_bd[i]) > 1e-12) {
            c.pass = false;
            c.detail = "operator algebra violated at m=" + std::to_string(m);
            break;
          }
        }
        if (!c.pass) break;
      }
    }
    res.checks.push_back(std::move(c));
  }
  return res;
}

SuiteResult verify_monotonicity(const VerifyOptions& opt) {
  SuiteResult res{"monotonicity", {}};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> epsd(0.05, 0.95);

  {
    CheckResult c{"f and g increasing for the componentwise order", true, ""};
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      const EnsembleParams p{3, 6, m};
      const DeEngine eng(p);
      for (int t = 0; t < opt.pairs; ++t) {
        const CcdfVecD a = random_ccdf(m, rng), b = random_ccdf(m, rng);
        CcdfVecD lo(m), hi(m);
        for (int i = 0; i < m; ++i) {
          lo[i] = std::min(a[i], b[i]);
          hi[i] = std::max(a[i], b[i]);
        }
        const double eps = epsd(rng);
        if (!preceq(eng.f_update(lo, eps), eng.f_update(hi, eps), 1e-12) ||
            !preceq(eng.g_update(lo), eng.g_update(hi), 1e-12)) {
          c.pass = false;
          c.detail = "order violated at m=" + std::to_string(m);
          break;
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"DE sequence from all-ones is non-increasing", true, ""};
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      const DeEngine eng({3, 6, m});
      for (double eps : {0.3, 0.45, 0.6}) {
        CcdfVecD x = CcdfVecD::ones(m);
        for (int it = 0; it < 60; ++it) {
          const CcdfVecD xn = eng.f_update(eng.g_update(x), eps);
          if (!preceq(xn, x, 1e-12)) {
            c.pass = false;
            c.detail = "increase at m=" + std::to_string(m) + " eps=" + fmt(eps);
            break;
          }
          x = xn;
        }
        if (!c.pass) break;
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"f strictly increasing in eps at positive inputs", true, ""};
    for (int m = 1; m <= opt.max_m && c.pass; ++m) {
      const DeEngine eng({3, 6, m});
      for (int t = 0; t < 100; ++t) {
        CcdfVecD y(m);
        double v = 1.0;
        for (int i = 0; i < m; ++i) {
          v *= 0.35 + 0.6 * unit(rng);
          y[i] = v;
        }
        const double eps = 0.1 + 0.7 * unit(rng);
        const CcdfVecD f1 = eng.f_update(y, eps), f2 = eng.f_update(y, eps + 1e-6);
        for (int i = 0; i < m; ++i) {
          if (!(f2[i] - f1[i] > 0.0)) {
            c.pass = false;
            c.detail = "component " + std::to_string(i + 1) + " not increasing at m=" + std::to_string(m);
            break;
          }
        }
        if (!c.pass) break;
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"check-node Jacobian lower triangular with positive diagonal", true, ""};
    for (int m = 2; m <= opt.max_m && c.pass; ++m) {
      const DeEngine eng({3, 6, m});
      for (int t = 0; t < 25; ++t) {
        CcdfVecD x(m);
        double v = 1.0;
        for (int i = 0; i < m; ++i) {
          v *= 0.4 + 0.55 * unit(rng);
          x[i] = v;
        }
        const double h = 1e-7;
        for (int l = 0; l < m; ++l) {
          CcdfVecD xp = x, xm = x;
          xp[l] += h;
          xm[l] -= h;
          const CcdfVecD gp = eng.g_update(xp), gm = eng.g_update(xm);
          for (int k = 0; k < m; ++k) {
            const double d = (gp[k] - gm[k]) / (2 * h);
            if (l > k && std::abs(d) > 1e-6) {
              c.pass = false;
              c.detail = "upper entry nonzero at m=" + std::to_string(m);
            }
            if (l == k && d <= 0) {
              c.pass = false;
              c.detail = "diagonal not positive at m=" + std::to_string(m);
            }
          }
        }
        if (!c.pass) break;
      }
    }
    res.checks.push_back(std::move(c));
  }
  return res;
}

SuiteResult verify_polynomials(const VerifyOptions& opt) {
  SuiteResult res{"polynomials", {}};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> epsd(0.05, 0.95);

  {
    CheckResult c{"extracted polynomials match the numeric updates", true, ""};
    for (const auto& [dv, dc] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 6}}) {
      for (int m = 1; m <= std::min(opt.max_m, 3); ++m) {
        const EnsembleParams p{dv, dc, m};
        const DePolynomials de = extract_de_polynomials(p);
        const DeEngine eng(p);
        for (int t = 0; t < 40; ++t) {
          const CcdfVecD x = random_ccdf(m, rng);
          const double eps = epsd(rng);
          const CcdfVecD fe = eng.f_update(x, eps), ge = eng.g_update(x);
          const std::span<const double> xs = x.entries();
          for (int i = 0; i < m; ++i) {
            const double fp = de.f[static_cast<size_t>(i)].eval(xs, eps);
            const double gp = de.g[static_cast<size_t>(i)].eval(xs, 0.0);
            if (std::abs(fp - fe[i]) > 1e-12 || std::abs(gp - ge[i]) > 1e-12) {
              c.pass = false;
              c.detail = "mismatch for (" + std::to_string(dv) + "," + std::to_string(dc) + "," +
                         std::to_string(m) + ")";
            }
          }
          if (!c.pass) break;
        }
        if (!c.pass) break;
      }
      if (!c.pass) break;
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"top component support is the single expected monomial", true, ""};
    for (const auto& [dv, dc] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 6}, {4, 8}}) {
      for (int m = 1; m <= std::min(opt.max_m, 3); ++m) {
        const DePolynomials de = extract_de_polynomials({dv, dc, m});
        Monomial expect(static_cast<size_t>(m), 0);
        expect.back() = dv - 1;
        const SupportSet s = de.f.back().support();
        if (s.size() != 1 || *s.begin() != expect) {
          c.pass = false;
          c.detail = "support of the m-th component is not y_m^(dv-1)";
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"eps-degree of extracted coefficients at most m", true, ""};
    for (int m = 1; m <= std::min(opt.max_m, 3); ++m) {
      const DePolynomials de = extract_de_polynomials({3, 6, m});
      for (const auto& p : de.f) {
        if (p.eps_degree() > m) {
          c.pass = false;
          c.detail = "degree exceeds m=" + std::to_string(m);
        }
      }
      for (const auto& p : de.g) {
        if (p.eps_degree() > 0) {
          c.pass = false;
          c.detail = "check-node polynomial depends on eps";
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  return res;
}

SuiteResult verify_gradients(const VerifyOptions& opt) {
  SuiteResult res{"gradients", {}};
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> epsd(0.3, 0.7);

  for (int m = 1; m <= 2; ++m) {
    const EnsembleParams p{3, 6, m};
    const SolveOutcome out = solve_ensemble(p, DShape::full(m));
    if (out.infeasible()) {
      res.checks.push_back({"potential exists for (3,6," + std::to_string(m) + ")", false, "infeasible"});
      continue;
    }
    const DePolynomials de = extract_de_polynomials(p);
    const PotentialEvaluator ev(*out.solution, de.f, de.g, p);

    CheckResult c1{"gradient matches central differences, m=" + std::to_string(m), true, ""};
    const double h = 1e-6;
    for (int t = 0; t < 100 && c1.pass; ++t) {
      const CcdfVecD x = random_ccdf(m, rng);
      const double eps = epsd(rng);
      const auto an = ev.grad(x.entries(), eps);
      for (int i = 0; i < m; ++i) {
        std::vector<double> xp(x.entries().begin(), x.entries().end());
        std::vector<double> xm = xp;
        xp[static_cast<size_t>(i)] += h;
        xm[static_cast<size_t>(i)] -= h;
        const double fd = (ev.U(xp, eps) - ev.U(xm, eps)) / (2 * h);
        if (std::abs(fd - an[static_cast<size_t>(i)]) > 1e-5 * std::max(1.0, std::abs(an[static_cast<size_t>(i)]))) {
          c1.pass = false;
          c1.detail = "fd=" + fmt(fd) + " grad=" + fmt(an[static_cast<size_t>(i)]);
          break;
        }
      }
    }
    res.checks.push_back(std::move(c1));

    CheckResult c2{"stationary exactly at DE fixed points, m=" + std::to_string(m), true, ""};
    for (int t = 0; t < 50 && c2.pass; ++t) {
      const double eps = 0.05 + 0.9 * epsd(rng);
      const DeEngine eng(p);
      const DeReport rep = eng.fixed_point(eps);
      const auto gr = ev.grad(rep.fixed_point.entries(), eps);
      double sup = 0.0;
      for (double v : gr) sup = std::max(sup, std::abs(v));
      if (sup > 1e-6) {
        c2.pass = false;
        c2.detail = "gradient sup " + fmt(sup) + " at eps=" + fmt(eps);
      }
    }
    res.checks.push_back(std::move(c2));

    CheckResult c3{"U strictly decreasing in eps away from zero, m=" + std::to_string(m), true, ""};
    for (int t = 0; t < 100 && c3.pass; ++t) {
      CcdfVecD x = random_ccdf(m, rng);
      x[0] = std::max(x[0], 0.05);  // keep x away from the origin
      const double e1 = epsd(rng);
      const double e2 = e1 + 0.05;
      if (!(ev.U(x.entries(), e2) < ev.U(x.entries(), e1))) {
        c3.pass = false;
        c3.detail = "not decreasing at eps=" + fmt(e1);
      }
    }
    res.checks.push_back(std::move(c3));

    CheckResult c4{"coupled gradient matches central differences, m=" + std::to_string(m), true, ""};
    const CoupledParams cp{p, 5, 2};
    for (int t = 0; t < 10 && c4.pass; ++t) {
      CoupledState X = CoupledState::ones(cp, 0.5);
      for (int i = 0; i < X.positions(); ++i) {
        const CcdfVecD r = random_ccdf(m, rng);
        for (int cidx = 0; cidx < m; ++cidx) X.row(i)[cidx] = r[cidx];
      }
      const double eps = epsd(rng);
      const auto rows = ev.coupled_grad(X, eps);
      for (int i = 0; i < X.positions() && c4.pass; ++i) {
        for (int cidx = 0; cidx < m; ++cidx) {
          CoupledState Xp = X, Xm = X;
          Xp.row(i)[cidx] += h;
          Xm.row(i)[cidx] -= h;
          const double fd = (ev.coupled_U(Xp, eps) - ev.coupled_U(Xm, eps)) / (2 * h);
          const double an = rows[static_cast<size_t>(i)][static_cast<size_t>(cidx)];
          if (std::abs(fd - an) > 1e-5 * std::max(1.0, std::abs(an))) {
            c4.pass = false;
            c4.detail = "row " + std::to_string(i + 1) + ": fd=" + fmt(fd) + " grad=" + fmt(an);
            break;
          }
        }
      }
    }
    res.checks.push_back(std::move(c4));
  }
  return res;
}

SuiteResult verify_counting(const VerifyOptions& opt) {
  SuiteResult res{"counting", {}};
  CheckResult c{"support sizes and equation counts match the closed forms", true, ""};
  for (const auto& [dv, dc] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 6}}) {
    for (int m = 1; m <= opt.max_m; ++m) {
      const DePolynomials de = extract_de_polynomials({dv, dc, m});
      const LinearSystem sys = build_linear_system(de.f, de.g, DShape::full(m));
      const bool ok = BigInt(sys.counts.s_f) == sF_size_formula(dv, m) &&
                      BigInt(sys.counts.s_g) == sG_size_formula(dc, m) &&
                      BigInt(sys.counts.n_phi) == n_phi_formula(dv, m) &&
                      BigInt(sys.counts.n_mu) == n_mu_formula(dc, m);
      if (!ok) {
        c.pass = false;
        c.detail = "(" + std::to_string(dv) + "," + std::to_string(dc) + "," + std::to_string(m) +
                   "): enumerated (" + std::to_string(sys.counts.s_f) + "," +
                   std::to_string(sys.counts.s_g) + "," + std::to_string(sys.counts.n_phi) + "," +
                   std::to_string(sys.counts.n_mu) + ")";
      }
    }
  }
  res.checks.push_back(std::move(c));
  return res;
}

namespace {

CheckResult compare_golden(const std::string& name, const SolveOutcome& out,
                           const std::string& path) {
  CheckResult c{name, false, ""};
  std::ifstream in(path);
  if (!in) {
    c.detail = "golden file missing: " + path;
    return c;
  }
  Json want = Json::parse(in);
  if (out.infeasible()) {
    c.detail = "solver returned infeasible";
    return c;
  }
  const Json got = to_json(*out.solution);
  if (got.at("D") != want.at("D")) {
    c.detail = "D differs: got " + got.at("D").dump() + ", want " + want.at("D").dump();
    return c;
  }
  if (got.at("F") != want.at("F") || got.at("G") != want.at("G")) {
    c.detail = "F or G differs from the golden file";
    return c;
  }
  c.pass = true;
  return c;
}

}  // namespace

SuiteResult verify_table2(const VerifyOptions& opt) {
  SuiteResult res{"table2", {}};
  {
    const SolveOutcome out = solve_ensemble({3, 4, 2}, DShape::full(2));
    CheckResult c{"(3,4,2): counts 16/24 and reference D", true, ""};
    if (out.counts.s_f + out.counts.s_g != 16 || out.counts.n_phi + out.counts.n_mu != 24) {
      c.pass = false;
      c.detail = "counts differ";
    } else if (out.infeasible() || !out.solution->admissible() || out.nullity != 1) {
      c.pass = false;
      c.detail = "no admissible one-parameter solution";
    } else {
      DMatrix want;
      want.m = 2;
      want.a = {Rational(1), Rational(2), Rational(2), Rational(1)};
      if (out.solution->D.a != want.a) {
        c.pass = false;
        c.detail = "D differs";
      }
    }
    res.checks.push_back(std::move(c));
    if (!opt.data_dir.empty()) {
      res.checks.push_back(compare_golden("(3,4,2): golden file", out, opt.data_dir + "/solution_3_4_2.json"));
    }
  }
  {
    const SolveOutcome out = solve_ensemble({3, 4, 3}, DShape::full(3));
    CheckResult c{"(3,4,3): counts 41/75 and a unique admissible solution", true, ""};
    if (out.counts.s_f + out.counts.s_g != 41 || out.counts.n_phi + out.counts.n_mu != 75) {
      c.pass = false;
      c.detail = "counts differ";
    } else if (out.infeasible() || !out.solution->admissible() || out.nullity != 1) {
      c.pass = false;
      c.detail = "no admissible one-parameter solution";
    }
    res.checks.push_back(std::move(c));
    if (!opt.data_dir.empty()) {
      res.checks.push_back(compare_golden("(3,4,3): golden file", out, opt.data_dir + "/solution_3_4_3.json"));
    }
  }
  return res;
}

SuiteResult verify_examples(const VerifyOptions& opt) {
  SuiteResult res{"examples", {}};
  {
    const SolveOutcome out = solve_ensemble({2, 3, 2}, DShape::full(2));
    CheckResult c{"(2,3,2): worked solution reproduced exactly", true, ""};
    if (out.infeasible() || out.nullity != 1) {
      c.pass = false;
      c.detail = "expected a one-parameter family";
    } else {
      const PotentialSolution& s = *out.solution;
      MultiPoly F(2), G(2);
      auto ep = [](std::initializer_list<Rational> cs) { return EpsPoly(std::vector<Rational>(cs)); };
      F.add_term({2, 0}, ep({Rational(0), Rational(1, 3), Rational(1, 6)}));
      F.add_term({1, 1}, ep({Rational(0), Rational(4, 3), Rational(2, 3)}));
      F.add_term({0, 2}, ep({Rational(0), Rational(4, 3), Rational(-5, 6)}));
      G.add_term({2, 0}, EpsPoly(Rational(1)));
      G.add_term({3, 0}, EpsPoly(Rational(1, 9)));
      G.add_term({1, 1}, EpsPoly(Rational(4)));
      G.add_term({1, 2}, EpsPoly(Rational(-2, 3)));
      G.add_term({2, 1}, EpsPoly(Rational(-4, 3)));
      G.add_term({0, 2}, EpsPoly(Rational(1)));
      G.add_term({0, 3}, EpsPoly(Rational(-1, 9)));
      DMatrix want;
      want.m = 2;
      want.a = {Rational(1), Rational(2), Rational(2), Rational(1)};
      if (s.D.a != want.a || !(s.F == F) || !(s.G == G)) {
        c.pass = false;
        c.detail = "solution differs from the worked values";
      }
    }
    res.checks.push_back(std::move(c));
    if (!opt.data_dir.empty()) {
      res.checks.push_back(compare_golden("(2,3,2): golden file", out, opt.data_dir + "/solution_2_3_2.json"));
    }
  }
  {
    CheckResult c{"two-layer system: closed-form F and G", true, ""};
    for (const auto& [l1, l2, r1, r2] :
         std::vector<std::array<int, 4>>{{3, 3, 6, 6}, {2, 3, 4, 5}}) {
      const DePolynomials sys = make_bilayer_system(l1, l2, r1, r2);
      const SolveOutcome out = solve_system(build_linear_system(sys.f, sys.g, DShape::diagonal(2)));
      if (out.infeasible()) {
        c.pass = false;
        c.detail = "layered system unexpectedly infeasible";
        break;
      }
      if (!opt.data_dir.empty()) {
        const std::string path = opt.data_dir + "/solution_bilayer_" + std::to_string(l1) + "_" +
                                 std::to_string(l2) + "_" + std::to_string(r1) + "_" +
                                 std::to_string(r2) + ".json";
        res.checks.push_back(compare_golden(
            "two-layer (" + std::to_string(l1) + "," + std::to_string(l2) + "," +
                std::to_string(r1) + "," + std::to_string(r2) + "): golden file",
            out, path));
      }
      // rescale the d11=1 family by l1 to land on the closed form
      const PotentialSolution s = out.solution->scaled(Rational(l1));
      if (!(s.D.at(1, 1) == l1 && s.D.at(2, 2) == l2 && s.D.at(1, 2) == 0 && s.D.at(2, 1) == 0)) {
        c.pass = false;
        c.detail = "D is not diag(l1, l2)";
        break;
      }
      MultiPoly F(2);
      F.add_term({l1, l2}, EpsPoly::monomial(1, Rational(1)));
      // G = sum_i l_i (x_i + ((1-x_i)^{r_i} - 1)/r_i)
      MultiPoly G(2);
      for (int layer = 1; layer <= 2; ++layer) {
        const int l = layer == 1 ? l1 : l2;
        const int r = layer == 1 ? r1 : r2;
        for (int i = 2; i <= r; ++i) {
          Rational cc = Rational(binomial(r, i)) / r;
          if (i % 2 == 1) cc = -cc;
          Monomial mo(2, 0);
          mo[static_cast<size_t>(layer - 1)] = i;
          G.add_term(mo, EpsPoly(cc * l));
        }
      }
      if (!(s.F == F) || !(s.G == G)) {
        c.pass = false;
        c.detail = "F or G differs from the closed form";
        break;
      }
    }
    res.checks.push_back(std::move(c));
  }
  {
    CheckResult c{"diagonal shape infeasible for the subspace ensembles", true, ""};
    for (const auto& [dv, dc] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 6}}) {
      for (int m = 2; m <= std::min(opt.max_m, 3); ++m) {
        const DePolynomials de = extract_de_polynomials({dv, dc, m});
        if (check_necessary_condition(de.f, de.g, DShape::diagonal(m)).holds) {
          c.pass = false;
          c.detail = "necessary condition unexpectedly holds";
        }
        if (!solve_system(build_linear_system(de.f, de.g, DShape::diagonal(m))).infeasible()) {
          c.pass = false;
          c.detail = "diagonal system unexpectedly solvable";
        }
      }
    }
    res.checks.push_back(std::move(c));
  }
  return res;
}

std::vector<std::string> verify_suite_names() {
  return {"appendix-a", "stochasticity", "simplex",  "monotonicity", "polynomials",
          "gradients",  "counting",      "table2",   "examples"};
}

std::vector<SuiteResult> run_verify(const std::string& suite, const VerifyOptions& opt) {
  std::vector<SuiteResult> out;
  auto want = [&](const std::string& s) { return suite == "all" || suite == s; };
  if (want("appendix-a")) out.push_back(verify_appendix_identities(opt));
  if (want("stochasticity")) out.push_back(verify_stochasticity(opt));
  if (want("simplex")) out.push_back(verify_simplex(opt));
  if (want("monotonicity")) out.push_back(verify_monotonicity(opt));
  if (want("polynomials")) out.push_back(verify_polynomials(opt));
  if (want("gradients")) out.push_back(verify_gradients(opt));
  if (want("counting")) out.push_back(verify_counting(opt));
  if (want("table2")) out.push_back(verify_table2(opt));
  if (want("examples")) out.push_back(verify_examples(opt));
  if (out.empty()) throw std::invalid_argument("unknown verify suite: " + suite);
  return out;
}

}  // namespace saturate
