#include "saturate/de_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace saturate {

namespace {

// ccdf (len m) -> prob (len m+1)
inline void ccdf_to_prob(const double* x, int m, double* p) {
  p[0] = 1.0 - x[0];
  for (int i = 1; i < m; ++i) p[i] = x[i - 1] - x[i];
  p[m] = x[m - 1];
}

inline void prob_to_ccdf(const double* p, int m, double* x) {
  double acc = 0.0;
  for (int i = m; i >= 1; --i) {
    acc += p[i];
    x[i - 1] = acc;
  }
}

inline void boxdot_raw(const SubspaceCoeffs<double>& t, const double* a, const double* b, int m,
                       double* out) {
  for (int k = 0; k <= m; ++k) {
    double acc = 0.0;
    for (int i = k; i <= m; ++i) {
      const int jhi = m + k - i;
      for (int j = k; j <= jhi; ++j) acc += t.v(i, j, k) * a[i] * b[j];
    }
    out[k] = acc;
  }
}

inline void boxtimes_raw(const SubspaceCoeffs<double>& t, const double* a, const double* b, int m,
                         double* out) {
  for (int k = 0; k <= m; ++k) {
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) {
      for (int j = k - i; j <= k; ++j) acc += t.c(i, j, k) * a[i] * b[j];
    }
    out[k] = acc;
  }
}

inline void channel_raw(int m, double eps, double* p) {
  // binomial(m,i) fits a double easily for the m this engine supports
  double c = 1.0;
  for (int i = 0; i <= m; ++i) {
    p[i] = c * std::pow(eps, i) * std::pow(1.0 - eps, m - i);
    c = c * (m - i) / (i + 1);
  }
}

inline double sup_diff(const double* a, const double* b, int n) {
  double r = 0.0;
  for (int i = 0; i < n; ++i) r = std::max(r, std::abs(a[i] - b[i]));
  return r;
}

}  // namespace

double CoupledState::sup_norm() const {
  double r = 0.0;
  for (double v : X) r = std::max(r, std::abs(v));
  return r;
}

CoupledState CoupledState::ones(const CoupledParams& cp, double eps) {
  CoupledState s;
  s.L = cp.L;
  s.w = cp.w;
  s.m = cp.base.m;
  s.X.assign(static_cast<size_t>(s.positions()) * s.m, 1.0);
  s.eps_profile.assign(static_cast<size_t>(s.positions()), 0.0);
  for (int i = 0; i < cp.L; ++i) s.eps_profile[static_cast<size_t>(i)] = eps;
  return s;
}

DeEngine::DeEngine(EnsembleParams p) : p_(p) {
  p_.validate();
  if (p_.m > kMaxHotM) throw std::invalid_argument("DeEngine: m too large for the numeric engine");
  tab_ = &double_coeffs(p_.m);
}

void DeEngine::f_raw(const double* y, double eps, double* out) const {
  const int m = p_.m;
  double yo[kMaxHotM + 1], acc[kMaxHotM + 1], tmp[kMaxHotM + 1], po[kMaxHotM + 1];
  ccdf_to_prob(y, m, yo);
  std::memcpy(acc, yo, sizeof(double) * (m + 1));
  for (int t = 0; t < p_.dv - 2; ++t) {
    boxdot_raw(*tab_, acc, yo, m, tmp);
    std::memcpy(acc, tmp, sizeof(double) * (m + 1));
  }
  channel_raw(m, eps, po);
  boxdot_raw(*tab_, po, acc, m, tmp);
  prob_to_ccdf(tmp, m, out);
}

void DeEngine::g_raw(const double* x, double* out) const {
  const int m = p_.m;
  double xo[kMaxHotM + 1], acc[kMaxHotM + 1], tmp[kMaxHotM + 1];
  ccdf_to_prob(x, m, xo);
  std::memcpy(acc, xo, sizeof(double) * (m + 1));
  for (int t = 0; t < p_.dc - 2; ++t) {
    boxtimes_raw(*tab_, acc, xo, m, tmp);
    std::memcpy(acc, tmp, sizeof(double) * (m + 1));
  }
  prob_to_ccdf(acc, m, out);
}

CcdfVecD DeEngine::f_update(const CcdfVecD& y, double eps) const {
  if (y.dim() != p_.m) throw std::invalid_argument("f_update: dimension mismatch");
  if (eps < 0.0 || eps > 1.0) throw std::invalid_argument("f_update: eps out of [0,1]");
  validate(y);
  CcdfVecD out(p_.m);
  f_raw(y.entries().data(), eps, out.entries().data());
  return out;
}

CcdfVecD DeEngine::g_update(const CcdfVecD& x) const {
  if (x.dim() != p_.m) throw std::invalid_argument("g_update: dimension mismatch");
  validate(x);
  CcdfVecD out(p_.m);
  g_raw(x.entries().data(), out.entries().data());
  return out;
}

DeReport DeEngine::fixed_point_from(const CcdfVecD& x0, double eps, const DeOptions& opts) const {
  if (opts.tol <= 0.0) throw std::invalid_argument("fixed_point: tol must be positive");
  const int m = p_.m;
  DeReport rep{CcdfVecD(m)};
  std::vector<double> x(x0.entries().begin(), x0.entries().end());
  std::vector<double> g(m), xn(m);
  for (int it = 1; it <= opts.max_iter; ++it) {
    g_raw(x.data(), g.data());
    f_raw(g.data(), eps, xn.data());
    rep.residual = sup_diff(x.data(), xn.data(), m);
    x.swap(xn);
    rep.iterations = it;
    const double sup = *std::max_element(x.begin(), x.end());
    if (sup < opts.success_tol) {
      rep.converged = true;
      break;
    }
    if (rep.residual < opts.tol) {
      rep.converged = true;
      break;
    }
  }
  for (int i = 0; i < m; ++i) rep.fixed_point[i] = x[static_cast<size_t>(i)];
  rep.success = *std::max_element(x.begin(), x.end()) < opts.success_tol;
  return rep;
}

DeReport DeEngine::fixed_point(double eps, const DeOptions& opts) const {
  return fixed_point_from(CcdfVecD::ones(p_.m), eps, opts);
}

double DeEngine::bp_threshold(double bisect_tol, const DeOptions& opts) const {
  if (bisect_tol <= 0.0) throw std::invalid_argument("bp_threshold: tol must be positive");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    (fixed_point(mid, opts).success ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::vector<double>> coupling_matrix(int L, int w) {
  if (L < 1 || w < 1) throw std::invalid_argument("coupling_matrix: need L,w >= 1");
  std::vector<std::vector<double>> A(static_cast<size_t>(L),
                                     std::vector<double>(static_cast<size_t>(L + w - 1), 0.0));
  for (int i = 0; i < L; ++i) {
    for (int k = 0; k < w; ++k) A[static_cast<size_t>(i)][static_cast<size_t>(i + k)] = 1.0 / w;
  }
  return A;
}

CoupledDe::CoupledDe(CoupledParams cp) : cp_(cp), eng_(cp.base) { cp_.validate(); }

CoupledReport CoupledDe::run(double eps, const DeOptions& opts) const {
  const int m = cp_.base.m;
  const int L = cp_.L, w = cp_.w, N = cp_.positions();
  CoupledReport rep{CoupledState::ones(cp_, eps)};
  CoupledState& st = rep.state;

  std::vector<double> G(static_cast<size_t>(N) * m);
  std::vector<double> Y(static_cast<size_t>(L) * m);
  std::vector<double> F(static_cast<size_t>(L) * m);
  std::vector<double> Xn(static_cast<size_t>(N) * m);

  for (int it = 1; it <= opts.max_iter; ++it) {
    for (int i = 0; i < N; ++i) eng_.g_raw(st.row(i), G.data() + static_cast<size_t>(i) * m);
    // y_j = (1/w) sum_{t=j..j+w-1} g(x_t)
    for (int j = 0; j < L; ++j) {
      double* y = Y.data() + static_cast<size_t>(j) * m;
      std::fill(y, y + m, 0.0);
      for (int t = j; t < j + w; ++t) {
        const double* gr = G.data() + static_cast<size_t>(t) * m;
        for (int c = 0; c < m; ++c) y[c] += gr[c];
      }
      for (int c = 0; c < m; ++c) y[c] /= w;
    }
    for (int j = 0; j < L; ++j) {
      eng_.f_raw(Y.data() + static_cast<size_t>(j) * m, eps, F.data() + static_cast<size_t>(j) * m);
    }
    // x_i = (1/w) sum over in-range rows of F; out-of-range terms are zero
    for (int i = 0; i < N; ++i) {
      double* x = Xn.data() + static_cast<size_t>(i) * m;
      std::fill(x, x + m, 0.0);
      const int jlo = std::max(0, i - w + 1), jhi = std::min(L - 1, i);
      for (int j = jlo; j <= jhi; ++j) {
        const double* fr = F.data() + static_cast<size_t>(j) * m;
        for (int c = 0; c < m; ++c) x[c] += fr[c];
      }
      for (int c = 0; c < m; ++c) x[c] /= w;
    }
    rep.residual = sup_diff(st.X.data(), Xn.data(), N * m);
    st.X.swap(Xn);
    rep.iterations = it;
    if (st.sup_norm() < opts.success_tol) {
      rep.converged = true;
      break;
    }
    if (rep.residual < opts.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.success = st.sup_norm() < opts.success_tol;
  return rep;
}

double CoupledDe::threshold(double bisect_tol, const DeOptions& opts) const {
  if (bisect_tol <= 0.0) throw std::invalid_argument("threshold: tol must be positive");
  double lo = 0.0, hi = 1.0;
  while (hi - lo > bisect_tol) {
    const double mid = 0.5 * (lo + hi);
    (run(mid, opts).success ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace saturate
