#ifndef SATURATE_DE_ENGINE_HPP
#define SATURATE_DE_ENGINE_HPP

#include <vector>

#include "saturate/message_algebra.hpp"

namespace saturate {

// Density evolution in CCDF form: variable/check updates, fixed-point
// iteration from the all-erased state, threshold bisection, and the
// spatially-coupled recursion X = A^T F(A G(X); eps).

struct EnsembleParams {
  int dv = 3;
  int dc = 6;
  int m = 1;

  void validate() const {
    if (dv < 2 || dc < 2 || m < 1) throw std::invalid_argument("EnsembleParams: need dv,dc >= 2 and m >= 1");
  }
  double design_rate() const { return 1.0 - static_cast<double>(dv) / dc; }
};

struct CoupledParams {
  EnsembleParams base;
  int L = 100;
  int w = 3;

  void validate() const {
    base.validate();
    if (L < 1 || w < 1) throw std::invalid_argument("CoupledParams: need L,w >= 1");
  }
  int positions() const { return L + w - 1; }
};

struct DeOptions {
  double tol = 1e-10;          // residual sup-norm for convergence
  double success_tol = 1e-7;   // fixed point below this decodes
  int max_iter = 50000;
};

struct DeReport {
  CcdfVecD fixed_point;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  bool success = false;  // sup-norm of fixed point < success_tol
};

// Row-major (L+w-1) x m stack of CCDF rows plus the erasure profile.
struct CoupledState {
  int L = 0, w = 0, m = 0;
  std::vector<double> X;            // positions() * m
  std::vector<double> eps_profile;  // positions(); eps for i < L, 0 after

  int positions() const { return L + w - 1; }
  double* row(int i) { return X.data() + static_cast<size_t>(i) * m; }
  const double* row(int i) const { return X.data() + static_cast<size_t>(i) * m; }
  double sup_norm() const;

  static CoupledState ones(const CoupledParams& cp, double eps);
};

struct CoupledReport {
  CoupledState state;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  bool success = false;
};

// One DE step in either backend (dv-1 intersections against the channel,
// dc-1 sums), used by tests and by the symbolic-extraction cross-checks.
template <class T>
CcdfVec<T> f_update(const CcdfVec<T>& y, const T& eps, const EnsembleParams& p) {
  p.validate();
  if (y.dim() != p.m) throw std::invalid_argument("f_update: dimension mismatch");
  ProbVec<T> yo = from_ccdf(y);
  ProbVec<T> acc = yo;
  for (int t = 0; t < p.dv - 2; ++t) acc = boxdot(acc, yo);
  acc = boxdot(channel_vector<T>(p.m, eps), acc);
  return to_ccdf(acc);
}

template <class T>
CcdfVec<T> g_update(const CcdfVec<T>& x, const EnsembleParams& p) {
  p.validate();
  if (x.dim() != p.m) throw std::invalid_argument("g_update: dimension mismatch");
  ProbVec<T> xo = from_ccdf(x);
  ProbVec<T> acc = xo;
  for (int t = 0; t < p.dc - 2; ++t) acc = boxtimes(acc, xo);
  return to_ccdf(acc);
}

// Double-precision engine with per-ensemble coefficient tables. Stateless
// after construction; safe for concurrent use.
class DeEngine {
 public:
  static constexpr int kMaxHotM = 16;

  explicit DeEngine(EnsembleParams p);

  const EnsembleParams& params() const { return p_; }

  CcdfVecD f_update(const CcdfVecD& y, double eps) const;
  CcdfVecD g_update(const CcdfVecD& x) const;

  DeReport fixed_point(double eps, const DeOptions& opts = {}) const;
  DeReport fixed_point_from(const CcdfVecD& x0, double eps, const DeOptions& opts = {}) const;
  double bp_threshold(double bisect_tol = 1e-5, const DeOptions& opts = {}) const;

  // raw CCDF-array updates (length m), no validation
  void f_raw(const double* y, double eps, double* out) const;
  void g_raw(const double* x, double* out) const;

 private:
  EnsembleParams p_;
  const SubspaceCoeffs<double>* tab_;
};

// L x (L+w-1) band matrix with 1/w in columns i..i+w-1 of row i.
std::vector<std::vector<double>> coupling_matrix(int L, int w);

class CoupledDe {
 public:
  explicit CoupledDe(CoupledParams cp);

  const CoupledParams& params() const { return cp_; }
  const DeEngine& engine() const { return eng_; }

  CoupledReport run(double eps, const DeOptions& opts = {}) const;
  double threshold(double bisect_tol = 1e-4, const DeOptions& opts = {}) const;

 private:
  CoupledParams cp_;
  DeEngine eng_;
};

}  // namespace saturate

#endif
