#ifndef SATURATE_POTENTIAL_HPP
#define SATURATE_POTENTIAL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "saturate/polynomial.hpp"

namespace saturate {

// Potential-function machinery for vector DE recursions given by multivariate
// polynomials (f, g): existence checks, the linear system for (D, phi, mu),
// construction of F and G, the potential U and its gradient (single and
// coupled), energy gap, potential threshold, and the saturation w-bound.
// The nonbinary ensembles are one producer of (f, g); generic systems such as
// multi-layer erasure recursions go through the same entry points.

// --- shape of the candidate D matrix -------------------------------------

struct DShape {
  int m = 0;
  std::vector<uint8_t> mask;  // row-major (j,s), 1 = entry allowed nonzero

  static DShape full(int m);
  static DShape diagonal(int m);

  bool allowed(int j, int s) const {  // 1-based
    return mask[static_cast<size_t>(j - 1) * m + (s - 1)] != 0;
  }
  std::string name() const;
};

// --- necessary condition ---------------------------------------------------

struct ConditionWitness {
  bool on_f_side = true;
  int coordinate = 0;  // the subtracted coordinate (1-based)
  Monomial monomial;   // element of (S - e_j) with no matching support
};

struct ConditionReport {
  bool holds = true;
  std::optional<ConditionWitness> witness;
  std::string describe() const;
};

// Set-inclusion test: for every coordinate j, the shifted supports minus e_j
// must land inside the union of f- (resp. g-) supports selected by column j
// of the shape. Exact; returns the first violating monomial on failure.
ConditionReport check_necessary_condition(const std::vector<MultiPoly>& f,
                                          const std::vector<MultiPoly>& g, const DShape& shape);

// --- the linear system ------------------------------------------------------

struct SystemCounts {
  size_t s_f = 0, s_g = 0;   // |S^F|, |S^G|
  size_t n_phi = 0, n_mu = 0;  // equation counts
};

class LinearSystem {
 public:
  struct Row {
    std::vector<std::pair<int, Rational>> entries;  // (column, coefficient)
  };

  int m = 0;
  DShape shape;
  std::vector<MultiPoly> f, g;       // the system being integrated
  std::vector<Rational> eps_samples;  // distinct rationals, one per phi replica
  SupportSet sF, sG;
  std::vector<std::pair<int, int>> d_cols;  // (j,s) per d column, 1-based
  std::vector<Monomial> phi_index;          // sF in canonical order
  std::vector<Monomial> mu_index;           // sG in canonical order
  std::vector<Row> rows;
  SystemCounts counts;

  int n_cols() const {
    return static_cast<int>(d_cols.size() + phi_index.size() * eps_samples.size() + mu_index.size());
  }
  int d_col(int j, int s) const;                 // -1 if not allowed
  int phi_col(size_t idx, size_t sample) const;  // column of phi_{index}(eps_sample)
  int mu_col(size_t idx) const;
};

// Assembles the homogeneous system in the stacked unknown (d, phi, mu).
// eps_degree bounds the eps-degree of f's coefficients; pass -1 to take it
// from f itself. phi unknowns are replicated at eps_degree+1 rational sample
// points; d and mu are shared across samples, which forces them to be
// eps-independent.
LinearSystem build_linear_system(const std::vector<MultiPoly>& f, const std::vector<MultiPoly>& g,
                                 const DShape& shape, int eps_degree = -1);

// --- solutions ---------------------------------------------------------------

struct DMatrix {
  int m = 0;
  std::vector<Rational> a;  // row-major m*m

  Rational& at(int j, int s) { return a[static_cast<size_t>(j - 1) * m + (s - 1)]; }
  const Rational& at(int j, int s) const { return a[static_cast<size_t>(j - 1) * m + (s - 1)]; }

  bool symmetric() const;
  bool positive_on(const DShape& shape) const;  // masked entries > 0, others == 0
  Rational det() const;
  double inf_norm() const;  // max absolute row sum
};

struct PotentialSolution {
  int m = 0;
  DShape shape;
  DMatrix D;    // normalized so d_11 = 1
  MultiPoly F;  // coefficients phi (eps-dependent)
  MultiPoly G;  // coefficients mu (constant)
  int nullity = 1;  // dimension of the homogeneous solution space
  bool d_symmetric = false;
  bool d_positive = false;
  bool d_invertible = false;
  bool identities_hold = false;  // F' = f D and G' = g D, verified symbolically

  PotentialSolution(int mm = 1) : m(mm), F(std::max(mm, 1)), G(std::max(mm, 1)) {}

  bool admissible() const { return d_symmetric && d_positive && d_invertible && identities_hold; }
  // scale the whole solution family: D, F, G all multiply by a
  PotentialSolution scaled(const Rational& a) const;
};

struct SolveOutcome {
  std::optional<PotentialSolution> solution;  // nullopt => infeasible
  SystemCounts counts;
  int nullity = 0;
  std::string note;

  bool infeasible() const { return !solution.has_value(); }
};

// Exact elimination over the rationals. Infeasible is a rank verdict (only
// the zero solution), never a tolerance artifact. The returned solution is
// normalized to d_11 = 1 and carries verified D/identity flags.
SolveOutcome solve_system(const LinearSystem& sys);

// convenience: extract + build + solve for a nonbinary ensemble
SolveOutcome solve_ensemble(const EnsembleParams& p, const DShape& shape, int max_m = 6);

// --- counting formulas (closed forms for the nonbinary supports) -----------

BigInt sF_size_formula(int dv, int m);
BigInt sG_size_formula(int dc, int m);
BigInt n_phi_formula(int dv, int m);
BigInt n_mu_formula(int dc, int m);

// --- numeric evaluation of U and its derivatives ----------------------------

// Bundles compiled forms of f, g, F, G, the Jacobian of g, and D. For
// nonbinary ensembles pass the EnsembleParams so DE dynamics run on the fast
// table engine; generic systems iterate the compiled polynomials.
class PotentialEvaluator {
 public:
  PotentialEvaluator(const PotentialSolution& sol, std::vector<MultiPoly> f,
                     std::vector<MultiPoly> g,
                     std::optional<EnsembleParams> ensemble = std::nullopt);

  int dim() const { return m_; }
  const std::vector<std::vector<double>>& D() const { return d_; }
  double d_inf_norm() const;

  std::vector<double> f_value(std::span<const double> y, double eps) const;
  std::vector<double> g_value(std::span<const double> x) const;
  // DE step f(g(x); eps)
  std::vector<double> step(std::span<const double> x, double eps) const;

  double U(std::span<const double> x, double eps) const;
  // U'(x;eps) = (x - f(g(x);eps)) D g'(x), a row vector
  std::vector<double> grad(std::span<const double> x, double eps) const;

  double coupled_U(const CoupledState& X, double eps) const;
  // rows of U'(X;eps) for every position, per the coupled chain rule
  std::vector<std::vector<double>> coupled_grad(const CoupledState& X, double eps) const;

  // Jacobians for the w-bound suprema
  std::vector<std::vector<double>> g_jacobian(std::span<const double> x) const;
  std::vector<std::vector<double>> f_jacobian(std::span<const double> y, double eps) const;
  double g_hessian_inf_norm(std::span<const double> x) const;

 private:
  int m_;
  std::vector<std::vector<double>> d_;
  std::vector<CompiledPoly> f_, g_;
  std::vector<std::vector<CompiledPoly>> gjac_;          // gjac_[k][l] = d g_k / d x_l
  std::vector<std::vector<CompiledPoly>> fjac_;          // fjac_[k][l] = d f_k / d y_l
  std::vector<std::vector<std::vector<CompiledPoly>>> ghess_;  // [k][l][r]
  CompiledPoly F_, G_;
  std::optional<DeEngine> engine_;
};

// --- energy gap, potential threshold, w-bound -------------------------------

struct GapSearchConfig {
  int grid_per_axis = 9;      // seeds per axis (ordered tuples are deduped)
  DeOptions de;               // basin test and fixed-point iteration
  double dedup_tol = 1e-8;
};

struct EnergyGapResult {
  double gap = 0.0;              // +inf when no point outside the basin was found
  bool complement_found = false;
  std::vector<double> argmin;
  int fixed_points_seen = 0;
};

// inf of U over states outside the decoded fixed point's basin, estimated on
// the DE fixed points reachable from a seed grid (always including all-ones)
EnergyGapResult energy_gap(const PotentialEvaluator& ev, double eps, const GapSearchConfig& cfg = {});

// bisection on the sign of the energy gap over (eps_lo, 1]
double potential_threshold(const PotentialEvaluator& ev, double eps_lo, double tol = 1e-4,
                           const GapSearchConfig& cfg = {});

struct WBoundResult {
  double alpha = 0, beta = 0, gamma = 0;  // grid suprema of |G_d|, |G_dd|, |F_d|
  double K = 0;                           // |D|_inf (alpha + beta + alpha^2 gamma)
  double delta_e = 0;
  double w_min = 0;  // m K / (2 delta_e)
};

WBoundResult w_bound(const PotentialEvaluator& ev, double eps, double delta_e, int grid_per_axis = 11);

// --- generic producers -------------------------------------------------------

// Two-layer erasure recursion with variable degrees (l1, l2) and check
// degrees (r1, r2); a generic (f, g) system in two variables.
DePolynomials make_bilayer_system(int l1, int l2, int r1, int r2);

}  // namespace saturate

#endif
