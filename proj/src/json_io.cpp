#include "saturate/json_io.hpp"

namespace saturate {

Json to_json(const EpsPoly& p) {
  Json a = Json::array();
  for (int k = 0; k <= p.degree(); ++k) a.push_back(to_string(p.coeff(k)));
  return a;
}

EpsPoly eps_poly_from_json(const Json& j) {
  std::vector<Rational> c;
  for (const auto& v : j) c.push_back(rational_from_string(v.get<std::string>()));
  return EpsPoly(std::move(c));
}

Json to_json(const MultiPoly& p) {
  Json j;
  j["m"] = p.vars();
  Json terms = Json::array();
  for (const auto& [mo, c] : p.terms()) {
    Json t;
    t["exps"] = mo;
    t["eps"] = to_json(c);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

MultiPoly multi_poly_from_json(const Json& j) {
  MultiPoly p(j.at("m").get<int>());
  for (const auto& t : j.at("terms")) {
    p.add_term(t.at("exps").get<Monomial>(), eps_poly_from_json(t.at("eps")));
  }
  return p;
}

Json to_json(const DMatrix& d) {
  Json rows = Json::array();
  for (int j = 1; j <= d.m; ++j) {
    Json row = Json::array();
    for (int s = 1; s <= d.m; ++s) row.push_back(to_string(d.at(j, s)));
    rows.push_back(std::move(row));
  }
  return rows;
}

DMatrix d_matrix_from_json(const Json& j) {
  DMatrix d;
  d.m = static_cast<int>(j.size());
  for (const auto& row : j) {
    for (const auto& v : row) d.a.push_back(rational_from_string(v.get<std::string>()));
  }
  if (d.a.size() != static_cast<size_t>(d.m) * d.m) throw std::invalid_argument("DMatrix: ragged rows");
  return d;
}

Json to_json(const PotentialSolution& sol) {
  Json j;
  j["schema"] = "saturate/potential-solution/v1";
  j["m"] = sol.m;
  j["shape"] = sol.shape.name();
  j["normalization"] = "d11=1";
  j["nullity"] = sol.nullity;
  j["D"] = to_json(sol.D);
  j["F"] = to_json(sol.F);
  j["G"] = to_json(sol.G);
  j["checks"] = Json{{"symmetric", sol.d_symmetric},
                     {"positive_on_mask", sol.d_positive},
                     {"invertible", sol.d_invertible},
                     {"gradient_identities", sol.identities_hold}};
  return j;
}

PotentialSolution potential_solution_from_json(const Json& j) {
  PotentialSolution sol(j.at("m").get<int>());
  sol.D = d_matrix_from_json(j.at("D"));
  sol.F = multi_poly_from_json(j.at("F"));
  sol.G = multi_poly_from_json(j.at("G"));
  sol.nullity = j.value("nullity", 1);
  if (j.contains("checks")) {
    const auto& c = j.at("checks");
    sol.d_symmetric = c.value("symmetric", false);
    sol.d_positive = c.value("positive_on_mask", false);
    sol.d_invertible = c.value("invertible", false);
    sol.identities_hold = c.value("gradient_identities", false);
  }
  const std::string shape = j.value("shape", "full");
  sol.shape = shape == "diagonal" ? DShape::diagonal(sol.m) : DShape::full(sol.m);
  return sol;
}

Json to_json(const SolveOutcome& out) {
  Json j;
  j["schema"] = "saturate/solve-outcome/v1";
  j["counts"] = Json{{"sF", out.counts.s_f},
                     {"sG", out.counts.s_g},
                     {"n_phi", out.counts.n_phi},
                     {"n_mu", out.counts.n_mu}};
  j["nullity"] = out.nullity;
  if (out.infeasible()) {
    j["verdict"] = "infeasible";
    if (!out.note.empty()) j["note"] = out.note;
  } else {
    j["verdict"] = "solved";
    j["solution"] = to_json(*out.solution);
  }
  return j;
}

Json to_json(const DeReport& rep) {
  Json j;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["residual"] = rep.residual;
  j["success"] = rep.success;
  j["fixed_point"] = std::vector<double>(rep.fixed_point.entries().begin(), rep.fixed_point.entries().end());
  return j;
}

Json to_json(const CoupledReport& rep) {
  Json j;
  j["iterations"] = rep.iterations;
  j["converged"] = rep.converged;
  j["residual"] = rep.residual;
  j["success"] = rep.success;
  j["sup_norm"] = rep.state.sup_norm();
  j["eps_profile"] = rep.state.eps_profile;
  Json rows = Json::array();
  for (int i = 0; i < rep.state.positions(); ++i) {
    rows.push_back(std::vector<double>(rep.state.row(i), rep.state.row(i) + rep.state.m));
  }
  j["fixed_point"] = std::move(rows);
  return j;
}

Json to_json(const WBoundResult& r) {
  return Json{{"alpha", r.alpha}, {"beta", r.beta},   {"gamma", r.gamma},
              {"K", r.K},         {"delta_e", r.delta_e}, {"w_min", r.w_min}};
}

Json to_json(const DePolynomials& sys) {
  Json j;
  j["schema"] = "saturate/system/v1";
  j["m"] = sys.f.empty() ? 0 : sys.f.front().vars();
  Json fa = Json::array();
  for (const auto& p : sys.f) fa.push_back(to_json(p));
  j["f"] = std::move(fa);
  Json ga = Json::array();
  for (const auto& p : sys.g) ga.push_back(to_json(p));
  j["g"] = std::move(ga);
  return j;
}

DePolynomials de_polynomials_from_json(const Json& j) {
  DePolynomials sys;
  for (const auto& p : j.at("f")) sys.f.push_back(multi_poly_from_json(p));
  for (const auto& p : j.at("g")) sys.g.push_back(multi_poly_from_json(p));
  if (sys.f.empty() || sys.f.size() != sys.g.size())
    throw std::invalid_argument("system file: f and g must be nonempty and the same length");
  return sys;
}

}  // namespace saturate
