#ifndef SATURATE_JSON_IO_HPP
#define SATURATE_JSON_IO_HPP

#include <json.hpp>

#include "saturate/potential.hpp"

namespace saturate {

// Canonical JSON forms. Rationals serialize as "num/den" strings so exact
// results survive the round trip; polynomials list monomials in graded-lex
// order with eps-coefficient lists.

using Json = nlohmann::ordered_json;

Json to_json(const EpsPoly& p);
EpsPoly eps_poly_from_json(const Json& j);

Json to_json(const MultiPoly& p);
MultiPoly multi_poly_from_json(const Json& j);

Json to_json(const DMatrix& d);
DMatrix d_matrix_from_json(const Json& j);

Json to_json(const PotentialSolution& sol);
PotentialSolution potential_solution_from_json(const Json& j);

Json to_json(const SolveOutcome& out);

Json to_json(const DeReport& rep);
Json to_json(const CoupledReport& rep);
Json to_json(const WBoundResult& r);

// generic (f,g) system file: {"m":..., "f":[poly...], "g":[poly...]}
Json to_json(const DePolynomials& sys);
DePolynomials de_polynomials_from_json(const Json& j);

}  // namespace saturate

#endif
