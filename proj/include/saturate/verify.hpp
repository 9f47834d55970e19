#ifndef SATURATE_VERIFY_HPP
#define SATURATE_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "saturate/potential.hpp"

namespace saturate {

// Named property suites behind the `verify` subcommand: algebraic identities
// of the coefficient kernel, monotonicity and simplex preservation of the
// message operators, gradient consistency of the potential, counting checks,
// and golden-file comparisons.

enum class Backend { Exact, Double };

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // filled on failure (and for a few informative passes)
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct VerifyOptions {
  int max_m = 4;          // cap for the randomized vector suites
  int appendix_max_m = 8;  // cap for the exact ratio identities
  int trials = 200;
  int pairs = 1000;
  uint64_t seed = 2024;
  Backend backend = Backend::Double;  // randomized operator suites
  std::string data_dir;               // golden files; empty disables those checks
};

SuiteResult verify_appendix_identities(const VerifyOptions& opt);
SuiteResult verify_stochasticity(const VerifyOptions& opt);
SuiteResult verify_simplex(const VerifyOptions& opt);
SuiteResult verify_monotonicity(const VerifyOptions& opt);
SuiteResult verify_polynomials(const VerifyOptions& opt);
SuiteResult verify_gradients(const VerifyOptions& opt);
SuiteResult verify_counting(const VerifyOptions& opt);
SuiteResult verify_table2(const VerifyOptions& opt);    // reference D matrices + counts
SuiteResult verify_examples(const VerifyOptions& opt);  // worked solutions, golden files

// suite = "all" runs everything
std::vector<SuiteResult> run_verify(const std::string& suite, const VerifyOptions& opt);
std::vector<std::string> verify_suite_names();

}  // namespace saturate

#endif
