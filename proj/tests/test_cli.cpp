#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <string>

#include "saturate/json_io.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd =
      (env.empty() ? "" : "env " + env + " ") + std::string(SATURATE_CLI_PATH) + " " + args +
      " 2>/dev/null";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  while (fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int status = pclose(p);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
  CHECK(run_cli("threshold --help").exit_code == 0);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("threshold --dv 1").exit_code == 1);
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("").exit_code == 1);
}

TEST_CASE("threshold emits a result record") {
  const RunResult r = run_cli("threshold --dv 3 --dc 6 --m 1");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  CHECK(j.at("schema") == "saturate/result/v1");
  CHECK(j.at("config").at("dv") == 3);
  CHECK(j.at("result").at("eps_bp").get<double>() == doctest::Approx(0.4294).epsilon(1e-3));
}

TEST_CASE("threshold sweep emits csv") {
  const RunResult r = run_cli("threshold --dv 3 --dc 6 --m 1 2 --sweep --tol 1e-3 --jobs 2");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind("dv,dc,m,L,w,eps_bp\n", 0) == 0);
  CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 3);
}

TEST_CASE("potential reproduces the worked solution") {
  const RunResult r = run_cli("potential --dv 2 --dc 3 --m 2");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  const auto& sol = j.at("result").at("outcome").at("solution");
  CHECK(sol.at("D") == saturate::Json::parse(R"([["1","2"],["2","1"]])"));
  CHECK(j.at("result").at("necessary_condition").at("holds") == true);
}

TEST_CASE("potential --check-only reports a diagonal-shape verdict") {
  const RunResult r = run_cli("potential --dv 2 --dc 3 --m 2 --shape diagonal --check-only");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  CHECK(j.at("result").at("necessary_condition").at("holds") == false);
  CHECK_FALSE(j.at("result").contains("outcome"));
}

TEST_CASE("potential accepts a generic system file") {
  const saturate::DePolynomials sys = saturate::make_bilayer_system(3, 3, 6, 6);
  const std::string path = "/tmp/saturate_test_bilayer.json";
  {
    std::ofstream out(path);
    out << saturate::to_json(sys).dump();
  }
  const RunResult r = run_cli("potential --system " + path + " --shape diagonal");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  const auto& sol = j.at("result").at("outcome").at("solution");
  CHECK(sol.at("D") == saturate::Json::parse(R"([["1","0"],["0","1"]])"));
  // --bilayer shorthand produces the same result
  const RunResult r2 = run_cli("potential --bilayer 3,3,6,6 --shape diagonal");
  REQUIRE(r2.exit_code == 0);
  CHECK(saturate::Json::parse(r2.out).at("result").at("outcome").at("solution").at("D") == sol.at("D"));
}

TEST_CASE("saturation study emits the full report") {
  const RunResult r =
      run_cli("saturate --dv 3 --dc 6 --m 1 --L 30 --w 2 --gap-points 2 --curve-out /tmp/saturate_gap.csv");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  const auto& res = j.at("result");
  CHECK(res.at("eps_bp").get<double>() == doctest::Approx(0.4294).epsilon(1e-3));
  CHECK(res.at("eps_star").get<double>() == doctest::Approx(0.4881).epsilon(1e-3));
  CHECK(res.at("eps_star").get<double>() > res.at("eps_bp").get<double>());
  REQUIRE(res.at("coupled").size() == 1);
  CHECK(res.at("coupled")[0].at("w") == 2);
  REQUIRE(res.at("energy_gap_curve").size() == 2);
  CHECK(res.at("energy_gap_curve")[0].at("delta_e").get<double>() >
        res.at("energy_gap_curve")[1].at("delta_e").get<double>());
  CHECK(res.at("w_bound").at("w_min").get<double>() > 0.0);
  std::ifstream curve("/tmp/saturate_gap.csv");
  std::string header;
  std::getline(curve, header);
  CHECK(header == "eps,delta_e");
}

TEST_CASE("verify suite selection and exit codes") {
  CHECK(run_cli("verify --suite counting --m 2").exit_code == 0);
  CHECK(run_cli("verify --suite no-such-suite").exit_code == 1);
  // backend override via the environment
  CHECK(run_cli("verify --suite simplex --m 2", "SATURATE_NUM_BACKEND=exact").exit_code == 0);
  CHECK(run_cli("verify --suite simplex --m 2", "SATURATE_NUM_BACKEND=bogus").exit_code == 1);
}

TEST_CASE("single DE run at a fixed erasure rate") {
  const RunResult r = run_cli("threshold --dv 3 --dc 6 --m 1 --eps 0.4");
  REQUIRE(r.exit_code == 0);
  const saturate::Json j = saturate::Json::parse(r.out);
  CHECK(j.at("result").at("success") == true);
  CHECK(j.at("result").at("converged") == true);
  const RunResult rc = run_cli("threshold --dv 3 --dc 6 --m 1 --coupled --L 20 --w 3 --eps 0.47");
  REQUIRE(rc.exit_code == 0);
  CHECK(saturate::Json::parse(rc.out).at("result").at("success") == true);
}

TEST_CASE("json config file with flag precedence") {
  const std::string path = "/tmp/saturate_test_config.json";
  {
    std::ofstream out(path);
    out << R"({"threshold": {"dv": 3, "dc": 6, "m": 2, "tol": 1e-3}})";
  }
  const RunResult r = run_cli("--config " + path + " threshold");
  REQUIRE(r.exit_code == 0);
  saturate::Json j = saturate::Json::parse(r.out);
  CHECK(j.at("config").at("m") == 2);
  CHECK(j.at("config").at("dc") == 6);
  // a command-line flag overrides the file value
  const RunResult r2 = run_cli("--config " + path + " threshold --m 1");
  REQUIRE(r2.exit_code == 0);
  saturate::Json j2 = saturate::Json::parse(r2.out);
  CHECK(j2.at("config").at("m") == 1);
  CHECK(j2.at("result").at("eps_bp").get<double>() == doctest::Approx(0.4294).epsilon(1e-2));
}

TEST_CASE("identical configs give identical records apart from timing") {
  auto strip = [](const std::string& s) {
    saturate::Json j = saturate::Json::parse(s);
    j.erase("timing_ms");
    return j;
  };
  const RunResult a = run_cli("threshold --dv 3 --dc 6 --m 2 --tol 1e-3");
  const RunResult b = run_cli("threshold --dv 3 --dc 6 --m 2 --tol 1e-3");
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(strip(a.out) == strip(b.out));
  const RunResult c = run_cli("potential --dv 2 --dc 3 --m 2");
  const RunResult d = run_cli("potential --dv 2 --dc 3 --m 2");
  CHECK(strip(c.out) == strip(d.out));
}
