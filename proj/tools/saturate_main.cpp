// saturate: thresholds and potential functions for nonbinary and
// spatially-coupled LDPC ensembles on the erasure channel.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "saturate/json_io.hpp"
#include "saturate/verify.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using saturate::Json;

// JSON config files: top-level keys for app options, one object per
// subcommand. Command-line flags take precedence over file values.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool, bool, std::string) const override {
    Json j;
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->count() == 0) continue;
      j[opt->get_single_name()] = opt->results().size() == 1 ? Json(opt->results().front())
                                                             : Json(opt->results());
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json j = Json::parse(input);
    std::vector<CLI::ConfigItem> out;
    std::function<void(const Json&, std::vector<std::string>)> walk =
        [&](const Json& node, std::vector<std::string> parents) {
          for (const auto& [key, val] : node.items()) {
            if (val.is_object()) {
              auto deeper = parents;
              deeper.push_back(key);
              walk(val, deeper);
              continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (val.is_array()) {
              for (const auto& v : val) {
                item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
              }
            } else if (val.is_boolean()) {
              item.inputs.push_back(val.get<bool>() ? "true" : "false");
            } else {
              item.inputs.push_back(val.is_string() ? val.get<std::string>() : val.dump());
            }
            out.push_back(std::move(item));
          }
        };
    walk(j, {});
    return out;
  }
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
};

Json result_record(Json config, Json payload, double ms) {
  Json j;
  j["schema"] = "saturate/result/v1";
  j["tool"] = Json{{"name", "saturate"}, {"version", kVersion}};
  j["config"] = std::move(config);
  j["result"] = std::move(payload);
  j["timing_ms"] = ms;
  return j;
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << j.dump(2) << "\n";
  }
}

void emit_text(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
  }
}

std::string data_dir_default() {
#ifdef SATURATE_DATA_DIR
  return SATURATE_DATA_DIR;
#else
  return "data/golden";
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DE thresholds and potential functions for nonbinary (dv,dc,m) and coupled "
               "(dv,dc,m,L,w) LDPC ensembles on the BEC"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");

  // --- threshold ---------------------------------------------------------
  auto* th = app.add_subcommand("threshold", "BP threshold by bisection (uncoupled or coupled)");
  int dv = 3, dc = 6, L = 100, w = 3;
  std::vector<int> ms{1};
  bool coupled = false, sweep = false;
  double tol = -1.0, eps_probe = -1.0;
  int max_iter = 50000;
  std::string out_path, format = "json";
  int jobs = 1;
  th->add_option("--dv", dv, "variable node degree")->check(CLI::Range(2, 64))->capture_default_str();
  th->add_option("--dc", dc, "check node degree")->check(CLI::Range(2, 64))->capture_default_str();
  th->add_option("--m", ms, "symbol dimension(s); several values allowed with --sweep")
      ->expected(-1)
      ->check(CLI::Range(1, 12));
  th->add_flag("--coupled", coupled, "coupled ensemble (uses --L and --w)");
  th->add_option("--L", L, "coupling length")->check(CLI::Range(1, 100000))->capture_default_str();
  th->add_option("--w", w, "smoothing window")->check(CLI::Range(1, 64))->capture_default_str();
  th->add_option("--eps", eps_probe, "run DE at this erasure rate and emit the full report")
      ->check(CLI::Range(0.0, 1.0));
  th->add_option("--tol", tol, "bisection tolerance (default 1e-5 uncoupled, 1e-4 coupled)");
  th->add_option("--max-iter", max_iter, "DE iteration cap")->capture_default_str();
  th->add_flag("--sweep", sweep, "emit one CSV row per m value");
  th->add_option("--out", out_path, "write result to file instead of stdout");
  th->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  th->add_option("--jobs", jobs, "parallel threshold evaluations")->check(CLI::Range(1, 64));
  th->callback([&] {
    Timer t;
    if (!sweep && ms.size() != 1) throw CLI::ValidationError("--m", "one value unless --sweep");
    saturate::DeOptions de;
    de.max_iter = max_iter;
    if (eps_probe >= 0.0) {
      // single DE run at a fixed erasure rate
      const saturate::EnsembleParams p{dv, dc, ms[0]};
      Json cfg{{"dv", dv}, {"dc", dc}, {"m", ms[0]}, {"coupled", coupled}, {"eps", eps_probe}};
      Json payload;
      if (coupled) {
        cfg["L"] = L;
        cfg["w"] = w;
        payload = saturate::to_json(saturate::CoupledDe({p, L, w}).run(eps_probe, de));
      } else {
        payload = saturate::to_json(saturate::DeEngine(p).fixed_point(eps_probe, de));
      }
      emit(result_record(cfg, payload, t.ms()), out_path);
      return;
    }
    const double btol = tol > 0 ? tol : (coupled ? 1e-4 : 1e-5);
    struct RowOut {
      int m;
      double eps;
    };
    std::vector<RowOut> rows(ms.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < ms.size(); i = next.fetch_add(1)) {
        const saturate::EnsembleParams p{dv, dc, ms[i]};
        double eps;
        if (coupled) {
          eps = saturate::CoupledDe({p, L, w}).threshold(btol, de);
        } else {
          eps = saturate::DeEngine(p).bp_threshold(btol, de);
        }
        rows[i] = {ms[i], eps};
      }
    };
    std::vector<std::future<void>> pool;
    for (int j = 1; j < std::min<int>(jobs, static_cast<int>(ms.size())); ++j) {
      pool.push_back(std::async(std::launch::async, worker));
    }
    worker();
    for (auto& f : pool) f.get();

    if (sweep || format == "csv") {
      std::ostringstream os;
      os << "dv,dc,m,L,w,eps_bp\n";
      for (const auto& r : rows) {
        os << dv << "," << dc << "," << r.m << "," << (coupled ? L : 0) << "," << (coupled ? w : 0)
           << "," << std::setprecision(10) << r.eps << "\n";
      }
      emit_text(os.str(), out_path);
    } else {
      Json cfg{{"dv", dv}, {"dc", dc}, {"m", ms[0]}, {"coupled", coupled}, {"tol", btol},
               {"max_iter", max_iter}};
      if (coupled) {
        cfg["L"] = L;
        cfg["w"] = w;
      }
      emit(result_record(cfg, Json{{"eps_bp", rows[0].eps}}, t.ms()), out_path);
    }
  });

  // --- potential ---------------------------------------------------------
  auto* po = app.add_subcommand("potential", "construct the potential function (D, F, G)");
  int pdv = 2, pdc = 3, pm = 2;
  std::string system_file, shape = "full", pout, bilayer;
  bool check_only = false;
  po->add_option("--dv", pdv, "variable node degree")->check(CLI::Range(2, 64))->capture_default_str();
  po->add_option("--dc", pdc, "check node degree")->check(CLI::Range(2, 64))->capture_default_str();
  po->add_option("--m", pm, "symbol dimension")->check(CLI::Range(1, 6))->capture_default_str();
  po->add_option("--system", system_file, "JSON file with a generic (f,g) system");
  po->add_option("--bilayer", bilayer, "two-layer system 'l1,l2,r1,r2' (generic-system shortcut)");
  po->add_option("--shape", shape, "candidate D shape")->check(CLI::IsMember({"full", "diagonal"}))->capture_default_str();
  po->add_flag("--check-only", check_only, "report the necessary-condition verdict only");
  po->add_option("--out", pout, "write result to file instead of stdout");
  po->callback([&] {
    Timer t;
    saturate::DePolynomials sys;
    Json cfg;
    if (!system_file.empty()) {
      std::ifstream in(system_file);
      if (!in) throw CLI::ValidationError("--system", "cannot open " + system_file);
      sys = saturate::de_polynomials_from_json(Json::parse(in));
      cfg["system"] = system_file;
    } else if (!bilayer.empty()) {
      int l1, l2, r1, r2;
      if (std::sscanf(bilayer.c_str(), "%d,%d,%d,%d", &l1, &l2, &r1, &r2) != 4)
        throw CLI::ValidationError("--bilayer", "expected l1,l2,r1,r2");
      sys = saturate::make_bilayer_system(l1, l2, r1, r2);
      cfg["bilayer"] = bilayer;
    } else {
      sys = saturate::extract_de_polynomials({pdv, pdc, pm});
      cfg = Json{{"dv", pdv}, {"dc", pdc}, {"m", pm}};
    }
    const int m = static_cast<int>(sys.f.size());
    const saturate::DShape sh =
        shape == "diagonal" ? saturate::DShape::diagonal(m) : saturate::DShape::full(m);
    cfg["shape"] = shape;
    const saturate::ConditionReport cond = saturate::check_necessary_condition(sys.f, sys.g, sh);
    Json payload;
    payload["necessary_condition"] = Json{{"holds", cond.holds}, {"detail", cond.describe()}};
    if (!check_only) {
      const saturate::SolveOutcome out =
          saturate::solve_system(saturate::build_linear_system(sys.f, sys.g, sh));
      payload["outcome"] = saturate::to_json(out);
    }
    emit(result_record(cfg, payload, t.ms()), pout);
  });

  // --- saturate ----------------------------------------------------------
  auto* sa = app.add_subcommand("saturate",
                                "threshold saturation study: BP threshold, potential threshold, "
                                "coupled thresholds, energy-gap curve, w bound");
  int sdv = 3, sdc = 6, sm = 1, sL = 100;
  std::vector<int> sws{3};
  int gap_points = 12;
  std::string sout, curve_out;
  sa->add_option("--dv", sdv, "variable node degree")->check(CLI::Range(2, 64))->capture_default_str();
  sa->add_option("--dc", sdc, "check node degree")->check(CLI::Range(2, 64))->capture_default_str();
  sa->add_option("--m", sm, "symbol dimension")->check(CLI::Range(1, 4))->capture_default_str();
  sa->add_option("--L", sL, "coupling length")->check(CLI::Range(1, 100000))->capture_default_str();
  sa->add_option("--w", sws, "smoothing window(s)")->expected(-1)->check(CLI::Range(1, 64));
  sa->add_option("--gap-points", gap_points, "points on the energy-gap curve")->capture_default_str();
  sa->add_option("--out", sout, "write the JSON report to file");
  sa->add_option("--curve-out", curve_out, "write the energy-gap curve CSV to file");
  sa->callback([&] {
    Timer t;
    const saturate::EnsembleParams p{sdv, sdc, sm};
    const saturate::SolveOutcome out = saturate::solve_ensemble(p, saturate::DShape::full(sm));
    if (out.infeasible()) throw std::runtime_error("no potential function for this ensemble");
    const saturate::DePolynomials de = saturate::extract_de_polynomials(p);
    const saturate::PotentialEvaluator ev(*out.solution, de.f, de.g, p);

    const double eps_bp = saturate::DeEngine(p).bp_threshold();
    const double eps_star = saturate::potential_threshold(ev, eps_bp);
    Json coupled_rows = Json::array();
    for (int ww : sws) {
      const double eps = saturate::CoupledDe({p, sL, ww}).threshold();
      coupled_rows.push_back(Json{{"L", sL}, {"w", ww}, {"eps_bp", eps}});
    }
    std::ostringstream curve;
    curve << "eps,delta_e\n";
    Json curve_rows = Json::array();
    for (int i = 0; i < gap_points; ++i) {
      const double eps = eps_bp + (eps_star - eps_bp) * (i + 1) / (gap_points + 1);
      const saturate::EnergyGapResult g = saturate::energy_gap(ev, eps);
      const double gap = g.complement_found ? g.gap : std::numeric_limits<double>::infinity();
      curve << std::setprecision(10) << eps << "," << gap << "\n";
      curve_rows.push_back(Json{{"eps", eps}, {"delta_e", gap}});
    }
    const saturate::EnergyGapResult gap_mid =
        saturate::energy_gap(ev, 0.5 * (eps_bp + eps_star));
    const saturate::WBoundResult wb =
        saturate::w_bound(ev, 0.5 * (eps_bp + eps_star), gap_mid.gap);

    Json payload;
    payload["eps_bp"] = eps_bp;
    payload["eps_star"] = eps_star;
    payload["coupled"] = std::move(coupled_rows);
    payload["energy_gap_curve"] = std::move(curve_rows);
    payload["w_bound"] = saturate::to_json(wb);
    if (!curve_out.empty()) emit_text(curve.str(), curve_out);
    emit(result_record(Json{{"dv", sdv}, {"dc", sdc}, {"m", sm}, {"L", sL}}, payload, t.ms()), sout);
  });

  // --- verify ------------------------------------------------------------
  auto* ve = app.add_subcommand("verify", "run the property and golden-file suites");
  std::string suite = "all", vout;
  saturate::VerifyOptions vopt;
  vopt.data_dir = data_dir_default();
  ve->add_option("--suite", suite, "suite name or 'all'")->capture_default_str();
  auto* vm = ve->add_option("--m", vopt.max_m, "cap for the randomized suites")
                 ->check(CLI::Range(1, 8))
                 ->capture_default_str();
  ve->add_option("--appendix-m", vopt.appendix_max_m, "cap for the exact ratio identities")
      ->check(CLI::Range(1, 10))
      ->capture_default_str();
  ve->add_option("--trials", vopt.trials, "random trials per check")->capture_default_str();
  ve->add_option("--pairs", vopt.pairs, "random order pairs for monotonicity")->capture_default_str();
  ve->add_option("--seed", vopt.seed, "RNG seed")->capture_default_str();
  ve->add_option("--data", vopt.data_dir, "directory with golden files");
  ve->add_option("--out", vout, "write the JSON summary to file");
  ve->callback([&] {
    Timer t;
    // for the exact-identity suite, an explicit --m caps the identities too
    if (suite == "appendix-a" && vm->count() > 0) vopt.appendix_max_m = vopt.max_m;
    if (const char* backend = std::getenv("SATURATE_NUM_BACKEND")) {
      const std::string b = backend;
      if (b == "exact") vopt.backend = saturate::Backend::Exact;
      else if (b == "double") vopt.backend = saturate::Backend::Double;
      else throw std::runtime_error("SATURATE_NUM_BACKEND must be 'exact' or 'double'");
    }
    const std::vector<saturate::SuiteResult> results = saturate::run_verify(suite, vopt);
    bool all_pass = true;
    Json summary = Json::array();
    for (const auto& s : results) {
      for (const auto& c : s.checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  [" << s.suite << "] " << c.name;
        if (!c.pass && !c.detail.empty()) std::cout << "  -- " << c.detail;
        std::cout << "\n";
        all_pass = all_pass && c.pass;
        summary.push_back(Json{{"suite", s.suite}, {"check", c.name}, {"pass", c.pass},
                               {"detail", c.detail}});
      }
    }
    std::cout << (all_pass ? "verify: all checks passed" : "verify: FAILURES present") << "\n";
    if (!vout.empty()) {
      emit(result_record(Json{{"suite", suite}, {"seed", vopt.seed}}, summary, t.ms()), vout);
    }
    if (!all_pass) std::exit(2);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
