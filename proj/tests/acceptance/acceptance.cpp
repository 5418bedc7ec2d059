// Acceptance suite: prints one PASS/FAIL line per criterion.
#include "cutstefan/app.hpp"
#include "cutstefan/log.hpp"
#include "cutstefan/stefan_nitsche.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace cutstefan;

namespace {

int g_failed = 0;
std::ofstream g_report;

void emit(const std::string& line) {
  std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  if (g_report) g_report << line << std::endl;
}

void report(int id, const char* name, bool pass, const std::string& detail) {
  if (!pass) ++g_failed;
  emit(std::string(pass ? "PASS" : "FAIL") + " [" + std::to_string(id) + "] " + name + ": " + detail);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

bool within(double v, double target, double tol) { return std::isfinite(v) && std::abs(v - target) <= tol; }

void note(const std::string& s) { emit("  " + s); }

ManufacturedRunOptions manufactured(int cells, double dt) {
  ManufacturedRunOptions o;
  o.cells = cells;
  o.dt = dt;
  o.tf = 0.1;
  return o;
}

ManufacturedRun timed_run(const ManufacturedRunOptions& o) {
  ManufacturedRun r = run_manufactured(o);
  std::ostringstream s;
  s << "run h=3/" << o.cells << " dt=" << o.dt << " theta=(" << o.nitsche.theta1 << ","
    << o.nitsche.theta2 << "): " << (r.failed ? "failed: " + r.message : "ok") << " in "
    << fmt("%.0f", r.seconds) << " s";
  note(s.str());
  return r;
}

void write_table(const ConvergenceTable& t, const std::string& path) {
  std::ofstream out(path);
  t.write_csv(out);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"cutstefan acceptance suite"};
  std::string unit_tests;
  std::string out_dir = "acceptance_output";
  bool strict = false;
  app.add_option("--unit-tests", unit_tests, "unit test executable timed by criterion 8");
  app.add_option("--out", out_dir, "directory for tables and ablation outputs");
  app.add_flag("--strict", strict, "exit non-zero when a criterion fails");
  CLI11_PARSE(app, argc, argv);
  std::filesystem::create_directories(out_dir);
  g_report.open(out_dir + "/report.txt");
  set_log_sink({});

  // Manufactured runs shared by criteria 1, 2, 3 and 7.
  std::vector<ManufacturedRun> space;
  for (int cells : {60, 120, 240}) space.push_back(timed_run(manufactured(cells, 1e-4)));
  const ConvergenceTable st = tabulate(space, StudyAxis::Space);
  write_table(st, out_dir + "/convergence_space.csv");

  {
    const double oL2 = st.order("T_L2"), oH1 = st.order("T_H1");
    const double ov = st.order("v_L2_gamma"), orr = st.order("r_L2_gamma");
    const bool pass = within(oL2, 2.0, 0.3) && within(oH1, 1.0, 0.3) && within(ov, 2.0, 0.4) && within(orr, 2.0, 0.4);
    report(1, "spatial convergence", pass,
           "orders T_L2 " + fmt("%.2f", oL2) + " (2.0+-0.3), T_H1 " + fmt("%.2f", oH1) + " (1.0+-0.3), v_L2(G) " +
               fmt("%.2f", ov) + " (2.0+-0.4), r_L2(G) " + fmt("%.2f", orr) + " (2.0+-0.4)");
  }

  {
    std::vector<ManufacturedRun> time;
    for (double dt : {4e-4, 2e-4}) time.push_back(timed_run(manufactured(240, dt)));
    time.push_back(space.back());
    const ConvergenceTable tt = tabulate(time, StudyAxis::Time);
    write_table(tt, out_dir + "/convergence_time.csv");
    const double o = tt.order("T_L2_final");
    report(2, "temporal convergence", within(o, 1.0, 0.3),
           "h=1/80, final-time T_L2 order " + fmt("%.2f", o) + " (1.0+-0.3), aggregate T_L2 order " +
               fmt("%.2f", tt.order("T_L2")));
  }

  {
    const ManufacturedRun& fine = space.back();
    const double max_dev = fine.failed ? NAN : fine.report.aggregate().max_radius_deviation;
    bool monotone = true;
    std::string devs;
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double d = space[i].failed ? NAN : space[i].report.aggregate().max_radius_deviation;
      devs += (i ? ", " : "") + fmt("%.2e", d);
      if (i > 0 && !(d < space[i - 1].report.aggregate().max_radius_deviation)) monotone = false;
    }
    report(3, "interface kinematics", max_dev <= 5e-3 && monotone,
           "max|r_avg-R| at h=1/80 " + fmt("%.2e", max_dev) + " (<= 5e-3); by h: " + devs +
               (monotone ? " monotone" : " not monotone") + "; v_L2(G) at h=1/80 " +
               fmt("%.2e", fine.report.aggregate().velocity));
  }

  {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(-5.0, 5.0), lg(-3.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 3);
    int failures = 0;
    for (int i = 0; i < 10000; ++i) {
      double d = u(rng), s = u(rng);
      const double g = std::pow(10.0, lg(rng));
      switch (pick(rng)) {
        case 0:  // contact branch
          d = 0.0;
          s = -std::abs(s);
          break;
        case 1:  // free branch
          s = 0.0;
          d = -std::abs(d);
          break;
        default:
          break;
      }
      if (!signorini_kkt_equivalence_check(d, s, g)) ++failures;
    }
    report(4, "Signorini KKT equivalence", failures == 0,
           std::to_string(failures) + " failures in 10000 random triples");
  }

  {
    const std::vector<double> offsets{0.0, 0.1, 0.25, 0.49};
    FlatCutOptions with;
    FlatCutOptions without;
    without.gamma_ghost = 0.0;
    std::string cw, cn;
    for (double d : offsets) {
      cw += fmt(" %.3g", flat_cut_condition_number(d, with));
      cn += fmt(" %.3g", flat_cut_condition_number(d, without));
    }
    const double sw = condition_spread(offsets, with), sn = condition_spread(offsets, without);
    report(5, "cut-position robustness", sw <= 10.0 && sn >= 10.0 * 100.0,
           "h=1/32 condition spread with ghost penalty " + fmt("%.2f", sw) + " (<= 10), without " +
               fmt("%.3g", sn) + " (>= 1e3); kappa with:" + cw + ", without:" + cn);
  }

  {
    RunResult res[2];
    const double periods[2] = {0.1, 0.01};
    for (int i = 0; i < 2; ++i) {
      RunConfig c = pulsed_ablation_config(periods[i]);
      c.output.dir = out_dir + "/pulsed_P0_" + fmt("%g", periods[i]);
      c.output.every = 400;
      const auto t0 = std::chrono::steady_clock::now();
      res[i] = run(c);
      note("ablation P0=" + fmt("%g", periods[i]) + ": " + (res[i].ok ? "ok" : res[i].error) + ", " +
           std::to_string(res[i].steps) + " steps, " + std::to_string(res[i].retries) + " retries in " +
           fmt("%.0f", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    }
    const bool done = res[0].ok && res[1].ok && res[0].retries == 0 && res[1].retries == 0 && res[0].cavity &&
                      res[1].cavity;
    const double d0 = done ? res[0].cavity->depth : NAN, d1 = done ? res[1].cavity->depth : NAN;
    const double r0 = done ? res[0].cavity->roughness : NAN, r1 = done ? res[1].cavity->roughness : NAN;
    const double depth_gap = std::abs(d0 - d1) / std::max(d0, d1);
    const double ratio = r0 / r1;
    report(6, "pulsed ablation", done && depth_gap <= 0.1 && ratio >= 2.0,
           "depth P0=0.1 " + fmt("%.4f", d0) + ", P0=0.01 " + fmt("%.4f", d1) + " (gap " +
               fmt("%.1f%%", 100 * depth_gap) + " <= 10%); roughness " + fmt("%.4f", r0) + " / " +
               fmt("%.4f", r1) + " = " + fmt("%.2f", ratio) + " (>= 2)");
  }

  {
    const double variants[4][2] = {{1, 1}, {1, -1}, {1, 0}, {0, -1}};
    std::vector<ManufacturedRun> runs;
    for (const auto& v : variants) {
      if (v[0] == 0 && v[1] == -1) {
        runs.push_back(space[1]);
        continue;
      }
      ManufacturedRunOptions o = manufactured(120, 1e-4);
      o.nitsche.theta1 = v[0];
      o.nitsche.theta2 = v[1];
      runs.push_back(timed_run(o));
    }
    const double bound = 3.0 * space.back().report.final_T.l2.value;
    double worst = 0.0;
    std::string failed;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      if (runs[i].failed) {
        failed += fmt(" (%g,", variants[i][0]) + fmt("%g)", variants[i][1]);
        continue;
      }
      for (std::size_t j = i + 1; j < runs.size(); ++j) {
        if (runs[j].failed) continue;
        worst = std::max(worst, final_difference(*runs[i].final_state, *runs[j].final_state));
      }
    }
    report(7, "variant cross-check", failed.empty() && worst <= bound,
           "h=1/40 largest pairwise final-time relative L2 difference " + fmt("%.2e", worst) + " (<= 3 x " +
               fmt("%.2e", bound / 3) + ")" + (failed.empty() ? "" : "; failed variants:" + failed));
  }

  {
    if (unit_tests.empty()) {
      report(8, "unit and property suites", false, "no --unit-tests executable given");
    } else {
      const auto t0 = std::chrono::steady_clock::now();
      const int rc = std::system((unit_tests + " > " + out_dir + "/unit_tests.log 2>&1").c_str());
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report(8, "unit and property suites", rc == 0 && secs <= 120.0,
             std::string(rc == 0 ? "all passed" : "failures, see unit_tests.log") + " in " + fmt("%.1f", secs) +
                 " s (<= 120 s)");
    }
  }

  reset_log_sink();
  emit(std::to_string(g_failed) + " of 8 criteria failed");
  return strict && g_failed > 0 ? 1 : 0;
}
