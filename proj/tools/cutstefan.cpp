#include "cutstefan/app.hpp"
#include "cutstefan/log.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace cutstefan;

namespace {

double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return std::stod(s);
    return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
  } catch (const std::exception&) {
    throw ConfigError("cannot read mesh size '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int thread_count() {
  const char* env = std::getenv("CUTSTEFAN_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1) throw ConfigError("CUTSTEFAN_THREADS must be a positive integer");
  return static_cast<int>(n);
}

struct Overrides {
  std::string out;
  double dt = 0.0;
  double tf = -1.0;
  std::vector<int> cells;
  int theta1 = -9;
  int theta2 = -9;
  double gamma_GT = 0.0;
  double gamma_T = 0.0;
  int every = 0;

  void add(CLI::App* app) {
    app->add_option("--out", out, "output directory");
    app->add_option("--dt", dt, "time step");
    app->add_option("--tf", tf, "final time");
    app->add_option("--cells", cells, "cells per side: n or nx,ny")->delimiter(',')->expected(1, 2);
    app->add_option("--theta1", theta1, "Nitsche symmetry switch (0 or 1)");
    app->add_option("--theta2", theta2, "Nitsche variant (-1, 0 or 1)");
    app->add_option("--gamma-GT", gamma_GT, "gradient smoothing penalty");
    app->add_option("--gamma-T", gamma_T, "temperature ghost penalty");
    app->add_option("--every", every, "output every N steps");
  }

  void apply(RunConfig& c) const {
    if (!out.empty()) c.output.dir = out;
    if (dt > 0.0) c.dt = dt;
    if (tf >= 0.0) {
      c.tf = tf;
      if (c.beam) c.beam->path.tf = tf;
    }
    if (cells.size() == 1) c.nx = c.ny = cells[0];
    if (cells.size() == 2) {
      c.nx = cells[0];
      c.ny = cells[1];
    }
    if (theta1 != -9) c.nitsche.theta1 = theta1;
    if (theta2 != -9) c.nitsche.theta2 = theta2;
    if (gamma_GT > 0.0) c.nitsche.gamma_GT = gamma_GT;
    if (gamma_T > 0.0) c.nitsche.gamma_T = gamma_T;
    if (every > 0) c.output.every = every;
  }
};

int report(const RunResult& r) {
  std::cout << "steps: " << r.steps << "\nt: " << r.t << "\nretries: " << r.retries
            << "\nredistances: " << r.redistances << '\n';
  if (r.cavity) {
    std::cout << "cavity depth: " << r.cavity->depth << "\ncavity roughness: " << r.cavity->roughness << '\n';
  }
  if (r.errors) {
    std::cout << "T L2: " << r.errors->T_l2 << "\nT H1: " << r.errors->T_h1 << "\nvelocity L2(Gamma): "
              << r.errors->velocity << "\nradius L2(Gamma): " << r.errors->radius << '\n';
  }
  if (!r.ok) {
    std::cerr << "error: " << r.error << '\n';
    return 1;
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cut finite element solver for one-phase Stefan-Signorini problems"};
  app.require_subcommand(1);

  std::string config_path;
  auto* validate = app.add_subcommand("validate-config", "check a run configuration and list all problems");
  validate->add_option("config", config_path, "YAML configuration")->required();

  std::string restart;
  double preset = 0.1;
  Overrides ov_run, ov_abl;
  auto* run_cmd = app.add_subcommand("run", "run the scenario of a configuration file");
  run_cmd->add_option("config", config_path, "YAML configuration")->required();
  run_cmd->add_option("--restart", restart, "resume from a state snapshot");
  ov_run.add(run_cmd);

  auto* ablate = app.add_subcommand("ablate2d", "pulsed laser ablation of a rectangular block");
  ablate->add_option("--config", config_path, "YAML configuration (default: built-in preset)");
  ablate->add_option("--period", preset, "pulse period P0 of the built-in preset");
  ablate->add_option("--restart", restart, "resume from a state snapshot");
  ov_abl.add(ablate);

  std::string h_list = "1/20,1/40,1/80", dt_list = "1e-4", out_dir = "output/manufactured";
  double tf = 0.1;
  int th1 = 0, th2 = -1;
  double gGT = 1e-3;
  auto* bench = app.add_subcommand("bench-manufactured", "convergence study on the manufactured solution");
  bench->set_help_flag("--help", "print this help message and exit");
  bench->add_option("--h", h_list, "mesh sizes, comma separated (fractions allowed)");
  bench->add_option("--dt", dt_list, "time steps, comma separated");
  bench->add_option("--tf", tf, "final time");
  bench->add_option("--out", out_dir, "output directory");
  bench->add_option("--theta1", th1, "Nitsche symmetry switch (0 or 1)");
  bench->add_option("--theta2", th2, "Nitsche variant (-1, 0 or 1)");
  bench->add_option("--gamma-GT", gGT, "gradient smoothing penalty");

  CLI11_PARSE(app, argc, argv);

  try {
    const int threads = thread_count();
    if (threads > 1) log_info("CUTSTEFAN_THREADS=" + std::to_string(threads) + ": this build runs single-threaded");

    if (*validate) {
      const RunConfig c = load_config(config_path);
      std::cout << "ok: " << (c.scenario == Scenario::Manufactured ? "manufactured" : "ablation") << ", "
                << c.nx << "x" << c.ny << " cells, dt " << c.dt << ", t in [" << c.t0 << ", " << c.tf << "]\n";
      return 0;
    }
    RunOptions opts;
    if (!restart.empty()) opts.restart = restart;
    if (*run_cmd) {
      RunConfig c = load_config(config_path);
      ov_run.apply(c);
      return report(run(c, opts));
    }
    if (*ablate) {
      RunConfig c = config_path.empty() ? pulsed_ablation_config(preset) : load_config(config_path);
      ov_abl.apply(c);
      return report(run(c, opts));
    }
    if (*bench) {
      std::vector<double> hs, dts;
      for (const auto& s : split(h_list)) hs.push_back(parse_fraction(s));
      for (const auto& s : split(dt_list)) dts.push_back(parse_fraction(s));
      if (hs.empty() || dts.empty()) throw ConfigError("need at least one mesh size and one time step");
      if (hs.size() > 1 && dts.size() > 1) throw ConfigError("vary either --h or --dt, not both");
      const ManufacturedCase mc;
      std::vector<ManufacturedRunOptions> cfgs;
      for (double h : hs) {
        for (double dt : dts) {
          ManufacturedRunOptions o;
          o.cells = static_cast<int>(std::lround(mc.domain.width() / h));
          o.dt = dt;
          o.tf = tf;
          o.nitsche.theta1 = th1;
          o.nitsche.theta2 = th2;
          o.nitsche.gamma_GT = gGT;
          cfgs.push_back(o);
        }
      }
      const StudyAxis axis = hs.size() > 1 ? StudyAxis::Space : StudyAxis::Time;
      std::filesystem::create_directories(out_dir);
      const ConvergenceTable t = convergence_study(cfgs, axis, mc);
      const std::string path = (std::filesystem::path(out_dir) / "convergence.csv").string();
      std::ofstream f(path);
      if (!f) throw IoError("cannot write " + path);
      t.write_csv(f);
      t.write_csv(std::cout);
      for (const auto& r : t.runs) {
        if (r.failed) {
          std::cerr << "run h=" << r.h << " dt=" << r.options.dt << " failed: " << r.message << '\n';
          return 1;
        }
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
