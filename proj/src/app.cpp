#include "cutstefan/app.hpp"

#include "cutstefan/element.hpp"
#include "cutstefan/log.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cutstefan {

namespace {

std::string numbered(const std::string& dir, const char* stem, int step, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%06d", step);
  return (std::filesystem::path(dir) / (std::string(stem) + buf + ext)).string();
}

std::pair<double, double> profile_range(const RunConfig& c) {
  if (c.output.profile) return *c.output.profile;
  return {c.domain.lo.x(), c.domain.hi.x()};
}

constexpr int kProfileSamples = 401;

} // namespace

RunResult run(const RunConfig& config, const RunOptions& options) {
  config.validate();
  const std::string dir = config.output.dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  const MeshPtr mesh = config.mesh();
  const ProblemSpec spec = config.problem();
  std::optional<Simulation> sim;
  if (options.restart) {
    sim.emplace(spec, load_state(*options.restart, mesh), config.simulation);
  } else {
    sim.emplace(spec, config.initial_level_set(mesh), config.simulation);
  }

  RunResult res;
  const bool manufactured = config.scenario == Scenario::Manufactured;
  const auto [px0, px1] = profile_range(config);
  const std::vector<SurfaceSample> profile0 = surface_profile(sim->geometry(), px0, px1, kProfileSamples);
  double surface0 = 0.0;
  for (const SurfaceSample& s : profile0) surface0 += s.height;
  if (!profile0.empty()) surface0 /= static_cast<double>(profile0.size());

  const std::string steps_path = (std::filesystem::path(dir) / "steps.csv").string();
  std::ofstream steps(steps_path);
  if (!steps) throw IoError("cannot write " + steps_path);
  steps.precision(17);
  steps << "step,t,newton_iterations,max_violation,active_dofs,active_points,cfl,retried,redistanced,"
           "v_avg,r_avg";
  if (manufactured) steps << ",T_L2,T_H1,T_L2_gamma,v_L2_gamma,r_L2_gamma";
  steps << '\n';
  res.files.push_back(steps_path);

  std::vector<StepErrors> errors;
  InterfaceAverages avg;
  const ManufacturedCase mc;
  sim->set_observer([&](const StepView& v) {
    avg = v.geometry.interface_segments.empty() ? InterfaceAverages{} : interface_averages(v.geometry, v.v_n);
    if (!manufactured) return;
    StepErrors e;
    e.t = v.t_n;
    e.T = error_norms(
        v.T_n, [&](const Vec2& x) { return mc.temperature(x, v.t_n); },
        [&](const Vec2& x) { return mc.gradient(x, v.t_n); }, v.geometry);
    const BackgroundMesh& m = *v.geometry.mesh;
    const double speed = ManufacturedCase::normal_speed(v.t_next);
    const double R = ManufacturedCase::radius(v.t_n);
    e.velocity = interface_error(
        v.geometry,
        [&](int cell, const Vec2& x) { return v.v_n.value(cell, P1Element(m.cell_vertices(cell)).barycentric(x)); },
        [speed](const Vec2&) { return speed; });
    e.radius = interface_error(v.geometry, [](int, const Vec2& x) { return x.norm(); },
                               [R](const Vec2&) { return R; });
    e.v_avg = avg.v_avg;
    e.v_exact = speed;
    e.r_avg = avg.r_avg;
    e.r_exact = R;
    errors.push_back(e);
  });

  auto write_outputs = [&] {
    const StefanState& s = sim->state();
    if (config.output.vtk) {
      const std::string a = numbered(dir, "domain", s.step, ".vtk");
      const std::string b = numbered(dir, "interface", s.step, ".vtk");
      write_vtk(a, sim->geometry(), sim->temperature(), s.phi, s.vn_ext ? &*s.vn_ext : nullptr);
      write_interface_vtk(b, sim->geometry());
      res.files.push_back(a);
      res.files.push_back(b);
    }
    const std::string snap = (std::filesystem::path(dir) / "state.json").string();
    save_state(snap, s);
  };

  write_outputs();
  while (!sim->finished()) {
    StepRecord rec;
    try {
      rec = sim->step();
    } catch (const Error& e) {
      res.ok = false;
      res.error = e.what();
      const std::string last = (std::filesystem::path(dir) / "last_good.json").string();
      save_state(last, sim->state());
      res.files.push_back(last);
      log_warning(std::string("run stopped: ") + e.what());
      break;
    }
    ++res.steps;
    res.retries += rec.retried ? 1 : 0;
    res.redistances += rec.redistanced ? 1 : 0;
    int iterations = 0, points = 0;
    double violation = 0.0;
    for (const NewtonReport& r : rec.newton) {
      iterations += r.iterations;
      violation = std::max(violation, r.max_violation);
      if (!r.active_points.empty()) points = r.active_points.back();
    }
    steps << rec.step << ',' << rec.t_end << ',' << iterations << ',' << violation << ',' << rec.active_dofs
          << ',' << points << ',' << rec.cfl << ',' << rec.retried << ',' << rec.redistanced << ','
          << avg.v_avg << ',' << avg.r_avg;
    if (manufactured && !errors.empty()) {
      const StepErrors& e = errors.back();
      steps << ',' << e.T.l2.value << ',' << e.T.h1.value << ',' << e.T.gamma_l2.value << ','
            << e.velocity.value << ',' << e.radius.value;
    }
    steps << '\n';
    if (options.on_step) options.on_step(rec);
    if (sim->finished() || sim->state().step % config.output.every == 0) write_outputs();
  }
  res.t = sim->state().t;
  steps.close();

  if (manufactured) {
    ErrorReport rep;
    rep.steps = errors;
    res.errors = rep.aggregate();
  } else {
    const auto profile = surface_profile(sim->geometry(), px0, px1, kProfileSamples);
    const std::string p = (std::filesystem::path(dir) / "profile.csv").string();
    write_profile_csv(p, profile);
    res.files.push_back(p);
    res.cavity = cavity_metrics(profile, surface0);
  }
  return res;
}

} // namespace cutstefan
