#pragma once

// CLI front end: scenario simulation, rho identification, coverage plan
// export and offline metrics. Exit codes: 0 success, 1 config error,
// 2 numerical failure.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pvcoat/coverage.hpp"
#include "pvcoat/csv.hpp"
#include "pvcoat/errors.hpp"
#include "pvcoat/ground_effect.hpp"
#include "pvcoat/scenario.hpp"
#include "pvcoat/simulation.hpp"

namespace pvcoat {

namespace cli_detail {

inline PanelCorners load_corners_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("JSON parse error in " + path + ": " + e.what());
  }
  if (!j.contains("corners") || !j.at("corners").is_array() ||
      j.at("corners").size() != 4) {
    throw ConfigError(path + ": expected {\"corners\": [[x,y,z] x 4]}");
  }
  PanelCorners corners;
  for (int i = 0; i < 4; ++i) {
    const auto& c = j.at("corners")[i];
    if (!c.is_array() || c.size() != 3) {
      throw ConfigError(path + ": corner " + std::to_string(i) +
                        " must be [x, y, z]");
    }
    corners.corners[i] = Eigen::Vector3d(c[0].get<double>(), c[1].get<double>(),
                                         c[2].get<double>());
  }
  return corners;
}

inline void write_plan_csv(std::ostream& out, const CoveragePlan& plan) {
  out << "t,x,y,z,yaw,valve\n";
  for (const auto& s : plan.samples) {
    out << csv::format_g9(s.time) << ',' << csv::format_g9(s.position.x())
        << ',' << csv::format_g9(s.position.y()) << ','
        << csv::format_g9(s.position.z()) << ',' << csv::format_g9(s.yaw)
        << ',' << (plan_valve_open(plan, s.time) ? 1 : 0) << "\n";
  }
}

inline int cmd_simulate(const std::string& scenario_path,
                        const std::string& out_dir, std::int64_t seed) {
  Scenario scenario = Scenario::load(scenario_path);
  if (seed >= 0) scenario.seed = static_cast<std::uint64_t>(seed);

  std::string dir = !out_dir.empty() ? out_dir : scenario.output_path;
  RunMetrics metrics;
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    const auto log_path =
        std::filesystem::path(dir) / (scenario.name + "_log.csv");
    std::ofstream log(log_path);
    if (!log) throw ConfigError("cannot write " + log_path.string());
    metrics = run_scenario(scenario, &log);
    const auto metrics_path =
        std::filesystem::path(dir) / (scenario.name + "_metrics.json");
    std::ofstream mj(metrics_path);
    mj << metrics.to_json().dump(2) << "\n";
  } else {
    metrics = run_scenario(scenario, nullptr);
  }
  std::cout << metrics.to_json().dump(2) << std::endl;
  return 0;
}

inline int cmd_fit_rho(const std::string& csv_path, double radius, double g) {
  const auto samples = csv::load_hover_samples_file(csv_path);
  const double rho = fit_rho(samples, radius, g);
  std::cout << csv::format_g9(rho) << std::endl;
  return 0;
}

inline int cmd_plan(const std::string& corners_path, const CoverageParams& params,
                    const std::string& out_path) {
  const PanelCorners corners = load_corners_json(corners_path);
  const CoveragePlan plan = generate_plan(corners, params);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot write " + out_path);
    write_plan_csv(out, plan);
  } else {
    write_plan_csv(std::cout, plan);
  }
  std::cerr << "sweeps: " << plan.sweep_count
            << ", duration: " << csv::format_g9(plan_duration(plan)) << " s\n";
  return 0;
}

inline int cmd_metrics(const std::string& log_path, const std::string& ref_path,
                       double t0, double t1) {
  const csv::Table log = csv::read_table_file(log_path);
  const int ct = log.column("t");
  const int cpx = log.column("px");
  const int cpy = log.column("py");
  const int cpz = log.column("pz");
  if (ct < 0 || cpx < 0 || cpy < 0 || cpz < 0) {
    throw ConfigError(log_path + ": needs t,px,py,pz columns");
  }

  std::vector<TimedError> errors;
  errors.reserve(log.rows.size());
  if (!ref_path.empty()) {
    const auto ref = csv::load_plan_file(ref_path);
    if (ref.empty()) throw ConfigError(ref_path + ": empty reference");
    auto ref_at = [&](double t) -> Eigen::Vector3d {
      if (t <= ref.front().t) {
        return {ref.front().x, ref.front().y, ref.front().z};
      }
      if (t >= ref.back().t) {
        return {ref.back().x, ref.back().y, ref.back().z};
      }
      const auto it = std::lower_bound(
          ref.begin(), ref.end(), t,
          [](const csv::PlanRow& r, double tt) { return r.t < tt; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double f = (t - lo.t) / (hi.t - lo.t);
      return {lo.x + f * (hi.x - lo.x), lo.y + f * (hi.y - lo.y),
              lo.z + f * (hi.z - lo.z)};
    };
    for (const auto& r : log.rows) {
      const Eigen::Vector3d p(r[cpx], r[cpy], r[cpz]);
      errors.push_back({r[ct], p - ref_at(r[ct])});
    }
  } else {
    const int csx = log.column("sp_x");
    const int csy = log.column("sp_y");
    const int csz = log.column("sp_z");
    if (csx < 0 || csy < 0 || csz < 0) {
      throw ConfigError(log_path +
                        ": needs sp_x,sp_y,sp_z columns (or pass --ref)");
    }
    for (const auto& r : log.rows) {
      errors.push_back(
          {r[ct], Eigen::Vector3d(r[cpx] - r[csx], r[cpy] - r[csy],
                                  r[cpz] - r[csz])});
    }
  }

  if (errors.empty()) throw EmptyWindow(log_path + ": no data rows");
  const double lo = t0 >= 0.0 ? t0 : errors.front().t;
  const double hi = t1 >= 0.0 ? t1 : errors.back().t;
  const RunMetrics m = compute_rmse(errors, lo, hi);
  std::cout << m.to_json().dump(2) << std::endl;
  return 0;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Quadrotor close-proximity panel-coating simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "Run a scenario JSON file");
  std::string scenario_path, out_dir;
  std::int64_t seed = -1;
  sim->add_option("scenario", scenario_path, "Scenario JSON path")->required();
  sim->add_option("--out", out_dir, "Directory for log CSV + metrics JSON");
  sim->add_option("--seed", seed, "Override the scenario seed");

  auto* fit = app.add_subcommand("fit-rho",
                                 "Least-squares ground-effect coefficient "
                                 "from hover samples CSV");
  std::string hover_path;
  double radius = 0.10, gravity = 9.81;
  fit->add_option("hover_csv", hover_path, "CSV with h_m,thrust_in_N,mass_kg")
      ->required();
  fit->add_option("--radius", radius, "Rotor radius [m]");
  fit->add_option("--g", gravity, "Gravity [m/s^2]");

  auto* plan = app.add_subcommand("plan", "Generate a coverage plan CSV");
  std::string corners_path, plan_out;
  CoverageParams cp;
  plan->add_option("corners_json", corners_path, "JSON with 4 panel corners")
      ->required();
  plan->add_option("--spacing", cp.sweep_spacing, "Inter-sweep distance [m]");
  plan->add_option("--speed", cp.speed, "Sweep speed [m/s]");
  plan->add_option("--standoff", cp.standoff, "Height above panel [m]");
  plan->add_option("--margin", cp.margin, "Inset from panel edges [m]");
  plan->add_option("--turn-time", cp.turn_time, "Turn duration [s]");
  plan->add_option("--out", plan_out, "Output CSV path (default stdout)");

  auto* met = app.add_subcommand("metrics", "RMSE metrics from a log CSV");
  std::string log_path, ref_path;
  double t0 = -1.0, t1 = -1.0;
  met->add_option("log_csv", log_path, "Simulation log CSV")->required();
  met->add_option("--ref", ref_path, "Reference plan CSV (default: embedded setpoints)");
  met->add_option("--t0", t0, "Window start [s]");
  met->add_option("--t1", t1, "Window end [s]");

  try {
    app.parse(argc, argv);
    if (sim->parsed()) return cli_detail::cmd_simulate(scenario_path, out_dir, seed);
    if (fit->parsed()) return cli_detail::cmd_fit_rho(hover_path, radius, gravity);
    if (plan->parsed()) return cli_detail::cmd_plan(corners_path, cp, plan_out);
    if (met->parsed()) return cli_detail::cmd_metrics(log_path, ref_path, t0, t1);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const NumericalDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pvcoat
