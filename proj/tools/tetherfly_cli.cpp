// tetherfly: catenary solving, offline filtering/localization of traces and
// scenario simulation.

#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tetherfly/commands.hpp"

namespace cmd = tetherfly::commands;

int main(int argc, char** argv) {
  CLI::App app{"Tethered quadcopter tension and position tools"};
  app.require_subcommand(1);

  cmd::SolveArgs solve;
  auto* s = app.add_subcommand("solve", "Catenary through two points for a given tether length");
  s->add_option("x1", solve.p1.x, "origin abscissa (m)")->required();
  s->add_option("y1", solve.p1.y, "origin ordinate (m)")->required();
  s->add_option("x2", solve.p2.x, "vehicle abscissa (m)")->required();
  s->add_option("y2", solve.p2.y, "vehicle ordinate (m)")->required();
  s->add_option("s_total", solve.s_total, "tether length (m)")->required();
  s->add_option("--tol", solve.tol, "residual tolerance (m)")->capture_default_str();
  s->add_option("--omega", solve.tether.omega, "weight per unit length (N/m)")
      ->capture_default_str();

  cmd::FilterArgs filter;
  std::string model = "constant";
  std::optional<double> q, r, a, b;
  auto* f = app.add_subcommand("filter", "Kalman-filter the observed tension columns of a trace");
  f->add_option("input", filter.input, "input trace")->required();
  f->add_option("output", filter.output, "output trace")->required();
  f->add_option("--model", model, "constant | derivative")
      ->check(CLI::IsMember({"constant", "derivative"}))
      ->capture_default_str();
  f->add_option("--q", q, "process noise variance (N^2)");
  f->add_option("--r", r, "measurement noise variance (N^2)");
  f->add_option("--a", a, "derivative model first-difference weight");
  f->add_option("--b", b, "derivative model second-difference weight");

  cmd::LocateArgs locate;
  std::optional<double> beta_deg;
  auto* l = app.add_subcommand("locate", "Estimate position from the filtered tension columns");
  l->add_option("input", locate.input, "input trace")->required();
  l->add_option("output", locate.output, "output trace")->required();
  l->add_option("--omega", locate.tether.omega, "weight per unit length (N/m)")
      ->capture_default_str();
  l->add_option("--length", locate.tether.s_total, "tether length (m)")->capture_default_str();
  l->add_option("--anchor-r", locate.anchor.r_i, "anchor radial coordinate (m)")
      ->capture_default_str();
  l->add_option("--anchor-z", locate.anchor.z_i, "anchor height (m)")->capture_default_str();
  l->add_option("--beta-deg", beta_deg, "fixed azimuth instead of the tension direction (deg)");

  cmd::SimArgs sim;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  auto* m = app.add_subcommand(
      "sim", std::string("Run a scenario; the trace defaults to $") + cmd::kOutputDirEnv +
                 "/<scenario>.csv");
  m->add_option("config", sim.config, "scenario YAML file")->required();
  m->add_option("output", out_path, "trace output path");
  m->add_option("--seed", seed, "override the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cmd::kExitUsage;
  }

  if (s->parsed()) return cmd::cmd_solve(solve, std::cout, std::cerr);
  if (f->parsed()) {
    filter.config = model == "derivative" ? tetherfly::tension::KalmanConfig::derivative_model()
                                          : tetherfly::tension::KalmanConfig::constant_model();
    if (q) filter.config.q_var = *q;
    if (r) filter.config.r_var = *r;
    if (a) filter.config.deriv_a = *a;
    if (b) filter.config.deriv_b = *b;
    return cmd::cmd_filter(filter, std::cout, std::cerr);
  }
  if (l->parsed()) {
    if (beta_deg) locate.beta_override = *beta_deg * std::numbers::pi / 180.0;
    return cmd::cmd_locate(locate, std::cout, std::cerr);
  }
  sim.output = out_path;
  sim.seed = seed;
  return cmd::cmd_sim(sim, std::cout, std::cerr);
}
