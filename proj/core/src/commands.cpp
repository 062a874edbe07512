#include "tetherfly/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "tetherfly/error.hpp"
#include "tetherfly/scenario.hpp"
#include "tetherfly/simkit.hpp"
#include "tetherfly/trace.hpp"

namespace tetherfly::commands {
namespace {

trace::Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  trace::Table t = trace::read_table(in);
  if (t.rows.empty()) throw Error(ErrorCode::InvalidInput, "'" + path + "' has no rows");
  return t;
}

void write_file(const std::string& path, const trace::Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  trace::write_table(out, table);
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return acc / static_cast<double>(v.size() - 1);
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitDomain;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitDomain;
  }
}

}  // namespace

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    catenary::TetherProperties tether = args.tether;
    tether.s_total = args.s_total;
    catenary::SolverSettings settings;
    settings.tol = args.tol;
    const catenary::CatenaryParams p =
        catenary::solve_from_endpoints(args.p1, args.p2, tether, settings);
    const auto o = catenary::end_tensions(p, tether, catenary::End::Origin);
    const auto u = catenary::end_tensions(p, tether, catenary::End::Uav);
    fmt::print(out, "a        {:.12g}\n", p.a);
    fmt::print(out, "x0       {:.12g}\n", p.x0);
    fmt::print(out, "C        {:.12g}\n", p.c);
    fmt::print(out, "s1       {:.12g}\n", p.s1);
    fmt::print(out, "s2       {:.12g}\n", p.s2);
    fmt::print(out, "origin   H {:.12g} Tv {:.12g} |T| {:.12g}\n", o.h, o.tv, o.mag);
    fmt::print(out, "uav      H {:.12g} Tv {:.12g} |T| {:.12g}\n", u.h, u.tv, u.mag);
    fmt::print(out, "residual {:.3e}\n",
               catenary::max_residual(p, args.p1, args.p2, args.s_total));
    return kExitOk;
  });
}

int cmd_filter(const FilterArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!args.config.valid()) {
      throw Error(ErrorCode::InvalidInput, "filter: q, r and p0 must be > 0");
    }
    trace::Table table = read_file(args.input);
    const std::size_t cols[3] = {table.require("tx_obs"), table.require("ty_obs"),
                                 table.require("tz_obs")};

    tension::KalmanState kf = tension::kalman_init(args.config);
    std::vector<double> raw[3], est[3];
    for (const auto& row : table.rows) {
      const tension::TensionVec y{row[cols[0]], row[cols[1]], row[cols[2]]};
      kf = tension::kalman_step(kf, args.config, y);
      const tension::TensionVec e = tension::estimate(kf);
      const double ev[3] = {e.tx, e.ty, e.tz};
      for (int i = 0; i < 3; ++i) {
        raw[i].push_back(row[cols[i]]);
        est[i].push_back(ev[i]);
      }
    }
    table.set_column("tx_est", est[0]);
    table.set_column("ty_est", est[1]);
    table.set_column("tz_est", est[2]);
    write_file(args.output, table);

    const char* axes[3] = {"tx", "ty", "tz"};
    const char* model =
        args.config.model == tension::KalmanModel::Constant ? "constant" : "derivative";
    fmt::print(out, "model {}  rows {}\n", model, table.rows.size());
    for (int i = 0; i < 3; ++i) {
      fmt::print(out, "{}  raw variance {:.6e}  filtered variance {:.6e}\n", axes[i],
                 variance(raw[i]), variance(est[i]));
    }
    return kExitOk;
  });
}

int cmd_locate(const LocateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!args.tether.valid()) {
      throw Error(ErrorCode::InvalidInput, "locate: omega and length must be > 0");
    }
    trace::Table table = read_file(args.input);
    const std::size_t cols[3] = {table.require("tx_est"), table.require("ty_est"),
                                 table.require("tz_est")};
    std::vector<double> r, z, beta, x, y;
    int clamped = 0;
    for (const auto& row : table.rows) {
      const tension::TensionVec t{row[cols[0]], row[cols[1]], row[cols[2]]};
      const auto loc = localization::locate_from_tension(t, args.tether, args.anchor,
                                                         args.beta_override);
      if (loc.clamped) ++clamped;
      const auto p = localization::polar_to_cartesian(loc.position);
      r.push_back(loc.position.r);
      z.push_back(loc.position.z);
      beta.push_back(loc.position.beta);
      x.push_back(p.x());
      y.push_back(p.y());
    }
    table.set_column("r_est", r);
    table.set_column("z_est", z);
    table.set_column("beta_est", beta);
    table.set_column("x_est", x);
    table.set_column("y_est", y);
    write_file(args.output, table);
    fmt::print(out, "located {} rows\n", table.rows.size());
    fmt::print(err, "s2 clamped on {} of {} rows\n", clamped, table.rows.size());
    return kExitOk;
  });
}

int cmd_sim(const SimArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream cfg_in(args.config, std::ios::binary);
    if (!cfg_in) {
      throw Error(ErrorCode::InvalidConfig, "cannot open config '" + args.config + "'");
    }
    std::ostringstream buf;
    buf << cfg_in.rdbuf();
    const std::string text = buf.str();
    sim::Scenario sc = scenario::parse_scenario(
        text, std::filesystem::path(args.config).stem().string());
    if (args.seed) sc.noise.seed = *args.seed;

    std::filesystem::path path;
    if (args.output) {
      path = *args.output;
    } else {
      const char* dir = std::getenv(kOutputDirEnv);
      path = std::filesystem::path(dir && *dir ? dir : ".") / (sc.name + ".csv");
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error(ErrorCode::InvalidInput, "cannot write '" + path.string() + "'");

    trace::Metadata meta;
    std::string tag = sc.name;
    std::replace_if(tag.begin(), tag.end(), [](char c) { return c == ' ' || c == '='; }, '_');
    meta.entries = {{"scenario", tag},
                    {"seed", std::to_string(sc.noise.seed)},
                    {"config_hash", fmt::format("{:016x}", scenario::fnv1a(text))}};
    trace::TraceWriter writer(file, meta);
    const sim::RunResult res =
        sim::run_scenario(sc, [&writer](const trace::TraceRow& row) { writer.write(row); });
    writer.flush();

    double t_err2 = 0.0, p_err2 = 0.0, h_sum = 0.0;
    std::size_t p_count = 0;
    for (const auto& row : res.rows) {
      const double dx = row.tx_est - row.tx_true, dy = row.ty_est - row.ty_true,
                   dz = row.tz_est - row.tz_true;
      t_err2 += dx * dx + dy * dy + dz * dz;
      h_sum += std::hypot(row.tx_est, row.ty_est);
      if (row.t >= 5.0) {
        const double ex = row.x_est - row.x, ey = row.y_est - row.y,
                     ez = row.z_est - row.z;
        p_err2 += ex * ex + ey * ey + ez * ez;
        ++p_count;
      }
    }
    const double n = static_cast<double>(std::max<std::size_t>(res.rows.size(), 1));
    fmt::print(out, "scenario            {}\n", sc.name);
    fmt::print(out, "trace               {}\n", path.string());
    fmt::print(out, "rows                {}\n", res.rows.size());
    fmt::print(out, "tension rms error   {:.6f} N\n", std::sqrt(t_err2 / n));
    if (p_count > 0) {
      fmt::print(out, "position rms error  {:.6f} m (t >= 5 s)\n",
                 std::sqrt(p_err2 / static_cast<double>(p_count)));
    }
    fmt::print(out, "mean horizontal est {:.6f} N\n", h_sum / n);
    fmt::print(out, "clamp events        {}\n", res.clamp_events);
    if (!res.rows.empty()) {
      const auto& last = res.rows.back();
      fmt::print(out, "following           {}\n", last.following);
      fmt::print(out, "motors_off          {}\n", !last.motors_on);
      fmt::print(out, "final altitude      {:.6f} m\n", last.z);
    }
    if (res.aborted) {
      fmt::print(err, "error: {} (partial trace written)\n", res.abort_reason);
      return kExitDomain;
    }
    return kExitOk;
  });
}

}  // namespace tetherfly::commands
