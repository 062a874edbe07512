#pragma once

// Command implementations behind the tetherfly CLI. Each returns the process
// exit code (0 ok, 1 domain error) and writes to the given streams, so they
// can be driven from tests without spawning a process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "tetherfly/catenary.hpp"
#include "tetherfly/kalman.hpp"
#include "tetherfly/localization.hpp"

namespace tetherfly::commands {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kOutputDirEnv = "TETHERFLY_OUTPUT_DIR";

struct SolveArgs {
  catenary::Point2 p1;
  catenary::Point2 p2;
  double s_total = 0.0;
  double tol = 1e-9;
  catenary::TetherProperties tether;  // only omega is used
};

struct FilterArgs {
  std::string input;
  std::string output;
  tension::KalmanConfig config;
};

struct LocateArgs {
  std::string input;
  std::string output;
  catenary::TetherProperties tether;
  localization::AnchorPose anchor;
  std::optional<double> beta_override;  // rad
};

struct SimArgs {
  std::string config;
  std::optional<std::string> output;  // file; default <dir>/<scenario>.csv
  std::optional<std::uint64_t> seed;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_filter(const FilterArgs& args, std::ostream& out, std::ostream& err);
int cmd_locate(const LocateArgs& args, std::ostream& out, std::ostream& err);
int cmd_sim(const SimArgs& args, std::ostream& out, std::ostream& err);

}  // namespace tetherfly::commands
