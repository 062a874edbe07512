#pragma once

// CSV trace schema shared by the simulator and the offline commands.
//
//   # tetherfly-trace 1.0 seed=42 config_hash=...   <- versioned metadata
//   t,x,y,z,...                                     <- column names
//   0,0.6,0,1,...                                   <- one row per tick
//
// Readers reject files whose major version differs from kSchemaMajor.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tetherfly::trace {

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;
inline constexpr std::string_view kMagic = "tetherfly-trace";

inline constexpr std::array<std::string_view, 23> kColumns = {
    "t",        "x",        "y",        "z",        "tx_true", "ty_true",
    "tz_true",  "tx_obs",   "ty_obs",   "tz_obs",   "tx_est",  "ty_est",
    "tz_est",   "r_est",    "z_est",    "beta_est", "x_est",   "y_est",
    "goal_x",   "goal_y",   "goal_z",   "following", "motors_on"};

struct TraceRow {
  double t = 0.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double tx_true = 0.0, ty_true = 0.0, tz_true = 0.0;
  double tx_obs = 0.0, ty_obs = 0.0, tz_obs = 0.0;
  double tx_est = 0.0, ty_est = 0.0, tz_est = 0.0;
  double r_est = 0.0, z_est = 0.0, beta_est = 0.0, x_est = 0.0, y_est = 0.0;
  double goal_x = 0.0, goal_y = 0.0, goal_z = 0.0;
  bool following = false;
  bool motors_on = true;

  std::array<double, kColumns.size()> values() const;
  static TraceRow from_values(const std::array<double, kColumns.size()>& v);
};

struct Metadata {
  int major = kSchemaMajor;
  int minor = kSchemaMinor;
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(std::string_view key) const;
};

// Generic column table used by the offline commands; unknown columns are
// carried through untouched.
struct Table {
  Metadata meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  // Index of `name`, or -1.
  int column(std::string_view name) const;
  // Index of `name`; throws Error(Schema) naming the column when missing.
  std::size_t require(std::string_view name) const;
  // Replaces the column if present, appends it otherwise.
  void set_column(std::string_view name, const std::vector<double>& values);
};

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

Table read_table(std::istream& in);
void write_table(std::ostream& out, const Table& table);

Table to_table(const std::vector<TraceRow>& rows, Metadata meta = {});
// Requires every schema column.
std::vector<TraceRow> from_table(const Table& table);

// Streams rows as they are produced so a partial trace survives an abort.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, const Metadata& meta);
  void write(const TraceRow& row);
  void flush();

 private:
  std::ostream& out_;
};

std::string metadata_line(const Metadata& meta);

}  // namespace tetherfly::trace
