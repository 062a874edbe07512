#include "tetherfly/trace.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "tetherfly/error.hpp"

namespace tetherfly::trace {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_double(std::string_view text, std::size_t line_no,
                    std::string_view column) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Schema, "line " + std::to_string(line_no) +
                                       ": column '" + std::string(column) +
                                       "' is not a number: '" +
                                       std::string(text) + "'");
  }
  return v;
}

Metadata parse_metadata(std::string_view line) {
  // "# tetherfly-trace M.m key=value ..."
  Metadata meta;
  std::istringstream in{std::string(line.substr(1))};
  std::string magic, version;
  in >> magic >> version;
  const auto dot = version.find('.');
  try {
    meta.major = std::stoi(version.substr(0, dot));
    meta.minor = dot == std::string::npos ? 0 : std::stoi(version.substr(dot + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Schema, "malformed trace version '" + version + "'");
  }
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) continue;
    meta.entries.emplace_back(token.substr(0, eq), token.substr(eq + 1));
  }
  return meta;
}

}  // namespace

std::array<double, kColumns.size()> TraceRow::values() const {
  return {t,      x,      y,       z,       tx_true, ty_true, tz_true, tx_obs,
          ty_obs, tz_obs, tx_est,  ty_est,  tz_est,  r_est,   z_est,   beta_est,
          x_est,  y_est,  goal_x,  goal_y,  goal_z,  following ? 1.0 : 0.0,
          motors_on ? 1.0 : 0.0};
}

TraceRow TraceRow::from_values(const std::array<double, kColumns.size()>& v) {
  TraceRow r;
  r.t = v[0];
  r.x = v[1], r.y = v[2], r.z = v[3];
  r.tx_true = v[4], r.ty_true = v[5], r.tz_true = v[6];
  r.tx_obs = v[7], r.ty_obs = v[8], r.tz_obs = v[9];
  r.tx_est = v[10], r.ty_est = v[11], r.tz_est = v[12];
  r.r_est = v[13], r.z_est = v[14], r.beta_est = v[15];
  r.x_est = v[16], r.y_est = v[17];
  r.goal_x = v[18], r.goal_y = v[19], r.goal_z = v[20];
  r.following = v[21] != 0.0;
  r.motors_on = v[22] != 0.0;
  return r;
}

const std::string* Metadata::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return &v;
  }
  return nullptr;
}

int Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::size_t Table::require(std::string_view name) const {
  const int idx = column(name);
  if (idx < 0) {
    throw Error(ErrorCode::Schema,
                "missing column '" + std::string(name) + "'");
  }
  return static_cast<std::size_t>(idx);
}

void Table::set_column(std::string_view name, const std::vector<double>& values) {
  if (values.size() != rows.size()) {
    throw Error(ErrorCode::InvalidInput, "column length does not match rows");
  }
  int idx = column(name);
  if (idx < 0) {
    columns.emplace_back(name);
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].push_back(values[i]);
    return;
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i][idx] = values[i];
}

std::string format_double(double v) {
  if (v == 0.0) return "0";  // also folds -0
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string metadata_line(const Metadata& meta) {
  std::string line = "# " + std::string(kMagic) + " " +
                     std::to_string(meta.major) + "." +
                     std::to_string(meta.minor);
  for (const auto& [k, v] : meta.entries) line += " " + k + "=" + v;
  return line;
}

Table read_table(std::istream& in) {
  Table table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      const std::string_view body = trim(view.substr(1));
      if (body.substr(0, kMagic.size()) == kMagic) {
        table.meta = parse_metadata(view);
        if (table.meta.major != kSchemaMajor) {
          throw Error(ErrorCode::Schema,
                      "unsupported trace schema major version " +
                          std::to_string(table.meta.major));
        }
      }
      continue;
    }
    const auto fields = split(view, ',');
    if (!have_header) {
      for (auto f : fields) table.columns.emplace_back(trim(f));
      have_header = true;
      continue;
    }
    if (fields.size() != table.columns.size()) {
      throw Error(ErrorCode::Schema,
                  "line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields, got " +
                      std::to_string(fields.size()));
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      row[i] = parse_double(fields[i], line_no, table.columns[i]);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw Error(ErrorCode::Schema, "empty input");
  return table;
}

void write_table(std::ostream& out, const Table& table) {
  out << metadata_line(table.meta) << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "," : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << format_double(row[i]);
    }
    out << '\n';
  }
}

Table to_table(const std::vector<TraceRow>& rows, Metadata meta) {
  Table table;
  table.meta = std::move(meta);
  table.columns.assign(kColumns.begin(), kColumns.end());
  table.rows.reserve(rows.size());
  for (const auto& r : rows) {
    const auto v = r.values();
    table.rows.emplace_back(v.begin(), v.end());
  }
  return table;
}

std::vector<TraceRow> from_table(const Table& table) {
  std::array<std::size_t, kColumns.size()> idx{};
  for (std::size_t i = 0; i < kColumns.size(); ++i) idx[i] = table.require(kColumns[i]);
  std::vector<TraceRow> rows;
  rows.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    std::array<double, kColumns.size()> v{};
    for (std::size_t i = 0; i < kColumns.size(); ++i) v[i] = row[idx[i]];
    rows.push_back(TraceRow::from_values(v));
  }
  return rows;
}

TraceWriter::TraceWriter(std::ostream& out, const Metadata& meta) : out_(out) {
  out_ << metadata_line(meta) << '\n';
  for (std::size_t i = 0; i < kColumns.size(); ++i) {
    out_ << (i ? "," : "") << kColumns[i];
  }
  out_ << '\n';
}

void TraceWriter::write(const TraceRow& row) {
  const auto v = row.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    out_ << (i ? "," : "") << format_double(v[i]);
  }
  out_ << '\n';
}

void TraceWriter::flush() { out_.flush(); }

}  // namespace tetherfly::trace
