#pragma once

// Small CSV helpers shared by the harness and CLI: 9-significant-digit
// float formatting (log reproducibility), hover-sample / point-cloud /
// plan readers.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pvcoat/errors.hpp"
#include "pvcoat/ground_effect.hpp"
#include "pvcoat/panel_geometry.hpp"

namespace pvcoat::csv {

inline std::string format_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number '" + s + "' in " + context);
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

inline Table read_table(std::istream& in, const std::string& context) {
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(context + ": empty file");
  for (auto& h : split_line(line)) table.header.push_back(trim(h));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != table.header.size()) {
      throw ConfigError(context + ": row width does not match header");
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(trim(c), context));
    table.rows.push_back(std::move(row));
  }
  return table;
}

inline Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_table(in, path);
}

// Hover samples for rho identification; header is required.
inline std::vector<HoverSample> load_hover_samples(std::istream& in,
                                                   const std::string& context) {
  const Table t = read_table(in, context);
  const int ch = t.column("h_m");
  const int ct = t.column("thrust_in_N");
  const int cm = t.column("mass_kg");
  if (ch < 0 || ct < 0 || cm < 0) {
    throw ConfigError(context +
                      ": header must contain h_m,thrust_in_N,mass_kg");
  }
  std::vector<HoverSample> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    out.push_back({r[ch], r[ct], r[cm]});
  }
  return out;
}

inline std::vector<HoverSample> load_hover_samples_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return load_hover_samples(in, path);
}

inline PointCloud load_point_cloud(std::istream& in, const std::string& context) {
  const Table t = read_table(in, context);
  const int cx = t.column("x");
  const int cy = t.column("y");
  const int cz = t.column("z");
  if (cx < 0 || cy < 0 || cz < 0) {
    throw ConfigError(context + ": header must contain x,y,z");
  }
  PointCloud cloud;
  cloud.points.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    cloud.points.emplace_back(r[cx], r[cy], r[cz]);
  }
  return cloud;
}

inline PointCloud load_point_cloud_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return load_point_cloud(in, path);
}

struct PlanRow {
  double t, x, y, z, yaw;
  int valve;
};

inline std::vector<PlanRow> load_plan(std::istream& in, const std::string& context) {
  const Table t = read_table(in, context);
  const int ct = t.column("t");
  const int cx = t.column("x");
  const int cy = t.column("y");
  const int cz = t.column("z");
  const int cyaw = t.column("yaw");
  const int cv = t.column("valve");
  if (ct < 0 || cx < 0 || cy < 0 || cz < 0 || cyaw < 0 || cv < 0) {
    throw ConfigError(context + ": header must contain t,x,y,z,yaw,valve");
  }
  std::vector<PlanRow> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    out.push_back({r[ct], r[cx], r[cy], r[cz], r[cyaw],
                   static_cast<int>(r[cv] != 0.0)});
  }
  return out;
}

inline std::vector<PlanRow> load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return load_plan(in, path);
}

}  // namespace pvcoat::csv
