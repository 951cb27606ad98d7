#pragma once

// Plain-text artifact formats: numbers, matrix and curve CSV, TUM
// trajectories.

#include <Eigen/Geometry>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/evaluation.hpp"
#include "ervs/resistance.hpp"
#include "ervs/resistance_matrix.hpp"

namespace ervs {

inline constexpr const char* kToolVersion = "0.1.0";

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Parses the whole token as a double (accepts `inf`/`nan`).
inline double parse_double(std::string_view token, const std::string& where) {
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) {
    token.remove_prefix(1);
  }
  while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) {
    token.remove_suffix(1);
  }
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || end != token.data() + token.size()) {
    throw Error(Errc::parse_error, where + ": not a number: '" + std::string(token) + "'");
  }
  return value;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(Errc::io_error, "write failed for '" + path + "'");
}

namespace detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// CSV

/// n header-less rows of n comma-separated values.
inline std::string write_matrix_csv(const ResistanceMatrix& e) {
  std::string out;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (j) out += ',';
      out += format_double(e(i, j));
    }
    out += '\n';
  }
  return out;
}

inline ResistanceMatrix read_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    if (detail::blank(lines[ln])) continue;
    std::vector<double> row;
    std::string_view rest = lines[ln];
    const std::string where = "line " + std::to_string(ln + 1);
    while (true) {
      const auto comma = rest.find(',');
      row.push_back(parse_double(rest.substr(0, comma), where));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    rows.push_back(std::move(row));
  }
  return ResistanceMatrix::from_rows(rows);
}

inline std::string write_curve_csv(const std::vector<CurveSample>& curve) {
  std::string out = "t,delta_d\n";
  for (const auto& s : curve) out += format_double(s.t) + ',' + format_double(s.delta_d) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// TUM trajectories: `timestamp tx ty tz qx qy qz qw` per line.

struct TumPose {
  double timestamp = 0.0;
  Point3 position = Point3::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

inline std::vector<TumPose> parse_tum_trajectory(const std::string& text) {
  std::vector<TumPose> poses;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string& line = lines[ln];
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    const std::string where = "line " + std::to_string(ln + 1);
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string tok; fields >> tok;) tokens.push_back(tok);
    if (tokens.size() != 8) {
      throw Error(Errc::parse_error, where + ": expected 8 fields, got " +
                                         std::to_string(tokens.size()));
    }
    double v[8];
    for (int i = 0; i < 8; ++i) {
      v[i] = parse_double(tokens[i], where);
      if (!std::isfinite(v[i])) throw Error(Errc::parse_error, where + ": non-finite field");
    }

    TumPose pose;
    pose.timestamp = v[0];
    pose.position = Point3(v[1], v[2], v[3]);
    pose.orientation = Eigen::Quaterniond(v[7], v[4], v[5], v[6]);
    const double norm = pose.orientation.norm();
    if (std::abs(norm - 1.0) > 1e-3) {
      throw Error(Errc::format_error, where + ": quaternion norm " + format_double(norm));
    }
    pose.orientation.normalize();
    if (!poses.empty() && !(pose.timestamp > poses.back().timestamp)) {
      throw Error(Errc::format_error, where + ": timestamps not strictly increasing");
    }
    poses.push_back(pose);
  }
  return poses;
}

inline std::string write_tum_trajectory(const std::vector<TumPose>& poses) {
  std::string out = "# timestamp tx ty tz qx qy qz qw\n";
  for (const auto& p : poses) {
    const auto& q = p.orientation;
    const double v[8] = {p.timestamp, p.position.x(), p.position.y(), p.position.z(),
                         q.x(),       q.y(),          q.z(),          q.w()};
    for (int i = 0; i < 8; ++i) {
      if (i) out += ' ';
      out += format_double(v[i]);
    }
    out += '\n';
  }
  return out;
}

/// Pairs each estimated pose with the nearest unused ground-truth timestamp
/// within max_gap seconds. Unmatched poses are dropped.
inline std::pair<Trajectory, Trajectory> associate_by_timestamp(const std::vector<TumPose>& est,
                                                                const std::vector<TumPose>& gt,
                                                                double max_gap = 0.02) {
  if (!(max_gap >= 0.0)) throw Error(Errc::invalid_argument, "max_gap must be >= 0");
  std::vector<bool> used(gt.size(), false);
  Trajectory a, b;
  for (const auto& p : est) {
    const auto it = std::lower_bound(gt.begin(), gt.end(), p.timestamp,
                                     [](const TumPose& g, double t) { return g.timestamp < t; });
    const auto hi = static_cast<std::ptrdiff_t>(it - gt.begin());
    std::ptrdiff_t best = -1;
    double best_gap = max_gap;
    for (std::ptrdiff_t idx : {hi - 1, hi}) {
      if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(gt.size())) continue;
      const double gap = std::abs(gt[idx].timestamp - p.timestamp);
      if (!used[idx] && gap <= best_gap) {
        best = idx;
        best_gap = gap;
      }
    }
    if (best < 0) continue;
    used[best] = true;
    a.push_back(p.position);
    b.push_back(gt[best].position);
  }
  return {a, b};
}

/// Index-wise pairing; both trajectories must have the same length.
inline std::pair<Trajectory, Trajectory> associate_by_index(const std::vector<TumPose>& est,
                                                            const std::vector<TumPose>& gt) {
  if (est.size() != gt.size()) {
    throw Error(Errc::length_mismatch, "trajectories have " + std::to_string(est.size()) +
                                           " and " + std::to_string(gt.size()) + " poses");
  }
  Trajectory a, b;
  for (std::size_t i = 0; i < est.size(); ++i) {
    a.push_back(est[i].position);
    b.push_back(gt[i].position);
  }
  return {a, b};
}

}  // namespace ervs
