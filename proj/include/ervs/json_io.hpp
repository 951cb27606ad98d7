#pragma once

// JSON schemas for scene configs, scenes, observations, selections and
// strategy/sweep reports. Non-finite numbers are written as the strings
// "inf", "-inf" and "nan".

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/io.hpp"
#include "ervs/scene.hpp"
#include "ervs/strategies.hpp"
#include "ervs/view_selection.hpp"

namespace ervs {

using Json = nlohmann::json;

namespace detail {

inline Json num(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

inline double num_of(const Json& j, const std::string& where) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_double(j.get<std::string>(), where);
  throw Error(Errc::format_error, where + ": expected a number");
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw Error(Errc::format_error, where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw Error(Errc::format_error, where + ": missing '" + key + "'");
  return *it;
}

inline std::size_t count_of(const Json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    throw Error(Errc::format_error, where + ": expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

inline std::string str_of(const Json& j, const std::string& where) {
  if (!j.is_string()) throw Error(Errc::format_error, where + ": expected a string");
  return j.get<std::string>();
}

inline const Json& array_of(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error(Errc::format_error, where + ": expected an array");
  return j;
}

inline Json vec_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

inline Vec3 vec3_of(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) throw Error(Errc::format_error, where + ": expected 3 numbers");
  return {num_of(j[0], where), num_of(j[1], where), num_of(j[2], where)};
}

inline Json index_lists(const std::vector<std::vector<std::size_t>>& lists) {
  Json a = Json::array();
  for (const auto& l : lists) a.push_back(l);
  return a;
}

inline std::vector<std::vector<std::size_t>> index_lists_of(const Json& j, const std::string& where) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& l : array_of(j, where)) {
    std::vector<std::size_t> row;
    for (const auto& x : array_of(l, where)) row.push_back(count_of(x, where));
    out.push_back(std::move(row));
  }
  return out;
}

inline Json pair_list(const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Json a = Json::array();
  for (const auto& [x, y] : pairs) a.push_back({x, y});
  return a;
}

template <class Enum, std::size_t N>
Enum enum_of(const Json& j, const std::pair<const char*, Enum> (&names)[N], const std::string& where) {
  const std::string s = str_of(j, where);
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  throw Error(Errc::format_error, where + ": unknown value '" + s + "'");
}

template <class Enum, std::size_t N>
const char* enum_name(Enum e, const std::pair<const char*, Enum> (&names)[N]) {
  for (const auto& [name, value] : names) {
    if (e == value) return name;
  }
  return "unknown";
}

inline constexpr std::pair<const char*, Layout> kLayouts[] = {
    {"ring", Layout::ring}, {"arc", Layout::arc}, {"line", Layout::line}};
inline constexpr std::pair<const char*, LookAt> kLookAts[] = {
    {"centroid", LookAt::centroid}, {"fixed_dir", LookAt::fixed_dir}};
inline constexpr std::pair<const char*, VisibilityRule> kVisibilityRules[] = {
    {"all", VisibilityRule::all}, {"frustum", VisibilityRule::frustum}};
inline constexpr std::pair<const char*, NoiseMode> kNoiseModes[] = {
    {"isotropic_gaussian", NoiseMode::isotropic_gaussian},
    {"epipolar_1px", NoiseMode::epipolar_1px}};

}  // namespace detail

inline const char* to_string(Layout l) { return detail::enum_name(l, detail::kLayouts); }
inline const char* to_string(LookAt l) { return detail::enum_name(l, detail::kLookAts); }
inline const char* to_string(VisibilityRule v) {
  return detail::enum_name(v, detail::kVisibilityRules);
}
inline const char* to_string(NoiseMode m) { return detail::enum_name(m, detail::kNoiseModes); }

inline NoiseMode noise_mode_from_string(const std::string& s) {
  return detail::enum_of(Json(s), detail::kNoiseModes, "noise mode");
}
inline Layout layout_from_string(const std::string& s) {
  return detail::enum_of(Json(s), detail::kLayouts, "layout");
}

/// Parses JSON text, mapping syntax errors to parse_error.
inline Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::parse_error, what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// SceneConfig

inline Json to_json(const SceneConfig& c) {
  return {
      {"layout", to_string(c.layout)},
      {"n_views", c.n_views},
      {"radius", c.radius},
      {"spacing", c.spacing},
      {"arc_step", c.arc_step},
      {"n_points", c.n_points},
      {"point_region", {{"min", detail::vec_json(c.point_region.min)},
                        {"max", detail::vec_json(c.point_region.max)}}},
      {"focal_px", c.focal_px},
      {"image_size", {c.image_size[0], c.image_size[1]}},
      {"look_at", to_string(c.look_at)},
      {"fixed_dir", detail::vec_json(c.fixed_dir.vec())},
      {"visibility_rule", to_string(c.visibility_rule)},
      {"seed", c.seed},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SceneConfig scene_config_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw Error(Errc::format_error, "scene config: expected an object");
  SceneConfig c;
  for (const auto& [key, v] : j.items()) {
    const std::string where = "scene config '" + key + "'";
    if (key == "layout") c.layout = enum_of(v, kLayouts, where);
    else if (key == "n_views") c.n_views = count_of(v, where);
    else if (key == "radius") c.radius = num_of(v, where);
    else if (key == "spacing") c.spacing = num_of(v, where);
    else if (key == "arc_step") c.arc_step = num_of(v, where);
    else if (key == "n_points") c.n_points = count_of(v, where);
    else if (key == "point_region") {
      c.point_region.min = vec3_of(field(v, "min", where), where);
      c.point_region.max = vec3_of(field(v, "max", where), where);
    } else if (key == "focal_px") c.focal_px = num_of(v, where);
    else if (key == "image_size") {
      if (!v.is_array() || v.size() != 2) throw Error(Errc::format_error, where + ": expected 2 counts");
      c.image_size = {static_cast<int>(count_of(v[0], where)), static_cast<int>(count_of(v[1], where))};
    } else if (key == "look_at") c.look_at = enum_of(v, kLookAts, where);
    else if (key == "fixed_dir") c.fixed_dir = UnitVec3::normalized(vec3_of(v, where));
    else if (key == "visibility_rule") c.visibility_rule = enum_of(v, kVisibilityRules, where);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(count_of(v, where));
    else throw Error(Errc::format_error, "scene config: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

/// 64-bit FNV-1a of the canonical (key-sorted, compact) JSON text, as hex.
inline std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json meta_json(std::uint64_t seed, const Json& config) {
  return {{"tool_version", kToolVersion}, {"seed", seed}, {"config_hash", config_hash(config)}};
}

// ---------------------------------------------------------------------------
// Observations and scenes

inline Json to_json(const std::vector<Observation>& obs) {
  Json a = Json::array();
  for (const auto& o : obs) {
    a.push_back({{"view", o.view}, {"point", o.point}, {"pixel", detail::vec_json(o.pixel)}});
  }
  return a;
}

inline std::vector<Observation> observations_from_json(const Json& j) {
  using namespace detail;
  std::vector<Observation> out;
  for (const auto& o : array_of(j, "observations")) {
    const std::string where = "observation " + std::to_string(out.size());
    const Json& px = field(o, "pixel", where);
    if (!px.is_array() || px.size() != 2) throw Error(Errc::format_error, where + ": expected 2 numbers");
    out.push_back({count_of(field(o, "view", where), where), count_of(field(o, "point", where), where),
                   Pixel(num_of(px[0], where), num_of(px[1], where))});
  }
  return out;
}

inline Json to_json(const Scene& s) {
  Json cams = Json::array();
  for (const auto& c : s.cameras) {
    Json rot = Json::array();
    for (int r = 0; r < 3; ++r) rot.push_back(detail::vec_json(c.rotation.row(r).transpose()));
    cams.push_back({{"id", c.view.id},
                    {"center", detail::vec_json(c.view.center)},
                    {"axis", detail::vec_json(c.view.axis.vec())},
                    {"rotation", rot},
                    {"focal_px", c.view.focal_px},
                    {"image_size", {c.image_size[0], c.image_size[1]}}});
  }
  Json pts = Json::array();
  for (const auto& p : s.points) pts.push_back(detail::vec_json(p));
  return {{"cameras", cams},
          {"points", pts},
          {"visibility", detail::index_lists(s.visibility.views_of_point)},
          {"observations", to_json(s.observations)}};
}

/// Rebuilds intrinsics and projection matrices from the stored pose.
inline Scene scene_from_json(const Json& j) {
  using namespace detail;
  Scene s;
  for (const auto& c : array_of(field(j, "cameras", "scene"), "cameras")) {
    const std::string where = "camera " + std::to_string(s.cameras.size());
    const std::size_t id = count_of(field(c, "id", where), where);
    if (id != s.cameras.size()) throw Error(Errc::format_error, where + ": ids must be 0..n-1 in order");
    const Json& size = field(c, "image_size", where);
    if (!size.is_array() || size.size() != 2) throw Error(Errc::format_error, where + ": bad image_size");
    const Json& rot = field(c, "rotation", where);
    if (!rot.is_array() || rot.size() != 3) throw Error(Errc::format_error, where + ": bad rotation");
    Eigen::Matrix3d R;
    for (int r = 0; r < 3; ++r) R.row(r) = vec3_of(rot[r], where).transpose();
    if ((R * R.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-9 || R.determinant() < 0) {
      throw Error(Errc::format_error, where + ": rotation is not orthonormal");
    }
    const UnitVec3 axis = UnitVec3::normalized(vec3_of(field(c, "axis", where), where));
    if ((axis.vec() - R.row(2).transpose()).norm() > 1e-9) {
      throw Error(Errc::format_error, where + ": axis disagrees with rotation");
    }
    const double f = num_of(field(c, "focal_px", where), where);
    if (!(f > 0.0)) throw Error(Errc::format_error, where + ": focal_px must be positive");
    SceneCamera cam = make_camera(id, vec3_of(field(c, "center", where), where), axis, f,
                                  {static_cast<int>(count_of(size[0], where)),
                                   static_cast<int>(count_of(size[1], where))});
    cam.rotation = R;
    cam.projection.matrix.leftCols<3>() = cam.K * R;
    cam.projection.matrix.col(3) = -cam.K * R * cam.view.center;
    s.cameras.push_back(cam);
  }
  for (const auto& p : array_of(field(j, "points", "scene"), "points")) {
    s.points.push_back(vec3_of(p, "point " + std::to_string(s.points.size())));
  }
  s.visibility.views_of_point = index_lists_of(field(j, "visibility", "scene"), "visibility");
  s.observations = observations_from_json(field(j, "observations", "scene"));

  if (s.visibility.views_of_point.size() != s.points.size()) {
    throw Error(Errc::format_error, "scene: visibility has one entry per point");
  }
  for (const auto& views : s.visibility.views_of_point) {
    for (std::size_t v : views) {
      if (v >= s.cameras.size()) throw Error(Errc::format_error, "scene: visibility view out of range");
    }
  }
  for (const auto& o : s.observations) {
    if (o.view >= s.cameras.size() || o.point >= s.points.size()) {
      throw Error(Errc::format_error, "scene: observation out of range");
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const Selection& sel) {
  const auto& r = sel.report;
  return {{"k", sel.candidates.k},
          {"start_view", r.start_view},
          {"candidates", detail::index_lists(sel.candidates.lists)},
          {"marked", r.marked},
          {"missing_before_completion", r.missing_before_completion},
          {"completion_edges", detail::pair_list(r.completion_edges)},
          {"iterations", r.iterations}};
}

inline Json to_json(const StrategyReport& rep) {
  Json results = Json::array();
  for (const auto& r : rep.results) {
    results.push_back({{"name", r.name},
                       {"pairs", detail::pair_list(r.pairs)},
                       {"pair_count", r.pairs.size()},
                       {"mean_3d_error", detail::num(r.mean_3d_error)},
                       {"avg_reprojection_error", detail::num(r.avg_reprojection_error)},
                       {"triangulated_points", r.triangulated_points},
                       {"total_points", r.total_points},
                       {"wall_time_s", r.wall_time_s}});
  }
  return {{"seed", rep.seed},
          {"noise_px", rep.noise_px},
          {"noise_mode", to_string(rep.noise_mode)},
          {"k", rep.k},
          {"results", results}};
}

inline std::string strategy_report_csv(const StrategyReport& rep) {
  std::string out =
      "strategy,pair_count,mean_3d_error,avg_reprojection_error,triangulated_points,total_points,"
      "wall_time_s\n";
  for (const auto& r : rep.results) {
    out += r.name + ',' + std::to_string(r.pairs.size()) + ',' + format_double(r.mean_3d_error) +
           ',' + format_double(r.avg_reprojection_error) + ',' +
           std::to_string(r.triangulated_points) + ',' + std::to_string(r.total_points) + ',' +
           format_double(r.wall_time_s) + '\n';
  }
  return out;
}

inline Json to_json(const std::vector<SweepRow>& rows) {
  Json a = Json::array();
  for (const auto& r : rows) {
    Json row = {{"k", r.k},
                {"failed", r.failed},
                {"pairs", r.pairs},
                {"mean_3d_error", detail::num(r.mean_3d_error)},
                {"avg_reprojection_error", detail::num(r.avg_reprojection_error)},
                {"wall_time_s", r.wall_time_s}};
    if (r.failed) row["failure"] = r.failure;
    a.push_back(std::move(row));
  }
  return a;
}

/// Failed rows carry `x` in the status column.
inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "k,status,pairs,mean_3d_error,avg_reprojection_error,wall_time_s\n";
  for (const auto& r : rows) {
    out += std::to_string(r.k) + ',' + (r.failed ? "x" : "ok") + ',' + std::to_string(r.pairs) +
           ',' + format_double(r.mean_3d_error) + ',' + format_double(r.avg_reprojection_error) +
           ',' + format_double(r.wall_time_s) + '\n';
  }
  return out;
}

}  // namespace ervs
