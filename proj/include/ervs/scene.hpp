#pragma once

// Synthetic multi-view scenes with exact and noisy pixel observations.

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/evaluation.hpp"
#include "ervs/geometry.hpp"
#include "ervs/resistance_matrix.hpp"

namespace ervs {

/// mt19937_64 with hand-rolled uniform and normal draws. The standard
/// distributions are implementation-defined; these give the same stream on
/// every platform for a given seed.
class SceneRng {
 public:
  explicit SceneRng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

enum class Layout { ring, arc, line };
enum class LookAt { centroid, fixed_dir };
enum class VisibilityRule { all, frustum };

struct Box {
  Point3 min = Point3(-1.5, -0.5, -1.5);
  Point3 max = Point3(1.5, 0.5, 1.5);

  Point3 center() const { return 0.5 * (min + max); }
};

struct SceneConfig {
  Layout layout = Layout::ring;
  std::size_t n_views = 12;
  /// Ring/arc radius; for the line layout, the distance of the camera line
  /// from the region center.
  double radius = 3.0;
  /// Camera spacing for the line layout.
  double spacing = 0.5;
  /// Angular step between consecutive arc cameras, in radians.
  double arc_step = 0.2;
  std::size_t n_points = 200;
  Box point_region;
  double focal_px = 1600.0;
  std::array<int, 2> image_size{1600, 1200};
  LookAt look_at = LookAt::centroid;
  UnitVec3 fixed_dir{0, 0, 1};
  VisibilityRule visibility_rule = VisibilityRule::frustum;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_views < 2) throw Error(Errc::invalid_argument, "n_views must be >= 2");
    if (n_points < 1) throw Error(Errc::invalid_argument, "n_points must be >= 1");
    if (!(focal_px > 0.0)) throw Error(Errc::invalid_argument, "focal_px must be positive");
    if (image_size[0] <= 0 || image_size[1] <= 0) {
      throw Error(Errc::invalid_argument, "image_size must be positive");
    }
    if (!(radius > 0.0)) throw Error(Errc::invalid_argument, "radius must be positive");
    if (layout == Layout::line && !(spacing > 0.0)) {
      throw Error(Errc::invalid_argument, "spacing must be positive");
    }
    if (layout == Layout::arc && !(arc_step > 0.0)) {
      throw Error(Errc::invalid_argument, "arc_step must be positive");
    }
    const Vec3 extent = point_region.max - point_region.min;
    if ((extent.array() < 0.0).any()) {
      throw Error(Errc::invalid_argument, "point_region min exceeds max");
    }
    if (n_points > 1 && extent.prod() <= 0.0) {
      throw Error(Errc::invalid_argument, "point_region has zero volume");
    }
  }
};

struct SceneCamera {
  ViewCamera view;
  /// World-to-camera rotation; its third row is the optical axis.
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  ProjectiveCamera projection;
  std::array<int, 2> image_size{0, 0};

  /// Unit world-space direction of the ray through a pixel.
  UnitVec3 ray(const Pixel& px) const {
    const Eigen::Vector3d d = K.inverse() * px.homogeneous();
    return UnitVec3::normalized(rotation.transpose() * d);
  }
};

struct Scene {
  std::vector<SceneCamera> cameras;
  std::vector<Point3> points;
  VisibilityTable visibility;
  /// Exact projections, ordered by (point, view).
  std::vector<Observation> observations;

  std::vector<ViewCamera> view_cameras() const {
    std::vector<ViewCamera> out;
    for (const auto& c : cameras) out.push_back(c.view);
    return out;
  }
  std::vector<ProjectiveCamera> projective_cameras() const {
    std::vector<ProjectiveCamera> out;
    for (const auto& c : cameras) out.push_back(c.projection);
    return out;
  }
};

namespace detail {

inline Eigen::Matrix3d look_rotation(const Vec3& axis) {
  const Vec3 z = axis.normalized();
  Vec3 up(0, 1, 0);
  if (z.cross(up).norm() < 1e-6) up = Vec3(1, 0, 0);
  const Vec3 x = up.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Eigen::Matrix3d R;
  R.row(0) = x;
  R.row(1) = y;
  R.row(2) = z;
  return R;
}

}  // namespace detail

/// Builds a camera at `center` looking along `axis` with the principal point
/// at the image center.
inline SceneCamera make_camera(std::size_t id, const Point3& center, const UnitVec3& axis,
                               double focal_px, std::array<int, 2> image_size) {
  SceneCamera cam;
  cam.view = {id, center, axis, focal_px};
  cam.rotation = detail::look_rotation(axis.vec());
  cam.K << focal_px, 0, image_size[0] / 2.0, 0, focal_px, image_size[1] / 2.0, 0, 0, 1;
  cam.projection.matrix.leftCols<3>() = cam.K * cam.rotation;
  cam.projection.matrix.col(3) = -cam.K * cam.rotation * center;
  cam.image_size = image_size;
  return cam;
}

/// Deterministic for a fixed config (including seed). Ring cameras sit on a
/// horizontal circle around the region center; arc cameras on the same
/// circle at a fixed angular step; line cameras along x, offset by -radius in
/// z. Points seen by no camera are dropped.
inline Scene generate_scene(const SceneConfig& config) {
  config.validate();
  SceneRng rng(config.seed);
  Scene scene;
  const Point3 centroid = config.point_region.center();
  const std::size_t n = config.n_views;

  for (std::size_t i = 0; i < n; ++i) {
    Point3 center;
    switch (config.layout) {
      case Layout::ring: {
        const double a = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n);
        center = centroid + config.radius * Vec3(std::cos(a), 0.0, std::sin(a));
        break;
      }
      case Layout::arc: {
        const double a = -M_PI / 2 + config.arc_step * (static_cast<double>(i) - (n - 1) / 2.0);
        center = centroid + config.radius * Vec3(std::cos(a), 0.0, std::sin(a));
        break;
      }
      case Layout::line:
        center = centroid + Vec3(config.spacing * (static_cast<double>(i) - (n - 1) / 2.0), 0.0,
                                 -config.radius);
        break;
    }
    const UnitVec3 axis = config.look_at == LookAt::centroid ? UnitVec3::normalized(centroid - center)
                                                            : config.fixed_dir;
    scene.cameras.push_back(make_camera(i, center, axis, config.focal_px, config.image_size));
  }

  const Box& box = config.point_region;
  for (std::size_t p = 0; p < config.n_points; ++p) {
    Point3 x;
    for (int d = 0; d < 3; ++d) x[d] = rng.uniform(box.min[d], box.max[d]);

    std::vector<std::size_t> seen;
    std::vector<Pixel> pixels;
    for (std::size_t v = 0; v < n; ++v) {
      const auto& cam = scene.cameras[v];
      const Eigen::Vector3d h = cam.projection.matrix * x.homogeneous();
      if (h.z() <= kEps) continue;
      const Pixel px = h.head<2>() / h.z();
      if (config.visibility_rule == VisibilityRule::frustum &&
          (px.x() < 0 || px.y() < 0 || px.x() > cam.image_size[0] || px.y() > cam.image_size[1])) {
        continue;
      }
      seen.push_back(v);
      pixels.push_back(px);
    }
    if (seen.empty()) continue;
    const std::size_t id = scene.points.size();
    scene.points.push_back(x);
    for (std::size_t k = 0; k < seen.size(); ++k) {
      scene.observations.push_back({seen[k], id, pixels[k]});
    }
    scene.visibility.views_of_point.push_back(std::move(seen));
  }
  return scene;
}

enum class NoiseMode { isotropic_gaussian, epipolar_1px };

/// Noisy copy of the scene observations.
///
/// isotropic_gaussian adds N(0, noise_px^2) per axis. epipolar_1px moves each
/// observation in view v by exactly noise_px along its epipolar line with
/// respect to partners[v], toward the epipole. An observation sitting on the
/// epipole has no defined direction and is left unchanged.
inline std::vector<Observation> perturb_observations(const Scene& scene, double noise_px,
                                                     NoiseMode mode, std::uint64_t seed,
                                                     const std::vector<std::size_t>& partners = {}) {
  if (!(noise_px >= 0.0)) throw Error(Errc::invalid_argument, "noise_px must be >= 0");
  const std::size_t n = scene.cameras.size();
  if (mode == NoiseMode::epipolar_1px) {
    if (partners.size() != n) {
      throw Error(Errc::invalid_argument, "epipolar mode needs one partner view per view");
    }
    for (std::size_t v = 0; v < n; ++v) {
      if (partners[v] >= n || partners[v] == v) {
        throw Error(Errc::invalid_argument, "invalid partner for view " + std::to_string(v));
      }
    }
  }
  std::vector<Observation> out = scene.observations;
  if (noise_px == 0.0) return out;

  SceneRng rng(seed);
  for (auto& o : out) {
    if (mode == NoiseMode::isotropic_gaussian) {
      const double dx = rng.normal();
      const double dy = rng.normal();
      o.pixel += noise_px * Pixel(dx, dy);
      continue;
    }
    const auto& cam = scene.cameras[o.view];
    const Point3& partner_center = scene.cameras[partners[o.view]].view.center;
    const Eigen::Vector3d e = cam.projection.matrix * partner_center.homogeneous();
    Pixel dir;
    if (std::abs(e.z()) > kEps) {
      dir = e.head<2>() / e.z() - o.pixel;
    } else {
      dir = e.head<2>();
    }
    if (dir.norm() < kEps) continue;
    o.pixel += noise_px * dir.normalized();
  }
  return out;
}

/// partners[v] = (v + 1) mod n.
inline std::vector<std::size_t> next_view_partners(std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t v = 0; v < n; ++v) p[v] = (v + 1) % n;
  return p;
}

}  // namespace ervs
