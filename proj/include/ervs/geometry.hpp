#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ervs/error.hpp"

namespace ervs {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;

/// Threshold for cosines, cross products and other unitless degeneracy tests.
inline constexpr double kEps = 1e-9;

/// Marker for undefined resistance values (matrix diagonal, disjoint
/// visibility, degenerate curve samples). Never a valid finite value.
inline constexpr double kSentinel = std::numeric_limits<double>::infinity();

inline bool is_sentinel(double v) { return std::isinf(v) && v > 0; }

inline bool is_finite(const Vec3& v) { return v.allFinite(); }

/// A direction with unit Euclidean norm (within 1e-9).
class UnitVec3 {
 public:
  UnitVec3() : v_(0.0, 0.0, 1.0) {}

  UnitVec3(double x, double y, double z) : v_(x, y, z) {
    if (!v_.allFinite() || std::abs(v_.norm() - 1.0) > kEps) {
      throw Error(Errc::invalid_argument, "UnitVec3 requires a unit-norm vector");
    }
  }

  static UnitVec3 normalized(const Vec3& v) {
    const double n = v.norm();
    if (!v.allFinite() || n < kEps) {
      throw Error(Errc::invalid_argument, "cannot normalize a zero or non-finite vector");
    }
    UnitVec3 u;
    u.v_ = v / n;
    return u;
  }

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  UnitVec3 operator-() const {
    UnitVec3 u;
    u.v_ = -v_;
    return u;
  }

  bool operator==(const UnitVec3& other) const { return v_ == other.v_; }

 private:
  Vec3 v_;
};

/// Angle between rays vertex->a and vertex->b, in [0, pi].
///
/// Uses atan2(|u x w|, u . w), which stays accurate for nearly parallel and
/// nearly antiparallel rays where acos of the clamped cosine loses digits.
inline double angle_at(const Point3& vertex, const Point3& a, const Point3& b) {
  const Vec3 u = a - vertex;
  const Vec3 w = b - vertex;
  const double nu = u.norm();
  const double nw = w.norm();
  if (!(nu > 0.0) || !(nw > 0.0) || !std::isfinite(nu) || !std::isfinite(nw)) {
    throw Error(Errc::invalid_geometry, "angle_at: ray endpoint coincides with vertex");
  }
  const Vec3 un = u / nu;
  const Vec3 wn = w / nw;
  const double c = std::clamp(un.dot(wn), -1.0, 1.0);
  const double s = un.cross(wn).norm();
  return std::atan2(s, c);
}

/// Inputs of the two-view error-resistance computation. o1 is the first
/// camera center, o2 the second one; the 1-pixel matching error is applied on
/// the image of o2, whose optical axis is axis2 and focal length focal_px.
struct TriangulationSetup {
  Point3 o1;
  Point3 o2;
  Point3 p;
  UnitVec3 axis2;
  double focal_px = 1.0;

  double baseline() const { return (o2 - o1).norm(); }

  void validate() const {
    if (!is_finite(o1) || !is_finite(o2) || !is_finite(p)) {
      throw Error(Errc::invalid_geometry, "non-finite coordinates");
    }
    if (!(focal_px > 0.0) || !std::isfinite(focal_px)) {
      throw Error(Errc::invalid_argument, "focal_px must be positive");
    }
    if ((o2 - o1).norm() <= 0.0) {
      throw Error(Errc::invalid_geometry, "zero baseline: o1 == o2");
    }
    if ((p - o1).norm() <= 0.0 || (p - o2).norm() <= 0.0) {
      throw Error(Errc::invalid_geometry, "point coincides with a camera center");
    }
  }
};

/// Midpoint of the shortest segment between two rays. Ray parameters are
/// clamped to be non-negative.
inline Point3 triangulate_midpoint(const Point3& origin1, const UnitVec3& dir1,
                                   const Point3& origin2, const UnitVec3& dir2) {
  const Vec3& d1 = dir1.vec();
  const Vec3& d2 = dir2.vec();
  if (d1.cross(d2).norm() <= kEps) {
    throw Error(Errc::parallel_rays, "triangulate_midpoint: rays are parallel");
  }
  const Vec3 w0 = origin1 - origin2;
  const double b = d1.dot(d2);
  const double d = d1.dot(w0);
  const double e = d2.dot(w0);
  const double den = 1.0 - b * b;
  double s = (b * e - d) / den;
  double t = (e - b * d) / den;
  if (s < 0.0) {
    s = 0.0;
    t = std::max(0.0, e);
  }
  if (t < 0.0) {
    t = 0.0;
    s = std::max(0.0, -d);
  }
  const Point3 q1 = origin1 + s * d1;
  const Point3 q2 = origin2 + t * d2;
  return 0.5 * (q1 + q2);
}

}  // namespace ervs
