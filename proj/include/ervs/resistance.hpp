#pragma once

// Error resistance of a directed camera baseline: the 3D displacement of a
// triangulated point caused by a 1-pixel matching error along the epipolar
// line in the second image.

#include <cmath>
#include <optional>
#include <type_traits>
#include <variant>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/geometry.hpp"

namespace ervs {

/// Image-plane lengths in the second camera, with the image plane at unit
/// distance from o2.
///
/// o2e2 is signed: it is negative when o1 lies behind the image plane of
/// camera 2, in which case e2 sits on the ray opposite to o2->o1. Keeping the
/// sign lets the same law-of-cosines expression produce e2p2 in both cases.
struct EpipolarSegments {
  double o2p2 = 0.0;
  double o2e2 = 0.0;
  double e2p2 = 0.0;
};

struct ResistanceBreakdown {
  double alpha = 0.0;       // angle e2-P2-O2
  double beta = 0.0;        // angle P-O2-O1
  double beta_prime = 0.0;  // angle P-O2-P'
  double gamma = 0.0;       // angle O1-P-O2
  double perturb_len = 0.0; // |P2' P2| in image-plane units
  double resistance = 0.0;  // |P P'|
};

enum class PerturbDirection { toward_epipole, away_from_epipole };

struct ResistanceOptions {
  /// Overrides 1/focal_px. Test hook.
  std::optional<double> perturb_len;
  /// Test hook; production values always move toward the epipole.
  PerturbDirection direction = PerturbDirection::toward_epipole;
  double eps = kEps;
  double eps_angle = 1e-9;
};

namespace detail {

inline double perturb_len(const TriangulationSetup& s, const ResistanceOptions& opt) {
  const double len = opt.perturb_len.value_or(1.0 / s.focal_px);
  if (!(len >= 0.0) || !std::isfinite(len)) {
    throw Error(Errc::invalid_argument, "perturbation length must be non-negative");
  }
  return len;
}

inline void check_not_collinear(const TriangulationSetup& s, double eps) {
  const Vec3 to_p = (s.p - s.o2).normalized();
  const Vec3 to_o1 = (s.o1 - s.o2).normalized();
  if (to_p.cross(to_o1).norm() < eps) {
    throw Error(Errc::collinear_degenerate, "point lies on the baseline line");
  }
}

}  // namespace detail

/// Lengths O2P2, O2e2 and e2P2 from the camera-2 angles.
inline EpipolarSegments epipolar_segments(const TriangulationSetup& setup,
                                          double eps = kEps) {
  setup.validate();
  detail::check_not_collinear(setup, eps);

  const Point3 f = setup.o2 + setup.axis2.vec();
  const double cos_pf = std::cos(angle_at(setup.o2, setup.p, f));
  if (cos_pf <= eps) {
    throw Error(Errc::point_behind_camera, "point is not in front of camera 2");
  }
  const double cos_of = std::cos(angle_at(setup.o2, setup.o1, f));
  if (std::abs(cos_of) <= eps) {
    throw Error(Errc::epipole_at_infinity, "baseline is parallel to the image plane of camera 2");
  }

  EpipolarSegments seg;
  seg.o2p2 = 1.0 / cos_pf;
  seg.o2e2 = 1.0 / cos_of;
  const double cos_beta = std::cos(angle_at(setup.o2, setup.p, setup.o1));
  const double sq = seg.o2p2 * seg.o2p2 + seg.o2e2 * seg.o2e2 -
                    2.0 * seg.o2p2 * seg.o2e2 * cos_beta;
  seg.e2p2 = std::sqrt(std::max(0.0, sq));
  if (seg.e2p2 < eps) {
    throw Error(Errc::collinear_degenerate, "projection coincides with the epipole");
  }
  return seg;
}

/// Closed-form resistance |PP'| from the triangle chain
///   sin(alpha) = O2e2 sin(beta) / e2P2
///   P2'O2^2    = O2P2^2 + d^2 - 2 O2P2 d cos(alpha)
///   sin(beta') = d sin(alpha) / P2'O2
///   PP'        = O2P sin(beta') / sin(gamma + beta')
/// with d = 1/focal_px.
///
/// When the perturbed ray turns away from o1 (epipole behind camera 2, or the
/// away-from-epipole hook) P' lands beyond P on line O1P and the last step
/// uses sin(gamma - beta') instead.
inline ResistanceBreakdown resistance_closed_form(const TriangulationSetup& setup,
                                                  const ResistanceOptions& opt = {}) {
  const EpipolarSegments seg = epipolar_segments(setup, opt.eps);
  const double d = detail::perturb_len(setup, opt);
  const bool toward = opt.direction == PerturbDirection::toward_epipole;

  ResistanceBreakdown out;
  out.perturb_len = d;
  out.beta = angle_at(setup.o2, setup.p, setup.o1);
  out.gamma = angle_at(setup.p, setup.o1, setup.o2);

  // Triangle O2-e2-P2. The interior angle at O2 is beta, or pi - beta when e2
  // is on the opposite ray; the sine is the same either way.
  const double sin_alpha =
      std::clamp(std::abs(seg.o2e2) * std::sin(out.beta) / seg.e2p2, 0.0, 1.0);
  const double cos_alpha_num =
      seg.e2p2 * seg.e2p2 + seg.o2p2 * seg.o2p2 - seg.o2e2 * seg.o2e2;
  const double cos_alpha =
      std::copysign(std::sqrt(std::max(0.0, 1.0 - sin_alpha * sin_alpha)), cos_alpha_num);
  out.alpha = std::atan2(sin_alpha, cos_alpha);

  if (toward && d >= seg.e2p2) {
    throw Error(Errc::collinear_degenerate, "perturbation passes the epipole");
  }

  // Triangle O2-P2-P2'. Moving away from e2 replaces alpha by pi - alpha.
  const double cos_at_p2 = toward ? cos_alpha : -cos_alpha;
  const double p2p_o2 =
      std::sqrt(std::max(0.0, seg.o2p2 * seg.o2p2 + d * d - 2.0 * seg.o2p2 * d * cos_at_p2));
  if (!(p2p_o2 > 0.0)) {
    throw Error(Errc::collinear_degenerate, "perturbed projection coincides with O2");
  }
  const double sin_bp = std::clamp(d * sin_alpha / p2p_o2, 0.0, 1.0);
  const double cos_bp = std::clamp(
      (seg.o2p2 * seg.o2p2 + p2p_o2 * p2p_o2 - d * d) / (2.0 * seg.o2p2 * p2p_o2), -1.0, 1.0);
  out.beta_prime = std::atan2(sin_bp, cos_bp);

  const bool turns_toward_o1 = toward == (seg.o2e2 > 0.0);
  const double at_p_prime = turns_toward_o1 ? out.gamma + out.beta_prime
                                            : out.gamma - out.beta_prime;
  const double sin_den = std::sin(at_p_prime);
  if (at_p_prime <= 0.0 || at_p_prime >= M_PI || sin_den < opt.eps_angle) {
    throw Error(Errc::near_parallel_rays, "perturbed ray does not meet line O1P");
  }
  const double o2p = (setup.p - setup.o2).norm();
  out.resistance = o2p * sin_bp / sin_den;
  return out;
}

/// Independent construction of the same quantity in 3D: project P and o1 onto
/// the image plane of camera 2, shift the projection by 1/focal_px along the
/// epipolar line, and re-intersect the shifted ray with line O1P.
///
/// Unlike the closed form this handles an epipole at infinity, where the
/// epipolar line direction is the in-plane component of o1 - o2.
inline double resistance_geometric(const TriangulationSetup& setup,
                                   const ResistanceOptions& opt = {}) {
  setup.validate();
  const double eps = opt.eps;
  detail::check_not_collinear(setup, eps);
  const double d = detail::perturb_len(setup, opt);
  const Vec3& n = setup.axis2.vec();

  const Vec3 v = setup.p - setup.o2;
  const double depth = v.dot(n);
  if (depth <= eps * v.norm()) {
    throw Error(Errc::point_behind_camera, "point is not in front of camera 2");
  }
  const Point3 p2 = setup.o2 + v / depth;

  const Vec3 base = setup.o1 - setup.o2;
  const double base_depth = base.dot(n);
  Vec3 dir;
  if (std::abs(base_depth) > eps * base.norm()) {
    const Point3 e2 = setup.o2 + base / base_depth;
    dir = e2 - p2;
  } else {
    dir = base - base_depth * n;
  }
  if (dir.norm() < eps) {
    throw Error(Errc::collinear_degenerate, "projection coincides with the epipole");
  }
  dir.normalize();
  if (opt.direction == PerturbDirection::away_from_epipole) dir = -dir;

  const Point3 p2_shift = p2 + d * dir;
  const Vec3 r = p2_shift - setup.o2;
  const Vec3 q = setup.p - setup.o1;
  if (r.normalized().cross(q.normalized()).norm() < opt.eps_angle) {
    throw Error(Errc::near_parallel_rays, "perturbed ray is parallel to line O1P");
  }
  // Closest point on line o1 + b q to line o2 + a r (the lines are coplanar).
  const Vec3 w0 = setup.o2 - setup.o1;
  const double aa = r.dot(r);
  const double bb = r.dot(q);
  const double cc = q.dot(q);
  const double dd = r.dot(w0);
  const double ee = q.dot(w0);
  const double den = aa * cc - bb * bb;
  const double b = (aa * ee - bb * dd) / den;
  // P = o1 + q, so P' - P = (b - 1) q.
  return std::abs(b - 1.0) * q.norm();
}

/// Closed form, falling back to the geometric construction when the epipole
/// is at infinity.
inline double resistance(const TriangulationSetup& setup, const ResistanceOptions& opt = {}) {
  try {
    return resistance_closed_form(setup, opt).resistance;
  } catch (const Error& e) {
    if (e.code() != Errc::epipole_at_infinity) throw;
  }
  return resistance_geometric(setup, opt);
}

/// As resistance(), but maps every domain error to kSentinel.
inline double resistance_or_sentinel(const TriangulationSetup& setup,
                                     const ResistanceOptions& opt = {}) noexcept {
  try {
    return resistance(setup, opt);
  } catch (const Error&) {
    return kSentinel;
  }
}

// ---------------------------------------------------------------------------
// Baseline / error curve

struct CurveSample {
  double t = 0.0;
  double delta_d = 0.0;
};

struct FixedAxis {
  UnitVec3 axis;
};
struct LookAtPoint {};
using AxisRule = std::variant<FixedAxis, LookAtPoint>;

/// Samples resistance as the second camera slides along baseline_dir.
/// Degenerate samples carry kSentinel.
inline std::vector<CurveSample> baseline_error_curve(const Point3& p, const Point3& o1,
                                                     const UnitVec3& baseline_dir,
                                                     const AxisRule& axis_rule,
                                                     double focal_px,
                                                     const std::vector<double>& t_values) {
  if (t_values.empty()) {
    throw Error(Errc::invalid_argument, "baseline_error_curve: empty t_values");
  }
  for (std::size_t i = 0; i < t_values.size(); ++i) {
    if (!(t_values[i] > 0.0) || (i > 0 && !(t_values[i] > t_values[i - 1]))) {
      throw Error(Errc::invalid_argument,
                  "baseline_error_curve: t_values must be positive and strictly increasing");
    }
  }
  std::vector<CurveSample> out;
  out.reserve(t_values.size());
  for (double t : t_values) {
    const Point3 o2 = o1 + t * baseline_dir.vec();
    CurveSample sample{t, kSentinel};
    try {
      const UnitVec3 axis = std::visit(
          [&](const auto& rule) -> UnitVec3 {
            if constexpr (std::is_same_v<std::decay_t<decltype(rule)>, FixedAxis>) {
              return rule.axis;
            } else {
              return UnitVec3::normalized(p - o2);
            }
          },
          axis_rule);
      sample.delta_d = resistance(TriangulationSetup{o1, o2, p, axis, focal_px});
    } catch (const Error&) {
      sample.delta_d = kSentinel;
    }
    out.push_back(sample);
  }
  return out;
}

/// n evenly spaced values over [lo, hi], both ends included.
inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

/// Indices of strict interior local minima, ignoring sentinel samples.
inline std::vector<std::size_t> local_minima(const std::vector<CurveSample>& curve) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!std::isfinite(curve[i].delta_d)) continue;
    idx.push_back(i);
  }
  std::vector<std::size_t> minima;
  for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
    const double prev = curve[idx[k - 1]].delta_d;
    const double cur = curve[idx[k]].delta_d;
    const double next = curve[idx[k + 1]].delta_d;
    if (cur < prev && cur < next) minima.push_back(idx[k]);
  }
  return minima;
}

}  // namespace ervs
