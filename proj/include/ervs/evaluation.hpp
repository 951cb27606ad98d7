#pragma once

// Reconstruction quality metrics: average reprojection error and absolute
// trajectory error after least-squares similarity alignment.

#include <Eigen/Core>
#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/geometry.hpp"

namespace ervs {

using Pixel = Eigen::Vector2d;

struct ProjectiveCamera {
  Eigen::Matrix<double, 3, 4> matrix = Eigen::Matrix<double, 3, 4>::Identity();
};

struct Observation {
  std::size_t view = 0;
  std::size_t point = 0;
  Pixel pixel = Pixel::Zero();

  bool operator==(const Observation&) const = default;
};

inline Pixel project(const ProjectiveCamera& cam, const Point3& x, double eps = kEps) {
  const Eigen::Vector3d h = cam.matrix * x.homogeneous();
  if (std::abs(h.z()) <= eps) {
    throw Error(Errc::point_at_camera_plane, "point projects to infinity");
  }
  return h.head<2>() / h.z();
}

enum class ReprojectionMetric {
  mean_squared,  // 1/c sum ||x_ij - pi(P_i X_j)||^2
  rms,           // square root of mean_squared
};

inline double avg_reprojection_error(std::span<const ProjectiveCamera> cams,
                                     std::span<const Point3> points,
                                     std::span<const Observation> obs,
                                     ReprojectionMetric metric = ReprojectionMetric::mean_squared) {
  if (obs.empty()) throw Error(Errc::invalid_argument, "no observations");
  double sum = 0.0;
  for (const auto& o : obs) {
    if (o.view >= cams.size() || o.point >= points.size()) {
      throw Error(Errc::invalid_argument, "observation (" + std::to_string(o.view) + ", " +
                                              std::to_string(o.point) + ") out of range");
    }
    Pixel projected;
    try {
      projected = project(cams[o.view], points[o.point]);
    } catch (const Error&) {
      throw Error(Errc::point_at_camera_plane, "observation (" + std::to_string(o.view) + ", " +
                                                   std::to_string(o.point) + ") is not projectable");
    }
    sum += (o.pixel - projected).squaredNorm();
  }
  const double mse = sum / static_cast<double>(obs.size());
  return metric == ReprojectionMetric::rms ? std::sqrt(mse) : mse;
}

// ---------------------------------------------------------------------------
// Trajectory alignment

using Trajectory = std::vector<Point3>;

/// Maps an estimated position p' to s R (p' - t). The translation is applied
/// before rotation and scale; to_affine() gives the usual s R p' + b form with
/// b = -s R t.
struct SimilarityTransform {
  double s = 1.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& p) const { return s * R * (p - t); }

  Eigen::Matrix<double, 3, 4> to_affine() const {
    Eigen::Matrix<double, 3, 4> m;
    m.leftCols<3>() = s * R;
    m.col(3) = -s * R * t;
    return m;
  }

  static SimilarityTransform from_affine(double s, const Eigen::Matrix3d& R,
                                         const Eigen::Vector3d& b) {
    return {s, R, -R.transpose() * b / s};
  }
};

/// Closed-form least-squares similarity (Umeyama) taking `estimated` onto
/// `truth`.
inline SimilarityTransform umeyama_align(std::span<const Point3> estimated,
                                         std::span<const Point3> truth) {
  if (estimated.size() != truth.size()) {
    throw Error(Errc::length_mismatch, "trajectories have " + std::to_string(estimated.size()) +
                                           " and " + std::to_string(truth.size()) + " positions");
  }
  const std::size_t n = estimated.size();
  if (n < 3) throw Error(Errc::invalid_argument, "alignment needs at least 3 positions");

  Eigen::Vector3d mu_x = Eigen::Vector3d::Zero();
  Eigen::Vector3d mu_y = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_x += estimated[i];
    mu_y += truth[i];
  }
  mu_x /= static_cast<double>(n);
  mu_y /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter_x = Eigen::Matrix3d::Zero();
  double var_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d dx = estimated[i] - mu_x;
    const Eigen::Vector3d dy = truth[i] - mu_y;
    cov += dy * dx.transpose();
    scatter_x += dx * dx.transpose();
    var_x += dx.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_x /= static_cast<double>(n);

  // Rotation about the support line is unobservable for collinear input.
  const Eigen::JacobiSVD<Eigen::Matrix3d> spread(scatter_x);
  const auto sv = spread.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw Error(Errc::collinear_degenerate, "estimated positions are collinear");
  }

  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix3d& U = svd.matrixU();
  const Eigen::Matrix3d& V = svd.matrixV();
  Eigen::Vector3d signs = Eigen::Vector3d::Ones();
  if (U.determinant() * V.determinant() < 0.0) signs(2) = -1.0;

  const Eigen::Matrix3d R = U * signs.asDiagonal() * V.transpose();
  const double s = svd.singularValues().dot(signs) / var_x;
  const Eigen::Vector3d b = mu_y - s * R * mu_x;
  return SimilarityTransform::from_affine(s, R, b);
}

/// Sum of squared residuals ||truth_i - S(estimated_i)||^2.
inline double alignment_objective(const SimilarityTransform& S, std::span<const Point3> estimated,
                                  std::span<const Point3> truth) {
  double sum = 0.0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    sum += (truth[i] - S.apply(estimated[i])).squaredNorm();
  }
  return sum;
}

/// RMSE of position residuals after similarity alignment.
inline double absolute_trajectory_error(std::span<const Point3> estimated,
                                        std::span<const Point3> truth) {
  const SimilarityTransform S = umeyama_align(estimated, truth);
  return std::sqrt(alignment_objective(S, estimated, truth) / static_cast<double>(estimated.size()));
}

}  // namespace ervs
