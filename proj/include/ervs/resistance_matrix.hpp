#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <iterator>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/geometry.hpp"
#include "ervs/resistance.hpp"

namespace ervs {

struct ViewCamera {
  std::size_t id = 0;
  Point3 center = Point3::Zero();
  UnitVec3 axis;
  double focal_px = 1.0;
};

/// For every point id, the sorted ids of the views observing it.
struct VisibilityTable {
  std::vector<std::vector<std::size_t>> views_of_point;

  std::size_t num_points() const { return views_of_point.size(); }

  /// Sorted point ids seen by each of n views.
  std::vector<std::vector<std::size_t>> points_of_views(std::size_t n) const {
    std::vector<std::vector<std::size_t>> out(n);
    for (std::size_t pt = 0; pt < views_of_point.size(); ++pt) {
      for (std::size_t v : views_of_point[pt]) {
        if (v >= n) throw Error(Errc::invalid_argument, "visibility references view " + std::to_string(v));
        out[v].push_back(pt);
      }
    }
    return out;
  }
};

enum class Aggregator { mean, median };

/// Directed error-resistance matrix. Entry (i, j) is the resistance of the
/// baseline from camera i to camera j, with the matching error applied on
/// view j. The diagonal holds kSentinel.
class ResistanceMatrix {
 public:
  ResistanceMatrix() = default;

  explicit ResistanceMatrix(std::size_t n) : n_(n), values_(n * n, kSentinel) {}

  /// Validates shape, an all-sentinel diagonal and non-negative (or
  /// sentinel) off-diagonal entries.
  static ResistanceMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    ResistanceMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) {
        throw Error(Errc::format_error, "matrix row " + std::to_string(i) + " has " +
                                            std::to_string(rows[i].size()) + " entries, expected " +
                                            std::to_string(n));
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double v = rows[i][j];
        if (i == j) {
          if (!is_sentinel(v)) {
            throw Error(Errc::format_error, "diagonal entry " + std::to_string(i) + " must be inf");
          }
        } else if (std::isnan(v) || v < 0.0 || (std::isinf(v) && v < 0)) {
          throw Error(Errc::format_error, "entry (" + std::to_string(i) + ", " + std::to_string(j) +
                                              ") must be non-negative or inf");
        }
        m.values_[i * n + j] = v;
      }
    }
    return m;
  }

  std::size_t size() const { return n_; }

  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * n_, n_};
  }

  const std::vector<double>& values() const { return values_; }

  bool operator==(const ResistanceMatrix& other) const {
    if (n_ != other.n_) return false;
    // Bitwise comparison: sentinels compare equal, and so would NaNs if any.
    return std::equal(values_.begin(), values_.end(), other.values_.begin(),
                      [](double a, double b) {
                        return std::memcmp(&a, &b, sizeof(double)) == 0;
                      });
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

namespace detail {

inline double aggregate(std::vector<double>& values, Aggregator agg) {
  if (values.empty()) return kSentinel;
  if (agg == Aggregator::mean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 == 1 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace detail

/// Resistance of the baseline cam_i -> cam_j aggregated over shared points.
/// Degenerate points are skipped; kSentinel if none survives.
inline double pair_resistance(const ViewCamera& cam_i, const ViewCamera& cam_j,
                              std::span<const Point3> shared_points,
                              Aggregator aggregator = Aggregator::mean) {
  if ((cam_i.center - cam_j.center).norm() <= 0.0) {
    throw Error(Errc::invalid_geometry, "coincident camera centers for views " +
                                            std::to_string(cam_i.id) + " and " +
                                            std::to_string(cam_j.id));
  }
  std::vector<double> values;
  values.reserve(shared_points.size());
  for (const Point3& p : shared_points) {
    const TriangulationSetup setup{cam_i.center, cam_j.center, p, cam_j.axis, cam_j.focal_px};
    const double r = resistance_or_sentinel(setup);
    if (std::isfinite(r)) values.push_back(r);
  }
  return detail::aggregate(values, aggregator);
}

/// Fills all n(n-1) directed entries. Rows are distributed over `threads`
/// workers; every entry is computed by the same sequential code path, so the
/// result is bit-identical for any thread count.
inline ResistanceMatrix build_matrix(std::span<const ViewCamera> cams,
                                     std::span<const Point3> points,
                                     const VisibilityTable& vis,
                                     Aggregator aggregator = Aggregator::mean,
                                     unsigned threads = 1) {
  const std::size_t n = cams.size();
  if (n < 2) throw Error(Errc::invalid_argument, "build_matrix needs at least two cameras");
  for (std::size_t i = 0; i < n; ++i) {
    if (cams[i].id != i) {
      throw Error(Errc::invalid_argument, "camera ids must be contiguous 0..n-1");
    }
  }
  if (vis.num_points() != points.size()) {
    throw Error(Errc::invalid_argument, "visibility table and point list differ in size");
  }
  const auto seen = vis.points_of_views(n);

  ResistanceMatrix m(n);
  auto fill_row = [&](std::size_t i) {
    std::vector<std::size_t> common;
    std::vector<Point3> shared;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      common.clear();
      std::set_intersection(seen[i].begin(), seen[i].end(), seen[j].begin(), seen[j].end(),
                            std::back_inserter(common));
      shared.clear();
      for (std::size_t pt : common) shared.push_back(points[pt]);
      m(i, j) = pair_resistance(cams[i], cams[j], shared, aggregator);
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fill_row(i);
    return m;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += threads) fill_row(i);
    });
  }
  pool.clear();
  return m;
}

}  // namespace ervs
