#pragma once

// Pair-selection strategies compared on identical noisy observations, and the
// candidate-count sweep.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/evaluation.hpp"
#include "ervs/resistance_matrix.hpp"
#include "ervs/scene.hpp"
#include "ervs/view_selection.hpp"

namespace ervs {

enum class Strategy { resistant, nearest_baseline, exhaustive };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::resistant: return "resistant";
    case Strategy::nearest_baseline: return "nearest_baseline";
    case Strategy::exhaustive: return "exhaustive";
  }
  return "unknown";
}

inline Strategy strategy_from_string(const std::string& name) {
  if (name == "resistant") return Strategy::resistant;
  if (name == "nearest_baseline") return Strategy::nearest_baseline;
  if (name == "exhaustive") return Strategy::exhaustive;
  throw Error(Errc::invalid_argument, "unknown strategy '" + name + "'");
}

using ViewPair = std::pair<std::size_t, std::size_t>;

/// Each view paired with its k nearest camera centers (ties by index).
inline std::vector<ViewPair> nearest_baseline_pairs(const Scene& scene, std::size_t k) {
  const std::size_t n = scene.cameras.size();
  std::vector<ViewPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> by_dist;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      by_dist.emplace_back((scene.cameras[i].view.center - scene.cameras[j].view.center).norm(), j);
    }
    std::sort(by_dist.begin(), by_dist.end());
    for (std::size_t r = 0; r < std::min(k, by_dist.size()); ++r) {
      const std::size_t j = by_dist[r].second;
      pairs.emplace_back(std::min(i, j), std::max(i, j));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

inline std::vector<ViewPair> exhaustive_pairs(std::size_t n) {
  std::vector<ViewPair> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

struct Reconstruction {
  /// Triangulated position per point; empty when no admitted pair sees it.
  std::vector<std::optional<Point3>> points;
  std::size_t triangulated = 0;
  double mean_3d_error = 0.0;
  /// Mean squared pixel error of triangulated points against the
  /// exact observations; NaN when nothing was triangulated.
  double avg_reprojection_error = 0.0;
};

/// Triangulates every point from the admitted pairs that both observe it:
/// midpoint of the two noisy rays per pair, averaged over pairs.
inline Reconstruction triangulate_scene(const Scene& scene, std::span<const Observation> noisy,
                                        std::span<const ViewPair> pairs) {
  const std::size_t n_views = scene.cameras.size();
  const std::size_t n_points = scene.points.size();
  // pixel_of[point][view]
  std::vector<std::vector<std::optional<Pixel>>> pixel_of(
      n_points, std::vector<std::optional<Pixel>>(n_views));
  for (const auto& o : noisy) {
    if (o.point >= n_points || o.view >= n_views) {
      throw Error(Errc::invalid_argument, "observation out of range");
    }
    pixel_of[o.point][o.view] = o.pixel;
  }

  Reconstruction rec;
  rec.points.resize(n_points);
  double err_sum = 0.0;
  for (std::size_t p = 0; p < n_points; ++p) {
    Point3 sum = Point3::Zero();
    std::size_t count = 0;
    for (const auto& [a, b] : pairs) {
      const auto& pa = pixel_of[p][a];
      const auto& pb = pixel_of[p][b];
      if (!pa || !pb) continue;
      const auto& ca = scene.cameras[a];
      const auto& cb = scene.cameras[b];
      try {
        sum += triangulate_midpoint(ca.view.center, ca.ray(*pa), cb.view.center, cb.ray(*pb));
        ++count;
      } catch (const Error&) {
      }
    }
    if (count == 0) continue;
    rec.points[p] = sum / static_cast<double>(count);
    err_sum += (*rec.points[p] - scene.points[p]).norm();
    ++rec.triangulated;
  }
  rec.mean_3d_error = rec.triangulated ? err_sum / static_cast<double>(rec.triangulated) : NAN;

  std::vector<Point3> estimated(n_points, Point3::Zero());
  std::vector<Observation> used;
  for (std::size_t p = 0; p < n_points; ++p) {
    if (rec.points[p]) estimated[p] = *rec.points[p];
  }
  for (const auto& o : scene.observations) {
    if (rec.points[o.point]) used.push_back(o);
  }
  const auto cams = scene.projective_cameras();
  rec.avg_reprojection_error = used.empty() ? NAN : avg_reprojection_error(cams, estimated, used);
  return rec;
}

struct StrategyResult {
  std::string name;
  std::vector<ViewPair> pairs;
  double mean_3d_error = 0.0;
  double avg_reprojection_error = 0.0;
  std::size_t triangulated_points = 0;
  std::size_t total_points = 0;
  double wall_time_s = 0.0;
};

struct StrategyReport {
  std::uint64_t seed = 0;
  double noise_px = 0.0;
  NoiseMode noise_mode = NoiseMode::isotropic_gaussian;
  std::size_t k = kDefaultCandidateCount;
  std::vector<StrategyResult> results;

  const StrategyResult* find(const std::string& name) const {
    for (const auto& r : results) {
      if (r.name == name) return &r;
    }
    return nullptr;
  }
};

inline std::vector<ViewPair> strategy_pairs(const Scene& scene, Strategy strategy, std::size_t k) {
  switch (strategy) {
    case Strategy::resistant: {
      const auto cams = scene.view_cameras();
      const auto e = build_matrix(cams, scene.points, scene.visibility);
      return candidate_pairs(select_views(e, k).candidates);
    }
    case Strategy::nearest_baseline:
      return nearest_baseline_pairs(scene, k);
    case Strategy::exhaustive:
      return exhaustive_pairs(scene.cameras.size());
  }
  return {};
}

/// Runs each strategy on the same noisy observations. Wall time covers pair
/// selection (including matrix construction for `resistant`) and
/// triangulation.
inline StrategyReport compare_strategies(const Scene& scene, double noise_px, std::uint64_t seed,
                                         std::size_t k, std::span<const Strategy> strategies,
                                         NoiseMode mode = NoiseMode::isotropic_gaussian) {
  if (strategies.empty()) throw Error(Errc::invalid_argument, "no strategies requested");
  if (k < 1) throw Error(Errc::invalid_argument, "k must be >= 1");
  const std::vector<std::size_t> partners =
      mode == NoiseMode::epipolar_1px ? next_view_partners(scene.cameras.size())
                                      : std::vector<std::size_t>{};
  const auto noisy = perturb_observations(scene, noise_px, mode, seed, partners);

  StrategyReport report;
  report.seed = seed;
  report.noise_px = noise_px;
  report.noise_mode = mode;
  report.k = k;
  for (Strategy s : strategies) {
    const auto t0 = std::chrono::steady_clock::now();
    StrategyResult r;
    r.name = to_string(s);
    r.pairs = strategy_pairs(scene, s, k);
    const Reconstruction rec = triangulate_scene(scene, noisy, r.pairs);
    r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.mean_3d_error = rec.mean_3d_error;
    r.avg_reprojection_error = rec.avg_reprojection_error;
    r.triangulated_points = rec.triangulated;
    r.total_points = scene.points.size();
    report.results.push_back(std::move(r));
  }
  return report;
}

struct SweepRow {
  std::size_t k = 0;
  /// Reconstruction failed: selection error or points left untriangulated.
  bool failed = false;
  std::string failure;
  std::size_t pairs = 0;
  double mean_3d_error = NAN;
  double avg_reprojection_error = NAN;
  double wall_time_s = 0.0;
};

/// Select + triangulate for each k in ascending order. The resistance matrix
/// is built once; wall time covers selection and triangulation.
inline std::vector<SweepRow> sweep_candidate_count(const Scene& scene, double noise_px,
                                                   std::uint64_t seed,
                                                   std::vector<std::size_t> k_values) {
  if (k_values.empty()) throw Error(Errc::invalid_argument, "empty k range");
  const std::size_t n = scene.cameras.size();
  std::sort(k_values.begin(), k_values.end());
  k_values.erase(std::unique(k_values.begin(), k_values.end()), k_values.end());
  if (k_values.front() < 1 || k_values.back() > n - 1) {
    throw Error(Errc::invalid_argument, "k range must lie within [1, " + std::to_string(n - 1) + "]");
  }

  const auto noisy = perturb_observations(scene, noise_px, NoiseMode::isotropic_gaussian, seed);
  const auto cams = scene.view_cameras();
  const auto e = build_matrix(cams, scene.points, scene.visibility);

  std::vector<SweepRow> rows;
  for (std::size_t k : k_values) {
    SweepRow row;
    row.k = k;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const auto pairs = candidate_pairs(select_views(e, k).candidates);
      const Reconstruction rec = triangulate_scene(scene, noisy, pairs);
      row.pairs = pairs.size();
      row.mean_3d_error = rec.mean_3d_error;
      row.avg_reprojection_error = rec.avg_reprojection_error;
      if (rec.triangulated < scene.points.size()) {
        row.failed = true;
        row.failure = std::to_string(scene.points.size() - rec.triangulated) +
                      " points not triangulated";
      }
    } catch (const Error& err) {
      row.failed = true;
      row.failure = err.what();
    }
    row.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ervs
