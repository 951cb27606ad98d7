// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--expect-fail N[,M...]]
// Exit status is 0 when the failing criteria are exactly the expected set.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ervs/ervs.hpp"
#include "test_support.hpp"

using namespace ervs;

namespace {

constexpr double inf = kSentinel;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

ResistanceMatrix random_matrix(test::Rng& rng, std::size_t n, double sentinel_rate, bool coarse) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || rng.uniform(0, 1) < sentinel_rate) continue;
      // Coarse values force ties so the index tie-break is exercised.
      rows[i][j] = coarse ? 0.5 * static_cast<double>(1 + rng.index(6)) : rng.uniform(0.01, 10.0);
    }
  }
  return ResistanceMatrix::from_rows(rows);
}

// 1 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
  test::Rng rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto s = test::random_setup(rng);
    const double a = resistance_closed_form(s).resistance;
    const double b = resistance_geometric(s);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  return {worst < 1e-6, fmt("max relative error %.3g over 1000 setups (< 1e-6)", worst)};
}

// 2 -------------------------------------------------------------------------
Outcome curve_shape() {
  const auto curve = baseline_error_curve({0.5, 0, 5}, {0, 0, 0}, UnitVec3(1, 0, 0), LookAtPoint{},
                                          1000.0, linspace(0.05, 5.0, 200));
  const auto minima = local_minima(curve);
  auto slope = [&](std::size_t i) {
    return (curve[i + 1].delta_d - curve[i].delta_d) / (curve[i + 1].t - curve[i].t);
  };
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    head += std::abs(slope(i));
    tail += slope(curve.size() - 2 - i);
  }
  head /= 5;
  tail /= 5;
  const bool shape = tail > 0.0 && head >= 10.0 * tail;
  return {minima.size() == 1 && shape,
          fmt("%zu local minima (want 1); head mean |slope| %.4g, tail mean slope %.4g (want > 0 "
              "and head >= 10x tail)",
              minima.size(), head, tail)};
}

// 3 -------------------------------------------------------------------------
Outcome directionality() {
  test::Rng rng(3);
  std::vector<ViewCamera> cams;
  for (std::size_t i = 0; i < 8; ++i) {
    const Point3 c = 6.0 * rng.direction();
    cams.push_back({i, c, test::tilted(rng, -c, 0.2), rng.uniform(500, 2000)});
  }
  std::vector<Point3> pts;
  VisibilityTable vis;
  for (int p = 0; p < 60; ++p) {
    pts.push_back(rng.in_box(1.0));
    vis.views_of_point.push_back({0, 1, 2, 3, 4, 5, 6, 7});
  }
  const auto e = build_matrix(cams, pts, vis);
  double best = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = i + 1; j < 8; ++j) {
      if (!std::isfinite(e(i, j)) || !std::isfinite(e(j, i))) continue;
      best = std::max(best, std::abs(e(i, j) - e(j, i)) / std::max(e(i, j), e(j, i)));
    }
  }

  const Point3 p(0.0, 0.7, 5.0);
  const std::vector<ViewCamera> mirror{
      {0, Point3(-1.3, 0.2, 0.4), UnitVec3::normalized(Vec3(0.2, 0.1, 1)), 900},
      {1, Point3(1.3, 0.2, 0.4), UnitVec3::normalized(Vec3(-0.2, 0.1, 1)), 900}};
  const std::vector<Point3> one{p};
  const auto m = build_matrix(mirror, one, VisibilityTable{{{0, 1}}});
  const double gap = std::abs(m(0, 1) - m(1, 0));
  return {best > 1e-6 && gap < 1e-9,
          fmt("max relative asymmetry %.3g (> 1e-6); mirror pair gap %.3g (< 1e-9)", best, gap)};
}

// 4 -------------------------------------------------------------------------
Outcome selection_correctness() {
  test::Rng rng(4);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(20);
    const auto e = random_matrix(rng, n, 0.1, trial % 2 == 0);
    const std::size_t k = 1 + rng.index(6);
    std::vector<std::vector<std::size_t>> expected;
    for (std::size_t i = 0; i < n; ++i) {
      expected.push_back(test::brute_k_smallest({e.row(i).begin(), e.row(i).end()}, i, k));
    }
    try {
      if (candidate_sets(e, k).lists != expected) ++mismatches;
    } catch (const Error& err) {
      // Only legitimate when some row has no finite entry.
      bool isolated = false;
      for (const auto& l : expected) isolated |= l.empty();
      if (!isolated || err.code() != Errc::isolated_view) ++mismatches;
    }
  }
  return {mismatches == 0, fmt("%d mismatches against brute-force k-smallest over 100 matrices", mismatches)};
}

// 5 -------------------------------------------------------------------------
Outcome reachability_and_completion() {
  test::Rng rng(5);
  int reach_bad = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(30);
    const auto e = random_matrix(rng, n, 0.0, false);
    CandidateSets c;
    c.k = 1 + rng.index(3);
    c.lists.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t deg = rng.index(std::min(c.k, n - 1) + 1);
      std::set<std::size_t> chosen;
      while (chosen.size() < deg) {
        const std::size_t j = rng.index(n);
        if (j != i) chosen.insert(j);
      }
      c.lists[i].assign(chosen.begin(), chosen.end());
    }
    const std::size_t start = rng.index(n);
    const auto order = mark_reachable(e, c, start);
    const std::set<std::size_t> got(order.begin(), order.end());
    if (got != test::bfs_reachable(c.lists, start) || got.size() != order.size()) ++reach_bad;
  }

  int cover_bad = 0, runs = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(25);
    const auto e = random_matrix(rng, n, 0.3, trial % 3 == 0);
    Selection sel;
    try {
      sel = select_views(e, 1 + rng.index(5));
    } catch (const Error& err) {
      if (err.code() != Errc::isolated_view) ++cover_bad;
      continue;
    }
    ++runs;
    std::set<std::size_t> covered(sel.report.marked.begin(), sel.report.marked.end());
    std::set<std::size_t> in_lists;
    for (const auto& l : sel.candidates.lists) in_lists.insert(l.begin(), l.end());
    in_lists.insert(sel.report.start_view);
    if (covered.size() != n || in_lists.size() != n) ++cover_bad;
  }

  std::vector<std::vector<double>> rows(8, std::vector<double>(8, inf));
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      if (i != j) rows[i][j] = rng.uniform(0.1, 1.0);
    }
  }
  for (std::size_t i = 0; i < 8; ++i) {
    if (i == 4) continue;
    rows[i][4] = 10.0 + static_cast<double>(i);
    rows[4][i] = rng.uniform(2.0, 3.0);
  }
  const auto adv = select_views(ResistanceMatrix::from_rows(rows), 3);
  const auto& edges = adv.report.completion_edges;
  const bool adversarial = edges.size() == 1 && edges[0].second == 4 && adv.report.marked.size() == 8;

  return {reach_bad == 0 && cover_bad == 0 && adversarial,
          fmt("%d/1000 reachability mismatches; %d/%d coverage failures; inflated column: %zu "
              "completion edge(s)%s",
              reach_bad, cover_bad, runs, edges.size(),
              edges.size() == 1 ? fmt(" (%zu -> %zu)", edges[0].first, edges[0].second).c_str() : "")};
}

// 6 -------------------------------------------------------------------------
Outcome monotone_invariance() {
  test::Rng rng(6);
  int bad = 0, compared = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 3 + rng.index(15);
    const auto e = random_matrix(rng, n, 0.25, trial % 2 == 0);
    std::vector<std::vector<double>> cubed(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = e(i, j);
        cubed[i][j] = std::isfinite(v) ? v * v * v : v;
      }
    }
    const auto e3 = ResistanceMatrix::from_rows(cubed);
    const std::size_t k = 1 + rng.index(4);
    std::optional<Selection> a, b;
    try {
      a = select_views(e, k);
    } catch (const Error&) {
    }
    try {
      b = select_views(e3, k);
    } catch (const Error&) {
    }
    if (a.has_value() != b.has_value()) {
      ++bad;
      continue;
    }
    if (!a) continue;
    ++compared;
    if (!(a->candidates == b->candidates) || a->report.start_view != b->report.start_view ||
        a->report.completion_edges != b->report.completion_edges) {
      ++bad;
    }
  }
  return {bad == 0, fmt("%d differences over 200 matrices (%d fully selected)", bad, compared)};
}

// 7 -------------------------------------------------------------------------
Outcome alignment() {
  test::Rng rng(7);
  double worst_fit = 0.0, worst_inv = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Trajectory truth;
    for (int i = 0; i < 10; ++i) truth.push_back(rng.in_box(3.0));
    const double s = std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
    const Eigen::Matrix3d R = rng.rotation();
    const Vec3 t = rng.in_box(10.0);
    Trajectory est;
    for (const auto& p : truth) est.push_back(s * R * p + t);
    worst_fit = std::max(worst_fit, absolute_trajectory_error(est, truth));

    Trajectory noisy;
    for (const auto& p : truth) noisy.push_back(p + rng.in_box(0.2));
    const double base = absolute_trajectory_error(noisy, truth);
    Trajectory moved;
    for (const auto& p : noisy) moved.push_back(s * R * p + t);
    worst_inv = std::max(worst_inv, std::abs(absolute_trajectory_error(moved, truth) - base));
  }
  return {worst_fit < 1e-9 && worst_inv < 1e-9,
          fmt("max post-alignment RMSE %.3g (< 1e-9); max ATE change under similarity %.3g (< 1e-9)",
              worst_fit, worst_inv)};
}

// 8 -------------------------------------------------------------------------
Outcome reprojection() {
  SceneConfig cfg;
  cfg.seed = 8;
  const Scene scene = generate_scene(cfg);
  const auto cams = scene.projective_cameras();
  const double exact = avg_reprojection_error(cams, scene.points, scene.observations);

  const std::vector<ProjectiveCamera> id{ProjectiveCamera{}};
  // Point projects to the origin, so the observation is the offset itself.
  const std::vector<Point3> pt{{0, 0, 1}};
  const std::vector<Observation> obs{{0, 0, Pixel(0.3, 0.4)}};
  const double single = avg_reprojection_error(id, pt, obs);
  return {exact == 0.0 && single == 0.25,
          fmt("exact-observation scene %.3g (want 0); single offset %.17g (want 0.25)", exact, single)};
}

// 9 -------------------------------------------------------------------------
Outcome accuracy_surrogate() {
  int wins = 0;
  std::size_t max_resistant_pairs = 0, exhaustive_pairs_count = 0;
  const std::vector<Strategy> all{Strategy::resistant, Strategy::nearest_baseline, Strategy::exhaustive};
  std::ostringstream per_seed;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SceneConfig cfg;
    cfg.n_views = 12;
    cfg.radius = 3.0;
    cfg.n_points = 200;
    cfg.seed = seed;
    const Scene scene = generate_scene(cfg);
    const auto rep = compare_strategies(scene, 1.0, seed, 5, all);
    const auto* r = rep.find("resistant");
    const auto* nb = rep.find("nearest_baseline");
    if (r->mean_3d_error <= nb->mean_3d_error) ++wins;
    max_resistant_pairs = std::max(max_resistant_pairs, r->pairs.size());
    exhaustive_pairs_count = rep.find("exhaustive")->pairs.size();
    per_seed << fmt("\n      seed %2llu: resistant %.6f  nearest_baseline %.6f  exhaustive %.6f",
                    static_cast<unsigned long long>(seed), r->mean_3d_error, nb->mean_3d_error,
                    rep.find("exhaustive")->mean_3d_error);
  }
  const bool pass = wins >= 8 && max_resistant_pairs <= 12 * 5 && exhaustive_pairs_count == 66;
  return {pass, fmt("resistant <= nearest_baseline in %d/10 seeds (>= 8); resistant pairs <= %zu "
                    "(limit 60); exhaustive %zu (want 66)",
                    wins, max_resistant_pairs, exhaustive_pairs_count) +
                    per_seed.str()};
}

// 10 ------------------------------------------------------------------------
Outcome k_sweep() {
  constexpr std::size_t kMax = 10;
  constexpr int kSeeds = 5, kReps = 3;
  std::vector<std::size_t> ks;
  for (std::size_t k = 1; k <= kMax; ++k) ks.push_back(k);

  std::vector<double> mean_time(kMax, 0.0), mean_err(kMax, 0.0);
  std::vector<int> failures(kMax, 0);
  std::vector<std::size_t> pairs(kMax, 0);
  bool ascending = true;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    SceneConfig cfg;
    cfg.n_views = 20;
    cfg.seed = static_cast<std::uint64_t>(seed);
    const Scene scene = generate_scene(cfg);
    std::vector<double> best(kMax, inf);
    for (int rep = 0; rep < kReps; ++rep) {
      const auto rows = sweep_candidate_count(scene, 1.0, cfg.seed, ks);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ascending &= rows[i].k == i + 1;
        best[i] = std::min(best[i], rows[i].wall_time_s);
        if (rep == 0) {
          failures[i] += rows[i].failed;
          pairs[i] += rows[i].pairs;
          if (!rows[i].failed) mean_err[i] += rows[i].mean_3d_error;
        }
      }
    }
    for (std::size_t i = 0; i < kMax; ++i) mean_time[i] += best[i] / kSeeds;
  }

  std::string table = "\n      k  status  pairs(avg)  mean_3d_error  wall_time_ms";
  bool monotone = true;
  for (std::size_t i = 0; i < kMax; ++i) {
    const int ok = kSeeds - failures[i];
    table += fmt("\n     %2zu  %-6s  %10.1f  %13.6g  %12.4f", i + 1,
                 failures[i] ? fmt("x%d/%d", failures[i], kSeeds).c_str() : "ok",
                 static_cast<double>(pairs[i]) / kSeeds, ok ? mean_err[i] / ok : NAN,
                 1e3 * mean_time[i]);
    if (i > 0 && mean_time[i] < 0.8 * mean_time[i - 1]) monotone = false;
  }
  const bool grows = mean_time[kMax - 1] > mean_time[0];
  return {ascending && monotone && grows,
          fmt("rows ascending: %s; each step >= 0.8x previous: %s; t(k=10)/t(k=1) = %.2f (> 1)",
              ascending ? "yes" : "no", monotone ? "yes" : "no", mean_time[kMax - 1] / mean_time[0]) +
              table};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
      std::istringstream in(argv[++i]);
      for (std::string tok; std::getline(in, tok, ',');) expected_failures.insert(std::stoi(tok));
    } else {
      std::fprintf(stderr, "usage: acceptance [--expect-fail N[,M...]]\n");
      return 2;
    }
  }

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"oracle equivalence", 5.0, oracle_equivalence},
      {"curve shape", 1.0, curve_shape},
      {"matrix directionality", 0.0, directionality},
      {"selection correctness", 0.0, selection_correctness},
      {"reachability and completion", 0.0, reachability_and_completion},
      {"monotone invariance", 0.0, monotone_invariance},
      {"alignment", 0.0, alignment},
      {"reprojection", 0.0, reprojection},
      {"accuracy surrogate", 60.0, accuracy_surrogate},
      {"k-sweep harness", 0.0, k_sweep},
  };

  std::set<int> failed;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = criteria[i].budget_s <= 0.0 || secs < criteria[i].budget_s;
    const bool pass = o.pass && in_budget;
    if (!pass) failed.insert(id);
    std::string timing = fmt("%.3f s", secs);
    if (criteria[i].budget_s > 0.0) timing += fmt(" (budget %.0f s)", criteria[i].budget_s);
    std::printf("%s %2d. %s: %s [%s]\n", pass ? "PASS" : "FAIL", id, criteria[i].name,
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed.size(), criteria.size());
  if (!expected_failures.empty()) {
    std::string list;
    for (int id : expected_failures) list += (list.empty() ? "" : ",") + std::to_string(id);
    std::printf("expected failures: %s -> %s\n", list.c_str(),
                failed == expected_failures ? "matched" : "MISMATCH");
  }
  return failed == expected_failures ? 0 : 1;
}
