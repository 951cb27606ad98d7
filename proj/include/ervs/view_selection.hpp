#pragma once

// Candidate ("next view") sets from the resistance matrix, the depth-first
// mark/backtrack coverage check, and completion of views the check misses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ervs/error.hpp"
#include "ervs/resistance_matrix.hpp"

namespace ervs {

inline constexpr std::size_t kDefaultCandidateCount = 5;

struct CandidateSets {
  std::size_t k = kDefaultCandidateCount;
  /// lists[i] = C_i. The first min(k, finite) entries are ascending by
  /// E(i, .); completion appends after them.
  std::vector<std::vector<std::size_t>> lists;

  std::size_t size() const { return lists.size(); }
  bool operator==(const CandidateSets&) const = default;
};

using CompletionEdge = std::pair<std::size_t, std::size_t>;  // (source a, added view x)

struct SelectionReport {
  std::size_t start_view = 0;
  /// Views in the order the final traversal marked them.
  std::vector<std::size_t> marked;
  /// Views the first traversal did not reach.
  std::vector<std::size_t> missing_before_completion;
  std::vector<CompletionEdge> completion_edges;
  /// Number of traversals run, including the final one.
  std::size_t iterations = 0;
};

struct Selection {
  CandidateSets candidates;
  SelectionReport report;
};

namespace detail {

/// Finite entries of row i (excluding i) in ascending order, ties by index.
inline std::vector<std::size_t> ascending_finite(const ResistanceMatrix& e, std::size_t i) {
  std::vector<std::size_t> idx;
  const auto row = e.row(i);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != i && std::isfinite(row[j])) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
  return idx;
}

inline void require_view(const ResistanceMatrix& e, std::size_t v, const char* what) {
  if (v >= e.size()) {
    throw Error(Errc::invalid_argument, std::string(what) + " " + std::to_string(v) +
                                            " out of range for " + std::to_string(e.size()) +
                                            " views");
  }
}

}  // namespace detail

/// C_i = the k views with the smallest finite E(i, .), ascending, ties broken
/// by the smaller index. k is clamped per row to the number of finite entries.
inline CandidateSets candidate_sets(const ResistanceMatrix& e,
                                    std::size_t k = kDefaultCandidateCount) {
  if (k < 1) throw Error(Errc::invalid_argument, "candidate count k must be >= 1");
  if (e.size() < 2) throw Error(Errc::invalid_argument, "need at least two views");
  CandidateSets out;
  out.k = k;
  out.lists.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    auto sorted = detail::ascending_finite(e, i);
    if (sorted.empty()) {
      throw Error(Errc::isolated_view, "view " + std::to_string(i) + " has no finite baseline");
    }
    sorted.resize(std::min(k, sorted.size()));
    out.lists[i] = std::move(sorted);
  }
  return out;
}

/// Source view of the globally smallest finite entry; ties by (i, j).
inline std::size_t global_min_start(const ResistanceMatrix& e) {
  std::optional<std::size_t> best;
  double best_value = kSentinel;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      const double v = e(i, j);
      if (std::isfinite(v) && (!best || v < best_value)) {
        best = i;
        best_value = v;
      }
    }
  }
  if (!best) throw Error(Errc::no_valid_baseline, "matrix has no finite baseline");
  return *best;
}

/// Depth-first marking from `start`. At each view the candidates are tried in
/// ascending E order; marked ones are skipped, the first unmarked one becomes
/// the current view. With no unmarked candidate left the traversal returns to
/// the previous view, and it ends once it is back at `start` with nothing
/// left to try. Returns the views in marking order.
inline std::vector<std::size_t> mark_reachable(const ResistanceMatrix& e, const CandidateSets& c,
                                               std::size_t start) {
  detail::require_view(e, start, "start view");
  if (c.size() != e.size()) {
    throw Error(Errc::invalid_argument, "candidate sets and matrix differ in size");
  }
  // Appended completion entries are not ranked; order every list by E here.
  std::vector<std::vector<std::size_t>> ordered(c.lists);
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    const auto row = e.row(i);
    std::stable_sort(ordered[i].begin(), ordered[i].end(), [&](std::size_t a, std::size_t b) {
      if (row[a] != row[b]) return row[a] < row[b];
      return a < b;
    });
  }

  std::vector<bool> is_marked(e.size(), false);
  std::vector<std::size_t> order{start};
  is_marked[start] = true;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};  // (view, next slot)
  while (!stack.empty()) {
    auto& [view, slot] = stack.back();
    const auto& cands = ordered[view];
    while (slot < cands.size() && is_marked[cands[slot]]) ++slot;
    if (slot == cands.size()) {
      stack.pop_back();
      continue;
    }
    const std::size_t next = cands[slot++];
    is_marked[next] = true;
    order.push_back(next);
    stack.emplace_back(next, 0);
  }
  return order;
}

/// For each missing view x, appends x to C_a where a = argmin over a != x of
/// E(a, x) (ties by smaller a). Sources can be restricted with `allowed_sources`
/// (empty = all views). Already-present entries are not duplicated and do not
/// produce an edge. Missing views are processed in ascending order.
inline std::pair<CandidateSets, std::vector<CompletionEdge>> complete_missing(
    const ResistanceMatrix& e, CandidateSets c, std::vector<std::size_t> missing,
    const std::vector<bool>& allowed_sources = {}) {
  if (missing.empty()) throw Error(Errc::invalid_argument, "complete_missing: no missing views");
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());

  std::vector<CompletionEdge> edges;
  for (std::size_t x : missing) {
    detail::require_view(e, x, "missing view");
    std::optional<std::size_t> best;
    for (std::size_t a = 0; a < e.size(); ++a) {
      if (a == x || !std::isfinite(e(a, x))) continue;
      if (!allowed_sources.empty() && !allowed_sources[a]) continue;
      if (!best || e(a, x) < e(*best, x)) best = a;
    }
    if (!best) {
      throw Error(Errc::isolated_view,
                  "view " + std::to_string(x) + " has no finite incoming baseline");
    }
    auto& list = c.lists[*best];
    if (std::find(list.begin(), list.end(), x) == list.end()) {
      list.push_back(x);
      edges.emplace_back(*best, x);
    }
  }
  return {std::move(c), std::move(edges)};
}

/// Full pipeline: candidate sets, start view, traversal, and completion until
/// every view is marked.
///
/// The first completion per missing view uses the global best source. A source
/// that is itself unreachable can leave x missing; when the best-source edge is
/// already present, the next completion draws the source from the marked views
/// only, so every round adds at least one new edge or marks a new view.
inline Selection select_views(const ResistanceMatrix& e, std::size_t k = kDefaultCandidateCount) {
  Selection sel;
  sel.candidates = candidate_sets(e, k);
  auto& report = sel.report;
  report.start_view = global_min_start(e);

  const std::size_t n = e.size();
  for (;;) {
    report.marked = mark_reachable(e, sel.candidates, report.start_view);
    ++report.iterations;
    if (report.marked.size() == n) break;

    std::vector<bool> is_marked(n, false);
    for (std::size_t v : report.marked) is_marked[v] = true;
    std::vector<std::size_t> missing;
    for (std::size_t v = 0; v < n; ++v) {
      if (!is_marked[v]) missing.push_back(v);
    }
    if (report.iterations == 1) report.missing_before_completion = missing;

    auto [updated, edges] = complete_missing(e, sel.candidates, missing);
    if (edges.empty()) {
      std::tie(updated, edges) = complete_missing(e, sel.candidates, missing, is_marked);
      if (edges.empty()) {
        throw Error(Errc::isolated_view, "completion cannot reach view " +
                                             std::to_string(missing.front()));
      }
    }
    sel.candidates = std::move(updated);
    report.completion_edges.insert(report.completion_edges.end(), edges.begin(), edges.end());
  }
  return sel;
}

/// Unordered view pairs (a < b) implied by candidate sets.
inline std::vector<std::pair<std::size_t, std::size_t>> candidate_pairs(const CandidateSets& c) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < c.lists.size(); ++i) {
    for (std::size_t j : c.lists[i]) pairs.emplace_back(std::min(i, j), std::max(i, j));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

}  // namespace ervs
