#include <gtest/gtest.h>

#include <set>

#include "ervs/view_selection.hpp"
#include "test_support.hpp"

using namespace ervs;

namespace {

constexpr double inf = kSentinel;

ResistanceMatrix random_matrix(test::Rng& rng, std::size_t n, double sentinel_rate,
                               bool coarse = false) {
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || rng.uniform(0, 1) < sentinel_rate) continue;
      // Coarse values force ties.
      rows[i][j] = coarse ? std::floor(rng.uniform(0, 4)) * 0.25 + 0.1 : rng.uniform(0.01, 2.0);
    }
  }
  return ResistanceMatrix::from_rows(rows);
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(CandidateSets, AscendingByRow) {
  const auto e = ResistanceMatrix::from_rows(
      {{inf, 0.5, 0.2, 0.9}, {0.1, inf, 0.3, 0.2}, {1, 2, inf, 3}, {1, 1, 1, inf}});
  const auto c = candidate_sets(e, 2);
  EXPECT_EQ(c.lists[0], (std::vector<std::size_t>{2, 1}));
  EXPECT_EQ(c.lists[1], (std::vector<std::size_t>{0, 3}));
}

TEST(CandidateSets, TieBreakBySmallerIndex) {
  const auto e = ResistanceMatrix::from_rows(
      {{inf, 0.3, 0.3, 0.7}, {1, inf, 1, 1}, {1, 1, inf, 1}, {1, 1, 1, inf}});
  EXPECT_EQ(candidate_sets(e, 1).lists[0], (std::vector<std::size_t>{1}));
}

TEST(CandidateSets, KClampedToAvailable) {
  const auto e = ResistanceMatrix::from_rows(
      {{inf, 1, 2, 3}, {1, inf, 2, 3}, {1, 2, inf, 3}, {1, 2, 3, inf}});
  const auto c = candidate_sets(e, 10);
  for (const auto& list : c.lists) EXPECT_EQ(list.size(), 3u);
}

TEST(CandidateSets, SentinelsNeverSelectedAndIsolatedViewError) {
  const auto e = ResistanceMatrix::from_rows({{inf, inf, 0.4}, {0.2, inf, 0.1}, {0.3, 0.5, inf}});
  EXPECT_EQ(candidate_sets(e, 5).lists[0], (std::vector<std::size_t>{2}));
  const auto iso = ResistanceMatrix::from_rows({{inf, inf, inf}, {0.2, inf, 0.1}, {0.3, 0.5, inf}});
  try {
    candidate_sets(iso, 2);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::isolated_view);
    EXPECT_NE(std::string(err.what()).find("view 0"), std::string::npos);
  }
  EXPECT_THROW(candidate_sets(e, 0), Error);
}

TEST(CandidateSets, MatchesBruteForce) {
  test::Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(14);
    const std::size_t k = 1 + rng.index(7);
    const auto e = random_matrix(rng, n, 0.15, trial % 2 == 0);
    CandidateSets c;
    try {
      c = candidate_sets(e, k);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = e.row(i);
      EXPECT_EQ(c.lists[i], test::brute_k_smallest({row.begin(), row.end()}, i, k));
    }
  }
}

TEST(GlobalMinStart, Cases) {
  EXPECT_EQ(global_min_start(ResistanceMatrix::from_rows(
                {{inf, 1, 1}, {1, inf, 1}, {0.1, 1, inf}})),
            2u);
  EXPECT_EQ(global_min_start(ResistanceMatrix::from_rows(
                {{inf, 1, 1, 0.2}, {1, inf, 0.2, 1}, {1, 1, inf, 1}, {1, 1, 1, inf}})),
            0u);
  try {
    global_min_start(ResistanceMatrix::from_rows({{inf, inf}, {inf, inf}}));
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::no_valid_baseline);
  }
}

TEST(MarkReachable, HandTraversals) {
  const auto e = ResistanceMatrix::from_rows({{inf, 1, 2}, {1, inf, 2}, {1, 2, inf}});
  CandidateSets c{1, {{1}, {0}, {0}}};
  EXPECT_EQ(as_set(mark_reachable(e, c, 0)), (std::set<std::size_t>{0, 1}));

  CandidateSets full{2, {{1, 2}, {0, 2}, {0, 1}}};
  EXPECT_EQ(as_set(mark_reachable(e, full, 0)), (std::set<std::size_t>{0, 1, 2}));

  CandidateSets chain{1, {{1}, {2}, {1}}};
  EXPECT_EQ(mark_reachable(e, chain, 0), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(MarkReachable, BacktracksToSecondBest) {
  // 0 -> {1, 2} with 1 cheaper; 1 -> {0}: after 1 is exhausted the traversal
  // returns to 0 and takes its second-best candidate 2.
  const auto e = ResistanceMatrix::from_rows(
      {{inf, 0.1, 0.2, 9}, {0.1, inf, 9, 9}, {9, 9, inf, 0.3}, {0.3, 9, 9, inf}});
  CandidateSets c{2, {{1, 2}, {0}, {3}, {0}}};
  EXPECT_EQ(mark_reachable(e, c, 0), (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(MarkReachable, EqualsBfsOracle) {
  test::Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.index(20);
    const auto e = random_matrix(rng, n, 0.0);
    CandidateSets c;
    c.lists.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t deg = rng.index(4);
      for (std::size_t d = 0; d < deg; ++d) {
        const std::size_t j = rng.index(n);
        if (j != i && std::find(c.lists[i].begin(), c.lists[i].end(), j) == c.lists[i].end()) {
          c.lists[i].push_back(j);
        }
      }
    }
    const std::size_t start = rng.index(n);
    const auto order = mark_reachable(e, c, start);
    EXPECT_EQ(as_set(order).size(), order.size());
    EXPECT_EQ(as_set(order), test::bfs_reachable(c.lists, start));
    EXPECT_EQ(order.front(), start);
  }
}

TEST(CompleteMissing, BestIncomingSource) {
  const auto e = ResistanceMatrix::from_rows({{inf, 0.1, 0.3}, {0.1, inf, 0.7}, {0.5, 0.5, inf}});
  CandidateSets c{1, {{1}, {0}, {0}}};
  auto [updated, edges] = complete_missing(e, c, {2});
  EXPECT_EQ(edges, (std::vector<CompletionEdge>{{0, 2}}));
  EXPECT_EQ(updated.lists[0], (std::vector<std::size_t>{1, 2}));

  auto [again, none] = complete_missing(e, updated, {2});
  EXPECT_TRUE(none.empty());
  EXPECT_EQ(again.lists[0], (std::vector<std::size_t>{1, 2}));
}

TEST(CompleteMissing, SharedSourceAppendsInAscendingOrder) {
  const auto e = ResistanceMatrix::from_rows(
      {{inf, 0.1, 0.2, 0.2}, {0.1, inf, 0.9, 0.9}, {0.5, 0.5, inf, 0.9}, {0.5, 0.5, 0.9, inf}});
  CandidateSets c{1, {{1}, {0}, {0}, {0}}};
  auto [updated, edges] = complete_missing(e, c, {3, 2});
  EXPECT_EQ(edges, (std::vector<CompletionEdge>{{0, 2}, {0, 3}}));
  EXPECT_EQ(updated.lists[0], (std::vector<std::size_t>{1, 2, 3}));
}

TEST(CompleteMissing, IsolatedColumn) {
  const auto e = ResistanceMatrix::from_rows({{inf, 0.1, inf}, {0.1, inf, inf}, {0.5, 0.5, inf}});
  CandidateSets c{1, {{1}, {0}, {0}}};
  try {
    complete_missing(e, c, {2});
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), Errc::isolated_view);
  }
}

TEST(SelectViews, TwoViews) {
  const auto e = ResistanceMatrix::from_rows({{inf, 0.4}, {0.3, inf}});
  const auto sel = select_views(e, 5);
  EXPECT_EQ(sel.candidates.lists, (std::vector<std::vector<std::size_t>>{{1}, {0}}));
  EXPECT_EQ(sel.report.marked.size(), 2u);
  EXPECT_TRUE(sel.report.completion_edges.empty());
  EXPECT_EQ(sel.report.start_view, 1u);
  EXPECT_EQ(sel.report.iterations, 1u);
}

TEST(SelectViews, InflatedColumnGetsOneCompletionEdge) {
  test::Rng rng(9);
  std::vector<std::vector<double>> rows(8, std::vector<double>(8, inf));
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 8; ++j) {
      if (i != j) rows[i][j] = rng.uniform(0.1, 1.0);
    }
  }
  for (std::size_t i = 0; i < 8; ++i) {
    if (i != 4) rows[i][4] = 10.0 + static_cast<double>(i);
    if (i != 4) rows[4][i] = rng.uniform(2.0, 3.0);
  }
  const auto e = ResistanceMatrix::from_rows(rows);
  const auto sel = select_views(e, 3);
  ASSERT_EQ(sel.report.completion_edges.size(), 1u);
  EXPECT_EQ(sel.report.completion_edges[0], (CompletionEdge{0, 4}));
  EXPECT_EQ(sel.report.missing_before_completion, (std::vector<std::size_t>{4}));
  EXPECT_EQ(sel.report.marked.size(), 8u);
  EXPECT_EQ(sel.report.iterations, 2u);
}

TEST(SelectViews, IteratesWhenBestSourceIsUnreachable) {
  // Views 2 and 3 are each other's best source and already rank each other,
  // so the best-source rule adds nothing; completion then draws from the
  // marked views {0, 1}.
  const auto e = ResistanceMatrix::from_rows({{inf, 0.1, 5, 6},
                                              {0.1, inf, 7, 8},
                                              {9, 9, inf, 0.2},
                                              {9, 9, 0.2, inf}});
  const auto sel = select_views(e, 1);
  EXPECT_EQ(sel.report.marked.size(), 4u);
  EXPECT_EQ(sel.report.completion_edges,
            (std::vector<CompletionEdge>{{0, 2}, {0, 3}}));
  EXPECT_EQ(sel.report.iterations, 2u);
}

TEST(SelectViews, CoverageOnRandomMatrices) {
  test::Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + rng.index(25);
    const auto e = random_matrix(rng, n, 0.3);
    Selection sel;
    try {
      sel = select_views(e, 1 + rng.index(5));
    } catch (const Error& err) {
      EXPECT_EQ(err.code(), Errc::isolated_view);
      continue;
    }
    EXPECT_EQ(sel.report.marked.size(), n);
    EXPECT_EQ(test::bfs_reachable(sel.candidates.lists, sel.report.start_view).size(), n);
    std::set<std::size_t> covered;
    for (const auto& list : sel.candidates.lists) covered.insert(list.begin(), list.end());
    covered.insert(sel.report.start_view);
    EXPECT_EQ(covered.size(), n);
    EXPECT_EQ(sel.report.completion_edges.empty(), sel.report.missing_before_completion.empty());
  }
}

TEST(SelectViews, MonotoneInvariance) {
  test::Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.index(15);
    const auto e = random_matrix(rng, n, 0.2);
    std::vector<std::vector<double>> cubed(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double v = e(i, j);
        cubed[i][j] = std::isfinite(v) ? v * v * v : v;
      }
    }
    const auto e3 = ResistanceMatrix::from_rows(cubed);
    const std::size_t k = 1 + rng.index(4);
    try {
      const auto a = select_views(e, k);
      const auto b = select_views(e3, k);
      EXPECT_EQ(a.candidates, b.candidates);
      EXPECT_EQ(a.report.start_view, b.report.start_view);
      EXPECT_EQ(a.report.completion_edges, b.report.completion_edges);
      EXPECT_EQ(a.report.marked, b.report.marked);
    } catch (const Error&) {
      EXPECT_THROW(select_views(e3, k), Error);
    }
  }
}

TEST(CandidatePairs, DeduplicatesUnordered) {
  CandidateSets c{2, {{1, 2}, {0}, {0, 1}}};
  EXPECT_EQ(candidate_pairs(c),
            (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}, {1, 2}}));
}
