#include <gtest/gtest.h>

#include <bats/network_sim.hpp>

#include <cmath>

using namespace bats;

namespace {

SchemeConfig config(SchemeTag s, int M, std::uint32_t n, std::uint64_t seed = 1) {
  SchemeConfig c;
  c.scheme = s;
  c.M = M;
  c.batches = n;
  c.seed = seed;
  return c;
}

double tv(const RankDistribution& a, const RankDistribution& b) { return total_variation(a.h, b.h); }

// Every received column satisfies y = X h with the source batch X.
bool faithful(const GaloisField& F, const DestinationTrace& t, const BatchSource& src) {
  for (const auto& e : t.entries) {
    if (e.columns() == 0) continue;
    Matrix X = src(t.group, e.batch);
    for (int j = 0; j < e.columns(); ++j) {
      std::vector<Symbol> y(X.cols(), 0);
      for (int i = 0; i < t.width; ++i) F.axpy(y.data(), X.row(i), e.H(i, j), X.cols());
      if (!std::equal(y.begin(), y.end(), e.Y.row(j))) return false;
    }
  }
  return true;
}

BatchSource payloads(const GaloisField& F, int width, int T, std::uint64_t seed) {
  return [&F, width, T, seed](int g, std::uint32_t b) {
    RandomStream s(seed, Domain::payload, {static_cast<std::uint64_t>(g), b});
    return random_matrix(F, width, T, s);
  };
}

}  // namespace

TEST(Line, LosslessSingleHop) {
  const auto& F = field(8);
  auto r = run_scheme(line_topology({0.0}), config(SchemeTag::line, 6, 50));
  const auto& t = r.trace("t");
  ASSERT_EQ(t.entries.size(), 50u);
  for (const auto& e : t.entries) {
    EXPECT_EQ(e.H, Matrix::identity(6));
    EXPECT_EQ(rank(F, e.H), 6u);
  }
}

TEST(Line, MatchesRecursionTwoHops) {
  const auto& F = field(8);
  auto r = run_scheme(line_topology({0.2, 0.1}), config(SchemeTag::line, 16, 10000, 3));
  EXPECT_LT(tv(trace_rank_dist(F, r.trace("t")), line_rank_dist(16, {0.2, 0.1}, 256)), 0.02);
}

TEST(Line, MatchesRecursionOverGf2) {
  const auto& F = field(1);
  auto c = config(SchemeTag::line, 4, 100000, 4);
  c.q = 2;
  auto r = run_scheme(line_topology({0.3, 0.3}), c);
  EXPECT_LT(tv(trace_rank_dist(F, r.trace("t")), line_rank_dist(4, {0.3, 0.3}, 2)), 0.01);
}

TEST(Line, BatchSizeOneDecaysGeometrically) {
  const auto& F = field(8);
  for (int k = 1; k <= 8; ++k) {
    auto r = run_scheme(line_topology(std::vector<double>(k, 0.2)), config(SchemeTag::line, 1, 20000, 10 + k));
    double e = expected_rank(trace_rank_dist(F, r.trace("t")));
    double want = std::pow(0.8, k) * std::pow(1 - 1.0 / 256, k - 1);
    EXPECT_NEAR(e / want, 1.0, 0.03) << k;
  }
}

TEST(Line, BufferBoundAndPipelineDelay) {
  auto r = run_scheme(line_topology({0.1, 0.1, 0.1, 0.1}), config(SchemeTag::line, 8, 200));
  for (const char* v : {"v1", "v2", "v3"}) EXPECT_LE(r.max_buffer.at(v), 7) << v;
  EXPECT_EQ(r.max_buffer.at("v1"), 7);
  // Three intermediate nodes each add M - 1 slots.
  EXPECT_EQ(r.slots, 200u * 8 + 3 * 7);
  EXPECT_EQ(r.isolation_violations, 0);
}

TEST(Line, PayloadsFollowCodingVectors) {
  const auto& F = field(8);
  auto c = config(SchemeTag::line, 8, 100);
  c.T = 5;
  auto src = payloads(F, 8, 5, 9);
  auto r = run_scheme(line_topology({0.2, 0.2, 0.2}), c, src);
  EXPECT_TRUE(faithful(F, r.trace("t"), src));
}

TEST(Line, Deterministic) {
  const auto& F = field(8);
  auto c = config(SchemeTag::line, 8, 300, 42);
  auto a = run_scheme(line_topology({0.2, 0.3}), c);
  auto b = run_scheme(line_topology({0.2, 0.3}), c);
  EXPECT_EQ(trace_csv(F, a), trace_csv(F, b));
  c.seed = 43;
  EXPECT_NE(trace_csv(F, a), trace_csv(F, run_scheme(line_topology({0.2, 0.3}), c)));
}

TEST(Line, RejectsOtherTopologies) {
  EXPECT_THROW(run_scheme(butterfly_topology(0.1), config(SchemeTag::line, 4, 2)), Error);
  EXPECT_THROW(run_scheme(line_topology({0.1}), config(SchemeTag::butterfly, 4, 2)), Error);
  EXPECT_THROW(run_scheme(line_topology({0.1, 0.1, 0.1}), config(SchemeTag::two_way_relay, 4, 2)), Error);
}

TEST(Shrink, ExpectedRankOfShrunkOuterBatch) {
  const auto& F = field(8);
  int Mt = shrink_batch(64, 0.5, 0.05);
  auto c = config(SchemeTag::line, 64, 3000, 5);
  auto full = run_scheme(line_topology({0.5}), c);
  c.M_tilde = Mt;
  auto shrunk = run_scheme(line_topology({0.5}), c);
  double e_full = expected_rank(trace_rank_dist(F, full.trace("t")));
  double e_shrunk = expected_rank(trace_rank_dist(F, shrunk.trace("t")));
  EXPECT_EQ(shrunk.trace("t").width, Mt);
  EXPECT_NEAR(e_shrunk / std::min<double>(Mt, e_full), 1.0, 0.02);
}

TEST(Shrink, PayloadsFollowCodingVectors) {
  const auto& F = field(8);
  auto c = config(SchemeTag::line, 16, 40);
  c.M_tilde = 9;
  c.T = 4;
  auto src = payloads(F, 9, 4, 3);
  auto r = run_scheme(line_topology({0.3, 0.3}), c, src);
  EXPECT_TRUE(faithful(F, r.trace("t"), src));
}

TEST(Unicast, SplitRunsOnePathPerGroup) {
  const auto& F = field(8);
  auto t = butterfly_topology(0.2);
  // Use t as the only destination.
  t.nodes[t.node("u")].role = Role::intermediate;
  auto r = run_scheme(t, config(SchemeTag::unicast_split, 8, 2000));
  ASSERT_EQ(r.traces.size(), 2u);
  // Path s-a-t has 2 hops; path s-b-c-d-t has 4.
  auto e0 = expected_rank(trace_rank_dist(F, r.trace("t", 0)));
  auto e1 = expected_rank(trace_rank_dist(F, r.trace("t", 1)));
  EXPECT_NEAR(e0, expected_rank(line_rank_dist(8, {0.2, 0.2}, 256)), 0.1);
  EXPECT_NEAR(e1, expected_rank(line_rank_dist(8, {0.2, 0.2, 0.2, 0.2}, 256)), 0.1);
}

TEST(Unicast, JointAveragesThePaths) {
  const auto& F = field(8);
  auto t = butterfly_topology(0.2);
  t.nodes[t.node("u")].role = Role::intermediate;
  auto r = run_scheme(t, config(SchemeTag::unicast_joint, 8, 8000, 6));
  auto h = trace_rank_dist(F, r.trace("t"));
  auto a = line_rank_dist(8, {0.2, 0.2}, 256), b = line_rank_dist(8, {0.2, 0.2, 0.2, 0.2}, 256);
  std::vector<double> avg(9);
  for (int k = 0; k <= 8; ++k) avg[k] = (a.h[k] + b.h[k]) / 2;
  EXPECT_LT(total_variation(h.h, avg), 0.03);
}

TEST(Unicast, HomogenizedNetworkKeepsTheMinCut) {
  const auto& F = field(8);
  auto c = config(SchemeTag::unicast_joint, 16, 4000, 7);
  c.homogenize = 10;
  auto r = run_scheme(line_topology({0.2, 0.1}), c);
  // Eight virtual paths, each a two-hop line with erasure 0.9.
  auto h = trace_rank_dist(F, r.trace("t"));
  EXPECT_LT(tv(h, line_rank_dist(16, {0.9, 0.9}, 256)), 0.03);
}

TEST(TwoWay, CancellationMatchesLine) {
  const auto& F = field(8);
  auto topo = line_topology({0.2, 0.1});
  auto r = run_scheme(topo, config(SchemeTag::two_way_relay, 8, 10000, 8));
  EXPECT_LT(tv(trace_rank_dist(F, r.trace("t", 0)), line_rank_dist(8, {0.2, 0.1}, 256)), 0.02);
  // Reverse direction: hops t-a (0.1) then a-s (0.2).
  EXPECT_LT(tv(trace_rank_dist(F, r.trace("s", 1)), line_rank_dist(8, {0.1, 0.2}, 256)), 0.02);
  EXPECT_EQ(r.slots, 10000u * 8 * 3);
}

TEST(TwoWay, CancellationIsExact) {
  const auto& F = field(8);
  auto c = config(SchemeTag::two_way_relay, 6, 100);
  c.T = 4;
  auto src = payloads(F, 6, 4, 11);
  auto r = run_scheme(line_topology({0.2, 0.3}), c, src);
  EXPECT_TRUE(faithful(F, r.trace("t", 0), src));
  EXPECT_TRUE(faithful(F, r.trace("s", 1), src));
}

TEST(TwoWay, PhysicalLayerCodingCases) {
  const auto& F = field(8);
  auto c = config(SchemeTag::two_way_relay_pnc, 6, 100, 12);
  c.T = 3;
  auto src = payloads(F, 6, 3, 12);
  auto r = run_scheme(line_topology({0.2, 0.3}), c, src);
  EXPECT_TRUE(faithful(F, r.trace("t", 0), src));
  EXPECT_TRUE(faithful(F, r.trace("s", 1), src));
  EXPECT_EQ(r.slots, 100u * 6 * 2);
  // Lossless links: the relay sees M combinations of both sides.
  auto clean = run_scheme(line_topology({0.0, 0.0}), config(SchemeTag::two_way_relay_pnc, 6, 50));
  for (int rk : clean.trace("t", 0).ranks(F)) EXPECT_EQ(rk, 6);
}

TEST(Tree, ThreeLayerEachDestinationSeesTwoTrees) {
  const auto& F = field(8);
  auto r = run_scheme(three_layer_topology(0.0), config(SchemeTag::tree_multicast, 4, 300));
  for (const char* d : {"t0", "t1", "t2"}) {
    auto h = trace_rank_dist(F, r.trace(d));
    // Lossless links; only recoding over a finite field can lose rank.
    EXPECT_NEAR(h.h[0], 1.0 / 3, 1e-12) << d;
    EXPECT_NEAR(h.h[4], 2.0 / 3, 0.01) << d;
  }
}

TEST(Tree, LeavesOfEqualDepthAgree) {
  const auto& F = field(8);
  auto r = run_scheme(three_layer_topology(0.2), config(SchemeTag::tree_multicast, 8, 6000, 13));
  auto a = trace_rank_dist(F, r.trace("t0")), b = trace_rank_dist(F, r.trace("t1"));
  EXPECT_LT(tv(a, b), 0.03);
}

TEST(Butterfly, DestinationsAgree) {
  const auto& F = field(8);
  auto r = run_scheme(butterfly_topology(0.2), config(SchemeTag::butterfly, 32, 10000, 14));
  auto ht = trace_rank_dist(F, r.trace("t")), hu = trace_rank_dist(F, r.trace("u"));
  EXPECT_LT(tv(ht, hu), 0.03);
  EXPECT_EQ(r.trace("t").width, 64);
  EXPECT_LE(r.max_buffer.at("c"), 62);
  EXPECT_LE(r.max_buffer.at("a"), 62);
  EXPECT_EQ(r.isolation_violations, 0);
}

TEST(Butterfly, LatencyNeedsLargerBufferAtC) {
  auto r0 = run_scheme(butterfly_topology(0.0), config(SchemeTag::butterfly, 8, 100));
  EXPECT_EQ(r0.max_buffer.at("c"), 14);
  auto r = run_scheme(butterfly_topology(0.0, 0, 5), config(SchemeTag::butterfly, 8, 100));
  EXPECT_GT(r.max_buffer.at("c"), 14);
  EXPECT_LE(r.max_buffer.at("c"), 14 + 2 * 5);
  EXPECT_EQ(r.isolation_violations, 0);
}

TEST(Butterfly, PayloadsFollowCodingVectors) {
  const auto& F = field(8);
  auto c = config(SchemeTag::butterfly, 4, 60);
  c.T = 3;
  auto src = payloads(F, 8, 3, 15);
  auto r = run_scheme(butterfly_topology(0.2, 2, 0), c, src);
  EXPECT_TRUE(faithful(F, r.trace("t"), src));
  EXPECT_TRUE(faithful(F, r.trace("u"), src));
}

TEST(ButterflySplit, SuccessiveCancellation) {
  const auto& F = field(8);
  auto c = config(SchemeTag::butterfly_split, 4, 200, 16);
  c.T = 3;
  auto src = payloads(F, 4, 3, 16);
  auto r = run_scheme(butterfly_topology(0.1, 0, 3), c, src);
  for (const char* d : {"t", "u"})
    for (int g : {0, 1}) EXPECT_TRUE(faithful(F, r.trace(d, g), src)) << d << g;
  EXPECT_EQ(r.isolation_violations, 0);
  // Lossless: t gets group A straight from a and group B through d.
  auto clean = run_scheme(butterfly_topology(0.0), config(SchemeTag::butterfly_split, 4, 20));
  for (int g : {0, 1}) {
    auto ranks = clean.trace("t", g).ranks(F);
    EXPECT_GE(std::count(ranks.begin(), ranks.end(), 4), 17) << g;
  }
}
