#include <gtest/gtest.h>

#include <bats/degree_optimization.hpp>

#include <cmath>
#include <map>

using namespace bats;

namespace {

struct Instance {
  int M = 3, D = 12;
  double q = 4, theta = 2.0;
  RankDistribution h{3, {0.1, 0.2, 0.3, 0.4}};
  DegreeDistribution psi;
  Instance() {
    std::vector<double> v(D, 0.0);
    v[0] = 0.05, v[1] = 0.15, v[2] = 0.2, v[4] = 0.25, v[7] = 0.15, v[11] = 0.2;
    psi = DegreeDistribution(D, v);
  }
};

// Direct numerical integration of the edge-density ODE system with RK4.
struct OdeOracle {
  const Instance& s;
  explicit OdeOracle(const Instance& st) : s(st) {}
  std::size_t idx(int d, int r) const { return static_cast<std::size_t>(d) * (s.M + 1) + r; }
  std::size_t size() const { return idx(s.D + 1, 0) + 1; }  // last slot holds rho0

  std::vector<double> deriv(double tau, const std::vector<double>& y) const {
    std::vector<double> dy(size(), 0.0);
    auto at = [&](int d, int r) { return d <= s.D && r <= s.M && r < d ? y[idx(d, r)] : 0.0; };
    for (int d = 2; d <= s.D; ++d)
      for (int r = 1; r <= std::min(d - 1, s.M); ++r)
        dy[idx(d, r)] = (alpha_dr(d + 1, r, s.q) * at(d + 1, r) + (1 - alpha_dr(d + 1, r + 1, s.q)) * at(d + 1, r + 1) -
                         at(d, r)) * d / (s.theta - tau);
    double acc = 0;
    for (int r = 1; r <= s.M; ++r) acc += r * alpha_dr(r + 1, r, s.q) * at(r + 1, r);
    dy.back() = (acc - y.back()) / (s.theta - tau) - 1.0;
    return dy;
  }

  std::vector<std::vector<double>> run(const std::vector<double>& xs) const {
    std::vector<double> y(size(), 0.0);
    for (int d = 2; d <= s.D; ++d)
      for (int r = 1; r <= std::min(d - 1, s.M); ++r) y[idx(d, r)] = initial_edge_density(s.psi, s.h, s.q, d, r);
    for (int r = 1; r <= s.M; ++r) y.back() += initial_edge_density(s.psi, s.h, s.q, r, r);
    std::vector<std::vector<double>> out;
    double tau = 0;
    const double step = 1e-4;
    for (double x : xs) {
      double target = x * s.theta;
      while (tau < target - 1e-15) {
        double hstep = std::min(step, target - tau);
        auto k1 = deriv(tau, y);
        std::vector<double> t(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] + hstep / 2 * k1[i];
        auto k2 = deriv(tau + hstep / 2, t);
        for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] + hstep / 2 * k2[i];
        auto k3 = deriv(tau + hstep / 2, t);
        for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] + hstep * k3[i];
        auto k4 = deriv(tau + hstep, t);
        for (std::size_t i = 0; i < y.size(); ++i) y[i] += hstep / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        tau += hstep;
      }
      out.push_back(y);
    }
    return out;
  }
};

// rho0 via the hat-rho recursion and incomplete beta sums.
double rho0_by_recursion(const Instance& s, double x) {
  double acc = 0, base = 0;
  for (int r = 1; r <= s.M; ++r) base += initial_edge_density(s.psi, s.h, s.q, r, r);
  for (int d = 2; d <= s.D; ++d) {
    std::vector<double> cur(s.M + 2, 0.0), nxt(s.M + 2, 0.0);
    for (int r = 1; r <= std::min(d, s.M); ++r) cur[r] = initial_edge_density(s.psi, s.h, s.q, d, r);
    std::map<int, std::vector<double>> iter;
    iter[0] = cur;
    for (int i = 0; i < d - 1; ++i) {
      for (int r = 1; r <= s.M; ++r)
        nxt[r] = alpha_dr(d - i, r, s.q) * cur[r] + (r + 1 <= s.M ? (1 - alpha_dr(d - i, r + 1, s.q)) * cur[r + 1] : 0);
      cur = nxt;
      iter[i + 1] = cur;
    }
    for (int r = 1; r <= std::min(d - 1, s.M); ++r)
      acc += alpha_dr(r + 1, r, s.q) * iter[d - r - 1][r] * inc_beta(d - r, r, x);
  }
  return (1 - x) * (acc + base + s.theta * std::log1p(-x));
}

}  // namespace

TEST(Evolution, InitialValues) {
  Instance s;
  auto c = density_evolution(s.psi, s.h, s.q, s.theta, {0.0, 0.1}, true);
  auto e = effective_dist(s.h, s.q);
  double r0 = 0;
  for (int r = 1; r <= s.M; ++r) r0 += r * s.psi.at(r) * e.hbar_prime[r];
  EXPECT_NEAR(c.rho0[0], r0, 1e-14);
  for (int d = 2; d <= s.D; ++d)
    for (int r = 1; r <= std::min(d - 1, s.M); ++r) {
      double expect = 0;
      for (int k = r; k <= s.M; ++k) expect += zeta_dkr(d, k, r, s.q) * s.h[k];
      EXPECT_NEAR(c.rho(d, r, 0), d * s.psi.at(d) * expect, 1e-14);
    }
}

TEST(Evolution, ClosedFormMatchesOdeIntegration) {
  Instance s;
  std::vector<double> xs = {0.05, 0.2, 0.4, 0.6, 0.8, 0.9};
  auto c = density_evolution(s.psi, s.h, s.q, s.theta, xs, true);
  OdeOracle ode(s);
  auto ys = ode.run(xs);
  for (std::size_t k = 0; k < xs.size(); ++k) {
    EXPECT_NEAR(c.rho0[k], ys[k].back(), 1e-6) << xs[k];
    for (int d = 2; d <= s.D; ++d)
      for (int r = 1; r <= std::min(d - 1, s.M); ++r) EXPECT_NEAR(c.rho(d, r, k), ys[k][ode.idx(d, r)], 1e-6);
  }
}

TEST(Evolution, OmegaFormMatchesRecursionForm) {
  Instance s;
  std::vector<double> xs;
  for (int i = 1; i < 20; ++i) xs.push_back(i / 20.0);
  auto c = density_evolution(s.psi, s.h, s.q, s.theta, xs);
  for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_NEAR(c.rho0[k], rho0_by_recursion(s, xs[k]), 1e-10);
}

TEST(Evolution, ZeroRateStaysNonnegative) {
  Instance s;
  std::vector<double> xs;
  for (int i = 0; i < 100; ++i) xs.push_back(i / 100.0);
  auto c = density_evolution(s.psi, s.h, s.q, 0.0, xs);
  for (double v : c.rho0) EXPECT_GE(v, 0.0);
  EXPECT_FALSE(c.first_crossing.has_value());
}

TEST(Evolution, CrossingMovesLeftAsRateGrows) {
  auto h = line_rank_dist(16, {0.2, 0.1}, 256);
  auto r = optimize_p1(h, 256, 0.01);
  std::vector<double> xs;
  for (int i = 0; i < 1000; ++i) xs.push_back(i / 1000.0);
  auto below = density_evolution(r.psi, h, 256, 0.95 * r.value, xs);
  double prev = 1.0;
  EXPECT_FALSE(below.first_crossing.has_value() && *below.first_crossing < 0.99);
  for (double f : {1.1, 1.5, 3.0, 10.0}) {
    auto c = density_evolution(r.psi, h, 256, f * r.value, xs);
    ASSERT_TRUE(c.first_crossing.has_value());
    EXPECT_LE(*c.first_crossing, prev);
    prev = *c.first_crossing;
  }
  EXPECT_LT(prev, 0.2);
}

TEST(Evolution, GridValidation) {
  Instance s;
  EXPECT_THROW(density_evolution(s.psi, s.h, s.q, 1.0, {0.2, 0.1}), Error);
  EXPECT_THROW(density_evolution(s.psi, s.h, s.q, 1.0, {1.0}), Error);
}

#include <bats/bp_trajectory.hpp>

TEST(Fenwick, PrefixSumsAndSearch) {
  Fenwick f(10);
  std::vector<std::int64_t> w{3, 0, 5, 1, 0, 0, 2, 7, 0, 4};
  for (std::size_t i = 0; i < w.size(); ++i) f.set(i, w[i]);
  f.set(2, 4);
  w[2] = 4;
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    EXPECT_EQ(f.sum(i), acc);
    for (std::int64_t u = acc; u < acc + w[i]; ++u) EXPECT_EQ(f.find(u), i);
    acc += w[i];
  }
  EXPECT_EQ(f.total(), acc);
}

namespace {

struct BpSetup {
  RankDistribution h = line_rank_dist(16, {0.2, 0.1}, 256);
  DegreeDistribution psi;
  double threshold;
  BpSetup() {
    psi = optimize_p1(h, 256, 0.01).psi;
    threshold = achievable_theta(psi, h, 256, 0.01, 2000);
  }
};

const BpSetup& setup() {
  static const BpSetup s;
  return s;
}

}  // namespace

TEST(BpTrajectory, FollowsEvolutionWellBelowThreshold) {
  const auto& F = field(8);
  const auto& s = setup();
  const std::size_t K = 10000, trials = 50;
  const double theta = 0.6 * s.threshold;
  const auto n = static_cast<std::size_t>(std::llround(K / theta));
  std::vector<double> mean(static_cast<std::size_t>(0.9 * K) + 1, 0.0);
  // Early stalls happen at finite length; the mean is over completed runs.
  std::size_t done = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    auto tr = bp_trajectory(F, s.psi, s.h, K, n, 500 + i);
    if (tr.decoded < 0.99 * K) continue;
    ++done;
    for (std::size_t t = 0; t < mean.size(); ++t) mean[t] += static_cast<double>(tr.R0[t]) / n;
  }
  EXPECT_GE(done, 0.95 * trials);
  for (auto& m : mean) m /= static_cast<double>(done);
  std::vector<double> grid;
  for (std::size_t t = 0; t < mean.size(); ++t) grid.push_back(static_cast<double>(t) / K);
  auto c = density_evolution(s.psi, s.h, 256, static_cast<double>(K) / n, grid);
  double sup = 0;
  for (std::size_t t = 0; t < mean.size(); ++t) sup = std::max(sup, std::abs(mean[t] - c.rho0[t]));
  EXPECT_LT(sup, 0.05);
}

TEST(BpTrajectory, StallsNearTheFirstCrossing) {
  const auto& F = field(8);
  const auto& s = setup();
  const std::size_t K = 4000, trials = 10;
  const double theta = 1.3 * s.threshold;
  const auto n = static_cast<std::size_t>(std::llround(K / theta));
  std::vector<double> grid;
  for (int i = 0; i < 10000; ++i) grid.push_back(i / 10000.0);
  auto c = density_evolution(s.psi, s.h, 256, static_cast<double>(K) / n, grid);
  ASSERT_TRUE(c.first_crossing.has_value());
  double stall = 0;
  for (std::size_t i = 0; i < trials; ++i)
    stall += static_cast<double>(bp_trajectory(F, s.psi, s.h, K, n, 900 + i).decoded) / K / trials;
  EXPECT_NEAR(stall, *c.first_crossing, 0.05);
}
