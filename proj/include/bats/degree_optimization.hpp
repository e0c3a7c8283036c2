#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "random_stream.hpp"
#include "rank_distribution.hpp"
#include "simplex.hpp"

namespace bats {

inline std::vector<double> log_factorials(int n) {
  std::vector<double> lf(n + 1, 0.0);
  for (int i = 1; i <= n; ++i) lf[i] = lf[i - 1] + std::log(static_cast<double>(i));
  return lf;
}

// Regularized incomplete beta function for integer a, b >= 1, i.e. the
// upper tail Pr{Bin(a+b-1, x) >= a}.
inline double inc_beta(int a, int b, double x) {
  if (a < 1 || b < 1) throw Error("inc_beta needs integer a, b >= 1");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  int n = a + b - 1;
  auto pmf = [&](int j, double lp, double lq) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0) + j * lp + (n - j) * lq);
  };
  double lx = std::log(x), l1x = std::log1p(-x);
  double s = 0;
  // Sum the tail away from the mean directly; complement the other.
  if (a >= n * x || b <= 2) {
    for (int j = a; j <= n; ++j) s += pmf(j, lx, l1x);
    return std::min(1.0, s);
  }
  for (int j = 0; j < a; ++j) s += pmf(j, lx, l1x);
  return std::max(0.0, 1.0 - s);
}

struct DegreeDistribution {
  int D = 0;
  std::vector<double> psi;  // psi[d-1] = Psi_d

  DegreeDistribution() = default;
  DegreeDistribution(int d, std::vector<double> v) : D(d), psi(std::move(v)) { validate(); }

  static DegreeDistribution point_mass(int d) {
    std::vector<double> v(d, 0.0);
    v[d - 1] = 1.0;
    return {d, v};
  }

  double at(int d) const { return d >= 1 && d <= D ? psi[d - 1] : 0.0; }

  double mean() const {
    double s = 0;
    for (int d = 1; d <= D; ++d) s += d * psi[d - 1];
    return s;
  }

  void validate(double tol = 1e-9) const {
    if (D < 1 || static_cast<int>(psi.size()) != D) throw Error("degree distribution length must equal D >= 1");
    double s = 0;
    for (double v : psi) {
      if (!(v >= -tol)) throw Error("degree distribution has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > tol) throw Error("degree distribution does not sum to 1");
  }
};

inline int max_degree(int M, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw Error("eta must lie in (0,1)");
  double v = M / eta, rv = std::round(v);
  double c = std::abs(v - rv) < 1e-9 * std::max(1.0, v) ? rv : std::ceil(v);
  return static_cast<int>(c) - 1;
}

inline DegreeDistribution baseline_psi(int r, int D) {
  if (r < 1 || r >= D) throw Error("baseline distribution needs 1 <= r < D");
  std::vector<double> v(D, 0.0);
  for (int d = r + 1; d <= D - 1; ++d) v[d - 1] = static_cast<double>(r) / (static_cast<double>(d) * (d - 1));
  v[D - 1] = static_cast<double>(r) / (D - 1);
  return {D, v};
}

// Coefficient of Psi_d in Omega(x):
//   d * ( sum_{r < d} hbar_r I_{d-r,r}(x) + [d <= M] hbar'_d ).
// lf must hold log factorials up to at least d.
inline double omega_coefficient(const EffectiveRankDistribution& e, int d, double x, const std::vector<double>& lf) {
  int rmax = std::min(d - 1, e.M);
  double s = 0;
  if (rmax > 0 && x > 0.0) {
    if (x >= 1.0) {
      for (int r = 1; r <= rmax; ++r) s += e.hbar[r];
    } else {
      // I_{d-r,r}(x) = sum_{j<r} C(d-1,j) (1-x)^j x^{d-1-j}
      double lx = std::log(x), l1x = std::log1p(-x), cum = 0;
      for (int j = 0; j < rmax; ++j) {
        double lt = lf[d - 1] - lf[j] - lf[d - 1 - j] + j * l1x + (d - 1 - j) * lx;
        if (lt > -745.0) cum += std::exp(lt);
        s += e.hbar[j + 1] * cum;
      }
    }
  }
  if (d <= e.M) s += e.hbar_prime[d];
  return d * s;
}

inline double omega(double x, const EffectiveRankDistribution& e, const DegreeDistribution& psi) {
  auto lf = log_factorials(psi.D);
  double s = 0;
  for (int d = 1; d <= psi.D; ++d)
    if (psi.psi[d - 1] != 0.0) s += psi.psi[d - 1] * omega_coefficient(e, d, x, lf);
  return s;
}

// Uniform grid x_i = (1-eta) i / N, i = 1..N.
inline std::vector<double> rate_grid(double eta, int N) {
  std::vector<double> xs(N);
  for (int i = 1; i <= N; ++i) xs[i - 1] = (1.0 - eta) * i / N;
  return xs;
}

struct OptimizeOptions {
  int grid = 100;
  int max_degree = 0;  // 0: derived from M and eta
  int refine = 10;     // verification grid is refine * grid points
  double fixup_mass = 1e-4;
  // Finite-length penalty: theta multiplies -ln(1-x) + (c/K)(1-x)^{c'}.
  double penalty_c = 0;
  double penalty_c_prime = 0;
  double penalty_K = std::numeric_limits<double>::infinity();
};

struct OptimizeResult {
  DegreeDistribution psi;
  double value = 0;     // theta (P1, P2, P4) or alpha (P3) after verification
  double lp_value = 0;  // optimum of the sampled linear program
  double margin = 0;    // min over the fine grid of Omega - value * weight
  LPStatus status = LPStatus::optimal;
  bool empty_support = false;
  bool fixup = false;
};

namespace detail {

inline double rate_weight(double x, const OptimizeOptions& o) {
  double w = -std::log1p(-x);
  if (o.penalty_c > 0 && std::isfinite(o.penalty_K)) w += o.penalty_c / o.penalty_K * std::pow(1.0 - x, o.penalty_c_prime);
  return w;
}

inline double sparse_omega(double x, const EffectiveRankDistribution& e, const DegreeDistribution& psi,
                           const std::vector<double>& lf) {
  double s = 0;
  for (int d = 1; d <= psi.D; ++d)
    if (psi.psi[d - 1] != 0.0) s += psi.psi[d - 1] * omega_coefficient(e, d, x, lf);
  return s;
}

// max value with Omega_k(x) >= value * scale_k * w(x) on the grid.
inline double grid_value(const std::vector<EffectiveRankDistribution>& effs, const std::vector<double>& scales,
                         const DegreeDistribution& psi, const std::vector<double>& xs, const OptimizeOptions& o,
                         const std::vector<double>& lf) {
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < effs.size(); ++k) {
    if (scales[k] <= 0) continue;
    for (double x : xs) v = std::min(v, sparse_omega(x, effs[k], psi, lf) / (scales[k] * rate_weight(x, o)));
  }
  return std::isfinite(v) ? std::max(v, 0.0) : 0.0;
}

}  // namespace detail

// Maximize value s.t. Omega(x_i; hbar_k, Psi) >= value * scale_k * w(x_i)
// for every constraint set k and grid point i.
inline OptimizeResult optimize_rate(const std::vector<EffectiveRankDistribution>& effs,
                                    const std::vector<double>& scales, double eta, const OptimizeOptions& o = {}) {
  if (effs.empty()) throw Error("optimization needs at least one rank distribution");
  int M = 0;
  for (const auto& e : effs) M = std::max(M, e.M);
  int D = o.max_degree > 0 ? o.max_degree : max_degree(M, eta);
  OptimizeResult res;
  bool any = false;
  for (std::size_t k = 0; k < effs.size(); ++k)
    if (scales[k] > 0 && effs[k].weighted_sum() > 0) any = true;
  if (!any) {
    res.psi = DegreeDistribution::point_mass(1);
    res.empty_support = true;
    return res;
  }
  auto lf = log_factorials(D + 1);
  auto xs = rate_grid(eta, o.grid);
  const std::size_t N = xs.size();
  LinearProgram lp(D + 1);
  lp.c[D] = 1.0;
  for (std::size_t k = 0; k < effs.size(); ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> a(D + 1);
      for (int d = 1; d <= D; ++d) a[d - 1] = omega_coefficient(effs[k], d, xs[i], lf);
      a[D] = -scales[k] * detail::rate_weight(xs[i], o);
      lp.add(std::move(a), Sense::ge, 0.0);
    }
  }
  std::vector<double> ones(D + 1, 1.0);
  ones[D] = 0.0;
  lp.add(std::move(ones), Sense::eq, 1.0);
  LPSolution sol = solve_lp(lp);
  res.status = sol.status;
  if (sol.status != LPStatus::optimal) {
    res.psi = DegreeDistribution::point_mass(1);
    return res;
  }
  std::vector<double> psi(sol.x.begin(), sol.x.begin() + D);
  double tot = 0;
  for (double& v : psi) tot += v;
  for (double& v : psi) v /= tot;
  res.lp_value = sol.x[D];
  res.psi = DegreeDistribution(D, psi);

  // Omega(0) = 0 would stall decoding at the first step: move a small
  // mass onto low degrees.
  for (std::size_t k = 0; k < effs.size(); ++k) {
    if (effs[k].weighted_sum() <= 0) continue;
    if (detail::sparse_omega(0.0, effs[k], res.psi, lf) > 1e-12) continue;
    int rstar = 0;
    for (int r = 1; r <= effs[k].M; ++r)
      if (effs[k].hbar_prime[r] > 0) rstar = r;
    rstar = std::max(1, std::min(rstar, D));
    for (int d = 1; d <= rstar; ++d) psi[d - 1] += o.fixup_mass / rstar;
    for (double& v : psi) v /= 1.0 + o.fixup_mass;
    res.psi = DegreeDistribution(D, psi);
    res.fixup = true;
    break;
  }

  auto fine = rate_grid(eta, o.grid * std::max(1, o.refine));
  double v = detail::grid_value(effs, scales, res.psi, fine, o, lf);
  res.value = std::min(res.lp_value, v);
  res.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < effs.size(); ++k)
    for (double x : fine)
      res.margin = std::min(res.margin, detail::sparse_omega(x, effs[k], res.psi, lf) -
                                            res.value * scales[k] * detail::rate_weight(x, o));
  return res;
}

inline OptimizeResult optimize_p1(const RankDistribution& h, double q, double eta, const OptimizeOptions& o = {}) {
  return optimize_rate({effective_dist(h, q)}, {1.0}, eta, o);
}

inline OptimizeResult optimize_p2(const std::vector<RankDistribution>& H, double q, double eta,
                                  const OptimizeOptions& o = {}) {
  std::vector<EffectiveRankDistribution> effs;
  for (const auto& h : H) effs.push_back(effective_dist(h, q));
  return optimize_rate(effs, std::vector<double>(H.size(), 1.0), eta, o);
}

// value is alpha: the common fraction of sum_i i*hbar_i(h) achieved by every h.
inline OptimizeResult optimize_p3(const std::vector<RankDistribution>& H, double q, double eta,
                                  const OptimizeOptions& o = {}) {
  std::vector<EffectiveRankDistribution> effs;
  std::vector<double> scales;
  for (const auto& h : H) {
    effs.push_back(effective_dist(h, q));
    scales.push_back(effs.back().weighted_sum());
  }
  return optimize_rate(effs, scales, eta, o);
}

inline OptimizeResult optimize_p4(const RankDistribution& h, double q, double eta, double K, double c,
                                  double c_prime, OptimizeOptions o = {}) {
  if (!(K > 0) || c < 0 || c_prime < 0) throw Error("P4 needs K > 0, c >= 0, c' >= 0");
  o.penalty_K = K;
  o.penalty_c = c;
  o.penalty_c_prime = c_prime;
  return optimize_rate({effective_dist(h, q)}, {1.0}, eta, o);
}

// theta = min_i Omega(x_i) / (-ln(1 - x_i)) over the N-point grid.
inline double achievable_theta(const DegreeDistribution& psi, const RankDistribution& h, double q, double eta,
                               int N = 100) {
  auto lf = log_factorials(psi.D + 1);
  return detail::grid_value({effective_dist(h, q)}, {1.0}, psi, rate_grid(eta, N), OptimizeOptions{}, lf);
}

struct ThetaBounds {
  double lower = 0;
  double upper = 0;
};

inline ThetaBounds theta_bounds(const RankDistribution& h, double q, double eta) {
  auto e = effective_dist(h, q);
  ThetaBounds b;
  for (int r = 1; r <= e.M; ++r) b.lower = std::max(b.lower, r * e.tail(r));
  b.upper = e.weighted_sum() / (1.0 - eta);
  return b;
}

// Random rank distribution with h_0 = 0: spacings of M-1 sorted uniforms.
inline RankDistribution sample_rank_distribution(int M, RandomStream& s) {
  std::vector<double> u(M - 1);
  for (double& v : u) v = s.uniform();
  std::sort(u.begin(), u.end());
  std::vector<double> h(M + 1, 0.0);
  double prev = 0;
  for (int r = 1; r < M; ++r) h[r] = u[r - 1] - prev, prev = u[r - 1];
  h[M] = 1.0 - prev;
  return {M, h};
}

// Point masses on ranks 1..M. The P2 and P3 constraints are linear in h,
// so a degree distribution feasible on these is feasible on every h.
inline std::vector<RankDistribution> rank_point_masses(int M) {
  std::vector<RankDistribution> out;
  for (int k = 1; k <= M; ++k) out.push_back(RankDistribution::point_mass(M, k));
  return out;
}

// Vertices of {h : sum_r r h_r >= mu}: point masses at k >= mu and the
// two-point mixtures of j < mu < k with mean exactly mu.
inline std::vector<RankDistribution> mean_rank_vertices(int M, double mu) {
  if (!(mu >= 0) || mu > M) throw Error("mean rank bound must lie in [0, M]");
  std::vector<RankDistribution> out;
  for (int k = 0; k <= M; ++k)
    if (k >= mu) out.push_back(RankDistribution::point_mass(M, k));
  for (int j = 0; j < mu; ++j)
    for (int k = j + 1; k <= M; ++k) {
      if (k <= mu) continue;
      std::vector<double> h(M + 1, 0.0);
      h[j] = (k - mu) / (k - j);
      h[k] = 1.0 - h[j];
      out.emplace_back(M, h);
    }
  return out;
}

// Uniform draw from the simplex over (h_0, ..., h_M) conditioned on mean
// rank >= mu, by rejection.
inline RankDistribution sample_mean_rank_distribution(int M, double mu, RandomStream& s) {
  if (!(mu >= 0) || mu >= M) throw Error("mean rank bound must lie in [0, M)");
  for (;;) {
    std::vector<double> h(M + 1);
    double tot = 0;
    for (double& v : h) tot += (v = -std::log1p(-s.uniform()));
    for (double& v : h) v /= tot;
    RankDistribution d{M, h};
    if (expected_rank(d) >= mu) return d;
  }
}

// ---- density evolution ----

inline double alpha_dr(int d, int r, double q) {
  if (d <= 0) return 0.0;
  return (1.0 - q_pow_neg(q, d - r)) / (1.0 - q_pow_neg(q, d));
}

struct EvolutionCurve {
  double theta = 0;
  int D = 0;
  int M = 0;
  std::vector<double> grid;  // x = tau / theta
  std::vector<double> rho0;
  std::vector<std::vector<double>> rho_dr;  // [d * (M+1) + r][k], filled on request
  std::optional<double> first_crossing;     // first x where rho0 turns negative

  double rho(int d, int r, std::size_t k) const { return rho_dr[static_cast<std::size_t>(d) * (M + 1) + r][k]; }
};

// rho_{d,r}(0) = d Psi_d sum_k zeta_r^{d,k} h_k
inline double initial_edge_density(const DegreeDistribution& psi, const RankDistribution& h, double q, int d, int r) {
  double s = 0;
  for (int k = r; k <= h.M; ++k) s += zeta_dkr(d, k, r, q) * h.h[k];
  return d * psi.at(d) * s;
}

inline EvolutionCurve density_evolution(const DegreeDistribution& psi, const RankDistribution& h, double q,
                                        double theta, const std::vector<double>& grid, bool full = false) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] < 1.0)) throw Error("evolution grid must lie in [0,1)");
    if (i && !(grid[i] > grid[i - 1])) throw Error("evolution grid must be strictly increasing");
  }
  EvolutionCurve c;
  c.theta = theta;
  c.D = psi.D;
  c.M = h.M;
  c.grid = grid;
  auto e = effective_dist(h, q);
  auto lf = log_factorials(psi.D + 1);
  for (double x : grid) {
    double lg = x > 0 ? std::log1p(-x) : 0.0;
    c.rho0.push_back((1.0 - x) * (detail::sparse_omega(x, e, psi, lf) + theta * lg));
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (c.rho0[i] < 0) {
      if (i == 0) c.first_crossing = grid[0];
      else {
        double a = c.rho0[i - 1], b = c.rho0[i];
        c.first_crossing = grid[i - 1] + (grid[i] - grid[i - 1]) * a / (a - b);
      }
      break;
    }
  }
  if (!full) return c;

  const int D = psi.D, M = h.M;
  c.rho_dr.assign(static_cast<std::size_t>(D + 1) * (M + 1), std::vector<double>(grid.size(), 0.0));
  std::vector<double> cur(M + 2), nxt(M + 2);
  for (int j = 1; j <= D; ++j) {
    if (psi.at(j) == 0.0) continue;
    for (int r = 0; r <= M + 1; ++r) cur[r] = r >= 1 && r <= std::min(j, M) ? initial_edge_density(psi, h, q, j, r) : 0.0;
    // cur holds hat-rho^{(i)}_{j, .}; it feeds rho_{d,r} with d = j - i.
    for (int i = 0; i < j; ++i) {
      int d = j - i;
      for (int r = 1; r <= std::min(d - 1, M); ++r) {
        if (cur[r] == 0.0) continue;
        for (std::size_t k = 0; k < grid.size(); ++k) {
          double x = grid[k];
          double w;
          if (x == 0.0) w = i == 0 ? 1.0 : 0.0;
          else
            w = std::exp(lf[j - 1] - lf[d - 1] - lf[j - d] + i * std::log(x) + d * std::log1p(-x));
          c.rho_dr[static_cast<std::size_t>(d) * (M + 1) + r][k] += w * cur[r];
        }
      }
      for (int r = 1; r <= M; ++r) {
        nxt[r] = alpha_dr(d, r, q) * cur[r] + (r + 1 <= M ? (1.0 - alpha_dr(d, r + 1, q)) * cur[r + 1] : 0.0);
      }
      std::swap(cur, nxt);
    }
  }
  return c;
}

}  // namespace bats
