#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "galois.hpp"

namespace bats {

// q^{-x}, evaluated in log space so large exponents underflow to zero.
inline double q_pow_neg(double q, double x) {
  if (x <= 300.0) return std::pow(q, -x);
  return std::exp(-x * std::log(q));
}

// Probability that an m x r totally random matrix has full column rank r.
inline double zeta(int m, int r, double q) {
  if (r < 0) return 0.0;
  if (r == 0) return 1.0;
  if (r > m) return 0.0;
  double p = 1.0;
  for (int j = 0; j < r; ++j) p *= 1.0 - q_pow_neg(q, m - j);
  return p;
}

// Pr{rank(G H) = r} for G totally random with d rows and rank(H) = k.
inline double zeta_dkr(int d, int k, int r, double q) {
  if (r < 0 || r > std::min(d, k)) return 0.0;
  double e = static_cast<double>(d - r) * static_cast<double>(k - r);
  return zeta(d, r, q) * zeta(k, r, q) / zeta(r, r, q) * q_pow_neg(q, e);
}

struct RankDistribution {
  int M = 0;
  std::vector<double> h;  // h[0..M]

  RankDistribution() = default;
  RankDistribution(int m, std::vector<double> v) : M(m), h(std::move(v)) { validate(); }

  static RankDistribution point_mass(int M, int k) {
    std::vector<double> v(M + 1, 0.0);
    v.at(k) = 1.0;
    return {M, v};
  }

  void validate(double tol = 1e-9) const {
    if (M < 0 || static_cast<int>(h.size()) != M + 1) throw Error("rank distribution length must be M+1");
    double s = 0;
    for (double v : h) {
      if (!(v >= -tol)) throw Error("rank distribution has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > tol) throw Error("rank distribution does not sum to 1");
  }

  double operator[](int k) const { return h[k]; }
};

// hbar[r] and hbar_prime[r] for r = 0..M; index 0 is unused and zero.
struct EffectiveRankDistribution {
  int M = 0;
  std::vector<double> hbar;
  std::vector<double> hbar_prime;

  // sum_r r * hbar_r
  double weighted_sum() const {
    double s = 0;
    for (int r = 1; r <= M; ++r) s += r * hbar[r];
    return s;
  }
  // sum_{i >= r} hbar_i
  double tail(int r) const {
    double s = 0;
    for (int i = std::max(r, 1); i <= M; ++i) s += hbar[i];
    return s;
  }
};

inline EffectiveRankDistribution effective_dist(const RankDistribution& h, double q) {
  EffectiveRankDistribution e;
  e.M = h.M;
  e.hbar.assign(h.M + 1, 0.0);
  e.hbar_prime.assign(h.M + 1, 0.0);
  for (int r = 1; r <= h.M; ++r) {
    for (int i = r; i <= h.M; ++i) {
      e.hbar[r] += zeta(i, r, q) * q_pow_neg(q, i - r) * h.h[i];
      e.hbar_prime[r] += zeta(i, r, q) * h.h[i];
    }
  }
  return e;
}

inline double expected_rank(const RankDistribution& h) {
  double s = 0;
  for (int k = 0; k <= h.M; ++k) s += k * h.h[k];
  return s;
}

inline double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  return std::exp(lc + k * std::log(p) + (n - k) * std::log1p(-p));
}

inline RankDistribution erasure_rank_dist(int M, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw Error("erasure probability outside [0,1]");
  std::vector<double> h(M + 1);
  for (int r = 0; r <= M; ++r) h[r] = binomial_pmf(M, r, 1.0 - eps);
  return {M, h};
}

inline RankDistribution line_rank_dist(int M, const std::vector<double>& eps, double q) {
  if (eps.empty()) throw Error("line network needs at least one hop");
  RankDistribution cur = erasure_rank_dist(M, eps[0]);
  if (eps.size() == 1) return cur;
  // z[(i*(M+1)+j)*(M+1)+r] = zeta_r^{i,j}
  std::size_t W = M + 1;
  std::vector<double> z(W * W * W, 0.0);
  for (int i = 0; i <= M; ++i)
    for (int j = 0; j <= M; ++j)
      for (int r = 0; r <= std::min(i, j); ++r) z[(i * W + j) * W + r] = zeta_dkr(i, j, r, q);
  for (std::size_t k = 1; k < eps.size(); ++k) {
    RankDistribution b = erasure_rank_dist(M, eps[k]);
    std::vector<double> nh(W, 0.0);
    for (int i = 0; i <= M; ++i) {
      if (cur.h[i] == 0.0) continue;
      for (int j = 0; j <= M; ++j) {
        double w = cur.h[i] * b.h[j];
        if (w == 0.0) continue;
        for (int r = 0; r <= std::min(i, j); ++r) nh[r] += w * z[(i * W + j) * W + r];
      }
    }
    cur.h = nh;
  }
  return cur;
}

inline RankDistribution empirical_rank_dist(const std::vector<int>& ranks, int M) {
  if (ranks.empty()) throw Error("empirical rank distribution of an empty sample");
  std::vector<double> h(M + 1, 0.0);
  for (int r : ranks) {
    if (r < 0 || r > M) throw Error("observed rank out of range");
    h[r] += 1.0;
  }
  for (double& v : h) v /= static_cast<double>(ranks.size());
  return {M, h};
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t n = std::max(a.size(), b.size());
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = i < a.size() ? a[i] : 0.0, y = i < b.size() ? b[i] : 0.0;
    s += std::abs(x - y);
  }
  return 0.5 * s;
}

}  // namespace bats
