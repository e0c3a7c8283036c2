#pragma once

#include <cstdint>
#include <vector>

#include "batch.hpp"
#include "rank_distribution.hpp"

namespace bats {

// Sum tree over nonnegative integer weights with weighted sampling.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : t_(n + 1, 0), w_(n, 0) {}

  void set(std::size_t i, std::int64_t w) {
    std::int64_t delta = w - w_[i];
    w_[i] = w;
    for (std::size_t j = i + 1; j < t_.size(); j += j & (~j + 1)) t_[j] += delta;
  }

  std::int64_t total() const { return sum(w_.size()); }

  std::int64_t sum(std::size_t n) const {
    std::int64_t s = 0;
    for (std::size_t j = n; j > 0; j -= j & (~j + 1)) s += t_[j];
    return s;
  }

  // Index i with prefix(i) <= u < prefix(i+1).
  std::size_t find(std::int64_t u) const {
    std::size_t pos = 0, step = 1;
    while (step * 2 < t_.size()) step *= 2;
    for (; step; step /= 2)
      if (pos + step < t_.size() && t_[pos + step] <= u) {
        pos += step;
        u -= t_[pos];
      }
    return pos;
  }

 private:
  std::vector<std::int64_t> t_;
  std::vector<std::int64_t> w_;
};

struct Trajectory {
  std::size_t K = 0;
  std::size_t n = 0;
  std::vector<std::int64_t> R0;  // R0[t] for t = 0 .. decoded
  std::size_t decoded = 0;       // variables removed before R0 hit zero
};

// BP on a random decoding graph in which one variable is removed per step,
// reached through a uniformly chosen decodable edge. Only ranks are tracked:
// a batch whose transfer matrix has rank k acts through a totally random
// d x k matrix.
inline Trajectory bp_trajectory(const GaloisField& F, const DegreeDistribution& psi, const RankDistribution& h,
                                std::size_t K, std::size_t n, std::uint64_t seed) {
  struct Check {
    std::vector<std::uint32_t> vars;
    Matrix A;
    std::vector<char> gone;
    std::size_t degree = 0;
  };
  std::vector<Check> checks(n);
  std::vector<std::vector<std::uint32_t>> var_checks(K);
  std::vector<double> hc(h.h.size());
  for (std::size_t k = 0; k < hc.size(); ++k) hc[k] = (k ? hc[k - 1] : 0.0) + h.h[k];
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream s(seed, Domain::batch, {i});
    Check& c = checks[i];
    int d = std::min<int>(sample_degree(psi, s), static_cast<int>(K));
    double u = s.uniform();
    std::size_t k = 0;
    while (k + 1 < hc.size() && u >= hc[k]) ++k;
    c.vars = sample_subset(static_cast<std::uint32_t>(K), static_cast<std::uint32_t>(d), s);
    c.A = random_matrix(F, d, k, s);
    c.gone.assign(d, 0);
    c.degree = d;
    for (auto v : c.vars) var_checks[v].push_back(static_cast<std::uint32_t>(i));
  }
  auto decodable = [&](const Check& c) {
    if (c.degree == 0 || c.degree > c.A.cols()) return false;
    Matrix sub(c.degree, c.A.cols());
    std::size_t r = 0;
    for (std::size_t j = 0; j < c.vars.size(); ++j)
      if (!c.gone[j]) std::copy(c.A.row(j), c.A.row(j) + c.A.cols(), sub.row(r++));
    return rank(F, sub) == c.degree;
  };
  Fenwick tree(n);
  for (std::size_t i = 0; i < n; ++i)
    if (decodable(checks[i])) tree.set(i, static_cast<std::int64_t>(checks[i].degree));

  Trajectory tr;
  tr.K = K;
  tr.n = n;
  RandomStream pick(seed, Domain::decoder, {0});
  for (;;) {
    std::int64_t r0 = tree.total();
    tr.R0.push_back(r0);
    if (r0 == 0 || tr.decoded == K) break;
    std::size_t ci = tree.find(static_cast<std::int64_t>(pick.below(static_cast<std::uint64_t>(r0))));
    Check& c = checks[ci];
    std::size_t e = pick.below(c.degree);
    std::uint32_t v = 0;
    for (std::size_t j = 0; j < c.vars.size(); ++j)
      if (!c.gone[j] && e-- == 0) {
        v = c.vars[j];
        break;
      }
    ++tr.decoded;
    for (auto id : var_checks[v]) {
      Check& x = checks[id];
      auto it = std::lower_bound(x.vars.begin(), x.vars.end(), v);
      x.gone[static_cast<std::size_t>(it - x.vars.begin())] = 1;
      --x.degree;
      tree.set(id, decodable(x) ? static_cast<std::int64_t>(x.degree) : 0);
    }
  }
  return tr;
}

}  // namespace bats
