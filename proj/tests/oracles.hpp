#pragma once

// Independent reference computations shared by unit tests and the acceptance runner.

#include <bats/decoder.hpp>
#include <bats/topology.hpp>

#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace oracle {

using namespace bats;

struct Instance {
  std::size_t K = 0, M = 0, T = 0;
  Matrix B;  // ground-truth K x T
  std::vector<std::vector<std::uint32_t>> vars;
  std::vector<Matrix> A;  // per check, d x c
  std::vector<Matrix> Y;  // per check, c x T
};

// Random BATS-like instance: every check is a batch with a random degree,
// random G (d x M) and random H (M x c), c drawn from 0..M+1.
inline Instance random_instance(const GaloisField& F, std::uint64_t seed, std::size_t maxK = 30, std::size_t maxM = 4) {
  RandomStream s(seed, Domain::trial, {0});
  Instance in;
  in.K = 1 + s.below(maxK);
  in.M = 1 + s.below(maxM);
  in.T = 3;
  in.B = random_matrix(F, in.K, in.T, s);
  std::size_t n = 1 + s.below(2 * in.K);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t d = 1 + s.below(std::min<std::size_t>(in.K, 6));
    auto v = sample_subset(static_cast<std::uint32_t>(in.K), static_cast<std::uint32_t>(d), s);
    Matrix G = random_matrix(F, d, in.M, s);
    Matrix H = random_matrix(F, in.M, s.below(in.M + 2), s);
    Matrix A = multiply(F, G, H);
    Matrix Y(A.cols(), in.T);
    for (std::size_t j = 0; j < A.cols(); ++j)
      for (std::size_t k = 0; k < d; ++k) F.axpy(Y.row(j), in.B.row(v[k]), A(k, j), in.T);
    in.vars.push_back(std::move(v));
    in.A.push_back(std::move(A));
    in.Y.push_back(std::move(Y));
  }
  return in;
}

inline DecoderState load(const GaloisField& F, const Instance& in) {
  DecoderState st(F, in.K, in.T);
  for (std::size_t i = 0; i < in.vars.size(); ++i) st.add_check(in.vars[i], in.A[i], in.Y[i]);
  return st;
}

// Variables whose unit vector lies in the row space of the global system.
inline std::set<std::uint32_t> gaussian_recoverable(const GaloisField& F, const Instance& in) {
  std::vector<Symbol> sys;
  std::size_t rows = 0;
  for (std::size_t i = 0; i < in.vars.size(); ++i)
    for (std::size_t j = 0; j < in.A[i].cols(); ++j) {
      std::vector<Symbol> r(in.K, 0);
      for (std::size_t k = 0; k < in.vars[i].size(); ++k) r[in.vars[i][k]] = in.A[i](k, j);
      sys.insert(sys.end(), r.begin(), r.end());
      ++rows;
    }
  auto piv = reduce_rows(F, sys.data(), rows, in.K, in.K);
  std::vector<char> is_piv(in.K, 0);
  for (auto c : piv) is_piv[c] = 1;
  std::set<std::uint32_t> out;
  for (std::size_t i = 0; i < piv.size(); ++i) {
    bool alone = true;
    for (std::size_t c = 0; c < in.K; ++c)
      if (!is_piv[c] && sys[i * in.K + c]) alone = false;
    if (alone) out.insert(static_cast<std::uint32_t>(piv[i]));
  }
  return out;
}

inline std::set<std::uint32_t> decoded_set(const DecoderState& st) {
  std::set<std::uint32_t> out;
  for (std::uint32_t v = 0; v < st.K(); ++v)
    if (st.decoded(v)) out.insert(v);
  return out;
}

inline bool payloads_match(const DecoderState& st, const Instance& in) {
  for (std::uint32_t v = 0; v < in.K; ++v)
    if (st.decoded(v) && !std::equal(st.payload(v).begin(), st.payload(v).end(), in.B.row(v))) return false;
  return true;
}

struct OrderCheck {
  bool same_residual = true;
  bool sound = true;
  bool subset_of_ge = true;
  bool conserved = true;
};

// BP in index order and in degree-weighted random order on one instance.
inline OrderCheck check_instance(const GaloisField& F, std::uint64_t seed) {
  Instance in = random_instance(F, seed);
  OrderCheck r;
  DecoderState a = load(F, in), b = load(F, in);
  while (a.step()) r.conserved = r.conserved && a.consistent();
  BpOptions o;
  o.random_order = true;
  o.seed = seed ^ 0x5bd1e995u;
  while (b.step(o)) r.conserved = r.conserved && b.consistent();
  auto sa = decoded_set(a), sb = decoded_set(b);
  r.same_residual = sa == sb;
  r.sound = payloads_match(a, in) && payloads_match(b, in);
  auto ge = gaussian_recoverable(F, in);
  r.subset_of_ge = std::includes(ge.begin(), ge.end(), sa.begin(), sa.end());
  return r;
}

inline double beta_fn(int a, int b) { return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b)); }

// Composite Simpson's rule.
template <class F>
double simpson(F f, double lo, double hi, int n) {
  double h = (hi - lo) / n, s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4 : 2);
  return s * h / 3;
}

// I_{a,b}(x) as a normalized integral of t^{a-1}(1-t)^{b-1}.
inline double beta_integral(int a, int b, double x) {
  return simpson([&](double t) { return std::pow(t, a - 1) * std::pow(1 - t, b - 1); }, 0, x, 2000) / beta_fn(a, b);
}

inline std::int64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Random DAG on n nodes: node 0 is the source, node n-1 the destination,
// links go from lower to higher index with erasure probabilities in
// multiples of 1/N.
inline Topology random_dag(std::uint64_t seed, int n, int N) {
  RandomStream s(seed, Domain::trial, {1});
  Topology t;
  for (int v = 0; v < n; ++v)
    t.add_node("n" + std::to_string(v), v == 0 ? Role::source : v == n - 1 ? Role::destination : Role::intermediate);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (s.bernoulli(0.5)) t.add_link(u, v, static_cast<double>(s.below(N + 1)) / N);
  return t;
}

}  // namespace oracle
