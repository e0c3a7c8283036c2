#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "degree_optimization.hpp"
#include "matrix.hpp"

namespace bats {

struct Packet {
  std::uint32_t batch_id = 0;
  std::vector<Symbol> coding_vector;  // M symbols
  std::vector<Symbol> payload;        // T symbols

  friend bool operator==(const Packet&, const Packet&) = default;
};

struct Batch {
  std::uint32_t id = 0;
  int degree = 0;
  std::vector<std::uint32_t> contributors;  // sorted, distinct
  Matrix G;                                 // degree x M
};

inline int sample_degree(const DegreeDistribution& psi, RandomStream& s) {
  double u = s.uniform(), c = 0;
  for (int d = 1; d <= psi.D; ++d) {
    c += psi.psi[d - 1];
    if (u < c) return d;
  }
  for (int d = psi.D; d >= 1; --d)
    if (psi.psi[d - 1] > 0) return d;
  return psi.D;
}

// Sorted uniform d-subset of [0, n) (Floyd).
inline std::vector<std::uint32_t> sample_subset(std::uint32_t n, std::uint32_t d, RandomStream& s) {
  std::vector<std::uint32_t> out;
  out.reserve(d);
  std::vector<char> seen(n, 0);
  for (std::uint32_t t = n - d; t < n; ++t) {
    auto v = static_cast<std::uint32_t>(s.below(static_cast<std::uint64_t>(t) + 1));
    if (seen[v]) v = t;
    seen[v] = 1;
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Everything about batch `id` follows from (seed, id).
inline Batch generate_batch(const GaloisField& F, std::uint32_t id, std::uint64_t seed, const DegreeDistribution& psi,
                            int K, int M) {
  if (K < 1 || M < 1) throw Error("batch generation needs K >= 1 and M >= 1");
  RandomStream s(seed, Domain::batch, {id});
  Batch b;
  b.id = id;
  b.degree = std::min(sample_degree(psi, s), K);
  b.contributors = sample_subset(static_cast<std::uint32_t>(K), static_cast<std::uint32_t>(b.degree), s);
  b.G = random_matrix(F, b.degree, M, s);
  return b;
}

// The M source packets X = B G of a batch; packet j carries unit vector e_j.
inline std::vector<Packet> encode_batch(const GaloisField& F, const Batch& b, const Matrix& intermediate) {
  const std::size_t M = b.G.cols(), T = intermediate.cols();
  std::vector<Packet> out(M);
  for (std::size_t j = 0; j < M; ++j) {
    out[j].batch_id = b.id;
    out[j].coding_vector.assign(M, 0);
    out[j].coding_vector[j] = 1;
    out[j].payload.assign(T, 0);
    for (std::size_t k = 0; k < b.contributors.size(); ++k)
      F.axpy(out[j].payload.data(), intermediate.row(b.contributors[k]), b.G(k, j), T);
  }
  return out;
}

// Transfer matrix H (M x c) from the coding vectors of received packets.
inline Matrix transfer_matrix(const std::vector<Packet>& received, std::size_t M) {
  Matrix H(M, received.size());
  for (std::size_t j = 0; j < received.size(); ++j) {
    if (received[j].coding_vector.size() != M) throw Error("coding vector length differs from batch size");
    for (std::size_t i = 0; i < M; ++i) H(i, j) = received[j].coding_vector[i];
  }
  return H;
}

}  // namespace bats
