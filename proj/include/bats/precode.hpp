#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "matrix.hpp"

namespace bats {

enum class PrecodeMode : std::uint8_t { none = 0, systematic_sparse = 1 };

struct PrecodeSpec {
  PrecodeMode mode = PrecodeMode::none;
  double rate = 1.0;
  int row_weight = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw Error("precode rate must lie in (0,1]");
    if (mode == PrecodeMode::systematic_sparse && row_weight < 1) throw Error("precode row weight must be positive");
  }
};

// Number of intermediate packets produced from K' originals.
inline int intermediate_count(int k_prime, const PrecodeSpec& spec) {
  spec.validate();
  if (spec.mode == PrecodeMode::none) return k_prime;
  return static_cast<int>(std::ceil(k_prime / spec.rate - 1e-9));
}

// Parity j is sum_i coef[i] * original[vars[i]]; it is stored as
// intermediate packet K' + j. Each original feeds row_weight distinct
// parities (all of them when there are fewer).
struct ParityRow {
  std::vector<std::uint32_t> vars;
  std::vector<Symbol> coef;
};

inline std::vector<ParityRow> parity_rows(const GaloisField& F, int k_prime, const PrecodeSpec& spec) {
  if (spec.mode == PrecodeMode::none) return {};
  const int P = intermediate_count(k_prime, spec) - k_prime;
  std::vector<ParityRow> rows(P);
  if (P == 0) return rows;
  const int w = std::min(spec.row_weight, P);
  for (int i = 0; i < k_prime; ++i) {
    RandomStream s(spec.seed, Domain::precode, {static_cast<std::uint64_t>(i)});
    SymbolSource sym(s, F.m());
    // Floyd's sampling of w distinct parities.
    std::vector<int> pick;
    for (int t = P - w; t < P; ++t) {
      int v = static_cast<int>(s.below(t + 1));
      if (std::find(pick.begin(), pick.end(), v) != pick.end()) v = t;
      pick.push_back(v);
    }
    for (int j : pick) {
      rows[j].vars.push_back(static_cast<std::uint32_t>(i));
      rows[j].coef.push_back(static_cast<Symbol>(sym.nonzero()));
    }
  }
  return rows;
}

// Rows of the result are packets: originals first, then parities.
inline Matrix precode_encode(const GaloisField& F, const Matrix& input, const PrecodeSpec& spec) {
  if (input.rows() == 0) throw Error("precode input is empty");
  int kp = static_cast<int>(input.rows());
  int K = intermediate_count(kp, spec);
  Matrix out(K, input.cols());
  std::copy(input.data().begin(), input.data().end(), out.data().begin());
  auto rows = parity_rows(F, kp, spec);
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].vars.size(); ++i)
      F.axpy(out.row(kp + j), input.row(rows[j].vars[i]), rows[j].coef[i], input.cols());
  return out;
}

struct PrecodeResult {
  bool success = false;
  Matrix originals;       // K' x T when successful
  std::size_t missing = 0;  // originals that could not be determined
};

// Recover the K' originals from any subset of the K intermediate packets.
// known[k] marks intermediate packet k as available in values.row(k).
inline PrecodeResult precode_complete(const GaloisField& F, const std::vector<char>& known, const Matrix& values,
                                      int k_prime, const PrecodeSpec& spec) {
  const int K = intermediate_count(k_prime, spec);
  if (static_cast<int>(known.size()) != K || static_cast<int>(values.rows()) != K)
    throw Error("precode completion needs one slot per intermediate packet");
  const std::size_t T = values.cols();
  PrecodeResult res;
  std::vector<char> have(known.begin(), known.end());
  Matrix val = values;
  auto rows = parity_rows(F, k_prime, spec);

  // Equation j: sum coef*orig + parity_j = 0. Track unknown counts.
  struct Eq {
    std::vector<std::uint32_t> vars;
    std::vector<Symbol> coef;
  };
  std::vector<Eq> eqs;
  std::vector<std::vector<std::uint32_t>> var_eqs(K);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    Eq e{rows[j].vars, rows[j].coef};
    e.vars.push_back(static_cast<std::uint32_t>(k_prime + j));
    e.coef.push_back(1);
    for (auto v : e.vars) var_eqs[v].push_back(static_cast<std::uint32_t>(j));
    eqs.push_back(std::move(e));
  }
  std::vector<int> unknown(eqs.size(), 0);
  std::vector<char> used(eqs.size(), 0);
  std::deque<std::size_t> ready;
  for (std::size_t j = 0; j < eqs.size(); ++j) {
    for (auto v : eqs[j].vars) unknown[j] += !have[v];
    if (unknown[j] == 1) ready.push_back(j);
  }
  auto learn = [&](std::uint32_t v) {
    have[v] = 1;
    for (auto j : var_eqs[v])
      if (!used[j] && --unknown[j] == 1) ready.push_back(j);
  };
  // Peeling.
  while (!ready.empty()) {
    std::size_t j = ready.front();
    ready.pop_front();
    if (used[j] || unknown[j] != 1) continue;
    used[j] = 1;
    const Eq& e = eqs[j];
    std::size_t at = 0;
    for (std::size_t i = 0; i < e.vars.size(); ++i)
      if (!have[e.vars[i]]) at = i;
    std::vector<Symbol> acc(T, 0);
    for (std::size_t i = 0; i < e.vars.size(); ++i)
      if (i != at) F.axpy(acc.data(), val.row(e.vars[i]), e.coef[i], T);
    Symbol inv = F.inv(e.coef[at]);
    Symbol* dst = val.row(e.vars[at]);
    std::fill(dst, dst + T, 0);
    F.axpy(dst, acc.data(), inv, T);
    learn(e.vars[at]);
  }
  // Dense elimination on whatever is left.
  std::vector<std::uint32_t> unk;
  std::vector<int> col(K, -1);
  for (int v = 0; v < K; ++v)
    if (!have[v]) col[v] = static_cast<int>(unk.size()), unk.push_back(v);
  if (!unk.empty()) {
    const std::size_t U = unk.size(), W = U + T;
    std::vector<Symbol> sys;
    std::size_t nrows = 0;
    for (std::size_t j = 0; j < eqs.size(); ++j) {
      if (used[j] || unknown[j] == 0) continue;
      std::vector<Symbol> r(W, 0);
      for (std::size_t i = 0; i < eqs[j].vars.size(); ++i) {
        auto v = eqs[j].vars[i];
        if (have[v]) F.axpy(r.data() + U, val.row(v), eqs[j].coef[i], T);
        else r[col[v]] ^= eqs[j].coef[i];
      }
      sys.insert(sys.end(), r.begin(), r.end());
      ++nrows;
    }
    auto piv = reduce_rows(F, sys.data(), nrows, W, U);
    std::vector<char> pivot_col(U, 0);
    for (auto c : piv) pivot_col[c] = 1;
    for (std::size_t i = 0; i < piv.size(); ++i) {
      const Symbol* r = sys.data() + i * W;
      bool free_dep = false;
      for (std::size_t c = 0; c < U && !free_dep; ++c)
        if (!pivot_col[c] && r[c]) free_dep = true;
      if (free_dep) continue;
      auto v = unk[piv[i]];
      std::copy(r + U, r + W, val.row(v));
      have[v] = 1;
    }
  }
  for (int v = 0; v < k_prime; ++v) res.missing += !have[v];
  res.success = res.missing == 0;
  if (res.success) {
    res.originals = Matrix(k_prime, T);
    std::copy(val.data().begin(), val.data().begin() + static_cast<std::ptrdiff_t>(k_prime * T),
              res.originals.data().begin());
  }
  return res;
}

}  // namespace bats
