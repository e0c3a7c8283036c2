#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "batch.hpp"
#include "matrix.hpp"

namespace bats {

enum class VarState : std::uint8_t { undecoded, decoded, inactive };

struct DecodeEvent {
  std::size_t check = 0;
  std::vector<std::uint32_t> decoded;
};

struct BpOptions {
  bool random_order = false;  // pick decodable checks at random, weighted by degree
  std::uint64_t seed = 0;
};

struct InactivationReport {
  bool success = false;
  std::size_t inactivations = 0;
  std::size_t rank_deficit = 0;
  std::size_t inconsistent = 0;  // residual equations of the form 0 = nonzero
};

// Residual Tanner graph with per-check combined matrices. Characteristic 2
// throughout, so subtraction is addition.
class DecoderState {
 public:
  DecoderState(const GaloisField& F, std::size_t K, std::size_t T) : F_(F), K_(K), T_(T), state_(K), value_(K),
                                                                     sym_(K), var_checks_(K) {}

  // Check from received packets: A = G H (d x c), Y rows are the c payloads.
  std::size_t add_check(std::vector<std::uint32_t> vars, Matrix A, Matrix Y) {
    if (A.rows() != vars.size() || Y.rows() != A.cols() || (Y.rows() && Y.cols() != T_))
      throw Error("check dimensions do not match");
    for (auto v : vars)
      if (v >= K_) throw Error("check refers to a variable out of range");
    Check c;
    c.vars = std::move(vars);
    c.A = std::move(A);
    c.Y = std::move(Y);
    c.degree = 0;
    std::size_t id = checks_.size();
    for (auto v : c.vars) {
      var_checks_[v].push_back(id);
      if (state_[v] == VarState::undecoded) ++c.degree;
    }
    checks_.push_back(std::move(c));
    refresh(id);
    return id;
  }

  // Linear constraint sum coef_i * b_{vars_i} = 0.
  std::size_t add_constraint(std::vector<std::uint32_t> vars, const std::vector<Symbol>& coef) {
    Matrix A(vars.size(), 1);
    for (std::size_t i = 0; i < coef.size(); ++i) A(i, 0) = coef[i];
    return add_check(std::move(vars), std::move(A), Matrix(1, T_));
  }

  // Batch received as packets, with G regenerated from the seed.
  std::size_t add_batch(const Batch& b, const std::vector<Packet>& received) {
    Matrix H = transfer_matrix(received, b.G.cols());
    Matrix Y(received.size(), T_);
    for (std::size_t j = 0; j < received.size(); ++j) std::copy(received[j].payload.begin(), received[j].payload.end(), Y.row(j));
    return add_check(b.contributors, multiply(F_, b.G, H), std::move(Y));
  }

  // Process one decodable check. Returns false at a stall.
  bool step(const BpOptions& o = {}) {
    if (ready_.empty()) return false;
    std::size_t id;
    if (!o.random_order) {
      id = *ready_.begin();
    } else {
      RandomStream s(o.seed, Domain::decoder, {steps_});
      double tot = 0;
      for (auto c : ready_) tot += std::max<std::size_t>(checks_[c].degree, 1);
      double u = s.uniform() * tot;
      id = *ready_.rbegin();
      for (auto c : ready_) {
        u -= std::max<std::size_t>(checks_[c].degree, 1);
        if (u < 0) {
          id = c;
          break;
        }
      }
    }
    ++steps_;
    ready_.erase(id);
    process(id);
    return true;
  }

  void inactivate(std::uint32_t v) {
    if (state_[v] != VarState::undecoded) throw Error("only undecoded variables can be inactivated");
    state_[v] = VarState::inactive;
    value_[v].assign(T_, 0);
    sym_[v].assign(inactive_.size() + 1, 0);
    sym_[v].back() = 1;
    inactive_.push_back(v);
    resolved(v);
  }

  // Undecoded variable with the most edges into unconsumed checks.
  std::uint32_t inactivation_choice() const {
    std::uint32_t best = static_cast<std::uint32_t>(K_);
    std::size_t most = 0;
    for (std::uint32_t v = 0; v < K_; ++v) {
      if (state_[v] != VarState::undecoded) continue;
      std::size_t e = 0;
      for (auto c : var_checks_[v]) e += !checks_[c].consumed;
      if (best == K_ || e > most) best = v, most = e;
    }
    return best;
  }

  // Solve for the inactive variables and substitute them back.
  InactivationReport finish() {
    InactivationReport rep;
    rep.inactivations = inactive_.size();
    rep.inconsistent = inconsistent_;
    const std::size_t I = inactive_.size(), W = I + T_;
    if (undecoded_count() > 0) {
      rep.rank_deficit = undecoded_count();
      return rep;
    }
    if (I > 0) {
      std::vector<Symbol> sys;
      for (const auto& r : residual_) {
        std::vector<Symbol> row(W, 0);
        std::copy(r.sym.begin(), r.sym.end(), row.begin());
        std::copy(r.payload.begin(), r.payload.end(), row.begin() + I);
        sys.insert(sys.end(), row.begin(), row.end());
      }
      std::size_t n = residual_.size();
      auto piv = reduce_rows(F_, sys.data(), n, W, I);
      if (piv.size() < I) {
        rep.rank_deficit = I - piv.size();
        return rep;
      }
      for (std::size_t i = I; i < n; ++i)
        for (std::size_t t = 0; t < T_; ++t)
          if (sys[i * W + I + t]) {
            ++rep.inconsistent;
            break;
          }
      Matrix z(I, T_);
      for (std::size_t i = 0; i < I; ++i) std::copy(sys.begin() + i * W + I, sys.begin() + (i + 1) * W, z.row(i));
      for (std::uint32_t v = 0; v < K_; ++v) {
        auto& s = sym_[v];
        for (std::size_t j = 0; j < s.size(); ++j)
          if (s[j]) F_.axpy(value_[v].data(), z.row(j), s[j], T_);
        s.clear();
      }
      for (auto v : inactive_) state_[v] = VarState::decoded;
      inactive_.clear();
      residual_.clear();
    }
    rep.success = rep.inconsistent == 0;
    return rep;
  }

  std::size_t K() const { return K_; }
  std::size_t T() const { return T_; }
  VarState state(std::uint32_t v) const { return state_[v]; }
  bool decoded(std::uint32_t v) const { return state_[v] == VarState::decoded; }
  // Valid for decoded variables once no inactive variable remains.
  const std::vector<Symbol>& payload(std::uint32_t v) const { return value_[v]; }
  std::size_t decoded_count() const { return std::count(state_.begin(), state_.end(), VarState::decoded); }
  std::size_t undecoded_count() const { return std::count(state_.begin(), state_.end(), VarState::undecoded); }
  std::size_t inactive_count() const { return inactive_.size(); }
  std::size_t check_count() const { return checks_.size(); }
  std::size_t check_degree(std::size_t c) const { return checks_[c].degree; }
  bool check_consumed(std::size_t c) const { return checks_[c].consumed; }
  bool stalled() const { return ready_.empty(); }
  const std::vector<DecodeEvent>& events() const { return events_; }

  // Degree bookkeeping agrees with the variable states.
  bool consistent() const {
    for (const auto& c : checks_) {
      std::size_t d = 0;
      for (auto v : c.vars) d += state_[v] == VarState::undecoded;
      if (!c.consumed && d != c.degree) return false;
    }
    return true;
  }

 private:
  struct Check {
    std::vector<std::uint32_t> vars;
    Matrix A;
    Matrix Y;
    std::size_t degree = 0;
    bool consumed = false;
    bool queued = false;
  };
  struct Residual {
    std::vector<Symbol> sym;
    std::vector<Symbol> payload;
  };

  void refresh(std::size_t id) {
    Check& c = checks_[id];
    if (c.consumed || c.queued) return;
    if (c.degree == 0) {
      if (!inactive_.empty()) {
        c.queued = true;
        ready_.insert(id);
      } else {
        c.consumed = true;
      }
      return;
    }
    if (c.degree > c.A.cols()) return;
    Matrix sub(c.degree, c.A.cols());
    std::size_t r = 0;
    for (std::size_t i = 0; i < c.vars.size(); ++i)
      if (state_[c.vars[i]] == VarState::undecoded) std::copy(c.A.row(i), c.A.row(i) + c.A.cols(), sub.row(r++));
    if (rank(F_, sub) == c.degree) {
      c.queued = true;
      ready_.insert(id);
    }
  }

  void resolved(std::uint32_t v) {
    for (auto id : var_checks_[v]) {
      Check& c = checks_[id];
      if (c.consumed) continue;
      --c.degree;
      refresh(id);
    }
  }

  void process(std::size_t id) {
    Check& c = checks_[id];
    c.consumed = true;
    const std::size_t cols = c.A.cols(), I = inactive_.size();
    std::vector<std::uint32_t> U;
    std::vector<std::size_t> urow;
    for (std::size_t i = 0; i < c.vars.size(); ++i)
      if (state_[c.vars[i]] == VarState::undecoded) U.push_back(c.vars[i]), urow.push_back(i);
    const std::size_t d = U.size(), W = d + T_ + I;
    // Row j: sum_U A_uj b_u = Y_j + sum_R A_kj p_k + (sum_R A_kj s_k) z
    std::vector<Symbol> rows(cols * W, 0);
    for (std::size_t j = 0; j < cols; ++j) {
      Symbol* r = rows.data() + j * W;
      for (std::size_t u = 0; u < d; ++u) r[u] = c.A(urow[u], j);
      std::copy(c.Y.row(j), c.Y.row(j) + T_, r + d);
    }
    for (std::size_t i = 0; i < c.vars.size(); ++i) {
      auto v = c.vars[i];
      if (state_[v] == VarState::undecoded) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        Symbol a = c.A(i, j);
        if (!a) continue;
        Symbol* r = rows.data() + j * W;
        F_.axpy(r + d, value_[v].data(), a, T_);
        F_.axpy(r + d + T_, sym_[v].data(), a, sym_[v].size());
      }
    }
    auto piv = reduce_rows(F_, rows.data(), cols, W, d);
    if (piv.size() != d) throw Error("decoder invariant violated: check was not decodable");
    DecodeEvent ev;
    ev.check = id;
    for (std::size_t i = 0; i < d; ++i) {
      auto v = U[piv[i]];
      const Symbol* r = rows.data() + i * W;
      value_[v].assign(r + d, r + d + T_);
      sym_[v].assign(r + d + T_, r + W);
      state_[v] = VarState::decoded;
      ev.decoded.push_back(v);
    }
    for (std::size_t j = d; j < cols; ++j) {
      const Symbol* r = rows.data() + j * W;
      bool s = std::any_of(r + d + T_, r + W, [](Symbol x) { return x != 0; });
      if (s) {
        residual_.push_back({std::vector<Symbol>(r + d + T_, r + W), std::vector<Symbol>(r + d, r + d + T_)});
      } else if (std::any_of(r + d, r + d + T_, [](Symbol x) { return x != 0; })) {
        ++inconsistent_;
      }
    }
    std::sort(ev.decoded.begin(), ev.decoded.end());
    for (auto v : ev.decoded) resolved(v);
    events_.push_back(std::move(ev));
  }

  const GaloisField& F_;
  std::size_t K_, T_;
  std::vector<VarState> state_;
  std::vector<std::vector<Symbol>> value_;
  std::vector<std::vector<Symbol>> sym_;  // coefficients over inactive variables
  std::vector<std::vector<std::size_t>> var_checks_;
  std::vector<Check> checks_;
  std::set<std::size_t> ready_;
  std::vector<std::uint32_t> inactive_;
  std::vector<Residual> residual_;
  std::vector<DecodeEvent> events_;
  std::size_t inconsistent_ = 0;
  std::uint64_t steps_ = 0;
};

// Run BP until no check is decodable.
inline void bp_decode(DecoderState& st, const BpOptions& o = {}) {
  while (st.step(o)) {
  }
}

// BP with inactivation on stalls, then elimination over the inactive set.
inline InactivationReport inactivation_decode(DecoderState& st, const BpOptions& o = {}) {
  for (;;) {
    bp_decode(st, o);
    if (st.undecoded_count() == 0) break;
    st.inactivate(st.inactivation_choice());
  }
  return st.finish();
}

struct OverheadReport {
  double receiving_overhead = 0;  // sum of (columns - rank)
  double coding_overhead = 0;     // sum of rank - K'
  double coding_rate = 0;         // K' / (RO + CO + K')
  std::size_t inactivations = 0;
  std::size_t batches = 0;
  std::vector<int> ranks;
  std::vector<int> columns;
  bool success = false;
};

inline OverheadReport overheads(const std::vector<int>& ranks, const std::vector<int>& columns, std::size_t k_prime) {
  if (ranks.size() != columns.size()) throw Error("rank and column tallies differ in length");
  OverheadReport r;
  r.ranks = ranks;
  r.columns = columns;
  r.batches = ranks.size();
  double rank_sum = 0;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    r.receiving_overhead += columns[i] - ranks[i];
    rank_sum += ranks[i];
  }
  r.coding_overhead = rank_sum - static_cast<double>(k_prime);
  r.coding_rate = k_prime / (r.receiving_overhead + r.coding_overhead + k_prime);
  return r;
}

}  // namespace bats
