#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "decoder.hpp"
#include "network_sim.hpp"
#include "precode.hpp"

namespace bats {

struct EndToEndConfig {
  Topology topology;
  SchemeConfig scheme;  // scheme.seed is replaced per trial
  DegreeDistribution psi;
  int k_prime = 0;
  PrecodeSpec precode;
  std::uint32_t max_batches = 100000;
};

struct DestinationOutcome {
  std::string destination;
  OverheadReport report;
  std::size_t payload_mismatches = 0;
};

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::vector<DestinationOutcome> destinations;
};

inline std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  return RandomStream(seed, Domain::trial, {static_cast<std::uint64_t>(trial)}).next();
}

namespace detail {

inline int outer_width(const SchemeConfig& c) {
  if (c.scheme == SchemeTag::butterfly) return 2 * c.M;
  return c.M_tilde ? c.M_tilde : c.M;
}

inline int sent_columns(const SchemeConfig& c) { return c.scheme == SchemeTag::butterfly ? 2 * c.M : c.M; }

}  // namespace detail

// One trial: precode, encode, transmit and decode with inactivation at every
// destination, adding batches until the precoded system has full rank.
// Receiving overhead counts every transmitted column of a batch, erased or not.
inline TrialOutcome run_endtoend_trial(const EndToEndConfig& cfg, std::uint64_t seed, std::size_t trial) {
  switch (cfg.scheme.scheme) {
    case SchemeTag::line:
    case SchemeTag::unicast_joint:
    case SchemeTag::tree_multicast:
    case SchemeTag::butterfly: break;
    default: throw Error("end-to-end runs need a scheme with a single outer code");
  }
  if (cfg.k_prime < 1) throw Error("end-to-end runs need K' >= 1");
  if (cfg.scheme.T < 1) throw Error("end-to-end runs need a positive payload length");
  cfg.psi.validate();
  const auto& F = field_of_size(cfg.scheme.q);
  const std::size_t T = static_cast<std::size_t>(cfg.scheme.T);
  const int W = detail::outer_width(cfg.scheme);
  const int cols = detail::sent_columns(cfg.scheme);

  TrialOutcome out;
  out.trial = trial;
  out.seed = trial_seed(seed, trial);
  SchemeConfig sc = cfg.scheme;
  sc.seed = out.seed;

  RandomStream ps(out.seed, Domain::payload, {~0ull});
  Matrix originals = random_matrix(F, static_cast<std::size_t>(cfg.k_prime), T, ps);
  Matrix inter = precode_encode(F, originals, cfg.precode);
  const int K = static_cast<int>(inter.rows());
  auto parities = parity_rows(F, cfg.k_prime, cfg.precode);

  std::vector<Batch> batches;
  auto batch = [&](std::uint32_t b) -> const Batch& {
    while (batches.size() <= b)
      batches.push_back(generate_batch(F, static_cast<std::uint32_t>(batches.size()), out.seed, cfg.psi, K, W));
    return batches[b];
  };
  BatchSource src = [&](int, std::uint32_t b) {
    const Batch& bt = batch(b);
    Matrix X(static_cast<std::size_t>(W), T);
    for (std::size_t k = 0; k < bt.contributors.size(); ++k)
      for (int j = 0; j < W; ++j) F.axpy(X.row(j), inter.row(bt.contributors[k]), bt.G(k, j), T);
    return X;
  };

  struct Dest {
    DecoderState st;
    std::vector<int> ranks;
    std::size_t fed = 0;
    bool done = false;
    InactivationReport last;
    std::optional<DecoderState> solved;
  };
  std::vector<std::string> names;
  std::vector<Dest> dests;
  auto init = [&](const std::string& name) {
    names.push_back(name);
    dests.push_back(Dest{DecoderState(F, static_cast<std::size_t>(K), T), {}, 0, false, {}, std::nullopt});
    for (std::size_t j = 0; j < parities.size(); ++j) {
      auto vars = parities[j].vars;
      auto coef = parities[j].coef;
      vars.push_back(static_cast<std::uint32_t>(cfg.k_prime + static_cast<int>(j)));
      coef.push_back(1);
      dests.back().st.add_constraint(std::move(vars), coef);
    }
  };

  std::uint32_t n = std::max<std::uint32_t>(1, static_cast<std::uint32_t>((K + W - 1) / W));
  for (;;) {
    sc.batches = std::min(n, cfg.max_batches);
    SimResult sim = run_scheme(cfg.topology, sc, src);
    if (dests.empty())
      for (const auto& t : sim.traces) init(t.destination);
    bool all = true;
    for (std::size_t d = 0; d < dests.size(); ++d) {
      Dest& x = dests[d];
      if (x.done) continue;
      const auto& tr = sim.trace(names[d]);
      double rank_sum = 0;
      for (int r : x.ranks) rank_sum += r;
      for (; x.fed < tr.entries.size() && !x.done; ++x.fed) {
        const auto& e = tr.entries[x.fed];
        const Batch& bt = batch(e.batch);
        x.st.add_check(bt.contributors, multiply(F, bt.G, e.H), e.Y);
        int r = static_cast<int>(rank(F, e.H));
        x.ranks.push_back(r);
        rank_sum += r;
        bp_decode(x.st);
        if (rank_sum + static_cast<double>(parities.size()) < K) continue;
        DecoderState trial_state = x.st;
        auto rep = inactivation_decode(trial_state);
        if (rep.success) {
          x.done = true;
          x.last = rep;
          x.solved.emplace(std::move(trial_state));
        }
      }
      all = all && x.done;
    }
    if (all || sc.batches >= cfg.max_batches) break;
    n = static_cast<std::uint32_t>(std::min<std::uint64_t>(2ull * n, cfg.max_batches));
  }

  for (std::size_t d = 0; d < dests.size(); ++d) {
    Dest& x = dests[d];
    DestinationOutcome o;
    o.destination = names[d];
    o.report = overheads(x.ranks, std::vector<int>(x.ranks.size(), cols), static_cast<std::size_t>(cfg.k_prime));
    o.report.success = x.done;
    o.report.inactivations = x.last.inactivations;
    if (x.done)
      for (int i = 0; i < cfg.k_prime; ++i) {
        const auto& p = x.solved->payload(static_cast<std::uint32_t>(i));
        if (!std::equal(p.begin(), p.end(), originals.row(static_cast<std::size_t>(i)))) ++o.payload_mismatches;
      }
    out.destinations.push_back(std::move(o));
  }
  return out;
}

struct Summary {
  double mean = 0, min = 0, max = 0;
};

inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  s.min = *std::min_element(v.begin(), v.end());
  s.max = *std::max_element(v.begin(), v.end());
  for (double x : v) s.mean += x / static_cast<double>(v.size());
  return s;
}

struct EndToEndSummary {
  std::vector<TrialOutcome> trials;
  Summary coding_overhead, receiving_overhead, inactivations;
  std::size_t failures = 0;
  std::size_t payload_mismatches = 0;
};

// Aggregates over successful (trial, destination) pairs; failures are counted.
inline EndToEndSummary summarize_trials(std::vector<TrialOutcome> trials) {
  EndToEndSummary s;
  std::vector<double> co, ro, in;
  for (const auto& t : trials)
    for (const auto& d : t.destinations) {
      s.payload_mismatches += d.payload_mismatches;
      if (!d.report.success) {
        ++s.failures;
        continue;
      }
      co.push_back(d.report.coding_overhead);
      ro.push_back(d.report.receiving_overhead);
      in.push_back(static_cast<double>(d.report.inactivations));
    }
  s.trials = std::move(trials);
  s.coding_overhead = summarize(co);
  s.receiving_overhead = summarize(ro);
  s.inactivations = summarize(in);
  return s;
}

// Trials are independent given their seeds, so workers take them in any
// order and the result is still ordered by trial index.
inline EndToEndSummary run_endtoend(const EndToEndConfig& cfg, std::uint64_t seed, std::size_t trials,
                                    unsigned workers = 1) {
  std::vector<TrialOutcome> out(trials);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(trials, 1))));
  if (workers == 1) {
    for (std::size_t t = 0; t < trials; ++t) out[t] = run_endtoend_trial(cfg, seed, t);
    return summarize_trials(std::move(out));
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t t; (t = next++) < trials;) out[t] = run_endtoend_trial(cfg, seed, t);
      } catch (...) {
        errors[w] = std::current_exception();
        next = trials;
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return summarize_trials(std::move(out));
}

}  // namespace bats
