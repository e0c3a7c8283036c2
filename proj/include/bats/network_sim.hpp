#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "matrix.hpp"
#include "rank_distribution.hpp"
#include "topology.hpp"

namespace bats {

// Coding vector of one packet with respect to one batch of one outer code.
struct Part {
  int group = 0;
  std::uint32_t batch = 0;
  std::vector<Symbol> cv;
};

// Packets in flight may superpose batches of different outer codes.
struct SimPacket {
  std::vector<Part> parts;  // sorted by (group, batch)
  std::vector<Symbol> payload;
};

// Source packets of a batch: row j is the payload of source packet j.
using BatchSource = std::function<Matrix(int group, std::uint32_t batch)>;

// sum_i coef[i] * src[i], merging parts that refer to the same batch.
inline SimPacket linear_combination(const GaloisField& F, const std::vector<const SimPacket*>& src,
                                    const std::vector<Symbol>& coef) {
  SimPacket out;
  std::size_t T = 0;
  for (const SimPacket* p : src) {
    T = std::max(T, p->payload.size());
    for (const auto& part : p->parts) {
      auto at = std::find_if(out.parts.begin(), out.parts.end(),
                             [&](const Part& x) { return x.group == part.group && x.batch == part.batch; });
      if (at == out.parts.end()) out.parts.push_back({part.group, part.batch, std::vector<Symbol>(part.cv.size(), 0)});
    }
  }
  std::sort(out.parts.begin(), out.parts.end(),
            [](const Part& x, const Part& y) { return std::tie(x.group, x.batch) < std::tie(y.group, y.batch); });
  out.payload.assign(T, 0);
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (!coef[i]) continue;
    const SimPacket& p = *src[i];
    for (const auto& part : p.parts)
      for (auto& o : out.parts)
        if (o.group == part.group && o.batch == part.batch) {
          F.axpy(o.cv.data(), part.cv.data(), coef[i], part.cv.size());
          break;
        }
    F.axpy(out.payload.data(), p.payload.data(), coef[i], p.payload.size());
  }
  return out;
}

inline SimPacket add_packets(const GaloisField& F, const SimPacket& a, const SimPacket& b) {
  return linear_combination(F, {&a, &b}, {1, 1});
}

// Totally random recoding of a buffer into `count` packets.
inline std::vector<SimPacket> recode(const GaloisField& F, const std::vector<SimPacket>& buffer, std::size_t count,
                                     RandomStream& s) {
  std::vector<SimPacket> out;
  if (buffer.empty()) return out;
  std::vector<const SimPacket*> src;
  for (const auto& p : buffer) src.push_back(&p);
  SymbolSource sym(s, F.m());
  std::vector<Symbol> coef(buffer.size());
  for (std::size_t k = 0; k < count; ++k) {
    for (auto& c : coef) c = static_cast<Symbol>(sym.get());
    out.push_back(linear_combination(F, src, coef));
  }
  return out;
}

// Erasure channel: each packet survives independently with probability 1 - eps.
inline std::vector<SimPacket> apply_link(const std::vector<SimPacket>& packets, double eps, RandomStream& s) {
  std::vector<SimPacket> out;
  for (const auto& p : packets)
    if (!s.bernoulli(eps)) out.push_back(p);
  return out;
}

inline bool link_survives(std::uint64_t seed, int link, int group, std::uint32_t batch, std::size_t k, double eps) {
  RandomStream s(seed, Domain::link,
                 {static_cast<std::uint64_t>(link), static_cast<std::uint64_t>(group), batch, static_cast<std::uint64_t>(k)});
  return !s.bernoulli(eps);
}

enum class SchemeTag {
  line,
  unicast_split,
  unicast_joint,
  two_way_relay,
  two_way_relay_pnc,
  tree_multicast,
  butterfly,
  butterfly_split
};

inline std::string to_string(SchemeTag s) {
  switch (s) {
    case SchemeTag::line: return "line";
    case SchemeTag::unicast_split: return "unicast_split";
    case SchemeTag::unicast_joint: return "unicast_joint";
    case SchemeTag::two_way_relay: return "two_way_relay";
    case SchemeTag::two_way_relay_pnc: return "two_way_relay_pnc";
    case SchemeTag::tree_multicast: return "tree_multicast";
    case SchemeTag::butterfly: return "butterfly";
    case SchemeTag::butterfly_split: return "butterfly_split";
  }
  return "?";
}

inline SchemeTag scheme_from_string(const std::string& s) {
  for (auto t : {SchemeTag::line, SchemeTag::unicast_split, SchemeTag::unicast_joint, SchemeTag::two_way_relay,
                 SchemeTag::two_way_relay_pnc, SchemeTag::tree_multicast, SchemeTag::butterfly,
                 SchemeTag::butterfly_split})
    if (to_string(t) == s) return t;
  throw Error("unknown scheme '" + s + "'");
}

struct SchemeConfig {
  SchemeTag scheme = SchemeTag::line;
  int M = 16;
  unsigned q = 256;
  int T = 0;
  std::uint32_t batches = 1;  // per outer code
  std::uint64_t seed = 0;
  int M_tilde = 0;            // shrunk outer batch size, 0 when unused
  int homogenize = 0;         // granularity N_h, 0 when unused

  void validate() const {
    width_for_size(q);
    if (M < 1) throw Error("batch size must be positive");
    if (T < 0) throw Error("payload length must be nonnegative");
    if (batches < 1) throw Error("at least one batch is required");
    if (M_tilde < 0 || M_tilde > M) throw Error("shrunk batch size must lie in [1, M]");
    if (homogenize < 0) throw Error("homogenization granularity must be nonnegative");
  }
};

struct TraceEntry {
  std::uint32_t batch = 0;
  Matrix H;  // width x columns
  Matrix Y;  // columns x T, payload after cancellation
  int columns() const { return static_cast<int>(H.cols()); }
};

struct DestinationTrace {
  std::string destination;
  int group = 0;
  int width = 0;  // rows of H: outer batch size
  std::vector<TraceEntry> entries;

  std::vector<int> ranks(const GaloisField& F) const {
    std::vector<int> r;
    for (const auto& e : entries) r.push_back(static_cast<int>(rank(F, e.H)));
    return r;
  }
};

struct SimResult {
  std::vector<DestinationTrace> traces;
  std::map<std::string, int> max_buffer;  // per node, stored packets after each slot
  int isolation_violations = 0;
  std::size_t slots = 0;

  const DestinationTrace& trace(const std::string& dest, int group = 0) const {
    for (const auto& t : traces)
      if (t.destination == dest && t.group == group) return t;
    throw Error("no trace for destination '" + dest + "'");
  }
};

inline RankDistribution trace_rank_dist(const GaloisField& F, const DestinationTrace& t) {
  return empirical_rank_dist(t.ranks(F), t.width);
}

namespace sim {

enum class NodeMode { same, distinct, group_combine };

// Destination bookkeeping: which groups it decodes and in what order.
struct Receiver {
  std::vector<int> order;  // earlier groups are cancelled from later ones
  std::set<int> wanted;
};

class Collector {
 public:
  Collector(const GaloisField& F, const Topology& topo, const SchemeConfig& cfg, const BatchSource& src)
      : F_(F), topo_(topo), cfg_(cfg), src_(src) {}

  void want(int node, int group, int width, const Receiver& r) {
    auto& x = receivers_[node];
    if (x.order.empty()) x.order = r.order;
    x.wanted.insert(r.wanted.begin(), r.wanted.end());
    widths_[{node, group}] = width;
    cols_[{node, group}];
  }

  void receive(int node, const SimPacket& p) {
    auto it = receivers_.find(node);
    if (it == receivers_.end()) return;
    const Receiver& r = it->second;
    int pos = -1;
    const Part* target = nullptr;
    for (const auto& part : p.parts) {
      int at = static_cast<int>(std::find(r.order.begin(), r.order.end(), part.group) - r.order.begin());
      if (at >= pos) pos = at, target = &part;
    }
    if (!target || !r.wanted.count(target->group)) return;
    std::vector<Symbol> y = p.payload;
    for (const auto& part : p.parts) {
      if (&part == target || y.empty()) continue;
      Matrix X = src_(part.group, part.batch);
      for (std::size_t j = 0; j < part.cv.size(); ++j) F_.axpy(y.data(), X.row(j), part.cv[j], y.size());
    }
    auto& col = cols_[{node, target->group}][target->batch];
    col.first.push_back(target->cv);
    col.second.push_back(std::move(y));
  }

  // One entry per batch id in [0, n), empty when nothing arrived.
  void finish(SimResult& res, const std::map<int, std::uint32_t>& batches_per_group) {
    for (auto& [key, per_batch] : cols_) {
      auto [node, group] = key;
      DestinationTrace t;
      t.destination = topo_.nodes[node].id;
      t.group = group;
      t.width = widths_[key];
      std::uint32_t n = batches_per_group.at(group);
      for (std::uint32_t b = 0; b < n; ++b) {
        TraceEntry e;
        e.batch = b;
        auto it = per_batch.find(b);
        std::size_t c = it == per_batch.end() ? 0 : it->second.first.size();
        e.H = Matrix(t.width, c);
        e.Y = Matrix(c, cfg_.T);
        for (std::size_t j = 0; j < c; ++j) {
          for (int i = 0; i < t.width; ++i) e.H(i, j) = it->second.first[j][i];
          std::copy(it->second.second[j].begin(), it->second.second[j].end(), e.Y.row(j));
        }
        t.entries.push_back(std::move(e));
      }
      res.traces.push_back(std::move(t));
    }
  }

 private:
  const GaloisField& F_;
  const Topology& topo_;
  const SchemeConfig& cfg_;
  const BatchSource& src_;
  std::map<int, Receiver> receivers_;
  std::map<std::pair<int, int>, int> widths_;
  std::map<std::pair<int, int>, std::map<std::uint32_t, std::pair<std::vector<std::vector<Symbol>>, std::vector<std::vector<Symbol>>>>>
      cols_;
};

// Source emission of local batch l: packets per source out-link, in slot order.
using Emitter = std::function<std::vector<std::vector<SimPacket>>(std::size_t l)>;

// Slot-synchronous run of batches over an acyclic overlay. A node recodes a
// batch once its last possible packet has arrived and sends one packet per
// out-link per slot for the next M slots.
struct Overlay {
  std::vector<int> links;
  std::size_t count = 0;  // local batches
  Emitter emit;
  std::map<int, NodeMode> modes;
  std::uint64_t tag = 0;  // keeps randomness of parallel overlays apart
};

inline bool isolated(const std::vector<SimPacket>& buf) {
  std::map<int, std::uint32_t> seen;
  for (const auto& p : buf)
    for (const auto& part : p.parts) {
      auto [it, fresh] = seen.emplace(part.group, part.batch);
      if (!fresh && it->second != part.batch) return false;
    }
  return true;
}

inline void run_overlay(const GaloisField& F, const Topology& topo, const SchemeConfig& cfg, const Overlay& ov,
                        Collector& col, SimResult& res) {
  const int M = cfg.M;
  const int s = topo.source();
  std::set<int> on(ov.links.begin(), ov.links.end());
  std::map<int, std::vector<int>> outs, ins;
  for (int l : ov.links) {
    outs[topo.links[l].from].push_back(l);
    ins[topo.links[l].to].push_back(l);
  }
  std::vector<int> order;
  for (int v : topo.topological_order())
    if (v == s || ins.count(v)) order.push_back(v);
  std::map<int, long> off;
  off[s] = 0;
  for (int v : order) {
    if (v == s) continue;
    long o = 0;
    for (int l : ins[v]) o = std::max(o, off[topo.links[l].from] + M - 1 + topo.links[l].latency);
    off[v] = o;
  }
  long last = 0;
  for (auto& [v, o] : off) last = std::max(last, o);
  const long total = static_cast<long>(ov.count) * M + last + M;

  struct State {
    std::map<std::size_t, std::vector<SimPacket>> pending;            // received, by local batch
    std::map<long, std::vector<std::pair<std::size_t, SimPacket>>> inbox;  // arrival slot -> packets
    std::vector<std::vector<SimPacket>> sending;                      // per out-link, current batch
    std::size_t sending_batch = 0;
    int peak = 0;
  };
  std::map<int, State> st;
  for (int v : order) st[v].sending.resize(outs[v].size());

  auto first_batch_id = [&](const SimPacket& p) { return p.parts.empty() ? 0u : p.parts.front().batch; };

  for (long slot = 0; slot < total; ++slot) {
    for (int v : order) {
      State& x = st[v];
      auto in = x.inbox.find(slot);
      if (in != x.inbox.end()) {
        for (auto& [l, p] : in->second) {
          if (topo.nodes[v].role == Role::destination) col.receive(v, p);
          else x.pending[l].push_back(std::move(p));
        }
        x.inbox.erase(in);
      }
      if (topo.nodes[v].role == Role::destination && !outs.count(v)) continue;
      long rel = slot - off[v];
      if (rel < 0) continue;
      std::size_t l = static_cast<std::size_t>(rel / M);
      std::size_t k = static_cast<std::size_t>(rel % M);
      if (l >= ov.count) continue;
      const auto& ol = outs[v];
      if (k == 0) {
        for (auto& q : x.sending) q.clear();
        x.sending_batch = l;
        if (v == s) {
          auto pk = ov.emit(l);
          for (std::size_t j = 0; j < ol.size(); ++j) x.sending[j] = std::move(pk[j]);
        } else {
          std::vector<SimPacket> buf = std::move(x.pending[l]);
          x.pending.erase(l);
          if (!isolated(buf)) ++res.isolation_violations;
          std::uint64_t bid = buf.empty() ? 0 : first_batch_id(buf.front());
          RandomStream rs(cfg.seed, Domain::recode, {ov.tag, static_cast<std::uint64_t>(v), bid, l});
          NodeMode mode = ov.modes.count(v) ? ov.modes.at(v) : NodeMode::same;
          if (mode == NodeMode::distinct) {
            auto out = recode(F, buf, static_cast<std::size_t>(M) * ol.size(), rs);
            for (std::size_t j = 0; j < ol.size() && !out.empty(); ++j)
              x.sending[j].assign(out.begin() + j * M, out.begin() + (j + 1) * M);
          } else if (mode == NodeMode::same) {
            auto out = recode(F, buf, M, rs);
            for (auto& q : x.sending) q = out;
          } else {
            std::map<int, std::vector<SimPacket>> by_group;
            for (auto& p : buf) by_group[p.parts.front().group].push_back(p);
            std::vector<SimPacket> out;
            for (auto& [g, gb] : by_group) {
              auto r = recode(F, gb, M, rs);
              if (out.empty()) out = std::move(r);
              else
                for (int i = 0; i < M; ++i) out[i] = add_packets(F, out[i], r[i]);
            }
            for (auto& q : x.sending) q = out;
          }
        }
      }
      for (std::size_t j = 0; j < ol.size(); ++j) {
        if (k >= x.sending[j].size()) continue;
        const Link& lk = topo.links[ol[j]];
        const SimPacket& p = x.sending[j][k];
        int g = p.parts.empty() ? 0 : p.parts.front().group;
        if (link_survives(cfg.seed, ol[j], g, first_batch_id(p), k, lk.eps))
          st[lk.to].inbox[slot + lk.latency].emplace_back(l, p);
      }
      if (v != s) {
        int stored = 0;
        for (auto& [b, pk] : x.pending) stored += static_cast<int>(pk.size());
        std::size_t left = 0;
        NodeMode mode = ov.modes.count(v) ? ov.modes.at(v) : NodeMode::same;
        for (std::size_t j = 0; j < x.sending.size(); ++j) {
          std::size_t rem = x.sending[j].size() > k + 1 ? x.sending[j].size() - k - 1 : 0;
          if (mode == NodeMode::distinct) left += rem;
          else left = std::max(left, rem);
        }
        x.peak = std::max(x.peak, stored + static_cast<int>(left));
      }
    }
  }
  for (int v : order)
    if (v != s) {
      auto& mb = res.max_buffer[topo.nodes[v].id];
      mb = std::max(mb, st[v].peak);
    }
  long busy = 0;
  for (auto& [v, o] : off)
    if (!outs[v].empty()) busy = std::max(busy, o);
  res.slots = std::max<std::size_t>(res.slots, ov.count * M + static_cast<std::size_t>(busy));
}

// Source packets of batch b of `group`: M of them, or the M-fold expansion
// of a shrunk batch of size width.
inline std::vector<SimPacket> source_packets(const GaloisField& F, const SchemeConfig& cfg, const BatchSource& src,
                                             int group, std::uint32_t b, int width, int count) {
  Matrix X = src ? src(group, b) : Matrix(width, 0);
  std::vector<SimPacket> out(count);
  Matrix E;
  bool expand = width < count;
  if (expand) {
    RandomStream s(cfg.seed, Domain::shrink, {static_cast<std::uint64_t>(group), b});
    E = random_matrix(F, width, count, s);
  }
  for (int j = 0; j < count; ++j) {
    Part part{group, b, std::vector<Symbol>(width, 0)};
    out[j].payload.assign(X.cols(), 0);
    if (expand) {
      for (int i = 0; i < width; ++i) {
        part.cv[i] = E(i, j);
        F.axpy(out[j].payload.data(), X.row(i), E(i, j), X.cols());
      }
    } else {
      part.cv[j] = 1;
      std::copy(X.row(j), X.row(j) + X.cols(), out[j].payload.begin());
    }
    out[j].parts.push_back(std::move(part));
  }
  return out;
}

inline std::vector<int> line_path(const Topology& t) {
  int s = t.source();
  auto dests = t.destinations();
  if (dests.size() != 1) throw Error("line scheme needs exactly one destination");
  std::vector<int> path;
  for (int v = s; v != dests[0];) {
    auto o = t.out_links(v);
    if (o.size() != 1) throw Error("line scheme needs a line topology");
    path.push_back(o[0]);
    v = t.links[o[0]].to;
    if (path.size() > t.links.size()) throw Error("line scheme needs a line topology");
  }
  if (path.size() != t.links.size()) throw Error("line scheme needs a line topology");
  for (std::size_t v = 0; v < t.nodes.size(); ++v)
    if (t.in_links(static_cast<int>(v)).size() > 1) throw Error("line scheme needs a line topology");
  return path;
}

struct ButterflyNodes {
  int s, a, b, c, d, t, u;
};

inline ButterflyNodes butterfly_nodes(const Topology& g) {
  auto fail = [] { throw Error("scheme needs the butterfly topology"); };
  if (g.nodes.size() != 7 || g.links.size() != 9) fail();
  ButterflyNodes n{};
  n.s = g.source();
  auto so = g.out_links(n.s);
  if (so.size() != 2) fail();
  n.a = g.links[so[0]].to;
  n.b = g.links[so[1]].to;
  auto child = [&](int v, bool dest) {
    for (int l : g.out_links(v))
      if ((g.nodes[g.links[l].to].role == Role::destination) == dest) return g.links[l].to;
    fail();
    return -1;
  };
  n.c = child(n.a, false);
  if (child(n.b, false) != n.c) fail();
  n.t = child(n.a, true);
  n.u = child(n.b, true);
  auto co = g.out_links(n.c);
  if (co.size() != 1) fail();
  n.d = g.links[co[0]].to;
  auto dout = g.out_links(n.d);
  if (dout.size() != 2 || g.in_links(n.c).size() != 2) fail();
  std::set<int> dd{g.links[dout[0]].to, g.links[dout[1]].to};
  if (dd != std::set<int>{n.t, n.u} || n.t == n.u) fail();
  return n;
}

}  // namespace sim

// Two-way relay over a two-hop line s - a - t whose links are used in both
// directions with the same erasure probability. Flow 0 goes s -> t, flow 1
// goes t -> s; each endpoint cancels its own flow.
inline SimResult run_two_way(const GaloisField& F, const Topology& topo, const SchemeConfig& cfg,
                             const BatchSource& src, bool pnc) {
  if (cfg.M_tilde) throw Error("batch shrinking is only supported on single-path schemes");
  auto path = sim::line_path(topo);
  if (path.size() != 2) throw Error("two-way relay needs the three-node line s - a - t");
  const int M = cfg.M;
  const int s = topo.source(), a = topo.links[path[0]].to, t = topo.links[path[1]].to;
  const double e1 = topo.links[path[0]].eps, e2 = topo.links[path[1]].eps;
  // Directed link ids for randomness: 0 s->a, 1 t->a, 2 a->s, 3 a->t.
  SimResult res;
  sim::Collector col(F, topo, cfg, src);
  col.want(t, 0, M, {{1, 0}, {0}});
  col.want(s, 1, M, {{0, 1}, {1}});
  int peak = 0;
  for (std::uint32_t b = 0; b < cfg.batches; ++b) {
    auto ps = sim::source_packets(F, cfg, src, 0, b, M, M);
    auto pt = sim::source_packets(F, cfg, src, 1, b, M, M);
    std::vector<SimPacket> out;
    RandomStream rs(cfg.seed, Domain::recode, {1, b});
    if (!pnc) {
      std::vector<SimPacket> bs, bt;
      for (int k = 0; k < M; ++k) {
        if (link_survives(cfg.seed, 0, 0, b, k, e1)) bs.push_back(ps[k]);
        if (link_survives(cfg.seed, 1, 1, b, k, e2)) bt.push_back(pt[k]);
      }
      peak = std::max<int>(peak, static_cast<int>(bs.size() + bt.size()));
      auto rs_ = recode(F, bs, M, rs);
      auto rt_ = recode(F, bt, M, rs);
      for (int k = 0; k < M; ++k) {
        if (!rs_.empty() && !rt_.empty()) out.push_back(add_packets(F, rs_[k], rt_[k]));
        else if (!rs_.empty()) out.push_back(rs_[k]);
        else if (!rt_.empty()) out.push_back(rt_[k]);
      }
    } else {
      std::vector<SimPacket> buf;
      RandomStream co(cfg.seed, Domain::pnc, {b});
      SymbolSource sym(co, F.m());
      for (int k = 0; k < M; ++k) {
        bool cs = link_survives(cfg.seed, 0, 0, b, k, e1), ct = link_survives(cfg.seed, 1, 1, b, k, e2);
        if (cs && ct) {
          auto x = static_cast<Symbol>(sym.nonzero()), y = static_cast<Symbol>(sym.nonzero());
          buf.push_back(linear_combination(F, {&ps[k], &pt[k]}, {x, y}));
        } else if (cs) {
          buf.push_back(ps[k]);
        } else if (ct) {
          buf.push_back(pt[k]);
        }
      }
      peak = std::max<int>(peak, static_cast<int>(buf.size()));
      out = recode(F, buf, M, rs);
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      if (link_survives(cfg.seed, 2, 2, b, k, e1)) col.receive(s, out[k]);
      if (link_survives(cfg.seed, 3, 3, b, k, e2)) col.receive(t, out[k]);
    }
  }
  res.max_buffer[topo.nodes[a].id] = peak;
  res.slots = static_cast<std::size_t>(cfg.batches) * M * (pnc ? 2 : 3);
  col.finish(res, {{0, cfg.batches}, {1, cfg.batches}});
  return res;
}

// Runs one scheme. With no batch source the payload is empty and only the
// coding vectors travel.
inline SimResult run_scheme(const Topology& topo_in, const SchemeConfig& cfg, const BatchSource& src = {}) {
  cfg.validate();
  topo_in.validate();
  const auto& F = field_of_size(cfg.q);
  if (src && cfg.T == 0) throw Error("a batch source needs a positive payload length");
  BatchSource source = src;
  if (!source && cfg.T > 0)
    source = [&](int group, std::uint32_t b) {
      RandomStream s(cfg.seed, Domain::payload, {static_cast<std::uint64_t>(group), b});
      int w = cfg.scheme == SchemeTag::butterfly ? 2 * cfg.M : (cfg.M_tilde ? cfg.M_tilde : cfg.M);
      return random_matrix(F, w, cfg.T, s);
    };
  if (cfg.scheme == SchemeTag::two_way_relay || cfg.scheme == SchemeTag::two_way_relay_pnc)
    return run_two_way(F, topo_in, cfg, source, cfg.scheme == SchemeTag::two_way_relay_pnc);

  Topology topo = cfg.homogenize ? homogenize(topo_in, cfg.homogenize) : topo_in;
  const int M = cfg.M;
  const int W = cfg.M_tilde ? cfg.M_tilde : M;
  SimResult res;
  sim::Collector col(F, topo, cfg, source);
  std::map<int, std::uint32_t> per_group;
  const int s = topo.source();

  auto single_stream = [&](std::vector<std::vector<int>> overlays, bool joint) {
    const std::size_t L = overlays.size();
    if (L == 0) throw Error("no route from the source to a destination");
    for (std::size_t p = 0; p < L; ++p) {
      sim::Overlay ov;
      ov.links = overlays[p];
      ov.tag = p;
      int group = joint ? 0 : static_cast<int>(p);
      ov.count = joint ? (cfg.batches + L - 1 - p) / L : cfg.batches;
      std::size_t outs = 0;
      for (int l : ov.links) outs += topo.links[l].from == s;
      ov.emit = [&, group, p, L, joint, outs](std::size_t l) {
        std::uint32_t b = static_cast<std::uint32_t>(joint ? l * L + p : l);
        auto pk = sim::source_packets(F, cfg, source, group, b, W, M);
        return std::vector<std::vector<SimPacket>>(outs, pk);
      };
      if (!joint) per_group[group] = cfg.batches;
      for (int l : ov.links) {
        int v = topo.links[l].to;
        if (topo.nodes[v].role == Role::destination) col.want(v, group, W, {{group}, {group}});
      }
      sim::run_overlay(F, topo, cfg, ov, col, res);
    }
    if (joint) {
      per_group[0] = cfg.batches;
      for (int d : topo.destinations()) col.want(d, 0, W, {{0}, {0}});
    }
  };

  switch (cfg.scheme) {
    case SchemeTag::line:
      single_stream({sim::line_path(topo)}, true);
      break;
    case SchemeTag::unicast_split:
    case SchemeTag::unicast_joint: {
      auto d = topo.destinations();
      if (d.size() != 1) throw Error("unicast schemes need exactly one destination");
      auto paths = edge_disjoint_paths(topo, s, d[0]);
      single_stream(std::vector<std::vector<int>>(paths.begin(), paths.end()), cfg.scheme == SchemeTag::unicast_joint);
      break;
    }
    case SchemeTag::tree_multicast: {
      std::vector<std::vector<int>> trees;
      for (auto& tr : edge_disjoint_trees(topo)) trees.push_back(tr.links);
      single_stream(trees, true);
      break;
    }
    case SchemeTag::butterfly:
    case SchemeTag::butterfly_split: {
      if (cfg.M_tilde) throw Error("batch shrinking is only supported on single-path schemes");
      auto n = sim::butterfly_nodes(topo);
      bool split = cfg.scheme == SchemeTag::butterfly_split;
      sim::Overlay ov;
      for (std::size_t l = 0; l < topo.links.size(); ++l) ov.links.push_back(static_cast<int>(l));
      ov.count = cfg.batches;
      ov.modes[n.a] = ov.modes[n.b] = sim::NodeMode::distinct;
      ov.modes[n.c] = split ? sim::NodeMode::group_combine : sim::NodeMode::same;
      ov.modes[n.d] = sim::NodeMode::same;
      auto so = topo.out_links(s);
      bool a_first = topo.links[so[0]].to == n.a;
      ov.emit = [&, split, a_first](std::size_t l) {
        std::vector<std::vector<SimPacket>> out(2);
        auto b = static_cast<std::uint32_t>(l);
        if (split) {
          out[0] = sim::source_packets(F, cfg, source, 0, b, M, M);
          out[1] = sim::source_packets(F, cfg, source, 1, b, M, M);
        } else {
          auto pk = sim::source_packets(F, cfg, source, 0, b, 2 * M, 2 * M);
          out[0].assign(pk.begin(), pk.begin() + M);
          out[1].assign(pk.begin() + M, pk.end());
        }
        if (!a_first) std::swap(out[0], out[1]);
        return out;
      };
      if (split) {
        col.want(n.t, 0, M, {{0, 1}, {0, 1}});
        col.want(n.t, 1, M, {{0, 1}, {0, 1}});
        col.want(n.u, 1, M, {{1, 0}, {0, 1}});
        col.want(n.u, 0, M, {{1, 0}, {0, 1}});
        per_group = {{0, cfg.batches}, {1, cfg.batches}};
      } else {
        col.want(n.t, 0, 2 * M, {{0}, {0}});
        col.want(n.u, 0, 2 * M, {{0}, {0}});
        per_group = {{0, cfg.batches}};
      }
      sim::run_overlay(F, topo, cfg, ov, col, res);
      break;
    }
    default:
      throw Error("unsupported scheme");
  }
  col.finish(res, per_group);
  return res;
}

inline std::string trace_csv(const GaloisField& F, const SimResult& r) {
  std::string out = "batch_id,destination,columns,rank\n";
  for (const auto& t : r.traces) {
    auto ranks = t.ranks(F);
    for (std::size_t i = 0; i < t.entries.size(); ++i)
      out += std::to_string(t.entries[i].batch) + "," + t.destination + (t.group ? "#" + std::to_string(t.group) : "") +
             "," + std::to_string(t.entries[i].columns()) + "," + std::to_string(ranks[i]) + "\n";
  }
  return out;
}

}  // namespace bats
