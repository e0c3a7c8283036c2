#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "galois.hpp"
#include "json.hpp"

namespace bats {

enum class Role { source, intermediate, destination };

inline std::string to_string(Role r) {
  switch (r) {
    case Role::source: return "source";
    case Role::intermediate: return "intermediate";
    case Role::destination: return "destination";
  }
  return "?";
}

inline Role role_from_string(const std::string& s) {
  if (s == "source") return Role::source;
  if (s == "intermediate") return Role::intermediate;
  if (s == "destination") return Role::destination;
  throw Error("unknown node role '" + s + "'");
}

struct Node {
  std::string id;
  Role role = Role::intermediate;
};

struct Link {
  int from = 0;
  int to = 0;
  double eps = 0.0;
  int latency = 0;
};

class Topology {
 public:
  std::vector<Node> nodes;
  std::vector<Link> links;

  int add_node(std::string id, Role role) {
    if (index_.count(id)) throw Error("duplicate node id '" + id + "'");
    index_[id] = static_cast<int>(nodes.size());
    nodes.push_back({std::move(id), role});
    return static_cast<int>(nodes.size()) - 1;
  }

  int add_link(int from, int to, double eps, int latency = 0) {
    links.push_back({from, to, eps, latency});
    return static_cast<int>(links.size()) - 1;
  }

  int add_link(const std::string& from, const std::string& to, double eps, int latency = 0) {
    return add_link(node(from), node(to), eps, latency);
  }

  int node(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown node id '" + id + "'");
    return it->second;
  }

  std::vector<int> out_links(int v) const {
    std::vector<int> r;
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].from == v) r.push_back(static_cast<int>(i));
    return r;
  }

  std::vector<int> in_links(int v) const {
    std::vector<int> r;
    for (std::size_t i = 0; i < links.size(); ++i)
      if (links[i].to == v) r.push_back(static_cast<int>(i));
    return r;
  }

  int source() const {
    int s = -1;
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (nodes[v].role == Role::source) {
        if (s >= 0) throw Error("topology has more than one source");
        s = static_cast<int>(v);
      }
    if (s < 0) throw Error("topology has no source");
    return s;
  }

  std::vector<int> destinations() const {
    std::vector<int> r;
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (nodes[v].role == Role::destination) r.push_back(static_cast<int>(v));
    return r;
  }

  // Kahn order; throws on a cycle.
  std::vector<int> topological_order() const {
    std::vector<int> indeg(nodes.size(), 0), order;
    for (const auto& l : links) ++indeg[l.to];
    std::deque<int> ready;
    for (std::size_t v = 0; v < nodes.size(); ++v)
      if (!indeg[v]) ready.push_back(static_cast<int>(v));
    while (!ready.empty()) {
      int v = ready.front();
      ready.pop_front();
      order.push_back(v);
      for (const auto& l : links)
        if (l.from == v && --indeg[l.to] == 0) ready.push_back(l.to);
    }
    if (order.size() != nodes.size()) throw Error("topology has a cycle");
    return order;
  }

  void validate() const {
    for (const auto& l : links) {
      if (l.from < 0 || l.to < 0 || l.from >= static_cast<int>(nodes.size()) || l.to >= static_cast<int>(nodes.size()))
        throw Error("link refers to an unknown node");
      if (l.from == l.to) throw Error("self loop on node '" + nodes[l.from].id + "'");
      if (!(l.eps >= 0.0 && l.eps <= 1.0)) throw Error("link erasure probability must lie in [0,1]");
      if (l.latency < 0) throw Error("link latency must be nonnegative");
    }
    int s = source();
    if (!in_links(s).empty()) throw Error("source has incoming links");
    topological_order();
  }

 private:
  std::map<std::string, int> index_;
};

// Length-k line s - v1 - ... - t with the given per-hop erasures.
inline Topology line_topology(const std::vector<double>& eps, int latency = 0) {
  if (eps.empty()) throw Error("line needs at least one hop");
  Topology t;
  t.add_node("s", Role::source);
  for (std::size_t i = 1; i < eps.size(); ++i) t.add_node("v" + std::to_string(i), Role::intermediate);
  t.add_node("t", Role::destination);
  for (std::size_t i = 0; i < eps.size(); ++i) t.add_link(static_cast<int>(i), static_cast<int>(i + 1), eps[i], latency);
  return t;
}

inline Topology butterfly_topology(double eps, int latency_a = 0, int latency_b = 0) {
  Topology t;
  for (auto [id, r] : std::vector<std::pair<std::string, Role>>{{"s", Role::source},
                                                                {"a", Role::intermediate},
                                                                {"b", Role::intermediate},
                                                                {"c", Role::intermediate},
                                                                {"d", Role::intermediate},
                                                                {"t", Role::destination},
                                                                {"u", Role::destination}})
    t.add_node(id, r);
  t.add_link("s", "a", eps, latency_a);
  t.add_link("s", "b", eps, latency_b);
  t.add_link("a", "c", eps);
  t.add_link("b", "c", eps);
  t.add_link("c", "d", eps);
  t.add_link("a", "t", eps);
  t.add_link("b", "u", eps);
  t.add_link("d", "t", eps);
  t.add_link("d", "u", eps);
  return t;
}

// Source, k middle nodes, and one destination per pair of middle nodes.
inline Topology three_layer_topology(double eps, int middle = 3) {
  Topology t;
  t.add_node("s", Role::source);
  for (int i = 0; i < middle; ++i) t.add_node("m" + std::to_string(i), Role::intermediate);
  for (int i = 0; i < middle; ++i) {
    t.add_node("t" + std::to_string(i), Role::destination);
    t.add_link(0, 1 + i, eps);
  }
  for (int i = 0; i < middle; ++i) {
    t.add_link(1 + i, 1 + middle + i, eps);
    t.add_link(1 + (i + 1) % middle, 1 + middle + i, eps);
  }
  return t;
}

inline nlohmann::json topology_to_json(const Topology& t) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : t.nodes) j["nodes"].push_back({{"id", n.id}, {"role", to_string(n.role)}});
  j["links"] = nlohmann::json::array();
  for (const auto& l : t.links)
    j["links"].push_back({{"from", t.nodes[l.from].id}, {"to", t.nodes[l.to].id}, {"eps", l.eps}, {"latency", l.latency}});
  return j;
}

inline Topology topology_from_json(const nlohmann::json& j) {
  Topology t;
  try {
    for (const auto& n : j.at("nodes")) {
      const auto& id = n.at("id");
      t.add_node(id.is_string() ? id.get<std::string>() : id.dump(), role_from_string(n.at("role").get<std::string>()));
    }
    for (const auto& l : j.at("links")) {
      auto name = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      t.add_link(name(l.at("from")), name(l.at("to")), l.at("eps").get<double>(), l.value("latency", 0));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed topology document: ") + e.what());
  }
  t.validate();
  return t;
}

// Edmonds-Karp on a multigraph with the given per-link capacities.
inline double max_flow(const Topology& t, int s, int d, const std::vector<double>& cap) {
  const std::size_t L = t.links.size();
  std::vector<double> flow(L, 0.0);
  double total = 0;
  for (;;) {
    // BFS over residual arcs: forward on link i is 2i, backward is 2i+1.
    std::vector<int> via(t.nodes.size(), -1);
    std::vector<char> seen(t.nodes.size(), 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty() && !seen[d]) {
      int v = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < L; ++i) {
        const auto& l = t.links[i];
        if (l.from == v && !seen[l.to] && cap[i] - flow[i] > 1e-12) {
          seen[l.to] = 1;
          via[l.to] = static_cast<int>(2 * i);
          q.push_back(l.to);
        } else if (l.to == v && !seen[l.from] && flow[i] > 1e-12) {
          seen[l.from] = 1;
          via[l.from] = static_cast<int>(2 * i + 1);
          q.push_back(l.from);
        }
      }
    }
    if (!seen[d]) break;
    double push = std::numeric_limits<double>::infinity();
    for (int v = d; v != s;) {
      int a = via[v];
      const auto& l = t.links[a / 2];
      push = std::min(push, a % 2 ? flow[a / 2] : cap[a / 2] - flow[a / 2]);
      v = a % 2 ? l.to : l.from;
    }
    for (int v = d; v != s;) {
      int a = via[v];
      const auto& l = t.links[a / 2];
      flow[a / 2] += a % 2 ? -push : push;
      v = a % 2 ? l.to : l.from;
    }
    total += push;
  }
  return total;
}

// Min-cut with link capacity 1 - eps.
inline double min_cut(const Topology& t, int s, int d) {
  std::vector<double> cap;
  for (const auto& l : t.links) cap.push_back(1.0 - l.eps);
  return max_flow(t, s, d, cap);
}

// Each link becomes (1-eps)N parallel links of erasure 1 - 1/N.
inline Topology homogenize(const Topology& t, int N) {
  if (N < 1) throw Error("homogenization granularity must be positive");
  Topology h;
  for (const auto& n : t.nodes) h.add_node(n.id, n.role);
  for (const auto& l : t.links) {
    double c = (1.0 - l.eps) * N;
    long k = std::lround(c);
    if (std::abs(c - k) > 1e-9)
      throw Error("(1-eps)*N is not an integer for eps=" + std::to_string(l.eps) + ", N=" + std::to_string(N) +
                  "; choose another N");
    for (long i = 0; i < k; ++i) h.add_link(l.from, l.to, 1.0 - 1.0 / N, l.latency);
  }
  return h;
}

inline int shrink_batch(int M, double eps, double delta) {
  double f = 1.0 - eps + delta;
  if (!(f > 0.0 && f <= 1.0 + 1e-12)) throw Error("shrink needs 0 < 1 - eps + delta <= 1");
  int m = static_cast<int>(std::lround(M * f));
  if (m < 1) throw Error("shrunk batch size is below 1");
  return std::min(m, M);
}

// A path is a list of link indices from source to destination.
using LinkPath = std::vector<int>;

// Edge-disjoint s-d paths by unit-capacity augmentation, then flow
// decomposition. Ties go to the lowest link index.
inline std::vector<LinkPath> edge_disjoint_paths(const Topology& t, int s, int d) {
  const std::size_t L = t.links.size();
  std::vector<int> flow(L, 0);
  for (;;) {
    std::vector<int> via(t.nodes.size(), -1);
    std::vector<char> seen(t.nodes.size(), 0);
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty() && !seen[d]) {
      int v = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < L; ++i) {
        const auto& l = t.links[i];
        if (l.from == v && !seen[l.to] && !flow[i]) {
          seen[l.to] = 1;
          via[l.to] = static_cast<int>(2 * i);
          q.push_back(l.to);
        } else if (l.to == v && !seen[l.from] && flow[i]) {
          seen[l.from] = 1;
          via[l.from] = static_cast<int>(2 * i + 1);
          q.push_back(l.from);
        }
      }
    }
    if (!seen[d]) break;
    for (int v = d; v != s;) {
      int a = via[v];
      flow[a / 2] = a % 2 ? 0 : 1;
      v = a % 2 ? t.links[a / 2].to : t.links[a / 2].from;
    }
  }
  std::vector<LinkPath> paths;
  for (;;) {
    LinkPath p;
    int v = s;
    while (v != d) {
      int next = -1;
      for (std::size_t i = 0; i < L; ++i)
        if (flow[i] && t.links[i].from == v) {
          next = static_cast<int>(i);
          break;
        }
      if (next < 0) break;
      flow[next] = 0;
      p.push_back(next);
      v = t.links[next].to;
    }
    if (v != d || p.empty()) break;
    paths.push_back(p);
  }
  return paths;
}

struct LinkTree {
  std::vector<int> links;         // parent-to-child links
  std::vector<int> destinations;  // leaves that are destinations
};

// Greedy packing of edge-disjoint source-rooted trees. Each tree hangs off
// one unused source link: a BFS from its head over unused links, pruned to
// the branches that end in destinations.
inline std::vector<LinkTree> edge_disjoint_trees(const Topology& t) {
  int s = t.source();
  auto dests = t.destinations();
  std::vector<char> used(t.links.size(), 0);
  std::vector<LinkTree> trees;
  for (int root : t.out_links(s)) {
    std::vector<int> via(t.nodes.size(), -1);
    std::vector<char> seen(t.nodes.size(), 0);
    seen[s] = 1;
    int head = t.links[root].to;
    seen[head] = 1;
    via[head] = root;
    std::deque<int> q;
    if (t.nodes[head].role != Role::destination) q.push_back(head);
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < t.links.size(); ++i) {
        const auto& l = t.links[i];
        if (!used[i] && l.from == v && !seen[l.to]) {
          seen[l.to] = 1;
          via[l.to] = static_cast<int>(i);
          if (t.nodes[l.to].role != Role::destination) q.push_back(l.to);
        }
      }
    }
    LinkTree tree;
    std::vector<char> keep(t.links.size(), 0);
    for (int d : dests) {
      if (!seen[d]) continue;
      tree.destinations.push_back(d);
      for (int v = d; v != s; v = t.links[via[v]].from) keep[via[v]] = 1;
    }
    if (tree.destinations.empty()) continue;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (keep[i]) {
        tree.links.push_back(static_cast<int>(i));
        used[i] = 1;
      }
    trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace bats
