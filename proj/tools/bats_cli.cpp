#include <bats/bp_trajectory.hpp>
#include <bats/degree_optimization.hpp>
#include <bats/endtoend.hpp>
#include <bats/json_io.hpp>
#include <bats/network_sim.hpp>
#include <bats/topology.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

using namespace bats;

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunContext {
  std::uint64_t seed = 0;
  std::size_t trials = 1;
};

struct Output {
  Json json;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::map<std::string, double> summary;  // scalar metrics, used by sweep
};

using Command = std::function<Output(const Json&, const RunContext&)>;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(std::string("config field '") + key + "' is malformed");
  }
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(std::string("config needs field '") + key + "'");
  return j.at(key);
}

Json resolve_file(const Json& j) {
  if (j.is_object() && j.contains("file")) return read_json_file(j.at("file").get<std::string>());
  return j;
}

// {"M","h"} | {"file"} | {"M","hops"}: the last is the line recursion.
RankDistribution rank_dist_item(const Json& item, double q) {
  Json j = resolve_file(item);
  if (j.is_object() && j.contains("hops"))
    return line_rank_dist(detail::field_of<int>(j, "M", "rank distribution"),
                          detail::field_of<std::vector<double>>(j, "hops", "rank distribution"), q);
  return rank_dist_from_json(j);
}

std::vector<RankDistribution> rank_dist_list(const Json& cfg, double q) {
  std::vector<RankDistribution> out;
  if (cfg.contains("rank_distribution")) out.push_back(rank_dist_item(cfg.at("rank_distribution"), q));
  if (cfg.contains("rank_distributions")) {
    const Json& a = cfg.at("rank_distributions");
    if (!a.is_array()) throw Error("'rank_distributions' must be an array");
    for (const auto& item : a) out.push_back(rank_dist_item(item, q));
  }
  return out;
}

Topology topology_item(const Json& item) {
  Json j = resolve_file(item);
  if (!j.is_object()) throw Error("topology must be an object");
  if (j.contains("line")) return line_topology(j.at("line").get<std::vector<double>>(), get_or(j, "latency", 0));
  if (j.contains("butterfly"))
    return butterfly_topology(j.at("butterfly").get<double>(), get_or(j, "latency_a", 0), get_or(j, "latency_b", 0));
  if (j.contains("three_layer")) return three_layer_topology(j.at("three_layer").get<double>(), get_or(j, "middle", 3));
  try {
    return topology_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed topology: ") + e.what());
  }
}

SchemeConfig scheme_item(const Json& j) {
  if (!j.is_object()) throw Error("'scheme' must be an object");
  SchemeConfig c;
  c.scheme = scheme_from_string(get_or<std::string>(j, "scheme", "line"));
  c.M = get_or(j, "M", c.M);
  c.q = get_or(j, "q", c.q);
  c.T = get_or(j, "T", c.T);
  c.batches = get_or(j, "batches", c.batches);
  c.M_tilde = get_or(j, "M_tilde", c.M_tilde);
  c.homogenize = get_or(j, "homogenize", c.homogenize);
  c.validate();
  return c;
}

OptimizeOptions optimize_options(const Json& cfg) {
  OptimizeOptions o;
  o.grid = get_or(cfg, "grid", o.grid);
  o.max_degree = get_or(cfg, "max_degree", o.max_degree);
  o.refine = get_or(cfg, "refine", o.refine);
  if (o.grid < 1) throw Error("grid must be positive");
  return o;
}

// Constraint set: listed distributions, all distributions of batch size M,
// or those with mean rank >= mu. The last two use exact vertices unless
// "samples" asks for random members instead.
struct ConstraintSet {
  std::vector<RankDistribution> H;
  std::string kind = "listed";
  bool sampled = false;
};

ConstraintSet constraint_set(const Json& cfg, double q, const RunContext& ctx) {
  ConstraintSet s;
  s.H = rank_dist_list(cfg, q);
  if (!cfg.contains("set")) return s;
  const Json& set = cfg.at("set");
  int M = detail::field_of<int>(set, "M", "constraint set");
  int samples = get_or(set, "samples", 0);
  if (M < 1 || samples < 0) throw Error("constraint set needs M >= 1 and samples >= 0");
  RandomStream rs(ctx.seed, Domain::sampler, {});
  s.sampled = samples > 0;
  if (set.contains("mean_rank")) {
    double mu = set.at("mean_rank").get<double>();
    s.kind = "mean_rank";
    if (!s.sampled) {
      auto V = mean_rank_vertices(M, mu);
      s.H.insert(s.H.end(), V.begin(), V.end());
    }
    for (int i = 0; i < samples; ++i) s.H.push_back(sample_mean_rank_distribution(M, mu, rs));
  } else {
    s.kind = "all";
    if (!s.sampled) {
      auto V = rank_point_masses(M);
      s.H.insert(s.H.end(), V.begin(), V.end());
    }
    for (int i = 0; i < samples; ++i) s.H.push_back(sample_rank_distribution(M, rs));
  }
  return s;
}

struct Optimized {
  OptimizeResult res;
  ConstraintSet set;
  std::string problem;
};

Optimized run_optimize(const Json& cfg, const RunContext& ctx) {
  double q = get_or(cfg, "q", 256.0);
  double eta = get_or(cfg, "eta", 0.01);
  if (!(eta > 0 && eta < 1)) throw Error("eta must lie in (0,1)");
  Optimized o;
  o.problem = get_or<std::string>(cfg, "problem", "p1");
  o.set = constraint_set(cfg, q, ctx);
  const auto& H = o.set.H;
  if (H.empty()) throw Error("optimization needs at least one rank distribution");
  auto opts = optimize_options(cfg);
  if (o.problem == "p1" || o.problem == "p4") {
    if (H.size() != 1) throw Error(o.problem + " takes exactly one rank distribution");
    if (o.problem == "p1") o.res = optimize_p1(H[0], q, eta, opts);
    else
      o.res = optimize_p4(H[0], q, eta, detail::field_of<double>(cfg, "K", "p4"), detail::field_of<double>(cfg, "c", "p4"),
                          detail::field_of<double>(cfg, "c_prime", "p4"), opts);
  } else if (o.problem == "p2") {
    o.res = optimize_p2(H, q, eta, opts);
  } else if (o.problem == "p3") {
    o.res = optimize_p3(H, q, eta, opts);
  } else {
    throw Error("unknown problem '" + o.problem + "'");
  }
  return o;
}

DegreeDistribution psi_item(const Json& item, const RunContext& ctx) {
  Json j = resolve_file(item);
  if (j.is_object() && j.contains("optimize")) return run_optimize(j.at("optimize"), ctx).res.psi;
  // An optimize report carries its result under "psi".
  if (j.is_object() && j.contains("psi") && j.at("psi").is_object()) return degree_dist_from_json(j.at("psi"));
  return degree_dist_from_json(j);
}

Output cmd_analyze(const Json& cfg, const RunContext&) {
  double q = get_or(cfg, "q", 256.0);
  Output out;
  out.json = {{"schema", 1}, {"command", "analyze"}, {"q", q}};
  bool single = cfg.contains("rank_distribution") || cfg.contains("hops") || cfg.contains("h");
  if (single) {
    auto h = rank_dist_item(cfg.contains("rank_distribution") ? cfg.at("rank_distribution") : cfg, q);
    auto e = effective_dist(h, q);
    double er = expected_rank(h), ew = e.weighted_sum();
    out.json["M"] = h.M;
    out.json["h"] = h.h;
    out.json["hbar"] = e.hbar;
    out.json["hbar_prime"] = e.hbar_prime;
    out.json["expected_rank"] = er;
    out.json["effective_rank_sum"] = ew;
    out.json["normalized_expected_rank"] = h.M ? er / h.M : 0.0;
    out.summary = {{"expected_rank", er}, {"effective_rank_sum", ew}};
  }
  if (cfg.contains("sweep")) {
    const Json& sw = cfg.at("sweep");
    auto Ms = detail::field_of<std::vector<int>>(sw, "M", "sweep");
    auto ks = detail::field_of<std::vector<int>>(sw, "k", "sweep");
    double eps = detail::field_of<double>(sw, "eps", "sweep");
    double T = get_or(sw, "T", 0.0);
    out.columns = {"M", "k", "expected_rank", "normalized_expected_rank", "payload_factor", "throughput"};
    Json pts = Json::array();
    for (int k : ks)
      for (int M : Ms) {
        if (M < 1 || k < 1) throw Error("sweep needs M >= 1 and k >= 1");
        double er = expected_rank(line_rank_dist(M, std::vector<double>(k, eps), q));
        double f = T > 0 ? 1.0 - M / T : 1.0;
        double thr = f * er / M;
        pts.push_back({{"M", M}, {"k", k}, {"expected_rank", er}, {"throughput", thr}});
        out.rows.push_back({std::to_string(M), std::to_string(k), num(er), num(er / M), num(f), num(thr)});
      }
    out.json["sweep"] = pts;
  } else if (single) {
    out.columns = {"r", "h", "hbar", "hbar_prime"};
    for (std::size_t r = 0; r < out.json["h"].size(); ++r)
      out.rows.push_back({std::to_string(r), num(out.json["h"][r].get<double>()), num(out.json["hbar"][r].get<double>()),
                          num(out.json["hbar_prime"][r].get<double>())});
  } else {
    throw Error("analyze needs a rank distribution or a sweep");
  }
  return out;
}

Output cmd_optimize(const Json& cfg, const RunContext& ctx) {
  double q = get_or(cfg, "q", 256.0);
  double eta = get_or(cfg, "eta", 0.01);
  Optimized o = run_optimize(cfg, ctx);
  const auto& r = o.res;
  Output out;
  Json dists = Json::array();
  // Listing every member of a large sampled or vertex set adds little.
  if (o.set.kind == "listed")
    for (const auto& h : o.set.H) {
      auto b = theta_bounds(h, q, eta);
      dists.push_back({{"expected_rank", expected_rank(h)},
                       {"effective_rank_sum", effective_dist(h, q).weighted_sum()},
                       {"achievable_theta", achievable_theta(r.psi, h, q, eta, get_or(cfg, "grid", 100))},
                       {"lower_bound", b.lower},
                       {"upper_bound", b.upper}});
    }
  out.json = {{"schema", 1},
              {"command", "optimize"},
              {"problem", o.problem},
              {"q", q},
              {"eta", eta},
              {"status", to_string(r.status)},
              {"value", r.value},
              {"lp_value", r.lp_value},
              {"eta_bar_value", (1 - eta) * r.value},
              {"eta_bar_lp_value", (1 - eta) * r.lp_value},
              {"margin", r.margin},
              {"fixup", r.fixup},
              {"empty_support", r.empty_support},
              {"constraint_set", {{"kind", o.set.kind}, {"size", o.set.H.size()}, {"sampled", o.set.sampled}}},
              {"distributions", dists},
              {"psi", to_json(r.psi)}};
  out.columns = {"d", "psi"};
  for (int d = 1; d <= r.psi.D; ++d)
    if (r.psi.at(d) > 0) out.rows.push_back({std::to_string(d), num(r.psi.at(d))});
  out.summary = {{"value", r.value}, {"lp_value", r.lp_value}, {"margin", r.margin}};
  return out;
}

Output cmd_evolve(const Json& cfg, const RunContext& ctx) {
  double q = get_or(cfg, "q", 256.0);
  auto psi = psi_item(require(cfg, "psi"), ctx);
  auto h = rank_dist_item(require(cfg, "rank_distribution"), q);
  double theta = detail::field_of<double>(cfg, "theta", "evolve");
  int points = get_or(cfg, "points", 1000);
  if (points < 1 || theta < 0) throw Error("evolve needs points >= 1 and theta >= 0");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = static_cast<double>(i) / points;
  auto c = density_evolution(psi, h, q, theta, grid);
  Output out;
  out.json = {{"schema", 1}, {"command", "evolve"}, {"theta", theta}, {"points", points}};
  out.json["first_crossing"] = c.first_crossing ? Json(*c.first_crossing) : Json(nullptr);
  double lo = c.rho0.empty() ? 0.0 : *std::min_element(c.rho0.begin(), c.rho0.end());
  out.json["min_rho0"] = lo;
  out.summary = {{"min_rho0", lo}, {"first_crossing", c.first_crossing.value_or(1.0)}};
  out.columns = {"x", "rho0"};
  for (int i = 0; i < points; ++i) out.rows.push_back({num(grid[i]), num(c.rho0[i])});

  if (cfg.contains("bp")) {
    const Json& bp = cfg.at("bp");
    std::size_t K = detail::field_of<std::size_t>(bp, "K", "bp");
    if (K < 1 || !(theta > 0)) throw Error("bp needs K >= 1 and theta > 0");
    auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(K) / theta));
    const auto& F = field_of_size(static_cast<unsigned>(q));
    std::vector<double> frac;
    double mean = 0;
    for (std::size_t t = 0; t < ctx.trials; ++t) {
      auto tr = bp_trajectory(F, psi, h, K, n, trial_seed(ctx.seed, t));
      frac.push_back(static_cast<double>(tr.decoded) / static_cast<double>(K));
      mean += frac.back() / static_cast<double>(ctx.trials);
    }
    out.json["bp"] = {{"K", K}, {"n", n}, {"trials", ctx.trials}, {"decoded_fraction", frac}, {"mean_decoded_fraction", mean}};
    out.summary["mean_decoded_fraction"] = mean;
  }
  return out;
}

Output cmd_simulate(const Json& cfg, const RunContext& ctx) {
  auto topo = topology_item(require(cfg, "topology"));
  auto sc = scheme_item(require(cfg, "scheme"));
  const auto& F = field_of_size(sc.q);
  struct Pooled {
    std::vector<int> ranks;
    int width = 0;
  };
  std::map<std::string, Pooled> pooled;
  std::map<std::string, int> buffers;
  int violations = 0;
  std::size_t slots = 0;
  Output out;
  out.columns = {"batch_id", "destination", "columns", "rank"};
  // Independent runs are concatenated; batch ids continue across runs.
  for (std::size_t t = 0; t < ctx.trials; ++t) {
    sc.seed = trial_seed(ctx.seed, t);
    SimResult r = run_scheme(topo, sc);
    violations += r.isolation_violations;
    slots = std::max(slots, r.slots);
    for (const auto& [node, b] : r.max_buffer) buffers[node] = std::max(buffers[node], b);
    for (const auto& tr : r.traces) {
      std::string name = tr.destination + (tr.group ? "#" + std::to_string(tr.group) : "");
      auto ranks = tr.ranks(F);
      auto& p = pooled[name];
      p.width = tr.width;
      p.ranks.insert(p.ranks.end(), ranks.begin(), ranks.end());
      for (std::size_t i = 0; i < tr.entries.size(); ++i)
        out.rows.push_back({std::to_string(tr.entries[i].batch + t * sc.batches), name,
                            std::to_string(tr.entries[i].columns()), std::to_string(ranks[i])});
    }
  }
  Json dests = Json::array();
  for (const auto& [name, p] : pooled) {
    auto h = empirical_rank_dist(p.ranks, p.width);
    dests.push_back({{"destination", name}, {"rank_distribution", to_json(h)}, {"expected_rank", expected_rank(h)}});
    out.summary["expected_rank:" + name] = expected_rank(h);
  }
  out.json = {{"schema", 1},         {"command", "simulate"},   {"scheme", to_string(sc.scheme)},
              {"trials", ctx.trials}, {"slots", slots},          {"max_buffer", buffers},
              {"isolation_violations", violations}, {"destinations", dests}};
  return out;
}

Output cmd_endtoend(const Json& cfg, const RunContext& ctx) {
  EndToEndConfig e;
  e.topology = topology_item(require(cfg, "topology"));
  e.scheme = scheme_item(require(cfg, "scheme"));
  if (e.scheme.T == 0) e.scheme.T = 1;
  e.psi = psi_item(require(cfg, "psi"), ctx);
  e.k_prime = detail::field_of<int>(cfg, "k_prime", "endtoend");
  e.max_batches = get_or(cfg, "max_batches", e.max_batches);
  if (cfg.contains("precode")) {
    const Json& p = cfg.at("precode");
    e.precode.mode = PrecodeMode::systematic_sparse;
    e.precode.rate = get_or(p, "rate", e.precode.rate);
    e.precode.row_weight = get_or(p, "row_weight", e.precode.row_weight);
    e.precode.seed = get_or(p, "seed", e.precode.seed);
    e.precode.validate();
  }
  unsigned workers = get_or(cfg, "workers", std::max(1u, std::thread::hardware_concurrency()));
  auto s = run_endtoend(e, ctx.seed, ctx.trials, workers);

  Output out;
  out.columns = {"trial", "destination", "success", "batches", "coding_overhead", "receiving_overhead", "coding_rate",
                 "inactivations", "payload_mismatches"};
  Json trials = Json::array();
  for (const auto& t : s.trials) {
    Json ds = Json::array();
    for (const auto& d : t.destinations) {
      const auto& r = d.report;
      ds.push_back({{"destination", d.destination},
                    {"success", r.success},
                    {"batches", r.batches},
                    {"coding_overhead", r.coding_overhead},
                    {"receiving_overhead", r.receiving_overhead},
                    {"coding_rate", r.coding_rate},
                    {"inactivations", r.inactivations},
                    {"payload_mismatches", d.payload_mismatches}});
      out.rows.push_back({std::to_string(t.trial), d.destination, r.success ? "1" : "0", std::to_string(r.batches),
                          num(r.coding_overhead), num(r.receiving_overhead), num(r.coding_rate),
                          std::to_string(r.inactivations), std::to_string(d.payload_mismatches)});
    }
    trials.push_back({{"trial", t.trial}, {"seed", t.seed}, {"destinations", ds}});
  }
  auto stat = [](const Summary& x) { return Json{{"mean", x.mean}, {"min", x.min}, {"max", x.max}}; };
  out.json = {{"schema", 1},
              {"command", "endtoend"},
              {"K", intermediate_count(e.k_prime, e.precode)},
              {"k_prime", e.k_prime},
              {"trials", trials},
              {"aggregate",
               {{"coding_overhead", stat(s.coding_overhead)},
                {"receiving_overhead", stat(s.receiving_overhead)},
                {"inactivations", stat(s.inactivations)},
                {"failures", s.failures},
                {"payload_mismatches", s.payload_mismatches}}}};
  out.summary = {{"coding_overhead", s.coding_overhead.mean},
                 {"receiving_overhead", s.receiving_overhead.mean},
                 {"inactivations", s.inactivations.mean},
                 {"failures", static_cast<double>(s.failures)}};
  return out;
}

const std::map<std::string, Command>& commands() {
  static const std::map<std::string, Command> m = {{"analyze", cmd_analyze},   {"optimize", cmd_optimize},
                                                   {"evolve", cmd_evolve},     {"simulate", cmd_simulate},
                                                   {"endtoend", cmd_endtoend}};
  return m;
}

// Runs a command once per value, substituting it at a JSON pointer.
Output cmd_sweep(const Json& cfg, const RunContext& ctx) {
  auto name = detail::field_of<std::string>(cfg, "command", "sweep");
  auto it = commands().find(name);
  if (it == commands().end()) throw Error("sweep cannot run '" + name + "'");
  Json base = require(cfg, "base");
  auto ptr_text = detail::field_of<std::string>(cfg, "parameter", "sweep");
  const Json& values = require(cfg, "values");
  if (!values.is_array()) throw Error("'values' must be an array");
  Json::json_pointer ptr;
  try {
    ptr = Json::json_pointer(ptr_text);
  } catch (const nlohmann::json::exception&) {
    throw Error("'parameter' must be a JSON pointer such as /scheme/M");
  }
  Output out;
  Json pts = Json::array();
  std::vector<std::string> keys;
  for (const auto& v : values) {
    Json c = base;
    c[ptr] = v;
    Output o = it->second(c, ctx);
    if (keys.empty())
      for (const auto& [k, x] : o.summary) keys.push_back(k);
    std::vector<std::string> row{v.dump()};
    for (const auto& k : keys) row.push_back(o.summary.count(k) ? num(o.summary.at(k)) : "");
    out.rows.push_back(row);
    pts.push_back({{"value", v}, {"result", o.json}});
  }
  out.columns = {"value"};
  out.columns.insert(out.columns.end(), keys.begin(), keys.end());
  out.json = {{"schema", 1}, {"command", "sweep"}, {"sweep_command", name}, {"parameter", ptr_text}, {"points", pts}};
  return out;
}

std::string to_csv(const Output& o, const std::string& command, std::uint64_t hash, std::uint64_t seed) {
  std::string s = "# bats " + command + " config_hash=" + hex(hash) + " seed=" + std::to_string(seed) + "\n";
  for (std::size_t i = 0; i < o.columns.size(); ++i) s += (i ? "," : "") + o.columns[i];
  s += "\n";
  for (const auto& r : o.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) s += (i ? "," : "") + r[i];
    s += "\n";
  }
  return s;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text) || !f.flush()) throw IoError("cannot write '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BATS code toolkit: rank analysis, degree optimization, density evolution and network simulation"};
  app.require_subcommand(1);
  std::string config_path, out_path, format = "json";
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  bool seed_set = false, trials_set = false;

  std::map<std::string, std::string> help = {
      {"analyze", "rank and effective rank distributions, expected ranks, batch size sweeps"},
      {"optimize", "degree distribution by P1, P2, P3 or P4 with bounds"},
      {"evolve", "density evolution curve and first zero crossing"},
      {"simulate", "network inner code simulation traces"},
      {"endtoend", "precode, encode, transmit and decode with overhead statistics"},
      {"sweep", "rerun a command over a list of parameter values"}};
  for (const auto& [name, text] : help) {
    auto* sub = app.add_subcommand(name, text);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", out_path, "output prefix; writes PREFIX.json and PREFIX.csv");
    sub->add_option("--trials", trials, "number of independent trials")
        ->check(CLI::PositiveNumber)
        ->each([&](const std::string&) { trials_set = true; });
    sub->add_option("--format", format, "stdout format without --out")->check(CLI::IsMember({"json", "csv"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  std::string command = app.get_subcommands().front()->get_name();

  try {
    Json cfg = read_json_file(config_path);
    if (!cfg.is_object()) throw Error("config must be a JSON object");
    RunContext ctx;
    ctx.seed = seed_set ? seed : get_or<std::uint64_t>(cfg, "seed", 0);
    ctx.trials = trials_set ? trials : get_or<std::size_t>(cfg, "trials", 1);
    if (ctx.trials < 1) throw Error("trials must be positive");

    Output o = command == "sweep" ? cmd_sweep(cfg, ctx) : commands().at(command)(cfg, ctx);
    o.json["seed"] = ctx.seed;
    std::uint64_t hash = fnv1a(cfg.dump());
    o.json["config_hash"] = hex(hash);
    std::string json = o.json.dump(2) + "\n";
    std::string csv = to_csv(o, command, hash, ctx.seed);
    if (!out_path.empty()) {
      write_file(out_path + ".json", json);
      write_file(out_path + ".csv", csv);
    } else {
      std::cout << (format == "csv" ? csv : json);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed config: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
