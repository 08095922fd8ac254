#include "sagin/workload.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "sagin/rng.hpp"
#include "text_io.hpp"

namespace sagin {

namespace {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Smallest member of each component, components ordered by that member.
std::vector<int> component_reps(Dsu& dsu, int n) {
  std::vector<int> reps;
  std::unordered_set<int> seen;
  for (int i = 0; i < n; ++i) {
    if (seen.insert(dsu.find(i)).second) reps.push_back(i);
  }
  return reps;
}

void check_range(IntRange r, int min_lo, const char* what) {
  if (r.lo < min_lo || r.lo > r.hi) {
    throw std::invalid_argument(std::string("bad range for ") + what);
  }
}

int draw_range(std::mt19937_64& rng, IntRange r) {
  return draw_int(rng, r.lo, r.hi);
}

}  // namespace

SubstrateNetwork generate_substrate(const SubstrateGenConfig& cfg) {
  if (cfg.ground_nodes <= 0 || cfg.air_nodes <= 0 || cfg.space_nodes <= 0) {
    throw std::invalid_argument("node counts must be positive");
  }
  check_range(cfg.ground_node_resources, 0, "ground node resources");
  check_range(cfg.airspace_node_resources, 0, "air/space node resources");
  check_range(cfg.ground_bw, 0, "ground bandwidth");
  check_range(cfg.airspace_bw, 0, "air/space bandwidth");
  if (!(cfg.intra_link_prob >= 0.0 && cfg.intra_link_prob <= 1.0)) {
    throw std::invalid_argument("intra-domain link probability outside [0,1]");
  }
  if (cfg.inter_links_per_node < 1) {
    throw std::invalid_argument(
        "need at least one inter-domain link per node to keep segments reachable");
  }

  std::mt19937_64 rng(cfg.seed);
  SubstrateNetwork net;
  const int counts[kNumSegments] = {cfg.space_nodes, cfg.air_nodes, cfg.ground_nodes};
  std::vector<NodeId> by_domain[kNumSegments];
  for (int d = 0; d < kNumSegments; ++d) {
    const IntRange res = static_cast<Domain>(d) == Domain::Ground
                             ? cfg.ground_node_resources
                             : cfg.airspace_node_resources;
    for (int i = 0; i < counts[d]; ++i) {
      const int cpu = draw_range(rng, res);
      const int sto = draw_range(rng, res);
      by_domain[d].push_back(net.add_node(static_cast<Domain>(d), cpu, sto));
    }
  }

  // Intra-domain links, then join leftover components so every domain's own
  // subgraph is connected (average-distance extraction depends on that).
  for (int d = 0; d < kNumSegments; ++d) {
    const IntRange bw =
        static_cast<Domain>(d) == Domain::Ground ? cfg.ground_bw : cfg.airspace_bw;
    const auto& ids = by_domain[d];
    const int n = static_cast<int>(ids.size());
    Dsu dsu(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (draw_bernoulli(rng, cfg.intra_link_prob)) {
          net.add_link(ids[i], ids[j], draw_range(rng, bw));
          dsu.unite(i, j);
        }
      }
    }
    const auto reps = component_reps(dsu, n);
    for (std::size_t c = 1; c < reps.size(); ++c) {
      net.add_link(ids[reps[0]], ids[reps[c]], draw_range(rng, bw));
      dsu.unite(reps[0], reps[c]);
    }
  }

  // Inter-domain attachments: every space node to a few air nodes, every air
  // node to a few ground nodes, so cross-segment paths always exist.
  auto attach = [&](const std::vector<NodeId>& from, const std::vector<NodeId>& to) {
    const int want = std::min<int>(cfg.inter_links_per_node, static_cast<int>(to.size()));
    for (NodeId f : from) {
      std::vector<int> chosen;  // ascending target indices already taken
      for (int k = 0; k < want; ++k) {
        int t = draw_int(rng, 0, static_cast<int>(to.size()) - 1 - k);
        for (int c : chosen) {
          if (t >= c) ++t;
        }
        chosen.insert(std::upper_bound(chosen.begin(), chosen.end(), t), t);
        net.add_link(f, to[t], draw_range(rng, cfg.airspace_bw));
      }
    }
  };
  attach(by_domain[static_cast<int>(Domain::Space)], by_domain[static_cast<int>(Domain::Air)]);
  attach(by_domain[static_cast<int>(Domain::Air)], by_domain[static_cast<int>(Domain::Ground)]);

  net.check_invariants();
  return net;
}

std::vector<FunctionRequest> generate_workload(const WorkloadGenConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("request count must be >= 1");
  if (cfg.nodes_per_request.lo < 2 ||
      cfg.nodes_per_request.lo > cfg.nodes_per_request.hi) {
    throw std::invalid_argument("bad request node count range");
  }
  check_range(cfg.cpu_demand, 1, "cpu demand");
  check_range(cfg.sto_demand, 1, "sto demand");
  check_range(cfg.bw_demand, 1, "bw demand");
  if (!(cfg.link_prob >= 0.0 && cfg.link_prob <= 1.0)) {
    throw std::invalid_argument("link probability outside [0,1]");
  }
  double wsum = 0.0;
  for (double w : cfg.candi_weights) {
    if (w < 0.0) throw std::invalid_argument("negative candi weight");
    wsum += w;
  }
  if (wsum <= 0.0) throw std::invalid_argument("candi weights sum to zero");
  if (cfg.arrival_rate <= 0.0) throw std::invalid_argument("arrival rate must be positive");
  if (cfg.mean_lifetime <= 0.0) throw std::invalid_argument("mean lifetime must be positive");

  std::mt19937_64 rng(cfg.seed);
  std::vector<FunctionRequest> out;
  out.reserve(cfg.count);
  double clock = 0.0;
  for (int k = 0; k < cfg.count; ++k) {
    FunctionRequest req;
    req.id = k;
    clock += draw_exponential(rng, 1.0 / cfg.arrival_rate);
    req.arrival_time = detail::quantize_time(clock);
    req.lifetime = detail::quantize_time(draw_exponential(rng, cfg.mean_lifetime));
    if (req.lifetime <= 0.0) req.lifetime = 1e-6;  // keep it on the time grid

    const int n = draw_int(rng, cfg.nodes_per_request.lo, cfg.nodes_per_request.hi);
    req.nodes.reserve(n);
    for (int i = 0; i < n; ++i) {
      RequestNode node;
      node.id = i;
      node.cpu_demand = draw_range(rng, cfg.cpu_demand);
      node.sto_demand = draw_range(rng, cfg.sto_demand);
      double u = draw_unit(rng) * wsum;
      int seg = 0;
      for (; seg + 1 < kNumSegments; ++seg) {
        if (u < cfg.candi_weights[seg]) break;
        u -= cfg.candi_weights[seg];
      }
      node.candi = static_cast<Domain>(seg);
      req.nodes.push_back(node);
    }

    Dsu dsu(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (draw_bernoulli(rng, cfg.link_prob)) {
          req.links.push_back({i, j, draw_range(rng, cfg.bw_demand)});
          dsu.unite(i, j);
        }
      }
    }
    const auto reps = component_reps(dsu, n);
    for (std::size_t c = 1; c < reps.size(); ++c) {
      req.links.push_back({reps[0], reps[c], draw_range(rng, cfg.bw_demand)});
      dsu.unite(reps[0], reps[c]);
    }
    out.push_back(std::move(req));
  }
  return out;
}

std::vector<WorkloadEvent> event_stream(const std::vector<FunctionRequest>& requests) {
  std::vector<WorkloadEvent> ev;
  ev.reserve(requests.size() * 2);
  for (const auto& r : requests) {
    ev.push_back({r.arrival_time, EventKind::Arrival, r.id});
    // Re-quantized so a departure and an arrival written with the same time
    // compare exactly equal and the Departure-first tie rule applies.
    ev.push_back({detail::quantize_time(r.departure_time()), EventKind::Departure, r.id});
  }
  std::sort(ev.begin(), ev.end(), [](const WorkloadEvent& x, const WorkloadEvent& y) {
    if (x.time != y.time) return x.time < y.time;
    if (x.kind != y.kind) return static_cast<int>(x.kind) < static_cast<int>(y.kind);
    return x.request_id < y.request_id;
  });
  return ev;
}

void save_workload(const std::vector<FunctionRequest>& requests, std::ostream& out,
                   std::string_view provenance) {
  if (!provenance.empty()) out << "# " << provenance << "\n";
  for (const auto& r : requests) {
    out << "REQ " << r.id << " " << detail::format_time(r.arrival_time) << " "
        << detail::format_time(r.lifetime) << " " << r.nodes.size() << " "
        << r.links.size() << "\n";
    for (const auto& n : r.nodes) {
      out << n.id << " " << n.cpu_demand << " " << n.sto_demand << " "
          << static_cast<int>(n.candi) << "\n";
    }
    for (const auto& l : r.links) {
      out << l.a << " " << l.b << " " << l.bw_demand << "\n";
    }
  }
}

void save_workload_file(const std::vector<FunctionRequest>& requests,
                        const std::string& path, std::string_view provenance) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  save_workload(requests, f, provenance);
}

std::vector<FunctionRequest> parse_workload(std::istream& in) {
  detail::LineReader r{in};
  std::string line;
  std::vector<FunctionRequest> out;
  std::unordered_set<int> ids;
  while (r.next(line)) {
    std::istringstream hs(line);
    std::string tag;
    FunctionRequest req;
    int node_count = -1, link_count = -1;
    if (!(hs >> tag >> req.id >> req.arrival_time >> req.lifetime >> node_count >>
          link_count) ||
        tag != "REQ") {
      throw ParseError(r.line_no,
                       "expected 'REQ <id> <arrival> <lifetime> <nodes> <links>'");
    }
    if (req.id < 0 || !ids.insert(req.id).second) {
      throw ParseError(r.line_no, "bad or duplicate request id");
    }
    if (!(req.arrival_time >= 0.0)) throw ParseError(r.line_no, "negative arrival time");
    if (!(req.lifetime > 0.0)) throw ParseError(r.line_no, "lifetime must be positive");
    if (node_count < 1) throw ParseError(r.line_no, "request needs at least one node");
    if (link_count < 0) throw ParseError(r.line_no, "negative link count");

    req.nodes.reserve(node_count);
    for (int i = 0; i < node_count; ++i) {
      if (!r.next(line)) throw ParseError(r.eof_line(), "unexpected end of request nodes");
      std::istringstream ns(line);
      RequestNode n;
      int code = -1;
      if (!(ns >> n.id >> n.cpu_demand >> n.sto_demand >> code)) {
        throw ParseError(r.line_no, "malformed request node '" + line + "'");
      }
      if (n.id != i) {
        throw ParseError(r.line_no, "request node ids must be consecutive from 0");
      }
      if (n.cpu_demand < 1 || n.sto_demand < 1) {
        throw ParseError(r.line_no, "demands must be at least 1");
      }
      if (code < 0 || code >= kNumSegments) {
        throw ParseError(r.line_no, "unknown domain code " + std::to_string(code));
      }
      n.candi = static_cast<Domain>(code);
      req.nodes.push_back(n);
    }

    std::unordered_set<std::uint64_t> seen_links;
    req.links.reserve(link_count);
    for (int i = 0; i < link_count; ++i) {
      if (!r.next(line)) throw ParseError(r.eof_line(), "unexpected end of request links");
      std::istringstream ls(line);
      RequestLink l;
      if (!(ls >> l.a >> l.b >> l.bw_demand)) {
        throw ParseError(r.line_no, "malformed request link '" + line + "'");
      }
      if (l.a < 0 || l.a >= node_count || l.b < 0 || l.b >= node_count) {
        throw ParseError(r.line_no, "link references undefined request node");
      }
      if (l.a == l.b) throw ParseError(r.line_no, "self-loop request link");
      if (l.a > l.b) std::swap(l.a, l.b);
      const std::uint64_t key =
          (static_cast<std::uint64_t>(l.a) << 32) | static_cast<std::uint32_t>(l.b);
      if (!seen_links.insert(key).second) {
        throw ParseError(r.line_no, "duplicate request link");
      }
      if (l.bw_demand < 1) throw ParseError(r.line_no, "demands must be at least 1");
      req.links.push_back(l);
    }
    out.push_back(std::move(req));
  }
  return out;
}

std::vector<FunctionRequest> parse_workload_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open workload file " + path);
  return parse_workload(f);
}

}  // namespace sagin
