#include "sagin/embedding.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>

#include "sagin/metrics.hpp"
#include "sagin/rng.hpp"

namespace sagin {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::None: return "none";
    case RejectReason::EmptyCandidateSet: return "empty candidate set";
    case RejectReason::NoFeasibleNode: return "no feasible node";
    case RejectReason::NoFeasiblePath: return "no feasible path";
  }
  return "?";
}

void EmbedCounters::merge(const EmbedCounters& other) {
  max_selection_rows = std::max(max_selection_rows, other.max_selection_rows);
  max_bfs_link_visits = std::max(max_bfs_link_visits, other.max_bfs_link_visits);
  selections += other.selections;
  bfs_calls += other.bfs_calls;
}

std::vector<int> NodeSelector::placement_order(const FunctionRequest& request) const {
  std::vector<int> order(request.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

std::vector<int> NodeSelector::link_order(const FunctionRequest& request) const {
  std::vector<int> order(request.links.size());
  std::iota(order.begin(), order.end(), 0);
  return order;
}

NodeId RandomSelector::choose(const SubstrateNetwork& net,
                              const FunctionRequest& request,
                              const RequestNode& node,
                              const std::vector<NodeId>& feasible) {
  return feasible[draw_int(rng_, 0, static_cast<int>(feasible.size()) - 1)];
}

void NrmvneSelector::begin_request(const SubstrateNetwork& net,
                                   const FunctionRequest& request) {
  // Host ranking is fixed per request: placing earlier nodes only consumes
  // resources on hosts that injectivity removes from later candidate sets,
  // so recomputing between placements would not change any choice.
  metric_.assign(net.node_count(), 0);
  for (const auto& n : net.nodes()) {
    long long bw = 0;
    for (const auto& [nb, li] : net.incident(n.id)) {
      bw += net.link(li).bw_available;
    }
    metric_[n.id] = static_cast<long long>(n.cpu_available + n.sto_available) * bw;
  }
}

std::vector<int> NrmvneSelector::placement_order(const FunctionRequest& request) const {
  std::vector<int> order(request.nodes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const auto& a = request.nodes[x];
    const auto& b = request.nodes[y];
    return a.cpu_demand + a.sto_demand > b.cpu_demand + b.sto_demand;
  });
  return order;
}

std::vector<int> NrmvneSelector::link_order(const FunctionRequest& request) const {
  std::vector<int> order(request.links.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return request.links[x].bw_demand > request.links[y].bw_demand;
  });
  return order;
}

NodeId NrmvneSelector::choose(const SubstrateNetwork& net,
                              const FunctionRequest& request,
                              const RequestNode& node,
                              const std::vector<NodeId>& feasible) {
  NodeId best = feasible.front();
  for (NodeId id : feasible) {
    if (metric_.at(id) > metric_.at(best)) best = id;  // ascending scan: ties keep the smaller id
  }
  return best;
}

namespace {

void check_request_shape(const FunctionRequest& request) {
  const int n = static_cast<int>(request.nodes.size());
  if (n == 0) throw std::invalid_argument("request has no nodes");
  for (int i = 0; i < n; ++i) {
    if (request.nodes[i].id != i) {
      throw std::invalid_argument("request node ids must be consecutive from 0");
    }
  }
  for (const auto& l : request.links) {
    if (l.a < 0 || l.a >= n || l.b < 0 || l.b >= n || l.a == l.b) {
      throw std::invalid_argument("request link endpoints invalid");
    }
  }
}

}  // namespace

EmbeddingOutcome embed_request(SubstrateNetwork& net, const FunctionRequest& request,
                               NodeSelector& selector, EmbedCounters* counters) {
  check_request_shape(request);
  selector.begin_request(net, request);

  EmbeddingRecord rec;
  rec.request_id = request.id;
  std::vector<char> used(net.node_count(), 0);
  std::vector<NodeId> host_of(request.nodes.size(), -1);

  auto reject = [&](RejectReason why) {
    for (auto it = rec.link_map.rbegin(); it != rec.link_map.rend(); ++it) {
      net.release_path(it->path, it->bw_demand);
    }
    for (auto it = rec.node_map.rbegin(); it != rec.node_map.rend(); ++it) {
      net.release_node(it->host, it->cpu_demand, it->sto_demand);
    }
    EmbeddingOutcome out;
    out.reason = why;
    return out;
  };

  for (int local : selector.placement_order(request)) {
    const RequestNode& rn = request.nodes.at(local);
    const auto domain_nodes = net.nodes_in_domain(rn.candi);
    if (counters) {
      ++counters->selections;
      counters->max_selection_rows = std::max<long long>(
          counters->max_selection_rows, static_cast<long long>(domain_nodes.size()));
    }
    if (domain_nodes.empty()) return reject(RejectReason::EmptyCandidateSet);

    std::vector<NodeId> feasible;
    for (NodeId id : domain_nodes) {
      const SubstrateNode& sn = net.node(id);
      if (!used[id] && sn.cpu_available >= rn.cpu_demand &&
          sn.sto_available >= rn.sto_demand) {
        feasible.push_back(id);
      }
    }
    if (feasible.empty()) return reject(RejectReason::NoFeasibleNode);

    const NodeId host = selector.choose(net, request, rn, feasible);
    if (host < 0) return reject(RejectReason::NoFeasibleNode);
    if (!std::binary_search(feasible.begin(), feasible.end(), host)) {
      throw std::logic_error("selector chose an infeasible host");
    }
    if (net.allocate_node(host, rn.cpu_demand, rn.sto_demand) != AllocStatus::Ok) {
      throw std::logic_error("node allocation failed after feasibility check");
    }
    used[host] = 1;
    host_of[local] = host;
    rec.node_map.push_back({rn.id, host, rn.cpu_demand, rn.sto_demand});
  }

  for (int li : selector.link_order(request)) {
    const RequestLink& rl = request.links.at(li);
    auto path = bfs_link_map(net, host_of[rl.a], host_of[rl.b], rl.bw_demand, counters);
    if (!path) return reject(RejectReason::NoFeasiblePath);
    if (net.allocate_path(*path, rl.bw_demand) != AllocStatus::Ok) {
      throw std::logic_error("path allocation failed after search");
    }
    LinkRoute route;
    route.a = rl.a;
    route.b = rl.b;
    route.bw_demand = rl.bw_demand;
    route.path = std::move(*path);
    rec.link_map.push_back(std::move(route));
  }

  rec.revenue = request_revenue(request);
  rec.cost = record_cost(rec);
  EmbeddingOutcome out;
  out.record = std::move(rec);
  return out;
}

std::optional<std::vector<NodeId>> bfs_link_map(const SubstrateNetwork& net,
                                                NodeId src, NodeId dst, int bw_demand,
                                                EmbedCounters* counters) {
  if (src == dst) throw std::invalid_argument("path endpoints must differ");
  net.node(src);
  net.node(dst);
  if (counters) ++counters->bfs_calls;

  // Search backward from dst so each node's label is its remaining distance.
  std::vector<int> dist(net.node_count(), -1);
  std::vector<char> seen_link(net.link_count(), 0);
  long long visits = 0;
  std::queue<NodeId> q;
  dist[dst] = 0;
  q.push(dst);
  while (!q.empty() && dist[src] < 0) {
    const NodeId u = q.front();
    q.pop();
    for (const auto& [nb, li] : net.incident(u)) {
      if (seen_link[li]) continue;  // a link contributes at most one visit
      seen_link[li] = 1;
      ++visits;
      if (net.link(li).bw_available < bw_demand) continue;
      if (dist[nb] >= 0) continue;
      dist[nb] = dist[u] + 1;
      q.push(nb);
    }
  }
  if (counters) {
    counters->max_bfs_link_visits = std::max(counters->max_bfs_link_visits, visits);
  }
  if (dist[src] < 0) return std::nullopt;

  // Walk downhill taking the smallest feasible neighbor each step; feasible
  // minimum-hop paths are exactly the downhill walks, so this is the
  // lexicographically smallest one.
  std::vector<NodeId> path{src};
  NodeId u = src;
  while (u != dst) {
    NodeId next = -1;
    for (const auto& [nb, li] : net.incident(u)) {  // neighbors ascend
      if (net.link(li).bw_available < bw_demand) continue;
      if (dist[nb] == dist[u] - 1) {
        next = nb;
        break;
      }
    }
    if (next < 0) throw std::logic_error("inconsistent distance labels");
    path.push_back(next);
    u = next;
  }
  return path;
}

void release_request(SubstrateNetwork& net, const EmbeddingRecord& record) {
  for (auto it = record.link_map.rbegin(); it != record.link_map.rend(); ++it) {
    net.release_path(it->path, it->bw_demand);
  }
  for (auto it = record.node_map.rbegin(); it != record.node_map.rend(); ++it) {
    net.release_node(it->host, it->cpu_demand, it->sto_demand);
  }
}

std::vector<Violation> validate_embedding(const SubstrateNetwork& pre_state,
                                          const FunctionRequest& request,
                                          const EmbeddingRecord& record) {
  std::vector<Violation> out;
  auto flag = [&](const std::string& what) { out.push_back({request.id, what}); };

  const int n = static_cast<int>(request.nodes.size());
  std::vector<int> times_mapped(n, 0);
  std::vector<NodeId> host_of(n, -1);
  std::set<NodeId> hosts;
  std::map<NodeId, long long> cpu_load, sto_load;
  for (const auto& p : record.node_map) {
    if (p.request_node < 0 || p.request_node >= n) {
      flag("placement for unknown request node " + std::to_string(p.request_node));
      continue;
    }
    if (times_mapped[p.request_node]++) {
      flag("request node " + std::to_string(p.request_node) + " mapped twice");
    }
    if (p.host < 0 || p.host >= pre_state.node_count()) {
      flag("host " + std::to_string(p.host) + " outside the substrate");
      continue;
    }
    if (!hosts.insert(p.host).second) {
      flag("two request nodes share host " + std::to_string(p.host));
    }
    host_of[p.request_node] = p.host;
    const RequestNode& rn = request.nodes[p.request_node];
    if (p.cpu_demand != rn.cpu_demand || p.sto_demand != rn.sto_demand) {
      flag("recorded demands of node " + std::to_string(p.request_node) +
           " differ from the request");
    }
    if (pre_state.node(p.host).domain != rn.candi) {
      flag("host " + std::to_string(p.host) + " is outside the candidate domain of node " +
           std::to_string(p.request_node));
    }
    cpu_load[p.host] += rn.cpu_demand;
    sto_load[p.host] += rn.sto_demand;
  }
  for (int i = 0; i < n; ++i) {
    if (!times_mapped[i]) flag("request node " + std::to_string(i) + " unmapped");
  }
  for (const auto& [host, load] : cpu_load) {
    if (pre_state.node(host).cpu_available < load) {
      flag("insufficient cpu at host " + std::to_string(host));
    }
  }
  for (const auto& [host, load] : sto_load) {
    if (pre_state.node(host).sto_available < load) {
      flag("insufficient sto at host " + std::to_string(host));
    }
  }

  const int m = static_cast<int>(request.links.size());
  std::vector<int> times_routed(m, 0);
  std::map<int, long long> bw_load;  // substrate link index -> demand total
  for (const auto& r : record.link_map) {
    int idx = -1;
    for (int i = 0; i < m; ++i) {
      const auto& rl = request.links[i];
      if ((rl.a == r.a && rl.b == r.b) || (rl.a == r.b && rl.b == r.a)) {
        idx = i;
        break;
      }
    }
    if (idx < 0) {
      flag("route for unknown request link " + std::to_string(r.a) + "-" +
           std::to_string(r.b));
      continue;
    }
    if (times_routed[idx]++) {
      flag("request link " + std::to_string(r.a) + "-" + std::to_string(r.b) +
           " routed twice");
    }
    if (r.bw_demand != request.links[idx].bw_demand) {
      flag("recorded bandwidth of link " + std::to_string(r.a) + "-" +
           std::to_string(r.b) + " differs from the request");
    }
    if (r.path.size() < 2) {
      flag("route of link " + std::to_string(r.a) + "-" + std::to_string(r.b) +
           " is shorter than one hop");
      continue;
    }
    const NodeId ha = host_of.at(request.links[idx].a);
    const NodeId hb = host_of.at(request.links[idx].b);
    const bool fwd = r.path.front() == ha && r.path.back() == hb;
    const bool rev = r.path.front() == hb && r.path.back() == ha;
    if (!fwd && !rev) {
      flag("route of link " + std::to_string(r.a) + "-" + std::to_string(r.b) +
           " does not connect the mapped endpoints");
    }
    bool broken = false;
    for (std::size_t i = 0; i + 1 < r.path.size(); ++i) {
      const int li = pre_state.link_index(r.path[i], r.path[i + 1]);
      if (li < 0) {
        broken = true;
        continue;
      }
      bw_load[li] += r.bw_demand;
    }
    if (broken) {
      flag("route of link " + std::to_string(r.a) + "-" + std::to_string(r.b) +
           " uses a non-existent substrate link");
    }
  }
  for (int i = 0; i < m; ++i) {
    if (!times_routed[i]) {
      flag("request link " + std::to_string(request.links[i].a) + "-" +
           std::to_string(request.links[i].b) + " unrouted");
    }
  }
  for (const auto& [li, load] : bw_load) {
    if (pre_state.link(li).bw_available < load) {
      flag("insufficient bandwidth on link " + std::to_string(pre_state.link(li).a) +
           "-" + std::to_string(pre_state.link(li).b));
    }
  }

  long long revenue = 0;
  for (const auto& rn : request.nodes) revenue += rn.cpu_demand + rn.sto_demand;
  for (const auto& rl : request.links) revenue += rl.bw_demand;
  long long cost = 0;
  for (const auto& p : record.node_map) cost += p.cpu_demand + p.sto_demand;
  for (const auto& r : record.link_map) {
    cost += static_cast<long long>(r.bw_demand) *
            (static_cast<long long>(r.path.size()) - 1);
  }
  if (record.revenue != revenue) flag("recorded revenue mismatch");
  if (record.cost != cost) flag("recorded cost mismatch");
  if (record.cost < record.revenue) flag("cost below revenue");
  return out;
}

namespace {

// Depth-first enumeration over node assignments and simple routing paths,
// run on a scratch copy so the caller's substrate never changes.
struct OracleSearch {
  SubstrateNetwork net;
  const FunctionRequest& req;
  std::vector<NodeId> host_of;
  std::vector<char> used;
  std::vector<LinkRoute> routes;
  EmbeddingRecord witness;
  long long steps = 0;
  static constexpr long long kStepCap = 20'000'000;

  OracleSearch(const SubstrateNetwork& n, const FunctionRequest& r)
      : net(n), req(r), host_of(r.nodes.size(), -1), used(n.node_count(), 0) {}

  void tick() {
    if (++steps > kStepCap) {
      throw std::runtime_error("oracle step cap exceeded");
    }
  }

  bool place(std::size_t k) {
    if (k == req.nodes.size()) return route(0);
    const RequestNode& rn = req.nodes[k];
    for (const auto& sn : net.nodes()) {
      if (used[sn.id] || sn.domain != rn.candi) continue;
      if (sn.cpu_available < rn.cpu_demand || sn.sto_available < rn.sto_demand) {
        continue;
      }
      tick();
      if (net.allocate_node(sn.id, rn.cpu_demand, rn.sto_demand) != AllocStatus::Ok) {
        throw std::logic_error("oracle allocation failed after feasibility check");
      }
      used[sn.id] = 1;
      host_of[k] = sn.id;
      if (place(k + 1)) return true;
      host_of[k] = -1;
      used[sn.id] = 0;
      net.release_node(sn.id, rn.cpu_demand, rn.sto_demand);
    }
    return false;
  }

  bool route(std::size_t li) {
    if (li == req.links.size()) {
      witness.request_id = req.id;
      for (std::size_t k = 0; k < req.nodes.size(); ++k) {
        witness.node_map.push_back({req.nodes[k].id, host_of[k],
                                    req.nodes[k].cpu_demand, req.nodes[k].sto_demand});
      }
      witness.link_map = routes;
      witness.revenue = request_revenue(req);
      witness.cost = record_cost(witness);
      return true;
    }
    const RequestLink& rl = req.links[li];
    std::vector<NodeId> path{host_of[rl.a]};
    std::vector<char> on_path(net.node_count(), 0);
    on_path[host_of[rl.a]] = 1;
    return extend(li, host_of[rl.a], host_of[rl.b], rl.bw_demand, path, on_path);
  }

  bool extend(std::size_t li, NodeId u, NodeId dst, int bw, std::vector<NodeId>& path,
              std::vector<char>& on_path) {
    tick();
    if (u == dst) {
      if (net.allocate_path(path, bw) != AllocStatus::Ok) {
        throw std::logic_error("oracle path allocation failed after checks");
      }
      LinkRoute r;
      r.a = req.links[li].a;
      r.b = req.links[li].b;
      r.bw_demand = bw;
      r.path = path;
      routes.push_back(std::move(r));
      if (route(li + 1)) return true;
      routes.pop_back();
      net.release_path(path, bw);
      return false;
    }
    for (const auto& [nb, lidx] : net.incident(u)) {
      if (on_path[nb] || net.link(lidx).bw_available < bw) continue;
      path.push_back(nb);
      on_path[nb] = 1;
      if (extend(li, nb, dst, bw, path, on_path)) return true;
      on_path[nb] = 0;
      path.pop_back();
    }
    return false;
  }
};

}  // namespace

OracleResult brute_force_oracle(const SubstrateNetwork& net,
                                const FunctionRequest& request) {
  if (net.node_count() > 8) {
    throw std::invalid_argument("oracle substrate limited to 8 nodes");
  }
  if (request.nodes.size() > 4) {
    throw std::invalid_argument("oracle request limited to 4 nodes");
  }
  check_request_shape(request);
  OracleSearch search(net, request);
  OracleResult result;
  if (search.place(0)) {
    result.verdict = OracleVerdict::Feasible;
    result.witness = std::move(search.witness);
  }
  return result;
}

int oracle_min_hops(const SubstrateNetwork& net, NodeId src, NodeId dst,
                    int bw_demand) {
  net.node(src);
  net.node(dst);
  const int n = net.node_count();
  constexpr int kInf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, kInf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& l : net.links()) {
    if (l.bw_available >= bw_demand) d[l.a][l.b] = d[l.b][l.a] = 1;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
      }
    }
  }
  return d[src][dst] >= kInf ? -1 : d[src][dst];
}

}  // namespace sagin
