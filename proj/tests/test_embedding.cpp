#include <algorithm>
#include <random>
#include <vector>

#include "doctest.h"
#include "sagin/embedding.hpp"
#include "sagin/metrics.hpp"
#include "sagin/workload.hpp"

using namespace sagin;

namespace {

// A   B: nodes 0..2 with A-C direct (thin) plus A-B-C (wide).
//  \ /
//   C
SubstrateNetwork detour_net() {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);  // A = 0
  net.add_node(Domain::Ground, 50, 50);  // B = 1
  net.add_node(Domain::Ground, 50, 50);  // C = 2
  net.add_link(0, 1, 20);
  net.add_link(1, 2, 20);
  net.add_link(0, 2, 5);
  return net;
}

FunctionRequest make_request(std::vector<RequestNode> nodes,
                             std::vector<RequestLink> links) {
  FunctionRequest req;
  req.id = 1;
  req.arrival_time = 0.0;
  req.lifetime = 10.0;
  req.nodes = std::move(nodes);
  req.links = std::move(links);
  return req;
}

// Picks the first (smallest id) feasible candidate; deterministic filler.
class FirstSelector : public NodeSelector {
 public:
  NodeId choose(const SubstrateNetwork&, const FunctionRequest&,
                const RequestNode&, const std::vector<NodeId>& feasible) override {
    return feasible.front();
  }
};

// Forces specific hosts per local node id; -1 entries abstain.
class ScriptedSelector : public NodeSelector {
 public:
  explicit ScriptedSelector(std::vector<NodeId> hosts) : hosts_(std::move(hosts)) {}
  NodeId choose(const SubstrateNetwork&, const FunctionRequest&,
                const RequestNode& node, const std::vector<NodeId>&) override {
    return hosts_.at(node.id);
  }

 private:
  std::vector<NodeId> hosts_;
};

SubstrateGenConfig small_gen(std::uint64_t seed) {
  SubstrateGenConfig cfg;
  cfg.ground_nodes = 4;
  cfg.air_nodes = 2;
  cfg.space_nodes = 2;
  cfg.inter_links_per_node = 1;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("smallest request embeds with matching revenue and cost") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  FunctionRequest req = make_request({{0, 10, 5, Domain::Ground}}, {});
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK(net.node(0).cpu_available == 40);
  CHECK(net.node(0).sto_available == 45);
  CHECK(out.record->revenue == 15);
  CHECK(out.record->cost == 15);
  CHECK(out.record->node_map.size() == 1);
  CHECK(out.record->node_map[0].host == 0);
  CHECK(out.record->link_map.empty());
}

TEST_CASE("exhausted candidate domain rejects without touching the net") {
  SubstrateNetwork net;
  net.add_node(Domain::Space, 50, 50);
  net.add_node(Domain::Ground, 50, 50);
  net.add_link(0, 1, 20);
  REQUIRE(net.allocate_node(0, 50, 0) == AllocStatus::Ok);  // drain space cpu
  SubstrateNetwork before = net;
  FunctionRequest req = make_request({{0, 10, 5, Domain::Space}}, {});
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  CHECK_FALSE(out.accepted());
  CHECK(out.reason == RejectReason::NoFeasibleNode);
  CHECK(net == before);
}

TEST_CASE("a domain with no nodes at all is its own rejection reason") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  SubstrateNetwork before = net;
  FunctionRequest req = make_request({{0, 1, 1, Domain::Air}}, {});
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  CHECK(out.reason == RejectReason::EmptyCandidateSet);
  CHECK(net == before);
}

TEST_CASE("link failure rolls node allocations back exactly") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  net.add_node(Domain::Ground, 50, 50);
  net.add_link(0, 1, 5);
  SubstrateNetwork before = net;
  FunctionRequest req = make_request(
      {{0, 10, 10, Domain::Ground}, {1, 10, 10, Domain::Ground}}, {{0, 1, 30}});
  // The only 2-host assignment is forced; the single link cannot carry 30.
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  CHECK_FALSE(out.accepted());
  CHECK(out.reason == RejectReason::NoFeasiblePath);
  CHECK(net == before);
  // And the oracle agrees this instance is infeasible.
  CHECK_FALSE(brute_force_oracle(net, req).feasible());
}

TEST_CASE("an abstaining selector turns into NoFeasibleNode") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  SubstrateNetwork before = net;
  FunctionRequest req = make_request({{0, 1, 1, Domain::Ground}}, {});
  ScriptedSelector sel({-1});
  EmbeddingOutcome out = embed_request(net, req, sel);
  CHECK(out.reason == RejectReason::NoFeasibleNode);
  CHECK(net == before);
}

TEST_CASE("selector returning a non-candidate is a hard bug") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  net.add_node(Domain::Air, 50, 50);
  FunctionRequest req = make_request({{0, 1, 1, Domain::Ground}}, {});
  ScriptedSelector sel({1});  // air host for a ground-candi node
  CHECK_THROWS_AS(embed_request(net, req, sel), std::logic_error);
}

TEST_CASE("request nodes of one request occupy distinct hosts") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 100, 100);
  net.add_node(Domain::Ground, 10, 10);
  net.add_link(0, 1, 50);
  FunctionRequest req = make_request(
      {{0, 5, 5, Domain::Ground}, {1, 5, 5, Domain::Ground}}, {{0, 1, 5}});
  FirstSelector sel;  // would pick host 0 twice if allowed
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK(out.record->node_map[0].host == 0);
  CHECK(out.record->node_map[1].host == 1);
}

TEST_CASE("malformed requests are rejected up front") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  FirstSelector sel;
  FunctionRequest empty = make_request({}, {});
  CHECK_THROWS_AS(embed_request(net, empty, sel), std::invalid_argument);
  FunctionRequest gap = make_request({{1, 1, 1, Domain::Ground}}, {});
  CHECK_THROWS_AS(embed_request(net, gap, sel), std::invalid_argument);
  FunctionRequest bad_link =
      make_request({{0, 1, 1, Domain::Ground}}, {{0, 2, 5}});
  CHECK_THROWS_AS(embed_request(net, bad_link, sel), std::invalid_argument);
}

TEST_CASE("search prefers the wide detour when the direct edge is thin") {
  SubstrateNetwork net = detour_net();
  auto path = bfs_link_map(net, 0, 2, 10);
  REQUIRE(path.has_value());
  CHECK(*path == std::vector<NodeId>{0, 1, 2});
}

TEST_CASE("search takes the direct edge when it fits") {
  SubstrateNetwork net = detour_net();
  auto path = bfs_link_map(net, 0, 2, 3);
  REQUIRE(path.has_value());
  CHECK(*path == std::vector<NodeId>{0, 2});
}

TEST_CASE("search reports unreachable when nothing fits") {
  SubstrateNetwork net = detour_net();
  CHECK_FALSE(bfs_link_map(net, 0, 2, 30).has_value());
  CHECK_THROWS_AS(bfs_link_map(net, 0, 0, 1), std::invalid_argument);
}

TEST_CASE("equal-hop alternatives resolve to the smallest node sequence") {
  SubstrateNetwork net;
  for (int i = 0; i < 4; ++i) net.add_node(Domain::Ground, 10, 10);
  // 0-1-3 and 0-2-3 both have 2 hops and enough bandwidth.
  net.add_link(0, 1, 20);
  net.add_link(1, 3, 20);
  net.add_link(0, 2, 20);
  net.add_link(2, 3, 20);
  auto path = bfs_link_map(net, 0, 3, 5);
  REQUIRE(path.has_value());
  CHECK(*path == std::vector<NodeId>{0, 1, 3});
  // Starve the 1-route; the tie break re-resolves to the 2-route.
  std::vector<NodeId> thin{0, 1};
  REQUIRE(net.allocate_path(thin, 16) == AllocStatus::Ok);
  auto alt = bfs_link_map(net, 0, 3, 5);
  REQUIRE(alt.has_value());
  CHECK(*alt == std::vector<NodeId>{0, 2, 3});
}

TEST_CASE("search hop counts match the oracle on random networks") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    SubstrateNetwork net = generate_substrate(small_gen(100 + trial));
    for (int probe = 0; probe < 20; ++probe) {
      NodeId src = static_cast<NodeId>(rng() % net.node_count());
      NodeId dst = static_cast<NodeId>(rng() % net.node_count());
      if (src == dst) continue;
      int bw = 1 + static_cast<int>(rng() % 90);
      EmbedCounters counters;
      auto path = bfs_link_map(net, src, dst, bw, &counters);
      int best = oracle_min_hops(net, src, dst, bw);
      if (path.has_value()) {
        REQUIRE(best >= 1);
        CHECK(static_cast<int>(path->size()) - 1 == best);
        // Every hop is a real link with room.
        for (std::size_t i = 0; i + 1 < path->size(); ++i) {
          int li = net.link_index((*path)[i], (*path)[i + 1]);
          REQUIRE(li >= 0);
          CHECK(net.link(li).bw_available >= bw);
        }
      } else {
        CHECK(best == -1);
      }
      CHECK(counters.max_bfs_link_visits <= net.link_count());
    }
  }
}

TEST_CASE("heuristic places the hungriest request node first") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 100, 100);
  net.add_node(Domain::Ground, 100, 100);
  net.add_link(0, 1, 60);
  FunctionRequest req = make_request(
      {{0, 5, 5, Domain::Ground}, {1, 40, 40, Domain::Ground}}, {{0, 1, 5}});
  NrmvneSelector sel;
  CHECK(sel.placement_order(req) == std::vector<int>{1, 0});
  // Equal demands keep the stored (ascending id) order.
  FunctionRequest tied = make_request(
      {{0, 20, 20, Domain::Ground}, {1, 20, 20, Domain::Ground}}, {{0, 1, 5}});
  CHECK(sel.placement_order(tied) == std::vector<int>{0, 1});
}

TEST_CASE("heuristic prefers the higher-metric host") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 30, 30);   // metric (30+30)*10 = 600
  net.add_node(Domain::Ground, 45, 45);   // metric (45+45)*10 = 900
  net.add_link(0, 1, 10);
  FunctionRequest req = make_request({{0, 10, 10, Domain::Ground}}, {});
  NrmvneSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK(out.record->node_map[0].host == 1);
}

TEST_CASE("heuristic metric ties resolve to the smaller id") {
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 40, 40);
  net.add_node(Domain::Ground, 40, 40);
  net.add_node(Domain::Ground, 40, 40);
  net.add_link(0, 1, 10);
  net.add_link(1, 2, 10);
  net.add_link(0, 2, 10);  // symmetric triangle: all metrics equal
  FunctionRequest req = make_request({{0, 10, 10, Domain::Ground}}, {});
  NrmvneSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK(out.record->node_map[0].host == 0);
}

TEST_CASE("heuristic routes the thickest link first") {
  NrmvneSelector sel;
  FunctionRequest req = make_request({{0, 1, 1, Domain::Ground},
                                      {1, 1, 1, Domain::Ground},
                                      {2, 1, 1, Domain::Ground}},
                                     {{0, 1, 5}, {1, 2, 40}, {0, 2, 20}});
  CHECK(sel.link_order(req) == std::vector<int>{1, 2, 0});
}

TEST_CASE("heuristic metrics freeze at request start") {
  // Host 1 starts strictly better; after the first placement drains it,
  // the frozen ranking still sends the second node to a fresh host, and
  // injectivity makes the stale metric harmless.
  SubstrateNetwork net;
  net.add_node(Domain::Ground, 50, 50);
  net.add_node(Domain::Ground, 60, 60);
  net.add_node(Domain::Ground, 55, 55);
  net.add_link(0, 1, 30);
  net.add_link(1, 2, 30);
  net.add_link(0, 2, 30);
  FunctionRequest req = make_request(
      {{0, 40, 40, Domain::Ground}, {1, 10, 10, Domain::Ground}}, {{0, 1, 5}});
  NrmvneSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK(out.record->node_map[0].host == 1);  // placed first (larger demand)
  CHECK(out.record->node_map[1].host == 2);  // next-best by frozen metric
}

TEST_CASE("random selector is seed-deterministic and in-range") {
  SubstrateNetwork net = generate_substrate(small_gen(5));
  WorkloadGenConfig wcfg;
  wcfg.count = 30;
  wcfg.seed = 6;
  auto reqs = generate_workload(wcfg);
  for (int round = 0; round < 2; ++round) {
    SubstrateNetwork a = net, b = net;
    RandomSelector sa(9), sb(9);
    for (const auto& req : reqs) {
      EmbeddingOutcome oa = embed_request(a, req, sa);
      EmbeddingOutcome ob = embed_request(b, req, sb);
      CHECK(oa.accepted() == ob.accepted());
      if (oa.accepted()) CHECK(*oa.record == *ob.record);
    }
    CHECK(a == b);
  }
}

TEST_CASE("accepting and releasing a request is a round trip") {
  SubstrateNetwork net = detour_net();
  SubstrateNetwork before = net;
  FunctionRequest req = make_request(
      {{0, 10, 10, Domain::Ground}, {1, 10, 10, Domain::Ground}}, {{0, 1, 10}});
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  CHECK_FALSE(net == before);
  release_request(net, *out.record);
  CHECK(net == before);
  // Releasing the same record again over-credits and must throw.
  CHECK_THROWS_AS(release_request(net, *out.record), std::logic_error);
  CHECK(net == before);  // failed release reverted its partial work
}

TEST_CASE("a hundred interleaved embeds and releases conserve resources") {
  SubstrateNetwork net = generate_substrate(small_gen(77));
  SubstrateNetwork pristine = net;
  WorkloadGenConfig wcfg;
  wcfg.count = 100;
  wcfg.nodes_per_request = {2, 4};
  wcfg.seed = 78;
  auto reqs = generate_workload(wcfg);
  RandomSelector sel(79);
  std::mt19937_64 rng(80);
  std::vector<EmbeddingRecord> live;
  int accepted = 0;
  for (const auto& req : reqs) {
    EmbeddingOutcome out = embed_request(net, req, sel);
    if (out.accepted()) {
      ++accepted;
      live.push_back(*out.record);
    }
    if (!live.empty() && rng() % 2 == 0) {
      std::size_t i = rng() % live.size();
      release_request(net, live[i]);
      live.erase(live.begin() + i);
    }
    net.check_invariants();
  }
  CHECK(accepted > 0);
  for (const auto& rec : live) release_request(net, rec);
  CHECK(net == pristine);
}

TEST_CASE("validator passes every engine-produced record") {
  SubstrateNetwork net = generate_substrate(small_gen(31));
  WorkloadGenConfig wcfg;
  wcfg.count = 60;
  wcfg.nodes_per_request = {2, 4};
  wcfg.seed = 32;
  auto reqs = generate_workload(wcfg);
  NrmvneSelector sel;
  int audited = 0;
  for (const auto& req : reqs) {
    SubstrateNetwork pre = net;
    EmbeddingOutcome out = embed_request(net, req, sel);
    if (!out.accepted()) continue;
    auto violations = validate_embedding(pre, req, *out.record);
    for (const auto& v : violations) FAIL_CHECK(v.what);
    ++audited;
  }
  CHECK(audited > 0);
}

TEST_CASE("validator catches injected corruption") {
  SubstrateNetwork net = detour_net();
  SubstrateNetwork pre = net;
  FunctionRequest req = make_request(
      {{0, 10, 10, Domain::Ground}, {1, 10, 10, Domain::Ground}}, {{0, 1, 10}});
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  REQUIRE(out.accepted());
  REQUIRE(validate_embedding(pre, req, *out.record).empty());

  EmbeddingRecord shared = *out.record;
  shared.node_map[1].host = shared.node_map[0].host;  // break injectivity
  CHECK_FALSE(validate_embedding(pre, req, shared).empty());

  EmbeddingRecord wrong_domain = *out.record;
  wrong_domain.node_map[0].host = 99;
  CHECK_FALSE(validate_embedding(pre, req, wrong_domain).empty());

  EmbeddingRecord under_demand = *out.record;
  under_demand.node_map[0].cpu_demand -= 1;
  CHECK_FALSE(validate_embedding(pre, req, under_demand).empty());

  EmbeddingRecord broken_route = *out.record;
  broken_route.link_map[0].path = {0, 2};  // endpoints no longer match hosts
  CHECK_FALSE(validate_embedding(pre, req, broken_route).empty());

  EmbeddingRecord dropped_link = *out.record;
  dropped_link.link_map.clear();
  CHECK_FALSE(validate_embedding(pre, req, dropped_link).empty());

  EmbeddingRecord bad_price = *out.record;
  bad_price.cost -= 1;
  CHECK_FALSE(validate_embedding(pre, req, bad_price).empty());
}

TEST_CASE("whatever the engine accepts the oracle can also embed") {
  std::mt19937_64 rng(55);
  int accepted = 0, rejected = 0;
  for (int trial = 0; trial < 120; ++trial) {
    SubstrateNetwork net = generate_substrate(small_gen(200 + trial));
    WorkloadGenConfig wcfg;
    wcfg.count = 1;
    wcfg.nodes_per_request = {2, 4};
    wcfg.bw_demand = {1, 80};
    wcfg.seed = 300 + trial;
    FunctionRequest req = generate_workload(wcfg)[0];
    SubstrateNetwork pre = net;
    RandomSelector sel(rng());
    EmbeddingOutcome out = embed_request(net, req, sel);
    OracleResult oracle = brute_force_oracle(pre, req);
    if (out.accepted()) {
      ++accepted;
      CHECK(oracle.feasible());  // engine acceptance implies feasibility
    } else {
      ++rejected;
      // Oracle infeasibility must imply engine rejection; and any
      // rejection leaves the substrate untouched.
      CHECK(net == pre);
    }
    if (!oracle.feasible()) CHECK_FALSE(out.accepted());
  }
  CHECK(accepted > 10);  // the sweep exercises both outcomes
  CHECK(rejected > 10);
}

TEST_CASE("oracle witnesses satisfy the independent validator") {
  for (int trial = 0; trial < 40; ++trial) {
    SubstrateNetwork net = generate_substrate(small_gen(500 + trial));
    WorkloadGenConfig wcfg;
    wcfg.count = 1;
    wcfg.nodes_per_request = {2, 3};
    wcfg.seed = 600 + trial;
    FunctionRequest req = generate_workload(wcfg)[0];
    SubstrateNetwork before = net;
    OracleResult oracle = brute_force_oracle(net, req);
    CHECK(net == before);  // oracle never mutates
    if (!oracle.feasible()) continue;
    REQUIRE(oracle.witness.has_value());
    auto violations = validate_embedding(net, req, *oracle.witness);
    for (const auto& v : violations) FAIL_CHECK(v.what);
  }
}

TEST_CASE("disconnected candidate domains are infeasible for linked requests") {
  SubstrateNetwork net;
  net.add_node(Domain::Space, 50, 50);
  net.add_node(Domain::Ground, 50, 50);
  // No link between the segments at all.
  FunctionRequest req = make_request(
      {{0, 1, 1, Domain::Space}, {1, 1, 1, Domain::Ground}}, {{0, 1, 1}});
  OracleResult oracle = brute_force_oracle(net, req);
  CHECK_FALSE(oracle.feasible());
  FirstSelector sel;
  EmbeddingOutcome out = embed_request(net, req, sel);
  CHECK(out.reason == RejectReason::NoFeasiblePath);
}

TEST_CASE("oracle refuses oversized instances") {
  SubstrateNetwork big = generate_substrate(SubstrateGenConfig{});
  FunctionRequest req = make_request({{0, 1, 1, Domain::Ground}}, {});
  CHECK_THROWS_AS(brute_force_oracle(big, req), std::invalid_argument);
  SubstrateNetwork small;
  small.add_node(Domain::Ground, 9, 9);
  FunctionRequest wide = make_request({{0, 1, 1, Domain::Ground},
                                       {1, 1, 1, Domain::Ground},
                                       {2, 1, 1, Domain::Ground},
                                       {3, 1, 1, Domain::Ground},
                                       {4, 1, 1, Domain::Ground}},
                                      {});
  CHECK_THROWS_AS(brute_force_oracle(small, wide), std::invalid_argument);
}

TEST_CASE("work counters stay inside the advertised bounds") {
  SubstrateNetwork net = generate_substrate(SubstrateGenConfig{});
  WorkloadGenConfig wcfg;
  wcfg.count = 200;
  wcfg.seed = 71;
  auto reqs = generate_workload(wcfg);
  NrmvneSelector sel;
  EmbedCounters counters;
  int accepted = 0;
  for (const auto& req : reqs) {
    EmbeddingOutcome out = embed_request(net, req, sel, &counters);
    if (out.accepted()) ++accepted;
  }
  CHECK(accepted > 0);
  CHECK(counters.selections > 0);
  CHECK(counters.bfs_calls > 0);
  // One node choice never scans more rows than the substrate has nodes;
  // one path search never visits more links than the substrate has.
  CHECK(counters.max_selection_rows <= net.node_count());
  CHECK(counters.max_bfs_link_visits <= net.link_count());
}

}  // TEST_SUITE("embedding")
