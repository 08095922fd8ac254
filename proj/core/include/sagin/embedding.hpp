#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sagin/workload.hpp"

namespace sagin {

struct NodePlacement {
  int request_node = -1;
  NodeId host = -1;
  int cpu_demand = 0;
  int sto_demand = 0;

  bool operator==(const NodePlacement&) const = default;
};

struct LinkRoute {
  int a = -1;  // request-local endpoints, canonical a < b
  int b = -1;
  int bw_demand = 0;
  std::vector<NodeId> path;  // substrate nodes; consecutive pairs are links

  int hops() const { return static_cast<int>(path.size()) - 1; }
  bool operator==(const LinkRoute&) const = default;
};

// Carries the demands alongside the mapping so releases and cost audits
// need nothing but the record itself.
struct EmbeddingRecord {
  int request_id = -1;
  std::vector<NodePlacement> node_map;
  std::vector<LinkRoute> link_map;
  long long revenue = 0;
  long long cost = 0;

  bool operator==(const EmbeddingRecord&) const = default;
};

enum class RejectReason { None, EmptyCandidateSet, NoFeasibleNode, NoFeasiblePath };
const char* to_string(RejectReason r);

struct EmbeddingOutcome {
  std::optional<EmbeddingRecord> record;  // engaged iff accepted
  RejectReason reason = RejectReason::None;

  bool accepted() const { return record.has_value(); }
};

// Instrumentation backing the O(N+E) claim: the widest candidate scan of a
// single node choice and the most links examined by a single search.
struct EmbedCounters {
  long long max_selection_rows = 0;
  long long max_bfs_link_visits = 0;
  long long selections = 0;
  long long bfs_calls = 0;

  void merge(const EmbedCounters& other);
};

// Strategy hook deciding which substrate node hosts each request node.
class NodeSelector {
 public:
  virtual ~NodeSelector() = default;

  // Called once before any placement of this request.
  virtual void begin_request(const SubstrateNetwork& net,
                             const FunctionRequest& request) {}
  // Placement order over local node ids; default ascending.
  virtual std::vector<int> placement_order(const FunctionRequest& request) const;
  // Routing order over link indices; default as stored.
  virtual std::vector<int> link_order(const FunctionRequest& request) const;
  // Picks a host from the feasible candidates (ascending ids, non-empty);
  // -1 abstains, which the engine treats as NoFeasibleNode.
  virtual NodeId choose(const SubstrateNetwork& net, const FunctionRequest& request,
                        const RequestNode& node,
                        const std::vector<NodeId>& feasible) = 0;
};

class RandomSelector : public NodeSelector {
 public:
  explicit RandomSelector(std::uint64_t seed) : rng_(seed) {}
  NodeId choose(const SubstrateNetwork& net, const FunctionRequest& request,
                const RequestNode& node, const std::vector<NodeId>& feasible) override;

 private:
  std::mt19937_64 rng_;
};

// Heuristic comparator: request nodes ranked by total demand, hosts by
// (available cpu + sto) * incident available bandwidth, links by demand.
class NrmvneSelector : public NodeSelector {
 public:
  void begin_request(const SubstrateNetwork& net,
                     const FunctionRequest& request) override;
  std::vector<int> placement_order(const FunctionRequest& request) const override;
  std::vector<int> link_order(const FunctionRequest& request) const override;
  NodeId choose(const SubstrateNetwork& net, const FunctionRequest& request,
                const RequestNode& node, const std::vector<NodeId>& feasible) override;

 private:
  std::vector<long long> metric_;  // per substrate node, fixed per request
};

// Maps one request onto the substrate: nodes in selector order against the
// candidate domain, then each link over a minimum-hop bandwidth-feasible
// path. Any failure rolls every prior allocation back exactly.
EmbeddingOutcome embed_request(SubstrateNetwork& net, const FunctionRequest& request,
                               NodeSelector& selector,
                               EmbedCounters* counters = nullptr);

// Minimum-hop path whose every hop has bw_available >= bw_demand; among
// equal-hop paths, the lexicographically smallest node sequence.
std::optional<std::vector<NodeId>> bfs_link_map(const SubstrateNetwork& net,
                                                NodeId src, NodeId dst, int bw_demand,
                                                EmbedCounters* counters = nullptr);

void release_request(SubstrateNetwork& net, const EmbeddingRecord& record);

struct Violation {
  int request_id = -1;
  std::string what;
};

// Independent audit of an accepted record against the pre-embed snapshot:
// domain constraints, injectivity, capacities, path structure, pricing.
std::vector<Violation> validate_embedding(const SubstrateNetwork& pre_state,
                                          const FunctionRequest& request,
                                          const EmbeddingRecord& record);

enum class OracleVerdict { Feasible, Infeasible };

struct OracleResult {
  OracleVerdict verdict = OracleVerdict::Infeasible;
  std::optional<EmbeddingRecord> witness;

  bool feasible() const { return verdict == OracleVerdict::Feasible; }
};

// Exhaustive feasibility check for tests; instances are capped at 8
// substrate and 4 request nodes. Leaves the substrate untouched.
OracleResult brute_force_oracle(const SubstrateNetwork& net,
                                const FunctionRequest& request);

// Fewest hops over links with bw_available >= bw_demand (all-pairs
// relaxation, deliberately not the engine's search); -1 when unreachable.
int oracle_min_hops(const SubstrateNetwork& net, NodeId src, NodeId dst,
                    int bw_demand);

}  // namespace sagin
