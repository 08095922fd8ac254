#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sagin/embedding.hpp"
#include "sagin/metrics.hpp"
#include "sagin/policy.hpp"

namespace sagin {

// Assignment of every substrate node to one edge domain; each edge domain
// lies inside a single segment. The default is one domain per segment.
struct DomainPartition {
  std::vector<int> domain_of_node;           // indexed by substrate node id
  std::vector<int> domain_ids;               // ascending, distinct
  std::map<int, Domain> segment_of_domain;

  std::vector<NodeId> nodes_of(int domain_id) const;

  static DomainPartition per_segment(const SubstrateNetwork& net);
  // Lines `<node_id> <edge_domain_id>`; every node exactly once, every
  // domain within one segment.
  static DomainPartition from_stream(std::istream& in, const SubstrateNetwork& net);
  static DomainPartition from_file(const std::string& path,
                                   const SubstrateNetwork& net);
};

// Raw feature snapshot a domain publishes; refreshed on every extraction.
struct StrategyTable {
  int domain_id = -1;
  FeatureMatrix snapshot;
  long long version = 0;
  double timestamp = 0.0;
};

struct DomainAgent {
  int domain_id = -1;
  Domain segment = Domain::Ground;
  DomainScope scope;
  PolicyParameters params;
  GradientAccumulator accumulator;
  StrategyTable table;
};

// One agent per partition domain; throws when `params` misses a domain.
std::map<int, DomainAgent> make_agents(const SubstrateNetwork& net,
                                       const DomainPartition& partition,
                                       const std::map<int, PolicyParameters>& params);

struct RegistryEntry {
  int domain_id = -1;
  Domain segment = Domain::Ground;
  PolicyParameters params;
  FeatureMatrix table;
  long long version = 0;  // counts uploads of this domain
  double timestamp = 0.0;
};

// Per-segment central servers holding only parameter and feature-matrix
// snapshots; never raw request or substrate data.
class CentralRegistry {
 public:
  void sync(const DomainAgent& agent, double time);
  // Copies every entry the `from` server owns into `to`'s mirror set.
  void exchange(Domain from, Domain to, double time);

  const RegistryEntry* own_entry(Domain segment, int domain_id) const;
  const RegistryEntry* mirrored_entry(Domain segment, int domain_id) const;
  long long version(Domain segment, int domain_id) const;  // 0 if never synced
  long long exchange_count() const { return exchange_count_; }

  void dump(std::ostream& out) const;

 private:
  struct SegmentServer {
    std::map<int, RegistryEntry> own;
    std::map<int, RegistryEntry> mirrored;
  };
  SegmentServer servers_[kNumSegments];
  long long exchange_count_ = 0;
};

struct DomainLinkState {
  NodeId a = -1;
  NodeId b = -1;
  int bw_available = 0;

  bool operator==(const DomainLinkState&) const = default;
};

struct DomainState {
  int domain_id = -1;
  Domain segment = Domain::Ground;
  std::vector<NodeId> nodes;
  std::vector<int> cpu_available;  // aligned with nodes
  std::vector<int> sto_available;
  std::vector<DomainLinkState> links;  // both endpoints inside the domain

  bool operator==(const DomainState&) const = default;
};

// Per-domain observation of the substrate at one instant.
struct JointState {
  double time = 0.0;
  std::vector<DomainState> domains;  // ascending domain id

  bool operator==(const JointState&) const = default;
};

JointState capture_joint_state(const SubstrateNetwork& net,
                               const DomainPartition& partition, double time);

enum class SelectionMode { Sample, Greedy };

// Policy-driven selector. Each request node is chosen by the agents of its
// candidate segment: when the segment is split into several edge domains,
// a domain is drawn with probability proportional to its share of the
// feasible hosts and that domain's policy picks the node (greedy mode takes
// the argmax of the combined probabilities instead). With one domain per
// segment this reduces to plain softmax selection.
class DdrlSelector : public NodeSelector {
 public:
  DdrlSelector(std::map<int, DomainAgent>& agents, const DomainPartition& partition,
               SelectionMode mode, std::mt19937_64* rng, bool record_gradients,
               CentralRegistry* registry = nullptr);

  NodeId choose(const SubstrateNetwork& net, const FunctionRequest& request,
                const RequestNode& node, const std::vector<NodeId>& feasible) override;

  void set_time(double t) { time_ = t; }
  // Per-placement (domain, gradient) pairs recorded since the last call.
  std::vector<std::pair<int, LogProbGradient>> take_pending();

 private:
  std::map<int, DomainAgent>& agents_;
  const DomainPartition& partition_;
  SelectionMode mode_;
  std::mt19937_64* rng_;
  bool record_gradients_;
  CentralRegistry* registry_;
  double time_ = 0.0;
  std::vector<std::pair<int, LogProbGradient>> pending_;
};

// Owns one simulation replica: substrate, ledger, and the records of
// currently embedded requests.
class Orchestrator {
 public:
  Orchestrator(SubstrateNetwork substrate, const std::vector<FunctionRequest>& requests);

  // Applies one event. An Arrival attempts the embedding and updates the
  // ledger; a Departure releases a still-active record and is a no-op for
  // requests that arrived but were rejected. Returns the acceptance
  // verdict for arrivals, nullopt for departures.
  std::optional<bool> step(const WorkloadEvent& event, NodeSelector& selector,
                           EmbedCounters* counters = nullptr);

  const SubstrateNetwork& substrate() const { return net_; }
  const MetricsLedger& ledger() const { return ledger_; }
  const std::map<int, EmbeddingRecord>& active() const { return active_; }

 private:
  SubstrateNetwork net_;
  std::map<int, FunctionRequest> requests_;
  std::map<int, EmbeddingRecord> active_;
  std::set<int> arrived_;
  MetricsLedger ledger_;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 100;
  double learning_rate = 0.005;
  std::uint64_t seed = 1;
  // Divides the revenue-rate term of the reward by the running mean
  // accepted-request revenue, taming its scale relative to the two ratio
  // terms. Recorded metrics are never rescaled.
  bool normalize_reward = false;
  // Reserved discount factor; the implemented update uses the immediate
  // joint reward only, so this is configuration without an effect.
  double gamma = 0.95;
};

struct EpochStats {
  int epoch = 0;
  double mean_ar = 0.0;
  double mean_rc = 0.0;
  double mean_acr = 0.0;
  double mean_objective = 0.0;
  double final_objective = 0.0;
  long long accepted = 0;
  long long arrived = 0;
  long long updates = 0;
};

struct TrainResult {
  std::map<int, PolicyParameters> params;
  std::vector<EpochStats> epochs;
  long long total_updates = 0;
};

// Replays the workload each epoch against a fresh substrate copy, sampling
// placements from the per-domain policies, stacking log-prob gradients and
// applying a batched update scaled by the joint objective.
TrainResult train(const SubstrateNetwork& substrate,
                  const std::vector<FunctionRequest>& workload,
                  const DomainPartition& partition, const TrainConfig& config,
                  CentralRegistry* registry = nullptr);

enum class Algo { Ddrl, Nrmvne, Random };
Algo algo_from_name(std::string_view name);
const char* to_string(Algo a);

struct EvalSummary {
  double final_ar = 0.0;
  double final_rc = 0.0;
  double final_acr = 0.0;
  double final_objective = 0.0;
  long long accepted = 0;
  long long arrived = 0;
};

struct EvalResult {
  MetricsLedger ledger;
  EvalSummary summary;
  EmbedCounters counters;
};

// Single pass over the event stream; the policy runs greedily.
EvalResult evaluate(const SubstrateNetwork& substrate,
                    const std::vector<FunctionRequest>& workload, Algo algo,
                    const std::map<int, PolicyParameters>* params,
                    const DomainPartition& partition, std::uint64_t seed = 1);

// Model file: one AGENT section per domain wrapping the parameter lines.
void save_model(const std::map<int, PolicyParameters>& params, std::ostream& out,
                std::string_view provenance = {});
void save_model_file(const std::map<int, PolicyParameters>& params,
                     const std::string& path, std::string_view provenance = {});
std::map<int, PolicyParameters> load_model(std::istream& in);
std::map<int, PolicyParameters> load_model_file(const std::string& path);

void write_training_csv(const TrainResult& result, std::ostream& out);

}  // namespace sagin
