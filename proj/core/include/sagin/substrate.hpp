#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sagin {

using NodeId = int;

// Segment codes used on the wire: 0 = space, 1 = air, 2 = ground.
enum class Domain : int { Space = 0, Air = 1, Ground = 2 };
inline constexpr int kNumSegments = 3;

Domain domain_from_code(int code);  // throws std::invalid_argument on bad code
const char* domain_name(Domain d);

struct SubstrateNode {
  NodeId id = -1;
  Domain domain = Domain::Ground;
  int cpu_capacity = 0;
  int cpu_available = 0;
  int sto_capacity = 0;
  int sto_available = 0;
};

// Undirected, stored once with a < b.
struct SubstrateLink {
  NodeId a = -1;
  NodeId b = -1;
  int bw_capacity = 0;
  int bw_available = 0;
  bool inter_domain = false;
};

enum class AllocStatus {
  Ok,
  InsufficientCpu,
  InsufficientSto,
  InsufficientBw,
  BrokenPath,
};
const char* to_string(AllocStatus s);

// Raised by the text parsers; carries the offending 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

// The physical graph with capacity/availability accounting. Every mutating
// operation is atomic: it either applies fully or leaves the network
// untouched. Expected failures (not enough resources) come back as an
// AllocStatus; accounting bugs (over-release) throw std::logic_error.
class SubstrateNetwork {
 public:
  NodeId add_node(Domain domain, int cpu_capacity, int sto_capacity);
  void add_link(NodeId a, NodeId b, int bw_capacity);

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int link_count() const { return static_cast<int>(links_.size()); }
  const SubstrateNode& node(NodeId id) const;
  SubstrateNode& node(NodeId id);
  const std::vector<SubstrateNode>& nodes() const { return nodes_; }
  const std::vector<SubstrateLink>& links() const { return links_; }

  // Index into links() for the undirected pair, or -1 if absent.
  int link_index(NodeId a, NodeId b) const;
  const SubstrateLink& link(int index) const { return links_.at(index); }

  // Directly connected node ids, ascending.
  std::vector<NodeId> neighbors(NodeId id) const;
  // (neighbor, link index) pairs, ascending by neighbor; the hot-path form.
  const std::vector<std::pair<NodeId, int>>& incident(NodeId id) const;

  std::vector<NodeId> nodes_in_domain(Domain d) const;

  AllocStatus allocate_node(NodeId id, int cpu_amount, int sto_amount);
  void release_node(NodeId id, int cpu_amount, int sto_amount);

  // Per-hop bandwidth debit along consecutive pairs of `path`; all hops or
  // none. A path shorter than two nodes is a no-op.
  AllocStatus allocate_path(std::span<const NodeId> path, int bw_amount);
  void release_path(std::span<const NodeId> path, int bw_amount);

  // Full structural + accounting self-check; throws std::logic_error with a
  // description of the first violated invariant.
  void check_invariants() const;

  bool operator==(const SubstrateNetwork& other) const;

 private:
  void require_node(NodeId id) const;

  std::vector<SubstrateNode> nodes_;
  std::vector<SubstrateLink> links_;
  std::vector<std::vector<std::pair<NodeId, int>>> incident_;
  std::unordered_map<std::uint64_t, int> link_lookup_;
};

// Text format:
//   NODES <count>            then per node:  <id> <domain 0|1|2> <cpu> <sto>
//   LINKS <count>            then per link:  <id_a> <id_b> <bw>
// '#' starts a comment; node ids must be consecutive from 0. Loaded
// networks start with available == capacity.
SubstrateNetwork load_substrate(std::istream& in);
SubstrateNetwork load_substrate_file(const std::string& path);
void save_substrate(const SubstrateNetwork& net, std::ostream& out,
                    std::string_view provenance = {});
void save_substrate_file(const SubstrateNetwork& net, const std::string& path,
                         std::string_view provenance = {});

}  // namespace sagin
