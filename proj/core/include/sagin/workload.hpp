#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sagin/substrate.hpp"

namespace sagin {

struct RequestNode {
  int id = -1;
  int cpu_demand = 0;
  int sto_demand = 0;
  Domain candi = Domain::Ground;

  bool operator==(const RequestNode&) const = default;
};

// Undirected, endpoints canonical (a < b).
struct RequestLink {
  int a = -1;
  int b = -1;
  int bw_demand = 0;

  bool operator==(const RequestLink&) const = default;
};

struct FunctionRequest {
  int id = -1;
  double arrival_time = 0.0;
  double lifetime = 0.0;
  std::vector<RequestNode> nodes;
  std::vector<RequestLink> links;

  double departure_time() const { return arrival_time + lifetime; }
  bool operator==(const FunctionRequest&) const = default;
};

// Departure sorts before Arrival on time ties so resources freed by a
// leaving request are visible to one arriving at the same instant.
enum class EventKind : int { Departure = 0, Arrival = 1 };

struct WorkloadEvent {
  double time = 0.0;
  EventKind kind = EventKind::Arrival;
  int request_id = -1;

  bool operator==(const WorkloadEvent&) const = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
};

struct SubstrateGenConfig {
  int ground_nodes = 60;
  int air_nodes = 30;
  int space_nodes = 10;
  IntRange ground_node_resources{50, 100};   // CPU and STO, per node
  IntRange airspace_node_resources{50, 80};
  IntRange ground_bw{50, 100};
  IntRange airspace_bw{50, 80};   // also used for inter-domain links
  double intra_link_prob = 0.5;
  int inter_links_per_node = 2;   // space->air and air->ground attachments
  std::uint64_t seed = 1;
};

struct WorkloadGenConfig {
  int count = 1000;
  IntRange nodes_per_request{2, 10};
  IntRange cpu_demand{1, 50};
  IntRange sto_demand{1, 50};
  IntRange bw_demand{1, 50};
  double link_prob = 0.5;
  // Relative weights for assigning candi = space/air/ground.
  double candi_weights[kNumSegments] = {1.0, 1.0, 1.0};
  double arrival_rate = 0.04;     // Poisson arrivals per time unit
  double mean_lifetime = 500.0;   // exponential lifetimes
  std::uint64_t seed = 1;
};

SubstrateNetwork generate_substrate(const SubstrateGenConfig& cfg);
std::vector<FunctionRequest> generate_workload(const WorkloadGenConfig& cfg);

// Two events per request, sorted by (time, Departure-first, request_id).
std::vector<WorkloadEvent> event_stream(const std::vector<FunctionRequest>& requests);

void save_workload(const std::vector<FunctionRequest>& requests, std::ostream& out,
                   std::string_view provenance = {});
void save_workload_file(const std::vector<FunctionRequest>& requests,
                        const std::string& path, std::string_view provenance = {});
std::vector<FunctionRequest> parse_workload(std::istream& in);
std::vector<FunctionRequest> parse_workload_file(const std::string& path);

}  // namespace sagin
