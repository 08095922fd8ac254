#include "sagin/substrate.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "text_io.hpp"

namespace sagin {

namespace {

std::uint64_t pair_key(NodeId a, NodeId b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

Domain domain_from_code(int code) {
  if (code < 0 || code >= kNumSegments) {
    throw std::invalid_argument("unknown domain code " + std::to_string(code));
  }
  return static_cast<Domain>(code);
}

const char* domain_name(Domain d) {
  switch (d) {
    case Domain::Space: return "space";
    case Domain::Air: return "air";
    case Domain::Ground: return "ground";
  }
  return "?";
}

const char* to_string(AllocStatus s) {
  switch (s) {
    case AllocStatus::Ok: return "ok";
    case AllocStatus::InsufficientCpu: return "insufficient cpu";
    case AllocStatus::InsufficientSto: return "insufficient sto";
    case AllocStatus::InsufficientBw: return "insufficient bw";
    case AllocStatus::BrokenPath: return "broken path";
  }
  return "?";
}

ParseError::ParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what),
      line_(line) {}

NodeId SubstrateNetwork::add_node(Domain domain, int cpu_capacity,
                                  int sto_capacity) {
  if (cpu_capacity < 0 || sto_capacity < 0) {
    throw std::invalid_argument("negative node capacity");
  }
  SubstrateNode n;
  n.id = static_cast<NodeId>(nodes_.size());
  n.domain = domain;
  n.cpu_capacity = n.cpu_available = cpu_capacity;
  n.sto_capacity = n.sto_available = sto_capacity;
  nodes_.push_back(n);
  incident_.emplace_back();
  return n.id;
}

void SubstrateNetwork::add_link(NodeId a, NodeId b, int bw_capacity) {
  require_node(a);
  require_node(b);
  if (a == b) throw std::invalid_argument("self-loop link at node " + std::to_string(a));
  if (bw_capacity < 0) throw std::invalid_argument("negative link capacity");
  if (a > b) std::swap(a, b);
  if (link_lookup_.count(pair_key(a, b))) {
    throw std::invalid_argument("duplicate link " + std::to_string(a) + "-" +
                                std::to_string(b));
  }
  SubstrateLink l;
  l.a = a;
  l.b = b;
  l.bw_capacity = l.bw_available = bw_capacity;
  l.inter_domain = nodes_[a].domain != nodes_[b].domain;
  const int idx = static_cast<int>(links_.size());
  links_.push_back(l);
  link_lookup_[pair_key(a, b)] = idx;

  auto insert_sorted = [](std::vector<std::pair<NodeId, int>>& v, NodeId nb, int li) {
    auto it = std::lower_bound(v.begin(), v.end(), nb,
                               [](const auto& p, NodeId n) { return p.first < n; });
    v.insert(it, {nb, li});
  };
  insert_sorted(incident_[a], b, idx);
  insert_sorted(incident_[b], a, idx);
}

const SubstrateNode& SubstrateNetwork::node(NodeId id) const {
  require_node(id);
  return nodes_[id];
}

SubstrateNode& SubstrateNetwork::node(NodeId id) {
  require_node(id);
  return nodes_[id];
}

int SubstrateNetwork::link_index(NodeId a, NodeId b) const {
  auto it = link_lookup_.find(pair_key(a, b));
  return it == link_lookup_.end() ? -1 : it->second;
}

std::vector<NodeId> SubstrateNetwork::neighbors(NodeId id) const {
  require_node(id);
  std::vector<NodeId> out;
  out.reserve(incident_[id].size());
  for (const auto& [nb, li] : incident_[id]) out.push_back(nb);
  return out;
}

const std::vector<std::pair<NodeId, int>>& SubstrateNetwork::incident(NodeId id) const {
  require_node(id);
  return incident_[id];
}

std::vector<NodeId> SubstrateNetwork::nodes_in_domain(Domain d) const {
  std::vector<NodeId> out;
  for (const auto& n : nodes_) {
    if (n.domain == d) out.push_back(n.id);
  }
  return out;
}

AllocStatus SubstrateNetwork::allocate_node(NodeId id, int cpu_amount,
                                            int sto_amount) {
  require_node(id);
  if (cpu_amount < 0 || sto_amount < 0) {
    throw std::invalid_argument("negative allocation amount");
  }
  SubstrateNode& n = nodes_[id];
  if (n.cpu_available < cpu_amount) return AllocStatus::InsufficientCpu;
  if (n.sto_available < sto_amount) return AllocStatus::InsufficientSto;
  n.cpu_available -= cpu_amount;
  n.sto_available -= sto_amount;
  return AllocStatus::Ok;
}

void SubstrateNetwork::release_node(NodeId id, int cpu_amount, int sto_amount) {
  require_node(id);
  if (cpu_amount < 0 || sto_amount < 0) {
    throw std::invalid_argument("negative release amount");
  }
  SubstrateNode& n = nodes_[id];
  if (n.cpu_available + cpu_amount > n.cpu_capacity ||
      n.sto_available + sto_amount > n.sto_capacity) {
    throw std::logic_error("over-release at node " + std::to_string(id));
  }
  n.cpu_available += cpu_amount;
  n.sto_available += sto_amount;
}

AllocStatus SubstrateNetwork::allocate_path(std::span<const NodeId> path,
                                            int bw_amount) {
  if (bw_amount < 0) throw std::invalid_argument("negative bandwidth amount");
  if (path.size() < 2) return AllocStatus::Ok;
  for (NodeId id : path) require_node(id);
  // Structure first, so a broken path never mutates anything.
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (link_index(path[i], path[i + 1]) < 0) return AllocStatus::BrokenPath;
  }
  // Sequential debit handles a link appearing twice in one path; undo on
  // the first infeasible hop restores the exact prior state.
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    SubstrateLink& l = links_[link_index(path[i], path[i + 1])];
    if (l.bw_available < bw_amount) {
      for (std::size_t j = i; j-- > 0;) {
        links_[link_index(path[j], path[j + 1])].bw_available += bw_amount;
      }
      return AllocStatus::InsufficientBw;
    }
    l.bw_available -= bw_amount;
  }
  return AllocStatus::Ok;
}

void SubstrateNetwork::release_path(std::span<const NodeId> path, int bw_amount) {
  if (bw_amount < 0) throw std::invalid_argument("negative bandwidth amount");
  if (path.size() < 2) return;
  for (NodeId id : path) require_node(id);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    if (link_index(path[i], path[i + 1]) < 0) {
      throw std::logic_error("release along a non-existent link");
    }
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    SubstrateLink& l = links_[link_index(path[i], path[i + 1])];
    if (l.bw_available + bw_amount > l.bw_capacity) {
      for (std::size_t j = i; j-- > 0;) {
        links_[link_index(path[j], path[j + 1])].bw_available -= bw_amount;
      }
      throw std::logic_error("over-release on link " + std::to_string(l.a) + "-" +
                             std::to_string(l.b));
    }
    l.bw_available += bw_amount;
  }
}

void SubstrateNetwork::check_invariants() const {
  for (const auto& n : nodes_) {
    if (n.cpu_available < 0 || n.cpu_available > n.cpu_capacity) {
      throw std::logic_error("cpu availability out of bounds at node " +
                             std::to_string(n.id));
    }
    if (n.sto_available < 0 || n.sto_available > n.sto_capacity) {
      throw std::logic_error("sto availability out of bounds at node " +
                             std::to_string(n.id));
    }
  }
  for (const auto& l : links_) {
    if (l.a >= l.b) throw std::logic_error("link endpoints not canonical");
    if (l.bw_available < 0 || l.bw_available > l.bw_capacity) {
      throw std::logic_error("bw availability out of bounds on link " +
                             std::to_string(l.a) + "-" + std::to_string(l.b));
    }
    if (l.inter_domain != (nodes_[l.a].domain != nodes_[l.b].domain)) {
      throw std::logic_error("inter_domain flag disagrees with endpoints");
    }
  }
  for (NodeId id = 0; id < node_count(); ++id) {
    for (const auto& [nb, li] : incident_[id]) {
      const SubstrateLink& l = links_[li];
      if ((l.a != id && l.b != id) || (l.a != nb && l.b != nb)) {
        throw std::logic_error("adjacency disagrees with links");
      }
      const auto& back = incident_[nb];
      bool found = false;
      for (const auto& [nb2, li2] : back) {
        if (nb2 == id && li2 == li) { found = true; break; }
      }
      if (!found) throw std::logic_error("adjacency not symmetric");
    }
  }
}

bool SubstrateNetwork::operator==(const SubstrateNetwork& other) const {
  if (nodes_.size() != other.nodes_.size() || links_.size() != other.links_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& a = nodes_[i];
    const auto& b = other.nodes_[i];
    if (a.id != b.id || a.domain != b.domain ||
        a.cpu_capacity != b.cpu_capacity || a.cpu_available != b.cpu_available ||
        a.sto_capacity != b.sto_capacity || a.sto_available != b.sto_available) {
      return false;
    }
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const auto& a = links_[i];
    const auto& b = other.links_[i];
    if (a.a != b.a || a.b != b.b || a.bw_capacity != b.bw_capacity ||
        a.bw_available != b.bw_available) {
      return false;
    }
  }
  return true;
}

void SubstrateNetwork::require_node(NodeId id) const {
  if (id < 0 || id >= node_count()) {
    throw std::out_of_range("unknown node id " + std::to_string(id));
  }
}

SubstrateNetwork load_substrate(std::istream& in) {
  detail::LineReader r{in};
  std::string line;

  if (!r.next(line)) throw ParseError(r.eof_line(), "empty substrate file");
  std::istringstream hdr(line);
  std::string tag;
  int node_count = 0;
  if (!(hdr >> tag >> node_count) || tag != "NODES" || node_count < 0) {
    throw ParseError(r.line_no, "expected 'NODES <count>'");
  }

  SubstrateNetwork net;
  for (int i = 0; i < node_count; ++i) {
    if (!r.next(line)) throw ParseError(r.eof_line(), "unexpected end of node list");
    std::istringstream ls(line);
    int id = -1, code = -1, cpu = -1, sto = -1;
    if (!(ls >> id >> code >> cpu >> sto)) {
      throw ParseError(r.line_no, "malformed node line '" + line + "'");
    }
    if (id != i) {
      throw ParseError(r.line_no, id < i ? "duplicate node id " + std::to_string(id)
                                         : "node ids must be consecutive from 0");
    }
    if (code < 0 || code >= kNumSegments) {
      throw ParseError(r.line_no, "unknown domain code " + std::to_string(code));
    }
    if (cpu < 0 || sto < 0) throw ParseError(r.line_no, "negative capacity");
    net.add_node(static_cast<Domain>(code), cpu, sto);
  }

  if (!r.next(line)) throw ParseError(r.eof_line(), "missing LINKS section");
  std::istringstream lhdr(line);
  int link_count = 0;
  if (!(lhdr >> tag >> link_count) || tag != "LINKS" || link_count < 0) {
    throw ParseError(r.line_no, "expected 'LINKS <count>'");
  }
  for (int i = 0; i < link_count; ++i) {
    if (!r.next(line)) throw ParseError(r.eof_line(), "unexpected end of link list");
    std::istringstream ls(line);
    int a = -1, b = -1, bw = -1;
    if (!(ls >> a >> b >> bw)) {
      throw ParseError(r.line_no, "malformed link line '" + line + "'");
    }
    if (a < 0 || a >= node_count || b < 0 || b >= node_count) {
      throw ParseError(r.line_no, "link references unknown node");
    }
    try {
      net.add_link(a, b, bw);
    } catch (const std::invalid_argument& e) {
      throw ParseError(r.line_no, e.what());
    }
  }
  if (r.next(line)) throw ParseError(r.line_no, "trailing content '" + line + "'");
  return net;
}

SubstrateNetwork load_substrate_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open substrate file " + path);
  return load_substrate(f);
}

void save_substrate(const SubstrateNetwork& net, std::ostream& out,
                    std::string_view provenance) {
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "NODES " << net.node_count() << "\n";
  for (const auto& n : net.nodes()) {
    out << n.id << " " << static_cast<int>(n.domain) << " " << n.cpu_capacity
        << " " << n.sto_capacity << "\n";
  }
  std::vector<SubstrateLink> sorted = net.links();
  std::sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) {
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  out << "LINKS " << sorted.size() << "\n";
  for (const auto& l : sorted) {
    out << l.a << " " << l.b << " " << l.bw_capacity << "\n";
  }
}

void save_substrate_file(const SubstrateNetwork& net, const std::string& path,
                         std::string_view provenance) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  save_substrate(net, f, provenance);
}

}  // namespace sagin
