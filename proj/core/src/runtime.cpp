#include "sagin/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "sagin/rng.hpp"
#include "text_io.hpp"

namespace sagin {

std::vector<NodeId> DomainPartition::nodes_of(int domain_id) const {
  std::vector<NodeId> out;
  for (NodeId id = 0; id < static_cast<NodeId>(domain_of_node.size()); ++id) {
    if (domain_of_node[id] == domain_id) out.push_back(id);
  }
  return out;
}

DomainPartition DomainPartition::per_segment(const SubstrateNetwork& net) {
  DomainPartition p;
  p.domain_of_node.resize(net.node_count());
  bool present[kNumSegments] = {};
  for (const auto& n : net.nodes()) {
    p.domain_of_node[n.id] = static_cast<int>(n.domain);
    present[static_cast<int>(n.domain)] = true;
  }
  for (int d = 0; d < kNumSegments; ++d) {
    if (present[d]) {
      p.domain_ids.push_back(d);
      p.segment_of_domain[d] = static_cast<Domain>(d);
    }
  }
  return p;
}

DomainPartition DomainPartition::from_stream(std::istream& in,
                                             const SubstrateNetwork& net) {
  detail::LineReader r{in};
  std::string line;
  DomainPartition p;
  p.domain_of_node.assign(net.node_count(), -1);
  while (r.next(line)) {
    std::istringstream ls(line);
    int node = -1, domain = -1;
    if (!(ls >> node >> domain)) {
      throw ParseError(r.line_no, "expected '<node_id> <edge_domain_id>'");
    }
    if (node < 0 || node >= net.node_count()) {
      throw ParseError(r.line_no, "unknown substrate node " + std::to_string(node));
    }
    if (domain < 0) throw ParseError(r.line_no, "negative edge domain id");
    if (p.domain_of_node[node] != -1) {
      throw ParseError(r.line_no, "node " + std::to_string(node) + " assigned twice");
    }
    p.domain_of_node[node] = domain;
  }
  for (NodeId id = 0; id < net.node_count(); ++id) {
    if (p.domain_of_node[id] == -1) {
      throw std::runtime_error("node " + std::to_string(id) +
                               " missing from the domain assignment");
    }
    const int d = p.domain_of_node[id];
    const Domain seg = net.node(id).domain;
    auto [it, inserted] = p.segment_of_domain.emplace(d, seg);
    if (!inserted && it->second != seg) {
      throw std::runtime_error("edge domain " + std::to_string(d) +
                               " spans more than one segment");
    }
  }
  for (const auto& [d, seg] : p.segment_of_domain) p.domain_ids.push_back(d);
  return p;
}

DomainPartition DomainPartition::from_file(const std::string& path,
                                           const SubstrateNetwork& net) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open domain assignment file " + path);
  return from_stream(f, net);
}

std::map<int, DomainAgent> make_agents(const SubstrateNetwork& net,
                                       const DomainPartition& partition,
                                       const std::map<int, PolicyParameters>& params) {
  std::map<int, DomainAgent> agents;
  for (int d : partition.domain_ids) {
    auto it = params.find(d);
    if (it == params.end()) {
      throw std::invalid_argument("no parameters for edge domain " + std::to_string(d));
    }
    DomainAgent a;
    a.domain_id = d;
    a.segment = partition.segment_of_domain.at(d);
    a.scope = make_scope(net, partition.nodes_of(d));
    a.params = it->second;
    a.table.domain_id = d;
    agents.emplace(d, std::move(a));
  }
  return agents;
}

void CentralRegistry::sync(const DomainAgent& agent, double time) {
  RegistryEntry& e = servers_[static_cast<int>(agent.segment)].own[agent.domain_id];
  e.domain_id = agent.domain_id;
  e.segment = agent.segment;
  e.params = agent.params;
  e.table = agent.table.snapshot;
  e.version += 1;
  e.timestamp = time;
}

void CentralRegistry::exchange(Domain from, Domain to, double time) {
  const SegmentServer& src = servers_[static_cast<int>(from)];
  SegmentServer& dst = servers_[static_cast<int>(to)];
  for (const auto& [d, entry] : src.own) {
    RegistryEntry copy = entry;
    copy.timestamp = time;
    dst.mirrored[d] = std::move(copy);
  }
  ++exchange_count_;
}

const RegistryEntry* CentralRegistry::own_entry(Domain segment, int domain_id) const {
  const auto& own = servers_[static_cast<int>(segment)].own;
  auto it = own.find(domain_id);
  return it == own.end() ? nullptr : &it->second;
}

const RegistryEntry* CentralRegistry::mirrored_entry(Domain segment,
                                                     int domain_id) const {
  const auto& mirrored = servers_[static_cast<int>(segment)].mirrored;
  auto it = mirrored.find(domain_id);
  return it == mirrored.end() ? nullptr : &it->second;
}

long long CentralRegistry::version(Domain segment, int domain_id) const {
  const RegistryEntry* e = own_entry(segment, domain_id);
  return e ? e->version : 0;
}

namespace {

void dump_entry(std::ostream& out, const RegistryEntry& e) {
  char buf[256];
  out << "DOMAIN " << e.domain_id << " SEGMENT " << static_cast<int>(e.segment)
      << " VERSION " << e.version << " TIME " << detail::format_time(e.timestamp)
      << "\n";
  save_params(e.params, out);
  out << "FM " << e.table.row_count() << "\n";
  for (int i = 0; i < e.table.row_count(); ++i) {
    const FeatureVector& v = e.table.rows[i];
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g\n",
                  e.table.node_order[i], v.cpu, v.sto, v.bw_sum, v.avg_dist);
    out << buf;
  }
}

}  // namespace

void CentralRegistry::dump(std::ostream& out) const {
  for (int s = 0; s < kNumSegments; ++s) {
    const SegmentServer& server = servers_[s];
    if (server.own.empty() && server.mirrored.empty()) continue;
    out << "SERVER " << s << "\n";
    for (const auto& [d, e] : server.own) dump_entry(out, e);
    for (const auto& [d, e] : server.mirrored) {
      out << "MIRROR\n";
      dump_entry(out, e);
    }
  }
}

JointState capture_joint_state(const SubstrateNetwork& net,
                               const DomainPartition& partition, double time) {
  JointState js;
  js.time = time;
  for (int d : partition.domain_ids) {
    DomainState ds;
    ds.domain_id = d;
    ds.segment = partition.segment_of_domain.at(d);
    ds.nodes = partition.nodes_of(d);
    for (NodeId id : ds.nodes) {
      ds.cpu_available.push_back(net.node(id).cpu_available);
      ds.sto_available.push_back(net.node(id).sto_available);
    }
    for (const auto& l : net.links()) {
      if (partition.domain_of_node[l.a] == d && partition.domain_of_node[l.b] == d) {
        ds.links.push_back({l.a, l.b, l.bw_available});
      }
    }
    js.domains.push_back(std::move(ds));
  }
  return js;
}

DdrlSelector::DdrlSelector(std::map<int, DomainAgent>& agents,
                           const DomainPartition& partition, SelectionMode mode,
                           std::mt19937_64* rng, bool record_gradients,
                           CentralRegistry* registry)
    : agents_(agents),
      partition_(partition),
      mode_(mode),
      rng_(rng),
      record_gradients_(record_gradients),
      registry_(registry) {
  if (mode_ == SelectionMode::Sample && rng_ == nullptr) {
    throw std::invalid_argument("sampling selection needs a random source");
  }
}

NodeId DdrlSelector::choose(const SubstrateNetwork& net,
                            const FunctionRequest& request, const RequestNode& node,
                            const std::vector<NodeId>& feasible) {
  std::map<int, std::vector<NodeId>> by_domain;
  for (NodeId id : feasible) {
    by_domain[partition_.domain_of_node.at(id)].push_back(id);
  }

  struct Cand {
    int domain_id = -1;
    DomainAgent* agent = nullptr;
    NodeDistribution dist;
    double weight = 0.0;
    FeatureMatrix fm;
    std::vector<char> mask;
  };
  std::vector<Cand> cands;
  for (auto& [d, hosts] : by_domain) {
    DomainAgent& agent = agents_.at(d);
    FeatureMatrix raw = feature_matrix(net, agent.scope, false);
    agent.table.snapshot = raw;  // tables refresh on every extraction
    agent.table.version += 1;
    agent.table.timestamp = time_;
    if (registry_) registry_->sync(agent, time_);

    Cand c;
    c.domain_id = d;
    c.agent = &agent;
    c.fm = normalize_columns(std::move(raw));
    c.mask.assign(c.fm.rows.size(), 0);
    for (NodeId h : hosts) c.mask[agent.scope.row_of(h)] = 1;
    auto dist = forward(agent.params, c.fm, c.mask);
    if (!dist) continue;  // unreachable: hosts is non-empty
    c.dist = std::move(*dist);
    c.weight = static_cast<double>(hosts.size()) / static_cast<double>(feasible.size());
    cands.push_back(std::move(c));
  }
  if (cands.empty()) return -1;

  Cand* picked = nullptr;
  NodeId chosen = -1;
  if (mode_ == SelectionMode::Sample) {
    std::size_t i = 0;
    if (cands.size() > 1) {
      const double u = draw_unit(*rng_);
      double acc = cands[0].weight;
      while (i + 1 < cands.size() && u >= acc) {
        ++i;
        acc += cands[i].weight;
      }
    }
    picked = &cands[i];
    chosen = sample_node(picked->dist, *rng_);
  } else {
    double best = -1.0;
    for (auto& c : cands) {
      for (std::size_t i = 0; i < c.dist.node_order.size(); ++i) {
        const double p = c.weight * c.dist.probabilities[i];
        const NodeId id = c.dist.node_order[i];
        if (p > best || (p == best && id < chosen)) {
          best = p;
          chosen = id;
          picked = &c;
        }
      }
    }
  }

  if (record_gradients_ && picked) {
    pending_.emplace_back(
        picked->domain_id,
        log_prob_gradient(picked->agent->params, picked->fm, picked->mask, chosen));
  }
  return chosen;
}

std::vector<std::pair<int, LogProbGradient>> DdrlSelector::take_pending() {
  return std::exchange(pending_, {});
}

Orchestrator::Orchestrator(SubstrateNetwork substrate,
                           const std::vector<FunctionRequest>& requests)
    : net_(std::move(substrate)) {
  for (const auto& r : requests) {
    if (!requests_.emplace(r.id, r).second) {
      throw std::invalid_argument("duplicate request id " + std::to_string(r.id));
    }
  }
}

std::optional<bool> Orchestrator::step(const WorkloadEvent& event,
                                       NodeSelector& selector,
                                       EmbedCounters* counters) {
  if (event.kind == EventKind::Arrival) {
    auto it = requests_.find(event.request_id);
    if (it == requests_.end()) {
      throw std::invalid_argument("arrival of unknown request " +
                                  std::to_string(event.request_id));
    }
    if (!arrived_.insert(event.request_id).second) {
      throw std::invalid_argument("request " + std::to_string(event.request_id) +
                                  " arrived twice");
    }
    auto outcome = embed_request(net_, it->second, selector, counters);
    const bool ok = outcome.accepted();
    ledger_.observe(event.time, ok, ok ? outcome.record->revenue : 0,
                    ok ? outcome.record->cost : 0);
    if (ok) active_.emplace(event.request_id, std::move(*outcome.record));
    return ok;
  }

  auto it = active_.find(event.request_id);
  if (it != active_.end()) {
    release_request(net_, it->second);
    active_.erase(it);
    return std::nullopt;
  }
  if (!arrived_.count(event.request_id)) {
    throw std::invalid_argument("departure of unknown request " +
                                std::to_string(event.request_id));
  }
  return std::nullopt;  // rejected on arrival: nothing to release
}

TrainResult train(const SubstrateNetwork& substrate,
                  const std::vector<FunctionRequest>& workload,
                  const DomainPartition& partition, const TrainConfig& config,
                  CentralRegistry* registry) {
  if (config.epochs < 0) throw std::invalid_argument("negative epoch count");
  if (config.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (config.learning_rate <= 0.0) {
    throw std::invalid_argument("learning rate must be positive");
  }

  std::mt19937_64 master(config.seed);
  std::map<int, PolicyParameters> init;
  for (int d : partition.domain_ids) {
    init[d] = init_params(master(), config.learning_rate);
  }
  std::mt19937_64 act_rng(master());

  auto agents = make_agents(substrate, partition, init);
  const auto events = event_stream(workload);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Orchestrator orch(substrate, workload);
    DdrlSelector selector(agents, partition, SelectionMode::Sample, &act_rng, true,
                          registry);
    long long updates = 0;
    long long attempts = 0;

    auto reward_now = [&]() {
      const MetricsLedger& led = orch.ledger();
      if (!config.normalize_reward) return led.objective();
      const double mean_rev =
          led.accepted_count() > 0
              ? static_cast<double>(led.cumulative_revenue()) / led.accepted_count()
              : 1.0;
      return led.ar() / mean_rev + led.rc() + led.acr();
    };

    auto flush = [&]() {
      const double reward = reward_now();
      for (auto& [d, agent] : agents) {
        if (agent.accumulator.empty()) continue;
        apply_update(agent.params, agent.accumulator, reward);
        ++updates;
        if (registry) registry->sync(agent, orch.ledger().current_time());
      }
    };

    for (const auto& ev : events) {
      selector.set_time(ev.time);
      orch.step(ev, selector);
      if (ev.kind != EventKind::Arrival) continue;
      for (auto& [d, grad] : selector.take_pending()) {
        accumulate(agents.at(d).accumulator, grad);
      }
      ++attempts;
      if (attempts % config.batch_size == 0) flush();
    }
    flush();  // leftover partial batch at epoch end

    EpochStats stats;
    stats.epoch = epoch;
    const auto& series = orch.ledger().series();
    for (const auto& s : series) {
      stats.mean_ar += s.ar;
      stats.mean_rc += s.rc;
      stats.mean_acr += s.acr;
      stats.mean_objective += s.objective;
    }
    if (!series.empty()) {
      const double n = static_cast<double>(series.size());
      stats.mean_ar /= n;
      stats.mean_rc /= n;
      stats.mean_acr /= n;
      stats.mean_objective /= n;
      stats.final_objective = series.back().objective;
    }
    stats.accepted = orch.ledger().accepted_count();
    stats.arrived = orch.ledger().arrived_count();
    stats.updates = updates;
    result.total_updates += updates;
    result.epochs.push_back(stats);
  }

  for (const auto& [d, agent] : agents) result.params[d] = agent.params;
  return result;
}

Algo algo_from_name(std::string_view name) {
  if (name == "ddrl") return Algo::Ddrl;
  if (name == "nrmvne") return Algo::Nrmvne;
  if (name == "random") return Algo::Random;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

const char* to_string(Algo a) {
  switch (a) {
    case Algo::Ddrl: return "ddrl";
    case Algo::Nrmvne: return "nrmvne";
    case Algo::Random: return "random";
  }
  return "?";
}

EvalResult evaluate(const SubstrateNetwork& substrate,
                    const std::vector<FunctionRequest>& workload, Algo algo,
                    const std::map<int, PolicyParameters>* params,
                    const DomainPartition& partition, std::uint64_t seed) {
  Orchestrator orch(substrate, workload);
  const auto events = event_stream(workload);

  std::map<int, DomainAgent> agents;
  std::unique_ptr<NodeSelector> selector;
  DdrlSelector* ddrl = nullptr;
  switch (algo) {
    case Algo::Ddrl: {
      if (!params) {
        throw std::invalid_argument("ddrl evaluation needs trained parameters");
      }
      agents = make_agents(substrate, partition, *params);
      auto sel = std::make_unique<DdrlSelector>(agents, partition,
                                                SelectionMode::Greedy, nullptr,
                                                false, nullptr);
      ddrl = sel.get();
      selector = std::move(sel);
      break;
    }
    case Algo::Nrmvne:
      selector = std::make_unique<NrmvneSelector>();
      break;
    case Algo::Random:
      selector = std::make_unique<RandomSelector>(seed);
      break;
  }

  EvalResult result;
  for (const auto& ev : events) {
    if (ddrl) ddrl->set_time(ev.time);
    orch.step(ev, *selector, &result.counters);
  }
  result.ledger = orch.ledger();
  result.summary.final_ar = result.ledger.ar();
  result.summary.final_rc = result.ledger.rc();
  result.summary.final_acr = result.ledger.acr();
  result.summary.final_objective = result.ledger.objective();
  result.summary.accepted = result.ledger.accepted_count();
  result.summary.arrived = result.ledger.arrived_count();
  return result;
}

void save_model(const std::map<int, PolicyParameters>& params, std::ostream& out,
                std::string_view provenance) {
  if (!provenance.empty()) out << "# " << provenance << "\n";
  for (const auto& [d, p] : params) {
    out << "AGENT " << d << "\n";
    save_params(p, out);
  }
}

void save_model_file(const std::map<int, PolicyParameters>& params,
                     const std::string& path, std::string_view provenance) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  save_model(params, f, provenance);
}

std::map<int, PolicyParameters> load_model(std::istream& in) {
  detail::LineReader r{in};
  std::string line;
  std::map<int, PolicyParameters> out;
  while (r.next(line)) {
    std::istringstream hs(line);
    std::string tag;
    int d = -1;
    if (!(hs >> tag >> d) || tag != "AGENT" || d < 0) {
      throw ParseError(r.line_no, "expected 'AGENT <domain_id>'");
    }
    if (out.count(d)) throw ParseError(r.line_no, "duplicate agent section");
    std::string block;
    for (int i = 0; i < 3; ++i) {
      if (!r.next(line)) throw ParseError(r.eof_line(), "truncated agent section");
      block += line;
      block += '\n';
    }
    std::istringstream bs(block);
    try {
      out[d] = load_params(bs);
    } catch (const ParseError& e) {
      throw ParseError(r.line_no, "agent " + std::to_string(d) + ": " + e.what());
    }
  }
  if (out.empty()) throw std::runtime_error("model file holds no agent sections");
  return out;
}

std::map<int, PolicyParameters> load_model_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open model file " + path);
  return load_model(f);
}

void write_training_csv(const TrainResult& result, std::ostream& out) {
  out << "epoch,mean_ar,mean_rc,mean_acr,mean_objective,final_objective,"
         "accepted,arrived,updates\n";
  char buf[320];
  for (const auto& e : result.epochs) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%lld,%lld,%lld\n",
                  e.epoch, e.mean_ar, e.mean_rc, e.mean_acr, e.mean_objective,
                  e.final_objective, e.accepted, e.arrived, e.updates);
    out << buf;
  }
}

}  // namespace sagin
