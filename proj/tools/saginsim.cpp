// Command-line front end: substrate/workload generation, policy training,
// evaluation, algorithm comparison, and a full constraint audit.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "sagin/embedding.hpp"
#include "sagin/metrics.hpp"
#include "sagin/runtime.hpp"
#include "sagin/workload.hpp"

namespace {

// Defaulted output names land in SAGINSIM_OUTDIR when it is set;
// explicitly given paths are used verbatim.
std::string out_path(const CLI::Option* opt, const std::string& value) {
  if (opt->count() > 0) return value;
  const char* dir = std::getenv("SAGINSIM_OUTDIR");
  if (!dir || !*dir) return value;
  return (std::filesystem::path(dir) / value).string();
}

sagin::DomainPartition make_partition(const sagin::SubstrateNetwork& net,
                                      const std::string& assign_path) {
  if (assign_path.empty()) return sagin::DomainPartition::per_segment(net);
  return sagin::DomainPartition::from_file(assign_path, net);
}

void write_series_csv(const sagin::MetricsLedger& ledger, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  ledger.write_csv(f);
}

void print_summary(const char* algo, const sagin::EvalSummary& s) {
  std::printf("%-8s ar=%.6f rc=%.6f acr=%.6f objective=%.6f accepted=%lld arrived=%lld\n",
              algo, s.final_ar, s.final_rc, s.final_acr, s.final_objective, s.accepted,
              s.arrived);
}

struct GenSubstrateArgs {
  int ground = 60;
  int air = 30;
  int space = 10;
  double intra_p = 0.5;
  int inter_links = 2;
  std::uint64_t seed = 1;
  std::string output = "substrate.txt";
};

int run_gen_substrate(const GenSubstrateArgs& a) {
  sagin::SubstrateGenConfig cfg;
  cfg.ground_nodes = a.ground;
  cfg.air_nodes = a.air;
  cfg.space_nodes = a.space;
  cfg.intra_link_prob = a.intra_p;
  cfg.inter_links_per_node = a.inter_links;
  cfg.seed = a.seed;
  const auto net = sagin::generate_substrate(cfg);

  std::ostringstream prov;
  prov << "gen-substrate seed=" << a.seed << " ground=" << a.ground
       << " air=" << a.air << " space=" << a.space << " intra-p=" << a.intra_p
       << " inter-links=" << a.inter_links;
  sagin::save_substrate_file(net, a.output, prov.str());
  std::printf("wrote %s: %d nodes, %d links\n", a.output.c_str(), net.node_count(),
              net.link_count());
  return 0;
}

struct GenWorkloadArgs {
  int count = 1000;
  int sto_max = 50;
  double link_p = 0.5;
  double arrival_rate = 0.04;
  double mean_lifetime = 500.0;
  std::uint64_t seed = 1;
  std::string output = "workload.txt";
};

int run_gen_workload(const GenWorkloadArgs& a) {
  sagin::WorkloadGenConfig cfg;
  cfg.count = a.count;
  cfg.sto_demand = {1, a.sto_max};
  cfg.link_prob = a.link_p;
  cfg.arrival_rate = a.arrival_rate;
  cfg.mean_lifetime = a.mean_lifetime;
  cfg.seed = a.seed;
  const auto requests = sagin::generate_workload(cfg);

  std::ostringstream prov;
  prov << "gen-workload seed=" << a.seed << " count=" << a.count
       << " sto-max=" << a.sto_max << " link-p=" << a.link_p
       << " arrival-rate=" << a.arrival_rate << " mean-lifetime=" << a.mean_lifetime;
  sagin::save_workload_file(requests, a.output, prov.str());
  std::printf("wrote %s: %d requests\n", a.output.c_str(),
              static_cast<int>(requests.size()));
  return 0;
}

struct TrainArgs {
  std::string substrate;
  std::string workload;
  std::string assign;
  double lr = 0.005;
  int epochs = 100;
  int batch = 100;
  std::uint64_t seed = 1;
  bool normalize_reward = false;
  std::string model = "model.txt";
  std::string csv = "training.csv";
};

int run_train(const TrainArgs& a) {
  const auto net = sagin::load_substrate_file(a.substrate);
  const auto requests = sagin::parse_workload_file(a.workload);
  const auto partition = make_partition(net, a.assign);

  sagin::TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.normalize_reward = a.normalize_reward;
  const auto result = sagin::train(net, requests, partition, cfg);

  std::ostringstream prov;
  prov << "train seed=" << a.seed << " lr=" << a.lr << " epochs=" << a.epochs
       << " batch=" << a.batch << " normalize-reward=" << a.normalize_reward;
  sagin::save_model_file(result.params, a.model, prov.str());
  {
    std::ofstream f(a.csv);
    if (!f) throw std::runtime_error("cannot open output file " + a.csv);
    sagin::write_training_csv(result, f);
  }
  const double final_obj =
      result.epochs.empty() ? 0.0 : result.epochs.back().mean_objective;
  std::printf("wrote %s and %s: %d epochs, %lld updates, final mean objective %.6f\n",
              a.model.c_str(), a.csv.c_str(), a.epochs, result.total_updates,
              final_obj);
  return 0;
}

struct EvalArgs {
  std::string substrate;
  std::string workload;
  std::string assign;
  std::string algo;
  std::string model;
  std::uint64_t seed = 1;
  std::string csv = "eval.csv";
};

int run_eval(const EvalArgs& a, bool write_csv) {
  const auto net = sagin::load_substrate_file(a.substrate);
  const auto requests = sagin::parse_workload_file(a.workload);
  const auto partition = make_partition(net, a.assign);
  const auto algo = sagin::algo_from_name(a.algo);

  std::map<int, sagin::PolicyParameters> params;
  if (algo == sagin::Algo::Ddrl) params = sagin::load_model_file(a.model);
  const auto result = sagin::evaluate(
      net, requests, algo, algo == sagin::Algo::Ddrl ? &params : nullptr, partition,
      a.seed);
  if (write_csv) write_series_csv(result.ledger, a.csv);
  print_summary(a.algo.c_str(), result.summary);
  return 0;
}

struct CompareArgs {
  std::string substrate;
  std::string workload;
  std::string assign;
  std::string model;
  std::uint64_t seed = 1;
  std::string csv;
};

int run_compare(const CompareArgs& a) {
  const auto net = sagin::load_substrate_file(a.substrate);
  const auto requests = sagin::parse_workload_file(a.workload);
  const auto partition = make_partition(net, a.assign);
  const auto params = sagin::load_model_file(a.model);

  const sagin::Algo algos[] = {sagin::Algo::Ddrl, sagin::Algo::Nrmvne,
                               sagin::Algo::Random};
  std::ostringstream csv;
  csv << "algo,ar,rc,acr,objective,accepted,arrived\n";
  for (sagin::Algo algo : algos) {
    const auto result = sagin::evaluate(
        net, requests, algo, algo == sagin::Algo::Ddrl ? &params : nullptr,
        partition, a.seed);
    print_summary(sagin::to_string(algo), result.summary);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%lld,%lld\n",
                  sagin::to_string(algo), result.summary.final_ar,
                  result.summary.final_rc, result.summary.final_acr,
                  result.summary.final_objective, result.summary.accepted,
                  result.summary.arrived);
    csv << buf;
  }
  if (!a.csv.empty()) {
    std::ofstream f(a.csv);
    if (!f) throw std::runtime_error("cannot open output file " + a.csv);
    f << csv.str();
  }
  return 0;
}

struct AuditArgs {
  std::string substrate;
  std::string workload;
  std::string assign;
  std::string algo;
  std::string model;
  std::uint64_t seed = 1;
};

int run_audit(const AuditArgs& a) {
  sagin::SubstrateNetwork net = sagin::load_substrate_file(a.substrate);
  const auto requests = sagin::parse_workload_file(a.workload);
  const auto partition = make_partition(net, a.assign);
  const auto algo = sagin::algo_from_name(a.algo);

  std::map<int, sagin::FunctionRequest> by_id;
  for (const auto& r : requests) by_id.emplace(r.id, r);
  const auto events = sagin::event_stream(requests);

  std::map<int, sagin::PolicyParameters> params;
  std::map<int, sagin::DomainAgent> agents;
  std::unique_ptr<sagin::NodeSelector> selector;
  sagin::DdrlSelector* ddrl = nullptr;
  switch (algo) {
    case sagin::Algo::Ddrl: {
      params = sagin::load_model_file(a.model);
      agents = sagin::make_agents(net, partition, params);
      auto sel = std::make_unique<sagin::DdrlSelector>(
          agents, partition, sagin::SelectionMode::Greedy, nullptr, false, nullptr);
      ddrl = sel.get();
      selector = std::move(sel);
      break;
    }
    case sagin::Algo::Nrmvne:
      selector = std::make_unique<sagin::NrmvneSelector>();
      break;
    case sagin::Algo::Random:
      selector = std::make_unique<sagin::RandomSelector>(a.seed);
      break;
  }

  long long violations = 0;
  auto report = [&](int request_id, const std::string& what) {
    std::printf("request %d: %s\n", request_id, what.c_str());
    ++violations;
  };

  std::map<int, sagin::EmbeddingRecord> active;
  for (const auto& ev : events) {
    if (ev.kind == sagin::EventKind::Arrival) {
      const auto& req = by_id.at(ev.request_id);
      const sagin::SubstrateNetwork pre = net;
      if (ddrl) ddrl->set_time(ev.time);
      const auto outcome = sagin::embed_request(net, req, *selector);
      if (outcome.accepted()) {
        for (const auto& v : sagin::validate_embedding(pre, req, *outcome.record)) {
          report(v.request_id, v.what);
        }
        active.emplace(ev.request_id, *outcome.record);
      } else if (!(net == pre)) {
        report(ev.request_id, "rejection changed substrate availabilities");
      }
      net.check_invariants();
    } else {
      auto it = active.find(ev.request_id);
      if (it != active.end()) {
        sagin::release_request(net, it->second);
        active.erase(it);
      }
    }
  }

  if (!active.empty()) {
    report(active.begin()->first, "request never departed within the event stream");
  }
  for (const auto& n : net.nodes()) {
    if (n.cpu_available != n.cpu_capacity || n.sto_available != n.sto_capacity) {
      report(-1, "node " + std::to_string(n.id) + " not restored to full capacity");
    }
  }
  for (const auto& l : net.links()) {
    if (l.bw_available != l.bw_capacity) {
      report(-1, "link " + std::to_string(l.a) + "-" + std::to_string(l.b) +
                     " not restored to full capacity");
    }
  }

  std::printf("%lld violations\n", violations);
  return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"storage-aware network resource allocation simulator"};
  app.require_subcommand(1);

  GenSubstrateArgs gs;
  auto* cmd_gs = app.add_subcommand("gen-substrate",
                                    "generate a three-segment substrate network");
  cmd_gs->add_option("--ground", gs.ground, "ground node count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gs->add_option("--air", gs.air, "air node count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gs->add_option("--space", gs.space, "space node count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gs->add_option("--intra-p", gs.intra_p, "intra-domain link probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd_gs->add_option("--inter-links", gs.inter_links,
                     "inter-domain links per space/air node")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gs->add_option("--seed", gs.seed, "generator seed")->capture_default_str();
  auto* gs_out =
      cmd_gs->add_option("-o,--output", gs.output, "output file")->capture_default_str();

  GenWorkloadArgs gw;
  auto* cmd_gw =
      app.add_subcommand("gen-workload", "generate a function request workload");
  cmd_gw->add_option("--count", gw.count, "number of requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gw->add_option("--sto-max", gw.sto_max, "upper bound of storage demands")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gw->add_option("--link-p", gw.link_p, "request link probability")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd_gw->add_option("--arrival-rate", gw.arrival_rate, "arrivals per time unit")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gw->add_option("--mean-lifetime", gw.mean_lifetime, "mean request lifetime")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_gw->add_option("--seed", gw.seed, "generator seed")->capture_default_str();
  auto* gw_out =
      cmd_gw->add_option("-o,--output", gw.output, "output file")->capture_default_str();

  TrainArgs tr;
  auto* cmd_tr = app.add_subcommand("train", "train the per-domain policies");
  cmd_tr->add_option("--substrate", tr.substrate, "substrate file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_tr->add_option("--workload", tr.workload, "workload file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_tr->add_option("--assign", tr.assign, "node-to-domain assignment file")
      ->check(CLI::ExistingFile);
  cmd_tr->add_option("--lr", tr.lr, "learning rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--epochs", tr.epochs, "training epochs")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd_tr->add_option("--batch", tr.batch, "requests per gradient update")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd_tr->add_option("--seed", tr.seed, "training seed")->capture_default_str();
  cmd_tr->add_flag("--normalize-reward", tr.normalize_reward,
                   "scale the revenue term of the reward by the mean revenue");
  auto* tr_model =
      cmd_tr->add_option("-o,--output", tr.model, "model file")->capture_default_str();
  auto* tr_csv = cmd_tr->add_option("--csv", tr.csv, "per-epoch training curve")
                     ->capture_default_str();

  EvalArgs ev;
  auto* cmd_ev = app.add_subcommand("eval", "evaluate one algorithm");
  cmd_ev->add_option("--substrate", ev.substrate, "substrate file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_ev->add_option("--workload", ev.workload, "workload file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_ev->add_option("--assign", ev.assign, "node-to-domain assignment file")
      ->check(CLI::ExistingFile);
  cmd_ev->add_option("--algo", ev.algo, "ddrl, nrmvne, or random")
      ->required()
      ->check(CLI::IsMember({"ddrl", "nrmvne", "random"}));
  cmd_ev->add_option("--model", ev.model, "trained model (required for ddrl)")
      ->check(CLI::ExistingFile);
  cmd_ev->add_option("--seed", ev.seed, "selector seed")->capture_default_str();
  auto* ev_csv =
      cmd_ev->add_option("--csv", ev.csv, "metrics series output")->capture_default_str();

  CompareArgs cp;
  auto* cmd_cp =
      app.add_subcommand("compare", "run all algorithms on identical inputs");
  cmd_cp->add_option("--substrate", cp.substrate, "substrate file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_cp->add_option("--workload", cp.workload, "workload file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_cp->add_option("--assign", cp.assign, "node-to-domain assignment file")
      ->check(CLI::ExistingFile);
  cmd_cp->add_option("--model", cp.model, "trained model for the policy run")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_cp->add_option("--seed", cp.seed, "selector seed")->capture_default_str();
  cmd_cp->add_option("--csv", cp.csv, "summary table output");

  AuditArgs au;
  auto* cmd_au = app.add_subcommand(
      "audit", "replay an evaluation and re-check every constraint");
  cmd_au->add_option("--substrate", au.substrate, "substrate file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_au->add_option("--workload", au.workload, "workload file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd_au->add_option("--assign", au.assign, "node-to-domain assignment file")
      ->check(CLI::ExistingFile);
  cmd_au->add_option("--algo", au.algo, "ddrl, nrmvne, or random")
      ->required()
      ->check(CLI::IsMember({"ddrl", "nrmvne", "random"}));
  cmd_au->add_option("--model", au.model, "trained model (required for ddrl)")
      ->check(CLI::ExistingFile);
  cmd_au->add_option("--seed", au.seed, "selector seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_gs->parsed()) {
      gs.output = out_path(gs_out, gs.output);
      return run_gen_substrate(gs);
    }
    if (cmd_gw->parsed()) {
      gw.output = out_path(gw_out, gw.output);
      return run_gen_workload(gw);
    }
    if (cmd_tr->parsed()) {
      tr.model = out_path(tr_model, tr.model);
      tr.csv = out_path(tr_csv, tr.csv);
      return run_train(tr);
    }
    if (cmd_ev->parsed()) {
      if (ev.algo == "ddrl" && ev.model.empty()) {
        std::cerr << "eval: --model is required when --algo is ddrl\n";
        return 2;
      }
      ev.csv = out_path(ev_csv, ev.csv);
      return run_eval(ev, true);
    }
    if (cmd_cp->parsed()) return run_compare(cp);
    if (cmd_au->parsed()) {
      if (au.algo == "ddrl" && au.model.empty()) {
        std::cerr << "audit: --model is required when --algo is ddrl\n";
        return 2;
      }
      return run_audit(au);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
