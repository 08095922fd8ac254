#include <benchmark/benchmark.h>

#include <random>

#include "sagin/embedding.hpp"
#include "sagin/features.hpp"
#include "sagin/policy.hpp"
#include "sagin/workload.hpp"

using namespace sagin;

namespace {

SubstrateNetwork standard_net() {
  SubstrateGenConfig cfg;
  cfg.seed = 1;
  return generate_substrate(cfg);
}

FunctionRequest ground_request(int nodes) {
  FunctionRequest req;
  req.id = 0;
  req.arrival_time = 0.0;
  req.lifetime = 100.0;
  for (int i = 0; i < nodes; ++i)
    req.nodes.push_back({i, 5, 5, Domain::Ground});
  for (int i = 1; i < nodes; ++i) req.links.push_back({i - 1, i, 5});
  return req;
}

void BM_FeatureMatrix(benchmark::State& state) {
  SubstrateNetwork net = standard_net();
  DomainScope scope = make_domain_scope(net, Domain::Ground);
  for (auto _ : state) {
    FeatureMatrix fm = feature_matrix(net, scope, true);
    benchmark::DoNotOptimize(fm);
  }
}
BENCHMARK(BM_FeatureMatrix);

void BM_BfsLinkMap(benchmark::State& state) {
  SubstrateNetwork net = standard_net();
  // Space node to a ground node: the longest routes in the topology.
  for (auto _ : state) {
    auto path = bfs_link_map(net, 0, net.node_count() - 1, 1);
    benchmark::DoNotOptimize(path);
  }
}
BENCHMARK(BM_BfsLinkMap);

void BM_EmbedNrmvne(benchmark::State& state) {
  SubstrateNetwork net = standard_net();
  FunctionRequest req = ground_request(static_cast<int>(state.range(0)));
  NrmvneSelector selector;
  for (auto _ : state) {
    EmbeddingOutcome out = embed_request(net, req, selector);
    benchmark::DoNotOptimize(out);
    if (out.accepted()) release_request(net, *out.record);
  }
}
BENCHMARK(BM_EmbedNrmvne)->Arg(2)->Arg(6)->Arg(10);

void BM_EmbedRandom(benchmark::State& state) {
  SubstrateNetwork net = standard_net();
  FunctionRequest req = ground_request(6);
  RandomSelector selector(1);
  for (auto _ : state) {
    EmbeddingOutcome out = embed_request(net, req, selector);
    benchmark::DoNotOptimize(out);
    if (out.accepted()) release_request(net, *out.record);
  }
}
BENCHMARK(BM_EmbedRandom);

void BM_PolicyForward(benchmark::State& state) {
  SubstrateNetwork net = standard_net();
  DomainScope scope = make_domain_scope(net, Domain::Ground);
  FeatureMatrix fm = feature_matrix(net, scope, true);
  PolicyParameters params = init_params(1);
  std::vector<char> mask(fm.row_count(), 1);
  for (auto _ : state) {
    auto dist = sagin::forward(params, fm, mask);
    benchmark::DoNotOptimize(dist);
  }
}
BENCHMARK(BM_PolicyForward);

}  // namespace

BENCHMARK_MAIN();
