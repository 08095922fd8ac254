#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sagin/features.hpp"

namespace sagin {

// Linear scoring kernel + softmax; the learnable state of one domain agent.
struct PolicyParameters {
  std::array<double, kNumFeatures> omega{};
  double bias = 0.0;
  double alpha = 0.005;

  bool operator==(const PolicyParameters&) const = default;
};

// omega ~ U[-0.1, 0.1) per component, bias 0.
PolicyParameters init_params(std::uint64_t seed, double alpha = 0.005);

struct GradientAccumulator {
  std::array<double, kNumFeatures> d_omega{};
  double d_bias = 0.0;
  int sample_count = 0;

  bool empty() const { return sample_count == 0; }
  void clear() {
    d_omega = {};
    d_bias = 0.0;
    sample_count = 0;
  }
};

// Probabilities over the masked-in candidates only; masked-out rows are
// excluded rather than carried with probability zero.
struct NodeDistribution {
  std::vector<NodeId> node_order;
  std::vector<double> probabilities;
};

struct LogProbGradient {
  std::array<double, kNumFeatures> d_omega{};
  double d_bias = 0.0;
};

// Scores every row as omega . v + bias, then softmax over masked-in rows
// (max-subtracted for stability). Returns nullopt when the mask admits no
// row; the caller treats that as an embedding rejection.
std::optional<NodeDistribution> forward(const PolicyParameters& params,
                                        const FeatureMatrix& fm,
                                        const std::vector<char>& mask);

NodeId sample_node(const NodeDistribution& dist, std::mt19937_64& rng);
// Highest probability, ties to the smallest node id.
NodeId argmax_node(const NodeDistribution& dist);

// d/domega log p(chosen) = v_chosen - sum_j p_j v_j over masked-in rows;
// the shared bias cancels in softmax, so its gradient is exactly zero.
LogProbGradient log_prob_gradient(const PolicyParameters& params,
                                  const FeatureMatrix& fm,
                                  const std::vector<char>& mask, NodeId chosen_node);

void accumulate(GradientAccumulator& acc, const LogProbGradient& g);

// omega += alpha * reward * accumulated gradient, then the accumulator is
// cleared. Throws on an empty accumulator or a non-finite result, leaving
// the parameters unchanged.
void apply_update(PolicyParameters& params, GradientAccumulator& acc, double reward);

// Text round-trip at full double precision: OMEGA / BIAS / ALPHA lines.
void save_params(const PolicyParameters& params, std::ostream& out);
void save_params_file(const PolicyParameters& params, const std::string& path);
PolicyParameters load_params(std::istream& in);
PolicyParameters load_params_file(const std::string& path);

}  // namespace sagin
