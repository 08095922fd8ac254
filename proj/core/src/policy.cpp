#include "sagin/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sagin/rng.hpp"
#include "text_io.hpp"

namespace sagin {

namespace {

double score_row(const PolicyParameters& p, const FeatureVector& v) {
  double s = p.bias;
  for (int c = 0; c < kNumFeatures; ++c) s += p.omega[c] * v[c];
  return s;
}

void check_mask(const FeatureMatrix& fm, const std::vector<char>& mask) {
  if (mask.size() != fm.rows.size()) {
    throw std::invalid_argument("mask length does not match feature matrix rows");
  }
}

}  // namespace

PolicyParameters init_params(std::uint64_t seed, double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("learning rate must be positive");
  std::mt19937_64 rng(seed);
  PolicyParameters p;
  for (double& w : p.omega) w = -0.1 + 0.2 * draw_unit(rng);
  p.bias = 0.0;
  p.alpha = alpha;
  return p;
}

std::optional<NodeDistribution> forward(const PolicyParameters& params,
                                        const FeatureMatrix& fm,
                                        const std::vector<char>& mask) {
  check_mask(fm, mask);
  NodeDistribution dist;
  std::vector<double> scores;
  double max_score = 0.0;
  for (std::size_t i = 0; i < fm.rows.size(); ++i) {
    if (!mask[i]) continue;
    const double s = score_row(params, fm.rows[i]);
    if (scores.empty() || s > max_score) max_score = s;
    scores.push_back(s);
    dist.node_order.push_back(fm.node_order[i]);
  }
  if (scores.empty()) return std::nullopt;
  double sum = 0.0;
  dist.probabilities.reserve(scores.size());
  for (double s : scores) {
    const double e = std::exp(s - max_score);
    dist.probabilities.push_back(e);
    sum += e;
  }
  for (double& p : dist.probabilities) p /= sum;
  return dist;
}

NodeId sample_node(const NodeDistribution& dist, std::mt19937_64& rng) {
  if (dist.node_order.empty()) throw std::invalid_argument("empty distribution");
  const double u = draw_unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    acc += dist.probabilities[i];
    if (u < acc) return dist.node_order[i];
  }
  return dist.node_order.back();  // rounding spill
}

NodeId argmax_node(const NodeDistribution& dist) {
  if (dist.node_order.empty()) throw std::invalid_argument("empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < dist.probabilities.size(); ++i) {
    // node_order ascends, so > keeps the smallest id on ties
    if (dist.probabilities[i] > dist.probabilities[best]) best = i;
  }
  return dist.node_order[best];
}

LogProbGradient log_prob_gradient(const PolicyParameters& params,
                                  const FeatureMatrix& fm,
                                  const std::vector<char>& mask,
                                  NodeId chosen_node) {
  check_mask(fm, mask);
  const auto dist = forward(params, fm, mask);
  if (!dist) throw std::invalid_argument("all rows masked out");

  LogProbGradient g;
  const FeatureVector* chosen = nullptr;
  std::size_t d = 0;
  for (std::size_t i = 0; i < fm.rows.size(); ++i) {
    if (!mask[i]) continue;
    const double p = dist->probabilities[d++];
    for (int c = 0; c < kNumFeatures; ++c) g.d_omega[c] -= p * fm.rows[i][c];
    if (fm.node_order[i] == chosen_node) chosen = &fm.rows[i];
  }
  if (!chosen) throw std::invalid_argument("chosen node is masked out");
  for (int c = 0; c < kNumFeatures; ++c) g.d_omega[c] += (*chosen)[c];
  g.d_bias = 0.0;
  return g;
}

void accumulate(GradientAccumulator& acc, const LogProbGradient& g) {
  for (int c = 0; c < kNumFeatures; ++c) acc.d_omega[c] += g.d_omega[c];
  acc.d_bias += g.d_bias;
  ++acc.sample_count;
}

void apply_update(PolicyParameters& params, GradientAccumulator& acc, double reward) {
  if (acc.empty()) throw std::logic_error("update from an empty gradient accumulator");
  PolicyParameters next = params;
  for (int c = 0; c < kNumFeatures; ++c) {
    next.omega[c] += params.alpha * reward * acc.d_omega[c];
    if (!std::isfinite(next.omega[c])) {
      throw std::runtime_error("non-finite weight after update (reward=" +
                               std::to_string(reward) + ")");
    }
  }
  next.bias += params.alpha * reward * acc.d_bias;
  if (!std::isfinite(next.bias)) {
    throw std::runtime_error("non-finite bias after update");
  }
  params = next;
  acc.clear();
}

void save_params(const PolicyParameters& params, std::ostream& out) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "OMEGA %.17g %.17g %.17g %.17g\nBIAS %.17g\nALPHA %.17g\n",
                params.omega[0], params.omega[1], params.omega[2], params.omega[3],
                params.bias, params.alpha);
  out << buf;
}

void save_params_file(const PolicyParameters& params, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  save_params(params, f);
}

PolicyParameters load_params(std::istream& in) {
  detail::LineReader r{in};
  std::string line;
  PolicyParameters p;

  auto expect = [&](const char* tag) -> std::istringstream {
    if (!r.next(line)) throw ParseError(r.eof_line(), std::string("missing ") + tag + " line");
    std::istringstream ls(line);
    std::string got;
    ls >> got;
    if (got != tag) throw ParseError(r.line_no, std::string("expected ") + tag + " line");
    return ls;
  };

  {
    auto ls = expect("OMEGA");
    for (double& w : p.omega) {
      if (!(ls >> w)) throw ParseError(r.line_no, "expected exactly 4 weights");
    }
    std::string extra;
    if (ls >> extra) throw ParseError(r.line_no, "expected exactly 4 weights");
  }
  {
    auto ls = expect("BIAS");
    if (!(ls >> p.bias)) throw ParseError(r.line_no, "malformed BIAS line");
  }
  {
    auto ls = expect("ALPHA");
    if (!(ls >> p.alpha) || p.alpha <= 0.0) {
      throw ParseError(r.line_no, "malformed ALPHA line");
    }
  }
  for (double v : p.omega) {
    if (!std::isfinite(v)) throw ParseError(r.line_no, "non-finite weight");
  }
  if (!std::isfinite(p.bias) || !std::isfinite(p.alpha)) {
    throw ParseError(r.line_no, "non-finite parameter");
  }
  return p;
}

PolicyParameters load_params_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open parameter file " + path);
  return load_params(f);
}

}  // namespace sagin
