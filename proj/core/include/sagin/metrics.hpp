#pragma once

#include <iosfwd>
#include <vector>

#include "sagin/embedding.hpp"
#include "sagin/workload.hpp"

namespace sagin {

// Demand-weighted pricing: revenue counts every demanded unit once, cost
// additionally multiplies each link demand by the hops of its route.
long long request_revenue(const FunctionRequest& request);
long long record_cost(const EmbeddingRecord& record);

struct MetricsSample {
  double time = 0.0;
  double ar = 0.0;
  double rc = 0.0;
  double acr = 0.0;
  double objective = 0.0;
  long long accepted = 0;
  long long arrived = 0;

  bool operator==(const MetricsSample&) const = default;
};

// Running totals of one simulation replica plus the sampled series of
// (average revenue, revenue/cost, acceptance rate, joint objective).
class MetricsLedger {
 public:
  // Records one concluded embedding attempt. Time must not regress;
  // revenue/cost are only read when accepted.
  void observe(double time, bool accepted, long long revenue, long long cost);

  double ar() const;         // cumulative revenue / current time
  double rc() const;         // cumulative revenue / cumulative cost
  double acr() const;        // accepted / arrived
  double objective() const;  // ar + rc + acr
  // Zero denominators yield 0 in all four, so rewards exist at stream start.

  long long cumulative_revenue() const { return revenue_; }
  long long cumulative_cost() const { return cost_; }
  long long accepted_count() const { return accepted_; }
  long long arrived_count() const { return arrived_; }
  double current_time() const { return time_; }
  const std::vector<MetricsSample>& series() const { return series_; }

  void write_csv(std::ostream& out) const;

 private:
  long long revenue_ = 0;
  long long cost_ = 0;
  long long accepted_ = 0;
  long long arrived_ = 0;
  double time_ = 0.0;
  std::vector<MetricsSample> series_;
};

}  // namespace sagin
