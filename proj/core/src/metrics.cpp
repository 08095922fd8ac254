#include "sagin/metrics.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sagin {

long long request_revenue(const FunctionRequest& request) {
  long long total = 0;
  for (const auto& n : request.nodes) total += n.cpu_demand + n.sto_demand;
  for (const auto& l : request.links) total += l.bw_demand;
  return total;
}

long long record_cost(const EmbeddingRecord& record) {
  long long total = 0;
  for (const auto& p : record.node_map) total += p.cpu_demand + p.sto_demand;
  for (const auto& r : record.link_map) {
    total += static_cast<long long>(r.bw_demand) * r.hops();
  }
  return total;
}

void MetricsLedger::observe(double time, bool accepted, long long revenue,
                            long long cost) {
  if (time < time_) {
    throw std::invalid_argument("ledger time regression: " + std::to_string(time) +
                                " after " + std::to_string(time_));
  }
  if (accepted && (revenue < 0 || cost < revenue)) {
    throw std::invalid_argument("accepted request priced with cost below revenue");
  }
  time_ = time;
  ++arrived_;
  if (accepted) {
    revenue_ += revenue;
    cost_ += cost;
    ++accepted_;
  }
  series_.push_back({time_, ar(), rc(), acr(), objective(), accepted_, arrived_});
}

double MetricsLedger::ar() const {
  return time_ > 0.0 ? static_cast<double>(revenue_) / time_ : 0.0;
}

double MetricsLedger::rc() const {
  return cost_ > 0 ? static_cast<double>(revenue_) / static_cast<double>(cost_) : 0.0;
}

double MetricsLedger::acr() const {
  return arrived_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(arrived_) : 0.0;
}

double MetricsLedger::objective() const { return ar() + rc() + acr(); }

void MetricsLedger::write_csv(std::ostream& out) const {
  out << "time,ar,rc,acr,objective,accepted,arrived\n";
  char buf[256];
  for (const auto& s : series_) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f,%.6f,%lld,%lld\n", s.time,
                  s.ar, s.rc, s.acr, s.objective, s.accepted, s.arrived);
    out << buf;
  }
}

}  // namespace sagin
