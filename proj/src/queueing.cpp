#include "gridgame/queueing.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "gridgame/distributions.hpp"
#include "gridgame/error.hpp"

namespace gridgame {

double pk_mean_wait(double total_rate, const ServiceDistribution &service) {
  const double rho = total_rate * service.mean;
  if (!(rho < 1.0 - kStabilityMargin)) {
    std::ostringstream os;
    os << "utilisation " << rho << " is not below 1";
    throw Error(ErrorCode::kUnstableNode, os.str());
  }
  return total_rate * service.second_moment / (2.0 * (1.0 - rho));
}

namespace {

enum class EventKind { kArrival = 0, kDeparture = 1 };

struct Event {
  double time;
  EventKind kind;
  std::size_t stream;
};

// Earliest first; at equal times arrivals precede departures.
struct Later {
  bool operator()(const Event &a, const Event &b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.kind > b.kind;
  }
};

struct BatchEstimate {
  double mean;
  double half_width;
};

BatchEstimate batch_means(const std::vector<double> &values, int batches) {
  const std::size_t size = values.size() / static_cast<std::size_t>(batches);
  if (batches < 2 || size == 0) return {0.0, 0.0};
  std::vector<double> means(static_cast<std::size_t>(batches), 0.0);
  for (int b = 0; b < batches; ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < size; ++k) sum += values[static_cast<std::size_t>(b) * size + k];
    means[static_cast<std::size_t>(b)] = sum / static_cast<double>(size);
  }
  double grand = 0.0;
  for (double x : means) grand += x;
  grand /= batches;
  double var = 0.0;
  for (double x : means) var += (x - grand) * (x - grand);
  var /= (batches - 1);
  const boost::math::students_t dist(batches - 1);
  const double t = boost::math::quantile(dist, 0.975);
  return {grand, t * std::sqrt(var / batches)};
}

}  // namespace

DesStats simulate_node(const DesConfig &cfg) {
  const std::int64_t warmup = cfg.warmup < 0 ? cfg.horizon / 10 : cfg.warmup;
  if (!(cfg.horizon > warmup) || warmup < 0) {
    throw Error(ErrorCode::kInvalidParameter, "need horizon > warmup >= 0");
  }
  const ServiceDistribution &service = cfg.node.service;
  double total_rate = 0.0;
  for (const auto &s : cfg.arrival_streams) total_rate += std::max(0.0, s.rate);
  if (!(total_rate * service.mean < 1.0 - kStabilityMargin)) {
    throw Error(ErrorCode::kUnstableNode, "total arrival rate saturates the node");
  }
  DesStats stats;
  if (total_rate == 0.0) return stats;

  UniformStream rng(cfg.seed);
  auto draw_service = [&]() {
    if (service.kind == ServiceKind::kBoundedPareto) {
      return bounded_pareto_sample(service.pareto, rng.next());
    }
    return rng.exponential(1.0 / service.mean);
  };

  std::priority_queue<Event, std::vector<Event>, Later> events;
  for (std::size_t s = 0; s < cfg.arrival_streams.size(); ++s) {
    const double rate = cfg.arrival_streams[s].rate;
    if (rate > 0.0) events.push({rng.exponential(rate), EventKind::kArrival, s});
  }

  std::deque<double> waiting;  // arrival times, FIFO
  bool busy = false;
  double in_service_arrival = 0.0;
  double in_service_start = 0.0;
  std::int64_t arrived = 0;
  std::int64_t departed = 0;
  std::int64_t in_system = 0;

  const std::size_t measured = static_cast<std::size_t>(cfg.horizon - warmup);
  std::vector<double> waits;
  std::vector<double> sojourns;
  std::vector<double> services;
  waits.reserve(measured);
  sojourns.reserve(measured);
  services.reserve(measured);

  double window_start = -1.0;
  double last_time = 0.0;
  double area = 0.0;
  double busy_time = 0.0;

  auto start_service = [&](double now, double arrival) {
    busy = true;
    in_service_arrival = arrival;
    in_service_start = now;
    events.push({now + draw_service(), EventKind::kDeparture, 0});
  };

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (window_start >= 0.0) {
      area += static_cast<double>(in_system) * (ev.time - last_time);
      if (busy) busy_time += ev.time - last_time;
    }
    last_time = ev.time;

    if (ev.kind == EventKind::kArrival) {
      if (arrived == warmup) window_start = ev.time;
      ++arrived;
      ++in_system;
      if (arrived < cfg.horizon) {
        events.push({ev.time + rng.exponential(cfg.arrival_streams[ev.stream].rate),
                     EventKind::kArrival, ev.stream});
      }
      if (busy) {
        waiting.push_back(ev.time);
      } else {
        start_service(ev.time, ev.time);
      }
    } else {
      if (departed >= warmup) {
        waits.push_back(in_service_start - in_service_arrival);
        sojourns.push_back(ev.time - in_service_arrival);
        services.push_back(ev.time - in_service_start);
      }
      ++departed;
      --in_system;
      busy = false;
      if (!waiting.empty()) {
        const double arrival = waiting.front();
        waiting.pop_front();
        start_service(ev.time, arrival);
      }
    }
  }

  const double window = last_time - window_start;
  const BatchEstimate wait = batch_means(waits, cfg.batches);
  const BatchEstimate sojourn = batch_means(sojourns, cfg.batches);
  double service_sum = 0.0;
  for (double x : services) service_sum += x;
  double wait_sum = 0.0;
  for (double x : waits) wait_sum += x;
  double sojourn_sum = 0.0;
  for (double x : sojourns) sojourn_sum += x;

  const double count = static_cast<double>(waits.size());
  stats.measured = static_cast<std::int64_t>(waits.size());
  stats.mean_wait = wait_sum / count;
  stats.mean_service = service_sum / count;
  stats.mean_sojourn = sojourn_sum / count;
  stats.ci95_wait = wait.half_width;
  stats.ci95_sojourn = sojourn.half_width;
  stats.utilization = window > 0.0 ? busy_time / window : 0.0;
  stats.mean_in_system = window > 0.0 ? area / window : 0.0;
  stats.throughput = window > 0.0 ? count / window : 0.0;
  return stats;
}

}  // namespace gridgame
