#include "tandem/tandemsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>

#include "tandem/numerics.hpp"

namespace tandem {

namespace {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void check_inputs(double lambda, const ServiceDistribution& dist, const SimulationOptions& options) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("simulate: lambda must be finite and > 0");
  }
  const double rho = lambda * dist.mean();
  if (rho > 1.0 && !options.allow_unstable) {
    throw std::invalid_argument("simulate: rho=" + std::to_string(rho) +
                                " > 1; set allow_unstable to run anyway");
  }
}

[[noreturn]] void job_cap_exceeded(std::size_t k, std::uint64_t cap) {
  throw NumericalError("simulate: busy period " + std::to_string(k + 1) + " exceeded " +
                       std::to_string(cap) + " jobs; rho is too close to 1 for this horizon");
}

std::vector<BusyPeriodRecord> simulate_fast(double lambda, const ServiceDistribution& dist,
                                            std::size_t n, RandomStream& rng,
                                            const SimulationOptions& options) {
  std::vector<BusyPeriodRecord> out;
  out.reserve(n);
  CompensatedSum clock;
  clock.add(rng.exponential(lambda));
  double carry = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    // Workload form: w1 is the first station's workload just after the
    // latest arrival, lead = d2 - d1 how far the second station trails the
    // first. Neither grows with the length of the busy period, so R keeps
    // full precision however long the period runs.
    CompensatedSum local;  // time of the latest arrival since the start
    double w1 = 0.0;
    double lead = carry;
    double max_v = 0.0;
    std::uint64_t jobs = 0;
    double idle = 0.0;
    double gap = 0.0;  // interarrival time before the current job
    for (;;) {
      const double v = dist.sample(rng);
      if (++jobs > options.max_jobs_per_period) job_cap_exceeded(k, options.max_jobs_per_period);
      // d1 advances by the first server's idle time before this job plus v.
      const double advance = std::max(gap - w1, 0.0) + v;
      lead = std::max(lead - advance, 0.0) + v;
      w1 = std::max(w1 - gap, 0.0) + v;
      max_v = std::max(max_v, v);
      gap = rng.exponential(lambda);
      if (gap < w1) {
        local.add(gap);
        continue;
      }
      idle = gap - w1;
      break;
    }
    const double start = clock.value();
    BusyPeriodRecord rec;
    rec.index = k + 1;
    rec.start = start;
    rec.last_arrival = start + local.value();
    rec.last_q2_arrival = rec.last_arrival + w1;
    rec.max_service = max_v;
    rec.idle_after = idle;
    rec.r_value = lead;
    rec.carry_in = carry;
    rec.jobs = jobs;
    out.push_back(rec);
    carry = std::max(lead - idle, 0.0);
    clock.add(local.value());
    clock.add(w1);
    clock.add(idle);
  }
  return out;
}

struct Event {
  double time;
  EventKind kind;
  std::size_t job;
  std::uint64_t seq;
};

struct EventLater {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    // Departures before arrivals at the same instant.
    if (a.kind != b.kind) return a.kind == EventKind::Arrival;
    return a.seq > b.seq;
  }
};

SimulationResult simulate_events(double lambda, const ServiceDistribution& dist, std::size_t n,
                                 RandomStream& rng, const SimulationOptions& options) {
  SimulationResult result;
  WorkloadPath path;
  std::priority_queue<Event, std::vector<Event>, EventLater> events;
  std::uint64_t seq = 0;
  CompensatedSum clock;
  clock.add(rng.exponential(lambda));
  double pending_arrival = clock.value();
  events.push({pending_arrival, EventKind::Arrival, 0, seq++});

  double last_dep1 = 0.0;
  double last_dep2 = 0.0;
  double q2_frontier = 0.0;  // second-station departure of the latest job to reach it
  std::size_t in_q1 = 0;
  BusyPeriodRecord current;
  std::size_t completed = 0;

  while (completed < n) {
    const Event ev = events.top();
    events.pop();
    const double now = ev.time;
    if (ev.kind == EventKind::Arrival) {
      const double v = dist.sample(rng);
      if (in_q1 == 0) {
        current = BusyPeriodRecord{};
        current.index = completed + 1;
        current.start = now;
        current.carry_in = std::max(q2_frontier - now, 0.0);
      }
      ++in_q1;
      if (++current.jobs > options.max_jobs_per_period) {
        job_cap_exceeded(completed, options.max_jobs_per_period);
      }
      current.max_service = std::max(current.max_service, v);
      current.last_arrival = now;
      JobRecord job;
      job.index = result.jobs.size();
      job.busy_period = current.index;
      job.arrival_q1 = now;
      job.service = v;
      job.arrival_q2 = std::max(now, last_dep1) + v;
      last_dep1 = job.arrival_q2;
      const double dep2 = std::max(job.arrival_q2, last_dep2) + v;
      last_dep2 = dep2;
      job.sojourn_q2 = dep2 - job.arrival_q2;
      result.jobs.push_back(job);
      events.push({job.arrival_q2, EventKind::Departure, job.index, seq++});

      clock.add(rng.exponential(lambda));
      pending_arrival = clock.value();
      events.push({pending_arrival, EventKind::Arrival, job.index + 1, seq++});
    } else {
      const JobRecord& job = result.jobs[ev.job];
      q2_frontier = job.arrival_q2 + job.sojourn_q2;
      --in_q1;
      if (in_q1 == 0) {
        current.last_q2_arrival = now;
        current.r_value = q2_frontier - now;
        current.idle_after = pending_arrival - now;
        result.busy_periods.push_back(current);
        ++completed;
      }
    }
    path.time.push_back(now);
    path.kind.push_back(ev.kind);
    path.job.push_back(ev.job);
    path.w1.push_back(std::max(last_dep1 - now, 0.0));
    path.w2.push_back(std::max(q2_frontier - now, 0.0));
  }
  result.path = std::move(path);
  return result;
}

}  // namespace

SimulationResult simulate(double lambda, const ServiceDistribution& dist,
                          std::size_t n_busy_periods, RandomStream& rng,
                          const SimulationOptions& options) {
  check_inputs(lambda, dist, options);
  if (options.keep_path) return simulate_events(lambda, dist, n_busy_periods, rng, options);
  SimulationResult result;
  result.busy_periods = simulate_fast(lambda, dist, n_busy_periods, rng, options);
  return result;
}

namespace {

// Unevaluated sum hi + lo (Knuth two-sum), enough to keep prefix sums of
// idle times exact to well below the verification tolerance.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  DoubleDouble plus(double x) const {
    const double s = hi + x;
    const double bb = s - hi;
    const double err = (hi - (s - bb)) + (x - bb);
    const double l = lo + err;
    const double h = s + l;
    return {h, l - (h - s)};
  }
  double minus(const DoubleDouble& o) const { return (hi - o.hi) + (lo - o.lo); }
  bool greater(const DoubleDouble& o) const { return hi > o.hi || (hi == o.hi && lo > o.lo); }
};

}  // namespace

RecursionReport verify_recursion(const std::vector<BusyPeriodRecord>& records, double rel_tol) {
  // max_{k<=n} (M_k - sum_{j=k}^{n-1} I_j) = max_{k<=n} (M_k + P_k) - P_n with
  // P_k = sum_{j<k} I_j.
  RecursionReport report;
  DoubleDouble prefix;
  DoubleDouble best{-INFINITY, 0.0};
  std::size_t argmax = 0;
  for (std::size_t n = 0; n < records.size(); ++n) {
    if (n) prefix = prefix.plus(records[n - 1].idle_after);
    const DoubleDouble candidate = prefix.plus(records[n].max_service);
    if (n == 0 || candidate.greater(best)) {
      best = candidate;
      argmax = n;
    }
    const double formula = best.minus(prefix);
    const double des = records[n].r_value;
    const double err = std::fabs(des - formula) / (1.0 + std::fabs(des));
    report.max_rel_error = std::max(report.max_rel_error, err);
    if (!(err <= rel_tol)) report.violations.push_back({n + 1, des, formula, argmax + 1});
    ++report.checked;
  }
  return report;
}

std::vector<double> q2_sojourn_max(const std::vector<BusyPeriodRecord>& records,
                                   const std::vector<JobRecord>& jobs) {
  std::vector<double> out(records.size(), 0.0);
  for (const auto& job : jobs) {
    if (job.busy_period == 0 || job.busy_period > records.size()) continue;
    double& slot = out[job.busy_period - 1];
    slot = std::max(slot, job.sojourn_q2);
  }
  return out;
}

PathCheck check_work_conservation(const SimulationResult& result, double rel_tol) {
  if (!result.path) throw std::invalid_argument("work conservation check needs a workload path");
  const auto& path = *result.path;
  PathCheck check;
  CompensatedSum work;
  double inf_x = 0.0;  // inf over s <= t of sum V - s, starting from X(0) = 0
  for (std::size_t e = 0; e < path.time.size(); ++e) {
    const double t = path.time[e];
    inf_x = std::min(inf_x, work.value() - t);  // left limit at t
    if (path.kind[e] == EventKind::Arrival) work.add(result.jobs[path.job[e]].service);
    const double x = work.value() - t;
    inf_x = std::min(inf_x, x);
    const double idle = -std::min(0.0, inf_x);
    const double err = std::fabs(path.w1[e] - (x + idle)) / (1.0 + t);
    if (err > check.max_error) {
      check.max_error = err;
      check.worst_event = e;
    }
    ++check.events;
  }
  check.ok = check.max_error <= rel_tol;
  return check;
}

PathCheck check_level_setting(const SimulationResult& result, double rel_tol) {
  if (!result.path) throw std::invalid_argument("level-setting check needs a workload path");
  const auto& path = *result.path;
  PathCheck check;
  std::size_t bp = 0;
  double running = 0.0;
  for (std::size_t e = 0; e < path.time.size(); ++e) {
    if (path.kind[e] != EventKind::Departure) continue;
    const JobRecord& job = result.jobs[path.job[e]];
    if (job.busy_period != bp) {
      bp = job.busy_period;
      running = 0.0;
    }
    running = std::max(running, job.service);
    const double carry = result.busy_periods[bp - 1].carry_in;
    const double expected = std::max(carry, running);
    const double err = std::fabs(path.w2[e] - expected) / (1.0 + expected);
    if (err > check.max_error) {
      check.max_error = err;
      check.worst_event = e;
    }
    ++check.events;
  }
  check.ok = check.max_error <= rel_tol;
  return check;
}

BusyPeriodDraw sample_busy_period_max(double lambda, const ServiceDistribution& dist,
                                      RandomStream& rng, std::uint64_t max_jobs) {
  BusyPeriodDraw draw;
  double a = 0.0;
  double d1 = 0.0;
  for (;;) {
    const double v = dist.sample(rng);
    if (++draw.jobs > max_jobs) job_cap_exceeded(0, max_jobs);
    d1 = std::max(a, d1) + v;
    draw.max_service = std::max(draw.max_service, v);
    const double gap = rng.exponential(lambda);
    if (a + gap >= d1) break;
    a += gap;
  }
  return draw;
}

}  // namespace tandem
