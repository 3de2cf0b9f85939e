// Two FIFO stations in series; every job brings the same service time V_i
// to both. Arrivals to the first station are Poisson(lambda).
//
// Per busy period k of the first station the simulator reports the largest
// service time M_k, the idle time I_k that follows, and R_k, the second
// station's workload just after the last job of the busy period reaches it.
// With this indexing R_k = max(R_{k-1} - I_{k-1}, M_k) and R_1 = M_1.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tandem/heavytail.hpp"
#include "tandem/random.hpp"

namespace tandem {

struct JobRecord {
  std::size_t index = 0;
  std::size_t busy_period = 0;
  double arrival_q1 = 0.0;
  double service = 0.0;
  double arrival_q2 = 0.0;  // departure from the first station
  double sojourn_q2 = 0.0;
};

struct BusyPeriodRecord {
  std::size_t index = 0;
  double start = 0.0;            // first arrival of the busy period
  double last_arrival = 0.0;     // t_k
  double last_q2_arrival = 0.0;  // t~_k = t_k + W1(t_k)
  double max_service = 0.0;      // M_k
  double idle_after = 0.0;       // I_k
  double r_value = 0.0;          // R_k
  double carry_in = 0.0;         // second-station workload at `start`
  std::uint64_t jobs = 0;
};

enum class EventKind { Arrival, Departure };

/// Right-continuous workload values just after each event.
struct WorkloadPath {
  std::vector<double> time;
  std::vector<EventKind> kind;
  std::vector<std::size_t> job;
  std::vector<double> w1;
  std::vector<double> w2;
};

struct SimulationOptions {
  std::uint64_t max_jobs_per_period = 100'000'000;
  bool allow_unstable = false;
  /// Run the event-driven engine and keep the workload path and job list.
  bool keep_path = false;
};

struct SimulationResult {
  std::vector<BusyPeriodRecord> busy_periods;
  std::optional<WorkloadPath> path;
  std::vector<JobRecord> jobs;
};

/// Simulates until `n_busy_periods` busy periods (and the idle time after
/// the last one) are complete. Random draws are consumed in the order
/// A_1, V_1, A_2, V_2, ... so both engines give the same path for a stream.
SimulationResult simulate(double lambda, const ServiceDistribution& dist,
                          std::size_t n_busy_periods, RandomStream& rng,
                          const SimulationOptions& options = {});

struct RecursionViolation {
  std::size_t n = 0;
  double des_value = 0.0;
  double formula_value = 0.0;
  std::size_t argmax_k = 0;
};

struct RecursionReport {
  std::size_t checked = 0;
  double max_rel_error = 0.0;
  std::vector<RecursionViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// R_n against max_{k<=n} (M_k - sum_{j=k}^{n-1} I_j) for every n.
RecursionReport verify_recursion(const std::vector<BusyPeriodRecord>& records,
                                 double rel_tol = 1e-9);

/// Largest second-station sojourn per busy period (needs the job list).
std::vector<double> q2_sojourn_max(const std::vector<BusyPeriodRecord>& records,
                                   const std::vector<JobRecord>& jobs);

struct PathCheck {
  std::size_t events = 0;
  double max_error = 0.0;
  std::size_t worst_event = 0;
  bool ok = true;
};

/// W1 at each event against sum V - t + I(t), with I(t) the cumulative
/// idleness -min(0, inf_{s<=t}(sum_{i<=E(s)} V_i - s)), rebuilt from the jobs.
PathCheck check_work_conservation(const SimulationResult& result, double rel_tol = 1e-9);

/// W2 just after each second-station arrival against max(carry_in, running
/// maximum of services so far in the busy period).
PathCheck check_level_setting(const SimulationResult& result, double rel_tol = 1e-9);

/// One busy period from an empty first station; returns (M, job count).
struct BusyPeriodDraw {
  double max_service = 0.0;
  std::uint64_t jobs = 0;
};
BusyPeriodDraw sample_busy_period_max(double lambda, const ServiceDistribution& dist,
                                      RandomStream& rng,
                                      std::uint64_t max_jobs = 100'000'000);

}  // namespace tandem
