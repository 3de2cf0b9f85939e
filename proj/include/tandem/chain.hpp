// The embedded chain of second-station workloads and its scaled version.
//
// Under the heavy-traffic schedule the n-th system has
//     rho_n = 1 - gamma n P(V > n),  lambda_n = rho_n / E[V],
// and Y_n(k) = R_k / n moves by Y <- max(Y - I/n, M/n), with I ~ Exp(lambda_n)
// and M drawn from the busy-period-maximum law at lambda_n.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "tandem/boxma.hpp"
#include "tandem/heavytail.hpp"
#include "tandem/random.hpp"

namespace tandem {

struct HeavyTrafficSchedule {
  ServiceDistribution dist;
  double gamma = 0.0;
  double n = 1.0;
  double lambda_n = 0.0;
  double rho_n = 0.0;
  double lambda = 0.0;  // limit rate 1 / E[V]
};

/// Rejects n < 1, gamma < 0 and gamma n P(V > n) >= 1.
HeavyTrafficSchedule schedule(const ServiceDistribution& dist, double gamma, double n);

/// Log grid [b, 1e4 n b] for the busy-period-maximum table used by the chain.
GridSpec chain_grid(const HeavyTrafficSchedule& s, std::size_t points = 1024);

/// Transition parameters: idle rate and the space scale n.
struct ChainKernel {
  double lambda = 1.0;
  double scale = 1.0;
};

inline ChainKernel kernel_of(const HeavyTrafficSchedule& s) { return {s.lambda_n, s.n}; }

using MaxSampler = std::function<double(RandomStream&)>;

/// Inverse-CDF draws from a tabulated law.
MaxSampler tabulated_sampler(const MaxServiceCdf& table);
/// Draws by simulating a busy period (slow; for validation).
MaxSampler simulated_sampler(double lambda, const ServiceDistribution& dist);

struct ChainState {
  double value = 0.0;
  std::uint64_t step = 0;
};

/// max(value - I/scale, M/scale); draws I then M.
ChainState step(const ChainState& state, const ChainKernel& kernel, const MaxSampler& sampler,
                RandomStream& rng);

/// [n t] steps; floor taken with a small relative guard so n t = k exactly
/// gives k steps.
std::uint64_t scaled_steps(double n, double t);

struct EnsembleSpec {
  double t = 1.0;
  double x0 = 0.0;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::uint64_t stream_offset = 0;  // replication r uses stream stream_offset + r
  unsigned threads = 1;
};

/// Terminal values X_n(t) of independent chain replications, in rep order.
std::vector<double> run_scaled(const ChainKernel& kernel, const MaxSampler& sampler,
                               const EnsembleSpec& spec);

/// Same law through the max representation
///   max(x0 - sum I / n, max_k (M_k - sum_{j>k} I_j) / n).
std::vector<double> run_representation(const ChainKernel& kernel, const MaxSampler& sampler,
                                       const EnsembleSpec& spec);

/// The same replications with every I replaced by its mean 1 / lambda_n.
std::vector<double> run_mean_idle(const ChainKernel& kernel, const MaxSampler& sampler,
                                  const EnsembleSpec& spec);

/// n mbar^(n)(n y) for each y, from exact solves at lambda_n.
std::vector<double> scaled_max_cdf_probe(const HeavyTrafficSchedule& s,
                                         const std::vector<double>& y_grid);

/// n mbar^(n)(n y + shift).
double shifted_probe(const HeavyTrafficSchedule& s, double y, double shift);

/// Mean over replications of max_{k <= [nt]} |sum_{i<=k} (I_i - 1/lambda_n)| / n.
double idle_sum_flatness(const HeavyTrafficSchedule& s, double t, std::size_t reps,
                         std::uint64_t seed, unsigned threads = 1);

struct LongRunSpec {
  std::uint64_t steps = 1'000'000;  // kept after burn-in
  std::uint64_t burn_in = 0;        // 0: max(1e5, 10 / (1 - rho))
  std::uint64_t seed = 1;
};

std::uint64_t default_burn_in(double rho);

/// Unscaled chain R <- max(R - I, M) at fixed lambda; returns every
/// post-burn-in value.
std::vector<double> run_long_chain(double lambda, const MaxSampler& sampler,
                                   const LongRunSpec& spec, double rho);

}  // namespace tandem
