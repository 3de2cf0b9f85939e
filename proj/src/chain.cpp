#include "tandem/chain.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "tandem/parallel.hpp"
#include "tandem/tandemsim.hpp"

namespace tandem {

HeavyTrafficSchedule schedule(const ServiceDistribution& dist, double gamma, double n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument("schedule: n must be >= 1");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("schedule: gamma must be finite and >= 0");
  }
  const double excess = gamma * n * dist.tail(n);
  if (!(excess < 1.0)) {
    throw std::invalid_argument("schedule: gamma n P(V > n) = " + std::to_string(excess) +
                                " >= 1; n is too small for gamma=" + std::to_string(gamma));
  }
  HeavyTrafficSchedule s{dist, gamma, n, 0.0, 0.0, 1.0 / dist.mean()};
  s.rho_n = 1.0 - excess;
  s.lambda_n = s.rho_n / dist.mean();
  return s;
}

GridSpec chain_grid(const HeavyTrafficSchedule& s, std::size_t points) {
  const double b = s.dist.scale();
  return GridSpec{b, 1e4 * s.n * b, points};
}

MaxSampler tabulated_sampler(const MaxServiceCdf& table) {
  auto shared = std::make_shared<const MaxServiceCdf>(table);
  return [shared](RandomStream& rng) { return shared->sample(rng); };
}

MaxSampler simulated_sampler(double lambda, const ServiceDistribution& dist) {
  check_load(lambda, dist);
  return [lambda, dist](RandomStream& rng) {
    return sample_busy_period_max(lambda, dist, rng).max_service;
  };
}

ChainState step(const ChainState& state, const ChainKernel& kernel, const MaxSampler& sampler,
                RandomStream& rng) {
  const double idle = rng.exponential(kernel.lambda);
  const double m = sampler(rng);
  return {std::max(state.value - idle / kernel.scale, m / kernel.scale), state.step + 1};
}

std::uint64_t scaled_steps(double n, double t) {
  if (!(t >= 0.0) || !(n > 0.0)) throw std::invalid_argument("scaled_steps: need n > 0, t >= 0");
  return static_cast<std::uint64_t>(std::floor(n * t * (1.0 + 1e-12)));
}

namespace {

void check_ensemble(const ChainKernel& kernel, const EnsembleSpec& spec) {
  if (spec.reps < 1) throw std::invalid_argument("ensemble: reps must be >= 1");
  if (!(spec.x0 >= 0.0)) throw std::invalid_argument("ensemble: x0 must be >= 0");
  if (!(kernel.lambda > 0.0) || !(kernel.scale > 0.0)) {
    throw std::invalid_argument("ensemble: kernel rate and scale must be > 0");
  }
}

template <class PerRep>
std::vector<double> ensemble(const EnsembleSpec& spec, PerRep&& body) {
  std::vector<double> out(spec.reps);
  parallel_for(spec.reps, spec.threads, [&](std::size_t r) {
    RandomStream rng(spec.seed, spec.stream_offset + r);
    out[r] = body(rng);
  });
  return out;
}

}  // namespace

std::vector<double> run_scaled(const ChainKernel& kernel, const MaxSampler& sampler,
                               const EnsembleSpec& spec) {
  check_ensemble(kernel, spec);
  const std::uint64_t steps = scaled_steps(kernel.scale, spec.t);
  return ensemble(spec, [&](RandomStream& rng) {
    ChainState state{spec.x0, 0};
    for (std::uint64_t k = 0; k < steps; ++k) state = step(state, kernel, sampler, rng);
    return state.value;
  });
}

std::vector<double> run_representation(const ChainKernel& kernel, const MaxSampler& sampler,
                                       const EnsembleSpec& spec) {
  check_ensemble(kernel, spec);
  const std::uint64_t steps = scaled_steps(kernel.scale, spec.t);
  return ensemble(spec, [&](RandomStream& rng) {
    // M_k - sum_{j>k} I_j = (M_k + P_k) - P_N with P_k = sum_{j<=k} I_j.
    double partial = 0.0;
    double best = -INFINITY;
    for (std::uint64_t k = 0; k < steps; ++k) {
      partial += rng.exponential(kernel.lambda);
      best = std::max(best, sampler(rng) + partial);
    }
    const double from_start = spec.x0 - partial / kernel.scale;
    if (steps == 0) return spec.x0;
    return std::max(from_start, (best - partial) / kernel.scale);
  });
}

std::vector<double> run_mean_idle(const ChainKernel& kernel, const MaxSampler& sampler,
                                  const EnsembleSpec& spec) {
  check_ensemble(kernel, spec);
  const std::uint64_t steps = scaled_steps(kernel.scale, spec.t);
  const double drop = 1.0 / (kernel.lambda * kernel.scale);
  return ensemble(spec, [&](RandomStream& rng) {
    double value = spec.x0;
    for (std::uint64_t k = 0; k < steps; ++k) {
      rng.exponential(kernel.lambda);  // keep the M draws aligned with run_scaled
      value = std::max(value - drop, sampler(rng) / kernel.scale);
    }
    return value;
  });
}

std::vector<double> scaled_max_cdf_probe(const HeavyTrafficSchedule& s,
                                         const std::vector<double>& y_grid) {
  std::vector<double> out;
  out.reserve(y_grid.size());
  for (double y : y_grid) {
    if (!(y > 0.0)) throw std::invalid_argument("scaled_max_cdf_probe: y must be > 0");
    out.push_back(s.n * solve_mbar_at(s.lambda_n, s.dist, s.n * y));
  }
  return out;
}

double shifted_probe(const HeavyTrafficSchedule& s, double y, double shift) {
  if (!(y > 0.0)) throw std::invalid_argument("shifted_probe: y must be > 0");
  return s.n * solve_mbar_at(s.lambda_n, s.dist, std::max(s.n * y + shift, 0.0));
}

double idle_sum_flatness(const HeavyTrafficSchedule& s, double t, std::size_t reps,
                         std::uint64_t seed, unsigned threads) {
  if (reps < 1) throw std::invalid_argument("idle_sum_flatness: reps must be >= 1");
  const std::uint64_t steps = scaled_steps(s.n, t);
  const double mean = 1.0 / s.lambda_n;
  std::vector<double> dev(reps);
  parallel_for(reps, threads, [&](std::size_t r) {
    RandomStream rng(seed, r);
    double sum = 0.0;
    double worst = 0.0;
    for (std::uint64_t k = 0; k < steps; ++k) {
      sum += rng.exponential(s.lambda_n) - mean;
      worst = std::max(worst, std::fabs(sum));
    }
    dev[r] = worst / s.n;
  });
  double total = 0.0;
  for (double d : dev) total += d;
  return total / static_cast<double>(reps);
}

std::uint64_t default_burn_in(double rho) {
  if (!(rho < 1.0)) throw std::invalid_argument("burn-in: rho must be < 1");
  return std::max<std::uint64_t>(100'000, static_cast<std::uint64_t>(std::ceil(10.0 / (1.0 - rho))));
}

std::vector<double> run_long_chain(double lambda, const MaxSampler& sampler,
                                   const LongRunSpec& spec, double rho) {
  const std::uint64_t burn = spec.burn_in ? spec.burn_in : default_burn_in(rho);
  RandomStream rng(spec.seed, 0);
  const ChainKernel kernel{lambda, 1.0};
  ChainState state;
  for (std::uint64_t k = 0; k < burn; ++k) state = step(state, kernel, sampler, rng);
  std::vector<double> out;
  out.reserve(spec.steps);
  for (std::uint64_t k = 0; k < spec.steps; ++k) {
    state = step(state, kernel, sampler, rng);
    out.push_back(state.value);
  }
  return out;
}

}  // namespace tandem
