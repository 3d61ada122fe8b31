#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "rlab/dataset.hpp"

namespace rlab {

// The divergence used throughout: D(p, q) = sum_x p(x) (p(x)/q(x) - 1),
// equal to sum_x p(x)^2 / q(x) - 1. Non-negative, zero iff p = q.
// Throws DivisionBySupportGap (an RlabError) if q(x) = 0 where p(x) > 0;
// callers are expected to floor q first.
double d_cql(std::span<const double> p, std::span<const double> q);

// Kullback-Leibler divergence, offered as the alternate hook for
// sensitivity studies. Same support contract as d_cql.
double kl_divergence(std::span<const double> p, std::span<const double> q);

using DivergenceFn = std::function<double(std::span<const double>, std::span<const double>)>;

struct DivergenceReport {
  std::vector<double> per_state;  // 0 for states excluded from the report
  std::vector<std::uint8_t> counted;  // mu_hat(s) > 0
  double std_dev = 0.0;
  double max = 0.0;
  double mean = 0.0;
  int states_counted = 0;
};

// D(pi, pi_beta_hat)(s) at every state with mu_hat(s) > 0, with summary
// statistics over exactly those states.
DivergenceReport per_state_divergence(const TabularPolicy& pi, const EmpiricalModel& model,
                                      const DivergenceFn& divergence = d_cql);

enum class ConcentrabilityMode { ExactTabular, SampledPairs };

struct ConcentrabilityEstimate {
  double value = 0.0;
  std::int64_t n_pairs = 0;
  ConcentrabilityMode estimator = ConcentrabilityMode::ExactTabular;
};

// Dispersion of sqrt(D(pi, pi_beta)(s) / mu(s)) between independent states
// drawn from d_pi. ExactTabular sums over all state pairs weighted by
// d_pi(s1) d_pi(s2); SampledPairs is the unbiased Monte-Carlo estimate with
// the recorded seed. mu_hat is floored at the model's eps_b.
ConcentrabilityEstimate differential_concentrability(
    const TabularPolicy& pi, const EmpiricalModel& model, std::span<const double> d_pi,
    ConcentrabilityMode mode, std::int64_t n_pairs = 0, std::uint64_t seed = 0,
    const DivergenceFn& divergence = d_cql);

// Report export: CSV with one (state, divergence) row per counted state and
// a JSON summary holding std/max/mean and the concentrability estimate.
void write_divergence_csv(const DivergenceReport& report, const std::string& path);
DivergenceReport read_divergence_csv(const std::string& path, int n_states);
void write_audit_summary_json(const DivergenceReport& report,
                              const ConcentrabilityEstimate& cdiff, const std::string& path);

}  // namespace rlab
