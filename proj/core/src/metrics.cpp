#include "rlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "rlab/rng.hpp"

namespace rlab {

double d_cql(std::span<const double> p, std::span<const double> q) {
  detail::check(p.size() == q.size(), "distributions must share a support size");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw RlabError("DivisionBySupportGap: q = 0 where p > 0");
    acc += p[i] * p[i] / q[i];
  }
  const double val = acc - 1.0;
  // Rounding can leave a tiny negative residue at p = q.
  return val < 0.0 && val > -1e-9 ? 0.0 : val;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  detail::check(p.size() == q.size(), "distributions must share a support size");
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) throw RlabError("DivisionBySupportGap: q = 0 where p > 0");
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return acc < 0.0 && acc > -1e-9 ? 0.0 : acc;
}

DivergenceReport per_state_divergence(const TabularPolicy& pi, const EmpiricalModel& model,
                                      const DivergenceFn& divergence) {
  const int n = model.n_states;
  DivergenceReport rep;
  rep.per_state.assign(n, 0.0);
  rep.counted.assign(n, 0);
  double sum = 0.0, sum_sq = 0.0;
  for (int s = 0; s < n; ++s) {
    if (model.mu_hat[s] <= 0.0) continue;
    const double d = divergence(pi.probs.row(s), model.pi_beta_hat.probs.row(s));
    rep.per_state[s] = d;
    rep.counted[s] = 1;
    rep.states_counted += 1;
    sum += d;
    sum_sq += d * d;
    rep.max = std::max(rep.max, d);
  }
  if (rep.states_counted > 0) {
    rep.mean = sum / rep.states_counted;
    const double var = std::max(0.0, sum_sq / rep.states_counted - rep.mean * rep.mean);
    rep.std_dev = std::sqrt(var);
  }
  return rep;
}

ConcentrabilityEstimate differential_concentrability(
    const TabularPolicy& pi, const EmpiricalModel& model, std::span<const double> d_pi,
    ConcentrabilityMode mode, std::int64_t n_pairs, std::uint64_t seed,
    const DivergenceFn& divergence) {
  const int n = model.n_states;
  detail::check(static_cast<int>(d_pi.size()) == n, "d_pi size mismatch");
  std::vector<double> root_ratio(n, 0.0);
  for (int s = 0; s < n; ++s) {
    const double d = divergence(pi.probs.row(s), model.pi_beta_hat.probs.row(s));
    root_ratio[s] = std::sqrt(d / std::max(model.mu_hat[s], model.eps_b));
  }
  ConcentrabilityEstimate est;
  est.estimator = mode;
  if (mode == ConcentrabilityMode::ExactTabular) {
    double acc = 0.0;
    for (int s1 = 0; s1 < n; ++s1) {
      if (d_pi[s1] == 0.0) continue;
      for (int s2 = 0; s2 < n; ++s2) {
        if (d_pi[s2] == 0.0) continue;
        const double diff = root_ratio[s1] - root_ratio[s2];
        acc += d_pi[s1] * d_pi[s2] * diff * diff;
      }
    }
    est.value = acc;
    est.n_pairs = static_cast<std::int64_t>(n) * n;
  } else {
    detail::check(n_pairs > 0, "sampled mode needs n_pairs > 0");
    Rng rng(seed);
    double acc = 0.0;
    for (std::int64_t k = 0; k < n_pairs; ++k) {
      const int s1 = rng.sample(d_pi);
      const int s2 = rng.sample(d_pi);
      const double diff = root_ratio[s1] - root_ratio[s2];
      acc += diff * diff;
    }
    est.value = acc / static_cast<double>(n_pairs);
    est.n_pairs = n_pairs;
  }
  return est;
}

void write_divergence_csv(const DivergenceReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << "state,divergence\n";
  char line[64];
  for (std::size_t s = 0; s < report.per_state.size(); ++s) {
    if (!report.counted[s]) continue;
    std::snprintf(line, sizeof(line), "%zu,%.12g\n", s, report.per_state[s]);
    out << line;
  }
  if (!out) throw RlabError("write failed: " + path);
}

DivergenceReport read_divergence_csv(const std::string& path, int n_states) {
  std::ifstream in(path);
  if (!in) throw RlabError("cannot open csv: " + path);
  std::string line;
  detail::check(static_cast<bool>(std::getline(in, line)), "empty csv");
  DivergenceReport rep;
  rep.per_state.assign(n_states, 0.0);
  rep.counted.assign(n_states, 0);
  double sum = 0.0, sum_sq = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int s = 0;
    double d = 0.0;
    detail::check(std::sscanf(line.c_str(), "%d,%lf", &s, &d) == 2, "bad csv row: " + line);
    detail::check(s >= 0 && s < n_states, "csv state out of range");
    rep.per_state[s] = d;
    rep.counted[s] = 1;
    rep.states_counted += 1;
    sum += d;
    sum_sq += d * d;
    rep.max = std::max(rep.max, d);
  }
  if (rep.states_counted > 0) {
    rep.mean = sum / rep.states_counted;
    rep.std_dev = std::sqrt(std::max(0.0, sum_sq / rep.states_counted - rep.mean * rep.mean));
  }
  return rep;
}

void write_audit_summary_json(const DivergenceReport& report,
                              const ConcentrabilityEstimate& cdiff, const std::string& path) {
  nlohmann::ordered_json j;
  j["states_counted"] = report.states_counted;
  j["std"] = report.std_dev;
  j["max"] = report.max;
  j["mean"] = report.mean;
  j["c_diff"] = cdiff.value;
  j["c_diff_estimator"] =
      cdiff.estimator == ConcentrabilityMode::ExactTabular ? "exact_tabular" : "sampled_pairs";
  j["c_diff_pairs"] = cdiff.n_pairs;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace rlab
