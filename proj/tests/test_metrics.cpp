#include <doctest.h>

#include <filesystem>
#include <numeric>

#include "rlab/dp.hpp"
#include "rlab/metrics.hpp"
#include "test_util.hpp"

using namespace rlab;

TEST_CASE("d_cql matches hand-computed values") {
  const std::vector<double> half = {0.5, 0.5};
  CHECK(d_cql(half, half) == 0.0);
  CHECK(d_cql(std::vector<double>{1.0, 0.0}, half) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d_cql(std::vector<double>{0.9, 0.1}, half) == doctest::Approx(0.64).epsilon(1e-12));
  CHECK_THROWS_WITH_AS(d_cql(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0, 0.0}),
                       doctest::Contains("DivisionBySupportGap"), RlabError);
}

TEST_CASE("d_cql equals the chi-square style sum and is a divergence") {
  Rng rng(31);
  for (int rep = 0; rep < 2000; ++rep) {
    const int n = 2 + rng.next_below(6);
    const std::vector<double> p = testutil::random_simplex(rng, n);
    const std::vector<double> q = testutil::random_simplex(rng, n);
    const double d = d_cql(p, q);
    double direct = 0.0;
    for (int i = 0; i < n; ++i) direct += p[i] * (p[i] / q[i] - 1.0);
    CHECK(std::abs(d - direct) <= 1e-12 * (1.0 + std::abs(direct)));
    CHECK(d >= 0.0);
    CHECK(d_cql(p, p) <= 1e-12);
    if (testutil::total_variation(p, q) > 1e-4) CHECK(d > 0.0);
  }
}

namespace {

EmpiricalModel two_state_model(const std::vector<double>& mu,
                               const std::vector<std::vector<double>>& pb) {
  const int n = static_cast<int>(mu.size());
  const int na = static_cast<int>(pb[0].size());
  EmpiricalModel m;
  m.n_states = n;
  m.n_actions = na;
  m.eps_b = 1e-4;
  m.mu_hat = mu;
  m.pi_beta_hat = TabularPolicy::uniform(n, na);
  m.counts.assign(static_cast<std::size_t>(n) * na, 1);
  m.state_counts.assign(n, static_cast<std::uint32_t>(na));
  m.support.assign(static_cast<std::size_t>(n) * na, 1);
  m.empirical_transition.assign(static_cast<std::size_t>(n) * na * n, 0.0);
  m.empirical_reward = StateActionTable(n, na, 0.0);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      m.pi_beta_hat.probs(s, a) = pb[s][a];
      m.empirical_transition[(static_cast<std::size_t>(s) * na + a) * n + s] = 1.0;
    }
  }
  return m;
}

}  // namespace

TEST_CASE("per-state divergence reports") {
  SUBCASE("pi equal to the estimate gives an all-zero report") {
    Rng rng(3);
    const EmpiricalModel m = testutil::random_full_support_model(rng, 6, 4);
    const DivergenceReport rep = per_state_divergence(m.pi_beta_hat, m);
    CHECK(rep.states_counted == 6);
    CHECK(rep.std_dev == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rep.max <= 1e-12);
  }
  SUBCASE("one-hot against uniform over 5 actions is 4 everywhere") {
    const int n = 7, na = 5;
    std::vector<std::vector<double>> pb(n, std::vector<double>(na, 0.2));
    std::vector<double> mu(n, 1.0 / n);
    const EmpiricalModel m = two_state_model(mu, pb);
    TabularPolicy onehot{StateActionTable(n, na, 0.0)};
    for (int s = 0; s < n; ++s) onehot.probs(s, 2) = 1.0;
    const DivergenceReport rep = per_state_divergence(onehot, m);
    CHECK(rep.mean == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.max == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rep.std_dev == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("states without visits are excluded and counted") {
    EmpiricalModel m = two_state_model({0.5, 0.5, 0.0}, {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}});
    TabularPolicy pi = TabularPolicy::uniform(3, 2);
    pi.probs(2, 0) = 1.0;
    pi.probs(2, 1) = 0.0;  // would diverge, but state 2 is unvisited
    const DivergenceReport rep = per_state_divergence(pi, m);
    CHECK(rep.states_counted == 2);
    CHECK(rep.max <= 1e-12);
    CHECK_FALSE(rep.counted[2]);
  }
}

TEST_CASE("kl hook behaves as a divergence too") {
  Rng rng(9);
  for (int rep = 0; rep < 200; ++rep) {
    const std::vector<double> p = testutil::random_simplex(rng, 4);
    const std::vector<double> q = testutil::random_simplex(rng, 4);
    CHECK(kl_divergence(p, q) >= 0.0);
    CHECK(kl_divergence(p, p) <= 1e-12);
  }
}

TEST_CASE("differential concentrability matches pairwise fixtures") {
  const std::vector<double> d_pi = {0.5, 0.5};
  SUBCASE("D = (1, 0) with uniform density gives 1") {
    EmpiricalModel m = two_state_model({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
    TabularPolicy pi = TabularPolicy::uniform(2, 2);
    pi.probs(0, 0) = 1.0;  // D(s0) = 1 against the uniform estimate
    pi.probs(0, 1) = 0.0;
    const ConcentrabilityEstimate c =
        differential_concentrability(pi, m, d_pi, ConcentrabilityMode::ExactTabular);
    CHECK(c.value == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("D = (4, 0) with uniform density gives 4") {
    // One-hot against uniform over 5 actions puts D(s0) = 4.
    EmpiricalModel m = two_state_model(
        {0.5, 0.5}, {{0.2, 0.2, 0.2, 0.2, 0.2}, {0.2, 0.2, 0.2, 0.2, 0.2}});
    TabularPolicy pi = TabularPolicy::uniform(2, 5);
    for (int a = 0; a < 5; ++a) pi.probs(0, a) = a == 0 ? 1.0 : 0.0;
    const ConcentrabilityEstimate c =
        differential_concentrability(pi, m, d_pi, ConcentrabilityMode::ExactTabular);
    CHECK(c.value == doctest::Approx(4.0).epsilon(1e-6));
  }
  SUBCASE("constant D over mu gives zero") {
    EmpiricalModel m = two_state_model({0.5, 0.5}, {{0.5, 0.5}, {0.5, 0.5}});
    TabularPolicy pi = TabularPolicy::uniform(2, 2);
    const ConcentrabilityEstimate c =
        differential_concentrability(pi, m, d_pi, ConcentrabilityMode::ExactTabular);
    CHECK(c.value == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("differential concentrability is invariant to state relabeling") {
  Rng rng(77);
  const int n = 8, na = 4;
  const EmpiricalModel m = testutil::random_full_support_model(rng, n, na);
  const TabularPolicy pi = testutil::random_policy(rng, n, na);
  std::vector<double> d_pi = testutil::random_simplex(rng, n);
  const double base =
      differential_concentrability(pi, m, d_pi, ConcentrabilityMode::ExactTabular).value;

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.next_below(i + 1)]);

  EmpiricalModel pm = m;
  TabularPolicy ppi = pi;
  std::vector<double> pd(n);
  for (int s = 0; s < n; ++s) {
    pd[perm[s]] = d_pi[s];
    pm.mu_hat[perm[s]] = m.mu_hat[s];
    for (int a = 0; a < na; ++a) {
      pm.pi_beta_hat.probs(perm[s], a) = m.pi_beta_hat.probs(s, a);
      ppi.probs(perm[s], a) = pi.probs(s, a);
    }
  }
  const double permuted =
      differential_concentrability(ppi, pm, pd, ConcentrabilityMode::ExactTabular).value;
  CHECK(permuted == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("sampled pairs agree with the exact value within three standard errors") {
  Rng rng(123);
  const int n = 10, na = 4;
  const EmpiricalModel m = testutil::random_full_support_model(rng, n, na);
  const TabularPolicy pi = testutil::random_policy(rng, n, na);
  const std::vector<double> d_pi = testutil::random_simplex(rng, n);
  const double exact =
      differential_concentrability(pi, m, d_pi, ConcentrabilityMode::ExactTabular).value;

  // Exact first and second moments of the per-pair term give the exact SE.
  std::vector<double> ratio(n);
  for (int s = 0; s < n; ++s) {
    ratio[s] =
        std::sqrt(d_cql(pi.probs.row(s), m.pi_beta_hat.probs.row(s)) /
                  std::max(m.mu_hat[s], m.eps_b));
  }
  double m2 = 0.0;
  for (int s1 = 0; s1 < n; ++s1) {
    for (int s2 = 0; s2 < n; ++s2) {
      const double t = (ratio[s1] - ratio[s2]) * (ratio[s1] - ratio[s2]);
      m2 += d_pi[s1] * d_pi[s2] * t * t;
    }
  }
  const std::int64_t pairs = 100000;
  const double se = std::sqrt(std::max(0.0, m2 - exact * exact) / static_cast<double>(pairs));
  const ConcentrabilityEstimate sampled = differential_concentrability(
      pi, m, d_pi, ConcentrabilityMode::SampledPairs, pairs, 777);
  CHECK(std::abs(sampled.value - exact) <= 3.0 * se);
}

TEST_CASE("occupancy fixtures") {
  SUBCASE("single absorbing state is one-hot") {
    const TabularMdp m = testutil::chain_mdp({{0}}, {{0}}, 0.9, {});
    const std::vector<double> d = occupancy(m, TabularPolicy::uniform(1, 1), 1e-12);
    CHECK(d[0] == doctest::Approx(1.0));
  }
  SUBCASE("two-state deterministic cycle from state 0") {
    const double gamma = 0.7;
    const TabularMdp m = testutil::chain_mdp({{1}, {0}}, {{0}, {0}}, gamma, {});
    const std::vector<double> d = occupancy(m, TabularPolicy::uniform(2, 1), 1e-12);
    CHECK(d[0] == doctest::Approx(1.0 / (1.0 + gamma)).epsilon(1e-9));
    CHECK(d[1] == doctest::Approx(gamma / (1.0 + gamma)).epsilon(1e-9));
  }
  SUBCASE("output always sums to one") {
    Rng rng(4);
    const TabularMdp maze = build_gridworld(builtin_layout(kDidacticLayoutName), 0.99).mdp;
    const TabularPolicy pi = testutil::random_policy(rng, maze.n_states, maze.n_actions);
    const std::vector<double> d = occupancy(maze, pi, 1e-10);
    const double sum = std::accumulate(d.begin(), d.end(), 0.0);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("occupancy of the optimal policy concentrates on the goal corridor") {
  const GridWorld gw = build_gridworld(builtin_layout(kDidacticLayoutName), 0.99);
  const TabularPolicy greedy = greedy_policy(gw.mdp, value_iteration(gw.mdp, 1e-10));
  const std::vector<double> d = occupancy(gw.mdp, greedy, 1e-10);
  // The shortest start-to-goal path has length 35; a policy that follows it
  // puts essentially all its discounted visitation within that distance.
  const std::vector<int> dist = gw.goal_distance();
  double corridor = 0.0;
  for (int s = 0; s < gw.mdp.n_states; ++s) {
    if (dist[s] >= 0 && dist[s] <= 35) corridor += d[s];
  }
  CHECK(corridor >= 0.999);
}

TEST_CASE("divergence report round-trips through CSV") {
  Rng rng(15);
  const EmpiricalModel m = testutil::random_full_support_model(rng, 9, 3);
  const TabularPolicy pi = testutil::random_policy(rng, 9, 3);
  const DivergenceReport rep = per_state_divergence(pi, m);
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "rlab_test_metrics";
  fs::create_directories(dir);
  const std::string path = (dir / "report.csv").string();
  write_divergence_csv(rep, path);
  const DivergenceReport back = read_divergence_csv(path, 9);
  CHECK(back.states_counted == rep.states_counted);
  CHECK(back.std_dev == doctest::Approx(rep.std_dev).epsilon(1e-9));
  CHECK(back.max == doctest::Approx(rep.max).epsilon(1e-9));
  CHECK(back.mean == doctest::Approx(rep.mean).epsilon(1e-9));
}
