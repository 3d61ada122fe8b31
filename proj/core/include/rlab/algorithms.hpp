#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rlab/dataset.hpp"
#include "rlab/dp.hpp"

namespace rlab {

struct CqlConfig {
  double alpha = 1.0;      // conservatism weight
  double gamma = 0.99;
  int n_iters = 500;
  double beta_ent = 0.001;  // softmax improvement temperature
  double lr_q = 0.5;        // gradient variant step scale (fraction of 1/max weight)
  double tol = 1e-8;        // stop once successive Q tables differ by less

  double q_cap() const { return value_cap(gamma); }
};

struct RedsConfig : CqlConfig {
  double tau = 0.001;      // advantage temperature for the rho fit
  double clip_lo = -10.0;  // exponent clipping
  double clip_hi = 5.0;
  double pi_weight = 0.5;  // weight on pi in the push-down mixture

  RedsConfig() { alpha = 0.005; }
};

// Learned reweighting distribution. Rows are categoricals restricted to the
// dataset support; states never observed fall back to a copy of pi_beta_hat
// and are flagged here.
struct RhoTable {
  StateActionTable probs;
  std::vector<int> fallback_states;
};

struct Checkpoint {
  int iteration = 0;
  QTable q;
  TabularPolicy pi;
  std::optional<RhoTable> rho;
  std::optional<double> eval_success;
};

// Boltzmann policy pi(a|s) proportional to exp(Q(s,a)/beta_ent), computed
// with max subtraction. beta_ent -> 0 approaches the greedy argmax.
TabularPolicy soft_policy_improvement(const QTable& q, double beta_ent);

// Self-consistent softmax response against the conservatism penalty: the
// unique per-state fixed point of pi = softmax((B - penalty(pi)) / beta_ent),
// where penalty(pi) = alpha ((w pi + (1-w) rho) / pi_beta_hat - 1) (rho may
// be null for the plain ratio penalty). This is the maximizer of
// <B, pi> - alpha w/2 sum_a pi(a)^2/pi_beta(a) - (const terms) + beta H(pi),
// so the improvement step lands on its equilibrium instead of oscillating
// around it. Out-of-support actions enter as constants at -q_cap; states
// without data respond uniformly.
TabularPolicy penalized_softmax_response(const QTable& backup, const EmpiricalModel& model,
                                         const RhoTable* rho, const RedsConfig& cfg);

// Empirical Bellman backup r_hat + gamma * E[V_bar] with V_bar from q_target
// under pi. No conservatism term.
QTable empirical_backup(const QTable& q_target, const TabularPolicy& pi,
                        const EmpiricalModel& model, double gamma);

// Penalty alpha * (pi / pi_beta_hat - 1) per in-support entry.
StateActionTable cql_penalty(const TabularPolicy& pi, const EmpiricalModel& model, double alpha);

// One conservative backup: B^pi q_target minus the ratio penalty, clamped to
// +-q_cap. When alpha > 0, out-of-support entries have no data anchor and an
// unboundedly negative objective direction, so they are pinned at -q_cap.
// At alpha == 0 this is the plain empirical backup.
QTable cql_backup_closed_form(const QTable& q_target, const TabularPolicy& pi,
                              const EmpiricalModel& model, const CqlConfig& cfg);

// Gradient of the conservative objective
//   alpha * sum_s mu(s) [ <pi(.|s), Q(s,.)> - <pi_beta(.|s), Q(s,.)> ]
//   + 1/2 sum_{s,a} mu(s) pi_beta(a|s) (Q(s,a) - B^pi q_target(s,a))^2
// with respect to each tabular Q entry, the TD target held fixed. The
// gradient vanishes exactly at the closed-form backup (before clamping).
StateActionTable cql_objective_gradient(const QTable& q, const QTable& q_target,
                                        const TabularPolicy& pi, const EmpiricalModel& model,
                                        const CqlConfig& cfg);
double cql_objective(const QTable& q, const QTable& q_target, const TabularPolicy& pi,
                     const EmpiricalModel& model, const CqlConfig& cfg);

// Advantage A(s,a) = Q(s,a) - V(s) with V(s) = E_{a~pi}[Q(s,a)].
StateActionTable advantages(const QTable& q, const TabularPolicy& pi);

// Weighted-MLE fit of the reweighting distribution:
//   rho(a|s) ∝ pi_beta_hat(a|s) * exp(clip(-A(s,a)/tau, clip_lo, clip_hi))
// restricted to the dataset support. Closed form by default; the iterative
// mode runs projected gradient ascent on the same objective as a cross-check.
RhoTable fit_rho(const EmpiricalModel& model, const QTable& q, const TabularPolicy& pi,
                 const RedsConfig& cfg);
RhoTable fit_rho_iterative(const EmpiricalModel& model, const QTable& q, const TabularPolicy& pi,
                           const RedsConfig& cfg, int steps = 4000, double lr = 0.5);

// pi_re = pi_weight * pi + (1 - pi_weight) * rho.
TabularPolicy mixture_pi_re(const TabularPolicy& pi, const RhoTable& rho, double pi_weight = 0.5);

// Penalty alpha * ((w pi + (1-w) rho) / pi_beta_hat - 1) per in-support entry.
StateActionTable reds_penalty_rho_form(const TabularPolicy& pi, const RhoTable& rho,
                                       const EmpiricalModel& model, const RedsConfig& cfg);

// Same penalty computed without materializing rho: the reweighted term
// pi_beta * g is reconstructed from the advantages as
// pi_beta(a|s) w(s,a) / Z(s) with w = exp(clip(-A/tau)). Identical to the
// rho-form whenever rho is the exact normalized fit.
StateActionTable reds_penalty_from_advantages(const QTable& q, const TabularPolicy& pi,
                                              const EmpiricalModel& model, const RedsConfig& cfg);

// Literal per-state modification with the shorthand g(a|s) = g(tau pi(a|s)),
// g(x) = 1/x:  penalty = alpha (pi + pi_beta g - 2 pi_beta) / (2 pi_beta).
// This is the unsubsumed form; it fixes the mixture weight at 1/2.
StateActionTable reds_penalty_g_form(const TabularPolicy& pi, const EmpiricalModel& model,
                                     const RedsConfig& cfg);

QTable reds_backup_closed_form(const QTable& q_target, const TabularPolicy& pi,
                               const RhoTable& rho, const EmpiricalModel& model,
                               const RedsConfig& cfg);

StateActionTable reds_objective_gradient(const QTable& q, const QTable& q_target,
                                         const TabularPolicy& pi, const RhoTable& rho,
                                         const EmpiricalModel& model, const RedsConfig& cfg);
double reds_objective(const QTable& q, const QTable& q_target, const TabularPolicy& pi,
                      const RhoTable& rho, const EmpiricalModel& model, const RedsConfig& cfg);

// Plain gradient descent on the conservative objective from `init`, the TD
// target held fixed. Passing rho selects the mixture objective. States the
// dataset never weights (and, for alpha > 0, out-of-support entries) carry no
// gradient and are pinned to the closed form. This is the verification oracle
// behind the *_grad training paths.
QTable minimize_objective_by_gradient(const QTable& init, const QTable& q_target,
                                      const TabularPolicy& pi, const RhoTable* rho,
                                      const EmpiricalModel& model, const RedsConfig& cfg,
                                      int max_steps = 20000);

enum class Method { Bc, Awr, CqlClosed, CqlGrad, RedsClosed, RedsGrad };
std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct TrainOptions {
  int eval_every = 10;     // evaluate a checkpoint each k iterations; 0 = never
  int eval_episodes = 20;
  int eval_horizon = 400;
};

// Offline training against the empirical model. Iterative methods alternate
// rho fit (reds only), the empirical backup, the self-consistent policy
// response and the conservative Q write-back, until the Q table moves less
// than cfg.tol or cfg.n_iters is reached, emitting one checkpoint per
// iteration. bc returns pi_beta_hat; awr reweights it by
// clipped exponentiated advantages of its own evaluation. Evaluation rollouts
// run on mdp_for_eval with substreams of `seed`; everything else is exact, so
// results are deterministic given (method, model, cfg, seed).
std::vector<Checkpoint> train(Method method, const EmpiricalModel& model,
                              const TabularMdp& mdp_for_eval, const RedsConfig& cfg,
                              std::uint64_t seed, const TrainOptions& opts = {});

// AWR temperature shares RedsConfig.tau and the clipping window.
TabularPolicy awr_policy(const EmpiricalModel& model, const TabularMdp& empirical,
                         const RedsConfig& cfg);

void save_checkpoint_json(const Checkpoint& ck, const RedsConfig& cfg, Method method,
                          const std::string& path);
Checkpoint load_checkpoint_json(const std::string& path);

}  // namespace rlab
