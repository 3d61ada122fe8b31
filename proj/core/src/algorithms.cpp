#include "rlab/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "rlab/rng.hpp"

namespace rlab {

std::string to_string(Method m) {
  switch (m) {
    case Method::Bc: return "bc";
    case Method::Awr: return "awr";
    case Method::CqlClosed: return "cql_closed";
    case Method::CqlGrad: return "cql_grad";
    case Method::RedsClosed: return "reds_closed";
    case Method::RedsGrad: return "reds_grad";
  }
  throw RlabError("bad method");
}

Method method_from_string(const std::string& s) {
  if (s == "bc") return Method::Bc;
  if (s == "awr") return Method::Awr;
  if (s == "cql" || s == "cql_closed") return Method::CqlClosed;
  if (s == "cql_grad") return Method::CqlGrad;
  if (s == "reds" || s == "reds_closed") return Method::RedsClosed;
  if (s == "reds_grad") return Method::RedsGrad;
  throw RlabError("unknown method: " + s);
}

TabularPolicy soft_policy_improvement(const QTable& q, double beta_ent) {
  detail::check(beta_ent > 0.0, "beta_ent must be positive");
  TabularPolicy pi{StateActionTable(q.n_states(), q.n_actions(), 0.0)};
  for (int s = 0; s < q.n_states(); ++s) {
    const auto row = q.row(s);
    const double m = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (int a = 0; a < q.n_actions(); ++a) {
      const double e = std::exp((row[a] - m) / beta_ent);
      pi.probs(s, a) = e;
      z += e;
    }
    for (int a = 0; a < q.n_actions(); ++a) pi.probs(s, a) /= z;
  }
  return pi;
}

namespace {

// Root of beta*u + kappa*exp(u) = r in u = ln(pi), by monotone Newton.
double log_component_root(double beta, double kappa, double r) {
  if (kappa <= 0.0) return r / beta;
  double u = std::min(r / beta, std::log(std::max(1e-12, r / kappa)));
  if (!std::isfinite(u)) u = r / beta;
  u = std::min(u, 60.0);
  for (int it = 0; it < 80; ++it) {
    const double e = std::exp(u);
    const double h = beta * u + kappa * e - r;
    const double hp = beta + kappa * e;
    const double step = h / hp;
    u -= step;
    if (std::abs(step) < 1e-14) break;
  }
  return u;
}

}  // namespace

TabularPolicy penalized_softmax_response(const QTable& backup, const EmpiricalModel& model,
                                         const RhoTable* rho, const RedsConfig& cfg) {
  const int n = model.n_states, na = model.n_actions;
  const double beta = cfg.beta_ent;
  detail::check(beta > 0.0, "beta_ent must be positive");
  const double w_pi = rho ? cfg.pi_weight : 1.0;
  TabularPolicy pi{StateActionTable(n, na, 0.0)};
  std::vector<double> b(na), kappa(na), u(na);
  for (int s = 0; s < n; ++s) {
    if (model.mu_hat[s] == 0.0) {
      for (int a = 0; a < na; ++a) pi.probs(s, a) = 1.0 / na;
      continue;
    }
    for (int a = 0; a < na; ++a) {
      if (cfg.alpha == 0.0) {
        b[a] = backup(s, a);
        kappa[a] = 0.0;
      } else if (!model.in_support(s, a)) {
        b[a] = -cfg.q_cap();
        kappa[a] = 0.0;
      } else {
        const double pb = model.raw_conditional(s, a);
        const double rho_term = rho ? (1.0 - w_pi) * rho->probs(s, a) / pb : 0.0;
        b[a] = backup(s, a) + cfg.alpha * (1.0 - rho_term);
        kappa[a] = cfg.alpha * w_pi / pb;
      }
    }
    // Outer bisection on the log-normalizer lambda; sum exp(u(lambda)) is
    // strictly decreasing in lambda. The penalty slope shifts lambda by up
    // to max(kappa)/beta, so the bracket is grown until it straddles 1.
    const auto mass_at = [&](double lambda) {
      double sum = 0.0;
      for (int a = 0; a < na; ++a) {
        u[a] = log_component_root(beta, kappa[a], b[a] - beta * lambda);
        sum += std::exp(u[a]);
      }
      return sum;
    };
    double m = b[0];
    for (int a = 1; a < na; ++a) m = std::max(m, b[a]);
    double hi = m / beta + std::log(static_cast<double>(na)) + 1.0;
    double lo = hi - 1.0;
    for (double step = 1.0; mass_at(lo) < 1.0 && step < 1e18; step *= 2.0) lo -= step;
    for (double step = 1.0; mass_at(hi) > 1.0 && step < 1e18; step *= 2.0) hi += step;
    for (int it = 0; it < 200; ++it) {
      const double lambda = 0.5 * (lo + hi);
      if (mass_at(lambda) > 1.0) {
        lo = lambda;
      } else {
        hi = lambda;
      }
      if (hi - lo < 1e-13 * std::max(1.0, std::abs(lambda))) break;
    }
    mass_at(hi);
    double norm = 0.0;
    for (int a = 0; a < na; ++a) {
      pi.probs(s, a) = std::exp(u[a]);
      norm += pi.probs(s, a);
    }
    for (int a = 0; a < na; ++a) pi.probs(s, a) /= norm;
  }
  return pi;
}

QTable empirical_backup(const QTable& q_target, const TabularPolicy& pi,
                        const EmpiricalModel& model, double gamma) {
  const int n = model.n_states, na = model.n_actions;
  std::vector<double> v(n, 0.0);
  for (int s = 0; s < n; ++s) {
    double acc = 0.0;
    for (int a = 0; a < na; ++a) acc += pi.probs(s, a) * q_target(s, a);
    v[s] = acc;
  }
  QTable out(n, na);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      const auto t = model.next_dist(s, a);
      double ev = 0.0;
      for (int s2 = 0; s2 < n; ++s2) {
        if (t[s2] != 0.0) ev += t[s2] * v[s2];
      }
      out(s, a) = model.empirical_reward(s, a) + gamma * ev;
    }
  }
  return out;
}

StateActionTable cql_penalty(const TabularPolicy& pi, const EmpiricalModel& model, double alpha) {
  StateActionTable pen(model.n_states, model.n_actions, 0.0);
  if (alpha == 0.0) return pen;
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      pen(s, a) = alpha * (pi.probs(s, a) / model.raw_conditional(s, a) - 1.0);
    }
  }
  return pen;
}

namespace {

double clamp_cap(double x, double cap) { return std::min(cap, std::max(-cap, x)); }

QTable apply_penalty(const QTable& backup, const StateActionTable& pen,
                     const EmpiricalModel& model, double alpha, double cap) {
  QTable out(model.n_states, model.n_actions);
  for (int s = 0; s < model.n_states; ++s) {
    // States the dataset never weights (terminals and unvisited states)
    // carry no objective gradient at all; their rows stay neutral instead
    // of being pushed to the cap, keeping terminal values at zero.
    if (model.mu_hat[s] == 0.0) {
      for (int a = 0; a < model.n_actions; ++a) out(s, a) = 0.0;
      continue;
    }
    for (int a = 0; a < model.n_actions; ++a) {
      if (alpha > 0.0 && !model.in_support(s, a)) {
        out(s, a) = -cap;
      } else {
        out(s, a) = clamp_cap(backup(s, a) - pen(s, a), cap);
      }
    }
  }
  return out;
}

}  // namespace

QTable cql_backup_closed_form(const QTable& q_target, const TabularPolicy& pi,
                              const EmpiricalModel& model, const CqlConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  const StateActionTable pen = cql_penalty(pi, model, cfg.alpha);
  return apply_penalty(backup, pen, model, cfg.alpha, cfg.q_cap());
}

StateActionTable cql_objective_gradient(const QTable& q, const QTable& q_target,
                                        const TabularPolicy& pi, const EmpiricalModel& model,
                                        const CqlConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  StateActionTable grad(model.n_states, model.n_actions, 0.0);
  for (int s = 0; s < model.n_states; ++s) {
    const double mu = model.mu_hat[s];
    if (mu == 0.0) continue;
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      grad(s, a) = mu * (cfg.alpha * (pi.probs(s, a) - pb) + pb * (q(s, a) - backup(s, a)));
    }
  }
  return grad;
}

double cql_objective(const QTable& q, const QTable& q_target, const TabularPolicy& pi,
                     const EmpiricalModel& model, const CqlConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  double obj = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    const double mu = model.mu_hat[s];
    if (mu == 0.0) continue;
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      const double td = q(s, a) - backup(s, a);
      obj += mu * (cfg.alpha * (pi.probs(s, a) - pb) * q(s, a) + 0.5 * pb * td * td);
    }
  }
  return obj;
}

StateActionTable advantages(const QTable& q, const TabularPolicy& pi) {
  StateActionTable adv(q.n_states(), q.n_actions(), 0.0);
  for (int s = 0; s < q.n_states(); ++s) {
    double v = 0.0;
    for (int a = 0; a < q.n_actions(); ++a) v += pi.probs(s, a) * q(s, a);
    for (int a = 0; a < q.n_actions(); ++a) adv(s, a) = q(s, a) - v;
  }
  return adv;
}

namespace {

// exp(clip(-A/tau)) weights, zeroed off-support.
StateActionTable rho_weights(const EmpiricalModel& model, const QTable& q,
                             const TabularPolicy& pi, const RedsConfig& cfg) {
  const StateActionTable adv = advantages(q, pi);
  StateActionTable w(model.n_states, model.n_actions, 0.0);
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      if (!model.in_support(s, a)) continue;
      const double arg = std::clamp(-adv(s, a) / cfg.tau, cfg.clip_lo, cfg.clip_hi);
      w(s, a) = std::exp(arg);
    }
  }
  return w;
}

}  // namespace

RhoTable fit_rho(const EmpiricalModel& model, const QTable& q, const TabularPolicy& pi,
                 const RedsConfig& cfg) {
  detail::check(cfg.tau > 0.0, "tau must be positive");
  detail::check(cfg.clip_lo < cfg.clip_hi, "clip bounds out of order");
  const StateActionTable w = rho_weights(model, q, pi, cfg);
  RhoTable rho{StateActionTable(model.n_states, model.n_actions, 0.0), {}};
  for (int s = 0; s < model.n_states; ++s) {
    double z = 0.0;
    for (int a = 0; a < model.n_actions; ++a) {
      z += model.pi_beta_hat.probs(s, a) * w(s, a);
    }
    if (z == 0.0) {
      // No observed action at this state: copy pi_beta_hat and flag it.
      for (int a = 0; a < model.n_actions; ++a) {
        rho.probs(s, a) = model.pi_beta_hat.probs(s, a);
      }
      rho.fallback_states.push_back(s);
      continue;
    }
    for (int a = 0; a < model.n_actions; ++a) {
      rho.probs(s, a) = model.pi_beta_hat.probs(s, a) * w(s, a) / z;
    }
  }
  return rho;
}

RhoTable fit_rho_iterative(const EmpiricalModel& model, const QTable& q, const TabularPolicy& pi,
                           const RedsConfig& cfg, int steps, double lr) {
  const StateActionTable w = rho_weights(model, q, pi, cfg);
  RhoTable rho{StateActionTable(model.n_states, model.n_actions, 0.0), {}};
  std::vector<double> logits(model.n_actions), probs(model.n_actions);
  for (int s = 0; s < model.n_states; ++s) {
    std::vector<double> coef(model.n_actions, 0.0);
    double total = 0.0;
    int support_size = 0;
    for (int a = 0; a < model.n_actions; ++a) {
      coef[a] = model.pi_beta_hat.probs(s, a) * w(s, a);
      total += coef[a];
      support_size += model.in_support(s, a) ? 1 : 0;
    }
    if (support_size == 0) {
      for (int a = 0; a < model.n_actions; ++a) rho.probs(s, a) = model.pi_beta_hat.probs(s, a);
      rho.fallback_states.push_back(s);
      continue;
    }
    // Gradient ascent on sum_a coef[a] log softmax(logits)[a] over the
    // support; the off-support logits are held at -inf.
    std::fill(logits.begin(), logits.end(), 0.0);
    for (int it = 0; it < steps; ++it) {
      double z = 0.0;
      for (int a = 0; a < model.n_actions; ++a) {
        probs[a] = model.in_support(s, a) ? std::exp(logits[a]) : 0.0;
        z += probs[a];
      }
      for (int a = 0; a < model.n_actions; ++a) probs[a] /= z;
      for (int a = 0; a < model.n_actions; ++a) {
        if (!model.in_support(s, a)) continue;
        logits[a] += lr / total * (coef[a] - total * probs[a]);
      }
    }
    double z = 0.0;
    for (int a = 0; a < model.n_actions; ++a) {
      probs[a] = model.in_support(s, a) ? std::exp(logits[a]) : 0.0;
      z += probs[a];
    }
    for (int a = 0; a < model.n_actions; ++a) rho.probs(s, a) = probs[a] / z;
  }
  return rho;
}

TabularPolicy mixture_pi_re(const TabularPolicy& pi, const RhoTable& rho, double pi_weight) {
  detail::check(pi_weight >= 0.0 && pi_weight <= 1.0, "pi_weight must lie in [0,1]");
  TabularPolicy out{StateActionTable(pi.n_states(), pi.n_actions(), 0.0)};
  for (int s = 0; s < pi.n_states(); ++s) {
    for (int a = 0; a < pi.n_actions(); ++a) {
      out.probs(s, a) = pi_weight * pi.probs(s, a) + (1.0 - pi_weight) * rho.probs(s, a);
    }
  }
  return out;
}

StateActionTable reds_penalty_rho_form(const TabularPolicy& pi, const RhoTable& rho,
                                       const EmpiricalModel& model, const RedsConfig& cfg) {
  StateActionTable pen(model.n_states, model.n_actions, 0.0);
  if (cfg.alpha == 0.0) return pen;
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      const double mix = cfg.pi_weight * pi.probs(s, a) + (1.0 - cfg.pi_weight) * rho.probs(s, a);
      pen(s, a) = cfg.alpha * (mix / model.raw_conditional(s, a) - 1.0);
    }
  }
  return pen;
}

StateActionTable reds_penalty_from_advantages(const QTable& q, const TabularPolicy& pi,
                                              const EmpiricalModel& model,
                                              const RedsConfig& cfg) {
  const StateActionTable w = rho_weights(model, q, pi, cfg);
  StateActionTable pen(model.n_states, model.n_actions, 0.0);
  if (cfg.alpha == 0.0) return pen;
  for (int s = 0; s < model.n_states; ++s) {
    double z = 0.0;
    for (int a = 0; a < model.n_actions; ++a) z += model.raw_conditional(s, a) * w(s, a);
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      const double reweighted = z > 0.0 ? pb * (w(s, a) / z) : pb;
      pen(s, a) = cfg.alpha *
                  ((pi.probs(s, a) + reweighted - 2.0 * pb) / (2.0 * pb));
    }
  }
  return pen;
}

StateActionTable reds_penalty_g_form(const TabularPolicy& pi, const EmpiricalModel& model,
                                     const RedsConfig& cfg) {
  StateActionTable pen(model.n_states, model.n_actions, 0.0);
  if (cfg.alpha == 0.0) return pen;
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      const double g = 1.0 / (cfg.tau * pi.probs(s, a));
      pen(s, a) = cfg.alpha * ((pi.probs(s, a) + pb * g - 2.0 * pb) / (2.0 * pb));
    }
  }
  return pen;
}

QTable reds_backup_closed_form(const QTable& q_target, const TabularPolicy& pi,
                               const RhoTable& rho, const EmpiricalModel& model,
                               const RedsConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  const StateActionTable pen = reds_penalty_rho_form(pi, rho, model, cfg);
  return apply_penalty(backup, pen, model, cfg.alpha, cfg.q_cap());
}

StateActionTable reds_objective_gradient(const QTable& q, const QTable& q_target,
                                         const TabularPolicy& pi, const RhoTable& rho,
                                         const EmpiricalModel& model, const RedsConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  StateActionTable grad(model.n_states, model.n_actions, 0.0);
  for (int s = 0; s < model.n_states; ++s) {
    const double mu = model.mu_hat[s];
    if (mu == 0.0) continue;
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      const double mix = cfg.pi_weight * pi.probs(s, a) + (1.0 - cfg.pi_weight) * rho.probs(s, a);
      grad(s, a) = mu * (cfg.alpha * (mix - pb) + pb * (q(s, a) - backup(s, a)));
    }
  }
  return grad;
}

double reds_objective(const QTable& q, const QTable& q_target, const TabularPolicy& pi,
                      const RhoTable& rho, const EmpiricalModel& model, const RedsConfig& cfg) {
  const QTable backup = empirical_backup(q_target, pi, model, cfg.gamma);
  double obj = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    const double mu = model.mu_hat[s];
    if (mu == 0.0) continue;
    for (int a = 0; a < model.n_actions; ++a) {
      const double pb = model.raw_conditional(s, a);
      const double mix = cfg.pi_weight * pi.probs(s, a) + (1.0 - cfg.pi_weight) * rho.probs(s, a);
      const double td = q(s, a) - backup(s, a);
      obj += mu * (cfg.alpha * (mix - pb) * q(s, a) + 0.5 * pb * td * td);
    }
  }
  return obj;
}

TabularPolicy awr_policy(const EmpiricalModel& model, const TabularMdp& empirical,
                         const RedsConfig& cfg) {
  const Evaluation ev = policy_evaluation(empirical, model.pi_beta_hat, 1e-10);
  const StateActionTable adv = advantages(ev.q, model.pi_beta_hat);
  TabularPolicy pi{StateActionTable(model.n_states, model.n_actions, 0.0)};
  for (int s = 0; s < model.n_states; ++s) {
    double z = 0.0;
    for (int a = 0; a < model.n_actions; ++a) {
      const double arg = std::clamp(adv(s, a) / cfg.tau, cfg.clip_lo, cfg.clip_hi);
      pi.probs(s, a) = model.pi_beta_hat.probs(s, a) * std::exp(arg);
      z += pi.probs(s, a);
    }
    for (int a = 0; a < model.n_actions; ++a) pi.probs(s, a) /= z;
  }
  return pi;
}

namespace {

double max_abs_diff(const QTable& a, const QTable& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  }
  return m;
}

}  // namespace

// The step is a fraction of the inverse of the largest TD curvature
// mu(s) pi_beta(a|s).
QTable minimize_objective_by_gradient(const QTable& init, const QTable& q_target,
                                      const TabularPolicy& pi, const RhoTable* rho,
                                      const EmpiricalModel& model, const RedsConfig& cfg,
                                      int max_steps) {
  double wmax = 0.0;
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      wmax = std::max(wmax, model.mu_hat[s] * model.raw_conditional(s, a));
    }
  }
  const double lr = cfg.lr_q / wmax;
  QTable q = init;
  for (int step = 0; step < max_steps; ++step) {
    const StateActionTable grad =
        rho ? reds_objective_gradient(q, q_target, pi, *rho, model, cfg)
            : cql_objective_gradient(q, q_target, pi, model, cfg);
    double gmax = 0.0;
    for (std::size_t i = 0; i < grad.data().size(); ++i) {
      q.data()[i] -= lr * grad.data()[i];
      gmax = std::max(gmax, std::abs(grad.data()[i]));
    }
    if (gmax <= 1e-12) break;
  }
  // States without data carry no gradient; pin them to the closed form so
  // the oracle path stays comparable.
  const QTable closed = rho ? reds_backup_closed_form(q_target, pi, *rho, model, cfg)
                            : cql_backup_closed_form(q_target, pi, model, cfg);
  for (int s = 0; s < model.n_states; ++s) {
    for (int a = 0; a < model.n_actions; ++a) {
      if (model.mu_hat[s] == 0.0 || (cfg.alpha > 0.0 && !model.in_support(s, a))) {
        q(s, a) = closed(s, a);
      } else {
        q(s, a) = clamp_cap(q(s, a), cfg.q_cap());
      }
    }
  }
  return q;
}

std::vector<Checkpoint> train(Method method, const EmpiricalModel& model,
                              const TabularMdp& mdp_for_eval, const RedsConfig& cfg,
                              std::uint64_t seed, const TrainOptions& opts) {
  TabularMdp empirical = empirical_mdp(model, mdp_for_eval);
  empirical.gamma = cfg.gamma;
  std::vector<Checkpoint> checkpoints;

  auto maybe_eval = [&](Checkpoint& ck) {
    if (opts.eval_every > 0 &&
        (ck.iteration % opts.eval_every == 0 || ck.iteration == cfg.n_iters)) {
      ck.eval_success = evaluate_success_rate(mdp_for_eval, ck.pi, opts.eval_episodes,
                                              opts.eval_horizon,
                                              derive_seed(seed, ck.iteration));
    }
  };

  if (method == Method::Bc || method == Method::Awr) {
    Checkpoint ck;
    ck.iteration = 1;
    ck.pi = method == Method::Bc ? model.pi_beta_hat : awr_policy(model, empirical, cfg);
    ck.q = policy_evaluation(empirical, ck.pi, 1e-10).q;
    if (opts.eval_every > 0) {
      ck.eval_success = evaluate_success_rate(mdp_for_eval, ck.pi, opts.eval_episodes,
                                              opts.eval_horizon, derive_seed(seed, 1));
    }
    checkpoints.push_back(std::move(ck));
    return checkpoints;
  }

  const bool reds = method == Method::RedsClosed || method == Method::RedsGrad;
  const bool grad = method == Method::CqlGrad || method == Method::RedsGrad;

  QTable q(model.n_states, model.n_actions, 0.0);
  // Behavior initialization: the first conservative backup then carries no
  // penalty at any alpha, so training starts from the data rather than from
  // an alpha-scale transient.
  TabularPolicy pi = model.pi_beta_hat;
  for (int it = 1; it <= cfg.n_iters; ++it) {
    Checkpoint ck;
    ck.iteration = it;
    std::optional<RhoTable> rho;
    if (reds) rho = fit_rho(model, q, pi, cfg);
    const QTable backup = empirical_backup(q, pi, model, cfg.gamma);
    pi = penalized_softmax_response(backup, model, rho ? &*rho : nullptr, cfg);
    QTable next =
        grad ? minimize_objective_by_gradient(q, q, pi, rho ? &*rho : nullptr, model, cfg)
        : reds ? reds_backup_closed_form(q, pi, *rho, model, cfg)
               : cql_backup_closed_form(q, pi, model, cfg);
    const double delta = max_abs_diff(next, q);
    q = std::move(next);
    ck.q = q;
    ck.pi = pi;
    ck.rho = std::move(rho);
    maybe_eval(ck);
    checkpoints.push_back(std::move(ck));
    if (delta < cfg.tol) break;
  }
  if (opts.eval_every > 0 && !checkpoints.back().eval_success) {
    Checkpoint& last = checkpoints.back();
    last.eval_success = evaluate_success_rate(mdp_for_eval, last.pi, opts.eval_episodes,
                                              opts.eval_horizon,
                                              derive_seed(seed, last.iteration));
  }
  return checkpoints;
}

void save_checkpoint_json(const Checkpoint& ck, const RedsConfig& cfg, Method method,
                          const std::string& path) {
  nlohmann::ordered_json j;
  j["method"] = to_string(method);
  j["iteration"] = ck.iteration;
  j["config"] = {{"alpha", cfg.alpha},       {"gamma", cfg.gamma},
                 {"n_iters", cfg.n_iters},   {"beta_ent", cfg.beta_ent},
                 {"tol", cfg.tol},           {"tau", cfg.tau},
                 {"clip_lo", cfg.clip_lo},   {"clip_hi", cfg.clip_hi},
                 {"pi_weight", cfg.pi_weight}};
  auto table_to_json = [](const StateActionTable& t) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int s = 0; s < t.n_states(); ++s) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (int a = 0; a < t.n_actions(); ++a) row.push_back(t(s, a));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  j["q"] = table_to_json(ck.q);
  j["pi"] = table_to_json(ck.pi.probs);
  if (ck.rho) j["rho"] = table_to_json(ck.rho->probs);
  if (ck.eval_success) j["eval_success"] = *ck.eval_success;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

Checkpoint load_checkpoint_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RlabError("cannot open checkpoint: " + path);
  nlohmann::json j;
  in >> j;
  auto table_from_json = [](const nlohmann::json& rows) {
    const int n = static_cast<int>(rows.size());
    const int na = static_cast<int>(rows.at(0).size());
    StateActionTable t(n, na, 0.0);
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < na; ++a) t(s, a) = rows.at(s).at(a).get<double>();
    }
    return t;
  };
  Checkpoint ck;
  ck.iteration = j.at("iteration").get<int>();
  ck.q = table_from_json(j.at("q"));
  ck.pi.probs = table_from_json(j.at("pi"));
  if (j.contains("rho")) ck.rho = RhoTable{table_from_json(j.at("rho")), {}};
  if (j.contains("eval_success")) ck.eval_success = j.at("eval_success").get<double>();
  ck.pi.validate(1e-6);
  return ck;
}

}  // namespace rlab
