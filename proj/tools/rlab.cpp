// rlab: reproducible offline-RL experiments on gridworld mazes.
//
// Subcommands: gen-data, train, reproduce-didactic, audit.
// Every command is a pure function of its flags and input files; rerunning
// with identical inputs produces byte-identical outputs. Exit codes:
// 0 success, 2 usage error, 1 runtime error.

#include <cstdlib>
#include <functional>
#include <map>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rlab/harness.hpp"

namespace fs = std::filesystem;
using namespace rlab;

namespace {

std::uint64_t env_seed_or(std::uint64_t fallback) {
  if (const char* env = std::getenv("RLAB_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw RlabError(std::string("RLAB_SEED is not an integer: ") + env);
    }
  }
  return fallback;
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using ConfigSetter = std::function<void(const nlohmann::json&)>;

// Applies a JSON config file as defaults for one subcommand. Keys mirror the
// long flag names without the leading dashes; unknown keys are rejected and
// explicit command-line flags win over the file.
void apply_config(CLI::App* cmd, const std::string& path,
                  const std::map<std::string, ConfigSetter>& setters) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw UsageError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    const auto it = setters.find(key);
    if (it == setters.end()) throw UsageError("unknown config key '" + key + "'");
    const CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt != nullptr && opt->count() > 0) continue;
    try {
      it->second(value);
    } catch (const std::exception& e) {
      throw UsageError("bad value for config key '" + key + "': " + e.what());
    }
  }
}



struct DataFlags {
  std::string layout = kDidacticLayoutName;
  std::string variant = "didactic";
  int n_traj = 1000;
  int horizon = 400;
  std::uint64_t seed = 7;
  bool seed_given = false;
  double gamma = 0.99;
  double w_uniform = 0.25;
  double w_biased = 0.75;
  double bias_strength = 1.0;
  double hallway_noise = 0.0;
  std::vector<double> room_noise = {0.1, 0.4, 0.7};

  DatasetMeta to_meta() const {
    DatasetMeta meta;
    meta.layout = layout;
    meta.behavior.variant = behavior_variant_from_string(variant);
    meta.behavior.w_uniform = w_uniform;
    meta.behavior.w_biased = w_biased;
    meta.behavior.bias_strength = bias_strength;
    meta.behavior.hallway_noise = hallway_noise;
    meta.behavior.room_noise = room_noise;
    meta.n_trajectories = n_traj;
    meta.horizon = horizon;
    meta.seed = seed_given ? seed : env_seed_or(seed);
    meta.gamma = gamma;
    return meta;
  }
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--layout", f.layout,
                  "Built-in layout name or path to an ASCII map file")
      ->capture_default_str();
  cmd->add_option("--variant", f.variant, "Behavior variant")
      ->check(CLI::IsMember({"didactic", "noisy", "biased", "homogeneous"}))
      ->capture_default_str();
  cmd->add_option("--n-traj", f.n_traj, "Number of trajectories")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--horizon", f.horizon, "Trajectory horizon")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Dataset seed (falls back to RLAB_SEED)")
      ->capture_default_str();
  cmd->add_option("--gamma", f.gamma, "Discount factor")->capture_default_str();
  cmd->add_option("--w-uniform", f.w_uniform, "Mixture weight of the exploratory component")
      ->capture_default_str();
  cmd->add_option("--w-biased", f.w_biased, "Mixture weight of the biased component")
      ->capture_default_str();
  cmd->add_option("--bias-strength", f.bias_strength,
                  "Away-action mass inside the biased component")
      ->capture_default_str();
  cmd->add_option("--hallway-noise", f.hallway_noise, "Uniform noise in hallways")
      ->capture_default_str();
  cmd->add_option("--room-noise", f.room_noise,
                  "Per-room extra noise for the noisy variant (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
}

struct TrainFlags {
  std::string data;
  std::string method = "reds";
  std::string solver = "closed";
  std::string out_dir = "out";
  std::vector<std::uint64_t> seeds = {0, 1, 2};
  int eval_episodes = 100;
  int eval_horizon = 400;
  double eps_b = 1e-4;
  RedsConfig trainer;
};

void add_trainer_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--method", f.method, "bc | awr | cql | reds")
      ->check(CLI::IsMember({"bc", "awr", "cql", "reds"}))
      ->capture_default_str();
  cmd->add_option("--solver", f.solver, "closed-form backups or the gradient oracle")
      ->check(CLI::IsMember({"closed", "grad"}))
      ->capture_default_str();
  cmd->add_option("--alpha", f.trainer.alpha, "Conservatism weight")->capture_default_str();
  cmd->add_option("--tau", f.trainer.tau, "Advantage temperature (rho fit / awr)")
      ->capture_default_str();
  cmd->add_option("--beta-ent", f.trainer.beta_ent, "Policy softmax temperature")
      ->capture_default_str();
  cmd->add_option("--n-iters", f.trainer.n_iters, "Training iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--tol", f.trainer.tol, "Convergence threshold on the Q table")
      ->capture_default_str();
  cmd->add_option("--pi-weight", f.trainer.pi_weight, "Mixture weight on pi in the push-down")
      ->capture_default_str();
  cmd->add_option("--gamma", f.trainer.gamma, "Training discount")->capture_default_str();
  cmd->add_option("--seeds", f.seeds, "Evaluation seeds (comma separated)")
      ->delimiter(',')
      ->capture_default_str();
  cmd->add_option("--eval-episodes", f.eval_episodes, "Episodes per evaluation")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--eval-horizon", f.eval_horizon, "Evaluation horizon")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--eps-b", f.eps_b, "Behavior-estimate floor")->capture_default_str();
}

std::map<std::string, ConfigSetter> data_setters(DataFlags& f) {
  return {
      {"layout", [&f](const nlohmann::json& v) { f.layout = v.get<std::string>(); }},
      {"variant", [&f](const nlohmann::json& v) { f.variant = v.get<std::string>(); }},
      {"n-traj", [&f](const nlohmann::json& v) { f.n_traj = v.get<int>(); }},
      {"horizon", [&f](const nlohmann::json& v) { f.horizon = v.get<int>(); }},
      {"seed",
       [&f](const nlohmann::json& v) {
         f.seed = v.get<std::uint64_t>();
         f.seed_given = true;
       }},
      {"gamma", [&f](const nlohmann::json& v) { f.gamma = v.get<double>(); }},
      {"w-uniform", [&f](const nlohmann::json& v) { f.w_uniform = v.get<double>(); }},
      {"w-biased", [&f](const nlohmann::json& v) { f.w_biased = v.get<double>(); }},
      {"bias-strength", [&f](const nlohmann::json& v) { f.bias_strength = v.get<double>(); }},
      {"hallway-noise", [&f](const nlohmann::json& v) { f.hallway_noise = v.get<double>(); }},
      {"room-noise",
       [&f](const nlohmann::json& v) { f.room_noise = v.get<std::vector<double>>(); }},
  };
}

std::map<std::string, ConfigSetter> trainer_setters(TrainFlags& f) {
  return {
      {"method", [&f](const nlohmann::json& v) { f.method = v.get<std::string>(); }},
      {"solver", [&f](const nlohmann::json& v) { f.solver = v.get<std::string>(); }},
      {"alpha", [&f](const nlohmann::json& v) { f.trainer.alpha = v.get<double>(); }},
      {"tau", [&f](const nlohmann::json& v) { f.trainer.tau = v.get<double>(); }},
      {"beta-ent", [&f](const nlohmann::json& v) { f.trainer.beta_ent = v.get<double>(); }},
      {"n-iters", [&f](const nlohmann::json& v) { f.trainer.n_iters = v.get<int>(); }},
      {"tol", [&f](const nlohmann::json& v) { f.trainer.tol = v.get<double>(); }},
      {"pi-weight", [&f](const nlohmann::json& v) { f.trainer.pi_weight = v.get<double>(); }},
      {"gamma", [&f](const nlohmann::json& v) { f.trainer.gamma = v.get<double>(); }},
      {"seeds",
       [&f](const nlohmann::json& v) { f.seeds = v.get<std::vector<std::uint64_t>>(); }},
      {"eval-episodes", [&f](const nlohmann::json& v) { f.eval_episodes = v.get<int>(); }},
      {"eval-horizon", [&f](const nlohmann::json& v) { f.eval_horizon = v.get<int>(); }},
      {"eps-b", [&f](const nlohmann::json& v) { f.eps_b = v.get<double>(); }},
  };
}

Method resolve_method(const std::string& method, const std::string& solver) {
  if (method == "bc") return Method::Bc;
  if (method == "awr") return Method::Awr;
  const bool grad = solver == "grad";
  if (method == "cql") return grad ? Method::CqlGrad : Method::CqlClosed;
  return grad ? Method::RedsGrad : Method::RedsClosed;
}

void write_run_summary(const RunResult& r, const std::string& path) {
  nlohmann::ordered_json j;
  j["method"] = r.method;
  for (const auto& [name, value] : r.params) j["params"][name] = value;
  j["mean_success"] = r.mean_success;
  j["std_success"] = r.std_success;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
  for (const SeedOutcome& o : r.seeds) {
    seeds.push_back({{"seed", o.seed},
                     {"success", o.success},
                     {"selected_iter", o.selected_iter},
                     {"std_D", o.std_d},
                     {"max_D", o.max_d},
                     {"C_diff", o.c_diff}});
  }
  j["seeds"] = std::move(seeds);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw RlabError("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

int cmd_gen_data(const DataFlags& flags, const std::string& out_path) {
  const DatasetMeta meta = flags.to_meta();
  const OfflineDataset ds = generate_dataset(meta);
  save_dataset(ds, out_path);
  std::cout << "wrote " << ds.transitions.size() << " transitions to " << out_path << "\n";
  return 0;
}

int cmd_train(const TrainFlags& flags) {
  const OfflineDataset ds = load_dataset(flags.data);
  const GridWorld world = world_from_meta(ds.meta);
  ExperimentConfig cfg;
  cfg.data = ds.meta;
  cfg.method = resolve_method(flags.method, flags.solver);
  cfg.trainer = flags.trainer;
  cfg.seeds = flags.seeds;
  cfg.eval_episodes = flags.eval_episodes;
  cfg.eval_horizon = flags.eval_horizon;
  cfg.eps_b = flags.eps_b;
  fs::create_directories(flags.out_dir);

  const RunResult result = run_experiment(cfg, world, ds);

  // Selected checkpoints per seed, for inspection and the audit command.
  const EmpiricalModel model =
      estimate_model(ds, world.mdp.n_states, world.mdp.n_actions, cfg.eps_b);
  TrainOptions opts;
  opts.eval_every = 10;
  opts.eval_episodes = cfg.eval_episodes;
  opts.eval_horizon = cfg.eval_horizon;
  for (std::uint64_t seed : cfg.seeds) {
    const std::vector<Checkpoint> cks = train(cfg.method, model, world.mdp, cfg.trainer, seed, opts);
    const Checkpoint& selected = oracle_select(cks);
    save_checkpoint_json(selected, cfg.trainer, cfg.method,
                         flags.out_dir + "/checkpoint_seed" + std::to_string(seed) + ".json");
  }

  write_results_csv({result}, flags.out_dir + "/results.csv");
  write_runs_csv({result}, flags.out_dir + "/runs.csv");
  write_run_summary(result, flags.out_dir + "/summary.json");
  write_heatmap_pgm(result.heatmap, flags.out_dir + "/heatmap.pgm");
  write_heatmap_svg(result.heatmap, world.spec, flags.out_dir + "/heatmap.svg");
  std::cout << "mean success " << result.mean_success << " over " << result.seeds.size()
            << " seeds; outputs in " << flags.out_dir << "\n";
  return 0;
}

int cmd_reproduce(const std::string& data_path, const DataFlags& data_flags,
                  const std::string& out_dir, int jobs) {
  OfflineDataset ds;
  if (!data_path.empty()) {
    ds = load_dataset(data_path);
  } else {
    ds = generate_dataset(data_flags.to_meta());
  }
  const DidacticReport report = reproduce_didactic(ds, out_dir, jobs);
  std::cout << "method           mean_success\n";
  for (const RunResult& r : report.awr) {
    std::cout << "awr tau=" << r.params.front().second << "      " << r.mean_success << "\n";
  }
  for (const RunResult& r : report.cql) {
    std::cout << "cql alpha=" << r.params.front().second << "    " << r.mean_success << "\n";
  }
  std::cout << "reds (default)   " << report.reds.mean_success << "\n";
  std::cout << "table and heatmaps in " << out_dir << "\n";
  return 0;
}

int cmd_audit(const std::string& data_path, const std::string& policy_path,
              const std::string& out_dir, double eps_b) {
  const OfflineDataset ds = load_dataset(data_path);
  const GridWorld world = world_from_meta(ds.meta);
  TabularPolicy policy;
  if (!policy_path.empty()) {
    policy = load_checkpoint_json(policy_path).pi;
    detail::check(policy.n_states() == world.mdp.n_states, "policy/layout shape mismatch");
  } else {
    policy = train_audit_probe(ds, world, eps_b);
  }
  const auto [report, cdiff] = audit_heteroskedasticity(ds, world, policy, eps_b);
  fs::create_directories(out_dir);
  write_divergence_csv(report, out_dir + "/divergence.csv");
  write_audit_summary_json(report, cdiff, out_dir + "/summary.json");
  std::cout << "std " << report.std_dev << "  max " << report.max << "  mean " << report.mean
            << "  C_diff " << cdiff.value << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rlab: offline RL on gridworld mazes with conservative and "
               "support-constrained trainers"};
  app.require_subcommand(1);

  // gen-data
  DataFlags gen_flags;
  std::string gen_out = "dataset.jsonl";
  std::string gen_config;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate an offline dataset (JSON lines)");
  add_data_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "Output dataset path")->capture_default_str();
  gen->add_option("--config", gen_config, "JSON config file with flag defaults");

  // train
  TrainFlags train_flags;
  std::string train_config;
  CLI::App* tr = app.add_subcommand("train", "Train an offline method on a dataset");
  tr->add_option("--data", train_flags.data, "Dataset file")->required();
  add_trainer_flags(tr, train_flags);
  tr->add_option("--out-dir", train_flags.out_dir, "Output directory")->capture_default_str();
  tr->add_option("--config", train_config, "JSON config file with flag defaults");

  // reproduce-didactic
  DataFlags rep_data;
  std::string rep_data_path;
  std::string rep_out = "didactic_out";
  std::string rep_config;
  int rep_jobs = 1;
  CLI::App* rep = app.add_subcommand(
      "reproduce-didactic", "Run the full navigation study: AWR sweep, CQL sweep, ReDS");
  rep->add_option("--data", rep_data_path, "Existing dataset (defaults to generating one)");
  add_data_flags(rep, rep_data);
  rep->add_option("--out-dir", rep_out, "Output directory")->capture_default_str();
  rep->add_option("--jobs", rep_jobs, "Parallel sweep cells")->check(CLI::PositiveNumber);
  rep->add_option("--config", rep_config, "JSON config file with flag defaults");

  // audit
  std::string audit_data, audit_policy, audit_out = "audit_out", audit_config;
  double audit_eps_b = 1e-4;
  CLI::App* aud = app.add_subcommand("audit", "Heteroskedasticity audit of a dataset");
  aud->add_option("--data", audit_data, "Dataset file")->required();
  aud->add_option("--policy", audit_policy,
                  "Checkpoint JSON to audit with (default: train the probe)");
  aud->add_option("--eps-b", audit_eps_b, "Behavior-estimate floor")->capture_default_str();
  aud->add_option("--out-dir", audit_out, "Output directory")->capture_default_str();
  aud->add_option("--config", audit_config, "JSON config file with flag defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    // Config files act as defaults under the explicit flags.
    if (gen->parsed()) {
      gen_flags.seed_given = gen->get_option("--seed")->count() > 0;
      if (!gen_config.empty()) apply_config(gen, gen_config, data_setters(gen_flags));
      return cmd_gen_data(gen_flags, gen_out);
    }
    if (tr->parsed()) {
      if (!train_config.empty()) apply_config(tr, train_config, trainer_setters(train_flags));
      return cmd_train(train_flags);
    }
    if (rep->parsed()) {
      rep_data.seed_given = rep->get_option("--seed")->count() > 0;
      if (!rep_config.empty()) apply_config(rep, rep_config, data_setters(rep_data));
      return cmd_reproduce(rep_data_path, rep_data, rep_out, rep_jobs);
    }
    if (aud->parsed()) {
      if (!audit_config.empty()) {
        std::map<std::string, ConfigSetter> setters = {
            {"eps-b", [&](const nlohmann::json& v) { audit_eps_b = v.get<double>(); }},
            {"policy", [&](const nlohmann::json& v) { audit_policy = v.get<std::string>(); }},
        };
        apply_config(aud, audit_config, setters);
      }
      return cmd_audit(audit_data, audit_policy, audit_out, audit_eps_b);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
