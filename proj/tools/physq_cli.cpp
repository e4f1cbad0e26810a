#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "physq/harness.hpp"

namespace {

physq::ExperimentConfig load_config(const std::string& path) {
  if (path.empty()) return physq::ExperimentConfig{};
  return physq::ExperimentConfig::from_config(physq::ConfigFile::parse_file(path));
}

void print_result(const physq::RunResult& r) {
  std::cout << r.agent << " on " << r.scenario << ": total "
            << r.cost_eur << " EUR over " << r.daily_cost.size()
            << " days, comfort violation " << r.violation_minutes << " min\n";
  for (std::size_t d = 0; d < r.daily_cost.size(); ++d)
    std::cout << "  day " << d << ": " << r.daily_cost[d] << " EUR\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fitted Q-iteration heating control benchmark"};
  app.require_subcommand(1);

  std::string config_path, scenario = "square";
  app.add_option("--config", config_path, "INI configuration file");

  // simulate: generate a scenario and roll out the rule-based controller.
  auto* sim = app.add_subcommand("simulate", "Generate price/weather series and run the rule-based controller");
  int sim_days = 5;
  std::uint64_t sim_seed = 1234;
  std::string sim_out = "out/simulate";
  sim->add_option("--days", sim_days, "number of days");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--scenario", scenario, "square | belpex");
  sim->add_option("--out", sim_out, "output directory");

  // train: growing-batch training of one agent, saving batch + model.
  auto* train = app.add_subcommand("train", "Collect experience and train an agent");
  std::string train_agent = "physq", train_out = "out/train", strategy = "growing";
  train->add_option("--agent", train_agent, "physq | physq-wrong | fqi-nn | fqi-et");
  train->add_option("--strategy", strategy,
                    "growing (one decaying-epsilon run) | fixed (ladder of batch prefixes)");
  train->add_option("--scenario", scenario, "square | belpex");
  train->add_option("--out", train_out, "output directory");

  // evaluate: held-out evaluation of an agent from a saved batch.
  auto* eval = app.add_subcommand("evaluate", "Evaluate an agent on the held-out days from a saved batch");
  std::string eval_agent = "physq", eval_batch, eval_model;
  eval->add_option("--agent", eval_agent, "physq | physq-wrong | fqi-nn | fqi-et");
  eval->add_option("--batch", eval_batch, "experience batch file")->required();
  eval->add_option("--model", eval_model,
                   "saved encoder bundle to reuse (physq agents; trained fresh if omitted)");
  eval->add_option("--scenario", scenario, "square | belpex");

  // mpc: model predictive control benchmark on the held-out days.
  auto* mpc = app.add_subcommand("mpc", "Run the MPC benchmark on the held-out days");
  std::string freq = "hourly";
  mpc->add_option("--freq", freq, "hourly | quarterly");
  mpc->add_option("--scenario", scenario, "square | belpex");

  // ablate: physics-prior ablation (experiment 3).
  auto* ablate = app.add_subcommand("ablate", "Correct vs deliberately wrong physics prior across batch sizes");

  // suite: full experiment suites.
  auto* suite = app.add_subcommand("suite", "Run a full experiment and write CSV reports");
  int experiment = 1;
  suite->add_option("--experiment", experiment, "1 | 2 | 3")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    physq::ExperimentConfig cfg = load_config(config_path);

    if (sim->parsed()) {
      cfg.seed = sim_seed;
      cfg.test_days = sim_days;
      const physq::ScenarioData data = physq::make_scenario(cfg, scenario);
      std::filesystem::create_directories(sim_out);
      physq::save_price_csv(data.test_prices, sim_out + "/prices.csv");
      physq::save_weather_csv(data.test_weather, sim_out + "/weather.csv");
      print_result(physq::evaluate_bau(cfg, data, scenario));
      std::cout << "series written to " << sim_out << "\n";
    } else if (train->parsed()) {
      const physq::AgentKind kind = physq::parse_agent_kind(train_agent);
      const physq::ScenarioData data = physq::make_scenario(cfg, scenario);
      std::filesystem::create_directories(train_out);
      if (strategy == "fixed") {
        const std::vector<physq::ExperienceBatch> ladder =
            physq::make_fixed_batches(cfg, data, cfg.seed);
        for (const physq::ExperienceBatch& b : ladder)
          physq::save_batch(b, train_out + "/batch_" + std::to_string(b.days) + "d.txt");
        std::cout << "wrote " << ladder.size() << " batch prefixes to "
                  << train_out << "\n";
      } else if (strategy == "growing") {
        const physq::GrowingBatchResult g =
            physq::run_growing_batch(cfg, data, kind, cfg.seed);
        physq::save_batch(g.batch, train_out + "/batch.txt");
        physq::write_daily_csv(train_out + "/daily.csv", train_agent, g.daily);
        if (g.encoder) {
          std::ofstream enc(train_out + "/encoder.txt");
          physq::save_encoder_bundle(enc, *g.encoder);
        }
        std::cout << "trained " << train_agent << " on " << scenario
                  << ": batch of " << g.batch.size() << " transitions written to "
                  << train_out << "\n";
      } else {
        throw CLI::ValidationError("--strategy must be growing or fixed");
      }
    } else if (eval->parsed()) {
      const physq::AgentKind kind = physq::parse_agent_kind(eval_agent);
      const physq::ScenarioData data = physq::make_scenario(cfg, scenario);
      const physq::ExperienceBatch batch = physq::load_batch(eval_batch);
      std::optional<physq::EncoderBundle> enc;
      if (physq::is_physq_kind(kind)) {
        if (!eval_model.empty()) {
          std::ifstream in(eval_model);
          if (!in) throw std::runtime_error("cannot open model file " + eval_model);
          enc = physq::load_encoder_bundle(in);
        } else {
          physq::EncoderConfig ec;
          ec.mu = cfg.mu;
          ec.train.seed = cfg.seed;
          enc = physq::train_encoder(batch, ec,
                                     kind == physq::AgentKind::PhysQWrong
                                         ? physq::PhysicsPrior::Wrong
                                         : physq::PhysicsPrior::Correct)
                    .bundle;
        }
      }
      print_result(physq::evaluate_rl(cfg, data, scenario, batch, kind,
                                      enc ? &*enc : nullptr, cfg.seed));
    } else if (mpc->parsed()) {
      if (freq != "hourly" && freq != "quarterly")
        throw CLI::ValidationError("--freq must be hourly or quarterly");
      const physq::ScenarioData data = physq::make_scenario(cfg, scenario);
      print_result(physq::evaluate_mpc(cfg, data, scenario,
                                       freq == "hourly" ? 24 : 96));
    } else if (ablate->parsed()) {
      physq::run_experiment_suite(cfg, 3);
      std::cout << "reports written to " << cfg.out_dir << "/exp3\n";
    } else if (suite->parsed()) {
      physq::run_experiment_suite(cfg, experiment);
      std::cout << "reports written to " << cfg.out_dir << "/exp"
                << experiment << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
