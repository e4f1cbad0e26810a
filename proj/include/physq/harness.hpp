#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "physq/config.hpp"
#include "physq/fqi.hpp"
#include "physq/mdp.hpp"
#include "physq/mpc.hpp"
#include "physq/rc_model.hpp"
#include "physq/series.hpp"

namespace physq {

struct ExperimentConfig {
  RcParams building;
  std::string scenario = "square";  // square | belpex
  std::string price_csv;            // optional: real day-ahead prices
  std::string weather_csv;          // optional: real weather
  int train_days = 30;
  int test_days = 5;
  int retrain_interval_days = 5;
  double epsilon0 = 0.6;
  double epsilon_decay = 0.91;  // nightly multiplicative decay
  std::vector<int> batch_ladder{6, 12, 18, 24, 30};
  int replicates = 5;
  int horizon = 24;  // T
  double mu = 1.0;
  double mpc_comfort_margin = 0.1;  // degC added inside the band when planning
  double mpc_grid_resolution = 0.05;
  std::uint64_t seed = 1234;
  SquareWaveParams square;
  std::string out_dir = "out";

  static ExperimentConfig from_config(const ConfigFile& file);
  void validate() const;
};

/// Exogenous series for one scenario, split into training and held-out test
/// environments drawn from disjoint seed streams.
struct ScenarioData {
  PriceSeries train_prices;
  WeatherSeries train_weather;
  PriceSeries test_prices;   // test_days + 1 days (forecast lookahead)
  WeatherSeries test_weather;
};

ScenarioData make_scenario(const ExperimentConfig& cfg, const std::string& scenario);

// Price and ambient forecasts over the 2T window starting at `day` 00:00.
ForecastBundle forecasts_for_day(const PriceSeries& prices,
                                 const WeatherSeries& weather, int day,
                                 int horizon = 24);

/// Single simulated building driven hour by hour, tracking the observation
/// history and comfort accounting.
class Environment {
 public:
  Environment(const RcParams& params, const PriceSeries& prices,
              const WeatherSeries& weather);

  AgentObservation observation() const;
  int day() const { return day_; }
  int hour() const { return hour_; }
  const SimState& state() const { return state_; }

  struct StepRecord {
    Transition transition;
    double cost_eur = 0.0;
    double u_phys = 0.0;
    double t_mass = 0.0;  // true hidden state at end of hour
  };
  StepRecord step(int u_requested);

  long violation_minutes() const { return cold_minutes_ + hot_heating_minutes_; }
  long cold_minutes() const { return cold_minutes_; }
  long hot_heating_minutes() const { return hot_heating_minutes_; }
  double min_t_room_seen() const { return min_t_room_; }

 private:
  RcParams params_;
  const PriceSeries* prices_;
  const WeatherSeries* weather_;
  SimState state_;
  std::vector<double> history_;
  int day_ = 0, hour_ = 0;
  long cold_minutes_ = 0, hot_heating_minutes_ = 0;
  double min_t_room_ = 100.0;
};

struct DailyLogRow {
  int day = 0;
  double cost_eur = 0.0;
  double epsilon = 0.0;
};

struct GrowingBatchResult {
  ExperienceBatch batch;
  std::optional<EncoderBundle> encoder;  // physq kinds, from the final retrain
  std::vector<DailyLogRow> daily;
  std::vector<double> true_mass;  // simulator T_m after every training hour
};

// Growing-batch strategy: epsilon-greedy collection with nightly epsilon
// decay and retraining on the accumulated batch every retrain interval.
GrowingBatchResult run_growing_batch(const ExperimentConfig& cfg,
                                     const ScenarioData& data, AgentKind kind,
                                     std::uint64_t seed);

// Fixed-batch ladder for one replicate: one growing-batch collection with
// the default agent, snapshotted at every ladder size.
std::vector<ExperienceBatch> make_fixed_batches(const ExperimentConfig& cfg,
                                                const ScenarioData& data,
                                                std::uint64_t replicate_seed);

struct RunResult {
  std::string scenario;
  std::string agent;
  int batch_days = 0;
  int replicate = 0;
  double cost_eur = 0.0;
  std::vector<double> daily_cost;
  long violation_minutes = 0;
};

/// Held-out rollout exposing the true hidden state, used to score encoder
/// hidden-state recovery.
struct HiddenStateTrace {
  std::vector<AgentObservation> observations;
  std::vector<double> t_mass;
};

// Greedy rollout over the held-out days with nightly re-planning: the
// ensemble is refit on the fixed batch with each test day's forecasts.
// When `trace` is non-null it receives the (observation, true T_mass)
// pairs of the rollout.
RunResult evaluate_rl(const ExperimentConfig& cfg, const ScenarioData& data,
                      const std::string& scenario, const ExperienceBatch& batch,
                      AgentKind kind, const EncoderBundle* encoder,
                      std::uint64_t seed, HiddenStateTrace* trace = nullptr);

RunResult evaluate_bau(const ExperimentConfig& cfg, const ScenarioData& data,
                       const std::string& scenario);

// steps_per_day 24 (hourly) or 96 (quarterly); the plan is solved once per
// test day and executed on the simulator with the backup active.
RunResult evaluate_mpc(const ExperimentConfig& cfg, const ScenarioData& data,
                       const std::string& scenario, int steps_per_day);

// Held-out BAU rollout with the true hidden state.
HiddenStateTrace collect_hidden_trace(const ExperimentConfig& cfg,
                                      const ScenarioData& data);

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct CellStat {
  std::string agent;
  int batch_days = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> costs;  // one per completed replicate
  std::string error;          // non-empty if every replicate failed
};

// Fixed-batch study: ladder x kinds x replicates on one scenario. Failed
// replicates are isolated and reported through `rows`.
std::vector<CellStat> run_fixed_batch_study(const ExperimentConfig& cfg,
                                            const ScenarioData& data,
                                            const std::string& scenario,
                                            const std::vector<AgentKind>& kinds,
                                            std::vector<RunResult>* rows);

struct Exp1Result {
  std::string scenario;
  RunResult physq, bau, mpc_hourly, mpc_quarterly;
  std::vector<DailyLogRow> training_log;
};

Exp1Result run_experiment1(const ExperimentConfig& cfg, const std::string& scenario);

// Experiments 1-3 with CSV + plain-text reporting into cfg.out_dir.
void run_experiment_suite(const ExperimentConfig& cfg, int experiment);

void write_results_csv(const std::string& path, const std::vector<RunResult>& rows);
void write_daily_csv(const std::string& path, const std::string& agent,
                     const std::vector<DailyLogRow>& rows);
void write_cell_stats_csv(const std::string& path, const std::string& scenario,
                          const std::vector<CellStat>& stats);

}  // namespace physq
