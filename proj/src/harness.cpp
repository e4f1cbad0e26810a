#include "physq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "physq/rng.hpp"

namespace physq {

namespace {

RegressorFactory factory_for(AgentKind kind) {
  switch (kind) {
    case AgentKind::FqiNn: return make_fqi_nn_factory();
    case AgentKind::FqiEt: return make_fqi_et_factory();
    case AgentKind::PhysQ:
    case AgentKind::PhysQWrong: return make_physq_nn_factory();
  }
  throw std::logic_error("factory_for: unknown agent kind");
}

PhysicsPrior prior_for(AgentKind kind) {
  return kind == AgentKind::PhysQWrong ? PhysicsPrior::Wrong : PhysicsPrior::Correct;
}

EncoderConfig encoder_config_for(const ExperimentConfig& cfg, std::uint64_t seed) {
  EncoderConfig ec;
  ec.mu = cfg.mu;
  ec.train.seed = seed;
  return ec;
}

ExperienceBatch prefix_batch(const ExperienceBatch& batch, int days,
                             std::uint64_t seed) {
  const std::size_t n = static_cast<std::size_t>(days) * 24;
  if (n > batch.size())
    throw std::invalid_argument("prefix_batch: requested more days than collected");
  ExperienceBatch out;
  out.transitions.assign(batch.transitions.begin(), batch.transitions.begin() + n);
  out.days = days;
  out.seed = seed;
  return out;
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& f) {
  ExperimentConfig c;
  c.building.room_capacity = f.get_double("building.room_capacity_kwh_per_c", c.building.room_capacity);
  c.building.mass_capacity = f.get_double("building.mass_capacity_kwh_per_c", c.building.mass_capacity);
  c.building.resist_room_mass = f.get_double("building.resist_room_mass_c_per_kw", c.building.resist_room_mass);
  c.building.resist_room_ambient = f.get_double("building.resist_room_ambient_c_per_kw", c.building.resist_room_ambient);
  c.building.heater_power_max = f.get_double("building.heater_power_max_kw", c.building.heater_power_max);

  c.train_days = static_cast<int>(f.get_long("training.train_days", c.train_days));
  c.test_days = static_cast<int>(f.get_long("training.test_days", c.test_days));
  c.retrain_interval_days = static_cast<int>(f.get_long("training.retrain_interval_days", c.retrain_interval_days));
  c.epsilon0 = f.get_double("training.epsilon0", c.epsilon0);
  c.epsilon_decay = f.get_double("training.epsilon_decay", c.epsilon_decay);
  c.batch_ladder = f.get_int_list("training.batch_ladder", c.batch_ladder);
  c.replicates = static_cast<int>(f.get_long("training.replicates", c.replicates));
  c.horizon = static_cast<int>(f.get_long("training.horizon", c.horizon));
  c.mu = f.get_double("training.mu", c.mu);
  c.mpc_comfort_margin = f.get_double("training.mpc_comfort_margin", c.mpc_comfort_margin);
  c.mpc_grid_resolution = f.get_double("training.mpc_grid_resolution", c.mpc_grid_resolution);
  c.seed = static_cast<std::uint64_t>(f.get_long("training.seed", static_cast<long>(c.seed)));

  c.scenario = f.get_string("prices.scenario", c.scenario);
  c.square.lambda_low = f.get_double("prices.lambda_low", c.square.lambda_low);
  c.square.lambda_high = f.get_double("prices.lambda_high", c.square.lambda_high);
  c.square.peak_hours = static_cast<int>(f.get_long("prices.peak_hours", c.square.peak_hours));
  c.square.onset_min = static_cast<int>(f.get_long("prices.onset_min", c.square.onset_min));
  c.square.onset_max = static_cast<int>(f.get_long("prices.onset_max", c.square.onset_max));
  c.price_csv = f.get_string("prices.price_csv", c.price_csv);
  c.weather_csv = f.get_string("prices.weather_csv", c.weather_csv);

  c.out_dir = f.get_string("paths.out_dir", c.out_dir);
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  building.validate();
  if (train_days < 1) throw std::invalid_argument("config: train_days < 1");
  if (test_days < 1) throw std::invalid_argument("config: test_days < 1");
  if (retrain_interval_days < 1) throw std::invalid_argument("config: retrain_interval_days < 1");
  if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw std::invalid_argument("config: epsilon0 outside [0, 1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("config: epsilon_decay outside (0, 1]");
  if (replicates < 1) throw std::invalid_argument("config: replicates < 1");
  if (horizon < 1) throw std::invalid_argument("config: horizon < 1");
  if (batch_ladder.empty()) throw std::invalid_argument("config: empty batch_ladder");
  for (int d : batch_ladder)
    if (d < 1 || d > train_days)
      throw std::invalid_argument("config: batch_ladder entry outside [1, train_days]");
  if (scenario != "square" && scenario != "belpex")
    throw std::invalid_argument("config: scenario must be 'square' or 'belpex'");
}

ScenarioData make_scenario(const ExperimentConfig& cfg, const std::string& scenario) {
  const int train_len = cfg.train_days + 2;  // two lookahead days for forecasts
  const int test_len = cfg.test_days + 1;
  ScenarioData d;

  if (!cfg.price_csv.empty()) {
    const PriceSeries all = load_price_csv(cfg.price_csv);
    if (all.days() < train_len + test_len)
      throw std::runtime_error("price_csv: needs at least " +
                               std::to_string(train_len + test_len) + " days");
    d.train_prices.values.assign(all.values.begin(), all.values.begin() + train_len * 24);
    d.test_prices.values.assign(all.values.begin() + train_len * 24,
                                all.values.begin() + (train_len + test_len) * 24);
  } else if (scenario == "square") {
    d.train_prices = generate_square_prices(train_len, mix_seed(cfg.seed, 0xA11), cfg.square);
    d.test_prices = generate_square_prices(test_len, mix_seed(cfg.seed, 0xB11), cfg.square);
  } else if (scenario == "belpex") {
    d.train_prices = generate_belpex_like_prices(train_len, mix_seed(cfg.seed, 0xA12));
    d.test_prices = generate_belpex_like_prices(test_len, mix_seed(cfg.seed, 0xB12));
  } else {
    throw std::invalid_argument("make_scenario: unknown scenario '" + scenario + "'");
  }

  if (!cfg.weather_csv.empty()) {
    const WeatherSeries all = load_weather_csv(cfg.weather_csv);
    if (all.days() < train_len + test_len)
      throw std::runtime_error("weather_csv: needs at least " +
                               std::to_string(train_len + test_len) + " days");
    d.train_weather.values.assign(all.values.begin(), all.values.begin() + train_len * 24);
    d.test_weather.values.assign(all.values.begin() + train_len * 24,
                                 all.values.begin() + (train_len + test_len) * 24);
  } else {
    d.train_weather = generate_weather(train_len, mix_seed(cfg.seed, 0xA21));
    d.test_weather = generate_weather(test_len, mix_seed(cfg.seed, 0xB21));
  }
  return d;
}

ForecastBundle forecasts_for_day(const PriceSeries& prices,
                                 const WeatherSeries& weather, int day,
                                 int horizon) {
  const int first = day * 24;
  const int slots = 2 * horizon;
  if (first + slots > static_cast<int>(prices.values.size()) ||
      first + slots > static_cast<int>(weather.values.size()))
    throw std::out_of_range("forecasts_for_day: series too short for day " +
                            std::to_string(day));
  ForecastBundle f;
  f.prices.assign(prices.values.begin() + first, prices.values.begin() + first + slots);
  f.t_ambient.assign(weather.values.begin() + first,
                     weather.values.begin() + first + slots);
  f.validate();
  return f;
}

Environment::Environment(const RcParams& params, const PriceSeries& prices,
                         const WeatherSeries& weather)
    : params_(params), prices_(&prices), weather_(&weather) {
  params_.validate();
  if (prices.values.size() != weather.values.size())
    throw std::invalid_argument("Environment: price/weather series length mismatch");
  if (prices.days() < 1) throw std::invalid_argument("Environment: empty series");
  history_.push_back(state_.t_room);
  min_t_room_ = state_.t_room;
}

AgentObservation Environment::observation() const {
  return make_observation(history_, weather_->at(day_, hour_), hour_);
}

Environment::StepRecord Environment::step(int u_requested) {
  if (u_requested != 0 && u_requested != 1)
    throw std::invalid_argument("Environment::step: action must be 0 or 1");
  if (day_ >= prices_->days())
    throw std::logic_error("Environment::step: series exhausted");

  StepRecord rec;
  const AgentObservation obs = observation();
  const double price = prices_->at(day_, hour_);
  const double t_amb = weather_->at(day_, hour_);
  const HourStepResult r = env_step_hour(state_, params_, u_requested, t_amb);

  state_ = r.state;
  history_.push_back(state_.t_room);
  cold_minutes_ += r.minutes_below_comfort;
  hot_heating_minutes_ += r.minutes_hot_heating;
  min_t_room_ = std::min(min_t_room_, r.min_t_room);

  const int next_abs = day_ * 24 + hour_ + 1;
  const bool has_next = next_abs < static_cast<int>(weather_->values.size());
  const double next_amb = has_next ? weather_->values[next_abs] : t_amb;

  rec.transition.obs = obs;
  rec.transition.action = u_requested;
  rec.transition.u_phys = r.u_phys_avg;
  rec.transition.next_obs = make_observation(history_, next_amb, hour_ + 1);
  rec.cost_eur = step_cost(price, r.u_phys_avg, 1.0);
  rec.u_phys = r.u_phys_avg;
  rec.t_mass = state_.t_mass;

  if (++hour_ == 24) {
    hour_ = 0;
    ++day_;
  }
  return rec;
}

GrowingBatchResult run_growing_batch(const ExperimentConfig& cfg,
                                     const ScenarioData& data, AgentKind kind,
                                     std::uint64_t seed) {
  GrowingBatchResult out;
  out.batch.seed = seed;
  Environment env(cfg.building, data.train_prices, data.train_weather);
  Rng explore(mix_seed(seed, 0xE0));
  std::optional<QEnsemble> ensemble;
  double eps = cfg.epsilon0;
  const RegressorFactory factory = factory_for(kind);

  for (int d = 0; d < cfg.train_days; ++d) {
    double day_cost = 0.0;
    for (int h = 0; h < 24; ++h) {
      const AgentObservation obs = env.observation();
      int action;
      if (ensemble) {
        action = epsilon_greedy_action(*ensemble, obs, h, eps, explore);
      } else {
        action = explore.uniform() < eps ? static_cast<int>(explore.uniform_int(2)) : 0;
      }
      const Environment::StepRecord rec = env.step(action);
      out.batch.transitions.push_back(rec.transition);
      out.true_mass.push_back(rec.t_mass);
      day_cost += rec.cost_eur;
    }
    out.daily.push_back({d, day_cost, eps});
    out.batch.days = d + 1;
    eps *= cfg.epsilon_decay;

    if ((d + 1) % cfg.retrain_interval_days == 0) {
      const ForecastBundle f = forecasts_for_day(data.train_prices,
                                                 data.train_weather, d + 1,
                                                 cfg.horizon);
      const std::uint64_t fit_seed = mix_seed(seed, 0xF00 + d);
      if (is_physq_kind(kind)) {
        const EncoderConfig ec = encoder_config_for(cfg, mix_seed(seed, 0xEC0 + d));
        EncoderFitResult er = train_encoder(out.batch, ec, prior_for(kind));
        out.encoder = er.bundle;
        const AnnotatedBatch ann = freeze_and_annotate(*out.encoder, out.batch);
        ensemble = physq_fit_step2(ann, *out.encoder, f, factory, cfg.horizon,
                                   fit_seed, kind);
      } else {
        ensemble = fqi_fit(out.batch, f, factory, cfg.horizon, fit_seed, kind);
      }
    }
  }
  return out;
}

std::vector<ExperienceBatch> make_fixed_batches(const ExperimentConfig& cfg,
                                                const ScenarioData& data,
                                                std::uint64_t replicate_seed) {
  const GrowingBatchResult run =
      run_growing_batch(cfg, data, AgentKind::FqiNn, replicate_seed);
  std::vector<ExperienceBatch> out;
  out.reserve(cfg.batch_ladder.size());
  for (int days : cfg.batch_ladder)
    out.push_back(prefix_batch(run.batch, days, replicate_seed));
  return out;
}

RunResult evaluate_rl(const ExperimentConfig& cfg, const ScenarioData& data,
                      const std::string& scenario, const ExperienceBatch& batch,
                      AgentKind kind, const EncoderBundle* encoder,
                      std::uint64_t seed, HiddenStateTrace* trace) {
  if (is_physq_kind(kind) && encoder == nullptr)
    throw std::invalid_argument("evaluate_rl: physq kinds need a trained encoder");

  const RegressorFactory factory = factory_for(kind);
  std::optional<AnnotatedBatch> ann;
  if (is_physq_kind(kind)) ann = freeze_and_annotate(*encoder, batch);

  RunResult rr;
  rr.scenario = scenario;
  rr.agent = agent_kind_name(kind);
  rr.batch_days = batch.days;
  Environment env(cfg.building, data.test_prices, data.test_weather);

  for (int d = 0; d < cfg.test_days; ++d) {
    const ForecastBundle f =
        forecasts_for_day(data.test_prices, data.test_weather, d, cfg.horizon);
    const std::uint64_t fit_seed = mix_seed(seed, 0xD00 + d);
    QEnsemble ens =
        is_physq_kind(kind)
            ? physq_fit_step2(*ann, *encoder, f, factory, cfg.horizon, fit_seed, kind)
            : fqi_fit(batch, f, factory, cfg.horizon, fit_seed, kind);

    double day_cost = 0.0;
    for (int h = 0; h < 24; ++h) {
      const AgentObservation obs = env.observation();
      const int action = greedy_action(ens, obs, h);
      const Environment::StepRecord rec = env.step(action);
      day_cost += rec.cost_eur;
      if (trace != nullptr) {
        trace->observations.push_back(obs);
        trace->t_mass.push_back(rec.t_mass);
      }
    }
    rr.daily_cost.push_back(day_cost);
    rr.cost_eur += day_cost;
  }
  rr.violation_minutes = env.violation_minutes();
  return rr;
}

RunResult evaluate_bau(const ExperimentConfig& cfg, const ScenarioData& data,
                       const std::string& scenario) {
  RunResult rr;
  rr.scenario = scenario;
  rr.agent = "bau";
  Environment env(cfg.building, data.test_prices, data.test_weather);
  BauController bau;
  for (int d = 0; d < cfg.test_days; ++d) {
    double day_cost = 0.0;
    for (int h = 0; h < 24; ++h) {
      const int action = bau.action(env.observation().t_room_current());
      day_cost += env.step(action).cost_eur;
    }
    rr.daily_cost.push_back(day_cost);
    rr.cost_eur += day_cost;
  }
  rr.violation_minutes = env.violation_minutes();
  return rr;
}

RunResult evaluate_mpc(const ExperimentConfig& cfg, const ScenarioData& data,
                       const std::string& scenario, int steps_per_day) {
  if (steps_per_day != 24 && steps_per_day != 96)
    throw std::invalid_argument("evaluate_mpc: steps_per_day must be 24 or 96");
  const int minutes_per_step = 1440 / steps_per_day;

  RunResult rr;
  rr.scenario = scenario;
  rr.agent = steps_per_day == 24 ? "mpc-hourly" : "mpc-quarterly";
  SimState state;
  long cold = 0, hot = 0;

  for (int d = 0; d < cfg.test_days; ++d) {
    std::vector<double> prices(steps_per_day), t_amb(steps_per_day);
    for (int t = 0; t < steps_per_day; ++t) {
      const int hour = t * minutes_per_step / 60;
      prices[t] = data.test_prices.at(d, hour);
      t_amb[t] = data.test_weather.at(d, hour);
    }
    MpcProblem problem = MpcProblem::from_params(
        cfg.building, steps_per_day, prices, t_amb,
        Eigen::Vector2d(state.t_room, state.t_mass));
    problem.t_min = kComfortLow + cfg.mpc_comfort_margin;

    MpcSolution sol;
    try {
      sol = mpc_solve_dp(problem, cfg.mpc_grid_resolution);
    } catch (const MpcInfeasible&) {
      problem.t_min = kComfortLow;  // fall back to the raw band
      sol = mpc_solve_dp(problem, cfg.mpc_grid_resolution);
    }

    double day_cost = 0.0;
    for (int t = 0; t < steps_per_day; ++t) {
      const HourStepResult r = env_step_minutes(state, cfg.building, sol.actions[t],
                                                t_amb[t], minutes_per_step);
      state = r.state;
      day_cost += step_cost(prices[t], r.u_phys_avg, minutes_per_step / 60.0);
      cold += r.minutes_below_comfort;
      hot += r.minutes_hot_heating;
    }
    rr.daily_cost.push_back(day_cost);
    rr.cost_eur += day_cost;
  }
  rr.violation_minutes = cold + hot;
  return rr;
}

HiddenStateTrace collect_hidden_trace(const ExperimentConfig& cfg,
                                      const ScenarioData& data) {
  HiddenStateTrace trace;
  Environment env(cfg.building, data.test_prices, data.test_weather);
  BauController bau;
  for (int d = 0; d < cfg.test_days; ++d) {
    for (int h = 0; h < 24; ++h) {
      const AgentObservation obs = env.observation();
      const int action = bau.action(obs.t_room_current());
      const Environment::StepRecord rec = env.step(action);
      trace.observations.push_back(obs);
      trace.t_mass.push_back(rec.t_mass);
    }
  }
  return trace;
}

double pearson_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equal-length vectors");
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double den = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (den == 0.0) return 0.0;
  return da.dot(db) / den;
}

std::vector<CellStat> run_fixed_batch_study(const ExperimentConfig& cfg,
                                            const ScenarioData& data,
                                            const std::string& scenario,
                                            const std::vector<AgentKind>& kinds,
                                            std::vector<RunResult>* rows) {
  std::vector<CellStat> cells;
  for (AgentKind kind : kinds)
    for (int days : cfg.batch_ladder)
      cells.push_back({agent_kind_name(kind), days, 0.0, 0.0, {}, ""});

  for (int rep = 0; rep < cfg.replicates; ++rep) {
    const std::uint64_t rep_seed = mix_seed(cfg.seed, 0xAB0 + rep);
    const std::vector<ExperienceBatch> batches = make_fixed_batches(cfg, data, rep_seed);

    std::size_t cell = 0;
    for (AgentKind kind : kinds) {
      for (std::size_t li = 0; li < cfg.batch_ladder.size(); ++li, ++cell) {
        const ExperienceBatch& batch = batches[li];
        const std::uint64_t cell_seed =
            mix_seed(rep_seed, (static_cast<std::uint64_t>(kind) << 8) | li);
        try {
          std::optional<EncoderBundle> enc;
          if (is_physq_kind(kind)) {
            const EncoderConfig ec = encoder_config_for(cfg, mix_seed(cell_seed, 0xEC));
            enc = train_encoder(batch, ec, prior_for(kind)).bundle;
          }
          RunResult rr = evaluate_rl(cfg, data, scenario, batch, kind,
                                     enc ? &*enc : nullptr, cell_seed);
          rr.replicate = rep;
          cells[cell].costs.push_back(rr.cost_eur);
          if (rows) rows->push_back(rr);
          std::cout << "[study] " << scenario << " rep " << rep + 1 << "/"
                    << cfg.replicates << " " << agent_kind_name(kind) << " "
                    << batch.days << "d cost " << rr.cost_eur << " EUR, "
                    << rr.violation_minutes << " min violation" << std::endl;
        } catch (const std::exception& e) {
          cells[cell].error += std::string(cells[cell].error.empty() ? "" : "; ") +
                               "rep " + std::to_string(rep) + ": " + e.what();
          std::cout << "[study] " << scenario << " rep " << rep + 1 << " "
                    << agent_kind_name(kind) << " " << batch.days
                    << "d FAILED: " << e.what() << std::endl;
        }
      }
    }
  }

  for (CellStat& c : cells) {
    const std::size_t n = c.costs.size();
    if (n == 0) continue;
    c.mean = std::accumulate(c.costs.begin(), c.costs.end(), 0.0) / n;
    if (n > 1) {
      double ss = 0.0;
      for (double v : c.costs) ss += (v - c.mean) * (v - c.mean);
      c.stddev = std::sqrt(ss / (n - 1));
    }
    if (!c.error.empty() && n > 0) c.error = "partial: " + c.error;
  }
  return cells;
}

Exp1Result run_experiment1(const ExperimentConfig& cfg, const std::string& scenario) {
  Exp1Result r;
  r.scenario = scenario;
  const ScenarioData data = make_scenario(cfg, scenario);

  std::cout << "[exp1] " << scenario << ": growing-batch physq training" << std::endl;
  const GrowingBatchResult g =
      run_growing_batch(cfg, data, AgentKind::PhysQ, mix_seed(cfg.seed, 0x111));
  if (!g.encoder)
    throw std::logic_error("run_experiment1: growing batch produced no encoder");
  r.training_log = g.daily;

  r.physq = evaluate_rl(cfg, data, scenario, g.batch, AgentKind::PhysQ,
                        &*g.encoder, mix_seed(cfg.seed, 0x222));
  std::cout << "[exp1] " << scenario << " physq: " << r.physq.cost_eur << " EUR"
            << std::endl;
  r.bau = evaluate_bau(cfg, data, scenario);
  std::cout << "[exp1] " << scenario << " bau: " << r.bau.cost_eur << " EUR"
            << std::endl;
  r.mpc_hourly = evaluate_mpc(cfg, data, scenario, 24);
  std::cout << "[exp1] " << scenario << " mpc-hourly: " << r.mpc_hourly.cost_eur
            << " EUR" << std::endl;
  r.mpc_quarterly = evaluate_mpc(cfg, data, scenario, 96);
  std::cout << "[exp1] " << scenario << " mpc-quarterly: "
            << r.mpc_quarterly.cost_eur << " EUR" << std::endl;

  for (RunResult* rr : {&r.physq, &r.bau, &r.mpc_hourly, &r.mpc_quarterly}) {
    rr->batch_days = cfg.train_days;
    rr->replicate = 0;
  }
  return r;
}

void write_results_csv(const std::string& path, const std::vector<RunResult>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "scenario,agent,batch_days,replicate,cost_eur,violation_min\n";
  for (const RunResult& r : rows)
    out << r.scenario << ',' << r.agent << ',' << r.batch_days << ','
        << r.replicate << ',' << csv_num(r.cost_eur) << ',' << r.violation_minutes
        << '\n';
}

void write_daily_csv(const std::string& path, const std::string& agent,
                     const std::vector<DailyLogRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "day,agent,cost_eur,epsilon\n";
  for (const DailyLogRow& r : rows)
    out << r.day << ',' << agent << ',' << csv_num(r.cost_eur) << ','
        << csv_num(r.epsilon) << '\n';
}

void write_cell_stats_csv(const std::string& path, const std::string& scenario,
                          const std::vector<CellStat>& stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "scenario,agent,batch_days,replicates,mean_cost_eur,std_cost_eur,note\n";
  for (const CellStat& c : stats)
    out << scenario << ',' << c.agent << ',' << c.batch_days << ','
        << c.costs.size() << ',' << csv_num(c.mean) << ',' << csv_num(c.stddev)
        << ',' << c.error << '\n';
}

void run_experiment_suite(const ExperimentConfig& cfg, int experiment) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(cfg.out_dir) / ("exp" + std::to_string(experiment));
  fs::create_directories(dir);

  if (experiment == 1) {
    std::vector<RunResult> rows;
    std::ofstream summary(dir / "summary.txt");
    for (const std::string& scenario : {std::string("square"), std::string("belpex")}) {
      const Exp1Result r = run_experiment1(cfg, scenario);
      for (const RunResult* rr : {&r.physq, &r.bau, &r.mpc_hourly, &r.mpc_quarterly})
        rows.push_back(*rr);
      write_daily_csv((dir / ("daily_" + scenario + ".csv")).string(), "physq",
                      r.training_log);
      const double saving = 100.0 * (1.0 - r.physq.cost_eur / r.bau.cost_eur);
      summary << scenario << ": physq " << csv_num(r.physq.cost_eur) << " EUR, bau "
              << csv_num(r.bau.cost_eur) << " EUR (saving " << csv_num(saving)
              << "%), mpc-hourly " << csv_num(r.mpc_hourly.cost_eur)
              << " EUR, mpc-quarterly " << csv_num(r.mpc_quarterly.cost_eur)
              << " EUR\n";
    }
    write_results_csv((dir / "results.csv").string(), rows);
  } else if (experiment == 2) {
    const ScenarioData data = make_scenario(cfg, "square");
    std::vector<RunResult> rows;
    const std::vector<CellStat> cells = run_fixed_batch_study(
        cfg, data, "square",
        {AgentKind::PhysQ, AgentKind::FqiNn, AgentKind::FqiEt}, &rows);
    write_results_csv((dir / "results.csv").string(), rows);
    write_cell_stats_csv((dir / "summary.csv").string(), "square", cells);
  } else if (experiment == 3) {
    std::vector<RunResult> rows;
    for (const std::string& scenario : {std::string("square"), std::string("belpex")}) {
      const ScenarioData data = make_scenario(cfg, scenario);
      const std::vector<CellStat> cells = run_fixed_batch_study(
          cfg, data, scenario, {AgentKind::PhysQ, AgentKind::PhysQWrong}, &rows);
      write_cell_stats_csv((dir / ("summary_" + scenario + ".csv")).string(),
                           scenario, cells);
    }
    write_results_csv((dir / "results.csv").string(), rows);
  } else {
    throw std::invalid_argument("run_experiment_suite: experiment must be 1, 2, or 3");
  }
}

}  // namespace physq
