// Acceptance suite: every benchmark claim is checked end to end against
// independently coded oracles and pinned tolerances. One PASS/FAIL line per
// criterion; the process exits non-zero if any criterion fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "physq/harness.hpp"
#include "physq/rng.hpp"

using namespace physq;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": "
            << detail << std::endl;
  if (!ok) ++g_failures;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Criterion 5: fitted Q-iteration equals finite-horizon value iteration on a
// discrete toy problem solvable in closed form.

class TableQ : public QRegressor {
 public:
  void fit(const Eigen::MatrixXd& features, const Eigen::VectorXi& actions,
           const Eigen::VectorXd& targets) override {
    table_.clear();
    for (Eigen::Index i = 0; i < features.rows(); ++i)
      table_[{static_cast<int>(features(i, 4)), actions(i)}] = targets(i);
  }
  Eigen::Vector2d predict(const Eigen::VectorXd& features) const override {
    Eigen::Vector2d q;
    for (int a = 0; a < 2; ++a) {
      const auto it = table_.find({static_cast<int>(features(4)), a});
      q(a) = it == table_.end() ? 0.0 : it->second;
    }
    return q;
  }
  void save(std::ostream&) const override {}

 private:
  std::map<std::pair<int, int>, double> table_;
};

void criterion5() {
  const double t0 = now_seconds();
  constexpr int kStates = 5;
  auto obs_of = [](int s) {
    return make_observation({static_cast<double>(s)}, 0.0, 0);
  };
  ExperienceBatch batch;
  for (int s = 0; s < kStates; ++s)
    for (int a = 0; a < 2; ++a) {
      Transition t;
      t.obs = obs_of(s);
      t.action = a;
      t.next_obs = obs_of((s + 1 + 2 * a) % kStates);
      t.u_phys = 10.0 * a;
      batch.transitions.push_back(t);
    }

  const int horizon = 24;
  ForecastBundle f;
  Rng rng(404);
  for (int k = 0; k < 2 * horizon; ++k) {
    f.prices.push_back(rng.uniform() < 0.3 ? 120.0 : 30.0);
    f.t_ambient.push_back(0.0);
  }

  // Independent value iteration.
  std::vector<std::array<std::array<double, 2>, kStates>> Q(2 * horizon);
  for (int k = 2 * horizon - 1; k >= 0; --k)
    for (int s = 0; s < kStates; ++s)
      for (int a = 0; a < 2; ++a) {
        double v = f.prices[k] * (10.0 * a) / 1000.0;
        if (k + 1 < 2 * horizon) {
          const int sn = (s + 1 + 2 * a) % kStates;
          v += std::min(Q[k + 1][sn][0], Q[k + 1][sn][1]);
        }
        Q[k][s][a] = v;
      }

  const RegressorFactory factory = [](int, std::uint64_t) -> std::unique_ptr<QRegressor> {
    return std::make_unique<TableQ>();
  };
  const QEnsemble ens = fqi_fit(batch, f, factory, horizon, 0);

  double max_err = 0.0;
  for (int k = 0; k < 2 * horizon; ++k)
    for (int s = 0; s < kStates; ++s) {
      const Eigen::Vector2d q =
          ens.approximators[k]->predict(full_state_features(obs_of(s)));
      for (int a = 0; a < 2; ++a)
        max_err = std::max(max_err, std::abs(q(a) - Q[k][s][a]));
    }
  const double secs = now_seconds() - t0;
  report(5, max_err < 1e-9 && secs < 10.0,
         "backward induction vs value iteration: max |dQ| = " +
             std::to_string(max_err) + " (tol 1e-9), " + fmt(secs) + " s (limit 10)");
}

// ---------------------------------------------------------------------------
// Criterion 6: the grid dynamic program agrees with exhaustive enumeration.

void criterion6() {
  const double t0 = now_seconds();
  Rng rng(71);
  int solved = 0, mismatched = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int horizon = 10;
    std::vector<double> prices(horizon), t_amb(horizon);
    for (int t = 0; t < horizon; ++t) {
      prices[t] = rng.uniform() < 0.3 ? 120.0 : rng.uniform(20.0, 60.0);
      t_amb[t] = rng.uniform(-3.0, 12.0);
    }
    const MpcProblem p = MpcProblem::from_params(
        RcParams{}, horizon, prices, t_amb,
        Eigen::Vector2d(rng.uniform(19.0, 21.5), rng.uniform(19.0, 23.0)), 1.0);
    bool dp_ok = true, ex_ok = true;
    double c_dp = 0.0, c_ex = 0.0;
    try {
      c_dp = mpc_solve_dp(p, 0.01).cost;
    } catch (const MpcInfeasible&) {
      dp_ok = false;
    }
    try {
      c_ex = mpc_solve_exhaustive(p).cost;
    } catch (const MpcInfeasible&) {
      ex_ok = false;
    }
    if (dp_ok != ex_ok) {
      ++mismatched;
      continue;
    }
    if (!dp_ok) continue;
    ++solved;
    // Grid tolerance: 3% of the exhaustive cost (0.06 EUR floor) on a
    // 0.01 degC value grid.
    worst = std::max(worst,
                     std::abs(c_dp - c_ex) / std::max(0.03 * c_ex, 0.06));
  }
  const double secs = now_seconds() - t0;
  report(6, solved >= 30 && mismatched <= 3 && worst <= 1.0 && secs < 60.0,
         "DP vs 2^10 enumeration on 50 instances: " + std::to_string(solved) +
             " solved, " + std::to_string(mismatched) +
             " borderline-feasibility, worst gap/tolerance = " + fmt(worst) +
             " (limit 1), " + fmt(secs) + " s (limit 60)");
}

// ---------------------------------------------------------------------------
// Criterion 7: analytic gradients and the simulator integrator.

void criterion7() {
  double worst_mlp = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const MlpModel m = MlpModel::random({6, 16, 16, 2}, seed);
    Rng rng(mix_seed(seed, 7));
    Eigen::VectorXd x(6), t(2);
    for (int i = 0; i < 6; ++i) x(i) = rng.uniform(-2.0, 2.0);
    for (int i = 0; i < 2; ++i) t(i) = rng.uniform(-2.0, 2.0);
    worst_mlp = std::max(worst_mlp, grad_check(m, x, t));
  }

  double worst_enc = 0.0;
  for (const PhysicsPrior prior : {PhysicsPrior::Correct, PhysicsPrior::Wrong}) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      EncoderBundle b;
      const int dim = encoder_feature_size();
      b.encoder = MlpModel::random({dim, 6, 1}, mix_seed(seed, 1));
      b.dynamics = MlpModel::random({dim + 2, 8, 1}, mix_seed(seed, 2));
      b.prior = prior;
      b.mu = 0.8;
      b.scaler.mean = Eigen::VectorXd::Zero(dim);
      b.scaler.stddev = Eigen::VectorXd::Ones(dim);
      b.z_offset = 20.0;
      b.z_scale = 2.0;
      b.u_scale = 10.0;

      ExperienceBatch batch;
      Rng rng(mix_seed(seed, 9));
      for (int i = 0; i < 6; ++i) {
        Transition t;
        std::vector<double> hist;
        for (int k = 0; k < 5; ++k) hist.push_back(rng.uniform(18.0, 22.0));
        t.obs = make_observation(hist, rng.uniform(-5.0, 10.0), i);
        hist.push_back(rng.uniform(18.0, 22.0));
        t.next_obs = make_observation(hist, rng.uniform(-5.0, 10.0), i + 1);
        t.action = static_cast<int>(rng.uniform_int(2));
        t.u_phys = t.action * 10.0;
        batch.transitions.push_back(t);
      }
      worst_enc = std::max(worst_enc,
                           encoder_grad_check(b, make_encoder_data(batch)));
    }
  }

  // Integrator accuracy against the matrix-exponential solution.
  RcParams p;
  const Eigen::Matrix2d A = p.system_matrix();
  const Eigen::Matrix2d Ad = A.exp();
  const Eigen::Matrix2d M = A.inverse() * (Ad - Eigen::Matrix2d::Identity());
  double worst_rc = 0.0;
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector2d x0(rng.uniform(14.0, 26.0), rng.uniform(14.0, 26.0));
    const double t_amb = rng.uniform(-10.0, 15.0);
    const double u = rng.uniform(0.0, p.heater_power_max);
    SimState s{x0(0), x0(1), 0};
    for (int m = 0; m < 60; ++m) s = rc_substep(s, p, u, t_amb);
    const Eigen::Vector2d x1 =
        Ad * x0 + M * (p.input_vector() * u + p.ambient_vector() * t_amb);
    worst_rc = std::max({worst_rc, std::abs(s.t_room - x1(0)),
                         std::abs(s.t_mass - x1(1))});
  }

  report(7, worst_mlp < 1e-4 && worst_enc < 1e-4 && worst_rc < 0.05,
         "gradient checks: network " + std::to_string(worst_mlp) +
             ", combined loss " + std::to_string(worst_enc) +
             " (tol 1e-4); integrator vs exact solution " +
             std::to_string(worst_rc) + " degC/h (tol 0.05)");
}

// ---------------------------------------------------------------------------
// Criteria 1, 2, 8, 9: head-to-head benchmark plus comfort and the learned
// hidden state.

struct ScenarioOutcome {
  RunResult physq, bau, mpc_h, mpc_q;
  double seconds = 0.0;
  GrowingBatchResult training;
  ScenarioData data;
};

ScenarioOutcome run_scenario(const ExperimentConfig& cfg, const std::string& scenario) {
  ScenarioOutcome o;
  const double t0 = now_seconds();
  o.data = make_scenario(cfg, scenario);
  o.training = run_growing_batch(cfg, o.data, AgentKind::PhysQ, mix_seed(cfg.seed, 0x111));
  o.physq = evaluate_rl(cfg, o.data, scenario, o.training.batch, AgentKind::PhysQ,
                        &*o.training.encoder, mix_seed(cfg.seed, 0x222));
  o.seconds = now_seconds() - t0;  // agent training + evaluation budget
  o.bau = evaluate_bau(cfg, o.data, scenario);
  o.mpc_h = evaluate_mpc(cfg, o.data, scenario, 24);
  o.mpc_q = evaluate_mpc(cfg, o.data, scenario, 96);
  std::cout << "  [" << scenario << "] physq " << fmt(o.physq.cost_eur) << ", bau "
            << fmt(o.bau.cost_eur) << ", mpc-hourly " << fmt(o.mpc_h.cost_eur)
            << ", mpc-quarterly " << fmt(o.mpc_q.cost_eur) << " EUR; "
            << fmt(o.seconds) << " s" << std::endl;
  return o;
}

void criteria_1_2_8_9(const ExperimentConfig& cfg) {
  const ScenarioOutcome sq = run_scenario(cfg, "square");
  const ScenarioOutcome bx = run_scenario(cfg, "belpex");

  // Criterion 1: at least 5% cheaper than the rule-based controller on both
  // scenarios, within 15 minutes of compute per scenario.
  const double save_sq = 1.0 - sq.physq.cost_eur / sq.bau.cost_eur;
  const double save_bx = 1.0 - bx.physq.cost_eur / bx.bau.cost_eur;
  report(1,
         save_sq >= 0.05 && save_bx >= 0.05 && sq.seconds <= 900.0 &&
             bx.seconds <= 900.0,
         "savings vs rule-based: square " + fmt(100 * save_sq) + "%, market " +
             fmt(100 * save_bx) + "% (min 5%); compute " + fmt(sq.seconds) +
             " / " + fmt(bx.seconds) + " s (limit 900)");

  // Criterion 2: on the square wave the learned policy is at worst the
  // hourly MPC; the quarterly MPC lower-bounds everything within the 3%
  // value-grid tolerance.
  const double best_other =
      std::min({sq.physq.cost_eur, sq.bau.cost_eur, sq.mpc_h.cost_eur});
  const bool q_is_floor = sq.mpc_q.cost_eur <= 1.03 * best_other + 0.02;
  const double best_other_bx =
      std::min({bx.physq.cost_eur, bx.bau.cost_eur, bx.mpc_h.cost_eur});
  const bool q_is_floor_bx = bx.mpc_q.cost_eur <= 1.03 * best_other_bx + 0.02;
  report(2,
         sq.physq.cost_eur <= sq.mpc_h.cost_eur && q_is_floor && q_is_floor_bx,
         "square: physq " + fmt(sq.physq.cost_eur) + " <= hourly MPC " +
             fmt(sq.mpc_h.cost_eur) + "; quarterly MPC is the floor on both "
             "scenarios (3% grid tolerance)");

  // Criterion 8: zero comfort violations in every evaluated rollout.
  long total_violation = 0;
  for (const RunResult* r : {&sq.physq, &sq.bau, &sq.mpc_h, &sq.mpc_q,
                             &bx.physq, &bx.bau, &bx.mpc_h, &bx.mpc_q})
    total_violation += r->violation_minutes;
  report(8, total_violation == 0,
         "comfort violations across all held-out rollouts: " +
             std::to_string(total_violation) + " min (limit 0)");

  // Criterion 9: the learned hidden state tracks the true mass temperature;
  // the deliberately wrong prior breaks that link.
  const HiddenStateTrace trace = collect_hidden_trace(cfg, sq.data);
  const Eigen::Index n = static_cast<Eigen::Index>(trace.observations.size());
  Eigen::VectorXd t_mass(n), z_correct(n), z_wrong(n);
  for (Eigen::Index i = 0; i < n; ++i) t_mass(i) = trace.t_mass[i];

  EncoderConfig ec;
  ec.mu = cfg.mu;
  ec.train.seed = mix_seed(cfg.seed, 0x999);
  const EncoderBundle wrong =
      train_encoder(sq.training.batch, ec, PhysicsPrior::Wrong).bundle;
  for (Eigen::Index i = 0; i < n; ++i) {
    z_correct(i) = encode(*sq.training.encoder, trace.observations[i]);
    z_wrong(i) = encode(wrong, trace.observations[i]);
  }
  const double corr_correct = pearson_correlation(z_correct, t_mass);
  const double corr_wrong = pearson_correlation(z_wrong, t_mass);
  report(9, corr_correct >= 0.8 && corr_correct - corr_wrong >= 0.2,
         "corr(z, T_mass) = " + fmt(corr_correct) + " (min 0.8), wrong prior " +
             fmt(corr_wrong) + " (gap min 0.2)");
}

// ---------------------------------------------------------------------------
// Criterion 3: sample efficiency against the full-state neural agent.

const CellStat* find_cell(const std::vector<CellStat>& cells,
                          const std::string& agent, int days) {
  for (const CellStat& c : cells)
    if (c.agent == agent && c.batch_days == days) return &c;
  return nullptr;
}

void criterion3(const ExperimentConfig& cfg) {
  const ScenarioData data = make_scenario(cfg, "square");
  const std::vector<CellStat> cells = run_fixed_batch_study(
      cfg, data, "square", {AgentKind::PhysQ, AgentKind::FqiNn}, nullptr);
  const CellStat* p6 = find_cell(cells, "physq", 6);
  const CellStat* n6 = find_cell(cells, "fqi-nn", 6);
  const CellStat* p30 = find_cell(cells, "physq", 30);
  const CellStat* n30 = find_cell(cells, "fqi-nn", 30);
  if (!p6 || !n6 || !p30 || !n30 || p6->costs.empty() || n6->costs.empty() ||
      p30->costs.empty() || n30->costs.empty()) {
    report(3, false, "fixed-batch study incomplete");
    return;
  }
  const double pooled =
      std::sqrt(0.5 * (p30->stddev * p30->stddev + n30->stddev * n30->stddev));
  const bool small_batch = p6->mean <= n6->mean && p6->stddev <= n6->stddev;
  const bool large_batch = std::abs(p30->mean - n30->mean) <= pooled;
  report(3, small_batch && large_batch,
         "6-day batch: physq " + fmt(p6->mean) + "+-" + fmt(p6->stddev) +
             " vs fqi-nn " + fmt(n6->mean) + "+-" + fmt(n6->stddev) +
             "; 30-day gap " + fmt(std::abs(p30->mean - n30->mean)) +
             " <= pooled std " + fmt(pooled));
}

// ---------------------------------------------------------------------------
// Criterion 4: the deliberately wrong physics prior hurts.

void criterion4(const ExperimentConfig& cfg) {
  bool per_size_somewhere = true;  // every size worse on >= 1 scenario
  std::vector<std::vector<bool>> worse_per_scenario;
  bool avg_worse_everywhere = true;
  std::ostringstream detail;

  for (const std::string& scenario : {std::string("square"), std::string("belpex")}) {
    const ScenarioData data = make_scenario(cfg, scenario);
    const std::vector<CellStat> cells = run_fixed_batch_study(
        cfg, data, scenario, {AgentKind::PhysQ, AgentKind::PhysQWrong}, nullptr);
    std::vector<bool> worse;
    double mean_c = 0.0, mean_w = 0.0;
    for (int days : cfg.batch_ladder) {
      const CellStat* c = find_cell(cells, "physq", days);
      const CellStat* w = find_cell(cells, "physq-wrong", days);
      if (!c || !w || c->costs.empty() || w->costs.empty()) {
        report(4, false, "ablation study incomplete on " + scenario);
        return;
      }
      worse.push_back(w->mean > c->mean);
      mean_c += c->mean;
      mean_w += w->mean;
    }
    worse_per_scenario.push_back(worse);
    mean_c /= cfg.batch_ladder.size();
    mean_w /= cfg.batch_ladder.size();
    avg_worse_everywhere = avg_worse_everywhere && mean_w > mean_c;
    detail << scenario << " avg correct " << fmt(mean_c) << " vs wrong "
           << fmt(mean_w) << "; ";
  }
  for (std::size_t i = 0; i < cfg.batch_ladder.size(); ++i) {
    bool somewhere = false;
    for (const auto& sc : worse_per_scenario) somewhere = somewhere || sc[i];
    per_size_somewhere = per_size_somewhere && somewhere;
  }
  report(4, per_size_somewhere && avg_worse_everywhere,
         detail.str() + "wrong prior worse at every batch size on >= 1 scenario");
}

}  // namespace

int main() {
  std::cout << "acceptance suite (fixed seeds, sequential)" << std::endl;
  ExperimentConfig cfg;  // benchmark defaults

  criterion5();
  criterion6();
  criterion7();
  criteria_1_2_8_9(cfg);
  criterion3(cfg);
  criterion4(cfg);

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED"
                                : std::to_string(g_failures) + " CRITERIA FAILED")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
