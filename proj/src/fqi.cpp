#include "physq/fqi.hpp"

#include <fstream>
#include <stdexcept>

namespace physq {

std::string agent_kind_name(AgentKind kind) {
  switch (kind) {
    case AgentKind::FqiNn: return "fqi-nn";
    case AgentKind::FqiEt: return "fqi-et";
    case AgentKind::PhysQ: return "physq";
    case AgentKind::PhysQWrong: return "physq-wrong";
  }
  throw std::logic_error("agent_kind_name: unreachable");
}

AgentKind parse_agent_kind(const std::string& name) {
  if (name == "fqi-nn") return AgentKind::FqiNn;
  if (name == "fqi-et") return AgentKind::FqiEt;
  if (name == "physq") return AgentKind::PhysQ;
  if (name == "physq-wrong") return AgentKind::PhysQWrong;
  throw std::invalid_argument("unknown agent kind '" + name + "'");
}

bool is_physq_kind(AgentKind kind) {
  return kind == AgentKind::PhysQ || kind == AgentKind::PhysQWrong;
}

Eigen::VectorXd full_state_features(const AgentObservation& obs) {
  Eigen::VectorXd f(obs.t_room_history.size() + 1);
  f.head(obs.t_room_history.size()) = obs.t_room_history;
  f(obs.t_room_history.size()) = obs.t_ambient;
  return f;
}

Eigen::VectorXd low_dim_features(const AgentObservation& obs, double z) {
  Eigen::VectorXd f(3);
  f << obs.t_room_current(), z, obs.t_ambient;
  return f;
}

TargetSet build_targets(const BatchView& view, const ForecastBundle& forecasts,
                        int slot, const QRegressor* next_approximator) {
  forecasts.validate();
  if (slot < 0 || slot >= forecasts.slots())
    throw std::out_of_range("build_targets: slot out of range");
  const auto& transitions = *view.transitions;
  const Eigen::Index n = static_cast<Eigen::Index>(transitions.size());
  if (n == 0) throw std::invalid_argument("build_targets: empty batch");

  const int dim = view.low_dimensional()
                      ? 3
                      : static_cast<int>(transitions[0].obs.t_room_history.size()) + 1;
  TargetSet out;
  out.features.resize(n, dim);
  out.actions.resize(n);
  out.targets.resize(n);

  const double price = forecasts.prices[slot];
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = transitions[i];
    const AgentObservation obs = inject_forecast(t.obs, forecasts, slot);
    out.features.row(i) =
        (view.low_dimensional() ? low_dim_features(obs, (*view.z)(i))
                                : full_state_features(obs))
            .transpose();
    out.actions(i) = t.action;
    out.targets(i) = step_cost(price, t.u_phys, 1.0);
  }

  const int next_slot = slot + 1;
  if (next_approximator && next_slot < forecasts.slots()) {
    Eigen::MatrixXd next_features(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Transition& t = transitions[i];
      const AgentObservation next = inject_forecast(t.next_obs, forecasts, next_slot);
      next_features.row(i) =
          (view.low_dimensional() ? low_dim_features(next, (*view.z_next)(i))
                                  : full_state_features(next))
              .transpose();
    }
    const Eigen::MatrixXd q_next = next_approximator->predict_batch(next_features);
    out.targets += q_next.rowwise().minCoeff();
  }
  return out;
}

namespace {

QEnsemble fit_backward_loop(const BatchView& view, const ForecastBundle& forecasts,
                            const RegressorFactory& factory, int horizon,
                            std::uint64_t seed, AgentKind kind) {
  forecasts.validate();
  if (horizon < 1) throw std::invalid_argument("fqi_fit: horizon < 1");
  if (forecasts.slots() != 2 * horizon)
    throw std::invalid_argument("fqi_fit: forecasts must cover 2T slots");
  if (view.size() == 0) throw std::invalid_argument("fqi_fit: empty batch");

  const int total_slots = 2 * horizon;
  QEnsemble ensemble;
  ensemble.horizon = horizon;
  ensemble.kind = kind;
  ensemble.approximators.resize(total_slots);
  ensemble.slot_losses.assign(total_slots, 0.0);

  const int dim = view.low_dimensional()
                      ? 3
                      : static_cast<int>((*view.transitions)[0].obs.t_room_history.size()) + 1;

  const QRegressor* next_q = nullptr;  // zero function beyond the last slot
  for (int slot = total_slots - 1; slot >= 0; --slot) {
    const TargetSet ts = build_targets(view, forecasts, slot, next_q);
    auto approx = factory(dim, mix_seed(seed, 0x9000 + slot));
    try {
      approx->fit(ts.features, ts.actions, ts.targets);
    } catch (const std::exception& e) {
      throw std::runtime_error("fqi_fit: regressor fit failed at slot " +
                               std::to_string(slot) + ": " + e.what());
    }
    ensemble.slot_losses[slot] = approx->train_loss();
    ensemble.approximators[slot] = std::move(approx);
    next_q = ensemble.approximators[slot].get();
  }
  return ensemble;
}

}  // namespace

QEnsemble fqi_fit(const ExperienceBatch& batch, const ForecastBundle& forecasts,
                  const RegressorFactory& factory, int horizon, std::uint64_t seed,
                  AgentKind kind) {
  return fit_backward_loop(BatchView::of(batch), forecasts, factory, horizon, seed, kind);
}

QEnsemble physq_fit_step2(const AnnotatedBatch& annotated, EncoderBundle encoder,
                          const ForecastBundle& forecasts,
                          const RegressorFactory& factory, int horizon,
                          std::uint64_t seed, AgentKind kind) {
  QEnsemble ensemble = fit_backward_loop(BatchView::of(annotated), forecasts, factory,
                                         horizon, seed, kind);
  ensemble.encoder = std::move(encoder);
  return ensemble;
}

QEnsemble physq_fit(const ExperienceBatch& batch, const ForecastBundle& forecasts,
                    const RegressorFactory& factory, int horizon,
                    PhysicsPrior selector, const EncoderConfig& encoder_config,
                    std::uint64_t seed) {
  EncoderConfig cfg = encoder_config;
  cfg.train.seed = mix_seed(seed, 0xe2c);
  EncoderFitResult enc = train_encoder(batch, cfg, selector);
  const AnnotatedBatch annotated = freeze_and_annotate(enc.bundle, batch);
  return physq_fit_step2(annotated, std::move(enc.bundle), forecasts, factory, horizon,
                         seed,
                         selector == PhysicsPrior::Correct ? AgentKind::PhysQ
                                                           : AgentKind::PhysQWrong);
}

int greedy_action(const QEnsemble& ensemble, const AgentObservation& obs, int slot) {
  if (slot < 0 || slot >= ensemble.horizon)
    throw std::out_of_range("greedy_action: slot outside the policy slice [0, T)");
  const QRegressor* q = ensemble.approximators.at(slot).get();
  if (!q) throw std::logic_error("greedy_action: ensemble not fitted");
  Eigen::VectorXd features;
  if (is_physq_kind(ensemble.kind)) {
    if (!ensemble.encoder) throw std::logic_error("greedy_action: physq ensemble lacks encoder");
    features = low_dim_features(obs, encode(*ensemble.encoder, obs));
  } else {
    features = full_state_features(obs);
  }
  const Eigen::Vector2d values = q->predict(features);
  return values(0) <= values(1) ? 0 : 1;
}

int epsilon_greedy_action(const QEnsemble& ensemble, const AgentObservation& obs,
                          int slot, double epsilon, Rng& rng) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon_greedy_action: epsilon outside [0,1]");
  if (rng.uniform() < epsilon) return static_cast<int>(rng.uniform_int(2));
  return greedy_action(ensemble, obs, slot);
}

void save_ensemble(const QEnsemble& ensemble, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_ensemble: cannot write " + path);
  os << "physq-ensemble 1 " << agent_kind_name(ensemble.kind) << ' '
     << ensemble.horizon << ' ' << (ensemble.encoder ? 1 : 0) << '\n';
  if (ensemble.encoder) save_encoder_bundle(os, *ensemble.encoder);
  for (const auto& q : ensemble.approximators) {
    if (!q) throw std::logic_error("save_ensemble: unfitted slot");
    q->save(os);
  }
}

QEnsemble load_ensemble(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_ensemble: cannot open " + path);
  std::string tag, kind_name;
  int version = 0, has_encoder = 0;
  QEnsemble ensemble;
  if (!(is >> tag >> version >> kind_name >> ensemble.horizon >> has_encoder) ||
      tag != "physq-ensemble" || version != 1)
    throw std::runtime_error("load_ensemble: bad header in " + path);
  ensemble.kind = parse_agent_kind(kind_name);
  if (has_encoder) ensemble.encoder = load_encoder_bundle(is);
  ensemble.approximators.resize(2 * ensemble.horizon);
  for (auto& q : ensemble.approximators) q = load_regressor(is);
  ensemble.slot_losses.assign(2 * ensemble.horizon, 0.0);
  return ensemble;
}

}  // namespace physq
