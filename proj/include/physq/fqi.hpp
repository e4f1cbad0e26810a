#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "physq/encoder.hpp"
#include "physq/mdp.hpp"
#include "physq/regressor.hpp"
#include "physq/rng.hpp"

namespace physq {

enum class AgentKind { FqiNn, FqiEt, PhysQ, PhysQWrong };

std::string agent_kind_name(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);
bool is_physq_kind(AgentKind kind);

/// 2T time-indexed Q-function approximators (slot 0 first); only slots
/// 0..T-1 are consulted at decision time. PhysQ kinds carry the frozen
/// encoder used to annotate states.
struct QEnsemble {
  int horizon = 24;  // T
  AgentKind kind = AgentKind::FqiNn;
  std::vector<std::unique_ptr<QRegressor>> approximators;  // size 2T
  std::optional<EncoderBundle> encoder;
  std::vector<double> slot_losses;

  int slots() const { return static_cast<int>(approximators.size()); }
};

// Full-state features for fqi-nn / fqi-et: room-temperature history + T_a.
Eigen::VectorXd full_state_features(const AgentObservation& obs);
// Low-dimensional features for physq: current room temperature, z, T_a.
Eigen::VectorXd low_dim_features(const AgentObservation& obs, double z);

/// Transitions plus optional frozen-encoder annotations, as consumed by the
/// backward fitting loop.
struct BatchView {
  const std::vector<Transition>* transitions = nullptr;
  const Eigen::VectorXd* z = nullptr;       // present for physq kinds
  const Eigen::VectorXd* z_next = nullptr;

  bool low_dimensional() const { return z != nullptr; }
  std::size_t size() const { return transitions->size(); }

  static BatchView of(const ExperienceBatch& batch) { return {&batch.transitions}; }
  static BatchView of(const AnnotatedBatch& ann) {
    return {&ann.batch.transitions, &ann.z, &ann.z_next};
  }
};

struct TargetSet {
  Eigen::MatrixXd features;  // samples x dim, forecast-injected for the slot
  Eigen::VectorXi actions;
  Eigen::VectorXd targets;
};

// Training pairs for slot `slot` (0-based): target = forecast price at the
// slot times u_phys, plus the bootstrap min over actions of the already
// fitted slot+1 approximator (zero when absent).
TargetSet build_targets(const BatchView& view, const ForecastBundle& forecasts,
                        int slot, const QRegressor* next_approximator);

// Backward loop over slots 2T-1 .. 0, fitting a fresh regressor per slot.
QEnsemble fqi_fit(const ExperienceBatch& batch, const ForecastBundle& forecasts,
                  const RegressorFactory& factory, int horizon, std::uint64_t seed,
                  AgentKind kind = AgentKind::FqiNn);

// Step 2 only: the encoder is already trained and frozen.
QEnsemble physq_fit_step2(const AnnotatedBatch& annotated, EncoderBundle encoder,
                          const ForecastBundle& forecasts,
                          const RegressorFactory& factory, int horizon,
                          std::uint64_t seed, AgentKind kind = AgentKind::PhysQ);

// Full two-step procedure: train the encoder on the raw batch, freeze it,
// annotate, then run the backward loop on low-dimensional features.
QEnsemble physq_fit(const ExperienceBatch& batch, const ForecastBundle& forecasts,
                    const RegressorFactory& factory, int horizon,
                    PhysicsPrior selector, const EncoderConfig& encoder_config,
                    std::uint64_t seed);

// Cost-minimizing action from the slot-t approximator; ties break to 0.
// Only the policy slice (t < T) may be consulted.
int greedy_action(const QEnsemble& ensemble, const AgentObservation& obs, int slot);

int epsilon_greedy_action(const QEnsemble& ensemble, const AgentObservation& obs,
                          int slot, double epsilon, Rng& rng);

void save_ensemble(const QEnsemble& ensemble, const std::string& path);
QEnsemble load_ensemble(const std::string& path);

}  // namespace physq
