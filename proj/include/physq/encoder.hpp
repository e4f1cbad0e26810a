#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "physq/mdp.hpp"
#include "physq/mlp.hpp"

namespace physq {

enum class PhysicsPrior { Correct, Wrong };

/// Learnable coefficients of the first-order building model
///   T_r'  = a11 T_r + a12 z + b1 u_phys + c11 T_a
///   z'    = a21 T_r + a22 z
struct PhysicsCoeffs {
  double a11 = 0.9, a12 = 0.05, a21 = 0.05, a22 = 0.95, b1 = 0.1, c11 = 0.05;

  Eigen::Matrix<double, 6, 1> to_vector() const;
  static PhysicsCoeffs from_vector(const Eigen::Matrix<double, 6, 1>& v);
};

struct EncoderConfig {
  std::vector<int> encoder_hidden{32, 32};
  std::vector<int> dynamics_hidden{128};
  double mu = 1.0;  // weight of the physics-residual loss
  // Joint gradient descent reaches the encoder only through the small
  // mass-coupling coefficient, so its progress on the latent is very slow.
  // Between joint phases the trainer therefore solves the physics loss
  // exactly for the latent trajectory (a tridiagonal quadratic given the
  // current coefficients) and refits the encoder to that optimum — block
  // coordinate descent on the same objective.
  int rounds = 3;
  TrainConfig train = {.learning_rate = 0.001, .batch_size = 2048,
                       .max_epochs = 500, .patience = 20, .seed = 0};
};

/// Trained (or initialized) encoder + dynamics networks, physics
/// coefficients, and the input normalization baked in at training time.
struct EncoderBundle {
  MlpModel encoder;   // scaled observation features -> z (degC)
  MlpModel dynamics;  // scaled (features, z, u_phys) -> next room temperature
  PhysicsCoeffs omega;
  PhysicsPrior prior = PhysicsPrior::Correct;
  double mu = 1.0;
  FeatureScaler scaler;          // over observation features
  double z_offset = 0.0, z_scale = 1.0;  // z normalization into the dynamics net
  double u_scale = 1.0;                  // u_phys normalization

  int feature_size() const { return encoder.input_size(); }
};

// Observation features fed to the encoder: room-temperature history, T_a,
// and a sine/cosine encoding of the hour of day.
Eigen::VectorXd encoder_features(const AgentObservation& obs);
int encoder_feature_size(int history_depth = kHistoryDepth);

double encode(const EncoderBundle& bundle, const AgentObservation& obs);
Eigen::VectorXd encode_batch(const EncoderBundle& bundle,
                             const std::vector<Transition>& transitions,
                             bool next_state);

// Residual of the physics prior. Correct prior: 2 components (room and
// hidden-state equations). Wrong prior: 1 component, z_i - ceil(t_room_i).
Eigen::VectorXd physics_residual(double t_room_i, double t_room_next_measured,
                                 double u_phys, double t_ambient, double z_i,
                                 double z_next, const PhysicsCoeffs& omega,
                                 PhysicsPrior prior);

/// Column-wise training matrices extracted once from a batch.
struct EncoderTrainData {
  Eigen::MatrixXd features_i, features_next;  // raw encoder features
  Eigen::VectorXd t_room_i, t_room_next, t_ambient_i, u_phys;

  Eigen::Index count() const { return u_phys.size(); }
};

EncoderTrainData make_encoder_data(const ExperienceBatch& batch);

struct EncoderLossTerms {
  double total = 0.0, pred = 0.0, phys = 0.0;
};

// Evaluates Loss = L_pred + mu * L_phys on `data` and accumulates analytic
// gradients for the encoder, the dynamics net, and omega. Gradients may be
// null when only the loss value is needed.
EncoderLossTerms encoder_loss_and_grads(const EncoderBundle& bundle,
                                        const EncoderTrainData& data,
                                        MlpGrads* encoder_grads,
                                        MlpGrads* dynamics_grads,
                                        Eigen::Matrix<double, 6, 1>* omega_grads);

struct EncoderFitResult {
  EncoderBundle bundle;
  std::vector<EncoderLossTerms> loss_history;
};

// Step 1 of the two-step training: joint Adam minimization of
// L_pred + mu * L_phys over (theta_e, theta_d, omega). Deterministic given
// config.train.seed.
EncoderFitResult train_encoder(const ExperienceBatch& batch,
                               const EncoderConfig& config, PhysicsPrior prior);

// Max relative error of the analytic combined-loss gradient (all encoder,
// dynamics, and omega parameters) against central finite differences.
double encoder_grad_check(const EncoderBundle& bundle,
                          const EncoderTrainData& data, double h = 1e-5);

/// Batch annotated with frozen-encoder hidden-state estimates.
struct AnnotatedBatch {
  ExperienceBatch batch;
  Eigen::VectorXd z, z_next;
};

AnnotatedBatch freeze_and_annotate(const EncoderBundle& bundle,
                                   const ExperienceBatch& batch);

void save_encoder_bundle(std::ostream& os, const EncoderBundle& bundle);
EncoderBundle load_encoder_bundle(std::istream& is);

}  // namespace physq
