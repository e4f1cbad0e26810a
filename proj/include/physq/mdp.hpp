#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace physq {

inline constexpr int kHistoryDepth = 4;  // k: hours of room-temperature history

/// Agent-facing state: the k+1 most recent hourly room temperatures
/// (oldest first), the current outside temperature, and the hour-of-horizon
/// index in [0, 2T).
struct AgentObservation {
  Eigen::VectorXd t_room_history;  // length k+1, oldest first
  double t_ambient = 0.0;
  int timeslot = 0;

  double t_room_current() const { return t_room_history(t_room_history.size() - 1); }
};

struct Transition {
  AgentObservation obs;
  int action = 0;            // requested u_i, 0 or 1
  AgentObservation next_obs;
  double u_phys = 0.0;       // delivered average power, kW
};

/// Ordered, append-only collection of transitions plus collection metadata.
struct ExperienceBatch {
  std::vector<Transition> transitions;
  std::uint64_t seed = 0;
  int days = 0;

  std::size_t size() const { return transitions.size(); }
  bool empty() const { return transitions.empty(); }
};

/// Exact forecasts of exogenous variables over the 2T-slot horizon.
struct ForecastBundle {
  std::vector<double> prices;     // EUR/MWh, length 2T
  std::vector<double> t_ambient;  // degC, length 2T

  int slots() const { return static_cast<int>(prices.size()); }
  void validate() const;
};

// Builds an observation from a buffer of past hourly room temperatures
// (most recent last). Buffers shorter than k+1 are padded by repeating the
// earliest sample.
AgentObservation make_observation(const std::vector<double>& buffer,
                                  double t_ambient, int timeslot,
                                  int depth = kHistoryDepth);

// c_i = lambda_i * u_phys_i * dt, with EUR/MWh * kW * h -> EUR.
double step_cost(double price_eur_mwh, double u_phys_kw, double dt_hours);

// Returns next_obs with t_ambient replaced by the forecast for target_slot
// and timeslot set to target_slot. The room-temperature history is untouched.
AgentObservation inject_forecast(const AgentObservation& next_obs,
                                 const ForecastBundle& forecasts,
                                 int target_slot);

// Line-oriented text persistence, one transition per line. Round trip is the
// identity on all fields to full double precision.
void save_batch(const ExperienceBatch& batch, const std::string& path);
ExperienceBatch load_batch(const std::string& path);

}  // namespace physq
