#include "physq/rc_model.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace physq {

void RcParams::validate() const {
  if (!(room_capacity > 0 && mass_capacity > 0 && resist_room_mass > 0 &&
        resist_room_ambient > 0 && heater_power_max > 0))
    throw std::invalid_argument("RcParams: all fields must be strictly positive");
  const double tau_room = room_capacity /
      (1.0 / resist_room_mass + 1.0 / resist_room_ambient);
  const double tau_mass = mass_capacity * resist_room_mass;
  if (!(tau_room < tau_mass))
    throw std::invalid_argument("RcParams: room time constant must be shorter than mass time constant");
}

Eigen::Matrix2d RcParams::system_matrix() const {
  Eigen::Matrix2d A;
  A(0, 0) = -(1.0 / resist_room_mass + 1.0 / resist_room_ambient) / room_capacity;
  A(0, 1) = 1.0 / (resist_room_mass * room_capacity);
  A(1, 0) = 1.0 / (resist_room_mass * mass_capacity);
  A(1, 1) = -1.0 / (resist_room_mass * mass_capacity);
  return A;
}

Eigen::Vector2d RcParams::input_vector() const {
  return {1.0 / room_capacity, 0.0};
}

Eigen::Vector2d RcParams::ambient_vector() const {
  return {1.0 / (resist_room_ambient * room_capacity), 0.0};
}

void RcParams::discretize(double dt_hours, Eigen::Matrix2d& Ad,
                          Eigen::Vector2d& Bd, Eigen::Vector2d& Ed) const {
  const Eigen::Matrix2d A = system_matrix();
  Ad = (A * dt_hours).exp();
  const Eigen::Matrix2d M = A.inverse() * (Ad - Eigen::Matrix2d::Identity());
  Bd = M * input_vector();
  Ed = M * ambient_vector();
}

double RcParams::steady_state_power(double t_room, double t_amb) const {
  // In steady state T_m = T_r, so the mass branch carries no heat.
  return (t_room - t_amb) / resist_room_ambient;
}

SimState rc_substep(const SimState& state, const RcParams& params,
                    double u_phys, double t_ambient, int dt_minutes) {
  if (dt_minutes != 1)
    throw std::invalid_argument("rc_substep: dt must be 1 minute");
  if (!std::isfinite(state.t_room) || !std::isfinite(state.t_mass) ||
      !std::isfinite(u_phys) || !std::isfinite(t_ambient))
    throw std::invalid_argument("rc_substep: non-finite input");
  if (u_phys < 0.0 || u_phys > params.heater_power_max)
    throw std::invalid_argument("rc_substep: u_phys outside [0, u_max]");

  const double dt = dt_minutes / 60.0;  // hours
  const double q_mass = (state.t_mass - state.t_room) / params.resist_room_mass;
  const double q_amb = (t_ambient - state.t_room) / params.resist_room_ambient;
  SimState next;
  next.t_room = state.t_room + dt * (q_mass + q_amb + u_phys) / params.room_capacity;
  next.t_mass = state.t_mass + dt * (-q_mass) / params.mass_capacity;
  next.minute_of_sim = state.minute_of_sim + dt_minutes;
  return next;
}

double backup_override(double t_room, int u_requested, const RcParams& params) {
  if (t_room > kComfortHigh) return 0.0;
  if (t_room < kComfortLow) return params.heater_power_max;
  return u_requested * params.heater_power_max;
}

HourStepResult env_step_minutes(const SimState& state, const RcParams& params,
                                int u_requested, double t_ambient, int minutes) {
  if (u_requested != 0 && u_requested != 1)
    throw std::invalid_argument("env_step_minutes: action must be 0 or 1");

  HourStepResult r;
  r.state = state;
  r.min_t_room = state.t_room;
  r.max_t_room = state.t_room;
  const double requested_power = u_requested * params.heater_power_max;
  bool override_active = false;
  double override_power = 0.0;
  double energy_minutes = 0.0;

  for (int m = 0; m < minutes; ++m) {
    double u_phys;
    if (override_active) {
      u_phys = override_power;
    } else {
      u_phys = backup_override(r.state.t_room, u_requested, params);
      if (u_phys != requested_power) {
        override_active = true;
        override_power = u_phys;
        r.fire_minute = m;
      }
    }
    if (r.state.t_room < kComfortLow - kComfortSlack) ++r.minutes_below_comfort;
    if (r.state.t_room > kComfortHigh && u_phys > 0.0) ++r.minutes_hot_heating;
    r.state = rc_substep(r.state, params, u_phys, t_ambient);
    energy_minutes += u_phys;
    r.min_t_room = std::min(r.min_t_room, r.state.t_room);
    r.max_t_room = std::max(r.max_t_room, r.state.t_room);
  }
  r.u_phys_avg = energy_minutes / minutes;
  r.minutes_overridden = r.fire_minute >= 0 ? minutes - r.fire_minute : 0;
  return r;
}

}  // namespace physq
