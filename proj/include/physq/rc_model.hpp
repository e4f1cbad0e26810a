#pragma once

#include <Eigen/Dense>

namespace physq {

/// Two-state lumped RC model of a single-zone building.
///
///   C_r dT_r/dt = (T_m - T_r)/R_rm + (T_a - T_r)/R_ra + u
///   C_m dT_m/dt = (T_r - T_m)/R_rm
///
/// Capacitances in kWh/degC, resistances in degC/kW, heater power in kW.
struct RcParams {
  double room_capacity = 4.0;        // C_r
  double mass_capacity = 40.0;       // C_m
  double resist_room_mass = 1.0;     // R_rm
  double resist_room_ambient = 3.0;  // R_ra
  double heater_power_max = 10.0;    // u_max

  void validate() const;

  // Continuous-time system x' = A x + B u + E T_a with x = (T_r, T_m).
  Eigen::Matrix2d system_matrix() const;
  Eigen::Vector2d input_vector() const;    // B
  Eigen::Vector2d ambient_vector() const;  // E

  // Exact discretization over dt_hours: x+ = Ad x + Bd u + Ed T_a.
  void discretize(double dt_hours, Eigen::Matrix2d& Ad, Eigen::Vector2d& Bd,
                  Eigen::Vector2d& Ed) const;

  // Heater power needed to hold t_room in steady state at ambient t_amb.
  double steady_state_power(double t_room, double t_amb) const;
};

struct SimState {
  double t_room = 20.0;
  double t_mass = 20.0;
  long minute_of_sim = 0;
};

// Comfort band of the minute-resolution backup controller.
inline constexpr double kComfortLow = 18.0;
inline constexpr double kComfortHigh = 22.0;
// Allowed undershoot from the one-minute detection delay.
inline constexpr double kComfortSlack = 0.5;

// One forward-Euler minute of the RC dynamics. u_phys in [0, u_max].
SimState rc_substep(const SimState& state, const RcParams& params,
                    double u_phys, double t_ambient, int dt_minutes = 1);

// Backup controller: 0 above the band, u_requested * u_max inside it,
// u_max below it.
double backup_override(double t_room, int u_requested, const RcParams& params);

struct HourStepResult {
  SimState state;            // end-of-slot state
  double u_phys_avg = 0.0;   // time-averaged delivered power, kW
  int minutes_overridden = 0;
  int fire_minute = -1;      // minute within the slot at which an override fired
  // Comfort accounting at minute sampling.
  int minutes_below_comfort = 0;   // t_room < 18 - slack
  int minutes_hot_heating = 0;     // t_room > 22 while heater on
  double min_t_room = 0.0;
  double max_t_room = 0.0;
};

// Simulates `minutes` one-minute substeps under a single requested action.
// The backup is re-evaluated every minute; once an override fires it is held
// for the remainder of the slot.
HourStepResult env_step_minutes(const SimState& state, const RcParams& params,
                                int u_requested, double t_ambient, int minutes);

inline HourStepResult env_step_hour(const SimState& state, const RcParams& params,
                                    int u_requested, double t_ambient) {
  return env_step_minutes(state, params, u_requested, t_ambient, 60);
}

}  // namespace physq
