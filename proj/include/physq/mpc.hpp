#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "physq/rc_model.hpp"

namespace physq {

/// Price-insensitive rule-based controller: heats at or below 20 degC and
/// keeps heating until the room reaches 22 degC.
class BauController {
 public:
  int action(double t_room) {
    if (t_room <= 20.0) heating_ = true;
    else if (t_room >= 22.0) heating_ = false;
    return heating_ ? 1 : 0;
  }

 private:
  bool heating_ = false;
};

/// Binary-action MPC instance over a discretized day. The model coefficients
/// are the exact discretization of the simulator RC parameters at the
/// problem's own timestep.
struct MpcProblem {
  Eigen::Matrix2d Ad;
  Eigen::Vector2d Bd, Ed;      // x+ = Ad x + Bd u + Ed T_a
  std::vector<double> prices;  // EUR/MWh per step
  std::vector<double> t_ambient;
  Eigen::Vector2d x0;          // (T_r, T_m)
  int horizon = 24;            // in {24, 96} for the benchmark configurations
  double dt_hours = 1.0;
  double u_max = 10.0;
  double t_min = kComfortLow;
  double t_max = kComfortHigh;

  void validate() const;

  // dt_hours = 0 divides one day evenly across the horizon (24 / horizon).
  static MpcProblem from_params(const RcParams& params, int horizon,
                                std::vector<double> prices,
                                std::vector<double> t_ambient,
                                const Eigen::Vector2d& x0,
                                double dt_hours = 0.0);

  Eigen::Vector2d advance(const Eigen::Vector2d& x, double u, double t_amb) const {
    return Ad * x + Bd * u + Ed * t_amb;
  }
};

struct MpcSolution {
  std::vector<int> actions;  // 0/1 per step
  double cost = 0.0;         // EUR, from the exact model dynamics
};

struct MpcInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Exact backward dynamic program over a discretized (T_r, T_m) grid with
/// bilinear interpolation of the cost-to-go. The forward pass advances the
/// exact continuous state, so the returned cost is grid-free.
MpcSolution mpc_solve_dp(const MpcProblem& problem, double grid_resolution = 0.05);

/// 2^T enumeration oracle on the exact dynamics; horizon at most 16.
MpcSolution mpc_solve_exhaustive(const MpcProblem& problem);

}  // namespace physq
