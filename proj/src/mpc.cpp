#include "physq/mpc.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

namespace physq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void MpcProblem::validate() const {
  if (horizon < 1) throw std::invalid_argument("MpcProblem: horizon < 1");
  if (prices.size() != static_cast<std::size_t>(horizon) ||
      t_ambient.size() != static_cast<std::size_t>(horizon))
    throw std::invalid_argument("MpcProblem: prices/t_ambient must match the horizon");
  if (dt_hours <= 0.0) throw std::invalid_argument("MpcProblem: dt_hours <= 0");
  if (u_max <= 0.0) throw std::invalid_argument("MpcProblem: u_max <= 0");
  if (!(t_min < t_max)) throw std::invalid_argument("MpcProblem: empty comfort band");
}

MpcProblem MpcProblem::from_params(const RcParams& params, int horizon,
                                   std::vector<double> prices,
                                   std::vector<double> t_ambient,
                                   const Eigen::Vector2d& x0, double dt_hours) {
  params.validate();
  MpcProblem p;
  p.horizon = horizon;
  p.dt_hours = dt_hours > 0.0 ? dt_hours : 24.0 / horizon;
  params.discretize(p.dt_hours, p.Ad, p.Bd, p.Ed);
  p.prices = std::move(prices);
  p.t_ambient = std::move(t_ambient);
  p.x0 = x0;
  p.u_max = params.heater_power_max;
  p.validate();
  return p;
}

MpcSolution mpc_solve_dp(const MpcProblem& problem, double grid_resolution) {
  problem.validate();
  // Per-step state error from bilinear interpolation stays below half the
  // spacing; the stated bound of 0.1 degC per step caps the resolution.
  if (grid_resolution <= 0.0 || grid_resolution > 0.1)
    throw std::invalid_argument("mpc_solve_dp: grid resolution must lie in (0, 0.1] degC");

  const double res = grid_resolution;
  const double r_lo = problem.t_min, r_hi = problem.t_max;
  // The thermal mass drifts slowly; a generous bracket around its start
  // value covers every reachable trajectory of a one-day horizon.
  const double m_lo = std::min(problem.x0(1), problem.t_min) - 8.0;
  const double m_hi = std::max(problem.x0(1), problem.t_max) + 8.0;
  const int nr = static_cast<int>(std::floor((r_hi - r_lo) / res + 0.5)) + 1;
  const int nm = static_cast<int>(std::floor((m_hi - m_lo) / res + 0.5)) + 1;

  auto interp = [&](const Eigen::MatrixXd& J, const Eigen::Vector2d& x) -> double {
    if (x(0) < r_lo || x(0) > r_hi || x(1) < m_lo || x(1) > m_hi) return kInf;
    const double fr = (x(0) - r_lo) / res;
    const double fm = (x(1) - m_lo) / res;
    const int ir = std::min(nr - 2, std::max(0, static_cast<int>(fr)));
    const int im = std::min(nm - 2, std::max(0, static_cast<int>(fm)));
    const double ar = fr - ir, am = fm - im;
    const double j00 = J(ir, im), j10 = J(ir + 1, im), j01 = J(ir, im + 1),
                 j11 = J(ir + 1, im + 1);
    if (!std::isfinite(j00) || !std::isfinite(j10) || !std::isfinite(j01) ||
        !std::isfinite(j11))
      return kInf;
    return (1 - ar) * (1 - am) * j00 + ar * (1 - am) * j10 + (1 - ar) * am * j01 +
           ar * am * j11;
  };

  // Backward value iteration; cost_to_go[t] covers decisions t..H-1.
  std::vector<Eigen::MatrixXd> cost_to_go(problem.horizon + 1,
                                          Eigen::MatrixXd::Zero(nr, nm));
  for (int t = problem.horizon - 1; t >= 0; --t) {
    Eigen::MatrixXd& J = cost_to_go[t];
    const Eigen::MatrixXd& Jn = cost_to_go[t + 1];
    for (int ir = 0; ir < nr; ++ir) {
      for (int im = 0; im < nm; ++im) {
        const Eigen::Vector2d x(r_lo + ir * res, m_lo + im * res);
        double best = kInf;
        for (int a = 0; a < 2; ++a) {
          const double u = a * problem.u_max;
          const Eigen::Vector2d xn = problem.advance(x, u, problem.t_ambient[t]);
          const double tail = interp(Jn, xn);
          if (!std::isfinite(tail)) continue;
          const double c = problem.prices[t] * u * problem.dt_hours / 1000.0 + tail;
          best = std::min(best, c);
        }
        J(ir, im) = best;
      }
    }
  }

  // Forward pass on the exact continuous state.
  MpcSolution sol;
  Eigen::Vector2d x = problem.x0;
  if (x(0) < problem.t_min - res || x(0) > problem.t_max + res)
    throw MpcInfeasible("mpc_solve_dp: initial room temperature outside the comfort band");
  for (int t = 0; t < problem.horizon; ++t) {
    double best = kInf;
    int best_a = -1;
    Eigen::Vector2d best_x;
    for (int a = 0; a < 2; ++a) {
      const double u = a * problem.u_max;
      const Eigen::Vector2d xn = problem.advance(x, u, problem.t_ambient[t]);
      if (xn(0) < problem.t_min - res || xn(0) > problem.t_max + res) continue;
      const double tail = interp(cost_to_go[t + 1], xn);
      if (!std::isfinite(tail)) continue;
      const double c = problem.prices[t] * u * problem.dt_hours / 1000.0 + tail;
      if (c < best) {
        best = c;
        best_a = a;
        best_x = xn;
      }
    }
    if (best_a < 0)
      throw MpcInfeasible("mpc_solve_dp: no feasible action at step " + std::to_string(t));
    sol.actions.push_back(best_a);
    sol.cost += problem.prices[t] * best_a * problem.u_max * problem.dt_hours / 1000.0;
    x = best_x;
  }
  return sol;
}

MpcSolution mpc_solve_exhaustive(const MpcProblem& problem) {
  problem.validate();
  if (problem.horizon > 16)
    throw std::invalid_argument("mpc_solve_exhaustive: horizon above 16");
  if (problem.x0(0) < problem.t_min || problem.x0(0) > problem.t_max)
    throw MpcInfeasible("mpc_solve_exhaustive: initial room temperature outside the comfort band");

  MpcSolution best;
  best.cost = kInf;
  const std::uint32_t count = 1u << problem.horizon;
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    Eigen::Vector2d x = problem.x0;
    double cost = 0.0;
    bool feasible = true;
    for (int t = 0; t < problem.horizon; ++t) {
      const int a = (mask >> t) & 1u;
      const double u = a * problem.u_max;
      x = problem.advance(x, u, problem.t_ambient[t]);
      if (x(0) < problem.t_min || x(0) > problem.t_max) {
        feasible = false;
        break;
      }
      cost += problem.prices[t] * u * problem.dt_hours / 1000.0;
      if (cost >= best.cost) {
        feasible = false;  // cannot improve; costs only accumulate
        break;
      }
    }
    if (feasible && cost < best.cost) {
      best.cost = cost;
      best.actions.assign(problem.horizon, 0);
      for (int t = 0; t < problem.horizon; ++t) best.actions[t] = (mask >> t) & 1u;
    }
  }
  if (!std::isfinite(best.cost))
    throw MpcInfeasible("mpc_solve_exhaustive: no feasible action sequence");
  return best;
}

}  // namespace physq
