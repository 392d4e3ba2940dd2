#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "skt/grid.hpp"
#include "skt/model.hpp"

namespace skt {

// Optional source g_i(x, t) added to the reaction (manufactured-solution forcing).
using Forcing = std::function<double(int i, const std::array<double, 2>& x, double t)>;

struct NewtonOptions {
  double tol = 1e-10;       // scaled residual target: |dt R|_inf / (1 + |u_old|_inf)
  int max_iters = 25;
  int max_dt_halvings = 10;
  // Extra acceptance requirement so the flux telescoping carries to the state:
  // per species, |sum_c R_ic| * measure * dt <= mass_tol * (1 + mass_i).
  double mass_tol = 1e-13;
};

// Backward-Euler finite-volume residual at candidate state u (both fields on
// the same grid):
//   R_ic = (u_ic - uprev_ic)/dt - div_h F_i(u)_c - f_i(u_c) - g_i(x_c, t)
// with face fluxes F_i = sum_j A_ij(ubar) Du_j - ubar_i b_i, arithmetic face
// averages, and zero flux through boundary faces.
void fv_residual(const ModelSpec& spec, const Field& u, const Field& uprev,
                 double t, double dt, const Forcing* forcing, Field& out);

struct StepResult {
  Field u;
  StepMeta meta;
};

// One implicit Euler step from u_old at time t. Damped Newton in the entropy
// variables w = log u (iterates stay positive); on stagnation halves dt and
// retries, up to max_dt_halvings. Throws SolverError when everything fails.
// `t` is the time at u_old; the returned meta records the dt actually used.
StepResult step_implicit(const ModelSpec& spec, const Field& u_old, double t, double dt,
                         const NewtonOptions& opt = {}, const Forcing* forcing = nullptr);

struct SimOptions {
  double T = 1.0;
  double dt = 0.01;
  NewtonOptions newton{};
};

struct SimOutcome {
  Trajectory traj;    // always contains whatever was completed
  bool completed = false;
  std::string failure;  // empty when completed
};

// March to T (final step clipped). Records every accepted step. Deterministic:
// identical inputs give bit-identical trajectories.
SimOutcome simulate(const ModelSpec& spec, const Field& u0, const SimOptions& opt,
                    const Forcing* forcing = nullptr);

// Closed-form reference solution
//   v_i(x, t) = m_i + amp_i e^{-t} prod_axis cos(pi x_axis / extent_axis)
// with the forcing that makes it solve the system exactly; grad v . nu = 0 on
// the boundary by construction. Requires min_i (m_i - |amp_i|) > 0.
struct ManufacturedSolution {
  ModelSpec spec;
  Grid grid;
  std::vector<double> m, amp;

  double value(int i, const std::array<double, 2>& x, double t) const;
  double dt_value(int i, const std::array<double, 2>& x, double t) const;
  std::array<double, 2> gradient(int i, const std::array<double, 2>& x, double t) const;
  double forcing(int i, const std::array<double, 2>& x, double t) const;

  double lower_bound() const;  // min_i (m_i - |amp_i|)
  double upper_bound() const;  // max_i (m_i + |amp_i|)

  Field sample(double t) const;  // cell-center values on `grid`
  Forcing forcing_fn() const;
};

ManufacturedSolution manufactured_strong(const ModelSpec& spec, const Grid& grid,
                                         std::span<const double> m,
                                         std::span<const double> amp);

// The reference ("strong") side of a comparison: either a closed-form
// manufactured solution or a restricted finer-grid run with certified bounds.
struct StrongProxy {
  std::optional<ManufacturedSolution> manufactured;

  struct FineRun {
    int refinement = 2;
    Trajectory traj;  // on the refined grid
  };
  std::optional<FineRun> fine;

  double bound_lo = 0, bound_hi = 0;  // certified min/max of the proxy values

  // Proxy field on `grid` at time t (exact evaluation, or restriction with
  // linear interpolation between fine snapshots).
  Field field_at(const Grid& grid, int nspecies, double t) const;

  static StrongProxy from_manufactured(ManufacturedSolution ms);
  static StrongProxy from_fine_run(int refinement, Trajectory traj);
};

}  // namespace skt
