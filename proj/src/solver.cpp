#include "skt/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skt/errors.hpp"

namespace skt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// B_ij(u) = A_ij(u) u_j, the mobility seen by gradients of w = log u.
void mobility(const ModelSpec& s, const double* u, double* B) {
  const int n = s.n;
  for (int i = 0; i < n; ++i) {
    double diag = s.a0[i];
    for (int k = 0; k < n; ++k) diag += s.a_at(i, k) * u[k];
    for (int j = 0; j < n; ++j) {
      double aij = s.a_at(i, j) * u[i];
      if (i == j) aij += diag;
      B[i * n + j] = aij * u[j];
    }
  }
}

// dB[(i*n+m)*n + j] = d B_im / d u_j.
void mobility_jac(const ModelSpec& s, const double* u, double* dB) {
  const int n = s.n;
  for (int i = 0; i < n; ++i) {
    double diag = s.a0[i];
    for (int k = 0; k < n; ++k) diag += s.a_at(i, k) * u[k];
    for (int m = 0; m < n; ++m) {
      for (int j = 0; j < n; ++j) {
        double v = 0;
        if (i == m) {
          v += s.a_at(i, j) * u[m];
          if (m == j) v += diag;
        }
        if (i == j) v += s.a_at(i, m) * u[m];
        if (m == j) v += s.a_at(i, m) * u[i];
        dB[(i * n + m) * n + j] = v;
      }
    }
  }
}

// Flattened solver state is cell-major: x[c*n + i].
struct System {
  const ModelSpec& spec;
  const Grid& grid;
  const Field& u_old;
  const Forcing* forcing;
  int n, nc, ntot;

  std::vector<double> uold_flat;   // cell-major copy of u_old
  std::vector<double> g_flat;      // forcing at cell centers, cell-major
  double uold_sup = 0;
  std::vector<double> mass_old;    // per-species masses of u_old

  System(const ModelSpec& s, const Grid& g, const Field& uo, const Forcing* f)
      : spec(s), grid(g), u_old(uo), forcing(f), n(s.n), nc(g.ncells()), ntot(s.n * g.ncells()),
        uold_flat(ntot), g_flat(ntot, 0.0), mass_old(uo.masses()) {
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < n; ++i) uold_flat[c * n + i] = uo.at(i, c);
    uold_sup = uo.max_value();
  }

  void sample_forcing(double t_new) {
    if (!forcing) return;
    for (int c = 0; c < nc; ++c) {
      const auto x = grid.center(c);
      for (int i = 0; i < n; ++i) g_flat[c * n + i] = (*forcing)(i, x, t_new);
    }
  }

  // R(w) with u = exp(w); also reports max|u|.
  void residual(const std::vector<double>& w, double dt, std::vector<double>& u,
                std::vector<double>& r) const {
    for (int k = 0; k < ntot; ++k) u[k] = std::exp(w[k]);
    std::vector<double> f(n);
    for (int c = 0; c < nc; ++c) {
      spec.reaction_at(std::span<const double>(u.data() + c * n, n), f);
      for (int i = 0; i < n; ++i)
        r[c * n + i] = (u[c * n + i] - uold_flat[c * n + i]) / dt - f[i] - g_flat[c * n + i];
    }
    std::vector<double> B(n * n), ubar(n), flux(n);
    for (int axis = 0; axis < grid.dim; ++axis) {
      const double dxa = grid.dx(axis);
      const int stride = grid.face_stride(axis);
      const int nf = grid.nfaces(axis);
      for (int fidx = 0; fidx < nf; ++fidx) {
        const int lo = grid.face_lo(axis, fidx);
        const int hi = lo + stride;
        for (int i = 0; i < n; ++i) ubar[i] = 0.5 * (u[lo * n + i] + u[hi * n + i]);
        mobility(spec, ubar.data(), B.data());
        for (int i = 0; i < n; ++i) {
          double fi = 0;
          for (int j = 0; j < n; ++j) fi += B[i * n + j] * (w[hi * n + j] - w[lo * n + j]);
          fi /= dxa;
          fi -= ubar[i] * spec.b_at(i, axis);
          flux[i] = fi;
        }
        for (int i = 0; i < n; ++i) {
          r[lo * n + i] -= flux[i] / dxa;
          r[hi * n + i] += flux[i] / dxa;
        }
      }
    }
  }

  double scaled_norm(const std::vector<double>& r, double dt) const {
    double m = 0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m * dt / (1.0 + uold_sup);
  }

  // Per-species conservation defect of the unsolved equations, relative form.
  double mass_defect(const std::vector<double>& r, double dt) const {
    const double meas = grid.cell_measure();
    double worst = 0;
    for (int i = 0; i < n; ++i) {
      double s = 0;
      for (int c = 0; c < nc; ++c) s += r[c * n + i];
      worst = std::max(worst, std::abs(s) * meas * dt / (1.0 + std::abs(mass_old[i])));
    }
    return worst;
  }

  void jacobian(const std::vector<double>& w, const std::vector<double>& u, double dt,
                std::vector<Eigen::Triplet<double>>& trips) const {
    trips.clear();
    std::vector<double> jf(n * n);
    for (int c = 0; c < nc; ++c) {
      spec.reaction_jac(std::span<const double>(u.data() + c * n, n), jf);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          double v = -jf[i * n + j] * u[c * n + j];  // chain rule: du_j/dw_j = u_j
          if (i == j) v += u[c * n + i] / dt;
          trips.emplace_back(c * n + i, c * n + j, v);
        }
      }
    }
    std::vector<double> B(n * n), dB(n * n * n), ubar(n), dwv(n);
    for (int axis = 0; axis < grid.dim; ++axis) {
      const double dxa = grid.dx(axis);
      const int stride = grid.face_stride(axis);
      const int nf = grid.nfaces(axis);
      for (int fidx = 0; fidx < nf; ++fidx) {
        const int lo = grid.face_lo(axis, fidx);
        const int hi = lo + stride;
        for (int i = 0; i < n; ++i) {
          ubar[i] = 0.5 * (u[lo * n + i] + u[hi * n + i]);
          dwv[i] = (w[hi * n + i] - w[lo * n + i]) / dxa;
        }
        mobility(spec, ubar.data(), B.data());
        mobility_jac(spec, ubar.data(), dB.data());
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            double curve = 0;  // sum_m dB_im/du_j * Dw_m
            for (int m = 0; m < n; ++m) curve += dB[(i * n + m) * n + j] * dwv[m];
            const double drift = (i == j) ? spec.b_at(i, axis) : 0.0;
            const double dF_lo = 0.5 * u[lo * n + j] * curve - B[i * n + j] / dxa -
                                 0.5 * u[lo * n + j] * drift;
            const double dF_hi = 0.5 * u[hi * n + j] * curve + B[i * n + j] / dxa -
                                 0.5 * u[hi * n + j] * drift;
            trips.emplace_back(lo * n + i, lo * n + j, -dF_lo / dxa);
            trips.emplace_back(lo * n + i, hi * n + j, -dF_hi / dxa);
            trips.emplace_back(hi * n + i, lo * n + j, dF_lo / dxa);
            trips.emplace_back(hi * n + i, hi * n + j, dF_hi / dxa);
          }
        }
      }
    }
  }
};

struct AttemptResult {
  bool ok = false;
  std::vector<double> u;
  int iters = 0;
  double res = 0;
};

AttemptResult newton_attempt(System& sys, double t, double dt, const NewtonOptions& opt) {
  AttemptResult out;
  const int ntot = sys.ntot;
  sys.sample_forcing(t + dt);

  std::vector<double> w(ntot), u(ntot), r(ntot), r_trial(ntot), u_trial(ntot), w_trial(ntot);
  for (int k = 0; k < ntot; ++k) w[k] = std::log(sys.uold_flat[k]);

  Eigen::SparseMatrix<double> J(ntot, ntot);
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs(ntot), delta(ntot);

  for (int it = 0; it <= opt.max_iters; ++it) {
    sys.residual(w, dt, u, r);
    const double rn = sys.scaled_norm(r, dt);
    if (!std::isfinite(rn)) return out;
    if (rn <= opt.tol && sys.mass_defect(r, dt) <= opt.mass_tol) {
      out.ok = true;
      // Accepting the initial guess means the state is unchanged; avoid the
      // exp(log(u)) round trip so fixed points stay bit-identical.
      out.u = (it == 0) ? sys.uold_flat : u;
      out.iters = it;
      out.res = rn;
      return out;
    }
    if (it == opt.max_iters) return out;

    sys.jacobian(w, u, dt, trips);
    J.setFromTriplets(trips.begin(), trips.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) return out;
    for (int k = 0; k < ntot; ++k) rhs[k] = -r[k];
    delta = lu.solve(rhs);
    if (lu.info() != Eigen::Success) return out;

    double dmax = 0;
    for (int k = 0; k < ntot; ++k) dmax = std::max(dmax, std::abs(delta[k]));
    if (!std::isfinite(dmax)) return out;
    const double cap = dmax > 4.0 ? 4.0 / dmax : 1.0;  // keeps exp(w) in range

    bool accepted = false;
    double alpha = cap;
    for (int ls = 0; ls < 9; ++ls) {
      for (int k = 0; k < ntot; ++k) w_trial[k] = w[k] + alpha * delta[k];
      sys.residual(w_trial, dt, u_trial, r_trial);
      const double rt = sys.scaled_norm(r_trial, dt);
      if (std::isfinite(rt) && rt <= (1.0 - 1e-4 * alpha) * rn) {
        w.swap(w_trial);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) return out;  // stagnation: let the caller shrink dt
  }
  return out;
}

}  // namespace

void fv_residual(const ModelSpec& spec, const Field& u, const Field& uprev,
                 double t, double dt, const Forcing* forcing, Field& out) {
  spec.validate();
  if (!u.same_layout(uprev)) throw InputError("fv_residual: fields must share grid and species");
  if (u.n != spec.n) throw InputError("fv_residual: species count mismatch");
  if (!(dt > 0)) throw InputError("fv_residual: dt must be positive");
  for (double x : u.data)
    if (!(x > 0)) throw InputError("fv_residual: candidate state must be positive");
  System sys(spec, u.grid, uprev, forcing);
  sys.sample_forcing(t);
  const int n = spec.n, nc = u.grid.ncells();
  std::vector<double> w(sys.ntot), uflat(sys.ntot), r(sys.ntot);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < n; ++i) w[c * n + i] = std::log(u.at(i, c));
  sys.residual(w, dt, uflat, r);
  out = Field(n, u.grid);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < n; ++i) out.at(i, c) = r[c * n + i];
}

StepResult step_implicit(const ModelSpec& spec, const Field& u_old, double t, double dt,
                         const NewtonOptions& opt, const Forcing* forcing) {
  if (u_old.n != spec.n) throw InputError("step_implicit: species count mismatch");
  if (!(dt > 0) || !std::isfinite(dt)) throw InputError("step_implicit: dt must be positive");
  for (double x : u_old.data)
    if (!(x > 0) || !std::isfinite(x))
      throw InputError("step_implicit: state must be strictly positive");

  System sys(spec, u_old.grid, u_old, forcing);
  double dt_try = dt;
  for (int halving = 0; halving <= opt.max_dt_halvings; ++halving) {
    AttemptResult res = newton_attempt(sys, t, dt_try, opt);
    if (res.ok) {
      StepResult out;
      out.u = Field(spec.n, u_old.grid);
      const int n = spec.n, nc = u_old.grid.ncells();
      for (int c = 0; c < nc; ++c)
        for (int i = 0; i < n; ++i) out.u.at(i, c) = res.u[c * n + i];
      out.meta = {t, dt_try, res.iters, res.res, halving};
      return out;
    }
    dt_try *= 0.5;
  }
  std::ostringstream msg;
  msg << "Newton stagnated at t = " << t << " for every dt down to " << dt_try * 2
      << " (" << opt.max_dt_halvings << " halvings)";
  throw SolverError(msg.str());
}

SimOutcome simulate(const ModelSpec& spec, const Field& u0, const SimOptions& opt,
                    const Forcing* forcing) {
  spec.validate();
  if (!(opt.T >= 0) || !std::isfinite(opt.T)) throw InputError("simulate: bad horizon");
  if (!(opt.dt > 0)) throw InputError("simulate: dt must be positive");
  SimOutcome out;
  out.traj.times.push_back(0.0);
  out.traj.states.push_back(u0);

  const double t_end = opt.T;
  double t = 0;
  Field u = u0;
  const long max_steps =
      static_cast<long>(std::ceil(t_end / opt.dt)) * (1L << (opt.newton.max_dt_halvings + 1)) + 16;
  long steps = 0;
  while (t_end - t > 1e-14 * (1.0 + t_end)) {
    if (++steps > max_steps) {
      out.failure = "step budget exhausted (persistent dt halving)";
      return out;
    }
    const double dt_step = std::min(opt.dt, t_end - t);
    try {
      StepResult sr = step_implicit(spec, u, t, dt_step, opt.newton, forcing);
      t += sr.meta.dt_used;
      u = sr.u;
      out.traj.times.push_back(t);
      out.traj.states.push_back(u);
      out.traj.steps.push_back(sr.meta);
    } catch (const SolverError& e) {
      out.failure = e.what();
      return out;  // partial trajectory stays attached
    }
  }
  out.completed = true;
  return out;
}

// ===== Manufactured reference solution =====

namespace {

// Product-of-cosines spatial mode and its per-axis derivatives.
struct Mode {
  double p = 1;                  // prod cos
  std::array<double, 2> dp{0, 0};  // d/dx_a
  double lap = 0;                // laplacian factor applied to p
};

Mode eval_mode(const Grid& g, const std::array<double, 2>& x) {
  Mode m;
  std::array<double, 2> cosv{1, 1}, sinv{0, 0}, freq{0, 0};
  for (int a = 0; a < g.dim; ++a) {
    freq[a] = kPi / g.extent[a];
    cosv[a] = std::cos(freq[a] * x[a]);
    sinv[a] = std::sin(freq[a] * x[a]);
  }
  m.p = cosv[0] * (g.dim == 2 ? cosv[1] : 1.0);
  m.dp[0] = -freq[0] * sinv[0] * (g.dim == 2 ? cosv[1] : 1.0);
  if (g.dim == 2) m.dp[1] = -freq[1] * cosv[0] * sinv[1];
  double s2 = freq[0] * freq[0];
  if (g.dim == 2) s2 += freq[1] * freq[1];
  m.lap = -s2 * m.p;
  return m;
}

}  // namespace

double ManufacturedSolution::value(int i, const std::array<double, 2>& x, double t) const {
  return m[i] + amp[i] * std::exp(-t) * eval_mode(grid, x).p;
}

double ManufacturedSolution::dt_value(int i, const std::array<double, 2>& x, double t) const {
  return -amp[i] * std::exp(-t) * eval_mode(grid, x).p;
}

std::array<double, 2> ManufacturedSolution::gradient(int i, const std::array<double, 2>& x,
                                                     double t) const {
  const Mode md = eval_mode(grid, x);
  const double c = amp[i] * std::exp(-t);
  return {c * md.dp[0], c * md.dp[1]};
}

double ManufacturedSolution::forcing(int i, const std::array<double, 2>& x, double t) const {
  const int n = spec.n;
  const Mode md = eval_mode(grid, x);
  const double et = std::exp(-t);
  std::vector<double> v(n), lapv(n), f(n);
  std::array<std::vector<double>, 2> dv{std::vector<double>(n), std::vector<double>(n)};
  for (int k = 0; k < n; ++k) {
    v[k] = m[k] + amp[k] * et * md.p;
    lapv[k] = amp[k] * et * md.lap;
    for (int a = 0; a < grid.dim; ++a) dv[a][k] = amp[k] * et * md.dp[a];
  }
  std::vector<double> A(n * n);
  diffusion_matrix(spec, v, A);
  spec.reaction_at(v, f);

  // div sum_j A_ij grad v_j = sum_j [ A_ij lap v_j + grad A_ij . grad v_j ],
  // grad A_ij = delta_ij sum_k a_ik grad v_k + a_ij grad v_i.
  double divdiff = 0;
  for (int j = 0; j < n; ++j) {
    divdiff += A[i * n + j] * lapv[j];
    for (int a = 0; a < grid.dim; ++a) {
      double dA = spec.a_at(i, j) * dv[a][i];
      if (i == j)
        for (int k = 0; k < n; ++k) dA += spec.a_at(i, k) * dv[a][k];
      divdiff += dA * dv[a][j];
    }
  }
  double drift_div = 0;  // div(v_i b_i) = b_i . grad v_i for constant b
  for (int a = 0; a < grid.dim; ++a) drift_div += spec.b_at(i, a) * dv[a][i];

  return dt_value(i, x, t) - divdiff + drift_div - f[i];
}

double ManufacturedSolution::lower_bound() const {
  double lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n; ++i) lo = std::min(lo, m[i] - std::abs(amp[i]));
  return lo;
}

double ManufacturedSolution::upper_bound() const {
  double hi = 0;
  for (int i = 0; i < spec.n; ++i) hi = std::max(hi, m[i] + std::abs(amp[i]));
  return hi;
}

Field ManufacturedSolution::sample(double t) const {
  Field out(spec.n, grid);
  for (int c = 0; c < grid.ncells(); ++c) {
    const auto x = grid.center(c);
    for (int i = 0; i < spec.n; ++i) out.at(i, c) = value(i, x, t);
  }
  return out;
}

Forcing ManufacturedSolution::forcing_fn() const {
  return [ms = *this](int i, const std::array<double, 2>& x, double t) {
    return ms.forcing(i, x, t);
  };
}

ManufacturedSolution manufactured_strong(const ModelSpec& spec, const Grid& grid,
                                         std::span<const double> m,
                                         std::span<const double> amp) {
  spec.validate();
  grid.validate();
  if (static_cast<int>(m.size()) != spec.n || static_cast<int>(amp.size()) != spec.n)
    throw InputError("manufactured_strong: m and amp need one entry per species");
  ManufacturedSolution ms;
  ms.spec = spec;
  ms.grid = grid;
  ms.m.assign(m.begin(), m.end());
  ms.amp.assign(amp.begin(), amp.end());
  if (!(ms.lower_bound() > 0))
    throw InputError("manufactured_strong: requires min_i (m_i - |amp_i|) > 0");
  return ms;
}

// ===== Strong proxy =====

StrongProxy StrongProxy::from_manufactured(ManufacturedSolution ms) {
  StrongProxy p;
  p.bound_lo = ms.lower_bound();
  p.bound_hi = ms.upper_bound();
  p.manufactured = std::move(ms);
  return p;
}

StrongProxy StrongProxy::from_fine_run(int refinement, Trajectory traj) {
  if (traj.states.empty()) throw InputError("strong proxy: empty trajectory");
  StrongProxy p;
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& st : traj.states) {
    lo = std::min(lo, st.min_value());
    hi = std::max(hi, st.max_value());
  }
  p.bound_lo = lo;
  p.bound_hi = hi;
  p.fine = FineRun{refinement, std::move(traj)};
  return p;
}

Field StrongProxy::field_at(const Grid& grid, int nspecies, double t) const {
  if (manufactured) {
    Field out(nspecies, grid);
    for (int c = 0; c < grid.ncells(); ++c) {
      const auto x = grid.center(c);
      for (int i = 0; i < nspecies; ++i) out.at(i, c) = manufactured->value(i, x, t);
    }
    return out;
  }
  if (!fine) throw InputError("strong proxy: not initialized");
  const auto& times = fine->traj.times;
  const auto& states = fine->traj.states;
  // Linear interpolation between bracketing snapshots, clamped at the ends.
  if (t <= times.front()) return transfer(states.front(), grid, TransferMode::restriction);
  if (t >= times.back()) return transfer(states.back(), grid, TransferMode::restriction);
  std::size_t k = 1;
  while (k < times.size() && times[k] < t) ++k;
  const double t0 = times[k - 1], t1 = times[k];
  const double theta = (t - t0) / (t1 - t0);
  Field a = transfer(states[k - 1], grid, TransferMode::restriction);
  Field b = transfer(states[k], grid, TransferMode::restriction);
  for (std::size_t idx = 0; idx < a.data.size(); ++idx)
    a.data[idx] = (1.0 - theta) * a.data[idx] + theta * b.data[idx];
  return a;
}

}  // namespace skt
