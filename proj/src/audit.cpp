#include "skt/audit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skt/errors.hpp"

namespace skt {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Cell-center and face-center views of the proxy, exact when closed-form and
// finite-difference based when the proxy is a restricted fine run.
struct ProxyView {
  const StrongProxy& proxy;
  const Grid& grid;
  int n;
  double t;
  Field vf;
  bool exact;

  ProxyView(const StrongProxy& p, const Grid& g, int nspecies, double tt)
      : proxy(p), grid(g), n(nspecies), t(tt), vf(p.field_at(g, nspecies, tt)),
        exact(p.manufactured.has_value()) {
    for (double x : vf.data)
      if (!(x > 0) || !std::isfinite(x))
        throw InputError("entropy audit: proxy values must be strictly positive");
  }

  double cell(int i, int c) const { return vf.at(i, c); }

  std::array<double, 2> grad_cell(int i, int c) const {
    if (exact) return proxy.manufactured->gradient(i, grid.center(c), t);
    std::array<double, 2> g{0, 0};
    const int nx = grid.cells[0];
    const int ix = c % nx, iy = c / nx;
    {
      const int l = std::max(ix - 1, 0), r = std::min(ix + 1, nx - 1);
      if (r > l)
        g[0] = (vf.at(i, grid.index(r, iy)) - vf.at(i, grid.index(l, iy))) / ((r - l) * grid.dx(0));
    }
    if (grid.dim == 2) {
      const int ny = grid.cells[1];
      const int l = std::max(iy - 1, 0), r = std::min(iy + 1, ny - 1);
      if (r > l)
        g[1] = (vf.at(i, grid.index(ix, r)) - vf.at(i, grid.index(ix, l))) / ((r - l) * grid.dx(1));
    }
    return g;
  }

  double face_val(int i, int lo, int hi, const std::array<double, 2>& xf) const {
    if (exact) return proxy.manufactured->value(i, xf, t);
    return 0.5 * (vf.at(i, lo) + vf.at(i, hi));
  }

  double face_grad(int i, int axis, int lo, int hi, const std::array<double, 2>& xf) const {
    if (exact) return proxy.manufactured->gradient(i, xf, t)[axis];
    return (vf.at(i, hi) - vf.at(i, lo)) / grid.dx(axis);
  }
};

// Space integrals of all eighteen balance densities at one snapshot.
struct SnapshotTerms {
  std::array<double, 6> G{};
  std::array<double, 12> I{};
};

SnapshotTerms snapshot_terms(const ModelSpec& spec, const CutoffSpec& cut, const Grid& grid,
                             const Field& u, const ProxyView& pv, const Forcing* forcing,
                             double t) {
  SnapshotTerms out;
  const int n = spec.n;
  const double eps = cut.eps;
  const double meas = grid.cell_measure();
  const auto& prof = cut.profile;

  std::vector<double> ubar(n), ue(n), gradu(n), flux(n), fluxv(n), A(n * n), Av(n * n);
  std::vector<double> vface(n), gv(n), logu(n), logv(n);

  // ----- face-based terms: products involving discrete gradients of u -----
  for (int axis = 0; axis < grid.dim; ++axis) {
    const double dxa = grid.dx(axis);
    const int stride = grid.face_stride(axis);
    const int nf = grid.nfaces(axis);
    for (int f = 0; f < nf; ++f) {
      const int lo = grid.face_lo(axis, f);
      const int hi = lo + stride;
      const auto xf = grid.face_center(axis, f);

      double ssum = 0;
      for (int i = 0; i < n; ++i) {
        ubar[i] = 0.5 * (u.at(i, lo) + u.at(i, hi));
        ue[i] = ubar[i] + eps;
        ssum += ue[i];
        gradu[i] = (u.at(i, hi) - u.at(i, lo)) / dxa;
        logu[i] = std::log(ue[i]);
        vface[i] = pv.face_val(i, lo, hi, xf);
        gv[i] = pv.face_grad(i, axis, lo, hi, xf);
        logv[i] = std::log(vface[i]);
      }
      diffusion_matrix(spec, ubar, A);
      diffusion_matrix(spec, vface, Av);
      for (int i = 0; i < n; ++i) {
        double fi = 0, fvi = 0;
        for (int j = 0; j < n; ++j) {
          fi += A[i * n + j] * gradu[j];
          fvi += Av[i * n + j] * gv[j];
        }
        flux[i] = fi - ubar[i] * spec.b_at(i, axis);
        fluxv[i] = fvi - vface[i] * spec.b_at(i, axis);
      }
      const CutoffEval cm = cutoff_eval_sum(ssum, cut.K, cut.M, prof);
      const CutoffEval cl = cutoff_eval_sum(ssum, cut.K, cut.L, prof);

      double spi = 0;          // entropy density of the shifted state
      double flux_sum = 0, gradu_sum = 0;
      double wlog_flux = 0;    // sum_i pi_i (log ue_i + lambda_i) flux_i
      double wlog_gradu = 0;   // sum_i pi_i (log ue_i + lambda_i) gradu_i
      double vlog_flux = 0, vlog_gradu = 0, vlog_ue = 0;
      double uegv_over_v = 0;  // sum_i pi_i ue_i gv_i / v_i
      double uefluxv_over_v = 0;
      for (int i = 0; i < n; ++i) {
        spi += spec.pi[i] * (ue[i] * (logu[i] + spec.lambda[i] - 1.0) + std::exp(-spec.lambda[i]));
        flux_sum += flux[i];
        gradu_sum += gradu[i];
        wlog_flux += spec.pi[i] * (logu[i] + spec.lambda[i]) * flux[i];
        wlog_gradu += spec.pi[i] * (logu[i] + spec.lambda[i]) * gradu[i];
        vlog_flux += spec.pi[i] * (logv[i] + spec.lambda[i]) * flux[i];
        vlog_gradu += spec.pi[i] * (logv[i] + spec.lambda[i]) * gradu[i];
        vlog_ue += spec.pi[i] * ue[i] * (logv[i] + spec.lambda[i]);
        uegv_over_v += spec.pi[i] * ue[i] * gv[i] / vface[i];
        uefluxv_over_v += spec.pi[i] * ue[i] * fluxv[i] / vface[i];
      }

      double g1 = 0, i4 = 0, i6 = 0;
      for (int i = 0; i < n; ++i) {
        g1 += spec.pi[i] * flux[i] * gradu[i] / ue[i];
        double diff_only = 0;
        for (int l = 0; l < n; ++l) diff_only += A[i * n + l] * gradu[l];
        i4 += spec.pi[i] * diff_only * gv[i] / vface[i];
        i6 += spec.pi[i] * fluxv[i] * gradu[i] / vface[i];
      }

      out.G[0] += meas * (-cm.phi * g1);
      out.G[1] += meas * (-cm.d2 * spi * flux_sum * gradu_sum);
      out.G[2] += meas * (-cm.d1 * wlog_flux * gradu_sum);
      out.G[3] += meas * (-cm.d1 * flux_sum * wlog_gradu);
      out.I[0] += meas * (cl.d1 * vlog_gradu * flux_sum);
      out.I[1] += meas * (cl.d1 * vlog_flux * gradu_sum);
      out.I[2] += meas * (cl.d2 * vlog_ue * flux_sum * gradu_sum);
      out.I[3] += meas * (cl.phi * i4);
      out.I[4] += meas * (cl.d1 * uegv_over_v * flux_sum);
      out.I[5] += meas * (cl.phi * i6);
      out.I[6] += meas * (cl.d1 * uefluxv_over_v * gradu_sum);
    }
  }

  // ----- cell-based terms: reactions, forcing and proxy-only gradients -----
  std::vector<double> f(n), fv(n), vcell(n);
  for (int c = 0; c < grid.ncells(); ++c) {
    const auto xc = grid.center(c);
    double ssum = 0;
    for (int i = 0; i < n; ++i) {
      ue[i] = u.at(i, c) + eps;
      ssum += ue[i];
      logu[i] = std::log(ue[i]);
      vcell[i] = pv.cell(i, c);
      logv[i] = std::log(vcell[i]);
    }
    std::vector<double> uc(n);
    for (int i = 0; i < n; ++i) uc[i] = u.at(i, c);
    spec.reaction_at(uc, f);
    spec.reaction_at(vcell, fv);
    if (forcing) {
      for (int i = 0; i < n; ++i) {
        const double g = (*forcing)(i, xc, t);
        f[i] += g;
        fv[i] += g;
      }
    }

    const CutoffEval cm = cutoff_eval_sum(ssum, cut.K, cut.M, prof);
    const CutoffEval cl = cutoff_eval_sum(ssum, cut.K, cut.L, prof);

    double spi = 0, fsum = 0, wlog_f = 0, vlog_f = 0, vlog_ue = 0;
    for (int i = 0; i < n; ++i) {
      spi += spec.pi[i] * (ue[i] * (logu[i] + spec.lambda[i] - 1.0) + std::exp(-spec.lambda[i]));
      fsum += f[i];
      wlog_f += spec.pi[i] * (logu[i] + spec.lambda[i]) * f[i];
      vlog_f += spec.pi[i] * (logv[i] + spec.lambda[i]) * f[i];
      vlog_ue += spec.pi[i] * ue[i] * (logv[i] + spec.lambda[i]);
    }

    double i10 = 0, i11 = 0, i12 = 0;
    std::vector<std::array<double, 2>> gvc(n);
    for (int i = 0; i < n; ++i) gvc[i] = pv.grad_cell(i, c);
    diffusion_matrix(spec, vcell, Av);
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < grid.dim; ++a) {
        double diffv = 0;
        for (int l = 0; l < n; ++l) diffv += Av[i * n + l] * gvc[l][a];
        i10 += spec.pi[i] * ue[i] * diffv * gvc[i][a] / (vcell[i] * vcell[i]);
        i12 += spec.pi[i] * spec.b_at(i, a) * gvc[i][a] / vcell[i];
      }
      i11 += spec.pi[i] * (ue[i] * cl.phi / vcell[i] - 1.0) * fv[i];
    }

    out.G[4] += meas * (cm.d1 * spi * fsum);
    out.G[5] += meas * (cm.phi * wlog_f);
    out.I[7] += meas * (-cl.phi * vlog_f);
    out.I[8] += meas * (-cl.d1 * vlog_ue * fsum);
    out.I[9] += meas * (-cl.phi * i10);
    out.I[10] += meas * (-i11);
    out.I[11] += meas * (eps * cl.phi * i12);
  }
  return out;
}

}  // namespace

double EntropyBalanceTerms::rhs() const {
  double s = 0;
  for (double g : G) s += g;
  for (double i : I) s += i;
  return s;
}

EntropyBalanceTerms entropy_balance_terms(const ModelSpec& spec, const CutoffSpec& cut,
                                          const Trajectory& u, const StrongProxy& v,
                                          double s) {
  spec.validate();
  cut.validate();
  if (u.states.empty() || u.times.size() != u.states.size())
    throw InputError("entropy audit: malformed trajectory");
  if (!(s >= 0) || !std::isfinite(s)) throw InputError("entropy audit: window must be >= 0");
  const Grid& grid = u.states.front().grid;
  const int n = u.states.front().n;
  if (n != spec.n) throw InputError("entropy audit: species count mismatch");

  if (s > u.times.back() + 1e-10 * (1.0 + std::abs(s)))
    throw InputError("entropy audit: window extends past the trajectory");

  // Integrate over the snapshots inside [0, s]; the window snaps to the last
  // snapshot time not exceeding s.
  std::size_t last = 0;
  for (std::size_t k = 0; k < u.times.size(); ++k)
    if (u.times[k] <= s + 1e-12 * (1.0 + s)) last = k;

  EntropyBalanceTerms out;
  out.window = u.times[last];
  {
    ProxyView pv0(v, grid, n, u.times[0]);
    ProxyView pv1(v, grid, n, u.times[last]);
    out.lhs = double_cutoff_relative_entropy(spec, cut, u.states[last], pv1.vf) -
              double_cutoff_relative_entropy(spec, cut, u.states[0], pv0.vf);
  }
  if (last == 0) {
    out.residual = out.lhs;
    return out;
  }

  Forcing fn;
  const Forcing* forcing = nullptr;
  if (v.manufactured) {
    fn = v.manufactured->forcing_fn();
    forcing = &fn;
  }

  for (std::size_t k = 0; k <= last; ++k) {
    const double t = u.times[k];
    double w;
    if (k == 0)
      w = 0.5 * (u.times[1] - u.times[0]);
    else if (k == last)
      w = 0.5 * (u.times[last] - u.times[last - 1]);
    else
      w = 0.5 * (u.times[k + 1] - u.times[k - 1]);

    ProxyView pv(v, grid, n, t);
    SnapshotTerms st = snapshot_terms(spec, cut, grid, u.states[k], pv, forcing, t);
    for (int i = 0; i < 6; ++i) out.G[i] += w * st.G[i];
    for (int i = 0; i < 12; ++i) out.I[i] += w * st.I[i];
  }
  out.residual = out.lhs - out.rhs();
  return out;
}

std::vector<SeriesPoint> relative_entropy_series(const ModelSpec& spec, const CutoffSpec& cut,
                                                 const Trajectory& u, const StrongProxy& v) {
  spec.validate();
  cut.validate();
  if (u.states.empty() || u.times.size() != u.states.size())
    throw InputError("entropy series: malformed trajectory");
  const Grid& grid = u.states.front().grid;
  const int n = u.states.front().n;
  std::vector<SeriesPoint> out;
  out.reserve(u.times.size());
  for (std::size_t k = 0; k < u.times.size(); ++k) {
    const Field& uk = u.states[k];
    Field vk = v.field_at(grid, n, u.times[k]);
    SeriesPoint p;
    p.t = u.times[k];
    p.entropy = total_entropy(spec, uk);
    p.h_rel = relative_entropy(spec, uk, vk);
    p.h_cut = cutoff_relative_entropy(spec, cut, uk, vk);
    p.h_double = double_cutoff_relative_entropy(spec, cut, uk, vk);
    p.mass = uk.masses();
    p.umin = uk.min_value();
    p.umax = uk.max_value();
    out.push_back(std::move(p));
  }
  return out;
}

GronwallFit gronwall_probe(std::span<const double> t, std::span<const double> h, double tol) {
  if (t.size() != h.size() || t.size() < 2)
    throw InputError("gronwall probe: need two matching samples or more");
  if (!(tol >= 0)) throw InputError("gronwall probe: tolerance must be >= 0");
  for (std::size_t k = 0; k + 1 < t.size(); ++k)
    if (!(t[k + 1] > t[k])) throw InputError("gronwall probe: times must increase");
  for (double x : h)
    if (!std::isfinite(x)) throw InputError("gronwall probe: series must be finite");

  GronwallFit out;
  out.tol = tol;
  for (double x : h) out.max_h = std::max(out.max_h, x);
  out.degenerate = out.max_h < 1e-200;

  const std::size_t m = t.size();
  if (!out.degenerate) {
    double tbar = 0, ybar = 0;
    std::vector<double> y(m);
    for (std::size_t k = 0; k < m; ++k) {
      y[k] = std::log(std::max(h[k], 0.0) + 1e-300);
      tbar += t[k];
      ybar += y[k];
    }
    tbar /= m;
    ybar /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t k = 0; k < m; ++k) {
      sxy += (t[k] - tbar) * (y[k] - ybar);
      sxx += (t[k] - tbar) * (t[k] - tbar);
    }
    out.c_hat = sxy / sxx;
    double ss = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const double r = y[k] - (ybar + out.c_hat * (t[k] - tbar));
      ss += r * r;
    }
    out.fit_residual = std::sqrt(ss / m);
  }

  out.bound_ok = true;
  const double h0 = std::max(h[0], 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    if (h[k] > h0 * std::exp(out.c_hat * (t[k] - t[0])) + tol) {
      out.bound_ok = false;
      break;
    }
  }
  out.uniqueness_branch = h[0] <= tol;
  out.uniqueness_ok = out.max_h <= tol;
  return out;
}

FischerResult fischer_bounds_check(const ModelSpec& spec, const CutoffSpec& cut,
                                   const Field& u, const Field& v, double c_lo, double c_hi) {
  spec.validate();
  cut.validate();
  if (!u.same_layout(v)) throw InputError("tail bounds: fields must share grid and species");
  if (u.n != spec.n) throw InputError("tail bounds: species count mismatch");
  if (!(c_lo > 0) || !(c_hi >= c_lo)) throw InputError("tail bounds: need 0 < c_lo <= c_hi");
  for (double x : u.data)
    if (!(x >= 0) || !std::isfinite(x)) throw InputError("tail bounds: u must be >= 0");
  for (double x : v.data)
    if (!(x >= c_lo) || !(x <= c_hi))
      throw InputError("tail bounds: v must take values in [c_lo, c_hi]");

  const Grid& grid = u.grid;
  const int n = u.n;
  const int nc = grid.ncells();
  const double meas = grid.cell_measure();

  std::vector<double> usum(nc, 0.0);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < n; ++i) usum[c] += u.at(i, c);

  auto integrand = [&](int c, double lvl) {
    const CutoffEval ce = cutoff_eval_sum(usum[c], cut.K, lvl, cut.profile);
    double rho = 0;
    for (int i = 0; i < n; ++i) {
      const double ui = u.at(i, c), vi = v.at(i, c);
      const double xlog = ui > 0 ? ui * std::log(ui) : 0.0;
      rho += spec.pi[i] *
             (xlog + ui * (spec.lambda[i] - 1.0) - ce.phi * ui * (std::log(vi) + spec.lambda[i]) +
              vi);
    }
    return rho;
  };

  FischerResult out;
  double lvl = 1.0;
  bool found = false;
  for (; lvl <= 1e18; lvl *= 2.0) {
    bool ok = true;
    for (int c = 0; c < nc && ok; ++c) {
      if (usum[c] >= lvl && integrand(c, lvl) < 0.5 * (1.0 + usum[c])) ok = false;
    }
    if (ok) {
      found = true;
      break;
    }
  }
  if (!found)
    throw HypothesisError("tail bounds: no threshold up to 1e18 makes the tail integrand "
                          "dominate (1 + sum u)/2; reference bounds too wide for this state");

  out.l_found = lvl;
  double hsum = 0, tail = 0, sq = 0;
  for (int c = 0; c < nc; ++c) {
    hsum += integrand(c, lvl);
    if (usum[c] >= lvl) tail += 1.0 + usum[c];
    if (usum[c] <= lvl) {
      for (int i = 0; i < n; ++i) {
        const double d = u.at(i, c) - v.at(i, c);
        sq += d * d;
      }
    }
  }
  out.h_cut = meas * hsum;
  out.tail_mass = meas * tail;
  out.fis1_margin = 2.0 * out.h_cut - out.tail_mass;
  out.ineq1_ok = out.fis1_margin >= -1e-12 * (1.0 + std::abs(out.h_cut));
  out.sq_low = meas * sq;
  out.ineq2_ok = out.sq_low == 0.0 || out.h_cut > 0.0;
  out.ratio = (out.h_cut > 0.0) ? out.sq_low / out.h_cut : 0.0;
  return out;
}

ProbeReport weak_strong_probe(const ModelSpec& spec, const Grid& grid, const CutoffSpec& cut,
                              const Field& u0, double T, double dt, const ProbeOptions& opt,
                              const NewtonOptions& newton) {
  spec.validate();
  grid.validate();
  cut.validate();
  if (u0.n != spec.n || !(u0.grid == grid))
    throw InputError("probe: initial field must live on the probe grid");
  if (!(T > 0) || !(dt > 0)) throw InputError("probe: need T > 0 and dt > 0");

  ProbeReport rep;
  rep.hypotheses = validate_hypotheses(spec, opt.hyp_sampling);
  {
    std::ostringstream bad;
    auto failed = [](CheckStatus s) {
      return s == CheckStatus::fail_analytic || s == CheckStatus::fail_sampled;
    };
    if (failed(rep.hypotheses.drift_bound)) bad << " drift-bound";
    if (failed(rep.hypotheses.reaction_smooth)) bad << " reaction-lipschitz";
    if (failed(rep.hypotheses.entropy_sign)) bad << " entropy-reaction-sign";
    if (!rep.hypotheses.structure_ok) bad << " diffusion-structure";
    if (!bad.str().empty())
      throw HypothesisError("probe preconditions failed:" + bad.str() +
                            (rep.hypotheses.structure_failure.empty()
                                 ? std::string()
                                 : " (" + rep.hypotheses.structure_failure + ")"));
  }
  if (!(u0.min_value() > 0))
    throw HypothesisError("probe preconditions failed: initial data must be strictly positive");

  // Optional multiplicative perturbation by the grid's cosine mode.
  Field u_init = u0;
  if (opt.perturbation != 0) {
    for (int c = 0; c < grid.ncells(); ++c) {
      const auto x = grid.center(c);
      double p = std::cos(kPi * x[0] / grid.extent[0]);
      if (grid.dim == 2) p *= std::cos(kPi * x[1] / grid.extent[1]);
      const double fac = 1.0 + opt.perturbation * p;
      for (int i = 0; i < u_init.n; ++i) u_init.at(i, c) *= fac;
    }
    if (!(u_init.min_value() > 0))
      throw InputError("probe: perturbation drives the initial data out of positivity");
  }

  StrongProxy proxy;
  Forcing fn;
  const Forcing* forcing = nullptr;
  if (opt.mode == ProbeMode::manufactured) {
    if (static_cast<int>(opt.m.size()) != spec.n || static_cast<int>(opt.amp.size()) != spec.n)
      throw InputError("probe: closed-form mode needs m and amp, one entry per species");
    ManufacturedSolution ms = manufactured_strong(spec, grid, opt.m, opt.amp);
    fn = ms.forcing_fn();
    forcing = &fn;
    proxy = StrongProxy::from_manufactured(std::move(ms));
  } else {
    if (opt.refinement < 1) throw InputError("probe: refinement must be >= 1");
  }

  SimOptions sim{T, dt, newton};
  SimOutcome weak = simulate(spec, u_init, sim, forcing);
  if (!weak.completed) throw SolverError("probe: weak run failed: " + weak.failure);

  if (opt.mode == ProbeMode::fine_proxy) {
    Grid fine_grid = grid;
    for (int a = 0; a < grid.dim; ++a) fine_grid.cells[a] *= opt.refinement;
    Field u0_fine = transfer(u_init, fine_grid, TransferMode::prolongation);
    SimOptions fine_sim{T, dt / opt.refinement, newton};
    SimOutcome fine = simulate(spec, u0_fine, fine_sim, nullptr);
    if (!fine.completed) throw SolverError("probe: reference run failed: " + fine.failure);
    proxy = StrongProxy::from_fine_run(opt.refinement, std::move(fine.traj));
  }

  rep.series = relative_entropy_series(spec, cut, weak.traj, proxy);
  double max_h = 0;
  for (const auto& p : rep.series) max_h = std::max(max_h, p.h_rel);
  rep.tol = opt.tolerance.value_or(10.0 * newton.tol * (1.0 + max_h));

  std::vector<double> ts, hs;
  ts.reserve(rep.series.size());
  hs.reserve(rep.series.size());
  for (const auto& p : rep.series) {
    ts.push_back(p.t);
    hs.push_back(p.h_rel);
  }
  rep.gronwall = gronwall_probe(ts, hs, rep.tol);
  rep.criterion_met =
      rep.gronwall.bound_ok && (!rep.gronwall.uniqueness_branch || rep.gronwall.uniqueness_ok);

  {
    const Field& u_end = weak.traj.states.back();
    Field v_end = proxy.field_at(grid, spec.n, weak.traj.times.back());
    double lo = proxy.bound_lo, hi = proxy.bound_hi;
    // Widen marginally so interpolation round-off cannot fall outside.
    lo = std::min(lo, v_end.min_value());
    hi = std::max(hi, v_end.max_value());
    rep.fischer = fischer_bounds_check(spec, cut, u_end, v_end, lo, hi);
  }

  std::ostringstream sum;
  sum << "probe: " << rep.series.size() << " snapshots to T = " << weak.traj.times.back()
      << ", max distance " << max_h << ", fitted growth rate " << rep.gronwall.c_hat
      << ", tolerance " << rep.tol << "; exponential bound "
      << (rep.gronwall.bound_ok ? "holds" : "violated");
  if (rep.gronwall.uniqueness_branch)
    sum << "; coincident start stays within tolerance: "
        << (rep.gronwall.uniqueness_ok ? "yes" : "no");
  sum << "; tail threshold " << rep.fischer.l_found << "; criterion "
      << (rep.criterion_met ? "met" : "not met");
  rep.summary = sum.str();
  return rep;
}

}  // namespace skt
