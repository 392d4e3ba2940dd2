#include "skt/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "skt/errors.hpp"

namespace skt {

namespace {

constexpr double kE = 2.718281828459045235;

// Bump kernel pieces for the C^inf profile: N(x) = exp(-1/x) on x > 0.
double bump(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
double bump_d1(double x) { return x > 0 ? bump(x) / (x * x) : 0.0; }
double bump_d2(double x) { return x > 0 ? bump(x) * (1.0 - 2.0 * x) / (x * x * x * x) : 0.0; }

struct ProfileDerivs {
  double v, d1, d2;
};

// Smooth transition S(x) = N(x) / (N(x) + N(1-x)); profile is 1 - S.
// The denominator stays >= exp(-2) on (0,1), so this is safe in doubles.
ProfileDerivs smooth_raw(double x) {
  const double nx = bump(x), ny = bump(1.0 - x);
  const double d = nx + ny;
  const double n1 = bump_d1(x);
  const double dp = n1 - bump_d1(1.0 - x);
  const double n2 = bump_d2(x);
  const double ddp = n2 + bump_d2(1.0 - x);
  const double s = nx / d;
  const double s1 = n1 / d - nx * dp / (d * d);
  const double s2 = n2 / d - 2.0 * n1 * dp / (d * d) - nx * ddp / (d * d) +
                    2.0 * nx * dp * dp / (d * d * d);
  return {1.0 - s, -s1, -s2};
}

ProfileDerivs smoothstep_raw(double x) {
  const double s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
  const double s1 = 30.0 * x * x * (x - 1.0) * (x - 1.0);
  const double s2 = 60.0 * x * (2.0 * x - 1.0) * (x - 1.0);
  return {1.0 - s, -s1, -s2};
}

ProfileDerivs profile_derivs(CutoffKind kind, double x) {
  if (x <= 0.0) return {1.0, 0.0, 0.0};
  if (x >= 1.0) return {0.0, 0.0, 0.0};
  return kind == CutoffKind::smooth ? smooth_raw(x) : smoothstep_raw(x);
}

struct SupPair {
  double d1, d2;
};

SupPair scan_sups(CutoffKind kind) {
  // The smoothstep sups are closed-form; scan only the bump-quotient profile.
  if (kind == CutoffKind::smoothstep) return {30.0 / 16.0, 10.0 / std::sqrt(3.0)};
  double m1 = 0, m2 = 0;
  const int npts = 200000;
  for (int k = 1; k < npts; ++k) {
    const auto p = smooth_raw(static_cast<double>(k) / npts);
    m1 = std::max(m1, std::abs(p.d1));
    m2 = std::max(m2, std::abs(p.d2));
  }
  // Pad the scanned maxima slightly so they stay true upper bounds even if
  // the real supremum falls between grid points.
  return {m1 * (1.0 + 1e-8), m2 * (1.0 + 1e-8)};
}

const SupPair& sups(CutoffKind kind) {
  static const SupPair smooth = scan_sups(CutoffKind::smooth);
  static const SupPair step = scan_sups(CutoffKind::smoothstep);
  return kind == CutoffKind::smooth ? smooth : step;
}

double xlogx(double s) { return s > 0 ? s * std::log(s) : 0.0; }

void check_positive_reference(const Field& v) {
  for (double x : v.data)
    if (!(x > 0) || !std::isfinite(x))
      throw InputError("reference field must be strictly positive and finite");
}

void check_admissible_density(const Field& u) {
  for (double x : u.data)
    if (!(x >= 0) || !std::isfinite(x))
      throw InputError("density field must be nonnegative and finite");
}

}  // namespace

CutoffProfile CutoffProfile::make(CutoffKind kind) {
  CutoffProfile p;
  p.kind = kind;
  const auto& s = sups(kind);
  p.sup_d1 = s.d1;
  p.sup_d2 = s.d2;
  return p;
}

double CutoffProfile::value(double x) const { return profile_derivs(kind, x).v; }
double CutoffProfile::d1(double x) const { return profile_derivs(kind, x).d1; }
double CutoffProfile::d2(double x) const { return profile_derivs(kind, x).d2; }

void CutoffSpec::validate() const {
  if (K < 3) throw InputError("cutoff: K must be an integer >= 3");
  if (!(L > 0) || !std::isfinite(L)) throw InputError("cutoff: L must be positive");
  if (!(M > L) || !std::isfinite(M)) throw InputError("cutoff: M must satisfy M > L");
  if (!(eps > 0) || !(eps < 0.5)) throw InputError("cutoff: eps must lie in (0, 1/2)");
}

CutoffEval cutoff_eval_sum(double usum, int K, double L, const CutoffProfile& profile) {
  if (K < 3) throw InputError("cutoff: K must be an integer >= 3");
  if (!(L > 0)) throw InputError("cutoff: L must be positive");
  if (!(usum >= 0) || !std::isfinite(usum))
    throw InputError("cutoff: component sum must be nonnegative and finite");
  CutoffEval out;
  if (usum <= L) {  // inner plateau, exactly
    out.phi = 1.0;
    return out;
  }
  // Outer plateau, compared in the untransformed domain so the edge itself
  // lands on the plateau even when the log-log argument rounds below 1.
  const double edge = std::pow(L + kE, static_cast<double>(K) + 1.0) - kE;
  if (usum >= edge) return out;
  const double s = usum + kE;
  const double logs = std::log(s);
  const double logk = std::log(static_cast<double>(K) + 1.0);
  const double z = (std::log(logs) - std::log(std::log(L + kE))) / logk;
  if (z <= 0.0) {
    out.phi = 1.0;
    return out;
  }
  if (z >= 1.0) return out;  // outer plateau, exactly
  const auto p = profile_derivs(profile.kind, z);
  const double dz = 1.0 / (logk * s * logs);          // dz/d usum
  const double d2z = -(logs + 1.0) / (logk * s * s * logs * logs);
  out.phi = p.v;
  out.d1 = p.d1 * dz;
  out.d2 = p.d2 * dz * dz + p.d1 * d2z;
  return out;
}

double cutoff_value(std::span<const double> u, int K, double L, const CutoffProfile& profile) {
  double s = 0;
  for (double x : u) s += x;
  return cutoff_eval_sum(s, K, L, profile).phi;
}

std::vector<double> cutoff_gradient(std::span<const double> u, int K, double L,
                                    const CutoffProfile& profile) {
  double s = 0;
  for (double x : u) s += x;
  const auto e = cutoff_eval_sum(s, K, L, profile);
  return std::vector<double>(u.size(), e.d1);
}

std::vector<double> cutoff_hessian(std::span<const double> u, int K, double L,
                                   const CutoffProfile& profile) {
  double s = 0;
  for (double x : u) s += x;
  const auto e = cutoff_eval_sum(s, K, L, profile);
  return std::vector<double>(u.size() * u.size(), e.d2);
}

double cutoff_grad_bound_constant(const CutoffProfile& profile) { return profile.sup_d1; }

double cutoff_hess_bound_constant(const CutoffProfile& profile) {
  return profile.sup_d2 / std::log(4.0) + 2.0 * profile.sup_d1;
}

double entropy_density(const ModelSpec& spec, std::span<const double> u) {
  double h = 0;
  for (int i = 0; i < spec.n; ++i) {
    if (!(u[i] >= 0) || !std::isfinite(u[i]))
      throw InputError("entropy_density: densities must be nonnegative and finite");
    h += spec.pi[i] * (xlogx(u[i]) + u[i] * (spec.lambda[i] - 1.0) + std::exp(-spec.lambda[i]));
  }
  return h;
}

double total_entropy(const ModelSpec& spec, const Field& u) {
  const int nc = u.grid.ncells();
  const double meas = u.grid.cell_measure();
  std::vector<double> cell(spec.n);
  double total = 0;
  for (int c = 0; c < nc; ++c) {
    for (int i = 0; i < spec.n; ++i) cell[i] = u.at(i, c);
    total += entropy_density(spec, cell);
  }
  return total * meas;
}

double relative_entropy(const ModelSpec& spec, const Field& u, const Field& v) {
  if (!u.same_layout(v)) throw InputError("relative_entropy: fields must share grid and species");
  if (u.n != spec.n) throw InputError("relative_entropy: field species count mismatch");
  check_admissible_density(u);
  check_positive_reference(v);
  const int nc = u.grid.ncells();
  double total = 0;
  for (int i = 0; i < spec.n; ++i) {
    const double* ur = u.row(i);
    const double* vr = v.row(i);
    double s = 0;
    for (int c = 0; c < nc; ++c) {
      const double ui = ur[c], vi = vr[c];
      s += xlogx(ui) - ui - (ui > 0 ? ui * std::log(vi) : 0.0) + vi;
    }
    total += spec.pi[i] * s;
  }
  return total * u.grid.cell_measure();
}

double cutoff_relative_entropy(const ModelSpec& spec, const CutoffSpec& cut,
                               const Field& u, const Field& v) {
  if (!u.same_layout(v)) throw InputError("cutoff_relative_entropy: fields must match");
  if (u.n != spec.n) throw InputError("cutoff_relative_entropy: species count mismatch");
  cut.validate();
  check_admissible_density(u);
  check_positive_reference(v);
  const int nc = u.grid.ncells();
  double total = 0;
  for (int c = 0; c < nc; ++c) {
    double usum = 0;
    for (int i = 0; i < spec.n; ++i) usum += u.at(i, c);
    const double phi = cutoff_eval_sum(usum, cut.K, cut.L, cut.profile).phi;
    double cell = 0;
    for (int i = 0; i < spec.n; ++i) {
      const double ui = u.at(i, c), vi = v.at(i, c);
      cell += spec.pi[i] * (xlogx(ui) + ui * (spec.lambda[i] - 1.0) -
                            phi * ui * (std::log(vi) + spec.lambda[i]) + vi);
    }
    total += cell;
  }
  return total * u.grid.cell_measure();
}

double double_cutoff_relative_entropy(const ModelSpec& spec, const CutoffSpec& cut,
                                      const Field& u, const Field& v) {
  if (!u.same_layout(v)) throw InputError("double_cutoff_relative_entropy: fields must match");
  if (u.n != spec.n) throw InputError("double_cutoff_relative_entropy: species count mismatch");
  cut.validate();
  check_admissible_density(u);
  check_positive_reference(v);
  const int nc = u.grid.ncells();
  const double eps = cut.eps;
  double total = 0;
  for (int c = 0; c < nc; ++c) {
    double ssum = 0;
    for (int i = 0; i < spec.n; ++i) ssum += u.at(i, c) + eps;
    const double phi_m = cutoff_eval_sum(ssum, cut.K, cut.M, cut.profile).phi;
    const double phi_l = cutoff_eval_sum(ssum, cut.K, cut.L, cut.profile).phi;
    double cell = 0;
    for (int i = 0; i < spec.n; ++i) {
      const double ue = u.at(i, c) + eps, vi = v.at(i, c);
      cell += spec.pi[i] *
              (phi_m * (ue * (std::log(ue) + spec.lambda[i] - 1.0) + std::exp(-spec.lambda[i])) -
               phi_l * ue * (std::log(vi) + spec.lambda[i]) + vi);
    }
    total += cell;
  }
  return total * u.grid.cell_measure();
}

LogGap log_gap_bounds(double s) {
  if (!(s > 0) || !std::isfinite(s)) throw InputError("log_gap_bounds: s must be positive");
  const double e = s - 1.0;
  LogGap g;
  g.value = std::log1p(e) - e;  // grouping keeps the sign exact near s = 1
  g.lower = -(1.0 + 1.0 / s) * e * e;
  g.upper = 0.0;
  return g;
}

}  // namespace skt
