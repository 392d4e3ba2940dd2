#include "skt/reactions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "skt/errors.hpp"

namespace skt {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double sup_norm(std::span<const double> v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double eucl_norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// One log-uniform sample of the box [plan.lo, plan.hi]^n.
void draw_log_uniform(std::mt19937_64& rng, double lo, double hi, std::span<double> u) {
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  for (double& x : u) x = std::exp(unif(rng));
}

}  // namespace

void ReactionSpec::validate(int n) const {
  switch (kind) {
    case ReactionKind::zero:
      return;
    case ReactionKind::logistic_competition:
      if (static_cast<int>(beta.size()) != n)
        throw InputError("reaction: beta must have one entry per species");
      if (static_cast<int>(gamma.size()) != n * n)
        throw InputError("reaction: gamma must be an n x n matrix");
      if (!all_finite(beta) || !all_finite(gamma))
        throw InputError("reaction: beta/gamma must be finite");
      return;
    case ReactionKind::linear_relaxation:
      return;
    case ReactionKind::user_table:
      if (!user) throw InputError("reaction: user_table requires a callback");
      return;
  }
  throw InputError("reaction: unknown kind");
}

void reaction_value(const ReactionSpec& r, std::span<const double> lambda,
                    std::span<const double> u, std::span<double> f) {
  const int n = static_cast<int>(u.size());
  switch (r.kind) {
    case ReactionKind::zero:
      std::fill(f.begin(), f.end(), 0.0);
      return;
    case ReactionKind::logistic_competition:
      for (int i = 0; i < n; ++i) {
        double crowd = 0;
        for (int j = 0; j < n; ++j) crowd += r.gamma[static_cast<std::size_t>(i) * n + j] * u[j];
        f[i] = u[i] * (r.beta[i] - crowd);
      }
      return;
    case ReactionKind::linear_relaxation:
      for (int i = 0; i < n; ++i) f[i] = std::exp(-lambda[i]) - u[i];
      return;
    case ReactionKind::user_table:
      r.user(u, f);
      return;
  }
}

void reaction_jacobian(const ReactionSpec& r, [[maybe_unused]] std::span<const double> lambda,
                       std::span<const double> u, std::span<double> J) {
  const int n = static_cast<int>(u.size());
  std::fill(J.begin(), J.end(), 0.0);
  switch (r.kind) {
    case ReactionKind::zero:
      return;
    case ReactionKind::logistic_competition:
      for (int i = 0; i < n; ++i) {
        double crowd = 0;
        for (int j = 0; j < n; ++j) crowd += r.gamma[static_cast<std::size_t>(i) * n + j] * u[j];
        for (int j = 0; j < n; ++j) {
          double v = -u[i] * r.gamma[static_cast<std::size_t>(i) * n + j];
          if (i == j) v += r.beta[i] - crowd;
          J[static_cast<std::size_t>(i) * n + j] = v;
        }
      }
      return;
    case ReactionKind::linear_relaxation:
      for (int i = 0; i < n; ++i) J[static_cast<std::size_t>(i) * n + i] = -1.0;
      return;
    case ReactionKind::user_table: {
      const double h = 1e-6 * (1.0 + sup_norm(u));
      std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
      std::vector<double> fp(n), fm(n);
      for (int j = 0; j < n; ++j) {
        up[j] = u[j] + h;
        um[j] = u[j] - h;
        r.user(up, fp);
        r.user(um, fm);
        for (int i = 0; i < n; ++i)
          J[static_cast<std::size_t>(i) * n + j] = (fp[i] - fm[i]) / (2 * h);
        up[j] = u[j];
        um[j] = u[j];
      }
      return;
    }
  }
}

SignCheck entropy_dissipation_check(const ReactionSpec& r, std::span<const double> pi,
                                    std::span<const double> lambda, const SamplingPlan& plan) {
  const int n = static_cast<int>(pi.size());
  std::mt19937_64 rng(plan.seed);
  std::vector<double> u(n), f(n);
  SignCheck out;
  out.worst = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < plan.count; ++s) {
    draw_log_uniform(rng, plan.lo, plan.hi, u);
    reaction_value(r, lambda, u, f);
    double val = 0;
    for (int i = 0; i < n; ++i) val += pi[i] * f[i] * (std::log(u[i]) + lambda[i]);
    const double nrm = eucl_norm(u);
    const double allowed = kSignTol * (1.0 + nrm * nrm);
    if (val > allowed) {
      out.ok = false;
      ++out.violations;
    }
    if (val > out.worst) {
      out.worst = val;
      out.worst_u.assign(u.begin(), u.end());
    }
  }
  return out;
}

SignCheck quasi_positivity_check(const ReactionSpec& r, std::span<const double> lambda,
                                 int n, const SamplingPlan& plan) {
  std::mt19937_64 rng(plan.seed);
  std::vector<double> u(n), f(n);
  SignCheck out;
  out.worst = std::numeric_limits<double>::infinity();
  const int per_face = std::max(1, plan.count / std::max(1, n));
  for (int i = 0; i < n; ++i) {
    for (int s = 0; s < per_face; ++s) {
      draw_log_uniform(rng, plan.lo, plan.hi, u);
      u[i] = 0.0;
      reaction_value(r, lambda, u, f);
      const double allowed = -kSignTol * (1.0 + sup_norm(u));
      if (f[i] < allowed) {
        out.ok = false;
        ++out.violations;
      }
      if (f[i] < out.worst) {
        out.worst = f[i];
        out.worst_u.assign(u.begin(), u.end());
      }
    }
  }
  return out;
}

MassGrowthResult mass_growth_check(const ReactionSpec& r, std::span<const double> lambda,
                                   int n, int d, const SamplingPlan& plan, int m0_max) {
  std::mt19937_64 rng(plan.seed);
  std::vector<double> u(n), f(n);
  struct Sample {
    double usum, fsum, unorm;
  };
  std::vector<Sample> samples;
  samples.reserve(plan.count);
  for (int s = 0; s < plan.count; ++s) {
    draw_log_uniform(rng, plan.lo, plan.hi, u);
    reaction_value(r, lambda, u, f);
    double usum = 0, fsum = 0;
    for (int i = 0; i < n; ++i) {
      usum += u[i];
      fsum += f[i];
    }
    samples.push_back({usum, fsum, eucl_norm(u)});
  }
  std::sort(samples.begin(), samples.end(),
            [](const Sample& a, const Sample& b) { return a.usum < b.usum; });

  MassGrowthResult out;
  out.p_bound = 2.0 + 2.0 / d;

  // Suffix scan: for ascending M0, only samples with usum >= M0 matter.
  // smallest_ok[k] = min over samples[k..] of the slack fsum + tol*(1+usum).
  const int ns = static_cast<int>(samples.size());
  std::vector<double> suffix_min(ns + 1, std::numeric_limits<double>::infinity());
  for (int k = ns - 1; k >= 0; --k) {
    const double slack = samples[k].fsum + kSignTol * (1.0 + samples[k].usum);
    suffix_min[k] = std::min(suffix_min[k + 1], slack);
  }
  for (int m0 = 0; m0 <= m0_max; ++m0) {
    // first sample with usum >= m0
    const auto it = std::lower_bound(samples.begin(), samples.end(), static_cast<double>(m0),
                                     [](const Sample& a, double v) { return a.usum < v; });
    const int k = static_cast<int>(it - samples.begin());
    if (suffix_min[k] >= 0) {
      out.found_m0 = true;
      out.m0 = m0;
      break;
    }
  }
  if (out.found_m0) return out;

  // Growth alternative: |sum f| <= C (1 + |u|^p). Measure the empirical growth
  // exponent on the upper tail by least squares of log|sum f| vs log|u|.
  double cmax = 0;
  for (const auto& s : samples)
    cmax = std::max(cmax, std::abs(s.fsum) / (1.0 + std::pow(s.unorm, out.p_bound)));
  out.growth_c = cmax;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = ns / 2; k < ns; ++k) {  // upper tail by usum
    if (std::abs(samples[k].fsum) < 1e-280 || samples[k].unorm <= 0) continue;
    const double x = std::log(samples[k].unorm);
    const double y = std::log(std::abs(samples[k].fsum));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2 && sxx * cnt - sx * sx > 0) {
    out.p_observed = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    out.alternative_ok = out.p_observed <= out.p_bound + 0.1;
  } else {
    out.p_observed = 0;             // no usable tail: sum f vanishes identically there
    out.alternative_ok = true;
  }
  return out;
}

double lipschitz_estimate(const ReactionSpec& r, std::span<const double> lambda,
                          int n, double box_hi, const SamplingPlan& plan) {
  if (!(box_hi > 0)) throw InputError("lipschitz_estimate: box bound must be positive");
  std::mt19937_64 rng(plan.seed);
  std::uniform_real_distribution<double> unif(0.0, box_hi);
  std::vector<double> u(n), w(n), fu(n), fw(n);
  double best = 0;
  const int pairs = std::max(1, plan.count / 2);
  for (int s = 0; s < pairs; ++s) {
    for (int i = 0; i < n; ++i) {
      u[i] = unif(rng);
      w[i] = unif(rng);
    }
    if (s % 2 == 1) {  // short displacement: probes the local slope
      const double h = 1e-4 * box_hi;
      for (int i = 0; i < n; ++i) w[i] = std::min(box_hi, u[i] + h);
    }
    double dist2 = 0;
    for (int i = 0; i < n; ++i) dist2 += (u[i] - w[i]) * (u[i] - w[i]);
    if (dist2 == 0) continue;
    reaction_value(r, lambda, u, fu);
    reaction_value(r, lambda, w, fw);
    double diff2 = 0;
    for (int i = 0; i < n; ++i) diff2 += (fu[i] - fw[i]) * (fu[i] - fw[i]);
    best = std::max(best, std::sqrt(diff2 / dist2));
  }
  return best;
}

}  // namespace skt
