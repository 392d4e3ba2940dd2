#include "skt/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "skt/errors.hpp"

namespace skt {

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Exact-balance tolerance: constructed balanced specs land within a few ulp.
bool detailed_balance_holds(const ModelSpec& s, double residual) {
  double scale = 0;
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) scale = std::max(scale, s.pi[i] * s.a_at(i, j));
  return residual <= 1e-12 * (1.0 + scale);
}

bool pi_is_unit(const ModelSpec& s) {
  for (double p : s.pi)
    if (std::abs(p - 1.0) > 1e-14) return false;
  return true;
}

}  // namespace

double ModelSpec::b_sup() const {
  double m = 0;
  for (double x : b) m = std::max(m, std::abs(x));
  return m;
}

void ModelSpec::validate() const {
  if (n < 1) throw InputError("model: need at least one species");
  if (d != 1 && d != 2) throw InputError("model: spatial dimension must be 1 or 2");
  if (static_cast<int>(a0.size()) != n) throw InputError("model: a0 must have n entries");
  if (static_cast<int>(a.size()) != n * n) throw InputError("model: a must be n x n");
  if (static_cast<int>(pi.size()) != n) throw InputError("model: pi must have n entries");
  if (static_cast<int>(lambda.size()) != n) throw InputError("model: lambda must have n entries");
  if (static_cast<int>(b.size()) != n * d) throw InputError("model: b must be n x d");
  if (!all_finite(a0) || !all_finite(a) || !all_finite(pi) || !all_finite(lambda) ||
      !all_finite(b))
    throw InputError("model: coefficients must be finite");
  for (double x : a0)
    if (x < 0) throw InputError("model: a0 entries must be nonnegative");
  for (double x : a)
    if (x < 0) throw InputError("model: coupling matrix entries must be nonnegative");
  for (double p : pi)
    if (!(p > 0)) throw InputError("model: pi entries must be positive");
  reaction.validate(n);
}

void ModelSpec::reaction_at(std::span<const double> u, std::span<double> f) const {
  reaction_value(reaction, lambda, u, f);
}

void ModelSpec::reaction_jac(std::span<const double> u, std::span<double> J) const {
  reaction_jacobian(reaction, lambda, u, J);
}

void diffusion_matrix(const ModelSpec& spec, std::span<const double> u,
                      std::span<double> A_out) {
  const int n = spec.n;
  for (double x : u)
    if (!(x >= 0) || !std::isfinite(x))
      throw InputError("diffusion_matrix: densities must be nonnegative and finite");
  for (int i = 0; i < n; ++i) {
    double diag = spec.a0[i];
    for (int k = 0; k < n; ++k) diag += spec.a_at(i, k) * u[k];
    for (int j = 0; j < n; ++j) {
      double v = spec.a_at(i, j) * u[i];
      if (i == j) v += diag;
      A_out[static_cast<std::size_t>(i) * n + j] = v;
    }
  }
}

double weak_cross_diffusion_eta(const ModelSpec& spec) {
  double eta = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n; ++i) {
    double penalty = 0;
    for (int j = 0; j < spec.n; ++j) {
      const double dr = std::sqrt(spec.a_at(i, j)) - std::sqrt(spec.a_at(j, i));
      penalty += dr * dr;
    }
    eta = std::min(eta, spec.a_at(i, i) - 0.25 * penalty);
  }
  return eta;
}

double detailed_balance_residual(const ModelSpec& spec) {
  double r = 0;
  for (int i = 0; i < spec.n; ++i)
    for (int j = 0; j < spec.n; ++j) {
      if (i == j) continue;
      r = std::max(r, std::abs(spec.pi[i] * spec.a_at(i, j) - spec.pi[j] * spec.a_at(j, i)));
    }
  return r;
}

StructuralConstants structural_constants(const ModelSpec& spec) {
  StructuralConstants out;
  out.eta = weak_cross_diffusion_eta(spec);
  const double residual = detailed_balance_residual(spec);
  const bool db = detailed_balance_holds(spec, residual);
  const bool wcd = out.eta > 0 && pi_is_unit(spec);

  double alpha0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.n; ++i) alpha0 = std::min(alpha0, spec.a0[i] / spec.pi[i]);
  out.alpha0 = alpha0;

  if (db) {  // preferred when both branches are admissible
    out.detailed_balance = true;
    double e0 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < spec.n; ++i) e0 = std::min(e0, spec.a_at(i, i) / spec.pi[i]);
    out.eta0 = e0;
    return out;
  }
  if (wcd) {
    out.detailed_balance = false;
    out.eta0 = out.eta;
    return out;
  }
  std::ostringstream msg;
  msg << "no admissible coupling branch: detailed-balance residual " << residual
      << " is nonzero, and weak cross-diffusion fails ("
      << (out.eta <= 0 ? "eta <= 0" : "pi != 1") << ", eta = " << out.eta << ")";
  throw HypothesisError(msg.str());
}

MobilityForm entropy_mobility_form(const ModelSpec& spec, std::span<const double> u,
                                   std::span<const double> z) {
  const int n = spec.n;
  const StructuralConstants sc = structural_constants(spec);
  std::vector<double> A(static_cast<std::size_t>(n) * n);
  diffusion_matrix(spec, u, A);
  MobilityForm out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.q += A[static_cast<std::size_t>(i) * n + j] * (u[j] / spec.pi[j]) * z[i] * z[j];
  for (int i = 0; i < n; ++i)
    out.bound += sc.alpha0 * u[i] * z[i] * z[i] + 2.0 * sc.eta0 * u[i] * u[i] * z[i] * z[i];
  return out;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass_analytic: return "pass (analytic)";
    case CheckStatus::fail_analytic: return "fail (analytic)";
    case CheckStatus::pass_sampled: return "pass (sampled)";
    case CheckStatus::fail_sampled: return "fail (sampled)";
  }
  return "?";
}

bool HypothesisReport::ok() const {
  auto passed = [](CheckStatus s) {
    return s == CheckStatus::pass_analytic || s == CheckStatus::pass_sampled;
  };
  return passed(drift_bound) && passed(reaction_smooth) && passed(entropy_sign) && passed(structure) &&
         (passed(mass_control) || mass_growth.alternative_ok);
}

HypothesisReport validate_hypotheses(const ModelSpec& spec, const SamplingPlan& plan) {
  spec.validate();
  HypothesisReport rep;
  rep.samples = plan.count;
  rep.seed = plan.seed;

  // Bounded drift: constant vectors, so finiteness is the whole condition.
  rep.b_sup = spec.b_sup();
  rep.drift_bound = std::isfinite(rep.b_sup) ? CheckStatus::pass_analytic : CheckStatus::fail_analytic;

  // Local Lipschitz bound for the reaction, sampled on [0, R]^n with R from the plan.
  rep.lipschitz = lipschitz_estimate(spec.reaction, spec.lambda, spec.n,
                                     std::max(1.0, plan.hi), plan);
  rep.reaction_smooth = std::isfinite(rep.lipschitz) ? CheckStatus::pass_sampled : CheckStatus::fail_sampled;

  rep.entropy_sign_detail = entropy_dissipation_check(spec.reaction, spec.pi, spec.lambda, plan);
  rep.entropy_sign = rep.entropy_sign_detail.ok ? CheckStatus::pass_sampled : CheckStatus::fail_sampled;

  rep.mass_growth = mass_growth_check(spec.reaction, spec.lambda, spec.n, spec.d, plan);
  rep.mass_control = rep.mass_growth.found_m0 ? CheckStatus::pass_sampled : CheckStatus::fail_sampled;

  // Coupling branch: a0_i > 0 and a_ii > 0 first, then branch admissibility.
  bool positive = true;
  for (int i = 0; i < spec.n; ++i)
    if (!(spec.a0[i] > 0) || !(spec.a_at(i, i) > 0)) positive = false;
  rep.eta = weak_cross_diffusion_eta(spec);
  rep.db_residual = detailed_balance_residual(spec);
  if (!positive) {
    rep.structure = CheckStatus::fail_analytic;
    rep.structure_failure = "needs a0_i > 0 and a_ii > 0 for every species";
  } else {
    try {
      const StructuralConstants sc = structural_constants(spec);
      rep.structure = CheckStatus::pass_analytic;
      rep.structure_ok = true;
      rep.structure_branch = sc.detailed_balance ? "detailed_balance" : "weak_cross_diffusion";
      rep.alpha0 = sc.alpha0;
      rep.eta0 = sc.eta0;
    } catch (const HypothesisError& e) {
      rep.structure = CheckStatus::fail_analytic;
      rep.structure_failure = e.what();
    }
  }

  for (double l : spec.lambda)
    if (!(l > 0)) rep.lambda_warning = true;

  return rep;
}

std::string HypothesisReport::text() const {
  std::ostringstream os;
  os << "structural checks (" << samples << " samples, seed " << seed << ")\n";
  os << "  drift bound:          " << to_string(drift_bound) << ", sup |b| = " << b_sup << "\n";
  os << "  reaction smoothness:  " << to_string(reaction_smooth)
     << ", empirical Lipschitz constant = " << lipschitz << "\n";
  os << "  entropy-reaction sign: " << to_string(entropy_sign) << ", worst value = "
     << entropy_sign_detail.worst << " (" << entropy_sign_detail.violations << " violations)\n";
  os << "  mass control:         " << to_string(mass_control);
  if (mass_growth.found_m0) {
    os << ", M0 = " << mass_growth.m0 << "\n";
  } else {
    os << ", growth alternative " << (mass_growth.alternative_ok ? "passes" : "fails")
       << " (bound exponent " << mass_growth.p_bound << ", observed "
       << mass_growth.p_observed << ", C = " << mass_growth.growth_c << ")\n";
  }
  os << "  diffusion structure:  " << to_string(structure);
  if (structure_ok) {
    os << ", branch = " << structure_branch << ", alpha0 = " << alpha0 << ", eta0 = " << eta0
       << ", eta = " << eta << ", balance residual = " << db_residual << "\n";
  } else {
    os << ", " << structure_failure << "\n";
  }
  if (lambda_warning)
    os << "  note: some lambda_i <= 0; the entropy shifts are expected positive\n";
  os << "  verdict: " << (ok() ? "required set passes" : "required set FAILS") << "\n";
  return os.str();
}

std::vector<std::pair<std::string, std::string>> HypothesisReport::rows() const {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  std::vector<std::pair<std::string, std::string>> rows;
  rows.emplace_back("drift_bound", to_string(drift_bound));
  rows.emplace_back("b_sup", num(b_sup));
  rows.emplace_back("reaction_smooth", to_string(reaction_smooth));
  rows.emplace_back("lipschitz", num(lipschitz));
  rows.emplace_back("entropy_sign", to_string(entropy_sign));
  rows.emplace_back("entropy_sign_worst", num(entropy_sign_detail.worst));
  rows.emplace_back("mass_control", to_string(mass_control));
  rows.emplace_back("m0", num(mass_growth.m0));
  rows.emplace_back("growth_alternative", mass_growth.alternative_ok ? "true" : "false");
  rows.emplace_back("growth_p_bound", num(mass_growth.p_bound));
  rows.emplace_back("growth_p_observed", num(mass_growth.p_observed));
  rows.emplace_back("growth_c", num(mass_growth.growth_c));
  rows.emplace_back("structure", to_string(structure));
  rows.emplace_back("structure_branch", structure_branch);
  rows.emplace_back("alpha0", num(alpha0));
  rows.emplace_back("eta0", num(eta0));
  rows.emplace_back("eta", num(eta));
  rows.emplace_back("balance_residual", num(db_residual));
  rows.emplace_back("lambda_warning", lambda_warning ? "true" : "false");
  rows.emplace_back("ok", ok() ? "true" : "false");
  return rows;
}

}  // namespace skt
