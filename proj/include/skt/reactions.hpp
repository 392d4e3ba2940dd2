#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace skt {

enum class ReactionKind { zero, logistic_competition, linear_relaxation, user_table };

// Source terms f_i(u). linear_relaxation pulls each species toward exp(-lambda_i),
// so evaluation takes the model's lambda vector alongside u.
struct ReactionSpec {
  ReactionKind kind = ReactionKind::zero;
  std::vector<double> beta;   // logistic: n growth rates
  std::vector<double> gamma;  // logistic: n*n competition matrix, row-major
  std::function<void(std::span<const double>, std::span<double>)> user;  // user_table callback

  void validate(int n) const;  // throws InputError on shape/finiteness problems
};

void reaction_value(const ReactionSpec& r, std::span<const double> lambda,
                    std::span<const double> u, std::span<double> f);

// J[i*n+j] = df_i/du_j. Built-ins are analytic; user_table falls back to
// central differences with step 1e-6*(1+max|u|).
void reaction_jacobian(const ReactionSpec& r, std::span<const double> lambda,
                       std::span<const double> u, std::span<double> J);

// Log-uniform componentwise sampling box used by the sign checks below.
struct SamplingPlan {
  int count = 10000;
  double lo = 1e-4;
  double hi = 1e4;
  std::uint64_t seed = 1;
};

// Absolute-plus-relative slack applied to sign conditions checked by sampling.
inline constexpr double kSignTol = 1e-12;

struct SignCheck {
  bool ok = true;
  double worst = 0;             // most violating value observed (signed)
  std::vector<double> worst_u;  // sample attaining it
  int violations = 0;
};

// Checks sum_i pi_i f_i(u) (log u_i + lambda_i) <= kSignTol * (1 + |u|^2)
// over the sampling box; records the maximizing sample.
SignCheck entropy_dissipation_check(const ReactionSpec& r, std::span<const double> pi,
                                    std::span<const double> lambda, const SamplingPlan& plan);

// Checks f_i(u) >= -kSignTol * (1 + max u) on each face {u_i = 0}.
SignCheck quasi_positivity_check(const ReactionSpec& r, std::span<const double> lambda,
                                 int n, const SamplingPlan& plan);

struct MassGrowthResult {
  bool found_m0 = false;
  int m0 = -1;                  // smallest threshold that works, when found
  bool alternative_ok = false;  // |sum f| <= C (1 + |u|^p) with the exponent below
  double p_bound = 0;           // 2 + 2/d
  double p_observed = 0;        // regression slope of log|sum f| vs log|u| (upper tail)
  double growth_c = 0;          // max |sum f| / (1 + |u|^p_bound)
};

// Searches the smallest integer M0 in [0, m0_max] such that every sample with
// sum u_i >= M0 has sum f_i >= -kSignTol * (1 + sum u); when none exists, fits
// the polynomial growth alternative.
MassGrowthResult mass_growth_check(const ReactionSpec& r, std::span<const double> lambda,
                                   int n, int d, const SamplingPlan& plan, int m0_max = 1000);

// Empirical Lipschitz constant of f on [0, box_hi]^n: max |f(u)-f(w)| / |u-w|
// over sampled pairs (far pairs plus short-displacement pairs).
double lipschitz_estimate(const ReactionSpec& r, std::span<const double> lambda,
                          int n, double box_hi, const SamplingPlan& plan);

}  // namespace skt
