#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "skt/reactions.hpp"

namespace skt {

// Coefficients of one n-species cross-diffusion model on a d-dimensional box:
//   d_t u_i = div( sum_j A_ij(u) grad u_j - u_i b_i ) + f_i(u),
//   A_ij(u) = delta_ij (a0_i + sum_k a_ik u_k) + a_ij u_i,
// with no-flux boundaries. pi/lambda are the entropy weights and shifts.
struct ModelSpec {
  int n = 1;
  int d = 1;
  std::vector<double> a0;      // n self-diffusion offsets
  std::vector<double> a;       // n*n coupling, row-major, nonnegative
  std::vector<double> pi;      // n positive entropy weights
  std::vector<double> lambda;  // n entropy shifts
  std::vector<double> b;       // n*d constant drift, row per species
  ReactionSpec reaction;

  double a_at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  double b_at(int i, int axis) const { return b[static_cast<std::size_t>(i) * d + axis]; }
  double b_sup() const;  // max_i,axis |b_i,axis|

  // Shape / finiteness / nonnegativity checks. Throws InputError. Does NOT
  // enforce the coupling hypotheses; those belong to validate_hypotheses so a
  // loadable spec can still be reported against them.
  void validate() const;

  void reaction_at(std::span<const double> u, std::span<double> f) const;
  void reaction_jac(std::span<const double> u, std::span<double> J) const;
};

// A(u) row-major into A_out (size n*n). Rejects negative or non-finite u.
void diffusion_matrix(const ModelSpec& spec, std::span<const double> u,
                      std::span<double> A_out);

// eta = min_i ( a_ii - 1/4 sum_j (sqrt(a_ij) - sqrt(a_ji))^2 ).
double weak_cross_diffusion_eta(const ModelSpec& spec);

// max_{i != j} | pi_i a_ij - pi_j a_ji |  (0 when n == 1).
double detailed_balance_residual(const ModelSpec& spec);

struct StructuralConstants {
  double alpha0 = 0;        // min_i a0_i / pi_i
  double eta0 = 0;          // branch-dependent coercivity constant
  bool detailed_balance = false;  // selected branch (preferred when both hold)
  double eta = 0;           // weak cross-diffusion surplus, for reporting
};

// Picks the admissible coupling branch and its constants; throws
// HypothesisError naming both failures when neither branch holds.
StructuralConstants structural_constants(const ModelSpec& spec);

struct MobilityForm {
  double q = 0;      // z : A(u) h''(u)^{-1} z = sum_ij A_ij(u) (u_j / pi_j) z_i z_j
  double bound = 0;  // alpha0 sum u_i z_i^2 + 2 eta0 sum u_i^2 z_i^2
};

// Entropy-weighted mobility quadratic form and its structural lower bound.
// Requires an admissible coupling branch (throws HypothesisError otherwise).
MobilityForm entropy_mobility_form(const ModelSpec& spec, std::span<const double> u,
                                   std::span<const double> z);

enum class CheckStatus { pass_analytic, fail_analytic, pass_sampled, fail_sampled };

const char* to_string(CheckStatus s);

// Outcome of the structural checks: bounded drift, locally Lipschitz
// reaction, entropy-dissipating reaction sign, total-mass control (or its
// growth alternative), and the diffusion-coupling structure.
struct HypothesisReport {
  CheckStatus drift_bound{}, reaction_smooth{}, entropy_sign{}, mass_control{}, structure{};
  double b_sup = 0;
  double lipschitz = 0;

  SignCheck entropy_sign_detail;

  MassGrowthResult mass_growth;

  bool structure_ok = false;
  std::string structure_branch;  // "detailed_balance" | "weak_cross_diffusion" | ""
  std::string structure_failure; // populated when structure fails
  double eta = 0, db_residual = 0, alpha0 = 0, eta0 = 0;

  bool lambda_warning = false;  // some lambda_i <= 0 (entropy shifts expected positive)
  int samples = 0;
  std::uint64_t seed = 0;

  // Required set: drift, reaction smoothness, entropy sign, structure,
  // and (mass control or its growth alternative).
  bool ok() const;
  std::string text() const;  // human-readable report
  // Machine-readable key/value rows (stringified), stable order.
  std::vector<std::pair<std::string, std::string>> rows() const;
};

HypothesisReport validate_hypotheses(const ModelSpec& spec, const SamplingPlan& plan = {});

}  // namespace skt
