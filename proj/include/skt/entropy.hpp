#pragma once

#include <span>
#include <vector>

#include "skt/grid.hpp"
#include "skt/model.hpp"

namespace skt {

enum class CutoffKind { smooth, smoothstep };

// C^2 (C^inf for `smooth`) nonincreasing transition profile on [0,1]:
// identically 1 on (-inf, 0], identically 0 on [1, inf).
//  - smooth:     1 - N(x)/(N(x)+N(1-x)) with N(x) = exp(-1/x) for x > 0 else 0
//  - smoothstep: 1 - (6x^5 - 15x^4 + 10x^3), C^2 at both ends
struct CutoffProfile {
  CutoffKind kind = CutoffKind::smooth;
  double sup_d1 = 0;  // recorded sup |phi'|
  double sup_d2 = 0;  // recorded sup |phi''|

  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;

  static CutoffProfile make(CutoffKind kind);
};

// Double-log cutoff parameters. The scalar cutoff of a density vector u is
//   phi_K^L(u) = profile( (loglog(sum u + e) - loglog(L + e)) / log(K + 1) ),
// which is 1 on {sum u <= L} and 0 on {sum u > (L+e)^(K+1) - e}.
struct CutoffSpec {
  int K = 3;          // steepness, integer >= 3
  double L = 1;       // inner plateau threshold, > 0
  double M = 1000;    // second threshold for the doubly cutoff functional, > L
  double eps = 0.01;  // density shift, in (0, 1/2)
  CutoffProfile profile = CutoffProfile::make(CutoffKind::smooth);

  void validate() const;  // throws InputError
};

// Scalar cutoff machinery in terms of s = sum of components. All first
// partials of phi_K^L coincide (the argument depends on u only through the
// sum), as do all second partials; d1/d2 below are those common values.
struct CutoffEval {
  double phi = 0;
  double d1 = 0;
  double d2 = 0;
};
CutoffEval cutoff_eval_sum(double usum, int K, double L, const CutoffProfile& profile);

// phi_K^L(u); exact 1 / exact 0 on the two plateaus.
double cutoff_value(std::span<const double> u, int K, double L, const CutoffProfile& profile);
// All-equal gradient (size n) and Hessian (size n*n, row-major).
std::vector<double> cutoff_gradient(std::span<const double> u, int K, double L,
                                    const CutoffProfile& profile);
std::vector<double> cutoff_hessian(std::span<const double> u, int K, double L,
                                   const CutoffProfile& profile);

// Bound constants for the cutoff derivative estimates (valid for K >= 3):
//   |d phi|  <= grad_c  / ( log(K+1) (s+e) log(s+e) )
//   |d2 phi| <= hess_c  / ( log(K+1) (s+e)^2 log(s+e) )
double cutoff_grad_bound_constant(const CutoffProfile& profile);
double cutoff_hess_bound_constant(const CutoffProfile& profile);

// Pointwise entropy density h(u) = sum_i pi_i [ u_i (log u_i - 1 + lambda_i) + e^{-lambda_i} ].
double entropy_density(const ModelSpec& spec, std::span<const double> u);

// Cell-sum of the entropy density over a field.
double total_entropy(const ModelSpec& spec, const Field& u);

// H(u|v) = sum_i pi_i Integral [ u_i (log u_i - 1) - u_i log v_i + v_i ] dx
// by midpoint (cell-sum) quadrature. u may touch 0; v must stay positive.
double relative_entropy(const ModelSpec& spec, const Field& u, const Field& v);

// Cutoff relative entropy: the cross term u_i (log v_i + lambda_i) is weighted
// by phi_K^L evaluated at the cell's density vector.
double cutoff_relative_entropy(const ModelSpec& spec, const CutoffSpec& cut,
                               const Field& u, const Field& v);

// Doubly cutoff, shifted variant used by the approximate balance audit:
//   Integral sum_i pi_i [ phi_K^M(u+eps) ( (u_i+eps)(log(u_i+eps)+lambda_i-1) + e^{-lambda_i} )
//                         - phi_K^L(u+eps) (u_i+eps)(log v_i + lambda_i) + v_i ] dx.
double double_cutoff_relative_entropy(const ModelSpec& spec, const CutoffSpec& cut,
                                      const Field& u, const Field& v);

struct LogGap {
  double lower = 0;  // -(1 + 1/s)(s-1)^2
  double value = 0;  // log s - s + 1, evaluated as log1p(s-1) - (s-1)
  double upper = 0;  // always 0
};

// Elementary gap bounds for log s around s = 1; valid for every s > 0.
LogGap log_gap_bounds(double s);

}  // namespace skt
