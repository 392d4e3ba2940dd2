#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skt/entropy.hpp"
#include "skt/grid.hpp"
#include "skt/model.hpp"
#include "skt/solver.hpp"

namespace skt {

// Term-by-term decomposition of the approximate entropy balance over a time
// window [0, s]: the change of the doubly cutoff relative entropy equals the
// sum of six production terms from the u-side (G) and twelve comparison terms
// against the reference solution (I); `residual` is what the quadrature leaves
// unexplained and must vanish under refinement.
struct EntropyBalanceTerms {
  std::array<double, 6> G{};
  std::array<double, 12> I{};
  double lhs = 0;  // functional at s minus functional at 0
  double rhs() const;
  double residual = 0;  // lhs - rhs
  double window = 0;
};

// Quadrature: midpoint cell sums for gradient-free factors, face-centered
// differences for gradient products, trapezoid in time over the snapshots
// contained in [0, s]. Requires positive snapshots and a positive proxy.
EntropyBalanceTerms entropy_balance_terms(const ModelSpec& spec, const CutoffSpec& cut,
                                          const Trajectory& u, const StrongProxy& v,
                                          double s);

struct SeriesPoint {
  double t = 0;
  double entropy = 0;    // cell-sum of the entropy density of u
  double h_rel = 0;      // relative entropy vs proxy
  double h_cut = 0;      // cutoff relative entropy
  double h_double = 0;   // doubly cutoff, shifted variant
  std::vector<double> mass;
  double umin = 0, umax = 0;
};

std::vector<SeriesPoint> relative_entropy_series(const ModelSpec& spec, const CutoffSpec& cut,
                                                 const Trajectory& u, const StrongProxy& v);

struct GronwallFit {
  double c_hat = 0;          // least-squares slope of log(H + floor) vs t
  double fit_residual = 0;   // rms residual of that fit
  bool degenerate = false;   // series numerically zero, slope meaningless
  bool bound_ok = false;     // H_k <= H_0 exp(c_hat t_k) + tol for all k
  bool uniqueness_branch = false;  // H_0 <= tol
  bool uniqueness_ok = false;      // H_k <= tol for all k (meaningful on that branch)
  double max_h = 0;
  double tol = 0;
};

// Fits dH/dt <= C H behaviour on a nonnegative series and checks the implied
// exponential bound; `tol` also serves as the identical-data threshold.
GronwallFit gronwall_probe(std::span<const double> t, std::span<const double> h, double tol);

struct FischerResult {
  double l_found = 0;      // smallest ladder threshold passing the pointwise test
  double h_cut = 0;        // cutoff relative entropy at that threshold
  double tail_mass = 0;    // integral of (1 + sum u) over {sum u >= L}
  double fis1_margin = 0;  // 2 h_cut - tail_mass
  bool ineq1_ok = false;
  double sq_low = 0;       // integral of sum (u_i - v_i)^2 over {sum u <= L}
  double ratio = 0;        // sq_low / h_cut (0 when both vanish)
  bool ineq2_ok = false;   // ratio finite (h_cut > 0 or sq_low == 0)
};

// Pointwise sufficiency search for the tail/square lower bounds of the cutoff
// relative entropy: geometric ladder L = 1, 2, 4, ... until every cell with
// sum u >= L has integrand >= (1 + sum u)/2. Throws HypothesisError when the
// ladder is exhausted. v must take values in [c_lo, c_hi], 0 < c_lo.
FischerResult fischer_bounds_check(const ModelSpec& spec, const CutoffSpec& cut,
                                   const Field& u, const Field& v, double c_lo, double c_hi);

enum class ProbeMode { manufactured, fine_proxy };

struct ProbeOptions {
  ProbeMode mode = ProbeMode::manufactured;
  int refinement = 2;            // fine_proxy: cell ratio per axis
  double perturbation = 0;       // relative initial-data perturbation amplitude
  std::vector<double> m, amp;    // manufactured parameters
  std::optional<double> tolerance;  // probe criterion tolerance; default derived
  SamplingPlan hyp_sampling{};
};

struct ProbeReport {
  std::vector<SeriesPoint> series;
  GronwallFit gronwall;
  HypothesisReport hypotheses;
  FischerResult fischer;
  double tol = 0;            // tolerance actually used
  bool criterion_met = false;
  std::string summary;
};

// End-to-end comparison of a solver run against its strong proxy: runs the
// simulation(s), assembles the entropy series, fits the Gronwall bound, and
// evaluates the distance criterion. Requires the structural hypotheses
// (throws HypothesisError) and strictly positive initial data.
ProbeReport weak_strong_probe(const ModelSpec& spec, const Grid& grid, const CutoffSpec& cut,
                              const Field& u0, double T, double dt, const ProbeOptions& opt,
                              const NewtonOptions& newton = {});

}  // namespace skt
