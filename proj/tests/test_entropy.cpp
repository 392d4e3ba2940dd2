#include "doctest.h"

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "skt/entropy.hpp"
#include "skt/errors.hpp"
#include "skt/model.hpp"

using namespace skt;

namespace {

const double kE = std::exp(1.0);

ModelSpec scalar_spec(double lambda = 0.0, double pi = 1.0) {
  ModelSpec s;
  s.n = 1;
  s.d = 1;
  s.a0 = {1.0};
  s.a = {1.0};
  s.pi = {pi};
  s.lambda = {lambda};
  s.b = {0.0};
  return s;
}

Field const_field(const Grid& g, std::vector<double> vals) {
  Field f(static_cast<int>(vals.size()), g);
  for (int i = 0; i < f.n; ++i)
    for (int c = 0; c < g.ncells(); ++c) f.at(i, c) = vals[i];
  return f;
}

// sum at which phi_K^L reaches its outer plateau
double outer_edge(int K, double L) { return std::pow(L + kE, K + 1.0) - kE; }

}  // namespace

// ===== cutoff profiles =====

TEST_CASE("profile endpoint values and derivative bounds") {
  for (auto kind : {CutoffKind::smooth, CutoffKind::smoothstep}) {
    CutoffProfile p = CutoffProfile::make(kind);
    CHECK(p.value(0.0) == 1.0);
    CHECK(p.value(1.0) == 0.0);
    CHECK(p.value(-3.0) == 1.0);
    CHECK(p.value(7.0) == 0.0);
    CHECK(p.d1(0.0) == 0.0);
    CHECK(p.d1(1.0) == 0.0);
    // scan: stated sups really bound the derivatives
    for (int k = 1; k < 5000; ++k) {
      const double x = k / 5000.0;
      CHECK(std::abs(p.d1(x)) <= p.sup_d1);
      CHECK(std::abs(p.d2(x)) <= p.sup_d2);
    }
  }
}

TEST_CASE("polynomial profile constants are closed-form") {
  CutoffProfile p = CutoffProfile::make(CutoffKind::smoothstep);
  CHECK(p.sup_d1 == 30.0 / 16.0);
  CHECK(p.sup_d2 == doctest::Approx(10.0 / std::sqrt(3.0)).epsilon(1e-15));
  // value formula: 1 - (6x^5 - 15x^4 + 10x^3)
  const double x = 0.3;
  CHECK(p.value(x) ==
        doctest::Approx(1.0 - (6.0 * std::pow(x, 5) - 15.0 * std::pow(x, 4) + 10.0 * x * x * x))
            .epsilon(1e-15));
}

// ===== cutoff of a density vector =====

TEST_CASE("cutoff plateaus are exact") {
  const CutoffProfile prof = CutoffProfile::make(CutoffKind::smooth);
  const int K = 3;
  const double L = 5.0;
  SUBCASE("inner plateau") {
    std::vector<double> u = {2.0, 3.0};  // sum exactly L
    CHECK(cutoff_value(u, K, L, prof) == 1.0);
    for (double g : cutoff_gradient(u, K, L, prof)) CHECK(g == 0.0);
    for (double h : cutoff_hessian(u, K, L, prof)) CHECK(h == 0.0);
  }
  SUBCASE("outer plateau") {
    std::vector<double> u = {outer_edge(K, L)};
    CHECK(cutoff_value(u, K, L, prof) == 0.0);
    CHECK(cutoff_value(std::vector<double>{2.0 * outer_edge(K, L)}, K, L, prof) == 0.0);
    for (double g : cutoff_gradient(u, K, L, prof)) CHECK(g == 0.0);
  }
}

TEST_CASE("cutoff transition point") {
  // L = 5, K = 3, sum u = 10: the log-log argument is about 0.1578
  const double z = (std::log(std::log(10.0 + kE)) - std::log(std::log(5.0 + kE))) / std::log(4.0);
  CHECK(z == doctest::Approx(0.15782).epsilon(1e-3));
  for (auto kind : {CutoffKind::smooth, CutoffKind::smoothstep}) {
    const CutoffProfile prof = CutoffProfile::make(kind);
    const double phi = cutoff_value(std::vector<double>{4.0, 6.0}, 3, 5.0, prof);
    CHECK(phi > 0.0);
    CHECK(phi < 1.0);
    CHECK(phi == doctest::Approx(prof.value(z)).epsilon(1e-14));
  }
}

TEST_CASE("cutoff takes values in [0,1] across fourteen decades") {
  const CutoffProfile prof = CutoffProfile::make(CutoffKind::smooth);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> logu(std::log(1e-6), std::log(1e12));
  for (int k = 0; k < 10000; ++k) {
    std::vector<double> u = {std::exp(logu(rng))};
    const double phi = cutoff_value(u, 3, 1.0, prof);
    CHECK(phi >= 0.0);
    CHECK(phi <= 1.0);
  }
}

TEST_CASE("cutoff gradient and hessian match finite differences in the transition band") {
  const CutoffProfile prof = CutoffProfile::make(CutoffKind::smooth);
  const int K = 3;
  const double L = 5.0;
  // pick sums well inside the transition: z in (0.1, 0.9)
  for (double usum : {9.0, 20.0, 60.0, 200.0}) {
    std::vector<double> u = {0.4 * usum, 0.6 * usum};
    oracle::ScalarFn f = [&](std::span<const double> p) { return cutoff_value(p, K, L, prof); };
    const double h = oracle::fd_step(u, 1e-6);
    auto gfd = oracle::fd_gradient(f, u, h);
    auto g = cutoff_gradient(u, K, L, prof);
    for (int i = 0; i < 2; ++i) CHECK(g[i] == doctest::Approx(gfd[i]).epsilon(1e-6));
    auto Hfd = oracle::fd_hessian(f, u, 1e-3 * (1.0 + usum));
    auto H = cutoff_hessian(u, K, L, prof);
    for (int k = 0; k < 4; ++k)
      CHECK(H[k] == doctest::Approx(Hfd[k]).epsilon(1e-3).scale(std::abs(H[0])));
  }
}

TEST_CASE("all cutoff partials coincide") {
  const CutoffProfile prof = CutoffProfile::make(CutoffKind::smoothstep);
  std::vector<double> u = {3.0, 7.0, 1.5};
  auto g = cutoff_gradient(u, 3, 5.0, prof);
  CHECK(g[0] == g[1]);
  CHECK(g[1] == g[2]);
  auto H = cutoff_hessian(u, 3, 5.0, prof);
  for (double h : H) CHECK(h == H[0]);
}

TEST_CASE("cutoff derivative bounds hold on a log grid") {
  // |dphi| log(K+1) (s+e) log(s+e) <= grad_c and the second-order analogue
  for (int K : {3, 10, 100}) {
    for (double L : {1.0, 10.0, 1e3}) {
      for (auto kind : {CutoffKind::smooth, CutoffKind::smoothstep}) {
        const CutoffProfile prof = CutoffProfile::make(kind);
        const double gc = cutoff_grad_bound_constant(prof);
        const double hc = cutoff_hess_bound_constant(prof);
        const double lk = std::log(K + 1.0);
        for (int k = 0; k <= 2000; ++k) {
          const double usum = std::pow(10.0, -6.0 + 18.0 * k / 2000.0);
          const CutoffEval e = cutoff_eval_sum(usum, K, L, prof);
          const double s = usum + kE;
          CHECK(std::abs(e.d1) * lk * s * std::log(s) <= gc * (1.0 + 1e-12));
          CHECK(std::abs(e.d2) * lk * s * s * std::log(s) <= hc * (1.0 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("cutoff input validation") {
  const CutoffProfile prof = CutoffProfile::make(CutoffKind::smooth);
  CHECK_THROWS_AS(cutoff_eval_sum(1.0, 2, 1.0, prof), InputError);   // K < 3
  CHECK_THROWS_AS(cutoff_eval_sum(1.0, 3, 0.0, prof), InputError);   // L <= 0
  CHECK_THROWS_AS(cutoff_eval_sum(-1.0, 3, 1.0, prof), InputError);  // negative sum
  CutoffSpec cut;
  cut.M = cut.L;  // the double cutoff needs a strictly larger outer threshold
  CHECK_THROWS_AS(cut.validate(), InputError);
  cut.M = 10.0;
  cut.eps = 0.5;
  CHECK_THROWS_AS(cut.validate(), InputError);
  cut.eps = 0.01;
  CHECK_NOTHROW(cut.validate());
}

// ===== entropy functionals =====

TEST_CASE("entropy density anchor points") {
  ModelSpec s = scalar_spec(0.0, 1.0);
  CHECK(entropy_density(s, std::vector<double>{1.0}) == 0.0);   // 1*(0-1)+1
  CHECK(entropy_density(s, std::vector<double>{kE}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(entropy_density(s, std::vector<double>{0.0}) == 1.0);   // e^{-lambda}
  ModelSpec w = scalar_spec(2.0, 3.0);
  CHECK(entropy_density(w, std::vector<double>{0.0}) == doctest::Approx(3.0 * std::exp(-2.0)).epsilon(1e-15));
}

TEST_CASE("total entropy is the cell sum of the density") {
  ModelSpec s = scalar_spec(0.5, 2.0);
  Grid g = Grid::line(8, 2.0);
  Field u = const_field(g, {1.7});
  CHECK(total_entropy(s, u) ==
        doctest::Approx(2.0 * entropy_density(s, std::vector<double>{1.7})).epsilon(1e-14));
}

TEST_CASE("relative entropy of constants") {
  ModelSpec s = scalar_spec(0.0, 1.0);
  Grid g = Grid::line(2, 1.0);
  Field u = const_field(g, {2.0}), v = const_field(g, {1.0});
  CHECK(relative_entropy(s, u, v) == doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
  // Bregman gap vanishes only on the diagonal
  CHECK(relative_entropy(s, v, v) == 0.0);
  CHECK(relative_entropy(s, u, u) == 0.0);
}

TEST_CASE("relative entropy is nonnegative and detects mismatch") {
  ModelSpec s = scalar_spec(1.0, 1.0);
  Grid g = Grid::line(16, 1.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.1, 5.0);
  Field u(1, g), v(1, g);
  for (int c = 0; c < g.ncells(); ++c) {
    u.at(0, c) = unif(rng);
    v.at(0, c) = unif(rng);
  }
  CHECK(relative_entropy(s, u, v) >= 0.0);
  Field w = const_field(g, {1.0});
  Field bad = const_field(g, {0.0});
  CHECK_THROWS_AS(relative_entropy(s, w, bad), InputError);  // v must stay positive
}

TEST_CASE("cutoff relative entropy reduces to the plain one under the plateau") {
  ModelSpec s = scalar_spec(0.0, 1.0);
  Grid g = Grid::line(2, 1.0);
  Field u = const_field(g, {2.0}), v = const_field(g, {1.0});
  CutoffSpec cut;
  cut.K = 3;
  cut.L = 2.0;  // sum u = 2 <= L keeps phi = 1
  cut.M = 50.0;
  CHECK(cutoff_relative_entropy(s, cut, u, v) ==
        doctest::Approx(2.0 * std::log(2.0) - 1.0).epsilon(1e-14));
  // transition band: the cross term carries the partial weight
  CutoffSpec tight = cut;
  tight.L = 0.01;
  tight.M = 0.02;
  Field v3 = const_field(g, {3.0});
  const double phi = cutoff_value(std::vector<double>{2.0}, tight.K, tight.L, tight.profile);
  CHECK(phi > 0.0);
  CHECK(phi < 1.0);
  const double expect = 2.0 * std::log(2.0) - 2.0 - phi * 2.0 * std::log(3.0) + 3.0;
  CHECK(cutoff_relative_entropy(s, tight, u, v3) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("double cutoff at zero density") {
  // u = 0, v = 1, lambda = 0, pi = 1, eps = 0.25, thresholds far out:
  // integrand = (0.25)(log 0.25 - 1) + 1 - 0.25 log 1 + 1
  ModelSpec s = scalar_spec(0.0, 1.0);
  Grid g = Grid::line(2, 1.0);
  Field u = const_field(g, {0.0}), v = const_field(g, {1.0});
  CutoffSpec cut;
  cut.K = 3;
  cut.L = 100.0;
  cut.M = 1000.0;
  cut.eps = 0.25;
  const double expect = 0.25 * (std::log(0.25) - 1.0) + 1.0 + 1.0;
  CHECK(double_cutoff_relative_entropy(s, cut, u, v) == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("double cutoff approaches the cutoff entropy plus the shift mass") {
  ModelSpec s;
  s.n = 2;
  s.d = 1;
  s.a0 = {1.0, 1.0};
  s.a = {1.0, 0.5, 0.5, 1.0};
  s.pi = {1.0, 2.0};
  s.lambda = {0.3, 1.1};
  s.b = {0.0, 0.0};
  Grid g = Grid::line(8, 2.0);
  Field u(2, g), v(2, g);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int i = 0; i < 2; ++i)
    for (int c = 0; c < g.ncells(); ++c) {
      u.at(i, c) = unif(rng);
      v.at(i, c) = unif(rng);
    }
  CutoffSpec cut;
  cut.K = 4;
  cut.L = 3.0;
  cut.M = 1e12;  // far outer threshold: phi_K^M = 1 on the data
  cut.eps = 1e-9;
  double shift_mass = 0;
  for (int i = 0; i < 2; ++i)
    shift_mass += s.pi[i] * std::exp(-s.lambda[i]) * g.domain_measure();
  const double lim = cutoff_relative_entropy(s, cut, u, v) + shift_mass;
  CHECK(double_cutoff_relative_entropy(s, cut, u, v) ==
        doctest::Approx(lim).epsilon(1e-6));
}

// ===== elementary log gap =====

TEST_CASE("log gap anchor values") {
  LogGap g1 = log_gap_bounds(1.0);
  CHECK(g1.lower == 0.0);
  CHECK(g1.value == 0.0);
  CHECK(g1.upper == 0.0);
  LogGap g2 = log_gap_bounds(2.0);
  CHECK(g2.lower == -1.5);
  CHECK(g2.value == doctest::Approx(std::log(2.0) - 1.0).epsilon(1e-16));
  CHECK(g2.upper == 0.0);
  LogGap gh = log_gap_bounds(0.5);
  CHECK(gh.lower == -0.75);
  CHECK(gh.value == doctest::Approx(std::log(0.5) + 0.5).epsilon(1e-15));
}

TEST_CASE("log gap ordering holds over sixteen decades") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> logs(std::log(1e-8), std::log(1e8));
  for (int k = 0; k < 100000; ++k) {
    const double s = std::exp(logs(rng));
    LogGap g = log_gap_bounds(s);
    CHECK(g.lower <= g.value);
    CHECK(g.value <= g.upper);
    CHECK(g.upper == 0.0);
  }
  CHECK_THROWS_AS(log_gap_bounds(0.0), InputError);
  CHECK_THROWS_AS(log_gap_bounds(-2.0), InputError);
}

// ===== quadrature cross-check =====

TEST_CASE("entropy cell sums agree with dense quadrature on smooth fields") {
  ModelSpec s = scalar_spec(1.0, 1.0);
  auto value = [](const std::array<double, 2>& x) { return 1.5 + std::sin(3.0 * x[0]); };
  auto hpt = [&](const std::array<double, 2>& x) {
    const double u = value(x);
    return u * (std::log(u) - 1.0 + 1.0) + std::exp(-1.0);
  };
  auto err = [&](int N) {
    Grid g = Grid::line(N, 1.0);
    Field u(1, g);
    for (int c = 0; c < g.ncells(); ++c) u.at(0, c) = value(g.center(c));
    const double ref = oracle::dense_integral(hpt, g, 32);
    return std::abs(total_entropy(s, u) - ref);
  };
  const double e1 = err(16), e2 = err(32);
  CHECK(e1 / e2 > 2.5);  // second-order midpoint behavior
  CHECK(e1 / e2 < 6.0);
}
