#include "doctest.h"

#include <cmath>
#include <vector>

#include "oracle.hpp"
#include "skt/entropy.hpp"
#include "skt/errors.hpp"
#include "skt/solver.hpp"

using namespace skt;

namespace {

// Two species with exact detailed balance (pi_1 a_12 == pi_2 a_21 in doubles).
ModelSpec two_species_spec() {
  ModelSpec s;
  s.n = 2;
  s.d = 1;
  s.a0 = {0.6, 0.9};
  s.a = {0.5, 0.3, 0.15, 0.4};
  s.pi = {1.0, 2.0};
  s.lambda = {0.1, 0.4};
  s.b = {0.0, 0.0};
  return s;
}

Field const_field(const Grid& g, std::vector<double> vals) {
  Field f(static_cast<int>(vals.size()), g);
  for (int i = 0; i < f.n; ++i)
    for (int c = 0; c < g.ncells(); ++c) f.at(i, c) = vals[i];
  return f;
}

Field wavy_field(const Grid& g, std::vector<double> base, std::vector<double> amp) {
  Field f(static_cast<int>(base.size()), g);
  for (int i = 0; i < f.n; ++i)
    for (int c = 0; c < g.ncells(); ++c) {
      const auto x = g.center(c);
      f.at(i, c) = base[i] + amp[i] * std::cos((i + 1.0) * 3.0 * x[0] + 0.7 * x[1]);
    }
  return f;
}

double l2_error(const Field& a, const Field& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    s += d * d;
  }
  return std::sqrt(s * a.grid.cell_measure());
}

double linf(const Field& a, const Field& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.data.size(); ++k)
    m = std::max(m, std::abs(a.data[k] - b.data[k]));
  return m;
}

}  // namespace

// ===== residual basics =====

TEST_CASE("residual vanishes exactly at a spatially constant equilibrium") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(12, 1.0);
  Field u = const_field(g, {1.3, 0.8});
  Field r;
  fv_residual(s, u, u, 0.0, 0.05, nullptr, r);
  for (double x : r.data) CHECK(x == 0.0);
}

TEST_CASE("interior fluxes telescope to zero mass defect") {
  ModelSpec s = two_species_spec();
  s.b = {0.4, -0.25};
  Grid g = Grid::line(16, 1.0);
  Field u = wavy_field(g, {1.0, 1.5}, {0.4, -0.3});
  Field r;
  fv_residual(s, u, u, 0.0, 0.02, nullptr, r);
  for (int i = 0; i < s.n; ++i) {
    double sum = 0, scale = 0;
    for (int c = 0; c < g.ncells(); ++c) {
      sum += r.at(i, c);
      scale = std::max(scale, std::abs(r.at(i, c)));
    }
    CHECK(std::abs(sum) <= 1e-11 * (1.0 + scale));
  }
}

TEST_CASE("residual input validation") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(8, 1.0);
  Field u = const_field(g, {1.0, 1.0});
  Field r;
  CHECK_THROWS_AS(fv_residual(s, u, u, 0.0, 0.0, nullptr, r), InputError);  // dt
  Field other = const_field(Grid::line(9, 1.0), {1.0, 1.0});
  CHECK_THROWS_AS(fv_residual(s, u, other, 0.0, 0.1, nullptr, r), InputError);
  Field z = const_field(g, {1.0, 0.0});
  CHECK_THROWS_AS(fv_residual(s, z, u, 0.0, 0.1, nullptr, r), InputError);  // positivity
}

// ===== implicit stepping =====

TEST_CASE("constant states are bit-identical fixed points") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(20, 2.0);
  Field u0 = const_field(g, {1.7, 0.45});
  SimOptions opt;
  opt.T = 0.1;
  opt.dt = 0.02;
  SimOutcome out = simulate(s, u0, opt);
  REQUIRE(out.completed);
  REQUIRE(out.traj.states.size() == 6);
  for (const auto& st : out.traj.states) {
    REQUIRE(st.data.size() == u0.data.size());
    for (std::size_t k = 0; k < st.data.size(); ++k) CHECK(st.data[k] == u0.data[k]);
  }
  for (const auto& m : out.traj.steps) {
    CHECK(m.newton_iters == 0);
    CHECK(m.dt_halvings == 0);
  }
}

TEST_CASE("mass is conserved to near round-off without reactions") {
  ModelSpec s = two_species_spec();
  s.b = {0.3, -0.2};  // drift moves mass around but never through the walls
  Grid g = Grid::line(32, 1.0);
  Field u0 = wavy_field(g, {1.2, 0.9}, {0.5, -0.35});
  SimOptions opt;
  opt.T = 0.2;
  opt.dt = 0.01;
  SimOutcome out = simulate(s, u0, opt);
  REQUIRE(out.completed);
  const auto m0 = u0.masses();
  for (std::size_t k = 0; k < out.traj.states.size(); ++k) {
    const auto mk = out.traj.states[k].masses();
    for (int i = 0; i < s.n; ++i)
      CHECK(std::abs(mk[i] - m0[i]) <=
            1e-12 * (1.0 + std::abs(m0[i])) * static_cast<double>(k + 1));
    CHECK(out.traj.states[k].min_value() > 0.0);
  }
}

TEST_CASE("two dimensional stepping conserves mass and stays positive") {
  ModelSpec s = two_species_spec();
  s.d = 2;
  s.b = {0.2, -0.1, 0.05, 0.15};
  Grid g = Grid::rect(6, 5, 1.0, 1.5);
  Field u0 = wavy_field(g, {1.0, 1.4}, {0.3, 0.25});
  SimOptions opt;
  opt.T = 0.05;
  opt.dt = 0.01;
  SimOutcome out = simulate(s, u0, opt);
  REQUIRE(out.completed);
  const auto m0 = u0.masses();
  const auto mT = out.traj.states.back().masses();
  for (int i = 0; i < s.n; ++i)
    CHECK(std::abs(mT[i] - m0[i]) <= 1e-11 * (1.0 + std::abs(m0[i])));
  CHECK(out.traj.states.back().min_value() > 0.0);
}

TEST_CASE("total entropy decays along drift-free entropic dynamics") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(24, 1.0);
  Field u0 = wavy_field(g, {1.0, 1.3}, {0.6, -0.5});
  SimOptions opt;
  opt.T = 0.3;
  opt.dt = 0.02;
  SimOutcome out = simulate(s, u0, opt);
  REQUIRE(out.completed);
  double prev = total_entropy(s, out.traj.states.front());
  bool strictly_decreased = false;
  for (std::size_t k = 1; k < out.traj.states.size(); ++k) {
    const double h = total_entropy(s, out.traj.states[k]);
    CHECK(h <= prev + 10.0 * opt.newton.tol * (1.0 + std::abs(prev)));
    if (h < prev) strictly_decreased = true;
    prev = h;
  }
  CHECK(strictly_decreased);
}

TEST_CASE("identical inputs reproduce bit-identical trajectories") {
  ModelSpec s = two_species_spec();
  s.b = {0.15, -0.1};
  Grid g = Grid::line(18, 1.0);
  Field u0 = wavy_field(g, {1.1, 0.8}, {0.4, 0.3});
  SimOptions opt;
  opt.T = 0.12;
  opt.dt = 0.015;
  SimOutcome a = simulate(s, u0, opt);
  SimOutcome b = simulate(s, u0, opt);
  REQUIRE(a.completed);
  REQUIRE(b.completed);
  REQUIRE(a.traj.times.size() == b.traj.times.size());
  for (std::size_t k = 0; k < a.traj.times.size(); ++k) {
    CHECK(a.traj.times[k] == b.traj.times[k]);
    for (std::size_t idx = 0; idx < a.traj.states[k].data.size(); ++idx)
      CHECK(a.traj.states[k].data[idx] == b.traj.states[k].data[idx]);
  }
}

TEST_CASE("explosive stiffness is reported, not crashed on") {
  ModelSpec s = two_species_spec();
  s.reaction.kind = ReactionKind::logistic_competition;
  s.reaction.beta = {1e8, 1e8};
  s.reaction.gamma = {0.0, 0.0, 0.0, 0.0};
  Grid g = Grid::line(8, 1.0);
  Field u0 = const_field(g, {1.0, 1.0});
  SimOptions opt;
  opt.T = 1.0;
  opt.dt = 1.0;
  SimOutcome out = simulate(s, u0, opt);
  CHECK(!out.completed);
  CHECK(!out.failure.empty());
  CHECK(out.traj.states.size() >= 1);
}

TEST_CASE("step input validation") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(8, 1.0);
  Field zero = const_field(g, {1.0, 0.0});
  CHECK_THROWS_AS(step_implicit(s, zero, 0.0, 0.1), InputError);
  Field u = const_field(g, {1.0, 1.0});
  CHECK_THROWS_AS(step_implicit(s, u, 0.0, -0.1), InputError);
}

// ===== manufactured reference =====

TEST_CASE("manufactured time derivative and gradient match finite differences") {
  ModelSpec s = two_species_spec();
  s.d = 2;
  s.b = {0.1, -0.2, 0.3, 0.05};
  Grid g = Grid::rect(4, 4, 1.0, 1.5);
  auto ms = manufactured_strong(s, g, std::vector<double>{2.0, 1.5},
                                std::vector<double>{0.4, -0.3});
  const std::array<double, 2> x{0.37, 0.81};
  const double t = 0.45, h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    const double fd_t = (ms.value(i, x, t + h) - ms.value(i, x, t - h)) / (2.0 * h);
    CHECK(ms.dt_value(i, x, t) == doctest::Approx(fd_t).epsilon(1e-8));
    const auto grad = ms.gradient(i, x, t);
    for (int a = 0; a < 2; ++a) {
      auto xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      const double fd_x = (ms.value(i, xp, t) - ms.value(i, xm, t)) / (2.0 * h);
      CHECK(grad[a] == doctest::Approx(fd_x).epsilon(1e-8));
    }
  }
}

TEST_CASE("manufactured forcing equals the defect of the closed form") {
  // g_i = dt v_i - div(sum_j A_ij(v) grad v_j) + b_i . grad v_i - f_i(v),
  // with the divergence evaluated here by central differences of the flux.
  ModelSpec s = two_species_spec();
  s.b = {0.3, -0.15};
  s.reaction.kind = ReactionKind::linear_relaxation;
  Grid g = Grid::line(16, 1.0);
  auto ms = manufactured_strong(s, g, std::vector<double>{2.0, 1.6},
                                std::vector<double>{0.5, -0.4});
  const double t = 0.2, h = 1e-5;
  auto diff_flux = [&](int i, double xpos) {
    std::array<double, 2> x{xpos, 0.0};
    std::vector<double> v(2), A(4);
    for (int j = 0; j < 2; ++j) v[j] = ms.value(j, x, t);
    diffusion_matrix(s, v, A);
    double flux = 0;
    for (int j = 0; j < 2; ++j) flux += A[i * 2 + j] * ms.gradient(j, x, t)[0];
    return flux;
  };
  for (double xpos : {0.23, 0.57, 0.86}) {
    std::array<double, 2> x{xpos, 0.0};
    std::vector<double> v(2), f(2);
    for (int j = 0; j < 2; ++j) v[j] = ms.value(j, x, t);
    s.reaction_at(v, f);
    for (int i = 0; i < 2; ++i) {
      const double divdiff = (diff_flux(i, xpos + h) - diff_flux(i, xpos - h)) / (2.0 * h);
      const double expect =
          ms.dt_value(i, x, t) - divdiff + s.b_at(i, 0) * ms.gradient(i, x, t)[0] - f[i];
      CHECK(ms.forcing(i, x, t) == doctest::Approx(expect).epsilon(1e-6));
    }
  }
}

TEST_CASE("manufactured construction rejects sign-indefinite floors") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(8, 1.0);
  CHECK_THROWS_AS(manufactured_strong(s, g, std::vector<double>{1.0, 0.2},
                                      std::vector<double>{0.3, 0.5}),
                  InputError);
  CHECK_THROWS_AS(
      manufactured_strong(s, g, std::vector<double>{1.0}, std::vector<double>{0.3}),
      InputError);
}

TEST_CASE("one implicit step reproduces the closed form at second order in space") {
  ModelSpec s = two_species_spec();  // b = 0: walls must stay flux-free
  const double dt = 0.01, t0 = 0.25, t1 = t0 + dt;
  std::vector<double> m{2.0, 1.5}, amp{0.4, -0.3};
  auto error_at = [&](int N) {
    Grid g = Grid::line(N, 1.0);
    auto ms = manufactured_strong(s, g, m, amp);
    Field uprev(2, g);
    for (int c = 0; c < g.ncells(); ++c) {
      const auto x = g.center(c);
      for (int i = 0; i < 2; ++i)
        uprev.at(i, c) = ms.value(i, x, t1) - dt * ms.dt_value(i, x, t1);
    }
    Forcing fn = ms.forcing_fn();
    StepResult st = step_implicit(s, uprev, t0, dt, NewtonOptions{}, &fn);
    REQUIRE(st.meta.dt_halvings == 0);
    return l2_error(st.u, ms.sample(t1));
  };
  const double e32 = error_at(32), e64 = error_at(64), e128 = error_at(128);
  const double p1 = std::log2(e32 / e64), p2 = std::log2(e64 / e128);
  CHECK(p1 > 1.8);
  CHECK(p1 < 2.3);
  CHECK(p2 > 1.8);
  CHECK(p2 < 2.3);
}

TEST_CASE("time stepping is first order under Richardson halving") {
  ModelSpec s = two_species_spec();
  s.b = {0.1, -0.05};
  Grid g = Grid::line(24, 1.0);
  Field u0 = wavy_field(g, {1.2, 0.9}, {0.45, -0.3});
  auto final_state = [&](double dt) {
    SimOptions opt;
    opt.T = 0.16;
    opt.dt = dt;
    SimOutcome out = simulate(s, u0, opt);
    REQUIRE(out.completed);
    return out.traj.states.back();
  };
  const Field ua = final_state(0.04), ub = final_state(0.02), uc = final_state(0.01);
  const double d1 = linf(ua, ub), d2 = linf(ub, uc);
  const double p = std::log2(d1 / d2);
  CHECK(p > 0.9);
  CHECK(p < 1.4);
}

// ===== nested-grid transfer =====

TEST_CASE("prolongation then restriction is the identity") {
  Grid coarse = Grid::line(8, 2.0);
  Grid fine = Grid::line(16, 2.0);
  Field f = wavy_field(coarse, {1.0, 2.0}, {0.3, -0.6});
  Field up = transfer(f, fine, TransferMode::prolongation);
  Field back = transfer(up, coarse, TransferMode::restriction);
  for (std::size_t k = 0; k < f.data.size(); ++k) CHECK(back.data[k] == f.data[k]);
}

TEST_CASE("transfer preserves mass in both directions") {
  Grid coarse = Grid::rect(4, 6, 1.0, 1.5);
  Grid fine = Grid::rect(8, 12, 1.0, 1.5);
  Field f = wavy_field(fine, {1.0, 1.8}, {0.4, 0.2});
  Field down = transfer(f, coarse, TransferMode::restriction);
  const auto mf = f.masses(), mc = down.masses();
  for (int i = 0; i < 2; ++i) CHECK(mc[i] == doctest::Approx(mf[i]).epsilon(1e-13));
  Field c = wavy_field(coarse, {0.9, 1.1}, {0.2, -0.1});
  Field up = transfer(c, fine, TransferMode::prolongation);
  const auto ma = c.masses(), mb = up.masses();
  for (int i = 0; i < 2; ++i) CHECK(mb[i] == doctest::Approx(ma[i]).epsilon(1e-13));
}

TEST_CASE("transfer rejects grids that do not nest") {
  Field f(1, Grid::line(9, 1.0));
  CHECK_THROWS_AS(transfer(f, Grid::line(4, 1.0), TransferMode::restriction), InputError);
  CHECK_THROWS_AS(transfer(f, Grid::line(18, 2.0), TransferMode::prolongation), InputError);
}

// ===== strong proxy =====

TEST_CASE("manufactured proxy evaluates the closed form exactly") {
  ModelSpec s = two_species_spec();
  Grid g = Grid::line(10, 1.0);
  auto ms = manufactured_strong(s, g, std::vector<double>{2.0, 1.5},
                                std::vector<double>{0.4, -0.3});
  StrongProxy p = StrongProxy::from_manufactured(ms);
  CHECK(p.bound_lo == doctest::Approx(1.2).epsilon(1e-15));
  CHECK(p.bound_hi == doctest::Approx(2.4).epsilon(1e-15));
  Field direct = ms.sample(0.3);
  Field via = p.field_at(g, 2, 0.3);
  for (std::size_t k = 0; k < direct.data.size(); ++k) CHECK(via.data[k] == direct.data[k]);
}

TEST_CASE("fine-run proxy restricts and interpolates in time") {
  Grid fine = Grid::line(16, 1.0);
  Grid coarse = Grid::line(8, 1.0);
  auto snapshot = [&](double t) {
    Field f(2, fine);
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < fine.ncells(); ++c) {
        const auto x = fine.center(c);
        f.at(i, c) = 1.0 + i + t * (0.5 + std::sin(2.0 * x[0] + i));
      }
    return f;
  };
  Trajectory traj;
  for (double t : {0.0, 0.5, 1.0}) {
    traj.times.push_back(t);
    traj.states.push_back(snapshot(t));
  }
  StrongProxy p = StrongProxy::from_fine_run(2, traj);
  // interior query: data linear in t, so interpolation is exact up to round-off
  Field expect = transfer(snapshot(0.25), coarse, TransferMode::restriction);
  Field got = p.field_at(coarse, 2, 0.25);
  for (std::size_t k = 0; k < expect.data.size(); ++k)
    CHECK(got.data[k] == doctest::Approx(expect.data[k]).epsilon(1e-14));
  // end clamping
  Field lo = p.field_at(coarse, 2, -3.0);
  Field lo_expect = transfer(traj.states.front(), coarse, TransferMode::restriction);
  for (std::size_t k = 0; k < lo.data.size(); ++k) CHECK(lo.data[k] == lo_expect.data[k]);
  Field hi = p.field_at(coarse, 2, 99.0);
  Field hi_expect = transfer(traj.states.back(), coarse, TransferMode::restriction);
  for (std::size_t k = 0; k < hi.data.size(); ++k) CHECK(hi.data[k] == hi_expect.data[k]);
  CHECK(p.bound_lo > 0.0);
  CHECK(p.bound_hi >= p.bound_lo);
  CHECK_THROWS_AS(StrongProxy::from_fine_run(2, Trajectory{}), InputError);
}
