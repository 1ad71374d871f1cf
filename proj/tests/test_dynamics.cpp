#include "liouvillian_oracle.hpp"
#include "support.hpp"

#include "mqed/dynamics.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens_homogeneous.hpp"

#include <doctest.h>

using namespace mqed;
using namespace testing;

namespace {

using Mat = Eigen::MatrixXcd;

std::vector<double> linspace(double t1, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i)
    t[i] = t1 * i / (count - 1);
  return t;
}

double excitation(const Trajectory &tr, std::size_t k) {
  double s = 0;
  for (double z : tr.sigma_z[k])
    s += 0.5 * (z + 1.0);
  return s;
}

EmitterEnsembleModel model(int n, double wbar) {
  EmitterEnsembleModel m;
  m.omega_bar = wbar;
  m.delta = Eigen::VectorXd::Zero(n);
  m.xi = Mat::Zero(n, n);
  m.gamma = Mat::Zero(n, n);
  return m;
}

} // namespace

TEST_CASE("single emitter closed forms") {
  const double g = 3e7, d = 2e6, w0 = 1e15;
  const QubitState s0{0.2, cplx(0.3, -0.3)};
  const auto t = linspace(1e-7, 11);
  const auto tr = evolve_single(g, d, w0, s0, t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(rel(tr.sigma_z[k][0], -1.0 + 1.2 * std::exp(-g * t[k])) < 1e-13);
    const cplx expect = s0.sigma * std::exp(cplx(-g / 2, -(w0 + d)) * t[k]);
    CHECK(std::abs(tr.sigma[k][0] - expect) < 1e-13);
  }
  SUBCASE("no decay keeps |sigma| and sigma_z") {
    const auto u = evolve_single(0.0, d, w0, s0, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(std::abs(std::abs(u.sigma[k][0]) - std::sqrt(0.18)) < 1e-14);
      CHECK(std::abs(u.sigma_z[k][0] - 0.2) < 1e-15);
    }
  }
  SUBCASE("ground state stays put") {
    const auto u = evolve_single(g, d, w0, {-1.0, 0.0}, t);
    for (std::size_t k = 0; k < t.size(); ++k) {
      CHECK(u.sigma_z[k][0] == -1.0);
      CHECK(u.sigma[k][0] == cplx(0.0));
    }
  }
  CHECK_THROWS_AS(evolve_single(g, d, w0, {0.0, 0.8}, t), InputError);
  CHECK_THROWS_AS(evolve_single(-1.0, d, w0, s0, t), InputError);
  CHECK_THROWS_AS(evolve_single(g, d, w0, s0, {1.0, 0.5}), InputError);
}

TEST_CASE("one-emitter ensemble reproduces the single-emitter solution") {
  const double g = 3e7, d = 2e6, wbar = 1e15;
  auto m = model(1, wbar);
  m.delta(0) = d;
  m.gamma(0, 0) = g;
  const QubitState s0{0.2, cplx(0.3, -0.3)};
  const auto t = linspace(1e-7, 21);
  const auto a = evolve_ensemble(m, product_state({s0}), t);
  const auto b = evolve_single(g, d, wbar, s0, t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(std::abs(a.sigma_z[k][0] - b.sigma_z[k][0]) < 1e-9);
    // lab-frame phase wbar*t ~ 1e8 rad carries its own rounding
    const double phase_noise = 4 * wbar * t[k] * 2.2e-16 * std::abs(b.sigma[k][0]);
    CHECK(std::abs(a.sigma[k][0] - b.sigma[k][0]) < 1e-9 + phase_noise);
    CHECK(std::abs(std::abs(a.sigma[k][0]) - std::abs(b.sigma[k][0])) < 1e-9);
  }
}

TEST_CASE("colocated pair: superradiant and subradiant states") {
  const double g = 5e7;
  auto m = model(2, 2e15);
  m.gamma.setConstant(g);
  const auto t = linspace(8e-8, 17);
  const auto sup = evolve_ensemble(m, single_excitation_state({1.0, 1.0}), t);
  const auto sub = evolve_ensemble(m, single_excitation_state({1.0, -1.0}), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(std::abs(excitation(sup, k) - std::exp(-2 * g * t[k])) < 1e-9);
    CHECK(std::abs(excitation(sub, k) - 1.0) < 1e-9);
  }
}

TEST_CASE("exchange coupling swaps the excitation at 2 xi") {
  const double xi = 4e7;
  auto m = model(2, 2e15);
  m.xi(0, 1) = m.xi(1, 0) = xi;
  const auto t = linspace(1e-7, 41);
  const auto tr = evolve_ensemble(m, product_state({{1.0, 0.0}, {-1.0, 0.0}}), t);
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double p0 = 0.5 * (tr.sigma_z[k][0] + 1.0);
    CHECK(std::abs(p0 - std::pow(std::cos(xi * t[k]), 2)) < 1e-9);
    CHECK(std::abs(excitation(tr, k) - 1.0) < 1e-9);
  }
}

TEST_CASE("generic models agree with the dense Liouvillian oracle") {
  Rng rng(5);
  for (int n : {2, 3}) {
    for (int trial = 0; trial < 3; ++trial) {
      auto m = model(n, 1.5e15);
      Mat A = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        m.delta(i) = 1e7 * rng.normal();
        for (int j = 0; j < n; ++j)
          A(i, j) = 3e3 * rng.cnormal();
      }
      m.gamma = A * A.adjoint(); // PSD, ~1e7
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) {
          m.xi(i, j) = 2e7 * rng.cnormal();
          m.xi(j, i) = std::conj(m.xi(i, j));
        }
      std::vector<QubitState> st;
      for (int a = 0; a < n; ++a) {
        const double z = rng.uniform(-1, 1), r = 0.5 * std::sqrt(1 - z * z);
        st.push_back({z, std::polar(r, rng.uniform(0, 6.28))});
      }
      const Mat rho0 = product_state(st);
      const auto t = linspace(2e-7, 9);
      EvolveOptions opt;
      opt.keep_density_matrices = true;
      const auto tr = evolve_ensemble(m, rho0, t, opt);
      const testing::LiouvillianOracle o(m);
      for (std::size_t k = 0; k < t.size(); ++k)
        CHECK((tr.rho[k] - o.at(rho0, t[k])).cwiseAbs().maxCoeff() < 1e-9);
      CHECK(tr.max_trace_error < 1e-12);
      CHECK(tr.min_eigenvalue > -1e-12);
    }
  }
}

TEST_CASE("excitation never increases without a drive") {
  Rng rng(9);
  const int n = 4;
  auto m = model(n, 2e15);
  Mat A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) = 3e3 * rng.cnormal();
  m.gamma = A * A.adjoint();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      m.xi(i, j) = 1e7 * rng.cnormal();
      m.xi(j, i) = std::conj(m.xi(i, j));
    }
  std::vector<QubitState> all_up(n, QubitState{1.0, 0.0});
  const auto t = linspace(3e-7, 61);
  const auto tr = evolve_ensemble(m, product_state(all_up), t);
  for (std::size_t k = 1; k < t.size(); ++k)
    CHECK(excitation(tr, k) <= excitation(tr, k - 1) + 1e-12);
  CHECK(tr.min_eigenvalue > -1e-12);
}

TEST_CASE("halving the tolerance changes the answer by less than the estimate") {
  auto m = model(2, 2e15);
  m.gamma << 4e7, 3e7, 3e7, 4e7;
  m.xi(0, 1) = cplx(1e7, 2e6);
  m.xi(1, 0) = std::conj(m.xi(0, 1));
  const auto t = linspace(1e-7, 11);
  const Mat rho0 = product_state({{1.0, 0.0}, {-1.0, 0.0}});
  EvolveOptions a, b;
  a.rel_tol = 1e-8;
  b.rel_tol = 0.5e-8;
  const auto ta = evolve_ensemble(m, rho0, t, a), tb = evolve_ensemble(m, rho0, t, b);
  double diff = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    for (int e = 0; e < 2; ++e)
      diff = std::max(diff, std::abs(ta.sigma_z[k][e] - tb.sigma_z[k][e]));
  CHECK(diff <= std::max(ta.error_estimate, 1e-14));
}

TEST_CASE("model validation") {
  auto m = model(2, 2e15);
  m.gamma << 1e7, 2e7, 2e7, 1e7; // indefinite
  CHECK_THROWS_AS(evolve_ensemble(m, product_state({{1.0, 0.0}, {-1.0, 0.0}}), {0.0, 1e-9}),
                  InputError);
  auto h = model(2, 2e15);
  h.xi(0, 1) = 1e7;
  CHECK_THROWS_AS(evolve_ensemble(h, product_state({{1.0, 0.0}, {-1.0, 0.0}}), {0.0, 1e-9}),
                  InputError);
  CHECK_THROWS_AS(single_excitation_state({0.0, 0.0}), InputError);
}

TEST_CASE("ensemble assembly in free space") {
  const double w = kOptical;
  const auto a = dipole_emitter({0, 0, constants::dipole_au}, w, {0, 0, 0});
  const auto b = dipole_emitter({0, 0, 2 * constants::dipole_au}, w, {3e-8, 0, 0});
  HomogeneousEnvironment env(1.0);
  CouplingOptions opt;
  opt.method = IntegralMethod::OnShell;
  const auto m = build_ensemble({a, b}, env, opt);
  const auto c = coincident_im_jet(w, Medium::constant(1.0));
  CHECK(rel(m.gamma(0, 0).real(), emission_rate(a, c).gamma_total) < 1e-12);
  CHECK(rel(m.gamma(1, 1).real(), emission_rate(b, c).gamma_total) < 1e-12);
  const auto r = couple(a, b, env, opt);
  CHECK(rel(m.xi(0, 1), r.xi) < 1e-12);
  CHECK(rel(m.gamma(0, 1), r.gamma_cross) < 1e-12);
  CHECK(m.delta.cwiseAbs().maxCoeff() == 0.0);
  CHECK((m.xi - m.xi.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * m.xi.cwiseAbs().maxCoeff());

  SUBCASE("single emitter") {
    const auto s = build_ensemble({a}, env, opt);
    CHECK(s.size() == 1);
    CHECK(rel(s.gamma(0, 0).real(), emission_rate(a, c).gamma_total) < 1e-12);
  }
  SUBCASE("inert partner decouples") {
    MultipoleEmitter z;
    z.omega0 = w;
    z.position = {2e-8, 0, 0};
    const auto s = build_ensemble({a, z}, env, opt);
    CHECK(s.gamma(1, 1) == cplx(0.0));
    CHECK(s.gamma(0, 1) == cplx(0.0));
    CHECK(s.xi(0, 1) == cplx(0.0));
  }
  SUBCASE("frequency integrals are refused") {
    CouplingOptions pv;
    pv.method = IntegralMethod::PV;
    CHECK_THROWS_AS(build_ensemble({a, b}, env, pv), InputError);
  }
}
