#include "support.hpp"

#include "mqed/errors.hpp"
#include "mqed/greens_homogeneous.hpp"
#include "mqed/quadrature.hpp"
#include "mqed/rates.hpp"
#include "mqed/spectral_model.hpp"

#include <doctest.h>

using namespace mqed;
using namespace testing;

namespace {

const double kPi = constants::pi;

LorentzianMode mode(double wr, double eta, double a, Vec3 amp, double grad) {
  LorentzianMode m;
  m.omega_r = wr;
  m.eta = eta;
  m.strength = a;
  m.amplitude = amp;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m.gradient(i, j) = grad * (1.0 + i - 0.7 * j + (i == j ? 2.0 : 0.0));
  return m;
}

// Structured stand-in environment with all derivative orders present.
ModeExpansionEnvironment two_modes() {
  return ModeExpansionEnvironment({mode(2.4e15, 5e13, 3e38, {1, 0.3, -0.2}, 2e7),
                                   mode(3.1e15, 1.2e14, 1e38, {-0.1, 0.8, 0.5}, -1e7)});
}

double ww_rate(double w, double d2, double n = 1.0) {
  return n * w * w * w * d2 /
         (3 * kPi * constants::hbar * constants::epsilon0 * std::pow(constants::c, 3));
}

} // namespace

TEST_CASE("Weisskopf-Wigner rate from the general machinery") {
  const double w = kOptical;
  const auto e = dipole_emitter({0, 0, 2.0 * constants::dipole_au}, w);
  const RateReport r = emission_rate(e, coincident_im_jet(w, Medium::constant(1.0)));
  CHECK(rel(r.gamma_total, ww_rate(w, std::norm(e.d[2]))) < 1e-12);
  CHECK(r.imag_residual <= 1e-15 * r.gamma_total);
}

TEST_CASE("optical dipole rate against literal CODATA values") {
  // CODATA 2018, typed out independently of the library constants.
  const double e_ch = 1.602176634e-19, a0 = 5.29177210903e-11, hbar = 1.054571817e-34,
               eps0 = 8.8541878128e-12, c = 299792458.0, pi = 3.14159265358979323846;
  const double w = 2 * pi * 384e12, d = e_ch * a0;
  const double oracle = w * w * w * d * d / (3 * pi * hbar * eps0 * c * c * c);
  const auto em = dipole_emitter({0, 0, d}, w);
  const RateReport r = emission_rate(em, coincident_im_jet(w, Medium::constant(1.0)));
  CHECK(rel(r.gamma_total, oracle) < 1e-10);
}

TEST_CASE("inert emitter has zero rates") {
  MultipoleEmitter e;
  e.omega0 = kOptical;
  CHECK(emission_rate(e, coincident_im_jet(kOptical, Medium::constant(1.0))).gamma_total == 0.0);
  const auto fs = free_space_rates(e, 1.0, kOptical);
  CHECK(fs.total() == 0.0);
}

TEST_CASE("free-space closed forms") {
  Rng rng(6);
  const auto e = random_emitter(rng, kOptical);
  const auto a = free_space_rates(e, 1.0, kOptical), b = free_space_rates(e, 2.0, kOptical);
  CHECK(rel(b.ed / a.ed, 2.0) < 1e-12);
  CHECK(rel(b.md / a.md, 8.0) < 1e-12);
  CHECK(rel(b.eq / a.eq, 8.0) < 1e-12);
  const auto d_only = free_space_rates(e.restricted(ChannelSelector::only(Channel::ED)), 1.5,
                                       kOptical);
  CHECK(d_only.ed > 0);
  CHECK(d_only.md == 0.0);
  CHECK(d_only.eq == 0.0);
  CHECK_THROWS_AS(free_space_rates(e, 0.5, kOptical), InputError);
  CHECK_THROWS_AS(free_space_rates(dipole_emitter({0, 0, 1e200}, kOptical), 1.0, kOptical),
                  NumericalError);
}

TEST_CASE("general machinery equals the closed forms for random emitters") {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const double n = rng.uniform(1, 3), w = 2 * kPi * rng.uniform(100e12, 1000e12);
    const auto e = random_emitter(rng, w);
    const RateReport r = emission_rate(e, coincident_im_jet(w, Medium::constant(n)));
    const auto fs = free_space_rates(e, n, w);
    CHECK(rel(r.gamma_total, fs.total()) < 1e-10);
    CHECK(rel(r.gamma_by_channel_pair.at({Channel::ED, Channel::ED}), fs.ed) < 1e-10);
    CHECK(rel(r.gamma_by_channel_pair.at({Channel::MD, Channel::MD}), fs.md) < 1e-10);
    CHECK(rel(r.gamma_by_channel_pair.at({Channel::EQ, Channel::EQ}), fs.eq) < 1e-10);
    for (const auto &[p, g] : r.gamma_by_channel_pair)
      if (p.first != p.second)
        CHECK(std::abs(g) < 1e-12 * r.gamma_total);
  }
}

TEST_CASE("Lamb shift") {
  const auto e = dipole_emitter({constants::dipole_au, 0, 0}, 2.0e15);

  SUBCASE("zero scattered model") {
    SpectralGreenModel zero;
    zero.evaluate = [](cplx) { return GreensJet{}; };
    zero.analytic_upper_half_plane = zero.decays_at_infinity = true;
    CHECK(lamb_shift(e, zero, IntegralMethod::PV).delta == 0.0);
    CHECK(lamb_shift(e, zero, IntegralMethod::ImaginaryAxis).delta == 0.0);
  }

  SUBCASE("pv and imaginary-axis paths agree; sign against a dense-grid oracle") {
    const double wr = 2.4e15, eta = 6e13, A = 3e38;
    ModeExpansionEnvironment env({mode(wr, eta, A, {1, 0, 0}, 0.0)});
    const auto model = env.at(e.position, e.position);
    const auto pv = lamb_shift(e, model, IntegralMethod::PV);
    const auto ia = lamb_shift(e, model, IntegralMethod::ImaginaryAxis);
    CHECK(rel(pv.delta, ia.delta) < 5e-6);

    // P int w^2 |d|^2 Im G_xx / (w - w0) / (hbar pi eps0 c^2), midpoint rule
    // with nodes symmetric about the pole, truncated where the tail is < 1e-9.
    const double P = std::norm(e.d[0]) /
                     (constants::hbar * kPi * constants::epsilon0 * constants::c * constants::c);
    auto img = [&](double w) { return A * eta * w / (std::pow(wr * wr - w * w, 2) + std::pow(eta * w, 2)); };
    const double w0 = e.omega0, upper = 2000 * wr;
    const long n = 20000000;
    double s = 0;
    const double hs = w0 / (n / 10);
    for (long j = 0; j < n / 10; ++j) {
      const double t = (j + 0.5) * hs;
      s += hs * ((w0 + t) * (w0 + t) * img(w0 + t) - (w0 - t) * (w0 - t) * img(w0 - t)) / t;
    }
    // remaining range on a log grid
    const long m = n - n / 10;
    const double la = std::log(2 * w0), lb = std::log(upper), dl = (lb - la) / m;
    for (long j = 0; j < m; ++j) {
      const double w = std::exp(la + (j + 0.5) * dl);
      s += dl * w * w * w * img(w) / (w - w0);
    }
    const double oracle = P * s;
    CHECK(rel(pv.delta, oracle) < 1e-4);
    // resonance above w0 pulls the transition up
    CHECK(pv.delta > 0.0);
    CHECK(oracle > 0.0);
  }

  SUBCASE("on-shell is not a Lamb-shift method") {
    ModeExpansionEnvironment env({mode(2.4e15, 6e13, 3e38, {1, 0, 0}, 0.0)});
    CHECK_THROWS_AS(lamb_shift(e, env.at({}, {}), IntegralMethod::OnShell), InputError);
  }
}

TEST_CASE("free-space dipole-dipole coupling") {
  const double w = kOptical, k = w / constants::c;
  const auto a = dipole_emitter({0, 0, constants::dipole_au}, w);
  HomogeneousEnvironment env(1.0);
  CouplingOptions opt;
  opt.method = IntegralMethod::OnShell;

  SUBCASE("matches the on-shell contraction of Re G") {
    const double P = 1.0 / (constants::hbar * kPi * constants::epsilon0 * constants::c * constants::c);
    for (double x : {1e-3, 0.1, 2.0}) {
      auto b = a;
      b.position = {x / k, 0, 0};
      const auto r = couple(a, b, env, opt);
      const auto G = green_oracle(a.position - b.position, k);
      const double oracle = kPi * w * w * P * std::norm(constants::dipole_au) * G(2, 2).real();
      CHECK(rel(r.xi.real(), oracle) < 1e-10);
      CHECK(std::abs(r.xi.imag()) <= 1e-15 * std::abs(r.xi));
    }
  }
  SUBCASE("near-zone R^-3 law") {
    std::vector<double> R, xi;
    for (int i = 0; i <= 10; ++i) {
      const double x = 1e-3 * std::pow(10.0, i / 10.0);
      auto b = a;
      b.position = {0, x / k, 0};
      R.push_back(x / k);
      xi.push_back(std::abs(couple(a, b, env, opt).xi));
    }
    CHECK(std::abs(loglog_slope(R, xi) + 3.0) < 0.05);
  }
  SUBCASE("inert partner") {
    MultipoleEmitter b;
    b.omega0 = w;
    b.position = {1e-7, 0, 0};
    const auto r = couple(a, b, env, opt);
    CHECK(r.xi == cplx(0.0));
    CHECK(r.gamma_cross == cplx(0.0));
  }
  SUBCASE("frequency integrals are refused in a homogeneous medium") {
    auto b = a;
    b.position = {1e-7, 0, 0};
    opt.method = IntegralMethod::PV;
    CHECK_THROWS_AS(couple(a, b, env, opt), InputError);
  }
  SUBCASE("detuning limit") {
    auto b = a;
    b.position = {1e-7, 0, 0};
    b.omega0 = 1.05 * w;
    CHECK_THROWS_AS(couple(a, b, env, opt), InputError);
  }
}

TEST_CASE("collective rate limits") {
  Rng rng(14);
  const double w = kOptical;
  const auto c = coincident_im_jet(w, Medium::constant(1.0));
  for (int t = 0; t < 20; ++t) {
    const auto e = random_emitter(rng, w);
    CHECK(rel(collective_rate(e, e, c, w).real(), emission_rate(e, c).gamma_total) < 1e-12);
  }
  SUBCASE("two-point jet tends to the coincident one") {
    const auto a = dipole_emitter({1e-29, 2e-29, 0}, w);
    const double k = w / constants::c;
    const double g11 = collective_rate(a, a, c, w).real();
    auto b = a;
    b.position = {0, 0, 1e-4 / k};
    CouplingOptions opt;
    opt.method = IntegralMethod::OnShell;
    const auto r = couple(a, b, HomogeneousEnvironment(1.0), opt);
    CHECK(rel(r.gamma_cross.real(), g11) < 1e-7);
  }
}

TEST_CASE("Hermiticity of xi and gamma") {
  Rng rng(77);
  SUBCASE("structured environment, both integral methods") {
    const auto env = two_modes();
    for (auto method : {IntegralMethod::PV, IntegralMethod::ImaginaryAxis}) {
      CouplingOptions opt;
      opt.method = method;
      for (int t = 0; t < 5; ++t) {
        auto a = random_emitter(rng, 2.0e15), b = random_emitter(rng, 2.0e15);
        a.position = rng.vec(3e-8);
        b.position = rng.vec(3e-8);
        const auto ab = couple(a, b, env, opt), ba = couple(b, a, env, opt);
        CHECK(std::abs(ab.xi - std::conj(ba.xi)) <= 1e-6 * std::abs(ab.xi));
        CHECK(std::abs(ab.gamma_cross - std::conj(ba.gamma_cross)) <=
              1e-12 * std::abs(ab.gamma_cross));
      }
    }
  }
  SUBCASE("homogeneous on-shell, 100 pairs") {
    HomogeneousEnvironment env(1.3);
    CouplingOptions opt;
    opt.method = IntegralMethod::OnShell;
    for (int t = 0; t < 100; ++t) {
      auto a = random_emitter(rng, kOptical), b = random_emitter(rng, kOptical);
      b.position = rng.vec(1e-7);
      const auto ab = couple(a, b, env, opt), ba = couple(b, a, env, opt);
      CHECK(std::abs(ab.xi - std::conj(ba.xi)) <= 1e-12 * std::abs(ab.xi));
      CHECK(std::abs(ab.gamma_cross - std::conj(ba.gamma_cross)) <=
            1e-12 * std::abs(ab.gamma_cross));
    }
  }
}

TEST_CASE("pv and imaginary-axis couplings agree for a structured environment") {
  Rng rng(3);
  const auto env = two_modes();
  for (int t = 0; t < 5; ++t) {
    auto a = random_emitter(rng, 2.0e15), b = random_emitter(rng, 2.0e15);
    b.position = rng.vec(5e-8);
    CouplingOptions pv, ia;
    pv.method = IntegralMethod::PV;
    ia.method = IntegralMethod::ImaginaryAxis;
    CHECK(rel(couple(a, b, env, pv).xi, couple(a, b, env, ia).xi) < 5e-6);
  }
}

TEST_CASE("rates and couplings scale as lambda^2") {
  Rng rng(41);
  const auto e = random_emitter(rng, kOptical);
  const double lam = 3.7;
  const auto c = coincident_im_jet(kOptical, Medium::constant(1.6));
  const auto r1 = emission_rate(e, c), r2 = emission_rate(e.scaled(lam), c);
  for (const auto &[p, g] : r1.gamma_by_channel_pair)
    CHECK(r2.gamma_by_channel_pair.at(p) == doctest::Approx(lam * lam * g).epsilon(1e-13).scale(1e-6 * r1.gamma_total));

  auto b = random_emitter(rng, kOptical);
  b.position = {2e-8, -1e-8, 3e-8};
  CouplingOptions opt;
  opt.method = IntegralMethod::OnShell;
  HomogeneousEnvironment env(1.0);
  const auto c1 = couple(e, b, env, opt), c2 = couple(e.scaled(lam), b.scaled(lam), env, opt);
  // linear in each emitter
  CHECK(rel(c2.xi, lam * lam * c1.xi) < 1e-13);
  CHECK(rel(c2.gamma_cross, lam * lam * c1.gamma_cross) < 1e-13);
  const auto c3 = couple(e.scaled(lam), b, env, opt);
  CHECK(rel(c3.xi, lam * c1.xi) < 1e-13);
}

TEST_CASE("enhancement maps from homogeneous-sampled grids") {
  const GridAxes axes = plane_axes(6, 5, 20e-9);
  Rng rng(8);
  const auto e = random_emitter(rng, kOptical);
  for (double n : {1.0, 2.0}) {
    const TensorGrid g = sample_homogeneous_grid(kOptical, n, axes, {5e-9, true, 0});
    const auto map = enhancement_map(g, e, {});
    const double ed = n, mq = n * n * n;
    // truncation error of second-order stencils, one-sided at the edges
    const double kh = n * kOptical / constants::c * 5e-9, bound = 2 * kh * kh;
    for (const auto &node : map.nodes) {
      CHECK(rel(node.enhancement_channel.at(Channel::ED), ed) < 1e-10);
      CHECK(rel(node.enhancement_channel.at(Channel::MD), mq) < bound);
      CHECK(rel(node.enhancement_channel.at(Channel::EQ), mq) < bound);
    }
  }
}

TEST_CASE("grid-derived rates converge to the analytic path at second order") {
  Rng rng(10);
  const auto e = random_emitter(rng, kOptical);
  const double analytic = free_space_rates(e, 1.0, kOptical).total();
  double prev = 0;
  for (double s : {40e-9, 20e-9, 10e-9}) {
    const TensorGrid g = sample_homogeneous_grid(kOptical, 1.0, plane_axes(5, 5, s), {s / 2, true, 0});
    const auto map = enhancement_map(g, e, {});
    double res = 0;
    for (const auto &node : map.nodes)
      res = std::max(res, std::abs(node.rate.gamma_total - analytic) / analytic);
    if (prev > 0)
      CHECK(prev / res >= 3.5);
    prev = res;
  }
}

TEST_CASE("enhancement map input checks and determinism") {
  const GridAxes axes = plane_axes(7, 6, 20e-9);
  const TensorGrid g = sample_homogeneous_grid(kOptical, 1.0, axes, {5e-9, true, 0});
  Rng rng(1);
  auto e = random_emitter(rng, kOptical);
  MapOptions serial, parallel;
  serial.parallel = false;
  parallel.workers = 4;
  const auto a = enhancement_map(g, e, serial), b = enhancement_map(g, e, parallel);
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    CHECK(a.nodes[i].rate.gamma_total == b.nodes[i].rate.gamma_total);

  MapOptions md;
  md.channels = ChannelSelector::only(Channel::MD);
  const auto m = enhancement_map(g, e, md);
  REQUIRE(m.channels.size() == 1);
  CHECK(rel(m.gamma_fs, free_space_rates(e, 1.0, kOptical).md) < 1e-14);

  e.omega0 *= 1.001;
  CHECK_THROWS_AS(enhancement_map(g, e, {}), InputError);

  MultipoleEmitter inert;
  inert.omega0 = kOptical;
  CHECK_THROWS_AS(enhancement_map(g, inert, {}), InputError);
}
