// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Criterion 10 needs an externally computed grid:
//   MQED_NANOSPHERE_GRID=grid.json MQED_NANOSPHERE_EMITTER=emitter.json
#include "liouvillian_oracle.hpp"
#include "support.hpp"

#include "mqed/dynamics.hpp"
#include "mqed/errors.hpp"
#include "mqed/greens_homogeneous.hpp"
#include "mqed/rates.hpp"
#include "mqed/report.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace mqed;
using namespace testing;

namespace {

const double kPi = constants::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int failures = 0;

void run(int id, const char *title, const std::function<Outcome()> &body,
         double time_limit = 0.0) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (time_limit > 0 && secs >= time_limit) {
    o.pass = false;
    o.detail += fmt(", over the %.0f s budget", time_limit);
  }
  if (!o.pass)
    ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " ("
            << o.detail << fmt(", %.2f s", secs) << ")" << std::endl;
}

LorentzianMode mode(double wr, double eta, double a, Vec3 amp, double grad) {
  LorentzianMode m;
  m.omega_r = wr;
  m.eta = eta;
  m.strength = a;
  m.amplitude = amp;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m.gradient(i, j) = grad * (1.0 + i - 0.5 * j + (i == j ? 1.5 : 0.0));
  return m;
}

Outcome closure() {
  Rng rng(2024);
  double worst = 0, cross = 0;
  for (int t = 0; t < 1000; ++t) {
    const double n = rng.uniform(1, 3), w = 2 * kPi * rng.uniform(100e12, 1000e12);
    const auto e = random_emitter(rng, w);
    const auto r = emission_rate(e, coincident_im_jet(w, Medium::constant(n)));
    worst = std::max(worst, rel(r.gamma_total, free_space_rates(e, n, w).total()));
    for (const auto &[p, g] : r.gamma_by_channel_pair)
      if (p.first != p.second)
        cross = std::max(cross, std::abs(g) / r.gamma_total);
  }
  return {worst < 1e-10 && cross < 1e-12,
          fmt("max rel %.1e, max cross/total %.1e", worst, cross)};
}

Outcome index_scaling() {
  Rng rng(7);
  const double w = kOptical;
  double dev = 0;
  for (int t = 0; t < 20; ++t) {
    const auto e = random_emitter(rng, w);
    const auto a = emission_rate(e, coincident_im_jet(w, Medium::constant(1.0)));
    const auto b = emission_rate(e, coincident_im_jet(w, Medium::constant(2.0)));
    auto ratio = [&](Channel c) {
      return b.gamma_by_channel_pair.at({c, c}) / a.gamma_by_channel_pair.at({c, c});
    };
    dev = std::max({dev, std::abs(ratio(Channel::ED) - 2), std::abs(ratio(Channel::MD) - 8),
                    std::abs(ratio(Channel::EQ) - 8)});
  }
  return {dev < 1e-12, fmt("max |ratio - expected| %.1e", dev)};
}

Outcome series_order() {
  const double w = kOptical, k = w / constants::c;
  const Vec3 dir{0.36, -0.48, 0.8};
  std::vector<double> xs, res;
  for (int i = 0; i <= 8; ++i) {
    const double x = 1e-3 * std::pow(10.0, i / 4.0);
    const Vec3 R = (x / k) * dir;
    const auto s = small_R_series_im(R, w, Medium::constant(1.0));
    const auto o = im_green_bessel(R, k);
    double r = 0;
    for (int j = 0; j < 9; ++j)
      r = std::max(r, std::abs(s.data[j] - o.data[j]));
    xs.push_back(x);
    res.push_back(r);
  }
  const double p = loglog_slope(xs, res);
  return {std::abs(p - 4.0) <= 0.1, fmt("fitted exponent %.3f", p)};
}

Outcome derivative_oracle() {
  Rng rng(21);
  const double k = 1e7;
  double worst = 0;
  for (double x : {0.05, 0.3, 2.5, 9.0}) {
    for (int t = 0; t < 4; ++t) {
      const Vec3 dir = rng.vec(1.0), rs = rng.vec(1e-7);
      const Vec3 r = rs + (x / (k * norm(dir))) * dir;
      const double h = 1e-6 * norm(r - rs);
      const auto jet = eval_homogeneous_jet_k(r, rs, cplx(k, 0.0));
      const double s1 = max_abs(jet.d_obs), s2 = max_abs(jet.d_mixed);
      for (int a = 0; a < 3; ++a) {
        Vec3 e{};
        e[a] = h;
        const auto vp = eval_homogeneous_k(r + e - rs, cplx(k, 0.0));
        const auto vm = eval_homogeneous_k(r - e - rs, cplx(k, 0.0));
        const auto jp = eval_homogeneous_jet_k(r, rs + e, cplx(k, 0.0));
        const auto jm = eval_homogeneous_jet_k(r, rs - e, cplx(k, 0.0));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            const cplx fd = (vp(i, j) - vm(i, j)) / (2 * h);
            worst = std::max(worst, std::abs(fd - jet.d_obs(i, j, a)) / s1);
            worst = std::max(worst, std::abs(-fd - jet.d_src(i, j, a)) / s1);
            for (int p = 0; p < 3; ++p) {
              const cplx fm = (jp.d_obs(i, j, p) - jm.d_obs(i, j, p)) / (2 * h);
              worst = std::max(worst, std::abs(fm - jet.d_mixed(i, j, p, a)) / s2);
            }
          }
      }
    }
  }
  // observed order of the first- and mixed-derivative errors
  const Vec3 r{0.4 / k, -0.7 / k, 1.1 / k}, rs{};
  const auto jet = eval_homogeneous_jet_k(r, rs, cplx(k, 0.0));
  std::vector<double> hs, e1, e2;
  for (double f : {4e-2, 2e-2, 1e-2, 5e-3}) {
    const double h = f * norm(r);
    double a1 = 0, a2 = 0;
    for (int a = 0; a < 3; ++a) {
      Vec3 e{};
      e[a] = h;
      const auto vp = eval_homogeneous_k(r + e, cplx(k, 0.0));
      const auto vm = eval_homogeneous_k(r - e, cplx(k, 0.0));
      const auto jp = eval_homogeneous_jet_k(r, rs + e, cplx(k, 0.0));
      const auto jm = eval_homogeneous_jet_k(r, rs - e, cplx(k, 0.0));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          a1 = std::max(a1, std::abs((vp(i, j) - vm(i, j)) / (2 * h) - jet.d_obs(i, j, a)));
          for (int p = 0; p < 3; ++p)
            a2 = std::max(a2, std::abs((jp.d_obs(i, j, p) - jm.d_obs(i, j, p)) / (2 * h) -
                                       jet.d_mixed(i, j, p, a)));
        }
    }
    hs.push_back(h);
    e1.push_back(a1);
    e2.push_back(a2);
  }
  const double o1 = loglog_slope(hs, e1), o2 = loglog_slope(hs, e2);
  const bool ok = worst < 1e-6 && o1 >= 1.8 && o1 <= 2.2 && o2 >= 1.8 && o2 <= 2.2;
  return {ok, fmt("max rel %.1e at h = 1e-6|R|, orders %.3f / %.3f", worst, o1, o2)};
}

Outcome pv_replacement() {
  const double wr = 2.0e15;
  Rng rng(5);
  auto a = random_emitter(rng, wr), b = random_emitter(rng, wr);
  a.position = {0, 0, 0};
  b.position = {1.5e-8, -2e-8, 1e-8};
  const std::vector<std::vector<LorentzianMode>> models = {
      {mode(wr, 5e13, 3e38, {1, 0.3, -0.2}, 2e7)},
      {mode(wr, 5e13, 3e38, {1, 0.3, -0.2}, 2e7), mode(1.6 * wr, 1.5e14, 1e38, {-0.2, 0.7, 0.4}, -1e7)}};
  double worst = 0;
  for (const auto &modes : models) {
    ModeExpansionEnvironment env(modes);
    for (double s : {0.5, 0.7, 1.0, 1.4, 2.0}) {
      auto ea = a, eb = b;
      ea.omega0 = eb.omega0 = s * wr;
      const auto self = env.at(ea.position, ea.position);
      const double d_pv = lamb_shift(ea, self, IntegralMethod::PV).delta;
      const double d_ia = lamb_shift(ea, self, IntegralMethod::ImaginaryAxis).delta;
      worst = std::max(worst, rel(d_ia, d_pv));
      CouplingOptions pv, ia;
      pv.method = IntegralMethod::PV;
      ia.method = IntegralMethod::ImaginaryAxis;
      worst = std::max(worst, rel(couple(ea, eb, env, ia).xi, couple(ea, eb, env, pv).xi));
    }
  }
  return {worst < 5e-6, fmt("max rel difference %.1e over 1 and 2 poles", worst)};
}

Outcome near_zone() {
  const double w = kOptical, k = w / constants::c;
  const auto a = dipole_emitter({0, 0, constants::dipole_au}, w);
  HomogeneousEnvironment env(1.0);
  CouplingOptions opt;
  opt.method = IntegralMethod::OnShell;
  std::vector<double> R, xi;
  for (int i = 0; i <= 10; ++i) {
    const double x = 1e-3 * std::pow(10.0, i / 10.0);
    auto b = a;
    b.position = {0, x / k, 0};
    R.push_back(x / k);
    xi.push_back(std::abs(couple(a, b, env, opt).xi));
  }
  const double p = loglog_slope(R, xi);
  return {std::abs(p + 3.0) <= 0.05, fmt("exponent %.4f", p)};
}

Outcome collective_limits() {
  Rng rng(31);
  const double w = kOptical, k = w / constants::c;
  HomogeneousEnvironment env(1.0);
  CouplingOptions opt;
  opt.method = IntegralMethod::OnShell;
  double zero = 0, herm = 0;
  for (int t = 0; t < 20; ++t) {
    const auto a = random_emitter(rng, w);
    const double g11 = emission_rate(a, coincident_im_jet(w, Medium::constant(1.0))).gamma_total;
    // exactly colocated copy, and the approach to it; the approach is O(kR)
    // because Im of the first-derivative blocks is odd in R
    const cplx g12 = collective_rate(a, a, env.at(a.position, a.position).evaluate(w), w);
    zero = std::max(zero, rel(g12, cplx(g11)));
    auto b = a;
    b.position = (1e-7 / k) * Vec3{0.6, 0.0, 0.8};
    zero = std::max(zero, rel(couple(a, b, env, opt).gamma_cross, cplx(g11)));
  }
  for (int t = 0; t < 100; ++t) {
    auto a = random_emitter(rng, w), b = random_emitter(rng, w);
    b.position = rng.vec(1e-7);
    const auto ab = couple(a, b, env, opt), ba = couple(b, a, env, opt);
    herm = std::max(herm, std::abs(ab.gamma_cross - std::conj(ba.gamma_cross)) /
                              std::abs(ab.gamma_cross));
  }
  return {zero < 1e-8 && herm < 1e-12,
          fmt("zero-separation rel %.1e, max Hermiticity residual %.1e", zero, herm)};
}

EmitterEnsembleModel pair_model(double g) {
  EmitterEnsembleModel m;
  m.omega_bar = kOptical;
  m.delta = Eigen::VectorXd::Zero(2);
  m.xi = Eigen::MatrixXcd::Zero(2, 2);
  m.gamma = Eigen::MatrixXcd::Constant(2, 2, g);
  return m;
}

Outcome dynamics() {
  // rate of a 1 e a0 dipole at 384 THz
  const auto e = dipole_emitter({0, 0, constants::dipole_au}, kOptical);
  const double g = free_space_rates(e, 1.0, kOptical).total();
  std::vector<double> t;
  for (int i = 0; i <= 30; ++i)
    t.push_back(i * 0.1 / g);

  EmitterEnsembleModel one;
  one.omega_bar = kOptical;
  one.delta = Eigen::VectorXd::Zero(1);
  one.xi = Eigen::MatrixXcd::Zero(1, 1);
  one.gamma = Eigen::MatrixXcd::Constant(1, 1, g);
  const auto s = evolve_ensemble(one, product_state({{1.0, 0.0}}), t);
  double single = 0;
  for (std::size_t k = 0; k < t.size(); ++k)
    single = std::max(single, std::abs(s.sigma_z[k][0] - (-1 + 2 * std::exp(-g * t[k]))));

  const auto m = pair_model(g);
  const LiouvillianOracle oracle(m);
  EvolveOptions opt;
  opt.keep_density_matrices = true;
  double vs_oracle = 0;
  auto rate = [&](const Eigen::MatrixXcd &rho0) {
    const auto tr = evolve_ensemble(m, rho0, t, opt);
    for (std::size_t k = 0; k < t.size(); ++k)
      vs_oracle = std::max(vs_oracle, (tr.rho[k] - oracle.at(rho0, t[k])).cwiseAbs().maxCoeff());
    auto exc = [&](std::size_t k) { return 0.5 * (tr.sigma_z[k][0] + tr.sigma_z[k][1]) + 1.0; };
    return std::log(exc(0) / exc(t.size() - 1)) / t.back();
  };
  const double sup = rate(single_excitation_state({1.0, 1.0}));
  const double sub = rate(single_excitation_state({1.0, -1.0}));
  const bool ok = single < 1e-9 && std::abs(sup / (2 * g) - 1) < 0.01 && std::abs(sub) < 1e-3 * g &&
                  vs_oracle < 1e-9;
  return {ok, fmt("single %.1e, symmetric %.6f*2g, antisymmetric %.1e*g, vs oracle %.1e", single,
                  sup / (2 * g), sub / g, vs_oracle)};
}

Outcome grid_pipeline() {
  Rng rng(10);
  const auto e = random_emitter(rng, kOptical);
  std::string detail;
  bool ok = true;
  for (double n : {1.0, 2.0}) {
    const double k = n * kOptical / constants::c;
    double prev = 0;
    for (double s : {40e-9, 20e-9, 10e-9}) {
      const double h = s / 2, bound = 2 * (k * h) * (k * h);
      const auto grid = sample_homogeneous_grid(kOptical, n, plane_axes(5, 5, s), {h, true, 0});
      const auto map = enhancement_map(grid, e, {});
      const double want[3] = {n, n * n * n, n * n * n};
      double res = 0;
      for (const auto &node : map.nodes) {
        int c = 0;
        for (Channel ch : {Channel::ED, Channel::MD, Channel::EQ})
          res = std::max(res, std::abs(node.enhancement_channel.at(ch) - want[c]) / want[c]), ++c;
      }
      ok = ok && res < bound;
      if (prev > 0) {
        ok = ok && prev / res >= 3.5;
        detail += fmt("n=%.0f shrink %.2f; ", n, prev / res);
      }
      prev = res;
    }
  }
  return {ok, detail.substr(0, detail.size() - 2)};
}

void nanosphere() {
  const char *grid_path = std::getenv("MQED_NANOSPHERE_GRID");
  const char *em_path = std::getenv("MQED_NANOSPHERE_EMITTER");
  if (!grid_path || !em_path) {
    std::cout << "SKIPPED criterion 10: nanosphere-dimer grid not supplied "
                 "(set MQED_NANOSPHERE_GRID and MQED_NANOSPHERE_EMITTER)"
              << std::endl;
    return;
  }
  run(10, "nanosphere-dimer channel ordering", [&]() -> Outcome {
    const auto grid = load_grid_file(grid_path);
    const auto e = load_emitter_file(em_path);
    const auto map = enhancement_map(grid, e, {});
    double min_ratio = INFINITY, max_cross = -INFINITY;
    for (const auto &node : map.nodes) {
      const auto &g = node.rate.gamma_by_channel_pair;
      min_ratio = std::min(min_ratio, g.at({Channel::MD, Channel::MD}) / g.at({Channel::EQ, Channel::EQ}));
      max_cross = std::max(max_cross, g.at({Channel::MD, Channel::EQ}) + g.at({Channel::EQ, Channel::MD}));
    }
    return {min_ratio > 30 && max_cross < 0,
            fmt("min MD-MD/EQ-EQ %.1f, max MD-EQ cross %.2e", min_ratio, max_cross)};
  });
}

} // namespace

int main() {
  run(1, "Weisskopf-Wigner closure over 1000 random emitters", closure, 5.0);
  run(2, "refractive-index scaling 2/8/8", index_scaling);
  run(3, "small-R series residual order", series_order);
  run(4, "analytic derivatives against finite differences", derivative_oracle);
  run(5, "principal value against imaginary-axis form", pv_replacement, 10.0);
  run(6, "free-space coupling near-zone exponent", near_zone);
  run(7, "collective-rate limits", collective_limits);
  run(8, "single-emitter decay and pair super/subradiance", dynamics);
  run(9, "homogeneous grid pipeline", grid_pipeline);
  nanosphere();
  std::cout << (failures ? "FAILED" : "ALL PASSED") << std::endl;
  return failures ? 1 : 0;
}
