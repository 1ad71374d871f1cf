#include "mqed/spectral_model.hpp"
#include "mqed/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mqed {

namespace {

double jet_max_abs(const GreensJet &j) {
  return std::max({max_abs(j.value), max_abs(j.d_obs), max_abs(j.d_src),
                   max_abs(j.d_mixed)});
}

template <class F> double jet_max_dev(const GreensJet &a, const GreensJet &b, F dev) {
  double m = 0.0;
  auto scan = [&](const auto &x, const auto &y) {
    for (std::size_t i = 0; i < x.size; ++i)
      m = std::max(m, dev(x.data[i], y.data[i]));
  };
  scan(a.value, b.value);
  scan(a.d_obs, b.d_obs);
  scan(a.d_src, b.d_src);
  scan(a.d_mixed, b.d_mixed);
  return m;
}

} // namespace

double schwarz_reflection_residual(const SpectralGreenModel &model,
                                   const std::vector<double> &real_omegas) {
  double worst = 0.0;
  for (double w : real_omegas) {
    const GreensJet plus = model.evaluate(cplx(w, 0.0));
    const GreensJet minus = model.evaluate(cplx(-w, 0.0));
    const double scale = std::max(jet_max_abs(plus), 1e-300);
    const double dev = jet_max_dev(
        plus, minus, [](cplx p, cplx m) { return std::abs(m - std::conj(p)); });
    worst = std::max(worst, dev / scale);
  }
  return worst;
}

double imaginary_axis_reality_residual(const SpectralGreenModel &model,
                                       const std::vector<double> &kappas) {
  double worst = 0.0;
  for (double k : kappas) {
    const GreensJet j = model.evaluate(cplx(0.0, k));
    const double scale = std::max(jet_max_abs(j), 1e-300);
    const double dev =
        jet_max_dev(j, j, [](cplx p, cplx) { return std::abs(p.imag()); });
    worst = std::max(worst, dev / scale);
  }
  return worst;
}

SpectralGreenModel HomogeneousEnvironment::at(const Vec3 &r_obs,
                                              const Vec3 &r_src) const {
  SpectralGreenModel model;
  const Medium medium = medium_;
  if (norm(r_obs - r_src) == 0.0) {
    model.evaluate = [medium](cplx omega) {
      if (omega.imag() != 0.0 || omega.real() <= 0.0)
        throw InputError("coincident homogeneous Green data exist only as the "
                         "imaginary part at real positive frequency");
      return coincident_im_jet(omega.real(), medium);
    };
  } else {
    model.evaluate = [medium, r_obs, r_src](cplx omega) {
      return eval_homogeneous_jet_k(r_obs, r_src, medium.wavenumber(omega));
    };
    model.analytic_upper_half_plane = true;
  }
  // e^{ikR} does not decay along the real axis.
  model.decays_at_infinity = false;
  return model;
}

ModeExpansionEnvironment::ModeExpansionEnvironment(std::vector<LorentzianMode> modes)
    : modes_(std::move(modes)) {
  for (const auto &m : modes_)
    if (!(m.omega_r > 0.0) || !(m.eta > 0.0))
      throw InputError("Lorentzian modes need omega_r > 0 and eta > 0");
}

SpectralGreenModel ModeExpansionEnvironment::at(const Vec3 &r_obs,
                                                const Vec3 &r_src) const {
  struct Precomputed {
    LorentzianMode mode;
    Vec3 e_obs, e_src;
  };
  std::vector<Precomputed> pre;
  for (const auto &m : modes_) {
    Precomputed p{m, m.amplitude, m.amplitude};
    const Vec3 dobs = r_obs - m.center;
    const Vec3 dsrc = r_src - m.center;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) {
        p.e_obs[i] += m.gradient(i, k) * dobs[k];
        p.e_src[i] += m.gradient(i, k) * dsrc[k];
      }
    pre.push_back(p);
  }
  SpectralGreenModel model;
  model.evaluate = [pre](cplx omega) {
    GreensJet jet;
    jet.part = JetPart::Full;
    for (const auto &p : pre) {
      const auto &m = p.mode;
      const cplx L = m.strength / (m.omega_r * m.omega_r - omega * omega -
                                   cplx(0.0, 1.0) * m.eta * omega);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          jet.value(a, b) += L * (p.e_obs[a] * p.e_src[b]);
          for (int k = 0; k < 3; ++k) {
            jet.d_obs(a, b, k) += L * (m.gradient(a, k) * p.e_src[b]);
            jet.d_src(a, b, k) += L * (p.e_obs[a] * m.gradient(b, k));
            for (int l = 0; l < 3; ++l)
              jet.d_mixed(a, b, k, l) += L * (m.gradient(a, k) * m.gradient(b, l));
          }
        }
    }
    return jet;
  };
  model.analytic_upper_half_plane = true;
  model.decays_at_infinity = true;
  return model;
}

} // namespace mqed
