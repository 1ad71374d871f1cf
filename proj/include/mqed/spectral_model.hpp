#pragma once

#include "mqed/greens_homogeneous.hpp"
#include "mqed/greens_jet.hpp"
#include "mqed/tensor.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace mqed {

// Frequency dependence of the Green jet at one fixed point pair.
struct SpectralGreenModel {
  std::function<GreensJet(cplx omega)> evaluate;
  // Evaluation on the positive imaginary axis is supported.
  bool analytic_upper_half_plane = false;
  // |G| -> 0 as |omega| -> inf in the upper half plane (declared, unverified).
  bool decays_at_infinity = false;
  double valid_min = 0.0;
  double valid_max = std::numeric_limits<double>::infinity();
  // Lowest spectral feature that sits near omega = 0 (0 if regular there).
  double low_frequency_scale = 0.0;
};

// Largest relative violation of G(-w*) = G*(w) over the given real
// frequencies, and of Im G(ik) = 0 over the given imaginary-axis points.
double schwarz_reflection_residual(const SpectralGreenModel &model,
                                   const std::vector<double> &real_omegas);
double imaginary_axis_reality_residual(const SpectralGreenModel &model,
                                       const std::vector<double> &kappas);

// A photonic environment: provides the spectral model for any point pair.
class Environment {
public:
  virtual ~Environment() = default;
  virtual SpectralGreenModel at(const Vec3 &r_obs, const Vec3 &r_src) const = 0;
  virtual std::string kind() const = 0;
  // Whether the PV / imaginary-axis integrals are well defined.
  virtual bool supports_frequency_integrals() const = 0;
};

// Infinite homogeneous medium. Coincident pairs return the Im-only limit.
class HomogeneousEnvironment : public Environment {
public:
  explicit HomogeneousEnvironment(double n) : n_(n), medium_(Medium::constant(n)) {}
  SpectralGreenModel at(const Vec3 &r_obs, const Vec3 &r_src) const override;
  std::string kind() const override { return "homogeneous"; }
  bool supports_frequency_integrals() const override { return false; }
  double index() const { return n_; }

private:
  double n_;
  Medium medium_;
};

// Sum of Lorentzian resonances with linear real mode profiles:
//   G_mn(r, r', w) = sum_p A_p / (w_p^2 - w^2 - i eta_p w) E_pm(r) E_pn(r'),
//   E_p(r) = amplitude_p + gradient_p (r - center_p).
// Reciprocal, Schwarz-reflection symmetric, analytic in the upper half plane
// and decaying as 1/w^2; a stand-in for the scattered part of a structured
// environment.
struct LorentzianMode {
  double omega_r = 0.0;  // rad/s
  double eta = 0.0;      // rad/s
  double strength = 0.0; // A_p, m^-1 s^-2 (so that G is in m^-1)
  Vec3 amplitude{};
  RealTensor3x3 gradient{}; // (m, k): d E_m / d r_k, m^-1
  Vec3 center{};
};

class ModeExpansionEnvironment : public Environment {
public:
  explicit ModeExpansionEnvironment(std::vector<LorentzianMode> modes);
  SpectralGreenModel at(const Vec3 &r_obs, const Vec3 &r_src) const override;
  std::string kind() const override { return "modes"; }
  bool supports_frequency_integrals() const override { return true; }
  const std::vector<LorentzianMode> &modes() const { return modes_; }

private:
  std::vector<LorentzianMode> modes_;
};

} // namespace mqed
