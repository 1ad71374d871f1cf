#pragma once

#include "mqed/greens_jet.hpp"
#include "mqed/tensor.hpp"

#include <functional>

namespace mqed {

// Isotropic, non-magnetic background medium.
class Medium {
public:
  // Constant real refractive index n >= 1.
  static Medium constant(double n);
  // Frequency-dependent complex index n(omega) for real omega > 0.
  static Medium dispersive(std::function<cplx(double)> n_of_omega);

  cplx index(double omega) const;
  bool is_constant() const { return !model_; }
  // Wavenumber k = (omega/c) n(omega). For complex omega only the
  // constant-index medium is defined.
  cplx wavenumber(double omega) const;
  cplx wavenumber(cplx omega) const;

private:
  double n_ = 1.0;
  std::function<cplx(double)> model_;
};

// Homogeneous-medium dyadic Green's tensor at displacement R = r - r'.
// Throws InputError for R = 0 (use coincident_im_jet).
ComplexTensor3x3 eval_homogeneous(const Vec3 &R, double omega,
                                  const Medium &medium);
ComplexTensor3x3 eval_homogeneous_k(const Vec3 &R, cplx k);

// Value plus first and mixed second derivatives, closed-form.
// d/dr = +d/dR and d/dr' = -d/dR.
GreensJet eval_homogeneous_jet(const Vec3 &r, const Vec3 &r_src, double omega,
                               const Medium &medium);
GreensJet eval_homogeneous_jet_k(const Vec3 &r, const Vec3 &r_src, cplx k);

// R -> 0 limit of the imaginary part: Im G = k/(6 pi) 1, vanishing first
// derivatives, and
//   d_r_p d_r'_q Im G_jk = (k^3/15pi) d_jk d_pq - (k^3/60pi)(d_pj d_qk + d_pk d_qj).
// Requires a real index at omega.
GreensJet coincident_im_jet(double omega, const Medium &medium);

// Near-coincidence series of Im G through O(R^2):
//   Im G_jk = (k/6pi) d_jk - (k^3/30pi) R^2 d_jk + (k^3/60pi) R_j R_k.
// Requires k|R| < 0.5.
RealTensor3x3 small_R_series_im(const Vec3 &R, double omega,
                                const Medium &medium);

// Im G(R) for real k, continuous through R = 0. Convenient sampler for
// coincident-point data.
RealTensor3x3 im_homogeneous(const Vec3 &R, double omega, const Medium &medium);

} // namespace mqed
