#pragma once

#include "mqed/emitter.hpp"
#include "mqed/spectral_model.hpp"
#include "mqed/tensor.hpp"

#include <functional>
#include <limits>
#include <utility>
#include <vector>

namespace mqed {

struct QuadratureOptions {
  // Absolute target, as a fraction of the running integral of |f|.
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  int max_subdivisions = 4000;
  // Imaginary-axis integrand counts as decayed below this fraction of its peak.
  double decay_fraction = 1e-12;
  int max_tail_chunks = 200;
  // "Sufficiently large" transition frequency: omega0 >= factor * the model's
  // declared low-frequency scale.
  double large_frequency_factor = 10.0;
};

struct QuadResult {
  cplx value{};
  double error = 0.0;
  int evaluations = 0;
};

using ComplexIntegrand = std::function<cplx(double)>;

// Adaptive Gauss-Kronrod (7/15) on a finite interval. Panels are bisected
// by largest error estimate; the final sum runs over panels in left-to-right
// order, so the result does not depend on the refinement history.
QuadResult integrate(const ComplexIntegrand &f, double a, double b,
                     const QuadratureOptions &opt = {});

// Integral over [a, inf) via omega = a / t. Throws NumericalError when the
// integrand does not decay fast enough to converge.
QuadResult integrate_to_infinity(const ComplexIntegrand &f, double a,
                                 const QuadratureOptions &opt = {});

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Cauchy principal value P int_0^upper f(w) / (w - pole) dw. The symmetric
// neighbourhood of the pole is folded into (f(pole+t) - f(pole-t)) / t, with
// an excision radius halved until the result is stable. f must be finite at 0.
QuadResult pv_integral(const ComplexIntegrand &f, double pole,
                       double upper = kInfinity,
                       const QuadratureOptions &opt = {});

// P int_0^inf dw w^2 C(w) . Im G(w) / (w - omega0), with C(w) = f0 + f1/w + f2/w^2
// complex coefficient tensors contracted against the model jet, rewritten
// via the first-quadrant contour as
//   pi w0^2 C(w0) . Re G(w0)
//   + int_0^inf dk [k^2 w0 f0 + k^2 f1 - w0 f2] . G(ik) / (k^2 + w0^2).
// The model must be analytic in the upper half plane and decay at infinity.
QuadResult imaginary_axis_form(const SpectralGreenModel &model,
                               const FrequencyCoefficients &coeffs,
                               double omega0, const QuadratureOptions &opt = {});

// Same quantity evaluated directly on the real axis with pv_integral.
QuadResult real_axis_pv_form(const SpectralGreenModel &model,
                             const FrequencyCoefficients &coeffs, double omega0,
                             const QuadratureOptions &opt = {});

// Total variation of the two integrands over their natural ranges; the
// imaginary-axis integrand is expected to be the smoother one.
std::pair<double, double>
integrand_total_variation(const SpectralGreenModel &model,
                          const FrequencyCoefficients &coeffs, double omega0,
                          int samples = 20000);

struct KKTail {
  enum class Kind { None, PowerLaw } kind = Kind::None;
  // Im G(w) = Im G(w_last) (w_last / w)^exponent beyond the last sample.
  double exponent = 0.0;
};

struct KKResidual {
  double omega;
  double re_sampled;   // Re G(omega) interpolated from samples
  double re_from_im;   // (2/pi) P int_0^inf w Im G / (w^2 - omega^2)
  double residual;     // re_sampled - re_from_im
  double relative;     // |residual| / max(|re_sampled|, tiny)
};

// Kramers-Kronig consistency of tabulated spectral data. Samples must be
// sorted by strictly increasing positive frequency; Im G(0) = 0 is assumed
// below the first sample. Throws InputError when a test frequency lacks
// two samples on either side.
std::vector<KKResidual> kk_residual(const std::vector<std::pair<double, cplx>> &samples,
                                    const std::vector<double> &test_omegas,
                                    KKTail tail = {});

} // namespace mqed
