#include "mqed/quadrature.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace mqed {

namespace {

constexpr double xgk[8] = {0.991455371120812639, 0.949107912342758525,
                           0.864864423359769073, 0.741531185599394440,
                           0.586087235467691130, 0.405845151377397167,
                           0.207784955007898468, 0.0};
constexpr double wgk[8] = {0.022935322010529225, 0.063092092629978553,
                           0.104790010322250184, 0.140653259715525919,
                           0.169004726639267903, 0.190350578064785410,
                           0.204432940075298892, 0.209482141084727828};
// Gauss weights at xgk[1], xgk[3], xgk[5], xgk[7].
constexpr double wg[4] = {0.129484966168869693, 0.279705391489276668,
                          0.381830050505118945, 0.417959183673469388};

struct Panel {
  double a, b;
  cplx value;
  double error;
  double abs_value;
};

Panel gk15(const ComplexIntegrand &f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  cplx kron(0.0), gauss(0.0);
  double absk = 0.0;
  const cplx fc = f(c);
  kron += wgk[7] * fc;
  gauss += wg[3] * fc;
  absk += wgk[7] * std::abs(fc);
  for (int j = 0; j < 7; ++j) {
    const cplx f1 = f(c - h * xgk[j]);
    const cplx f2 = f(c + h * xgk[j]);
    kron += wgk[j] * (f1 + f2);
    absk += wgk[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1)
      gauss += wg[j / 2] * (f1 + f2);
  }
  Panel p{a, b, kron * h, std::abs((kron - gauss) * h), absk * std::abs(h)};
  if (!std::isfinite(p.value.real()) || !std::isfinite(p.value.imag()))
    throw NumericalError("integrand is not finite on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]",
                         kInfinity);
  return p;
}

bool converged(double err, double abs_integral, cplx value, const QuadratureOptions &opt) {
  return err <= std::max(opt.abs_tol * abs_integral, opt.rel_tol * std::abs(value));
}

} // namespace

QuadResult integrate(const ComplexIntegrand &f, double a, double b,
                     const QuadratureOptions &opt) {
  if (a == b)
    return {};
  if (a > b) {
    QuadResult r = integrate(f, b, a, opt);
    r.value = -r.value;
    return r;
  }
  auto cmp = [](const Panel &x, const Panel &y) { return x.error < y.error; };
  std::priority_queue<Panel, std::vector<Panel>, decltype(cmp)> queue(cmp);
  Panel first = gk15(f, a, b);
  queue.push(first);
  cplx total = first.value;
  double err = first.error, abs_total = first.abs_value;
  int evals = 15;
  int panels = 1;
  while (!converged(err, abs_total, total, opt)) {
    if (panels >= opt.max_subdivisions) {
      std::ostringstream os;
      os << "adaptive quadrature did not converge on [" << a << ", " << b
         << "] after " << panels << " panels";
      throw NumericalError(os.str(), err);
    }
    Panel worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b))
      throw NumericalError("quadrature panel collapsed to machine precision", err);
    Panel l = gk15(f, worst.a, mid), r = gk15(f, mid, worst.b);
    evals += 30;
    ++panels;
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    abs_total += l.abs_value + r.abs_value - worst.abs_value;
    queue.push(l);
    queue.push(r);
  }
  // Deterministic final sum, left to right.
  std::vector<Panel> all;
  all.reserve(queue.size());
  while (!queue.empty()) {
    all.push_back(queue.top());
    queue.pop();
  }
  std::sort(all.begin(), all.end(), [](const Panel &x, const Panel &y) { return x.a < y.a; });
  QuadResult out;
  for (const auto &p : all) {
    out.value += p.value;
    out.error += p.error;
  }
  out.evaluations = evals;
  return out;
}

QuadResult integrate_to_infinity(const ComplexIntegrand &f, double a,
                                 const QuadratureOptions &opt) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw InputError("integrate_to_infinity needs a finite positive lower limit");
  // w = a / t, dw = a / t^2 dt, t in (0, 1].
  auto g = [&](double t) { return f(a / t) * (a / (t * t)); };
  try {
    return integrate(g, 0.0, 1.0, opt);
  } catch (const NumericalError &e) {
    throw NumericalError(std::string("semi-infinite integral did not converge "
                                     "(integrand decays too slowly?): ") +
                             e.what(),
                         e.residual());
  }
}

namespace {

QuadResult add(QuadResult x, const QuadResult &y) {
  x.value += y.value;
  x.error += y.error;
  x.evaluations += y.evaluations;
  return x;
}

QuadResult pv_with_radius(const ComplexIntegrand &f, double pole, double upper,
                          double delta, const QuadratureOptions &opt) {
  auto outer = [&](double w) { return f(w) / (w - pole); };
  auto fold = [&](double t) { return (f(pole + t) - f(pole - t)) / t; };
  QuadResult r = integrate(outer, 0.0, pole - delta, opt);
  r = add(r, integrate(fold, 0.0, delta, opt));
  if (std::isinf(upper))
    r = add(r, integrate_to_infinity(outer, pole + delta, opt));
  else
    r = add(r, integrate(outer, pole + delta, upper, opt));
  return r;
}

} // namespace

QuadResult pv_integral(const ComplexIntegrand &f, double pole, double upper,
                       const QuadratureOptions &opt) {
  if (!(pole > 0.0) || !std::isfinite(pole))
    throw InputError("principal value pole must be positive");
  if (!(upper > pole))
    throw InputError("principal value upper limit must exceed the pole");
  const cplx f0 = f(0.0);
  if (!std::isfinite(f0.real()) || !std::isfinite(f0.imag()))
    throw InputError("principal value integrand is not finite at omega = 0");

  double delta = 0.5 * std::min(pole, std::isinf(upper) ? pole : upper - pole);
  QuadResult prev = pv_with_radius(f, pole, upper, delta, opt);
  double diff = kInfinity;
  for (int iter = 0; iter < 12; ++iter) {
    delta *= 0.5;
    QuadResult cur = pv_with_radius(f, pole, upper, delta, opt);
    diff = std::abs(cur.value - prev.value);
    cur.evaluations += prev.evaluations;
    const double tol = std::max(opt.rel_tol * std::abs(cur.value),
                                10.0 * (cur.error + prev.error));
    if (diff <= tol) {
      cur.error = std::max(cur.error, diff);
      return cur;
    }
    prev = cur;
  }
  throw NumericalError("principal value did not stabilize under excision halving", diff);
}

namespace {

void check_imaginary_axis_model(const SpectralGreenModel &model, double omega0,
                                const QuadratureOptions &opt) {
  if (!model.analytic_upper_half_plane)
    throw InputError("model does not support evaluation on the imaginary axis; "
                     "use the principal-value (pv) method");
  if (!model.decays_at_infinity)
    throw InputError("imaginary-axis form requires a model that decays at large "
                     "|omega|; use the pv method");
  if (!(omega0 > 0.0) || omega0 < model.valid_min || omega0 > model.valid_max)
    throw InputError("omega0 outside the model validity range");
  if (omega0 < opt.large_frequency_factor * model.low_frequency_scale)
    throw InputError("omega0 is not large compared to the model's low-frequency "
                     "scale; use the pv method");
}

// lim k^2 . G(ik) contracted with f0, Richardson-extrapolated in 1/k.
cplx asymptotic_f0_term(const SpectralGreenModel &model, const JetCoefficients &f0,
                        double scale) {
  if (f0.is_zero())
    return 0.0;
  auto at = [&](double k) {
    return k * k * contract(f0, model.evaluate(cplx(0.0, k)), Component::Complex);
  };
  const double k1 = 1e6 * scale;
  const cplx a1 = at(k1), a2 = at(2.0 * k1);
  return 2.0 * a2 - a1;
}

} // namespace

QuadResult imaginary_axis_form(const SpectralGreenModel &model,
                               const FrequencyCoefficients &coeffs, double omega0,
                               const QuadratureOptions &opt) {
  check_imaginary_axis_model(model, omega0, opt);
  using constants::pi;
  const double w2 = omega0 * omega0;
  const cplx on_shell =
      pi * w2 * contract(coeffs.at(omega0), model.evaluate(cplx(omega0, 0.0)),
                         Component::Real);

  auto integrand = [&](double k) -> cplx {
    if (k == 0.0)
      return -omega0 * contract(coeffs.f2, model.evaluate(cplx(0.0, 0.0)),
                                Component::Complex) / w2;
    const GreensJet g = model.evaluate(cplx(0.0, k));
    const double k2 = k * k;
    cplx s = k2 * omega0 * contract(coeffs.f0, g, Component::Complex);
    s += k2 * contract(coeffs.f1, g, Component::Complex);
    s -= omega0 * contract(coeffs.f2, g, Component::Complex);
    return s / (k2 + w2);
  };

  // Peak of the integrand on a logarithmic sweep, then doubling chunks until
  // it has fallen below decay_fraction of that peak.
  double peak = 0.0;
  for (double k = 1e-3 * omega0; k <= 1e3 * omega0; k *= 1.25)
    peak = std::max(peak, std::abs(integrand(k)));
  QuadResult total;
  double lo = 0.0, hi = omega0;
  bool decayed = peak == 0.0;
  for (int chunk = 0; chunk < opt.max_tail_chunks && !decayed; ++chunk) {
    total = add(total, integrate(integrand, lo, hi, opt));
    // Remaining tail behaves at worst like c / k^2: once the chunk edge is
    // small, finish analytically with the mapped semi-infinite rule.
    if (std::abs(integrand(hi)) * hi <= opt.decay_fraction * peak * omega0) {
      total = add(total, integrate_to_infinity(integrand, hi, opt));
      decayed = true;
      break;
    }
    lo = hi;
    hi *= 2.0;
  }
  if (!decayed)
    throw NumericalError("imaginary-axis integrand did not decay; the model "
                         "is not decaying fast enough for this method",
                         std::abs(integrand(hi)));
  // Contribution of the closing quarter arc: the omega^2 measure makes the
  // f0 part O(1) even when G ~ 1/omega^2.
  total.value += 0.5 * pi * asymptotic_f0_term(model, coeffs.f0, omega0);
  total.value += on_shell;
  return total;
}

QuadResult real_axis_pv_form(const SpectralGreenModel &model,
                             const FrequencyCoefficients &coeffs, double omega0,
                             const QuadratureOptions &opt) {
  if (!(omega0 > 0.0) || omega0 < model.valid_min || omega0 > model.valid_max)
    throw InputError("omega0 outside the model validity range");
  auto f = [&](double w) -> cplx {
    if (w == 0.0)
      return 0.0;
    const GreensJet g = model.evaluate(cplx(w, 0.0));
    cplx s = w * w * contract(coeffs.f0, g, Component::Imag);
    s += w * contract(coeffs.f1, g, Component::Imag);
    s += contract(coeffs.f2, g, Component::Imag);
    return s;
  };
  // Check the f2 / omega^2 cancellation near zero.
  const double w_small = 1e-6 * omega0;
  const cplx near0 = f(w_small);
  if (!std::isfinite(near0.real()) || !std::isfinite(near0.imag()))
    throw InputError("pv integrand is not finite near omega = 0");
  const double upper =
      std::isfinite(model.valid_max) ? model.valid_max : kInfinity;
  return pv_integral(f, omega0, upper, opt);
}

std::pair<double, double>
integrand_total_variation(const SpectralGreenModel &model,
                          const FrequencyCoefficients &coeffs, double omega0,
                          int samples) {
  const double w2 = omega0 * omega0;
  auto real_axis = [&](double w) {
    const GreensJet g = model.evaluate(cplx(w, 0.0));
    const cplx s = w * w * contract(coeffs.f0, g, Component::Imag) +
                   w * contract(coeffs.f1, g, Component::Imag) +
                   contract(coeffs.f2, g, Component::Imag);
    const double d = w - omega0;
    // Odd fold removes the pole; compare against the folded form.
    return std::abs(d) < 1e-12 * omega0 ? cplx(0.0) : s / d;
  };
  auto imag_axis = [&](double k) {
    const GreensJet g = model.evaluate(cplx(0.0, k));
    const double k2 = k * k;
    return (k2 * omega0 * contract(coeffs.f0, g, Component::Complex) +
            k2 * contract(coeffs.f1, g, Component::Complex) -
            omega0 * contract(coeffs.f2, g, Component::Complex)) /
           (k2 + w2);
  };
  // Both sampled over [0, 4 omega0], the real one with the pole neighbourhood
  // excluded symmetrically.
  double tv_real = 0.0, tv_imag = 0.0;
  const double span = 4.0 * omega0;
  const double excl = 1e-3 * omega0;
  cplx prev_r = real_axis(span / samples), prev_i = imag_axis(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double x = span * i / samples;
    const cplx ci = imag_axis(x);
    tv_imag += std::abs(ci - prev_i);
    prev_i = ci;
    if (std::abs(x - omega0) < excl)
      continue;
    const cplx cr = real_axis(x);
    tv_real += std::abs(cr - prev_r);
    prev_r = cr;
  }
  return {tv_real, tv_imag};
}

std::vector<KKResidual> kk_residual(const std::vector<std::pair<double, cplx>> &samples,
                                    const std::vector<double> &test_omegas,
                                    KKTail tail) {
  const std::size_t n = samples.size();
  if (n < 4)
    throw InputError("Kramers-Kronig check needs at least four samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(samples[i].first > 0.0))
      throw InputError("Kramers-Kronig samples need positive frequencies");
    if (i > 0 && !(samples[i].first > samples[i - 1].first))
      throw InputError("Kramers-Kronig samples must be strictly increasing");
  }
  if (tail.kind == KKTail::Kind::PowerLaw && !(tail.exponent > 0.0))
    throw InputError("power-law tail exponent must be positive");

  auto im_at = [&](std::size_t i) { return samples[i].second.imag(); };
  auto interp = [&](double w, auto get) {
    auto it = std::lower_bound(samples.begin(), samples.end(), w,
                               [](const auto &s, double x) { return s.first < x; });
    const std::size_t j = static_cast<std::size_t>(it - samples.begin());
    const std::size_t i1 = std::clamp<std::size_t>(j, 1, n - 1);
    const double t = (w - samples[i1 - 1].first) / (samples[i1].first - samples[i1 - 1].first);
    return (1.0 - t) * get(i1 - 1) + t * get(i1);
  };

  std::vector<KKResidual> out;
  for (double w0 : test_omegas) {
    std::size_t below = 0, above = 0;
    for (const auto &s : samples) {
      if (s.first < w0)
        ++below;
      else if (s.first > w0)
        ++above;
    }
    if (below < 2 || above < 2)
      throw InputError("insufficient sample coverage around test frequency " +
                       std::to_string(w0));
    const double g0 = interp(w0, im_at);
    const double wN = samples.back().first;
    // Im G(w) w / (w^2 - w0^2) = [w Im G(w) - w0 Im G(w0)... ] split:
    //   h(w) = (w Im G(w) - w0 g0) / (w^2 - w0^2) is regular at w0, and
    //   P int_0^wN w0 g0 / (w^2 - w0^2) dw = (g0/2) ln((wN - w0)/(wN + w0)).
    auto h = [&](double w, double img) {
      const double d = w * w - w0 * w0;
      if (std::abs(d) < 1e-14 * w0 * w0)
        return 0.0; // replaced below by the neighbour average
      return (w * img - w0 * g0) / d;
    };
    // Trapezoid on [0, w1] using Im G(0) = 0, then over the samples.
    double integral = 0.0;
    double prev_w = 0.0, prev_h = h(0.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = samples[i].first;
      double hv = h(w, im_at(i));
      if (hv == 0.0 && std::abs(w - w0) < 1e-7 * w0 && i > 0 && i + 1 < n)
        hv = 0.5 * (h(samples[i - 1].first, im_at(i - 1)) +
                    h(samples[i + 1].first, im_at(i + 1)));
      integral += 0.5 * (w - prev_w) * (hv + prev_h);
      prev_w = w;
      prev_h = hv;
    }
    integral += 0.5 * g0 * std::log((wN - w0) / (wN + w0));
    if (tail.kind == KKTail::Kind::PowerLaw) {
      // int_wN^inf w ImG(wN)(wN/w)^p / (w^2 - w0^2) dw, expanded in (w0/w)^2.
      const double gN = im_at(n - 1);
      double term = 0.0, ratio = 1.0;
      for (int m = 0; m < 60; ++m) {
        const double p = tail.exponent + 2.0 * m;
        term += ratio / p;
        ratio *= (w0 / wN) * (w0 / wN);
        if (ratio < 1e-17)
          break;
      }
      integral += gN * term;
    }
    KKResidual r;
    r.omega = w0;
    r.re_sampled = interp(w0, [&](std::size_t i) { return samples[i].second.real(); });
    r.re_from_im = (2.0 / constants::pi) * integral;
    r.residual = r.re_sampled - r.re_from_im;
    r.relative = std::abs(r.residual) / std::max(std::abs(r.re_sampled), 1e-300);
    out.push_back(r);
  }
  return out;
}

} // namespace mqed
