#include "mqed/rates.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <cmath>
#include <exception>

namespace mqed {

using namespace constants;

namespace {

constexpr Channel kChannels[3] = {Channel::ED, Channel::MD, Channel::EQ};

double norm2(const CVec3 &v) {
  return std::norm(v[0]) + std::norm(v[1]) + std::norm(v[2]);
}

// R + i I, i.e. the moment product with the 1/(hbar pi eps0 c^2) prefactor.
FrequencyCoefficients coupling_coefficients(const MultipoleEmitter &a,
                                            const MultipoleEmitter &b) {
  FrequencyCoefficients p = moment_product(a, b);
  p *= 1.0 / (hbar * pi * epsilon0 * c * c);
  return p;
}

bool is_zero(const FrequencyCoefficients &p) {
  return p.f0.is_zero() && p.f1.is_zero() && p.f2.is_zero();
}

} // namespace

RateReport emission_rate(const MultipoleEmitter &e, const GreensJet &jet) {
  e.validate();
  const double w = e.omega0;
  const double pref = 2.0 / (hbar * epsilon0) * (w * w) / (c * c);
  RateReport rep;
  rep.omega = w;
  const auto parts = channel_decompose(e, e, jet, w, Component::Imag);
  cplx total(0.0);
  double magnitude = 0.0;
  for (const auto &[pair, v] : parts) {
    rep.gamma_by_channel_pair[pair] = pref * v.real();
    total += pref * v;
    magnitude += pref * std::abs(v);
  }
  rep.gamma_total = total.real();
  rep.imag_residual = std::abs(total.imag());
  if (!std::isfinite(rep.gamma_total))
    throw NumericalError("emission rate is not finite");
  if (rep.gamma_total < -1e-12 * magnitude)
    throw InputError("emission rate is negative; the Green data violate positivity");
  return rep;
}

double FreeSpaceRates::channel(Channel ch) const {
  switch (ch) {
  case Channel::ED:
    return ed;
  case Channel::MD:
    return md;
  case Channel::EQ:
    return eq;
  }
  return 0.0;
}

FreeSpaceRates free_space_rates(const MultipoleEmitter &e, double n, double omega) {
  if (!(n >= 1.0) || !std::isfinite(n))
    throw InputError("free-space rates need a real refractive index n >= 1");
  if (!(omega > 0.0) || !std::isfinite(omega))
    throw InputError("frequency must be positive");
  double q2 = 0.0;
  for (const auto &x : e.Q.data)
    q2 += std::norm(x);
  const double w3 = omega * omega * omega;
  const double c3 = c * c * c, c5 = c3 * c * c;
  FreeSpaceRates r;
  r.ed = n * w3 * norm2(e.d) / (3.0 * pi * hbar * epsilon0 * c3);
  r.md = n * n * n * w3 * norm2(e.m) / (3.0 * pi * hbar * epsilon0 * c5);
  r.eq = n * n * n * w3 * omega * omega * q2 / (10.0 * pi * hbar * epsilon0 * c5);
  if (!std::isfinite(r.total()))
    throw NumericalError("free-space rate is not finite", r.total());
  return r;
}

const char *method_name(IntegralMethod m) {
  switch (m) {
  case IntegralMethod::PV:
    return "pv";
  case IntegralMethod::ImaginaryAxis:
    return "imaginary-axis";
  case IntegralMethod::OnShell:
    return "on-shell";
  }
  return "?";
}

IntegralMethod parse_method(const std::string &s) {
  if (s == "pv")
    return IntegralMethod::PV;
  if (s == "imaginary-axis" || s == "imag")
    return IntegralMethod::ImaginaryAxis;
  if (s == "on-shell")
    return IntegralMethod::OnShell;
  throw InputError("unknown method '" + s + "' (expected pv, imaginary-axis, on-shell)");
}

LambShiftReport lamb_shift(const MultipoleEmitter &e, const SpectralGreenModel &scattered,
                           IntegralMethod method, const QuadratureOptions &opt) {
  e.validate();
  LambShiftReport rep;
  rep.method = method;
  const FrequencyCoefficients p = coupling_coefficients(e, e);
  if (is_zero(p))
    return rep;
  QuadResult q;
  switch (method) {
  case IntegralMethod::PV:
    q = real_axis_pv_form(scattered, p, e.omega0, opt);
    break;
  case IntegralMethod::ImaginaryAxis:
    q = imaginary_axis_form(scattered, p, e.omega0, opt);
    break;
  case IntegralMethod::OnShell:
    throw InputError("the Lamb shift needs the pv or imaginary-axis method");
  }
  rep.delta = q.value.real();
  rep.imag_residual = std::abs(q.value.imag());
  rep.error = q.error;
  return rep;
}

double mean_frequency(const MultipoleEmitter &a, const MultipoleEmitter &b,
                      double max_detuning_ratio) {
  const double wbar = 0.5 * (a.omega0 + b.omega0);
  if (std::abs(a.omega0 - b.omega0) > max_detuning_ratio * wbar)
    throw InputError("transition frequencies differ by more than the allowed "
                     "fraction of their mean");
  return wbar;
}

cplx collective_rate(const MultipoleEmitter &a, const MultipoleEmitter &b,
                     const GreensJet &jet, double omega_bar) {
  if (!(omega_bar > 0.0))
    throw InputError("mean frequency must be positive");
  const FrequencyCoefficients p = coupling_coefficients(a, b);
  if (is_zero(p))
    return 0.0;
  return 2.0 * pi * omega_bar * omega_bar *
         contract(p.at(omega_bar), jet, Component::Imag);
}

CouplingReport coupling_strength(const MultipoleEmitter &a, const MultipoleEmitter &b,
                                 const SpectralGreenModel &model, double omega_bar,
                                 const CouplingOptions &opt) {
  a.validate();
  b.validate();
  CouplingReport rep;
  rep.omega_bar = omega_bar;
  rep.method = opt.method;
  const FrequencyCoefficients p = coupling_coefficients(a, b);
  if (is_zero(p))
    return rep;
  const GreensJet on_shell = model.evaluate(cplx(omega_bar, 0.0));
  const JetCoefficients at = p.at(omega_bar);
  rep.gamma_cross =
      2.0 * pi * omega_bar * omega_bar * contract(at, on_shell, Component::Imag);
  switch (opt.method) {
  case IntegralMethod::PV: {
    const QuadResult q = real_axis_pv_form(model, p, omega_bar, opt.quad);
    rep.xi = q.value;
    rep.xi_error = q.error;
    break;
  }
  case IntegralMethod::ImaginaryAxis: {
    const QuadResult q = imaginary_axis_form(model, p, omega_bar, opt.quad);
    rep.xi = q.value;
    rep.xi_error = q.error;
    break;
  }
  case IntegralMethod::OnShell:
    if (on_shell.part == JetPart::ImaginaryOnly)
      throw InputError("on-shell coupling needs Re G, which is unavailable "
                       "(coincident or grid data)");
    rep.xi = pi * omega_bar * omega_bar * contract(at, on_shell, Component::Real);
    break;
  }
  if (!std::isfinite(std::abs(rep.xi)) || !std::isfinite(std::abs(rep.gamma_cross)))
    throw NumericalError("coupling strength is not finite");
  rep.xi_langevin = rep.xi.real() + 0.5 * rep.gamma_cross.imag();
  rep.gamma_langevin = rep.gamma_cross.real() - 2.0 * rep.xi.imag();
  return rep;
}

CouplingReport couple(const MultipoleEmitter &a, const MultipoleEmitter &b,
                      const Environment &env, const CouplingOptions &opt) {
  const double wbar = mean_frequency(a, b, opt.max_detuning_ratio);
  if (!env.supports_frequency_integrals() && opt.method != IntegralMethod::OnShell)
    throw InputError(std::string("environment '") + env.kind() +
                     "' does not decay at large frequency; use the on-shell method");
  return coupling_strength(a, b, env.at(a.position, b.position), wbar, opt);
}

EnhancementMap enhancement_map(const TensorGrid &grid, const MultipoleEmitter &e,
                               const MapOptions &opt) {
  e.validate();
  if (std::abs(grid.frequency - e.omega0) > 1e-6 * e.omega0)
    throw InputError("grid frequency does not match the emitter transition "
                     "frequency (1e-6 relative)");
  const MultipoleEmitter er = e.restricted(opt.channels);
  EnhancementMap map;
  for (Channel ch : kChannels)
    if (er.has_channel(ch))
      map.channels.push_back(ch);
  if (map.channels.empty())
    throw InputError("emitter has no nonzero moments in the selected channels");
  map.free_space = free_space_rates(er, 1.0, er.omega0);
  for (Channel ch : map.channels)
    map.gamma_fs += map.free_space.channel(ch);

  const std::size_t n = grid.axes.node_count();
  map.nodes.resize(n);
  std::exception_ptr failure;
  auto body = [&](std::size_t i) {
    try {
      MapNode &node = map.nodes[i];
      node.position = grid.axes.node(i);
      MultipoleEmitter at = er;
      at.position = node.position;
      node.rate = emission_rate(at, jet_at(grid, node.position));
      node.enhancement_total = node.rate.gamma_total / map.gamma_fs;
      for (const auto &[pair, g] : node.rate.gamma_by_channel_pair)
        node.normalized[pair] = g / map.gamma_fs;
      for (Channel ch : map.channels)
        node.enhancement_channel[ch] =
            node.rate.gamma_by_channel_pair.at({ch, ch}) / map.free_space.channel(ch);
    } catch (...) {
#pragma omp critical(mqed_map_failure)
      if (!failure)
        failure = std::current_exception();
    }
  };
  if (opt.parallel) {
    const int threads = opt.workers > 0 ? opt.workers : 0;
    if (threads > 0) {
#pragma omp parallel for schedule(static) num_threads(threads)
      for (long i = 0; i < static_cast<long>(n); ++i)
        body(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(static)
      for (long i = 0; i < static_cast<long>(n); ++i)
        body(static_cast<std::size_t>(i));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i)
      body(i);
  }
  if (failure)
    std::rethrow_exception(failure);
  return map;
}

} // namespace mqed
