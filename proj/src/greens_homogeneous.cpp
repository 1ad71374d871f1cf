#include "mqed/greens_homogeneous.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <array>
#include <cmath>
#include <string>

namespace mqed {

using constants::pi;

Medium Medium::constant(double n) {
  if (!(n >= 1.0) || !std::isfinite(n))
    throw InputError("constant refractive index must be finite and >= 1, got " +
                     std::to_string(n));
  Medium m;
  m.n_ = n;
  return m;
}

Medium Medium::dispersive(std::function<cplx(double)> n_of_omega) {
  if (!n_of_omega)
    throw InputError("dispersive medium needs an index model");
  Medium m;
  m.model_ = std::move(n_of_omega);
  return m;
}

cplx Medium::index(double omega) const {
  return model_ ? model_(omega) : cplx(n_, 0.0);
}

cplx Medium::wavenumber(double omega) const {
  return omega / constants::c * index(omega);
}

cplx Medium::wavenumber(cplx omega) const {
  if (model_)
    throw InputError("complex frequencies need a constant-index medium");
  return omega / constants::c * n_;
}

namespace {

// Integer power by repeated multiplication. Keeps exact zeros in the
// imaginary part for real k, which std::pow(complex, int) does not promise.
cplx ipow(cplx z, int p) {
  cplx r(1.0, 0.0);
  if (p < 0) {
    z = cplx(1.0, 0.0) / z;
    p = -p;
  }
  for (int i = 0; i < p; ++i)
    r *= z;
  return r;
}

cplx ipow_i(int p) {
  static constexpr std::array<cplx, 4> table{cplx(1, 0), cplx(0, 1),
                                             cplx(-1, 0), cplx(0, -1)};
  return table[static_cast<std::size_t>(((p % 4) + 4) % 4)];
}

// A radial profile F(R) = e^{ikR}/(4 pi) * sum_n c_n R^{-n}, with
// c_n = chat_n k^{shift - n}. Evaluates F, F1 = F'/R and
// F2 = (F'' - F'/R)/R^2 so that
//   d_a F = F1 R_a,   d_a d_b F = F1 delta_ab + F2 R_a R_b.
struct RadialValues {
  cplx F, F1, F2;
};

struct Profile {
  int lowest;                 // smallest n with a nonzero coefficient
  std::array<cplx, 3> chat;   // chat_{lowest}, chat_{lowest+1}, chat_{lowest+2}
  int shift;                  // c_n = chat_n * k^{shift - n}
};

// f: delta_ij part, 1/R + i/(k R^2) - 1/(k^2 R^3)
constexpr int kSeriesOrder = 44;
const Profile kProfileF{1, {cplx(1, 0), cplx(0, 1), cplx(-1, 0)}, 1};
// g: R_i R_j part, -1/R^3 - 3i/(k R^4) + 3/(k^2 R^5)
const Profile kProfileG{3, {cplx(-1, 0), cplx(0, -3), cplx(3, 0)}, 3};

// Laurent series about R = 0 in x = kR, with the k-dependence factored out:
//   F = (k^shift/4pi) sum_m s_m x^m,   s_m = sum_n chat_n i^{m+n}/(m+n)!.
// F1 and F2 pick up k^2 and k^4. Analytic cancellations among the singular
// terms are exact in floating point because every summand is a signed
// dyadic-or-rational real/imag part.
RadialValues radial_series(const Profile &p, cplx k, double R) {
  const int top = p.lowest + 2;
  RadialValues out{};
  double fact[kSeriesOrder + 8];
  fact[0] = 1.0;
  for (int j = 1; j < kSeriesOrder + 8; ++j)
    fact[j] = fact[j - 1] * j;
  const cplx x = k * R, inv_x2 = 1.0 / (x * x);
  cplx xm = ipow(x, -top) / x; // x^(m-1), advanced at the top of the loop
  for (int m = -top; m <= kSeriesOrder; ++m) {
    xm *= x;
    cplx s(0.0, 0.0);
    for (int n = p.lowest; n <= top; ++n) {
      const int j = m + n;
      if (j < 0)
        continue;
      s += p.chat[static_cast<std::size_t>(n - p.lowest)] * ipow_i(j) / fact[j];
    }
    if (s == cplx(0.0, 0.0))
      continue;
    out.F += s * xm;
    if (m != 0)
      out.F1 += s * (static_cast<double>(m) * xm * inv_x2);
    if (m != 0 && m != 2)
      out.F2 += s * (static_cast<double>(m) * (m - 2) * xm * inv_x2 * inv_x2);
  }
  const cplx ks = ipow(k, p.shift) / (4.0 * pi);
  out.F *= ks;
  out.F1 *= ks * k * k;
  out.F2 *= ks * k * k * k * k;
  return out;
}

// Closed form for |kR| not small: polynomials in 1/R times e^{ikR}.
RadialValues radial_closed(const Profile &p, cplx k, double R) {
  constexpr int N = 12;
  std::array<cplx, N> c{}, q{}, s{}, u{}, v{};
  for (int n = p.lowest; n <= p.lowest + 2; ++n)
    c[static_cast<std::size_t>(n)] =
        p.chat[static_cast<std::size_t>(n - p.lowest)] * ipow(k, p.shift - n);
  const cplx ik(0.0 - k.imag(), k.real());
  // d/dR [c_n R^-n e^{ikR}] = e^{ikR} (ik c_n R^-n - n c_n R^-(n+1))
  auto derive = [&](const std::array<cplx, N> &in, std::array<cplx, N> &out) {
    for (int n = 0; n + 1 < N; ++n) {
      out[static_cast<std::size_t>(n)] += ik * in[static_cast<std::size_t>(n)];
      out[static_cast<std::size_t>(n + 1)] -=
          static_cast<double>(n) * in[static_cast<std::size_t>(n)];
    }
  };
  derive(c, q);
  for (int n = 0; n + 1 < N; ++n)
    s[static_cast<std::size_t>(n + 1)] = q[static_cast<std::size_t>(n)];
  derive(q, u);
  for (int n = 0; n + 2 < N; ++n)
    v[static_cast<std::size_t>(n + 2)] =
        u[static_cast<std::size_t>(n)] - s[static_cast<std::size_t>(n)];
  auto eval = [R](const std::array<cplx, N> &poly) {
    cplx acc(0.0, 0.0);
    const double x = 1.0 / R;
    for (int n = N - 1; n >= 0; --n)
      acc = acc * x + poly[static_cast<std::size_t>(n)];
    return acc;
  };
  const cplx phase = std::exp(cplx(0.0, 1.0) * k * R) / (4.0 * pi);
  return {phase * eval(c), phase * eval(s), phase * eval(v)};
}

RadialValues radial(const Profile &p, cplx k, double R) {
  return std::abs(k * R) < 1.0 ? radial_series(p, k, R)
                               : radial_closed(p, k, R);
}

void require_nonzero(const Vec3 &R) {
  if (norm(R) == 0.0)
    throw InputError("homogeneous Green's tensor is singular at R = 0; use "
                     "coincident_im_jet for the coincident limit");
}

double kron(int a, int b) { return a == b ? 1.0 : 0.0; }

} // namespace

ComplexTensor3x3 eval_homogeneous_k(const Vec3 &R, cplx k) {
  require_nonzero(R);
  const double r = norm(R);
  const auto f = radial(kProfileF, k, r);
  const auto g = radial(kProfileG, k, r);
  ComplexTensor3x3 G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      G(i, j) = f.F * kron(i, j) + g.F * (R[i] * R[j]);
  return G;
}

ComplexTensor3x3 eval_homogeneous(const Vec3 &R, double omega,
                                  const Medium &medium) {
  if (!(omega > 0.0))
    throw InputError("omega must be positive");
  return eval_homogeneous_k(R, medium.wavenumber(omega));
}

GreensJet eval_homogeneous_jet_k(const Vec3 &r, const Vec3 &r_src, cplx k) {
  const Vec3 R = r - r_src;
  require_nonzero(R);
  const double rr = norm(R);
  const auto f = radial(kProfileF, k, rr);
  const auto g = radial(kProfileG, k, rr);

  GreensJet jet;
  jet.part = JetPart::Full;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double dij = kron(i, j);
      const double RiRj = R[i] * R[j];
      jet.value(i, j) = f.F * dij + g.F * RiRj;
      for (int a = 0; a < 3; ++a) {
        const cplx dA = f.F1 * (R[a] * dij) + g.F1 * (R[a] * RiRj) +
                        g.F * (kron(a, i) * R[j] + kron(a, j) * R[i]);
        jet.d_obs(i, j, a) = dA;
        jet.d_src(i, j, a) = -dA;
        for (int b = 0; b < 3; ++b) {
          const double dab = kron(a, b);
          const cplx dAB =
              (f.F1 * dab + f.F2 * (R[a] * R[b])) * dij +
              (g.F1 * dab + g.F2 * (R[a] * R[b])) * RiRj +
              g.F1 * (R[a] * (kron(b, i) * R[j] + kron(b, j) * R[i])) +
              g.F1 * (R[b] * (kron(a, i) * R[j] + kron(a, j) * R[i])) +
              g.F * (kron(a, i) * kron(b, j) + kron(a, j) * kron(b, i));
          jet.d_mixed(i, j, a, b) = -dAB;
        }
      }
    }
  return jet;
}

GreensJet eval_homogeneous_jet(const Vec3 &r, const Vec3 &r_src, double omega,
                               const Medium &medium) {
  if (!(omega > 0.0))
    throw InputError("omega must be positive");
  return eval_homogeneous_jet_k(r, r_src, medium.wavenumber(omega));
}

namespace {

double real_wavenumber(double omega, const Medium &medium) {
  if (!(omega > 0.0))
    throw InputError("omega must be positive");
  const cplx n = medium.index(omega);
  if (std::abs(n.imag()) > 1e-12 * std::abs(n))
    throw InputError("coincident limits need a real refractive index "
                     "(transition far-detuned from medium resonances)");
  return omega / constants::c * n.real();
}

} // namespace

GreensJet coincident_im_jet(double omega, const Medium &medium) {
  const double k = real_wavenumber(omega, medium);
  const double k3 = k * k * k;
  GreensJet jet;
  jet.part = JetPart::ImaginaryOnly;
  for (int j = 0; j < 3; ++j) {
    jet.value(j, j) = cplx(0.0, k / (6.0 * pi));
    for (int m = 0; m < 3; ++m)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          const double v =
              k3 / (15.0 * pi) * kron(j, m) * kron(p, q) -
              k3 / (60.0 * pi) * (kron(p, j) * kron(q, m) + kron(p, m) * kron(q, j));
          jet.d_mixed(j, m, p, q) = cplx(0.0, v);
        }
  }
  return jet;
}

RealTensor3x3 small_R_series_im(const Vec3 &R, double omega,
                                const Medium &medium) {
  const double k = real_wavenumber(omega, medium);
  if (!(k * norm(R) < 0.5))
    throw InputError("small-R series is only trusted for k|R| < 0.5");
  const double k3 = k * k * k;
  const double R2 = R[0] * R[0] + R[1] * R[1] + R[2] * R[2];
  RealTensor3x3 out;
  for (int j = 0; j < 3; ++j)
    for (int l = 0; l < 3; ++l)
      out(j, l) = (k / (6.0 * pi) - k3 / (30.0 * pi) * R2) * kron(j, l) +
                  k3 / (60.0 * pi) * R[j] * R[l];
  return out;
}

RealTensor3x3 im_homogeneous(const Vec3 &R, double omega, const Medium &medium) {
  const double k = real_wavenumber(omega, medium);
  RealTensor3x3 out;
  if (norm(R) == 0.0) {
    for (int j = 0; j < 3; ++j)
      out(j, j) = k / (6.0 * pi);
    return out;
  }
  const auto G = eval_homogeneous_k(R, cplx(k, 0.0));
  for (std::size_t i = 0; i < out.size; ++i)
    out.data[i] = G.data[i].imag();
  return out;
}

GreensJet GreensJet::imaginary_part() const {
  GreensJet out = *this;
  auto strip = [](auto &t) {
    for (auto &x : t.data)
      x = cplx(0.0, x.imag());
  };
  strip(out.value);
  strip(out.d_obs);
  strip(out.d_src);
  strip(out.d_mixed);
  out.part = JetPart::ImaginaryOnly;
  return out;
}

} // namespace mqed
