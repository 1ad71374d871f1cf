#pragma once

#include "mqed/constants.hpp"
#include "mqed/emitter.hpp"
#include "mqed/greens_grid.hpp"
#include "mqed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace testing {

using mqed::cplx;
using mqed::Vec3;

constexpr double kOptical = 2.0 * mqed::constants::pi * 384e12;

inline double rel(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}
inline double rel(cplx a, cplx b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

template <class T, int R>
double max_diff(const mqed::Tensor<T, R> &a, const mqed::Tensor<T, R> &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size; ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Dyadic Green's tensor written out directly in long double:
//   e^{ikR}/(4 pi R) [(1 + i/kR - 1/(kR)^2) 1 + (-1 - 3i/kR + 3/(kR)^2) RR/R^2].
// Independent of the library's series / polynomial evaluation.
inline mqed::ComplexTensor3x3 green_oracle(const Vec3 &R, double k) {
  using L = long double;
  using C = std::complex<L>;
  const L r = std::sqrt(L(R[0]) * R[0] + L(R[1]) * R[1] + L(R[2]) * R[2]);
  const L x = L(k) * r;
  const C ii(0, 1);
  const C pre = std::exp(ii * x) / (4 * 3.14159265358979323846264338327950288L * r);
  const C a = C(1) + ii / x - C(1) / (x * x);
  const C b = C(-1) - L(3) * ii / x + C(3) / (x * x);
  mqed::ComplexTensor3x3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const C v = pre * ((i == j ? a : C(0)) + b * (L(R[i]) * L(R[j]) / (r * r)));
      g(i, j) = cplx(double(v.real()), double(v.imag()));
    }
  return g;
}

// Im G from spherical Bessel Taylor series, no cancellation at small kR:
//   Im G = k/4pi [(j0 - j1/x) 1 + (3 j1/x - j0) RR/R^2].
inline mqed::RealTensor3x3 im_green_bessel(const Vec3 &R, double k) {
  using L = long double;
  const L r = std::sqrt(L(R[0]) * R[0] + L(R[1]) * R[1] + L(R[2]) * R[2]);
  const L x2 = L(k) * r * L(k) * r;
  L j0 = 0, j1x = 0, p = 1, f = 1; // p = (-x^2)^m, f = (2m+1)!
  for (int m = 0; m < 30; ++m) {
    j0 += p / f;
    j1x += p * L(2 * (m + 1)) / (f * (2 * m + 2) * (2 * m + 3));
    p *= -x2;
    f *= L(2 * m + 2) * (2 * m + 3);
  }
  const L pre = L(k) / (4 * 3.14159265358979323846264338327950288L);
  mqed::RealTensor3x3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const L rr = r > 0 ? L(R[i]) * L(R[j]) / (r * r) : 0;
      g(i, j) = double(pre * ((i == j ? j0 - j1x : L(0)) + (3 * j1x - j0) * rr));
    }
  return g;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(unsigned long long seed) : gen(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
  double normal() { return std::normal_distribution<double>()(gen); }
  cplx cnormal() { return {normal(), normal()}; }
  Vec3 vec(double scale) { return {scale * normal(), scale * normal(), scale * normal()}; }
};

// Random complex moments; Q symmetric and traceless.
inline mqed::MultipoleEmitter random_emitter(Rng &rng, double omega) {
  namespace c = mqed::constants;
  mqed::MultipoleEmitter e;
  e.omega0 = omega;
  for (int i = 0; i < 3; ++i) {
    e.d[i] = c::dipole_au * rng.cnormal();
    e.m[i] = c::mu_B * rng.cnormal();
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      e.Q(i, j) = e.Q(j, i) = 10.0 * c::quadrupole_au * rng.cnormal();
  const cplx tr = (e.Q(0, 0) + e.Q(1, 1) + e.Q(2, 2)) / 3.0;
  for (int i = 0; i < 3; ++i)
    e.Q(i, i) -= tr;
  return e;
}

inline mqed::MultipoleEmitter dipole_emitter(Vec3 d, double omega, Vec3 pos = {}) {
  mqed::MultipoleEmitter e;
  e.omega0 = omega;
  e.position = pos;
  for (int i = 0; i < 3; ++i)
    e.d[i] = d[i];
  return e;
}

inline mqed::GridAxes plane_axes(int nx, int ny, double spacing, double z = 0.0) {
  mqed::GridAxes a;
  for (int i = 0; i < nx; ++i)
    a.coords[0].push_back(i * spacing);
  for (int i = 0; i < ny; ++i)
    a.coords[1].push_back(i * spacing);
  a.coords[2] = {z};
  a.fixed[2] = true;
  return a;
}

// Least-squares slope of log|y| against log x.
inline double loglog_slope(const std::vector<double> &x, const std::vector<double> &y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testing
