#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace mqed {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using CVec3 = std::array<cplx, 3>;

constexpr std::size_t pow3(int rank) {
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i)
    n *= 3;
  return n;
}

// Dense Cartesian tensor of the given rank, every index running over x,y,z.
// Storage is row-major: the last index varies fastest.
template <class T, int Rank> struct Tensor {
  static constexpr std::size_t size = pow3(Rank);
  std::array<T, size> data{};

  template <class... I> T &operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data[flat(idx...)];
  }
  template <class... I> const T &operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data[flat(idx...)];
  }

  template <class... I> static constexpr std::size_t flat(I... idx) {
    std::size_t f = 0;
    ((f = f * 3 + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  Tensor &operator+=(const Tensor &o) {
    for (std::size_t i = 0; i < size; ++i)
      data[i] += o.data[i];
    return *this;
  }
  Tensor &operator*=(const T &s) {
    for (auto &x : data)
      x *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor &b) { return a += b; }
  friend Tensor operator*(Tensor a, const T &s) { return a *= s; }
  bool operator==(const Tensor &) const = default;
};

using ComplexTensor3x3 = Tensor<cplx, 2>;
using RealTensor3x3 = Tensor<double, 2>;

inline double norm(const Vec3 &v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}
inline Vec3 operator-(const Vec3 &a, const Vec3 &b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline Vec3 operator+(const Vec3 &a, const Vec3 &b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Vec3 operator*(double s, const Vec3 &a) {
  return {s * a[0], s * a[1], s * a[2]};
}

// Levi-Civita symbol.
constexpr int levi_civita(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

template <class T, int Rank> double max_abs(const Tensor<T, Rank> &t) {
  double m = 0.0;
  for (const auto &x : t.data)
    m = std::max(m, std::abs(x));
  return m;
}

} // namespace mqed
