#pragma once

#include "mqed/tensor.hpp"

namespace mqed {

enum class JetPart { Full, ImaginaryOnly };

// Green's tensor G_ij(r, r') at one point pair together with the derivatives
// the multipolar rates need. Indices: value(i,j); d_obs(i,j,k) = d/dr_k;
// d_src(i,j,l) = d/dr'_l; d_mixed(i,j,k,l) = d/dr_k d/dr'_l. SI units
// (m^-1, m^-2, m^-3).
//
// For JetPart::ImaginaryOnly the real parts carry no information and are
// kept at zero.
struct GreensJet {
  ComplexTensor3x3 value;
  Tensor<cplx, 3> d_obs;
  Tensor<cplx, 3> d_src;
  Tensor<cplx, 4> d_mixed;
  JetPart part = JetPart::Full;
  bool has_first = true;
  bool has_mixed = true;

  // Keeps only imaginary parts (stored as purely imaginary entries).
  GreensJet imaginary_part() const;
};

// Which component of the jet entries a contraction sees.
enum class Component { Real, Imag, Complex };

} // namespace mqed
