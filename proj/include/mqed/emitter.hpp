#pragma once

#include "mqed/greens_jet.hpp"
#include "mqed/tensor.hpp"

#include <map>
#include <string>
#include <utility>

namespace mqed {

enum class Channel { ED = 0, MD = 1, EQ = 2 };

const char *channel_name(Channel c);

// Non-empty subset of {ED, MD, EQ}.
class ChannelSelector {
public:
  static ChannelSelector all() { return ChannelSelector(0b111); }
  static ChannelSelector only(Channel c) { return ChannelSelector(bit(c)); }
  // Parses "ed,md,eq" (any non-empty subset, case-insensitive).
  static ChannelSelector parse(const std::string &list);

  bool has(Channel c) const { return (mask_ & bit(c)) != 0; }
  ChannelSelector with(Channel c) const { return ChannelSelector(mask_ | bit(c)); }
  bool operator==(const ChannelSelector &) const = default;

private:
  explicit ChannelSelector(unsigned mask);
  static unsigned bit(Channel c) { return 1u << static_cast<unsigned>(c); }
  unsigned mask_;
};

// Two-level emitter with electric dipole d (C m), magnetic dipole m (J/T)
// and electric quadrupole Q (C m^2) transition moments <g|.|e>.
// Q enters exactly as supplied: no 1/2 factor and no trace removal.
struct MultipoleEmitter {
  Vec3 position{};
  double omega0 = 0.0; // rad/s
  CVec3 d{};
  CVec3 m{};
  ComplexTensor3x3 Q{};

  bool is_inert() const;
  // Nonzero channels of this emitter (empty selector is not representable,
  // so returns false when inert).
  bool has_channel(Channel c) const;
  void validate() const;
  // Throws InputError unless Q is real and symmetric to 1e-12 relative.
  void check_real_symmetric_Q() const;
  MultipoleEmitter restricted(ChannelSelector channels) const;
  MultipoleEmitter scaled(double lambda) const;
};

// Complex coefficients, one per Green's-jet entry.
struct JetCoefficients {
  ComplexTensor3x3 value;
  Tensor<cplx, 3> obs;   // (m, n, k): multiplies d/dr_k G_mn
  Tensor<cplx, 3> src;   // (m, n, l): multiplies d/dr'_l G_mn
  Tensor<cplx, 4> mixed; // (m, n, k, l)

  JetCoefficients &operator+=(const JetCoefficients &o);
  JetCoefficients &operator*=(cplx s);
  JetCoefficients real_part() const;
  JetCoefficients imag_part() const; // imaginary parts stored as real numbers
  bool is_zero() const;
  bool needs_first() const;
  bool needs_mixed() const;
};

// Sum over all entries of coefficient * (selected component of) jet entry.
cplx contract(const JetCoefficients &coeffs, const GreensJet &jet,
              Component component);

// D_m^{obs dagger}(w)[a] D_n^{src}(w)[b] = f0 + f1/w + f2/w^2, with
//   D_m(w) = d_m + sum_k (Q_mk + (i/w) sum_p eps_pkm m_p) d/dr_k.
struct FrequencyCoefficients {
  JetCoefficients f0, f1, f2;

  JetCoefficients at(double omega) const;
  JetCoefficients at(cplx omega) const;
  FrequencyCoefficients real_part() const;
  FrequencyCoefficients imag_part() const;
  FrequencyCoefficients &operator*=(cplx s);
};

FrequencyCoefficients moment_product(const MultipoleEmitter &a,
                                     const MultipoleEmitter &b,
                                     ChannelSelector channels_a = ChannelSelector::all(),
                                     ChannelSelector channels_b = ChannelSelector::all());

// sum_mn D_m^dagger(w)[a] D_n(w)[b] applied to the jet: a acts on the
// observation argument, b on the source argument. No physical prefactor.
// ImaginaryOnly jets admit only Component::Imag.
cplx bilinear_form(const MultipoleEmitter &a, const MultipoleEmitter &b,
                   const GreensJet &jet, double omega,
                   ChannelSelector channels_a = ChannelSelector::all(),
                   ChannelSelector channels_b = ChannelSelector::all(),
                   Component component = Component::Complex);

// R_mn and I_mn of the multi-emitter theory, including the 1/(hbar pi eps0 c^2)
// prefactor. Both are real operators stored with zero imaginary parts.
struct RmnImn {
  FrequencyCoefficients R;
  FrequencyCoefficients I;
  // R + i I
  FrequencyCoefficients combined() const;
};

RmnImn rmn_imn(const MultipoleEmitter &a, const MultipoleEmitter &b);

using ChannelPair = std::pair<Channel, Channel>;

// Ordered channel pairs (a-side channel, b-side channel) -> contribution.
// Values sum to the all-channel bilinear_form.
std::map<ChannelPair, cplx>
channel_decompose(const MultipoleEmitter &a, const MultipoleEmitter &b,
                  const GreensJet &jet, double omega,
                  Component component = Component::Complex);

} // namespace mqed
