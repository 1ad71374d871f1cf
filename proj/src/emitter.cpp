#include "mqed/emitter.hpp"
#include "mqed/constants.hpp"
#include "mqed/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace mqed {

const char *channel_name(Channel c) {
  switch (c) {
  case Channel::ED:
    return "ED";
  case Channel::MD:
    return "MD";
  case Channel::EQ:
    return "EQ";
  }
  return "?";
}

ChannelSelector::ChannelSelector(unsigned mask) : mask_(mask) {
  if (mask_ == 0)
    throw InputError("channel selection must not be empty");
}

ChannelSelector ChannelSelector::parse(const std::string &list) {
  unsigned mask = 0;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t;
    for (char ch : item)
      if (!std::isspace(static_cast<unsigned char>(ch)))
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (t == "ed")
      mask |= bit(Channel::ED);
    else if (t == "md")
      mask |= bit(Channel::MD);
    else if (t == "eq")
      mask |= bit(Channel::EQ);
    else
      throw InputError("unknown channel '" + item + "' (expected ed, md, eq)");
  }
  return ChannelSelector(mask);
}

namespace {

bool all_zero(const CVec3 &v) {
  return std::all_of(v.begin(), v.end(), [](cplx x) { return x == cplx(0.0); });
}
template <class T> bool all_zero(const T &t) {
  return std::all_of(t.data.begin(), t.data.end(),
                     [](cplx x) { return x == cplx(0.0); });
}

} // namespace

bool MultipoleEmitter::has_channel(Channel c) const {
  switch (c) {
  case Channel::ED:
    return !all_zero(d);
  case Channel::MD:
    return !all_zero(m);
  case Channel::EQ:
    return !all_zero(Q);
  }
  return false;
}

bool MultipoleEmitter::is_inert() const {
  return !has_channel(Channel::ED) && !has_channel(Channel::MD) &&
         !has_channel(Channel::EQ);
}

void MultipoleEmitter::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0))
    throw InputError("emitter transition frequency must be positive");
  auto finite = [](cplx x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); };
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(position[i]) || !finite(d[i]) || !finite(m[i]))
      throw InputError("emitter has non-finite position or moments");
    for (int j = 0; j < 3; ++j)
      if (!finite(Q(i, j)))
        throw InputError("emitter has non-finite quadrupole moment");
  }
}

void MultipoleEmitter::check_real_symmetric_Q() const {
  const double scale = std::max(max_abs(Q), 1e-300);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (std::abs(Q(i, j).imag()) > 1e-12 * scale)
        throw InputError("Q declared real but has imaginary entries");
      if (std::abs(Q(i, j) - Q(j, i)) > 1e-12 * scale)
        throw InputError("Q declared symmetric but Q_ij != Q_ji");
    }
}

MultipoleEmitter MultipoleEmitter::restricted(ChannelSelector channels) const {
  MultipoleEmitter out = *this;
  if (!channels.has(Channel::ED))
    out.d = {};
  if (!channels.has(Channel::MD))
    out.m = {};
  if (!channels.has(Channel::EQ))
    out.Q = {};
  return out;
}

MultipoleEmitter MultipoleEmitter::scaled(double lambda) const {
  MultipoleEmitter out = *this;
  for (auto &x : out.d)
    x *= lambda;
  for (auto &x : out.m)
    x *= lambda;
  out.Q *= cplx(lambda);
  return out;
}

JetCoefficients &JetCoefficients::operator+=(const JetCoefficients &o) {
  value += o.value;
  obs += o.obs;
  src += o.src;
  mixed += o.mixed;
  return *this;
}

JetCoefficients &JetCoefficients::operator*=(cplx s) {
  value *= s;
  obs *= s;
  src *= s;
  mixed *= s;
  return *this;
}

namespace {

template <class F> JetCoefficients map_entries(const JetCoefficients &c, F f) {
  JetCoefficients out = c;
  auto apply = [&](auto &t) {
    for (auto &x : t.data)
      x = f(x);
  };
  apply(out.value);
  apply(out.obs);
  apply(out.src);
  apply(out.mixed);
  return out;
}

} // namespace

JetCoefficients JetCoefficients::real_part() const {
  return map_entries(*this, [](cplx x) { return cplx(x.real(), 0.0); });
}

JetCoefficients JetCoefficients::imag_part() const {
  return map_entries(*this, [](cplx x) { return cplx(x.imag(), 0.0); });
}

bool JetCoefficients::is_zero() const {
  return all_zero(value) && all_zero(obs) && all_zero(src) && all_zero(mixed);
}
bool JetCoefficients::needs_first() const { return !all_zero(obs) || !all_zero(src); }
bool JetCoefficients::needs_mixed() const { return !all_zero(mixed); }

cplx contract(const JetCoefficients &coeffs, const GreensJet &jet,
              Component component) {
  if (jet.part == JetPart::ImaginaryOnly && component != Component::Imag)
    throw InputError("jet carries only imaginary parts; real or complex "
                     "contraction requested");
  if (coeffs.needs_first() && !jet.has_first)
    throw InputError("first-derivative Green data required by MD/EQ channels "
                     "is missing");
  if (coeffs.needs_mixed() && !jet.has_mixed)
    throw InputError("mixed second-derivative Green data required by MD/EQ "
                     "channels is missing");
  auto pick = [component](cplx x) -> cplx {
    switch (component) {
    case Component::Real:
      return x.real();
    case Component::Imag:
      return x.imag();
    case Component::Complex:
      break;
    }
    return x;
  };
  cplx acc(0.0, 0.0);
  auto sum = [&](const auto &c, const auto &g) {
    for (std::size_t i = 0; i < c.size; ++i)
      if (c.data[i] != cplx(0.0))
        acc += c.data[i] * pick(g.data[i]);
  };
  sum(coeffs.value, jet.value);
  if (jet.has_first) {
    sum(coeffs.obs, jet.d_obs);
    sum(coeffs.src, jet.d_src);
  }
  if (jet.has_mixed)
    sum(coeffs.mixed, jet.d_mixed);
  return acc;
}

JetCoefficients FrequencyCoefficients::at(double omega) const {
  return at(cplx(omega, 0.0));
}

JetCoefficients FrequencyCoefficients::at(cplx omega) const {
  JetCoefficients out = f0;
  JetCoefficients t1 = f1;
  t1 *= 1.0 / omega;
  JetCoefficients t2 = f2;
  t2 *= 1.0 / (omega * omega);
  out += t1;
  out += t2;
  return out;
}

FrequencyCoefficients FrequencyCoefficients::real_part() const {
  return {f0.real_part(), f1.real_part(), f2.real_part()};
}

FrequencyCoefficients FrequencyCoefficients::imag_part() const {
  return {f0.imag_part(), f1.imag_part(), f2.imag_part()};
}

FrequencyCoefficients &FrequencyCoefficients::operator*=(cplx s) {
  f0 *= s;
  f1 *= s;
  f2 *= s;
  return *this;
}

namespace {

// Derivative coefficients of one generalized moment, split by powers of 1/w:
// c_mk(w) = c0_mk + c1_mk / w.
struct MomentSide {
  CVec3 value{};
  ComplexTensor3x3 c0{}, c1{};
};

// Observation side enters conjugated: conj(d), conj(Q) - (i/w) eps conj(m).
MomentSide obs_side(const MultipoleEmitter &e, ChannelSelector ch) {
  MomentSide s;
  const cplx I(0.0, 1.0);
  for (int mm = 0; mm < 3; ++mm) {
    if (ch.has(Channel::ED))
      s.value[mm] = std::conj(e.d[mm]);
    for (int k = 0; k < 3; ++k) {
      if (ch.has(Channel::EQ))
        s.c0(mm, k) = std::conj(e.Q(mm, k));
      if (ch.has(Channel::MD))
        for (int p = 0; p < 3; ++p)
          if (int eps = levi_civita(p, k, mm))
            s.c1(mm, k) += -I * static_cast<double>(eps) * std::conj(e.m[p]);
    }
  }
  return s;
}

MomentSide src_side(const MultipoleEmitter &e, ChannelSelector ch) {
  MomentSide s;
  const cplx I(0.0, 1.0);
  for (int n = 0; n < 3; ++n) {
    if (ch.has(Channel::ED))
      s.value[n] = e.d[n];
    for (int l = 0; l < 3; ++l) {
      if (ch.has(Channel::EQ))
        s.c0(n, l) = e.Q(n, l);
      if (ch.has(Channel::MD))
        for (int p = 0; p < 3; ++p)
          if (int eps = levi_civita(p, l, n))
            s.c1(n, l) += I * static_cast<double>(eps) * e.m[p];
    }
  }
  return s;
}

} // namespace

FrequencyCoefficients moment_product(const MultipoleEmitter &a,
                                     const MultipoleEmitter &b,
                                     ChannelSelector channels_a,
                                     ChannelSelector channels_b) {
  const MomentSide A = obs_side(a, channels_a);
  const MomentSide B = src_side(b, channels_b);
  FrequencyCoefficients out;
  for (int m = 0; m < 3; ++m)
    for (int n = 0; n < 3; ++n) {
      out.f0.value(m, n) = A.value[m] * B.value[n];
      for (int l = 0; l < 3; ++l) {
        out.f0.src(m, n, l) = A.value[m] * B.c0(n, l);
        out.f1.src(m, n, l) = A.value[m] * B.c1(n, l);
      }
      for (int k = 0; k < 3; ++k) {
        out.f0.obs(m, n, k) = A.c0(m, k) * B.value[n];
        out.f1.obs(m, n, k) = A.c1(m, k) * B.value[n];
        for (int l = 0; l < 3; ++l) {
          out.f0.mixed(m, n, k, l) = A.c0(m, k) * B.c0(n, l);
          out.f1.mixed(m, n, k, l) = A.c0(m, k) * B.c1(n, l) + A.c1(m, k) * B.c0(n, l);
          out.f2.mixed(m, n, k, l) = A.c1(m, k) * B.c1(n, l);
        }
      }
    }
  return out;
}

cplx bilinear_form(const MultipoleEmitter &a, const MultipoleEmitter &b,
                   const GreensJet &jet, double omega,
                   ChannelSelector channels_a, ChannelSelector channels_b,
                   Component component) {
  if (!(omega > 0.0))
    throw InputError("omega must be positive");
  return contract(moment_product(a, b, channels_a, channels_b).at(omega), jet,
                  component);
}

FrequencyCoefficients RmnImn::combined() const {
  FrequencyCoefficients out = R;
  FrequencyCoefficients i = I;
  i *= cplx(0.0, 1.0);
  out.f0 += i.f0;
  out.f1 += i.f1;
  out.f2 += i.f2;
  return out;
}

RmnImn rmn_imn(const MultipoleEmitter &a, const MultipoleEmitter &b) {
  using namespace constants;
  FrequencyCoefficients p = moment_product(a, b);
  p *= 1.0 / (hbar * pi * epsilon0 * c * c);
  return {p.real_part(), p.imag_part()};
}

std::map<ChannelPair, cplx>
channel_decompose(const MultipoleEmitter &a, const MultipoleEmitter &b,
                  const GreensJet &jet, double omega, Component component) {
  std::map<ChannelPair, cplx> out;
  for (Channel ca : {Channel::ED, Channel::MD, Channel::EQ})
    for (Channel cb : {Channel::ED, Channel::MD, Channel::EQ}) {
      const auto coeffs = moment_product(a, b, ChannelSelector::only(ca),
                                         ChannelSelector::only(cb));
      const auto at = coeffs.at(omega);
      out[{ca, cb}] = at.is_zero() ? cplx(0.0) : contract(at, jet, component);
    }
  return out;
}

} // namespace mqed
