#pragma once

#include "mqed/emitter.hpp"
#include "mqed/greens_grid.hpp"
#include "mqed/quadrature.hpp"
#include "mqed/spectral_model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mqed {

struct RateReport {
  double omega = 0.0;       // rad/s
  double gamma_total = 0.0; // s^-1
  // (a-side, b-side) channel -> s^-1. Off-diagonal pairs are interference
  // terms and may be negative.
  std::map<ChannelPair, double> gamma_by_channel_pair;
  std::optional<double> delta; // rad/s; empty when unavailable
  // Largest |Im| discarded when taking the real rate (reciprocity check).
  double imag_residual = 0.0;
};

// gamma = (2 / hbar eps0)(w0^2/c^2) Re sum_mn D_m^dagger D_n Im G_mn on a
// coincident jet. Throws InputError when derivative data needed by the
// emitter's channels are missing or the total comes out negative.
RateReport emission_rate(const MultipoleEmitter &e, const GreensJet &jet);

struct FreeSpaceRates {
  double ed = 0.0, md = 0.0, eq = 0.0;
  double total() const { return ed + md + eq; }
  double channel(Channel c) const;
};

// Closed forms in a homogeneous medium of real index n:
//   ED  n w^3 |d|^2 / (3 pi hbar eps0 c^3)
//   MD  n^3 w^3 |m|^2 / (3 pi hbar eps0 c^5)
//   EQ  n^3 w^5 sum |Q_mn|^2 / (10 pi hbar eps0 c^5)
// The EQ form assumes a symmetric traceless Q.
FreeSpaceRates free_space_rates(const MultipoleEmitter &e, double n, double omega);

enum class IntegralMethod { PV, ImaginaryAxis, OnShell };
const char *method_name(IntegralMethod m);
IntegralMethod parse_method(const std::string &s);

struct LambShiftReport {
  double delta = 0.0; // rad/s
  double error = 0.0;
  double imag_residual = 0.0;
  IntegralMethod method = IntegralMethod::PV;
};

// delta = 1/(hbar pi eps0 c^2) P int dw w^2/(w - w0) sum D^dagger(w) D(w) Im G_s.
// The model must describe the scattered Green tensor only.
LambShiftReport lamb_shift(const MultipoleEmitter &e, const SpectralGreenModel &scattered,
                           IntegralMethod method, const QuadratureOptions &opt = {});

struct CouplingOptions {
  IntegralMethod method = IntegralMethod::ImaginaryAxis;
  QuadratureOptions quad;
  // |w_a - w_b| must not exceed this fraction of their mean.
  double max_detuning_ratio = 1e-2;
};

// Pairwise quantities with P(w) = R(w) + i I(w) and the two-point jet
// G(r_a, r_b, w):
//   xi          = P int dw w^2/(w - wbar) P(w) . Im G(w)
//   gamma_cross = 2 pi wbar^2 P(wbar) . Im G(wbar)
// These satisfy xi_ab = conj(xi_ba) and gamma_ab = conj(gamma_ba). The
// real-valued combinations of the Heisenberg-Langevin form are
//   xi_langevin    = Re xi + Im gamma / 2
//   gamma_langevin = Re gamma - 2 Im xi.
struct CouplingReport {
  double omega_bar = 0.0;
  cplx xi{};
  cplx gamma_cross{};
  double xi_langevin = 0.0;
  double gamma_langevin = 0.0;
  double xi_error = 0.0;
  IntegralMethod method = IntegralMethod::ImaginaryAxis;
};

double mean_frequency(const MultipoleEmitter &a, const MultipoleEmitter &b,
                      double max_detuning_ratio = 1e-2);

// gamma_ab from a jet evaluated at wbar (Im part only is used).
cplx collective_rate(const MultipoleEmitter &a, const MultipoleEmitter &b,
                     const GreensJet &jet, double omega_bar);

// xi_ab with the model at (r_a, r_b). OnShell evaluates
// pi wbar^2 P(wbar) . Re G(wbar), the exact result for the homogeneous
// medium whose non-decaying G rules out the other two paths.
CouplingReport coupling_strength(const MultipoleEmitter &a, const MultipoleEmitter &b,
                                 const SpectralGreenModel &model, double omega_bar,
                                 const CouplingOptions &opt = {});

// Convenience: picks wbar, builds the model from the environment at the
// emitter positions, and fills both xi and gamma_cross.
CouplingReport couple(const MultipoleEmitter &a, const MultipoleEmitter &b,
                      const Environment &env, const CouplingOptions &opt = {});

struct MapOptions {
  ChannelSelector channels = ChannelSelector::all();
  bool parallel = true;
  int workers = 0;
};

struct MapNode {
  Vec3 position{};
  RateReport rate;
  double enhancement_total = 0.0;                // gamma_total / gamma_fs
  std::map<Channel, double> enhancement_channel; // gamma_XX / gamma_X,fs
  std::map<ChannelPair, double> normalized;      // gamma_pair / gamma_fs
};

struct EnhancementMap {
  std::vector<MapNode> nodes; // grid order, z fastest
  FreeSpaceRates free_space;
  double gamma_fs = 0.0;
  std::vector<Channel> channels; // nonzero channels entering gamma_fs
};

// Emitter moved over every grid node. gamma_fs is the n = 1 free-space rate
// restricted to the emitter's nonzero (selected) channels.
EnhancementMap enhancement_map(const TensorGrid &grid, const MultipoleEmitter &e,
                               const MapOptions &opt = {});

} // namespace mqed
