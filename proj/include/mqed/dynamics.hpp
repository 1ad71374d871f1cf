#pragma once

#include "mqed/emitter.hpp"
#include "mqed/rates.hpp"
#include "mqed/spectral_model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mqed {

// Expectation values of one two-level system.
struct QubitState {
  double sigma_z = 1.0; // +1 excited, -1 ground
  cplx sigma{};         // Tr(rho sigma) = rho_eg, sigma = |g><e|
};

struct Trajectory {
  std::vector<double> t;                 // s
  std::vector<std::vector<cplx>> sigma;  // [time][emitter], lab frame
  std::vector<std::vector<double>> sigma_z;
  std::vector<Eigen::MatrixXcd> rho;     // rotating frame, when requested
  double max_trace_error = 0.0;
  double min_eigenvalue = 0.0;           // over all checked snapshots
  double error_estimate = 0.0;           // accumulated local error (max norm)
};

// d<sigma>/dt = -[gamma/2 + i(w0 + delta)]<sigma>, d<sigma_z>/dt = -gamma(<sigma_z> + 1).
Trajectory evolve_single(double gamma, double delta, double omega0,
                         const QubitState &initial, const std::vector<double> &times);

// N emitters sharing the environment, frame rotating at omega_bar:
//   H = sum_a delta_a s_a^+ s_a + sum_{a != b} xi_ab s_a^+ s_b
//   D[rho] = sum_ab gamma_ab (s_b rho s_a^+ - {s_a^+ s_b, rho}/2).
// delta_a includes any detuning w_a - omega_bar.
struct EmitterEnsembleModel {
  double omega_bar = 0.0;
  Eigen::VectorXd delta;  // rad/s
  Eigen::MatrixXcd xi;    // rad/s, Hermitian, diagonal ignored
  Eigen::MatrixXcd gamma; // s^-1, Hermitian PSD

  int size() const { return static_cast<int>(delta.size()); }
  // Checks shapes, Hermiticity (1e-10 relative) and PSD of gamma
  // (eigenvalues >= -1e-10 ||gamma||). Symmetrizes in place.
  void validate_and_symmetrize();
};

struct EvolveOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  bool keep_density_matrices = false; // only for N <= 6
  int max_steps = 10000000;
};

// Basis index bit a set <=> emitter a excited.
Eigen::MatrixXcd product_state(const std::vector<QubitState> &states);
// Pure state sum_a c_a |1_a> (normalized internally).
Eigen::MatrixXcd single_excitation_state(const std::vector<cplx> &amplitudes);
// Expectations of one emitter in the frame of rho.
QubitState expectations(const Eigen::MatrixXcd &rho, int emitter, int n);

// Dormand-Prince 5(4) propagation of the density matrix. Trace and positivity
// are checked at every output time (full eigen-decomposition for N <= 6,
// diagonal otherwise); violations throw NumericalError.
Trajectory evolve_ensemble(EmitterEnsembleModel model, const Eigen::MatrixXcd &rho0,
                           const std::vector<double> &times, const EvolveOptions &opt = {});

// Pairwise assembly: xi_ab and gamma_ab from couple() (ab ordered: a on the
// observation side), gamma_aa from the coincident environment, and
// delta_a = (w_a - omega_bar) + Lamb shift when the environment supports
// frequency integrals (0 otherwise).
EmitterEnsembleModel build_ensemble(const std::vector<MultipoleEmitter> &emitters,
                                    const Environment &env,
                                    const CouplingOptions &opt = {});

} // namespace mqed
