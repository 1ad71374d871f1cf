#include "mqed/dynamics.hpp"
#include "mqed/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>

namespace mqed {

namespace {

void check_times(const std::vector<double> &times) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw InputError("times must be finite and non-negative");
    if (i > 0 && times[i] < times[i - 1])
      throw InputError("times must be non-decreasing");
  }
}

void check_qubit(const QubitState &s) {
  if (!(s.sigma_z >= -1.0 && s.sigma_z <= 1.0))
    throw InputError("<sigma_z> must lie in [-1, 1]");
  const double pe = 0.5 * (1.0 + s.sigma_z), pg = 1.0 - pe;
  if (std::norm(s.sigma) > pe * pg * (1.0 + 1e-12) + 1e-300)
    throw InputError("coherence exceeds the Bloch-ball bound |<sigma>|^2 <= p_e p_g");
}

} // namespace

Trajectory evolve_single(double gamma, double delta, double omega0,
                         const QubitState &initial, const std::vector<double> &times) {
  if (!(gamma >= 0.0))
    throw InputError("decay rate must be non-negative");
  check_qubit(initial);
  check_times(times);
  Trajectory tr;
  tr.t = times;
  const cplx rate(0.5 * gamma, omega0 + delta);
  for (double t : times) {
    tr.sigma.push_back({initial.sigma * std::exp(-rate * t)});
    tr.sigma_z.push_back({-1.0 + (initial.sigma_z + 1.0) * std::exp(-gamma * t)});
  }
  return tr;
}

void EmitterEnsembleModel::validate_and_symmetrize() {
  const int n = size();
  if (n < 1 || n > 10)
    throw InputError("ensemble size must be between 1 and 10");
  if (xi.rows() != n || xi.cols() != n || gamma.rows() != n || gamma.cols() != n)
    throw InputError("xi and gamma must be N x N");
  if (!(omega_bar >= 0.0) || !std::isfinite(omega_bar))
    throw InputError("omega_bar must be finite and non-negative");
  auto herm_check = [](const Eigen::MatrixXcd &m, const char *name) {
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (dev > 1e-10 * scale)
      throw InputError(std::string(name) + " matrix is not Hermitian");
  };
  Eigen::MatrixXcd off = xi;
  off.diagonal().setZero();
  herm_check(off, "xi");
  herm_check(gamma, "gamma");
  xi = 0.5 * (off + off.adjoint());
  gamma = 0.5 * (gamma + gamma.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma);
  const double norm = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() < -1e-10 * norm)
    throw InputError("gamma matrix is not positive semidefinite");
}

Eigen::MatrixXcd product_state(const std::vector<QubitState> &states) {
  const int n = static_cast<int>(states.size());
  if (n < 1 || n > 10)
    throw InputError("ensemble size must be between 1 and 10");
  for (const auto &s : states)
    check_qubit(s);
  const int dim = 1 << n;
  Eigen::MatrixXcd rho(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      cplx v(1.0);
      for (int a = 0; a < n; ++a) {
        const bool ei = (i >> a) & 1, ej = (j >> a) & 1;
        const double pe = 0.5 * (1.0 + states[a].sigma_z);
        if (ei && ej)
          v *= pe;
        else if (!ei && !ej)
          v *= 1.0 - pe;
        else if (ei)
          v *= states[a].sigma; // rho_eg
        else
          v *= std::conj(states[a].sigma);
      }
      rho(i, j) = v;
    }
  return rho;
}

Eigen::MatrixXcd single_excitation_state(const std::vector<cplx> &amplitudes) {
  const int n = static_cast<int>(amplitudes.size());
  if (n < 1 || n > 10)
    throw InputError("ensemble size must be between 1 and 10");
  double norm = 0.0;
  for (auto c : amplitudes)
    norm += std::norm(c);
  if (!(norm > 0.0))
    throw InputError("single-excitation amplitudes must not all vanish");
  const int dim = 1 << n;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  for (int a = 0; a < n; ++a)
    psi(1 << a) = amplitudes[a] / std::sqrt(norm);
  return psi * psi.adjoint();
}

QubitState expectations(const Eigen::MatrixXcd &rho, int emitter, int n) {
  const int dim = 1 << n;
  const int bit = 1 << emitter;
  QubitState s;
  s.sigma_z = 0.0;
  for (int i = 0; i < dim; ++i) {
    s.sigma_z += ((i & bit) ? 1.0 : -1.0) * rho(i, i).real();
    if (i & bit)
      s.sigma += rho(i, i ^ bit);
  }
  return s;
}

namespace {

using SpMat = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

struct Jump {
  int a, b; // gamma_ab s_b rho s_a^+
  cplx g;
};

struct Generator {
  int n, dim;
  SpMat K; // K = -i H - (1/2) sum gamma_ab s_a^+ s_b
  std::vector<Jump> jumps;

  Eigen::MatrixXcd apply(const Eigen::MatrixXcd &rho) const {
    Eigen::MatrixXcd out = K * rho;
    out += (K * rho.adjoint()).adjoint(); // rho K^+
    for (const auto &j : jumps) {
      const int ba = 1 << j.a, bb = 1 << j.b;
      // (s_b rho s_a^+)_{ik} = rho_{i|b, k|a} for i without b and k without a.
      for (int i = 0; i < dim; ++i) {
        if (i & bb)
          continue;
        for (int k = 0; k < dim; ++k) {
          if (k & ba)
            continue;
          out(i, k) += j.g * rho(i | bb, k | ba);
        }
      }
    }
    return out;
  }
};

Generator make_generator(const EmitterEnsembleModel &m) {
  Generator gen;
  gen.n = m.size();
  gen.dim = 1 << gen.n;
  std::vector<Eigen::Triplet<cplx>> trip;
  const cplx I(0.0, 1.0);
  // s_a^+ s_b |k> = |k - b + a> when k has b and (a == b or k lacks a).
  auto add_hop = [&](int a, int b, cplx coeff) {
    for (int k = 0; k < gen.dim; ++k) {
      if (!((k >> b) & 1))
        continue;
      const int mid = k & ~(1 << b);
      if ((mid >> a) & 1)
        continue;
      trip.emplace_back(mid | (1 << a), k, coeff);
    }
  };
  for (int a = 0; a < gen.n; ++a)
    for (int b = 0; b < gen.n; ++b) {
      cplx h = (a == b) ? cplx(m.delta(a)) : m.xi(a, b);
      cplx coeff = -I * h - 0.5 * m.gamma(a, b);
      if (coeff != cplx(0.0))
        add_hop(a, b, coeff);
      if (m.gamma(a, b) != cplx(0.0))
        gen.jumps.push_back({a, b, m.gamma(a, b)});
    }
  gen.K.resize(gen.dim, gen.dim);
  gen.K.setFromTriplets(trip.begin(), trip.end());
  return gen;
}

// Dormand-Prince 5(4) tableau.
constexpr double A[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
constexpr double B5[7] = {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                          11.0 / 84, 0};
constexpr double B4[7] = {5179.0 / 57600, 0, 7571.0 / 16695, 393.0 / 640,
                          -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

} // namespace

Trajectory evolve_ensemble(EmitterEnsembleModel model, const Eigen::MatrixXcd &rho0,
                           const std::vector<double> &times, const EvolveOptions &opt) {
  model.validate_and_symmetrize();
  check_times(times);
  const int n = model.size();
  const int dim = 1 << n;
  if (rho0.rows() != dim || rho0.cols() != dim)
    throw InputError("initial density matrix must be 2^N x 2^N");
  if ((rho0 - rho0.adjoint()).cwiseAbs().maxCoeff() > 1e-12 ||
      std::abs(rho0.trace() - 1.0) > 1e-12)
    throw InputError("initial density matrix must be Hermitian with unit trace");
  if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0))
    throw InputError("integrator tolerances must be positive");

  const Generator gen = make_generator(model);
  double rate_scale = model.delta.cwiseAbs().maxCoeff();
  rate_scale = std::max(rate_scale, model.xi.cwiseAbs().rowwise().sum().maxCoeff());
  rate_scale = std::max(rate_scale, model.gamma.cwiseAbs().rowwise().sum().maxCoeff());

  Trajectory tr;
  Eigen::MatrixXcd rho = rho0;
  double t = 0.0;
  const double t_end = times.empty() ? 0.0 : times.back();
  double h = rate_scale > 0.0 ? 1e-3 / rate_scale : std::max(t_end, 1.0);
  std::vector<Eigen::MatrixXcd> k(7);
  int steps = 0;

  auto record = [&](double time) {
    const double tr_err = std::abs(rho.trace() - 1.0);
    tr.max_trace_error = std::max(tr.max_trace_error, tr_err);
    if (tr_err > 1e-9)
      throw NumericalError("density-matrix trace drifted from 1", tr_err);
    double min_eig;
    if (n <= 6) {
      const Eigen::MatrixXcd herm = 0.5 * (rho + rho.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm, Eigen::EigenvaluesOnly);
      min_eig = es.eigenvalues().minCoeff();
    } else {
      min_eig = rho.diagonal().real().minCoeff();
    }
    tr.min_eigenvalue = tr.t.empty() ? min_eig : std::min(tr.min_eigenvalue, min_eig);
    if (min_eig < -1e-9)
      throw NumericalError("density matrix lost positivity", -min_eig);
    tr.t.push_back(time);
    const cplx phase = std::exp(cplx(0.0, -model.omega_bar * time));
    std::vector<cplx> s(n);
    std::vector<double> z(n);
    for (int a = 0; a < n; ++a) {
      const QubitState q = expectations(rho, a, n);
      s[a] = phase * q.sigma;
      z[a] = q.sigma_z;
    }
    tr.sigma.push_back(std::move(s));
    tr.sigma_z.push_back(std::move(z));
    if (opt.keep_density_matrices && n <= 6)
      tr.rho.push_back(rho);
  };

  for (double target : times) {
    while (t < target) {
      if (++steps > opt.max_steps)
        throw NumericalError("step budget exhausted", h);
      const bool last = t + h >= target;
      const double hs = last ? target - t : h;
      k[0] = gen.apply(rho);
      for (int s = 1; s < 7; ++s) {
        Eigen::MatrixXcd y = rho;
        for (int j = 0; j < s; ++j)
          if (A[s][j] != 0.0)
            y += (hs * A[s][j]) * k[j];
        k[s] = gen.apply(y);
      }
      Eigen::MatrixXcd y5 = rho, err = Eigen::MatrixXcd::Zero(dim, dim);
      for (int s = 0; s < 7; ++s) {
        if (B5[s] != 0.0)
          y5 += (hs * B5[s]) * k[s];
        err += (hs * (B5[s] - B4[s])) * k[s];
      }
      double e = 0.0, eabs = 0.0;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(rho(i, j)),
                                                                  std::abs(y5(i, j)));
          e = std::max(e, std::abs(err(i, j)) / sc);
          eabs = std::max(eabs, std::abs(err(i, j)));
        }
      if (!std::isfinite(e))
        throw NumericalError("integrator produced non-finite values", e);
      if (e <= 1.0) {
        rho = y5;
        t = last ? target : t + hs;
        tr.error_estimate += eabs;
      }
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      if (!(last && e <= 1.0))
        h = hs * factor;
      if (h < 1e-14 * std::max(t_end, 1e-300))
        throw NumericalError("step size underflow", e);
    }
    record(target);
  }
  return tr;
}

EmitterEnsembleModel build_ensemble(const std::vector<MultipoleEmitter> &emitters,
                                    const Environment &env, const CouplingOptions &opt) {
  const int n = static_cast<int>(emitters.size());
  if (n < 1 || n > 10)
    throw InputError("ensemble size must be between 1 and 10");
  double wbar = 0.0;
  for (const auto &e : emitters) {
    e.validate();
    wbar += e.omega0 / n;
  }
  for (const auto &e : emitters)
    if (std::abs(e.omega0 - wbar) > opt.max_detuning_ratio * wbar)
      throw InputError("transition frequencies differ by more than the allowed "
                       "fraction of their mean");
  if (n > 1 && !env.supports_frequency_integrals() && opt.method != IntegralMethod::OnShell)
    throw InputError(std::string("environment '") + env.kind() +
                     "' does not decay at large frequency; use the on-shell method");
  EmitterEnsembleModel m;
  m.omega_bar = wbar;
  m.delta = Eigen::VectorXd::Zero(n);
  m.xi = Eigen::MatrixXcd::Zero(n, n);
  m.gamma = Eigen::MatrixXcd::Zero(n, n);
  for (int a = 0; a < n; ++a) {
    const auto &ea = emitters[a];
    m.delta(a) = ea.omega0 - wbar;
    const SpectralGreenModel self = env.at(ea.position, ea.position);
    m.gamma(a, a) = collective_rate(ea, ea, self.evaluate(cplx(wbar, 0.0)), wbar).real();
    if (env.supports_frequency_integrals()) {
      const IntegralMethod method = opt.method == IntegralMethod::OnShell
                                        ? IntegralMethod::ImaginaryAxis
                                        : opt.method;
      m.delta(a) += lamb_shift(ea, self, method, opt.quad).delta;
    }
    for (int b = 0; b < n; ++b) {
      if (b == a)
        continue;
      CouplingOptions o = opt;
      o.max_detuning_ratio = 2.0; // checked above against the ensemble mean
      const CouplingReport r = coupling_strength(
          ea, emitters[b], env.at(ea.position, emitters[b].position), wbar, o);
      m.xi(a, b) = r.xi;
      m.gamma(a, b) = r.gamma_cross;
    }
  }
  m.validate_and_symmetrize();
  return m;
}

} // namespace mqed
