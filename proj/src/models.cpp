#include "spinmech/models.hpp"

#include <cmath>
#include <string>

#include "spinmech/errors.hpp"

namespace spinmech {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

void require_nonneg(double v, const char* name) {
  if (!(v >= 0.0))
    throw InvalidParameterError(std::string(name) + " must be >= 0, got " +
                                std::to_string(v));
}

void require_finite(double v, const char* name) {
  if (!std::isfinite(v))
    throw InvalidParameterError(std::string(name) + " must be finite");
}

}  // namespace

void DecayRates::validate() const {
  require_nonneg(kappa_down, "kappa_down");
  require_nonneg(kappa_up, "kappa_up");
  require_nonneg(gamma_down, "gamma_down");
  require_nonneg(gamma_up, "gamma_up");
  require_nonneg(gamma_phi, "gamma_phi");
}

DecayRates DecayRates::scaled(double factor) const {
  require_nonneg(factor, "rate scale factor");
  return {kappa_down * factor, kappa_up * factor, gamma_down * factor,
          gamma_up * factor, gamma_phi * factor};
}

DecayRates calibrated_rates(double t1_inv, double t2_inv, double kappa,
                            double n_bar) {
  require_nonneg(t1_inv, "1/T1");
  require_nonneg(t2_inv, "1/T2");
  require_nonneg(kappa, "kappa");
  require_nonneg(n_bar, "n_bar");
  const double flip = t1_inv / 2.0;  // gamma_down = gamma_up
  // coherence decay = (gamma_down + gamma_up)/2 + 2 gamma_phi = 1/T2
  const double residual = t2_inv - flip;
  if (residual < 0.0)
    throw InvalidParameterError(
        "1/T2 below the relaxation-limited floor 1/(2 T1)");
  DecayRates r;
  r.gamma_down = flip;
  r.gamma_up = flip;
  r.gamma_phi = residual / 2.0;
  r.kappa_down = kappa * (n_bar + 1.0);
  r.kappa_up = kappa * n_bar;
  return r;
}

void SystemSpec::validate() const {
  require_nonneg(omega_m, "omega_m");
  require_nonneg(Omega_R, "Omega_R");
  require_finite(delta_nu, "delta_nu");
  require_nonneg(lambda, "lambda");
  require_nonneg(gamma_e_B0, "gamma_e_B0");
  require_nonneg(gamma_e_B1, "gamma_e_B1");
  if (gamma_e_B1 > 0.0 && Omega_R > 0.0) {
    const double want = gamma_e_B1 / 2.0;
    if (std::abs(Omega_R - want) > 1e-9 * std::max(Omega_R, want))
      throw InvalidParameterError(
          "Omega_R and gamma_e_B1 conflict: expected Omega_R = gamma_e_B1/2");
  }
  if (n_fock < 2)
    throw InvalidParameterError("n_fock must be >= 2, got " +
                                std::to_string(n_fock));
  require_nonneg(n_th, "n_th");
  rates.validate();
}

HilbertSpace SystemSpec::space() const { return HilbertSpace{2, n_fock}; }

void TwoQubitSpec::validate() const {
  for (const QubitParams& q : qubit) {
    require_nonneg(q.Omega_R, "Omega_R");
    require_finite(q.delta_nu, "delta_nu");
    require_nonneg(q.lambda, "lambda");
    require_nonneg(q.gamma_down, "gamma_down");
    require_nonneg(q.gamma_up, "gamma_up");
    require_nonneg(q.gamma_phi, "gamma_phi");
  }
  require_nonneg(omega_m, "omega_m");
  if (n_fock < 2)
    throw InvalidParameterError("n_fock must be >= 2, got " +
                                std::to_string(n_fock));
  require_nonneg(n_th, "n_th");
  require_nonneg(kappa_down, "kappa_down");
  require_nonneg(kappa_up, "kappa_up");
}

HilbertSpace TwoQubitSpec::space() const { return HilbertSpace{2, 2, n_fock}; }

SystemSpec TwoQubitSpec::single(int k) const {
  if (k < 0 || k > 1)
    throw InvalidParameterError("qubit index must be 0 or 1, got " +
                                std::to_string(k));
  SystemSpec s;
  s.omega_m = omega_m;
  s.Omega_R = qubit[k].Omega_R;
  s.delta_nu = qubit[k].delta_nu;
  s.lambda = qubit[k].lambda;
  s.n_fock = n_fock;
  s.n_th = n_th;
  s.rates = {kappa_down, kappa_up, qubit[k].gamma_down, qubit[k].gamma_up,
             qubit[k].gamma_phi};
  return s;
}

void OptomechSpec::validate() const {
  require_nonneg(omega_m, "omega_m");
  require_finite(Delta_CL, "Delta_CL");
  require_nonneg(g0, "g0");
  require_nonneg(n_cav, "n_cav");
  if (n_fock < 2)
    throw InvalidParameterError("n_fock must be >= 2, got " +
                                std::to_string(n_fock));
}

Operator build_qm_bare(const SystemSpec& spec) {
  spec.validate();
  const HilbertSpace sp = spec.space();
  const Operator sz = lift(sp, 0, pauli(Axis::z));
  const Operator a = lift(sp, 1, fock_destroy(spec.n_fock));
  const Operator x = a.adjoint() + a;
  return 0.5 * (spec.gamma_e_B0 * sz + 2.0 * spec.omega_m * (a.adjoint() * a) +
                spec.lambda * (sz * x));
}

Operator build_qm_driven(const SystemSpec& spec, double t) {
  spec.validate();
  require_finite(t, "t");
  const double nu_mw = spec.gamma_e_B0 + spec.delta_nu;
  const Operator sx = lift(spec.space(), 0, pauli(Axis::x));
  const double drive = spec.gamma_e_B1 * std::cos(2.0 * kPi * nu_mw * t);
  return build_qm_bare(spec) + 0.5 * drive * sx;
}

Operator build_qm_dressed(const SystemSpec& spec) {
  spec.validate();
  const HilbertSpace sp = spec.space();
  const Operator sz = lift(sp, 0, pauli(Axis::z));
  const Operator sx = lift(sp, 0, pauli(Axis::x));
  const Operator a = lift(sp, 1, fock_destroy(spec.n_fock));
  const Operator x = a.adjoint() + a;
  return 0.5 *
         (spec.Omega_R * sz + spec.delta_nu * sx +
          2.0 * spec.omega_m * (a.adjoint() * a) - spec.lambda * (sx * x));
}

Operator build_qm_rwa(const SystemSpec& spec) {
  spec.validate();
  if (spec.delta_nu != 0.0)
    throw PreconditionError(
        "rotating-wave form requires delta_nu = 0; got delta_nu = " +
        std::to_string(spec.delta_nu));
  const HilbertSpace sp = spec.space();
  const Operator sz = lift(sp, 0, pauli(Axis::z));
  const Operator sm = lift(sp, 0, pauli(Axis::minus));
  const Operator sp_ = lift(sp, 0, pauli(Axis::plus));
  const Operator a = lift(sp, 1, fock_destroy(spec.n_fock));
  return 0.5 * (spec.Omega_R * sz + 2.0 * spec.omega_m * (a.adjoint() * a) -
                spec.lambda * (sm * a.adjoint() + sp_ * a));
}

Operator build_qm_dispersive(const SystemSpec& spec) {
  spec.validate();
  const double delta_r = spec.Omega_R - spec.omega_m;
  if (delta_r == 0.0)
    throw DivergenceError(
        "dispersive form diverges on resonance Omega_R = omega_m");
  const HilbertSpace sp = spec.space();
  const Operator sz = lift(sp, 0, pauli(Axis::z));
  const Operator a = lift(sp, 1, fock_destroy(spec.n_fock));
  const Operator num = a.adjoint() * a;
  const double pull = spec.lambda * spec.lambda / (4.0 * delta_r);
  return spec.omega_m * num + pull * (sz * num) + 0.5 * spec.Omega_R * sz +
         0.5 * pull * sz;
}

Operator build_qmq_dressed(const TwoQubitSpec& spec) {
  spec.validate();
  const HilbertSpace sp = spec.space();
  const Operator a = lift(sp, 2, fock_destroy(spec.n_fock));
  const Operator x = a.adjoint() + a;
  Operator h = spec.omega_m * (a.adjoint() * a);
  for (int k = 0; k < 2; ++k) {
    const Operator sz = lift(sp, k, pauli(Axis::z));
    const Operator sx = lift(sp, k, pauli(Axis::x));
    h = h + 0.5 * (spec.qubit[k].Omega_R * sz + spec.qubit[k].delta_nu * sx -
                   spec.qubit[k].lambda * (sx * x));
  }
  return h;
}

double dispersive_exchange_rate(const TwoQubitSpec& spec) {
  spec.validate();
  const double d1 = spec.qubit[0].Omega_R - spec.omega_m;
  const double d2 = spec.qubit[1].Omega_R - spec.omega_m;
  if (d1 == 0.0 || d2 == 0.0)
    throw DivergenceError(
        "dispersive exchange diverges on resonance Omega_R^k = omega_m");
  return spec.qubit[0].lambda * spec.qubit[1].lambda * (d1 + d2) /
         (8.0 * d1 * d2);
}

Operator build_qmq_dispersive(const TwoQubitSpec& spec) {
  spec.validate();
  const double delta[2] = {spec.qubit[0].Omega_R - spec.omega_m,
                           spec.qubit[1].Omega_R - spec.omega_m};
  if (delta[0] == 0.0 || delta[1] == 0.0)
    throw DivergenceError(
        "dispersive form diverges on resonance Omega_R^k = omega_m");
  const HilbertSpace sp = spec.space();
  const Operator a = lift(sp, 2, fock_destroy(spec.n_fock));
  const Operator num = a.adjoint() * a;

  Operator h = spec.omega_m * num;
  for (int k = 0; k < 2; ++k) {
    const Operator sz = lift(sp, k, pauli(Axis::z));
    const Operator sx = lift(sp, k, pauli(Axis::x));
    const double pull =
        spec.qubit[k].lambda * spec.qubit[k].lambda / (4.0 * delta[k]);
    h = h + pull * (sz * num) +
        0.5 * ((spec.qubit[k].Omega_R + pull) * sz +
               spec.qubit[k].delta_nu * sx);
  }
  const double j = dispersive_exchange_rate(spec);
  const Operator sp1 = lift(sp, 0, pauli(Axis::plus));
  const Operator sm1 = lift(sp, 0, pauli(Axis::minus));
  const Operator sp2 = lift(sp, 1, pauli(Axis::plus));
  const Operator sm2 = lift(sp, 1, pauli(Axis::minus));
  return h + j * (sp1 * sm2 + sm1 * sp2);
}

Operator build_om_linearized(const OptomechSpec& spec, int n_fock_opt) {
  spec.validate();
  if (n_fock_opt < 2)
    throw InvalidParameterError("n_fock_opt must be >= 2, got " +
                                std::to_string(n_fock_opt));
  const HilbertSpace sp{spec.n_fock, n_fock_opt};
  const Operator a = lift(sp, 0, fock_destroy(spec.n_fock));
  const Operator b = lift(sp, 1, fock_destroy(n_fock_opt));
  const Operator xa = a.adjoint() + a;
  const Operator xb = b.adjoint() + b;
  return spec.omega_m * (a.adjoint() * a) -
         spec.Delta_CL * (b.adjoint() * b) -
         spec.g0 * std::sqrt(spec.n_cav) * (xa * xb);
}

}  // namespace spinmech
