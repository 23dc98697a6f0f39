#pragma once

#include <array>

#include "spinmech/hilbert.hpp"

namespace spinmech {

// Jump-channel rates [Hz]. kappa_* act on the oscillator (quanta loss /
// thermal excitation), gamma_* on the qubit; gamma_phi feeds the sigma_z
// dephasing channel.
struct DecayRates {
  double kappa_down = 0.0;
  double kappa_up = 0.0;
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  double gamma_phi = 0.0;

  void validate() const;
  DecayRates scaled(double factor) const;
};

// Rates matching a qubit energy-relaxation rate t1_inv split evenly between
// decay and excitation, with pure dephasing chosen so the total coherence
// decay rate is t2_inv (the sigma_z channel contributes 2*gamma_phi).
// Oscillator channels kappa_down = kappa*(n_bar+1), kappa_up = kappa*n_bar,
// giving linewidth kappa and stationary occupation n_bar when uncoupled.
DecayRates calibrated_rates(double t1_inv, double t2_inv, double kappa,
                            double n_bar);

// One qubit plus one mechanical mode, on the space [2, n_fock].
// All frequencies in Hz; delta_nu is signed, everything else nonnegative.
struct SystemSpec {
  double omega_m = 0.0;     // mechanical frequency
  double Omega_R = 0.0;     // Rabi frequency
  double delta_nu = 0.0;    // MW detuning nu_MW - gamma_e_B0
  double lambda = 0.0;      // spin-phonon coupling
  double gamma_e_B0 = 0.0;  // bare Zeeman splitting
  double gamma_e_B1 = 0.0;  // drive amplitude; equals 2*Omega_R when nonzero
  int n_fock = 2;           // oscillator truncation
  double n_th = 0.0;        // initial thermal occupation
  DecayRates rates;

  void validate() const;
  HilbertSpace space() const;
};

// Per-qubit parameters of the two-qubit configuration.
struct QubitParams {
  double Omega_R = 0.0;
  double delta_nu = 0.0;
  double lambda = 0.0;
  double gamma_down = 0.0;
  double gamma_up = 0.0;
  double gamma_phi = 0.0;
};

// Two qubits sharing one mechanical mode, on the space [2, 2, n_fock].
struct TwoQubitSpec {
  std::array<QubitParams, 2> qubit;
  double omega_m = 0.0;
  int n_fock = 2;
  double n_th = 0.0;
  double kappa_down = 0.0;
  double kappa_up = 0.0;

  void validate() const;
  HilbertSpace space() const;
  // Single-qubit view of qubit k (0-based) with the shared oscillator.
  SystemSpec single(int k) const;
};

// Optomechanical mode pair: mechanics plus photon-number fluctuations.
struct OptomechSpec {
  double omega_m = 0.0;    // mechanical frequency [Hz]
  double Delta_CL = 0.0;   // cavity-laser detuning [Hz], signed
  double g0 = 0.0;         // single-photon coupling [Hz]
  double n_cav = 0.0;      // mean intracavity photon number
  int n_fock = 2;          // mechanical truncation

  void validate() const;
};

// Lab-frame qubit-mechanics Hamiltonian:
// (1/2)[gamma_e_B0 sz + 2 omega_m a†a + lambda sz (a† + a)].
Operator build_qm_bare(const SystemSpec& spec);

// Lab-frame Hamiltonian with the transverse MW drive evaluated at time t:
// bare + (1/2) gamma_e_B1 cos(2 pi nu_mw t) sx, nu_mw = gamma_e_B0 + delta_nu.
Operator build_qm_driven(const SystemSpec& spec, double t);

// Frame rotating with the MW drive:
// (1/2)[Omega_R sz + delta_nu sx + 2 omega_m a†a - lambda sx (a† + a)].
Operator build_qm_dressed(const SystemSpec& spec);

// Rotating-wave form, valid only on resonance (delta_nu = 0):
// (1/2)[Omega_R sz + 2 omega_m a†a - lambda (s- a† + s+ a)].
// Conserves the excitation number s+s- + a†a.
Operator build_qm_rwa(const SystemSpec& spec);

// Dispersive-limit diagonal form:
// (omega_m + lambda^2/(4 Delta_R) sz) a†a + (Omega_R/2) sz
// + lambda^2/(8 Delta_R) sz, with Delta_R = Omega_R - omega_m.
Operator build_qm_dispersive(const SystemSpec& spec);

// Two qubits sharing the mode:
// omega_m a†a + sum_k (1/2)[Omega_R^k sz^k + delta_nu^k sx^k
//                           - lambda^k sx^k (a† + a)].
Operator build_qmq_dressed(const TwoQubitSpec& spec);

// Dispersive two-qubit form including the phonon-mediated exchange term
// J (s+^1 s-^2 + s-^1 s+^2), J = lambda^1 lambda^2 (Delta^1 + Delta^2)
// / (8 Delta^1 Delta^2), Delta^k = Omega_R^k - omega_m.
Operator build_qmq_dispersive(const TwoQubitSpec& spec);

// Exchange strength J of the dispersive two-qubit form [Hz].
double dispersive_exchange_rate(const TwoQubitSpec& spec);

// Linearized optomechanics on [n_fock, n_fock_opt]:
// omega_m a†a - Delta_CL b†b - g0 sqrt(n_cav) (a† + a)(b† + b).
Operator build_om_linearized(const OptomechSpec& spec, int n_fock_opt);

}  // namespace spinmech
