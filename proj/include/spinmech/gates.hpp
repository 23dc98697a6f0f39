#pragma once

#include <array>
#include <string>
#include <vector>

#include "spinmech/dynamics.hpp"
#include "spinmech/hilbert.hpp"
#include "spinmech/models.hpp"

namespace spinmech {

// Two-qubit channel in the Choi representation. Index convention: the 16x16
// matrix is ordered (system ⊗ ancilla); entry ((s,a),(s',b)) equals
// Φ(|a⟩⟨b|)(s,s'), so the identity channel is the rank-1 projector onto the
// unnormalized maximally entangled vector and carries trace 4.
struct QuantumChannel {
  Matrix choi;                // 16 x 16
  std::vector<Matrix> kraus;  // filled on demand by kraus_from_choi

  // Hermiticity, complete positivity (eigenvalues >= cp_floor) and trace
  // preservation (output partial trace == identity to tp_tol). Violations
  // raise IntegrityError.
  void validate(double herm_tol = 1e-10, double cp_floor = -1e-7,
                double tp_tol = 1e-6) const;
};

// √iSWAP on the computational basis (index 0 = both spins up):
// |↑↑⟩ and |↓↓⟩ fixed, the single-excitation block mixed with phase +i.
Matrix sqrt_iswap();

// Time-parametrized channel family of the coupled two-qubit system. The
// ancilla pair never interacts, so the joint evolution factorizes into the
// 16 ancilla matrix-element blocks, each propagated by the system generator
// on [2, 2, n_fock]; one eigendecomposition serves every requested time.
class ChannelFamily {
 public:
  explicit ChannelFamily(const TwoQubitSpec& spec);

  // Channel at interaction time t (oscillator starts in thermal_state(n_th)
  // and is traced out). Raises IntegrityError if the result violates the
  // channel invariants.
  QuantumChannel channel_at(double t) const;

  const TwoQubitSpec& spec() const { return spec_; }

 private:
  TwoQubitSpec spec_;
  Vector evals_;
  Matrix reduce_;  // 16 x n: eigenmode coefficients -> vec(oscillator trace)
  std::array<Vector, 16> block_coeffs_;
};

// One-shot convenience wrapper around ChannelFamily.
QuantumChannel choi_from_dynamics(const TwoQubitSpec& spec, double t);

// Kraus operators from the Choi eigendecomposition; eigenvalues below 1e-9
// are dropped, eigenvalues below the CP floor raise IntegrityError, and the
// completeness sum must reproduce the identity to 1e-6.
std::vector<Matrix> kraus_from_choi(const QuantumChannel& channel);

// Average gate fidelity F = (d + Σ_n |tr(K_n U†)|²) / (d² + d) evaluated as
// a Choi bilinear form, so no Kraus extraction is required.
double avg_gate_fidelity(const QuantumChannel& channel, const Matrix& target);

struct PhasedFidelity {
  double fidelity = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
};

// Fidelity maximized over a compensating single-qubit z-phase pair applied
// after the channel; the dispersive evolution generates deterministic local
// z-rotations that such frame corrections remove.
PhasedFidelity phase_compensated_fidelity(const QuantumChannel& channel,
                                          const Matrix& target);

struct GateResult {
  double fidelity = 0.0;  // phase-compensated unless compensation disabled
  double fidelity_uncompensated = 0.0;
  double optimal_time = 0.0;
  double lambda = 0.0;
  double delta_r = 0.0;
  double delta_nu = 0.0;
  double n_th = 0.0;
  double gamma_pct = 100.0;
  bool boundary_warning = false;
  bool ok = true;
  std::string note;

  void validate() const;  // fidelity <= 1 + 1e-9, else IntegrityError
};

// Interaction time 2π Δ¹Δ² / [λ¹λ² (Δ¹ + Δ²)] at which the dispersive
// exchange completes a quarter swap, Δᵏ = Ωᵏ_R − ω_m; equals π/(4|J|).
double dispersive_gate_time(const TwoQubitSpec& spec);

struct GateSearchOptions {
  bool compensate_phases = true;
  int refine_points = 21;
};

// Fidelity maximum of the channel family against √iSWAP over the time grid,
// refined once around the coarse argmax. The grid must reach at least twice
// the dispersive gate time; an argmax on the grid edge sets
// boundary_warning.
GateResult optimal_gate_search(const TwoQubitSpec& spec,
                               const std::vector<double>& time_grid,
                               const GateSearchOptions& opts = {});

// optimal_gate_search at every (λ, Δ_R) grid point with equal couplings on
// both qubits, Ω_R = ω_m + Δ_R, the given thermal occupation, and every
// decay rate scaled by gamma_pct / 100. Per-point failures are recorded in
// the result row and the sweep continues.
std::vector<GateResult> fidelity_sweep(const TwoQubitSpec& base,
                                       const std::vector<double>& lambda_grid,
                                       const std::vector<double>& delta_r_grid,
                                       double n_th, double gamma_pct,
                                       const GateSearchOptions& opts = {});

}  // namespace spinmech
