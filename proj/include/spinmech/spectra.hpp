#pragma once

#include <string>
#include <vector>

#include "spinmech/dynamics.hpp"
#include "spinmech/hilbert.hpp"
#include "spinmech/models.hpp"

namespace spinmech {

// Symmetrized displacement noise spectrum on a frequency grid [Hz], with the
// window/apodization metadata needed to undo fit broadening.
struct Spectrum {
  std::vector<double> omega_grid;
  std::vector<double> values;      // S̄(ω) = [S(ω) + S(−ω)]/2
  double window_time = 0.0;        // correlation horizon [s]
  double apod_rate = 0.0;          // exponential apodization rate [Hz]
};

struct SpectrumOptions {
  double window_time = -1.0;  // <= 0: auto, 10/(slowest decay + apod rate)
  double apod_rate = -1.0;    // < 0: auto, slowest retained decay / 10
  double tail_tol = 1e-3;     // max apodized tail relative to corr(0)
};

// S̄ of X = a† + a (or any A) computed from the generator's exponential
// modes: each windowed, apodized Fourier integral has a closed form, so the
// grid sees no time-sampling error. Throws WindowError when the correlation
// has not decayed below tail_tol by the window end.
Spectrum spectral_density(const LindbladModel& model, const State& rho0,
                          const Operator& x,
                          const std::vector<double>& omega_grid,
                          const SpectrumOptions& opts = {});

// Lorentzian peak description. width is the full width at half maximum with
// the apodization broadening already removed.
struct PeakFit {
  double center = 0.0;
  double width = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
};

struct SearchWindow {
  double lo = 0.0;
  double hi = 0.0;
};

// Least-squares Lorentzian-plus-offset fit inside the window. Requires
// exactly one significant local maximum there (AmbiguousPeakError otherwise).
PeakFit fit_peak(const Spectrum& spectrum, const SearchWindow& window);

// Dressed sigma_z eigenstate selecting the qubit branch of a shift run.
enum class QubitBranch { up, down };

// Mechanical frequency pull extracted from the full master-equation spectrum:
// peak nearest omega_m, fitted, minus omega_m. Qubit starts in the given
// sigma_z eigenstate, oscillator in thermal_state(n_th).
double simulated_shift(const SystemSpec& spec, QubitBranch branch);

// Closed-form pull lambda^2 Omega_R / [2 (omega_m^2 - Omega_R^2)], valid in
// the dispersive regime below resonance.
double analytic_shift(double lambda, double Omega_R, double omega_m);

// Pull from the spectrum of the rotating-frame Hamiltonian: eigenstates are
// labeled by overlap with the uncoupled products, and the upper-branch
// mechanical transition [E(+,1) - E(+,0)] - omega_m is returned.
// The lower branch gives the negative; the up/down splitting is twice this.
double eigen_shift(const SystemSpec& spec);

struct ThresholdOptions {
  double lambda_rel_tol = 0.02;   // bisection resolution on lambda
  int max_bracket_growth = 6;     // bracket expansions before giving up
  double lambda_floor = 1e-12;    // target <= 0 shortcut result
};

// Smallest coupling whose up-branch |shift| reaches target_shift at the
// given detunings (Omega_R = omega_m + delta_r). Bisection after a local
// monotonicity check; non-monotonic brackets raise RangeError.
double threshold_min_lambda(const SystemSpec& base, double delta_r,
                            double delta_nu, double target_shift,
                            const ThresholdOptions& opts = {});

struct ThresholdPoint {
  double delta_r = 0.0;
  double delta_nu = 0.0;
  double lambda_min = 0.0;
  bool ok = false;
  std::string note;  // failure reason when !ok
};

// Grid of threshold_min_lambda results; per-point failures are recorded and
// the sweep continues.
std::vector<ThresholdPoint> threshold_sweep(
    const std::vector<double>& delta_r_grid,
    const std::vector<double>& delta_nu_grid, double target_shift,
    const SystemSpec& base, const ThresholdOptions& opts = {});

}  // namespace spinmech
