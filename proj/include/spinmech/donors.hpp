#pragma once

#include <string>
#include <vector>

#include "spinmech/hilbert.hpp"

namespace spinmech {

// Donor spin system: electron (S = 1/2) hyperfine-coupled to the host
// nucleus. All frequencies in Hz, gyromagnetic ratios in Hz/T, strain
// coefficient in Hz per unit strain.
struct DonorSpecies {
  std::string name;
  double gamma_e = 0.0;
  double gamma_n = 0.0;
  double nuclear_spin = 0.0;  // I, half-integer >= 0
  double A_hf = 0.0;
  double strain_coeff = 0.0;

  int levels() const;  // (2I + 1) * 2
  void validate() const;
};

// Tabulated spatial profile (field gradient or strain per zero-point
// displacement) against distance in meters.
struct FieldProfile {
  enum class Kind { gradient, strain };
  Kind kind = Kind::gradient;
  std::vector<double> distance;
  std::vector<double> value;
  std::string note;  // provenance of the samples

  void validate() const;
};

struct MechanicalMode {
  double x_zpf = 0.0;    // [m]
  double omega_m = 0.0;  // [Hz]
  double m_eff = -1.0;   // [kg]; negative means unspecified

  // x_zpf must reproduce sqrt(hbar / (2 m_eff omega_m)) within 5% when the
  // mass is given.
  void validate() const;
};

// Energy-ordered eigenlevel indices (0 = ground) at the queried field.
struct LevelPair {
  int lower = 0;
  int upper = 0;
};

// A I·S + gamma_e B Sz − gamma_n B Iz on the (2I+1)*2 level space; for
// I = 0 this is gamma_e B sigma_z / 2.
Operator spin_hamiltonian(const DonorSpecies& species, double B);

// Gap f = E_upper − E_lower between energy-ordered levels at field B.
double transition_frequency(const DonorSpecies& species, double B,
                            LevelPair pair);

// df/dB by centered finite differences, step max(1e-6 T, 1e-6 B), one
// Richardson refinement. A level crossing inside the stencil makes the two
// step sizes disagree and raises StencilError.
double transition_gradient(const DonorSpecies& species, double B,
                           LevelPair pair);

// Field in [b_lo, b_hi] where the pair's gap equals target_freq (bisection;
// RangeError when the bracket does not contain a sign change).
double find_transition_field(const DonorSpecies& species, LevelPair pair,
                             double target_freq, double b_lo, double b_hi);

// Spin-mechanics coupling of a magnetic-gradient scheme:
// transition_gradient(B_bias) * grad_b * x_zpf.
double gradient_coupling(const DonorSpecies& species,
                         const MechanicalMode& mode, double grad_b,
                         double b_bias, LevelPair pair);

// Strain scheme: strain_coeff * strain_per_zpf (linear response).
double strain_coupling(const DonorSpecies& species, double strain_per_zpf);

// Collective coupling of n identical donors: sqrt(n) * lambda_1.
double ensemble_coupling(double lambda_1, int n);

// Plain-text profile loader: '#' comments, two whitespace-separated numeric
// columns (distance_m, value), strictly increasing distance. ParseError
// messages carry the offending line number.
FieldProfile load_profile(const std::string& path, FieldProfile::Kind kind);

// Monotone cubic interpolation of the profile; queries outside the sample
// range raise RangeError rather than extrapolate.
double interp(const FieldProfile& profile, double x);

// key=value species file (keys: name, gamma_e, gamma_n, I, A_hf,
// strain_coeff; '#' comments).
DonorSpecies load_species(const std::string& path);

}  // namespace spinmech
