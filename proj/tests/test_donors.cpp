#include "spinmech/donors.hpp"

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spinmech/errors.hpp"
#include "spinmech/hilbert.hpp"

using namespace spinmech;

namespace {

DonorSpecies bismuth() {
  DonorSpecies s;
  s.name = "bismuth";
  s.gamma_e = 27.997e9;
  s.gamma_n = 6.963e6;
  s.nuclear_spin = 4.5;
  s.A_hf = 1.4754e9;
  s.strain_coeff = 22e9;
  return s;
}

DonorSpecies phosphorus() {
  DonorSpecies s;
  s.name = "phosphorus";
  s.gamma_e = 27.97e9;
  s.gamma_n = 17.235e6;
  s.nuclear_spin = 0.5;
  s.A_hf = 117.53e6;
  s.strain_coeff = 140e9;
  return s;
}

DonorSpecies electron_only() {
  DonorSpecies s;
  s.name = "electron_only";
  s.gamma_e = 28.0e9;
  s.nuclear_spin = 0.0;
  return s;
}

std::string write_temp(const std::string& stem, const std::string& text) {
  const auto path =
      std::filesystem::temp_directory_path() / ("spinmech_" + stem + ".txt");
  std::ofstream out(path);
  out << text;
  out.close();
  return path.string();
}

std::vector<double> sorted_energies(const DonorSpecies& s, double B) {
  // Reconstruct the spectrum from the ground level and adjacent gaps.
  std::vector<double> e(static_cast<std::size_t>(s.levels()), 0.0);
  for (int k = 0; k + 1 < s.levels(); ++k)
    e[k + 1] = e[k] + transition_frequency(s, B, {k, k + 1});
  return e;
}

}  // namespace

TEST_CASE("donor species validation") {
  CHECK_NOTHROW(bismuth().validate());
  CHECK_NOTHROW(phosphorus().validate());
  CHECK(bismuth().levels() == 20);
  CHECK(phosphorus().levels() == 4);
  CHECK(electron_only().levels() == 2);

  auto bad = bismuth();
  bad.gamma_e = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = bismuth();
  bad.nuclear_spin = 0.3;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = bismuth();
  bad.nuclear_spin = -0.5;
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
  bad = bismuth();
  bad.A_hf = std::nan("");
  CHECK_THROWS_AS(bad.validate(), InvalidParameterError);
}

TEST_CASE("spin hamiltonian structure") {
  SUBCASE("spinless nucleus reduces to a bare electron") {
    const auto s = electron_only();
    const Operator h = spin_hamiltonian(s, 0.25);
    REQUIRE(h.matrix.rows() == 2);
    const Matrix expected = 0.5 * s.gamma_e * 0.25 * pauli(Axis::z).matrix;
    CHECK((h.matrix - expected).cwiseAbs().maxCoeff() < 1e-6);
    const double split = transition_frequency(s, 0.25, {0, 1});
    CHECK(split == doctest::Approx(s.gamma_e * 0.25).epsilon(1e-12));
  }

  SUBCASE("hermitian with the right dimension") {
    const Operator h = spin_hamiltonian(bismuth(), 0.1);
    REQUIRE(h.matrix.rows() == 20);
    CHECK(h.is_hermitian());
  }

  SUBCASE("zero-field multiplets") {
    // Hyperfine only: two multiplets split by A (I + 1/2), with 2I and
    // 2I + 2 members.
    const auto bi = bismuth();
    const auto e = sorted_energies(bi, 0.0);
    const double split = e.back() - e.front();
    CHECK(split == doctest::Approx(5.0 * bi.A_hf).epsilon(1e-9));
    CHECK(split == doctest::Approx(7.377e9).epsilon(1e-6));
    int lower = 0, upper = 0;
    for (double ek : e) {
      if (std::abs(ek - e.front()) < 1.0)
        ++lower;
      else if (std::abs(ek - e.back()) < 1.0)
        ++upper;
    }
    CHECK(lower == 9);
    CHECK(upper == 11);

    const auto p = phosphorus();
    const auto ep = sorted_energies(p, 0.0);
    CHECK(ep.back() - ep.front() == doctest::Approx(p.A_hf).epsilon(1e-9));
    int upper_p = 0;
    for (double ek : ep)
      if (std::abs(ek - ep.back()) < 1.0) ++upper_p;
    CHECK(upper_p == 3);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(spin_hamiltonian(bismuth(), -0.1), InvalidParameterError);
    CHECK_THROWS_AS(transition_frequency(bismuth(), 0.1, {5, 5}),
                    InvalidParameterError);
    CHECK_THROWS_AS(transition_frequency(bismuth(), 0.1, {-1, 3}),
                    InvalidParameterError);
    CHECK_THROWS_AS(transition_frequency(bismuth(), 0.1, {0, 20}),
                    InvalidParameterError);
  }
}

TEST_CASE("four-level closed form for a spin-1/2 nucleus") {
  // For I = 1/2 the ground-to-stretched gap has the exact form
  // A/2 + (ge - gn) B / 2 + (A/2) sqrt(1 + x^2), x = (ge + gn) B / A.
  const auto p = phosphorus();
  for (double B : {0.01, 0.05, 0.2}) {
    const double x = (p.gamma_e + p.gamma_n) * B / p.A_hf;
    const double f_exact = 0.5 * p.A_hf + 0.5 * (p.gamma_e - p.gamma_n) * B +
                           0.5 * p.A_hf * std::sqrt(1.0 + x * x);
    const double g_exact = 0.5 * (p.gamma_e - p.gamma_n) +
                           0.5 * (p.gamma_e + p.gamma_n) * x /
                               std::sqrt(1.0 + x * x);
    CHECK(transition_frequency(p, B, {0, 3}) ==
          doctest::Approx(f_exact).epsilon(1e-10));
    CHECK(transition_gradient(p, B, {0, 3}) ==
          doctest::Approx(g_exact).epsilon(1e-8));
  }
}

TEST_CASE("transition gradient") {
  SUBCASE("spinless nucleus is exactly linear") {
    const auto s = electron_only();
    CHECK(transition_gradient(s, 0.1, {0, 1}) ==
          doctest::Approx(s.gamma_e).epsilon(1e-9));
  }

  SUBCASE("high-field asymptotes") {
    // At 90 T the electron-flip transitions ride gamma_e with a nuclear
    // offset of 0 or +-gamma_n, and adjacent nuclear transitions ride
    // gamma_n.
    const auto bi = bismuth();
    const double B = 90.0;
    CHECK(std::abs(transition_gradient(bi, B, {0, 19}) - bi.gamma_e) <
          1e-5 * bi.gamma_e);
    CHECK(std::abs(transition_gradient(bi, B, {0, 18}) -
                   (bi.gamma_e + bi.gamma_n)) < 0.01 * bi.gamma_n);
    CHECK(std::abs(transition_gradient(bi, B, {1, 19}) -
                   (bi.gamma_e - bi.gamma_n)) < 0.01 * bi.gamma_n);
    CHECK(std::abs(transition_gradient(bi, B, {0, 1}) - bi.gamma_n) <
          0.01 * bi.gamma_n);
  }

  SUBCASE("hyperfine mixing separates gradients at low field") {
    const auto bi = bismuth();
    const double g_a = transition_gradient(bi, 0.05, {0, 19});
    const double g_b = transition_gradient(bi, 0.05, {0, 18});
    CHECK(std::abs(g_a - g_b) > 0.01 * bi.gamma_e);
  }

  SUBCASE("tiny fields are rejected") {
    CHECK_THROWS_AS(transition_gradient(bismuth(), 1e-7, {0, 19}),
                    PreconditionError);
    CHECK_THROWS_AS(transition_gradient(bismuth(), 0.0, {0, 19}),
                    InvalidParameterError);
  }
}

TEST_CASE("bismuth microwave transition near 9.7 GHz") {
  const auto bi = bismuth();
  const double f_target = 9.7e9;
  const double b_star = find_transition_field(bi, {0, 19}, f_target, 0.01, 0.3);
  CHECK(b_star == doctest::Approx(0.0898).epsilon(0.006));
  CHECK(transition_frequency(bi, b_star, {0, 19}) ==
        doctest::Approx(f_target).epsilon(1e-9));
  const double ratio = transition_gradient(bi, b_star, {0, 19}) / bi.gamma_e;
  CHECK(ratio == doctest::Approx(0.9425).epsilon(6e-4));

  SUBCASE("bracket without a root is rejected") {
    CHECK_THROWS_AS(find_transition_field(bi, {0, 19}, 1e9, 0.01, 0.3),
                    RangeError);
    CHECK_THROWS_AS(find_transition_field(bi, {0, 19}, f_target, 0.3, 0.1),
                    InvalidParameterError);
  }
}

TEST_CASE("level ordering is continuous in the field") {
  // Entries are gaps to the ground level, so the slope bound is the level
  // DIFFERENCE slope: |d(E_k - E_0)/dB| <= gamma_e + 2 I gamma_n.
  const auto bi = bismuth();
  const double db = 0.01;
  const double bound = 1.5 * (bi.gamma_e + 9.0 * bi.gamma_n) * db;
  auto prev = sorted_energies(bi, 0.01);
  for (int i = 1; i <= 29; ++i) {
    const auto cur = sorted_energies(bi, 0.01 + i * db);
    for (std::size_t k = 0; k < cur.size(); ++k)
      CHECK(std::abs(cur[k] - prev[k]) <= bound);
    prev = cur;
  }
}

TEST_CASE("level crossing inside the stencil is detected") {
  // The two highest phosphorus levels cross where the nuclear Zeeman term
  // cancels the hyperfine ladder, near A / (2 gamma_n) = 3.41 T. Locate the
  // crossing by scanning the adjacent gap, refine it, and probe the
  // gradient with the crossing inside the coarse stencil only.
  const auto p = phosphorus();
  double best_b = 0.0, best_gap = 1e300;
  for (int i = 0; i <= 1000; ++i) {
    const double B = 2.5 + i * 2e-3;
    const double gap = transition_frequency(p, B, {2, 3});
    if (gap < best_gap) {
      best_gap = gap;
      best_b = B;
    }
  }
  double lo = best_b - 2e-3, hi = best_b + 2e-3;
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (transition_frequency(p, m1, {2, 3}) <
        transition_frequency(p, m2, {2, 3}))
      hi = m2;
    else
      lo = m1;
  }
  const double b_cross = 0.5 * (lo + hi);
  CHECK(b_cross == doctest::Approx(3.41).epsilon(0.01));
  REQUIRE(transition_frequency(p, b_cross, {2, 3}) < 1e3);  // true crossing

  const double h = std::max(1e-6, 1e-6 * b_cross);
  CHECK_THROWS_AS(transition_gradient(p, b_cross - 0.6 * h, {2, 3}),
                  StencilError);
  CHECK_NOTHROW(transition_gradient(p, 3.0, {2, 3}));
  CHECK_NOTHROW(transition_gradient(p, b_cross + 0.5, {2, 3}));
}

TEST_CASE("mechanical mode validation") {
  MechanicalMode mode;
  mode.x_zpf = 1e-13;
  mode.omega_m = 1e6;
  CHECK_NOTHROW(mode.validate());

  // Mass consistent with x_zpf = sqrt(hbar / (2 m w)).
  const double m_eff = 1.054571817e-34 / (2.0 * mode.omega_m * 1e-26);
  mode.m_eff = m_eff;
  CHECK_NOTHROW(mode.validate());
  mode.x_zpf = 1.04e-13;
  CHECK_NOTHROW(mode.validate());
  mode.x_zpf = 1.06e-13;
  CHECK_THROWS_AS(mode.validate(), InvalidParameterError);

  mode = MechanicalMode{};
  mode.x_zpf = 0.0;
  mode.omega_m = 1e6;
  CHECK_THROWS_AS(mode.validate(), InvalidParameterError);
  mode.x_zpf = 1e-13;
  mode.omega_m = -1.0;
  CHECK_THROWS_AS(mode.validate(), InvalidParameterError);
}

TEST_CASE("coupling rate helpers") {
  SUBCASE("gradient scheme") {
    MechanicalMode mode;
    mode.x_zpf = 1e-13;
    mode.omega_m = 1e6;
    const double lam =
        gradient_coupling(electron_only(), mode, 1e6, 0.1, {0, 1});
    CHECK(lam == doctest::Approx(2.8e3).epsilon(1e-9));
    CHECK(gradient_coupling(electron_only(), mode, 0.0, 0.1, {0, 1}) == 0.0);
    CHECK_THROWS_AS(gradient_coupling(electron_only(), mode, -1.0, 0.1, {0, 1}),
                    InvalidParameterError);
  }

  SUBCASE("strain scheme") {
    CHECK(strain_coupling(bismuth(), 1.82e-8) ==
          doctest::Approx(400.4).epsilon(1e-12));
    CHECK(strain_coupling(bismuth(), 2.0 * 1.82e-8) ==
          doctest::Approx(800.8).epsilon(1e-12));
    CHECK_THROWS_AS(strain_coupling(bismuth(), std::nan("")),
                    InvalidParameterError);
  }

  SUBCASE("ensemble enhancement") {
    CHECK(ensemble_coupling(0.2e3, 225) == doctest::Approx(3e3).epsilon(1e-12));
    CHECK(ensemble_coupling(7.0, 1) == doctest::Approx(7.0).epsilon(1e-15));
    CHECK(ensemble_coupling(5.0, 9) == doctest::Approx(15.0).epsilon(1e-15));
    CHECK_THROWS_AS(ensemble_coupling(5.0, 0), InvalidParameterError);
    CHECK_THROWS_AS(ensemble_coupling(-1.0, 4), InvalidParameterError);
  }
}

TEST_CASE("profile loading and interpolation") {
  SUBCASE("linear data is reproduced exactly") {
    const auto path = write_temp("profile_linear",
                                 "# synthetic linear ramp\n"
                                 "0.0   0.0\n"
                                 "1e-9  2.0\n"
                                 "2e-9  4.0\n"
                                 "4e-9  8.0\n");
    const auto prof = load_profile(path, FieldProfile::Kind::gradient);
    REQUIRE(prof.distance.size() == 4);
    CHECK(prof.note == "synthetic linear ramp");
    CHECK(prof.kind == FieldProfile::Kind::gradient);
    CHECK(interp(prof, 0.5e-9) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(interp(prof, 3e-9) == doctest::Approx(6.0).epsilon(1e-12));
    for (std::size_t i = 0; i < prof.distance.size(); ++i)
      CHECK(interp(prof, prof.distance[i]) ==
            doctest::Approx(prof.value[i]).epsilon(1e-13));
    CHECK_THROWS_AS(interp(prof, -1e-10), RangeError);
    CHECK_THROWS_AS(interp(prof, 4.1e-9), RangeError);
  }

  SUBCASE("monotone data never overshoots") {
    FieldProfile prof;
    prof.kind = FieldProfile::Kind::strain;
    prof.distance = {0.0, 1.0, 2.0, 3.0};
    prof.value = {0.0, 1.0, 1.1, 5.0};
    for (std::size_t i = 0; i + 1 < prof.distance.size(); ++i) {
      for (int j = 1; j < 50; ++j) {
        const double q = prof.distance[i] +
                         j * (prof.distance[i + 1] - prof.distance[i]) / 50.0;
        const double v = interp(prof, q);
        CHECK(v >= prof.value[i] - 1e-12);
        CHECK(v <= prof.value[i + 1] + 1e-12);
      }
    }
  }

  SUBCASE("parse errors carry the line number") {
    const auto bad_cols =
        write_temp("profile_badcols", "0 1\n1 2 3\n2 4\n");
    try {
      load_profile(bad_cols, FieldProfile::Kind::gradient);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    const auto bad_order = write_temp("profile_order", "0 1\n2 2\n1 3\n");
    try {
      load_profile(bad_order, FieldProfile::Kind::gradient);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const auto not_num = write_temp("profile_nan", "0 1\nfoo 2\n");
    CHECK_THROWS_AS(load_profile(not_num, FieldProfile::Kind::gradient),
                    ParseError);
    const auto too_short = write_temp("profile_short", "# only one row\n0 1\n");
    CHECK_THROWS_AS(load_profile(too_short, FieldProfile::Kind::gradient),
                    ParseError);
    CHECK_THROWS_AS(
        load_profile("/nonexistent/file.txt", FieldProfile::Kind::gradient),
        ParseError);
  }
}

TEST_CASE("species file loading") {
  const auto path = write_temp("species_ok",
                               "# test species\n"
                               "name = testium\n"
                               "gamma_e = 2.5e10\n"
                               "gamma_n = 5e6\n"
                               "I = 1.5\n"
                               "A_hf = 1e9\n"
                               "strain_coeff = 3e9\n");
  const auto s = load_species(path);
  CHECK(s.name == "testium");
  CHECK(s.gamma_e == doctest::Approx(2.5e10));
  CHECK(s.gamma_n == doctest::Approx(5e6));
  CHECK(s.nuclear_spin == doctest::Approx(1.5));
  CHECK(s.A_hf == doctest::Approx(1e9));
  CHECK(s.strain_coeff == doctest::Approx(3e9));
  CHECK(s.levels() == 8);

  SUBCASE("malformed files are rejected") {
    const auto missing = write_temp("species_missing",
                                    "name = x\ngamma_e = 1e9\ngamma_n = 0\n"
                                    "I = 0\nA_hf = 0\n");
    try {
      load_species(missing);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("strain_coeff") != std::string::npos);
    }

    const auto unknown = write_temp("species_unknown",
                                    "name = x\ngamma_e = 1e9\ngamma_n = 0\n"
                                    "I = 0\nA_hf = 0\nstrain_coeff = 0\n"
                                    "bogus = 1\n");
    CHECK_THROWS_AS(load_species(unknown), ParseError);

    const auto dup = write_temp("species_dup",
                                "gamma_e = 1e9\ngamma_e = 2e9\n");
    CHECK_THROWS_AS(load_species(dup), ParseError);

    const auto bad_num = write_temp("species_badnum",
                                    "name = x\ngamma_e = fast\ngamma_n = 0\n"
                                    "I = 0\nA_hf = 0\nstrain_coeff = 0\n");
    CHECK_THROWS_AS(load_species(bad_num), ParseError);

    const auto bad_spin = write_temp("species_badspin",
                                     "name = x\ngamma_e = 1e9\ngamma_n = 0\n"
                                     "I = 0.3\nA_hf = 0\nstrain_coeff = 0\n");
    CHECK_THROWS_AS(load_species(bad_spin), InvalidParameterError);
  }
}
