#include <catch_amalgamated.hpp>

#include <cmath>

#include "tlsscope/stm.hpp"

using namespace tlsscope;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

// Independent SI constants for oracles.
constexpr double H = 6.62607015e-34;
constexpr double HBAR = H / (2 * M_PI);
constexpr double QE = 1.602176634e-19;
constexpr double EPS0 = 8.8541878128e-12;

}  // namespace

TEST_CASE("transition energy is the hypotenuse of delta0 and eps") {
  TlsParams t;
  t.delta0 = 3.0;
  t.eps_i = 4.0;
  CHECK_THAT(transition_energy(t, {}), WithinRel(5.0, 1e-15));
  t.eps_i = 0.0;
  CHECK_THAT(transition_energy(t, {}), WithinRel(3.0, 1e-15));
  CHECK_THAT(matrix_element(t, {}), WithinRel(1.0, 1e-15));
}

TEST_CASE("asymmetry is linear in each control") {
  TlsParams t;
  t.eps_i = 0.5;
  t.gamma_p = 0.02;
  t.gamma_g = -0.01;
  t.gamma_s = 161.95;
  const BiasPoint b{10.0, -3.0, 1e-3, 0.0};
  CHECK_THAT(asymmetry(t, b), WithinRel(0.5 + 0.2 + 0.03 + 0.16195, 1e-14));
  // Symmetry point of the sample control.
  const double v_sym = -(t.eps_i + t.gamma_p * 10.0 - 0.01 * -3.0) / t.gamma_s;
  CHECK_THAT(transition_energy(t, {10.0, -3.0, v_sym, 0.0}), WithinRel(t.delta0, 1e-9));
}

TEST_CASE("coupling strength of a 0.1 eA dipole at 90 V/m") {
  TlsParams t;
  t.delta0 = 5.0;
  t.p_parallel = 0.1;
  const double expected = 0.1 * QE * 1e-10 * 90.0 / HBAR / (2 * M_PI) / 1e6;  // MHz
  CHECK_THAT(coupling_strength(t, 90.0, {}), WithinRel(expected, 1e-12));
  CHECK_THAT(coupling_strength(t, 90.0, {}), WithinRel(0.2176, 1e-3));
  // Off the symmetry point the matrix element delta0/E reduces g.
  t.eps_i = 5.0;
  CHECK_THAT(coupling_strength(t, 90.0, {}), WithinRel(expected / std::sqrt(2.0), 1e-12));
  CHECK_THROWS_AS(coupling_strength(t, -1.0, {}), InvalidArgument);
}

TEST_CASE("vacuum voltage of the sensor qubit") {
  SensorDesign d;
  const double expected = std::sqrt(HBAR * 2 * M_PI * 6.2e9 / (2 * 100e-15)) * 1e6;
  CHECK_THAT(vacuum_voltage(d), WithinRel(expected, 1e-12));
  CHECK_THAT(vacuum_voltage(d), WithinRel(4.5, 0.02));
  d.c_tot_fF = 25.0;  // quarter capacitance doubles V_rms
  CHECK_THAT(vacuum_voltage(d), WithinRel(2 * expected, 1e-12));
}

TEST_CASE("design thickness d = p T1 V_rms / hbar") {
  CHECK_THAT(design_thickness(0.1, 1.0, 4.5), WithinRel(0.1 * QE * 1e-10 * 1e-6 * 4.5e-6 / HBAR / 1e-9, 1e-12));
  CHECK_THAT(design_thickness(0.1, 1.0, 4.5), WithinRel(68.37, 1e-3));
  CHECK_THAT(design_thickness(0.335, 1.0, 4.5), WithinRel(3.35 * 68.37, 1e-3));
  CHECK_THROWS_AS(design_thickness(0.0, 1.0, 4.5), InvalidArgument);
}

TEST_CASE("parallel-plate sample capacitance") {
  SensorDesign d;
  CHECK_THAT(sample_capacitance(d), WithinRel(EPS0 * 10 * 0.075e-12 / 50e-9 / 1e-15, 1e-12));
  CHECK_THAT(sample_capacitance(d), WithinRel(0.13, 0.03));
  d.area_um2 = 0.3 * 2.1;
  CHECK_THAT(sample_capacitance(d), WithinRel(1.1156, 1e-3));
  CHECK(design_warnings(SensorDesign{}).empty());
  d.area_um2 = 50.0;  // C_s ~ 88 fF: not small against C_tot
  CHECK_FALSE(design_warnings(d).empty());
}

TEST_CASE("sample field is V_rms / d") {
  SensorDesign d;
  CHECK_THAT(sample_field_rms(d), WithinRel(vacuum_voltage(d) * 1e-6 / 50e-9, 1e-12));
  CHECK_THAT(sample_field_rms(d), WithinRel(90.0, 0.02));
}

TEST_CASE("gamma and dipole conversion") {
  // p = h gamma d / 2
  const double p = H * 161.95e9 * 50e-9 / 2 / (QE * 1e-10);
  CHECK_THAT(dipole_from_gamma(161.95, 50.0), WithinRel(p, 1e-12));
  CHECK_THAT(dipole_from_gamma(161.95, 50.0), WithinRel(0.1675, 1e-3));
  CHECK_THAT(dipole_from_gamma(92.25, 50.0), WithinRel(0.0954, 1e-3));
  CHECK(dipole_from_gamma(0.0, 50.0) == 0.0);
  CHECK_THAT(gamma_from_dipole(dipole_from_gamma(123.4, 37.0), 37.0), WithinRel(123.4, 1e-13));
  CHECK_THROWS_AS(dipole_from_gamma(1.0, 0.0), InvalidArgument);
}

TEST_CASE("minimum detectable dipole") {
  CHECK_THAT(min_detectable_dipole(90.0, 1.0), WithinRel(HBAR / (90.0 * 1e-6) / (QE * 1e-10), 1e-12));
  // Weaker junction field needs a six times larger dipole.
  CHECK_THAT(min_detectable_dipole(15.0, 1.0) / min_detectable_dipole(90.0, 1.0), WithinRel(6.0, 1e-12));
}

TEST_CASE("TlsParams and BiasPoint invariants") {
  TlsParams t;
  CHECK_NOTHROW(t.validate());
  t.delta0 = 0.0;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  t = TlsParams{};
  t.gamma1_tls = 2.0;
  t.gamma2_tls = 0.5;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  t = TlsParams{};
  t.location = Location::SampleDielectric;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);
  t.gamma_s = 100.0;
  CHECK_NOTHROW(t.validate());
  t = TlsParams{};
  t.location = Location::Junction;
  t.gamma_g = 0.01;
  CHECK_THROWS_AS(t.validate(), InvalidArgument);

  CHECK_NOTHROW((BiasPoint{0, 0, 2.4e-3, 0}.validate()));
  CHECK_THROWS_AS((BiasPoint{0, 0, -2.6e-3, 0}.validate()), BiasLimitExceeded);
}

TEST_CASE("location and control names round-trip") {
  for (Location l : {Location::SampleDielectric, Location::Junction, Location::StrayJunction,
                     Location::SurfaceElectrode, Location::Unclassified})
    CHECK(location_from_string(to_string(l)) == l);
  for (Control c : all_controls) CHECK(control_from_string(to_string(c)) == c);
  CHECK_FALSE(location_from_string("bulk").has_value());
}
