#include <catch_amalgamated.hpp>

#include <cmath>

#include "tlsscope/metrics.hpp"

using namespace tlsscope;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double H = 6.62607015e-34;
constexpr double QE = 1.602176634e-19;
constexpr double EPS0 = 8.8541878128e-12;

// pi P0 p^2 / (3 eps0 eps_r) with P0 converted from (um^3 GHz)^-1 to (m^3 J)^-1.
double tan_delta_oracle(double p0, double p_ea, double eps_r) {
  const double p0_si = p0 / (1e-18 * H * 1e9);
  const double p = p_ea * QE * 1e-10;
  return M_PI * p0_si * p * p / (3 * EPS0 * eps_r);
}

}  // namespace

TEST_CASE("volume density") {
  CHECK_THAT(volume_density(4.1, 2.25e-3), WithinRel(1822.2, 1e-4));
  CHECK_THAT(volume_density(4.1, 2.25e-3), WithinRel(1800, 0.02));
  CHECK(volume_density(0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(volume_density(1.0, 0.0), InvalidArgument);
  // Junction barrier: 17.17 um^2 x 1.5 nm and x 2 nm.
  const double v15 = 17.17 * 1.5e-3, v20 = 17.17 * 2e-3;
  CHECK_THAT(volume_density(360 * v15, v15), WithinRel(360, 1e-12));
  CHECK_THAT(volume_density(360 * v15, v20), WithinRel(270, 1e-12));
}

TEST_CASE("loss tangent") {
  CHECK_THAT(loss_tangent(1800, 0.4, 10), WithinRel(tan_delta_oracle(1800, 0.4, 10), 1e-12));
  CHECK_THAT(loss_tangent(1800, 0.8, 10) / loss_tangent(1800, 0.4, 10), WithinRel(4.0, 1e-12));
  CHECK_THAT(loss_tangent(270, 0.4, 10), WithinRel(tan_delta_oracle(270, 0.4, 10), 1e-12));
  // Invariant under doubling both density and volume.
  CHECK_THAT(loss_tangent(volume_density(8.2, 4.5e-3), 0.4, 10),
             WithinRel(loss_tangent(volume_density(4.1, 2.25e-3), 0.4, 10), 1e-14));
  CHECK_THROWS_AS(loss_tangent(0, 0.4, 10), InvalidArgument);
}

TEST_CASE("relaxation budget") {
  SensorDesign d;
  auto b = relaxation_budget(d, 0.0, 0.25);
  CHECK(b.gamma1 == 0.25);
  CHECK_FALSE(b.dielectric_limited);

  // 2 pi f p_s tan + Gamma_1,0 with p_s = C_s / (C_s + C).
  SensorDesign first = d;
  first.area_um2 = 0.3 * 2.1;
  const double cs = EPS0 * 10 * 0.63e-12 / 50e-9 / 1e-15;
  const double ps = cs / (cs + 100.0);
  b = relaxation_budget(first, 1.6e-3, 0.1);
  CHECK_THAT(b.participation, WithinRel(ps, 1e-12));
  CHECK_THAT(b.gamma1, WithinRel(2 * M_PI * 6.2e3 * ps * 1.6e-3 + 0.1, 1e-12));
  CHECK(b.dielectric_limited);

  // Second geometry: 0.075 um^2 film, tan 1.7e-3 and Gamma_1,0 = 1/(5 us).
  b = relaxation_budget(d, 1.7e-3, 0.2);
  CHECK_THAT(b.gamma1, WithinRel(1.0 / 3.0, 0.4));

  // Monotone in area and thickness.
  double prev = 0;
  for (double a : {0.05, 0.1, 0.2, 0.5, 1.0}) {
    SensorDesign x = d;
    x.area_um2 = a;
    const double g = relaxation_budget(x, 1.6e-3, 0.1).gamma1;
    CHECK(g > prev);
    prev = g;
  }
  prev = 1e9;
  for (double t : {20.0, 50.0, 100.0, 200.0}) {
    SensorDesign x = d;
    x.d_nm = t;
    const double g = relaxation_budget(x, 1.6e-3, 0.1).gamma1;
    CHECK(g < prev);
    prev = g;
  }
  // p_s -> 0 continuously.
  SensorDesign tiny = d;
  tiny.area_um2 = 1e-12;
  CHECK_THAT(relaxation_budget(tiny, 1.6e-3, 0.1).gamma1, WithinAbs(0.1, 1e-9));
  SensorDesign huge = d;
  huge.area_um2 = 1e4;
  CHECK_THROWS_AS(relaxation_budget(huge, 1.6e-3, 0.1), InvalidArgument);
}

TEST_CASE("field free volume") {
  CHECK_THAT(field_free_volume(0.25, 0.3, 50), WithinRel(0.15 * 0.3 * 0.05, 1e-12));
  CHECK_THAT(field_free_volume(0.25, 0.3, 50, 0), WithinRel(0.25 * 0.3 * 0.05, 1e-12));
  CHECK_THROWS_AS(field_free_volume(0.05, 0.3, 50), InvalidArgument);
}

TEST_CASE("material report") {
  MaterialAssumptions a;
  a.t1_us = 4.3;  // junction cut hbar / (p E T1) = 0.10 eA
  std::vector<DipoleSample> s{
      {Location::SampleDielectric, 0.3, 1.0},
      {Location::SampleDielectric, 0.5, 2.0},
      {Location::SampleDielectric, 0.01, 0.5},  // below the junction cut
      {Location::Junction, NAN, 0.25},
      {Location::Unclassified, NAN, 0.125},
  };
  const auto r = material_report(s, a);
  CHECK(r.n_tls_total == 5);
  CHECK(r.n_dipoles == 3);
  CHECK_THAT(r.p_parallel_mean, WithinRel(0.27, 1e-12));
  CHECK_THAT(r.p_parallel_std, WithinRel(std::sqrt((0.03 * 0.03 + 0.23 * 0.23 + 0.26 * 0.26) / 2), 1e-12));
  CHECK_THAT(r.spectral_density.at(Location::SampleDielectric), WithinRel(3.5, 1e-15));
  CHECK_THAT(r.p0, WithinRel(3.5 / 2.25e-3, 1e-12));
  CHECK_THAT(r.tan_delta0, WithinRel(tan_delta_oracle(3.5 / 2.25e-3, 0.27, 10), 1e-12));
  CHECK(r.min_detectable_dipole_junction > 0.01);
  CHECK(r.min_detectable_dipole_junction < 0.3);
  CHECK_THAT(r.spectral_density_cut.at(Location::SampleDielectric), WithinRel(3.0, 1e-15));
  CHECK_THAT(r.spectral_density_cut.at(Location::Junction), WithinRel(0.25, 1e-15));

  const auto j = to_json(r);
  CHECK(j.at("n_dipoles") == 3);
  CHECK(to_text(r).find("P0") != std::string::npos);

  const auto empty = material_report({}, a);
  CHECK(empty.p0 == 0.0);
  CHECK(empty.tan_delta0 == 0.0);
}
