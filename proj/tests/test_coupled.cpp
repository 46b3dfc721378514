#include <catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "tlsscope/coupled.hpp"
#include "tlsscope/rng.hpp"

using namespace tlsscope;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner
// with Newton polishing. Independent of the Jacobi solver.
std::array<double, 4> quartic_oracle(const Matrix4& a) {
  std::array<cplx, 5> c{};  // det(lambda I - A) = sum c[k] lambda^(4-k)
  c[0] = 1.0;
  Matrix4 m = Matrix4::identity();
  Matrix4 am;
  for (int k = 1; k <= 4; ++k) {
    am = a * m;
    c[k] = -am.trace() / double(k);
    m = am + Matrix4::identity() * c[k];
  }
  auto poly = [&](cplx x) {
    cplx s = c[0];
    for (int k = 1; k <= 4; ++k) s = s * x + c[k];
    return s;
  };
  auto dpoly = [&](cplx x) {
    cplx s = 4.0 * c[0];
    for (int k = 1; k <= 3; ++k) s = s * x + double(4 - k) * c[k];
    return s;
  };
  std::array<cplx, 4> z;
  const cplx seed(0.4, 0.9);
  for (int i = 0; i < 4; ++i) z[i] = std::pow(seed, i) * (1.0 + a.frobenius_norm());
  for (int it = 0; it < 2000; ++it) {
    for (int i = 0; i < 4; ++i) {
      cplx den = 1.0;
      for (int j = 0; j < 4; ++j)
        if (j != i) den *= z[i] - z[j];
      z[i] -= poly(z[i]) / den;
    }
  }
  std::array<double, 4> out;
  for (int i = 0; i < 4; ++i) {
    cplx x = z[i];
    for (int k = 0; k < 5; ++k) {
      const cplx d = dpoly(x);
      if (std::abs(d) > 1e-300) x -= poly(x) / d;
    }
    out[i] = x.real();
  }
  std::sort(out.begin(), out.end());
  return out;
}

Matrix4 random_hermitian(Engine& gen) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix4 h;
  for (std::size_t i = 0; i < 4; ++i) {
    h(i, i) = 3.0 * u(gen);
    for (std::size_t j = i + 1; j < 4; ++j) {
      h(i, j) = cplx(u(gen), u(gen));
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

TlsParams tls_at(double eps, double delta) {
  TlsParams t;
  t.eps_i = eps;
  t.delta0 = delta;
  return t;
}

// Single-excitation transitions of the truncated eigenbasis Hamiltonian:
// its {|10>,|01>} and {|11>,|00>} blocks are 2x2.
std::array<double, 2> truncated_oracle(double e1, double e2, double zz_mhz, double xx_mhz) {
  const double zz = zz_mhz * 1e-3, xx = xx_mhz * 1e-3;
  const double ground = zz / 2 - std::hypot((e1 + e2) / 2, xx / 2);
  const double r = std::hypot((e1 - e2) / 2, xx / 2);
  return {-zz / 2 - r - ground, -zz / 2 + r - ground};
}

}  // namespace

TEST_CASE("single TLS hamiltonian") {
  auto s = eigensolve_hermitian(single_tls_hamiltonian(0.0, 5.440));
  CHECK_THAT(s.eigenvalues[0], WithinAbs(-2.720, 1e-12));
  CHECK_THAT(s.eigenvalues[1], WithinAbs(2.720, 1e-12));
  s = eigensolve_hermitian(single_tls_hamiltonian(4.0, 3.0));
  CHECK_THAT(s.eigenvalues[1], WithinAbs(2.5, 1e-12));
  const Matrix2 d = single_tls_hamiltonian(1.0, 0.0);
  CHECK(d(0, 0) == cplx(0.5));
  CHECK(d(1, 1) == cplx(-0.5));
  CHECK(std::abs(d(0, 1)) == 0.0);
  CHECK(std::abs(single_tls_hamiltonian(0.3, 0.7).trace()) < 1e-15);
}

TEST_CASE("eigensolver on simple matrices") {
  const auto s = eigensolve_hermitian(Matrix4::diagonal({4, 2, 1, 3}));
  CHECK(s.eigenvalues == std::array<double, 4>{1, 2, 3, 4});
  const std::array<std::size_t, 4> row_of{2, 1, 3, 0};  // position of 1, 2, 3, 4 on the diagonal
  for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(std::abs(s.eigenvectors(row_of[k], k)), WithinAbs(1.0, 1e-15));

  const auto x = eigensolve_hermitian(kron(pauli::x(), pauli::identity()));
  CHECK_THAT(x.eigenvalues[0], WithinAbs(-1, 1e-14));
  CHECK_THAT(x.eigenvalues[1], WithinAbs(-1, 1e-14));
  CHECK_THAT(x.eigenvalues[2], WithinAbs(1, 1e-14));
  CHECK_THAT(x.eigenvalues[3], WithinAbs(1, 1e-14));
}

TEST_CASE("eigensolver matches characteristic polynomial roots") {
  Engine gen = make_engine(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix4 h = random_hermitian(gen);
    const auto s = eigensolve_hermitian(h);
    const auto oracle = quartic_oracle(h);
    for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(s.eigenvalues[k], WithinAbs(oracle[k], 1e-9));
    CHECK(std::is_sorted(s.eigenvalues.begin(), s.eigenvalues.end()));
    CHECK(unitarity_defect(s) < 1e-10);
    CHECK(reconstruction_residual(h, s) <= 1e-10 * h.frobenius_norm());
  }
}

TEST_CASE("eigensolver rejects non-Hermitian input") {
  Matrix4 h = Matrix4::identity();
  h(0, 1) = 1e-3;
  CHECK_THROWS_AS(eigensolve_hermitian(h), NonHermitianInput);
}

TEST_CASE("uncoupled pair: eigenvalues are sums of single-TLS levels") {
  const auto a = tls_at(1.2, 5.0), b = tls_at(-0.4, 5.5);
  const auto pair = CoupledPair::localized(a, b, 0.0);
  const Matrix4 h = full_hamiltonian_localized(pair, {});
  CHECK(std::abs(h.trace()) < 1e-14);
  const double e1 = std::hypot(1.2, 5.0), e2 = std::hypot(0.4, 5.5);
  std::array<double, 4> expected{-(e1 + e2) / 2, -(e1 - e2) / 2, (e1 - e2) / 2, (e1 + e2) / 2};
  std::sort(expected.begin(), expected.end());
  const auto s = eigensolve_hermitian(h);
  for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(s.eigenvalues[k], WithinAbs(expected[k], 1e-12));

  const auto t = pair_spectrum(CoupledPair::eigenbasis(a, b, 0.0, 0.0), {});
  CHECK_THAT(std::min(t.transition_01, t.transition_02), WithinAbs(std::min(e1, e2), 1e-12));
  CHECK_THAT(std::max(t.transition_01, t.transition_02), WithinAbs(std::max(e1, e2), 1e-12));
}

TEST_CASE("symmetric pair with g = 1 GHz matches the dense oracle") {
  const auto pair = CoupledPair::localized(tls_at(0, 5), tls_at(0, 5), 1000.0);
  const Matrix4 h = full_hamiltonian_localized(pair, {});
  const auto s = eigensolve_hermitian(h);
  const auto oracle = quartic_oracle(h);
  for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(s.eigenvalues[k], WithinAbs(oracle[k], 1e-9));
  CHECK(std::abs(h.trace()) < 1e-14);
}

TEST_CASE("truncated hamiltonian against the block oracle") {
  SECTION("no coupling gives E1 and E2") {
    const auto s = pair_spectrum(CoupledPair::eigenbasis(tls_at(0.8, 5.2), tls_at(0, 5.44), 0, 0), {});
    CHECK_THAT(s.transition_01, WithinAbs(std::hypot(0.8, 5.2), 1e-12));
    CHECK_THAT(s.transition_02, WithinAbs(5.44, 1e-12));
  }
  SECTION("on resonance with g_z = 0 the splitting is |g_x|") {
    const auto s = pair_spectrum(CoupledPair::eigenbasis(tls_at(0, 5.7), tls_at(0, 5.7), 0, -19), {});
    CHECK_THAT((s.transition_02 - s.transition_01) * 1e3, WithinRel(19.0, 1e-9));
  }
  SECTION("g_z = 25, g_x = -19 MHz at E = 5.7 GHz") {
    const auto s = pair_spectrum(CoupledPair::eigenbasis(tls_at(0, 5.7), tls_at(0, 5.7), 25, -19), {});
    const auto o = truncated_oracle(5.7, 5.7, 25, -19);
    CHECK_THAT(s.transition_01, WithinAbs(o[0], 1e-12));
    CHECK_THAT(s.transition_02, WithinAbs(o[1], 1e-12));
  }
  SECTION("random instances") {
    Engine gen = make_engine(7);
    std::uniform_real_distribution<double> e(4.5, 6.5), g(-50, 50);
    for (int i = 0; i < 100; ++i) {
      const double e1 = e(gen), e2 = e(gen), zz = g(gen), xx = g(gen);
      const auto s = make_spectrum4(eigenbasis_hamiltonian(e1, e2, {zz, xx, 0, 0}));
      const auto o = truncated_oracle(e1, e2, zz, xx);
      CHECK_THAT(s.transition_01, WithinAbs(o[0], 1e-11));
      CHECK_THAT(s.transition_02, WithinAbs(o[1], 1e-11));
    }
  }
}

TEST_CASE("coupling transformation to the eigenbasis") {
  SECTION("both at symmetry") {
    const auto g = transform_coupling_to_eigenbasis(10, tls_at(0, 4), tls_at(0, 1), {});
    CHECK_THAT(g.zz, WithinAbs(0, 1e-12));
    CHECK_THAT(g.xx, WithinAbs(10, 1e-12));
    CHECK_THAT(g.zx, WithinAbs(0, 1e-12));
    CHECK_THAT(g.xz, WithinAbs(0, 1e-12));
  }
  SECTION("fully asymmetric limit") {
    TlsParams a = tls_at(2.0, 0.0), b = tls_at(3.0, 0.0);
    const auto g = transform_coupling_to_eigenbasis(10, a, b, {});
    CHECK_THAT(g.zz, WithinAbs(10, 1e-12));
    CHECK_THAT(g.xx, WithinAbs(0, 1e-12));
  }
  SECTION("hand trigonometry example") {
    const auto g = transform_coupling_to_eigenbasis(10, tls_at(3, 4), tls_at(0, 1), {});
    CHECK_THAT(g.zz, WithinAbs(0, 1e-12));
    CHECK_THAT(g.xx, WithinAbs(8, 1e-12));
    CHECK_THAT(g.zx, WithinAbs(6, 1e-12));
    CHECK_THAT(g.xz, WithinAbs(0, 1e-12));
  }
  SECTION("matches conjugation by the single-TLS eigenvectors") {
    // U_i diagonalizes H_i with the excited state first; the conjugated
    // interaction has Pauli coefficients 1/2 g_ab = tr(H' sa (x) sb) / 4.
    Engine gen = make_engine(99);
    std::uniform_real_distribution<double> u(-3, 3), d(0.5, 5);
    const std::array<Matrix2, 2> paulis{pauli::z(), pauli::x()};
    for (int trial = 0; trial < 50; ++trial) {
      const TlsParams a = tls_at(u(gen), d(gen)), b = tls_at(u(gen), d(gen));
      auto basis = [](const TlsParams& t) {
        const auto s = eigensolve_hermitian(single_tls_hamiltonian(t, {}));
        Matrix2 m;
        for (std::size_t r = 0; r < 2; ++r) {
          m(r, 0) = s.eigenvectors(r, 1);
          m(r, 1) = s.eigenvectors(r, 0);
        }
        // Fix the sign of |g> so that <e|sz|g> = +sin(theta), the convention
        // sz = cos sz~ + sin sx~.
        const Matrix2 sz = m.adjoint() * pauli::z() * m;
        if (sz(0, 1).real() < 0) {
          m(0, 1) = -m(0, 1);
          m(1, 1) = -m(1, 1);
        }
        return m;
      };
      const Matrix4 u4 = kron(basis(a), basis(b));
      const Matrix4 h = u4.adjoint() * kron(pauli::z(), pauli::z()) * u4 * 10.0;
      const auto g = transform_coupling_to_eigenbasis(10, a, b, {});
      const std::array<double, 4> expect{g.zz, g.zx, g.xz, g.xx};
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
          const double coef = (h * kron(paulis[i], paulis[j])).trace().real() / 4.0;
          CHECK_THAT(coef, WithinAbs(expect[i * 2 + j], 1e-10));
        }
    }
  }
}

TEST_CASE("spectral equivalence of localized and complete eigenbasis hamiltonians") {
  Engine gen = make_engine(31337);
  std::uniform_real_distribution<double> eps(-3, 3), del(0.5, 6), g(-200, 200);
  for (int trial = 0; trial < 300; ++trial) {
    CoupledPair p{tls_at(eps(gen), del(gen)), tls_at(eps(gen), del(gen)), CouplingBasis::Localized, g(gen), g(gen)};
    const auto loc = pair_spectrum(p, {}, CoupledModel::Full).eigenvalues();
    const auto eig = make_spectrum4(complete_hamiltonian_eigenbasis(p, {})).eigenvalues();
    for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(eig[k], WithinAbs(loc[k], 1e-10 * std::abs(loc[3])));

    // tr H^2 is basis independent.
    const Matrix4 hl = full_hamiltonian_localized(p, {});
    const Matrix4 he = complete_hamiltonian_eigenbasis(p, {});
    CHECK_THAT((he * he).trace().real(), WithinRel((hl * hl).trace().real(), 1e-10));
    CHECK(he.hermiticity_defect() < 1e-14);
  }
}

TEST_CASE("truncation error stays below g^2 / min(E1, E2)") {
  Engine gen = make_engine(5);
  std::uniform_real_distribution<double> eps(-2, 2), del(4, 6), u(-1, 1);
  for (int trial = 0; trial < 300; ++trial) {
    CoupledPair p{tls_at(eps(gen), del(gen)), tls_at(eps(gen), del(gen)), CouplingBasis::Localized, 0, 0};
    const double emin = std::min(transition_energy(p.tls1, {}), transition_energy(p.tls2, {}));
    const double gmax_mhz = 0.01 * emin * 1e3;
    p.g_z = gmax_mhz * u(gen);
    p.g_x = gmax_mhz * u(gen);
    const auto t = pair_spectrum(p, {}, CoupledModel::Truncated);
    const auto f = pair_spectrum(p, {}, CoupledModel::Full);
    const double g = std::max(std::abs(p.g_z), std::abs(p.g_x)) * 1e-3;
    CHECK(std::abs(t.transition_01 - f.transition_01) <= g * g / emin);
    CHECK(std::abs(t.transition_02 - f.transition_02) <= g * g / emin);
  }
}

TEST_CASE("swapping the two TLS leaves the spectrum unchanged") {
  Engine gen = make_engine(17);
  std::uniform_real_distribution<double> eps(-2, 2), del(1, 6), g(-50, 50);
  for (int trial = 0; trial < 50; ++trial) {
    CoupledPair p{tls_at(eps(gen), del(gen)), tls_at(eps(gen), del(gen)), CouplingBasis::Localized, g(gen), g(gen)};
    CoupledPair q{p.tls2, p.tls1, p.basis, p.g_z, p.g_x};
    for (CoupledModel m : {CoupledModel::Truncated, CoupledModel::Full}) {
      const auto a = pair_spectrum(p, {}, m).eigenvalues(), b = pair_spectrum(q, {}, m).eigenvalues();
      for (std::size_t k = 0; k < 4; ++k) CHECK_THAT(a[k], WithinAbs(b[k], 1e-12));
    }
  }
}

TEST_CASE("crossing geometry") {
  auto sweep_s = [](double lo, double hi, int n) {
    std::vector<BiasPoint> s;
    for (int i = 0; i < n; ++i) s.push_back({0, 0, lo + (hi - lo) * i / (n - 1), 0});
    return s;
  };
  TlsParams a = tls_at(0.0, 5.0);
  a.gamma_s = 150.0;
  TlsParams b = tls_at(0.0, 5.3);

  SECTION("no coupling: zero splitting at the exact crossing") {
    // E1(V) = 5.3 at 150 V = sqrt(5.3^2 - 5^2)
    const double v_cross = std::sqrt(5.3 * 5.3 - 25.0) / 150.0;
    const auto sweep = sweep_s(0.0, 2.0e-2, 201);
    const auto c = crossing_geometry(CoupledPair::eigenbasis(a, b, 0, 0), sweep);
    CHECK_THAT(c.v_min, WithinAbs(v_cross, 1e-9));
    CHECK_THAT(c.splitting_min, WithinAbs(0.0, 1e-5));
    CHECK(c.control == Control::Sample);
  }
  SECTION("TLS 1 at its symmetry point: splitting is |g_x|") {
    TlsParams a2 = tls_at(0.0, 5.3);
    a2.gamma_s = 150.0;
    TlsParams b2 = tls_at(0.0, 5.3);
    b2.gamma_s = -40.0;
    const auto sweep = sweep_s(-3e-3, 3e-3, 121);
    const auto c = crossing_geometry(CoupledPair::eigenbasis(a2, b2, 25, -19), sweep);
    CHECK_THAT(c.splitting_min, WithinAbs(19.0, 1e-3));
    CHECK_THAT(c.v_min, WithinAbs(0.0, 5e-5));  // quartic minimum, one sweep step
  }
  SECTION("level repulsion bound for localized couplings") {
    Engine gen = make_engine(3);
    std::uniform_real_distribution<double> g(-40, 40);
    for (int i = 0; i < 20; ++i) {
      const CoupledPair p{a, b, CouplingBasis::Localized, g(gen), g(gen)};
      const auto c = crossing_geometry(p, sweep_s(0.0, 2.0e-2, 401));
      const BiasPoint at{0, 0, c.v_min, 0};
      const auto m1 = mixing_angle(p.tls1, at), m2 = mixing_angle(p.tls2, at);
      CHECK(c.splitting_min >= std::abs(eigen_couplings(p, at).xx) * (1 - 1e-6) - 1e-6);
      CHECK(c.splitting_min >= 0.0);
      (void)m1;
      (void)m2;
    }
  }
  SECTION("transitions that never meet") {
    const auto far = tls_at(0.0, 6.5);
    CHECK_THROWS_AS(crossing_geometry(CoupledPair::eigenbasis(a, far, 0, 10), sweep_s(0, 1e-3, 21)),
                    NoCrossingInRange);
  }
  SECTION("sweep must vary exactly one control") {
    std::vector<BiasPoint> bad{{0, 0, 0, 0}, {1, 0, 1e-3, 0}};
    CHECK_THROWS_AS(crossing_geometry(CoupledPair::eigenbasis(a, b, 0, 0), bad), InvalidArgument);
  }
}

TEST_CASE("branches follow eigenvector continuity through a crossing") {
  TlsParams a = tls_at(0.0, 5.0);
  a.gamma_s = 150.0;
  const TlsParams b = tls_at(0.0, 5.3);
  std::vector<BiasPoint> sweep;
  for (int i = 0; i <= 200; ++i) sweep.push_back({0, 0, 2e-2 * i / 200.0, 0});
  // Without coupling the labels must follow E1 through the crossing.
  const auto br = sweep_transitions(CoupledPair::eigenbasis(a, b, 0, 0), sweep);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    const double e1 = transition_energy(a, sweep[i]);
    const bool a_is_1 = std::abs(br.branch_a[i] - e1) < 1e-9;
    const bool b_is_1 = std::abs(br.branch_b[i] - e1) < 1e-9;
    CHECK((a_is_1 || b_is_1));
  }
  const bool starts_a = std::abs(br.branch_a.front() - 5.0) < 1e-9;
  CHECK(std::abs((starts_a ? br.branch_a : br.branch_b).back() - transition_energy(a, sweep.back())) < 1e-9);
}
