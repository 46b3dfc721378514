#pragma once

// Two interacting TLS: Hamiltonians in the localized and eigen bases,
// spectra, and avoided-crossing geometry.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tlsscope/eigen.hpp"
#include "tlsscope/errors.hpp"
#include "tlsscope/matrix.hpp"
#include "tlsscope/stm.hpp"
#include "tlsscope/units.hpp"

namespace tlsscope {

/// Basis in which the coupling constants of a CoupledPair are defined.
///
/// Localized: H_int = 1/2 (g_z sz1 sz2 + g_x sx1 sx2) with the Pauli
///   operators of the two-well (position) basis. g_x = 0 is the pure
///   sigma_z sigma_z interaction.
/// Eigenbasis: the same form with eigenbasis Pauli operators and constant
///   coefficients, independent of bias.
enum class CouplingBasis { Localized, Eigenbasis };

/// Two TLS with their mutual coupling (MHz, ordinary frequency).
struct CoupledPair {
  TlsParams tls1;
  TlsParams tls2;
  CouplingBasis basis = CouplingBasis::Eigenbasis;
  double g_z = 0.0;
  double g_x = 0.0;

  static CoupledPair localized(TlsParams a, TlsParams b, double g) {
    return {std::move(a), std::move(b), CouplingBasis::Localized, g, 0.0};
  }
  static CoupledPair eigenbasis(TlsParams a, TlsParams b, double gz, double gx) {
    return {std::move(a), std::move(b), CouplingBasis::Eigenbasis, gz, gx};
  }
};

/// Coefficients of the interaction written in the eigenbasis,
/// 1/2 (zz sz~sz~ + xx sx~sx~ + zx sz~sx~ + xz sx~sz~), in MHz.
struct EigenCouplings {
  double zz = 0.0;
  double xx = 0.0;
  double zx = 0.0;
  double xz = 0.0;
};

enum class CoupledModel {
  Truncated,  // cross terms sz~sx~, sx~sz~ dropped
  Full,       // all four eigenbasis terms kept
};

/// 1/2 (eps sz + delta sx), GHz.
inline Matrix2 single_tls_hamiltonian(double eps, double delta) {
  Matrix2 h = pauli::z() * (0.5 * eps);
  h += pauli::x() * (0.5 * delta);
  return h;
}

inline Matrix2 single_tls_hamiltonian(const TlsParams& tls, const BiasPoint& b) {
  return single_tls_hamiltonian(asymmetry(tls, b), tls.delta0);
}

/// Mixing angle of one TLS: cos = eps/E, sin = delta/E. Computed with atan2
/// so the delta -> 0 limit needs no special case.
struct MixingAngle {
  double cos = 1.0;
  double sin = 0.0;
};

inline MixingAngle mixing_angle(double eps, double delta) {
  const double theta = std::atan2(delta, eps);
  return {std::cos(theta), std::sin(theta)};
}

inline MixingAngle mixing_angle(const TlsParams& tls, const BiasPoint& b) {
  return mixing_angle(asymmetry(tls, b), tls.delta0);
}

/// Rotates localized-basis couplings (g_z sz sz + g_x sx sx) into the
/// eigenbasis. With the eigenbasis convention
///   sz = cos(t) sz~ + sin(t) sx~,   sx = sin(t) sz~ - cos(t) sx~
/// the four coefficients follow by expanding the products.
inline EigenCouplings rotate_localized_couplings(double g_z, double g_x, MixingAngle a1,
                                                 MixingAngle a2) {
  EigenCouplings e;
  e.zz = g_z * a1.cos * a2.cos + g_x * a1.sin * a2.sin;
  e.xx = g_z * a1.sin * a2.sin + g_x * a1.cos * a2.cos;
  e.zx = g_z * a1.cos * a2.sin - g_x * a1.sin * a2.cos;
  e.xz = g_z * a1.sin * a2.cos - g_x * a1.cos * a2.sin;
  return e;
}

/// Eigenbasis form of the localized g sz1 sz2 / 2 interaction:
/// (g_z, g_x, g_zx, g_xz) = g (c1 c2, s1 s2, c1 s2, s1 c2).
inline EigenCouplings transform_coupling_to_eigenbasis(double g_localized,
                                                       const TlsParams& tls1,
                                                       const TlsParams& tls2,
                                                       const BiasPoint& b) {
  return rotate_localized_couplings(g_localized, 0.0, mixing_angle(tls1, b),
                                    mixing_angle(tls2, b));
}

/// Eigenbasis couplings of a pair at bias b, whatever basis it is defined in.
inline EigenCouplings eigen_couplings(const CoupledPair& pair, const BiasPoint& b) {
  if (pair.basis == CouplingBasis::Eigenbasis) return {pair.g_z, pair.g_x, 0.0, 0.0};
  return rotate_localized_couplings(pair.g_z, pair.g_x, mixing_angle(pair.tls1, b),
                                    mixing_angle(pair.tls2, b));
}

/// H~ = E1/2 sz~ (x) I + E2/2 I (x) sz~ + couplings, in GHz. Basis order is
/// |s1 s2> with sz~ = +1 (excited) first.
inline Matrix4 eigenbasis_hamiltonian(double e1, double e2, const EigenCouplings& g,
                                      CoupledModel model = CoupledModel::Truncated) {
  const Matrix2 id = pauli::identity();
  const Matrix2 sz = pauli::z();
  const Matrix2 sx = pauli::x();
  Matrix4 h = kron(sz, id) * (0.5 * e1);
  h += kron(id, sz) * (0.5 * e2);
  h += kron(sz, sz) * (0.5 * units::mhz_to_ghz(g.zz));
  h += kron(sx, sx) * (0.5 * units::mhz_to_ghz(g.xx));
  if (model == CoupledModel::Full) {
    h += kron(sz, sx) * (0.5 * units::mhz_to_ghz(g.zx));
    h += kron(sx, sz) * (0.5 * units::mhz_to_ghz(g.xz));
  }
  return h;
}

/// H_T = H1 (x) I + I (x) H2 + 1/2 (g_z sz sz + g_x sx sx) in the localized
/// basis. Requires a localized-basis parameterization.
inline Matrix4 full_hamiltonian_localized(const CoupledPair& pair, const BiasPoint& b) {
  if (pair.basis != CouplingBasis::Localized)
    throw InvalidArgument("full_hamiltonian_localized: pair uses eigenbasis couplings");
  const Matrix2 id = pauli::identity();
  Matrix4 h = kron(single_tls_hamiltonian(pair.tls1, b), id);
  h += kron(id, single_tls_hamiltonian(pair.tls2, b));
  h += kron(pauli::z(), pauli::z()) * (0.5 * units::mhz_to_ghz(pair.g_z));
  h += kron(pauli::x(), pauli::x()) * (0.5 * units::mhz_to_ghz(pair.g_x));
  return h;
}

/// Truncated eigenbasis Hamiltonian with E_i = transition_energy(tls_i, b).
/// Localized pairs are rotated into the eigenbasis first and their cross
/// terms dropped; eigenbasis pairs use their couplings directly.
inline Matrix4 truncated_hamiltonian_eigenbasis(const CoupledPair& pair, const BiasPoint& b) {
  return eigenbasis_hamiltonian(transition_energy(pair.tls1, b),
                                transition_energy(pair.tls2, b), eigen_couplings(pair, b),
                                CoupledModel::Truncated);
}

/// Untruncated eigenbasis Hamiltonian (all four transformed terms).
inline Matrix4 complete_hamiltonian_eigenbasis(const CoupledPair& pair, const BiasPoint& b) {
  return eigenbasis_hamiltonian(transition_energy(pair.tls1, b),
                                transition_energy(pair.tls2, b), eigen_couplings(pair, b),
                                CoupledModel::Full);
}

/// Spectrum of a coupled pair plus its two single-excitation transitions.
struct Spectrum4 {
  Spectrum<4> spectrum;
  double transition_01 = 0.0;  // lambda_1 - lambda_0, GHz
  double transition_02 = 0.0;  // lambda_2 - lambda_0, GHz

  const std::array<double, 4>& eigenvalues() const { return spectrum.eigenvalues; }
  const Matrix4& eigenvectors() const { return spectrum.eigenvectors; }
};

inline Spectrum4 make_spectrum4(const Matrix4& h, const JacobiOptions& opt = {}) {
  Spectrum4 s{eigensolve_hermitian(h, opt)};
  s.transition_01 = s.spectrum.eigenvalues[1] - s.spectrum.eigenvalues[0];
  s.transition_02 = s.spectrum.eigenvalues[2] - s.spectrum.eigenvalues[0];
  return s;
}

inline Spectrum4 pair_spectrum(const CoupledPair& pair, const BiasPoint& b,
                               CoupledModel model = CoupledModel::Truncated) {
  if (model == CoupledModel::Truncated)
    return make_spectrum4(truncated_hamiltonian_eigenbasis(pair, b));
  if (pair.basis == CouplingBasis::Localized)
    return make_spectrum4(full_hamiltonian_localized(pair, b));
  return make_spectrum4(complete_hamiltonian_eigenbasis(pair, b));
}

/// The two single-excitation transitions along a sweep, labeled by
/// eigenvector-overlap continuity rather than by energy order.
struct TransitionBranches {
  std::vector<double> branch_a;  // GHz
  std::vector<double> branch_b;
  std::vector<Spectrum4> spectra;
};

inline TransitionBranches sweep_transitions(const CoupledPair& pair,
                                            std::span<const BiasPoint> sweep,
                                            CoupledModel model = CoupledModel::Truncated) {
  TransitionBranches out;
  out.branch_a.reserve(sweep.size());
  out.branch_b.reserve(sweep.size());
  std::array<cplx, 4> prev_a{}, prev_b{};
  auto column = [](const Spectrum4& s, std::size_t k) {
    std::array<cplx, 4> v;
    for (std::size_t r = 0; r < 4; ++r) v[r] = s.eigenvectors()(r, k);
    return v;
  };
  auto overlap = [](const std::array<cplx, 4>& u, const std::array<cplx, 4>& v) {
    cplx s{};
    for (std::size_t r = 0; r < 4; ++r) s += std::conj(u[r]) * v[r];
    return std::norm(s);
  };
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    Spectrum4 s = pair_spectrum(pair, sweep[i], model);
    auto v1 = column(s, 1);
    auto v2 = column(s, 2);
    bool swap = false;
    if (i > 0) {
      const double keep = overlap(prev_a, v1) + overlap(prev_b, v2);
      const double cross = overlap(prev_a, v2) + overlap(prev_b, v1);
      swap = cross > keep;
    }
    if (swap) {
      out.branch_a.push_back(s.transition_02);
      out.branch_b.push_back(s.transition_01);
      prev_a = v2;
      prev_b = v1;
    } else {
      out.branch_a.push_back(s.transition_01);
      out.branch_b.push_back(s.transition_02);
      prev_a = v1;
      prev_b = v2;
    }
    out.spectra.push_back(std::move(s));
  }
  return out;
}

struct CrossingGeometry {
  Control control = Control::Sample;
  double v_min = 0.0;           // V, swept control at minimum splitting
  double splitting_min = 0.0;   // MHz
};

struct CrossingOptions {
  double window_mhz = 200.0;  // transitions must come closer than this
  double tolerance_v = 1e-12;
  CoupledModel model = CoupledModel::Truncated;
};

/// Which control varies along a sweep; throws when none or several do.
inline Control swept_control(std::span<const BiasPoint> sweep) {
  if (sweep.size() < 2) throw InvalidArgument("sweep needs at least two points");
  std::optional<Control> found;
  for (Control c : all_controls) {
    const double first = bias_component(sweep.front(), c);
    const bool varies = std::any_of(sweep.begin(), sweep.end(), [&](const BiasPoint& b) {
      return bias_component(b, c) != first;
    });
    if (varies) {
      if (found) throw InvalidArgument("sweep varies more than one control");
      found = c;
    }
  }
  if (!found) throw InvalidArgument("sweep does not vary any control");
  return *found;
}

/// Locates the minimum splitting between the two single-excitation
/// transitions: grid bracketing over the sweep followed by golden-section
/// refinement in the swept voltage.
inline CrossingGeometry crossing_geometry(const CoupledPair& pair,
                                          std::span<const BiasPoint> sweep,
                                          const CrossingOptions& opt = {}) {
  const Control ctl = swept_control(sweep);
  auto splitting = [&](double v) {
    const Spectrum4 s = pair_spectrum(pair, with_bias(sweep.front(), ctl, v), opt.model);
    return units::ghz_to_mhz(s.transition_02 - s.transition_01);
  };
  std::size_t best = 0;
  double best_val = splitting(bias_component(sweep[0], ctl));
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    const double val = splitting(bias_component(sweep[i], ctl));
    if (val < best_val) {
      best_val = val;
      best = i;
    }
  }
  if (best_val > opt.window_mhz)
    throw NoCrossingInRange("crossing_geometry: transitions stay " +
                            std::to_string(best_val) + " MHz apart");
  if (best == 0 || best + 1 == sweep.size())
    throw NoCrossingInRange("crossing_geometry: minimum splitting at sweep boundary");

  double lo = bias_component(sweep[best - 1], ctl);
  double hi = bias_component(sweep[best + 1], ctl);
  if (lo > hi) std::swap(lo, hi);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = splitting(x1);
  double f2 = splitting(x2);
  for (int it = 0; it < 200 && (hi - lo) > opt.tolerance_v; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = splitting(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = splitting(x2);
    }
  }
  const double v = 0.5 * (lo + hi);
  double val = splitting(v);
  if (best_val < val) return {ctl, bias_component(sweep[best], ctl), best_val};
  return {ctl, v, val};
}

}  // namespace tlsscope
