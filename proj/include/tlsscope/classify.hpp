#pragma once

// TLS location from bias response, and spectral densities.

#include <array>
#include <map>
#include <span>
#include <vector>

#include "tlsscope/errors.hpp"
#include "tlsscope/stm.hpp"

namespace tlsscope {

struct LocationEvidence {
  bool responds_p = false;
  bool responds_g = false;
  bool responds_s = false;
  /// Seen in a single segment only; its response to the other controls is
  /// unknown.
  bool single_segment = false;

  bool operator==(const LocationEvidence&) const = default;
};

struct LocationVerdict {
  Location location = Location::Unclassified;
  LocationEvidence evidence;
};

/// Decision table:
///   single segment                 -> Unclassified
///   responds to V_s                -> SampleDielectric
///   responds to V_g, not V_s       -> SurfaceElectrode
///   only responds to strain        -> Junction (stray or qubit junction)
///   responds to nothing            -> Unclassified
inline LocationVerdict classify_location(const LocationEvidence& ev) {
  LocationVerdict v{Location::Unclassified, ev};
  if (ev.single_segment) return v;
  if (ev.responds_s) v.location = Location::SampleDielectric;
  else if (ev.responds_g) v.location = Location::SurfaceElectrode;
  else if (ev.responds_p) v.location = Location::Junction;
  return v;
}

/// Contribution of one TLS to the spectral density: the sum of its visible
/// fractions over all segments, divided by (segments x span).
inline double spectral_density_of(std::span<const double> visible_fractions, std::size_t n_segments,
                                  double span_ghz) {
  if (n_segments == 0 || !(span_ghz > 0))
    throw InvalidArgument("spectral_density: need segments and a positive span");
  double sum = 0;
  for (double f : visible_fractions) {
    if (f < 0 || f > 1) throw InvalidArgument("spectral_density: visible fraction outside [0, 1]");
    sum += f;
  }
  return sum / (double(n_segments) * span_ghz);
}

struct DensityInput {
  Location location = Location::Unclassified;
  std::vector<double> visible_fractions;
};

/// Per-class spectral density (1/GHz): the sum of member contributions.
inline std::map<Location, double> spectral_density(std::span<const DensityInput> tls, std::size_t n_segments,
                                                   double span_ghz) {
  std::map<Location, double> out;
  for (const auto& t : tls) out[t.location] += spectral_density_of(t.visible_fractions, n_segments, span_ghz);
  return out;
}

}  // namespace tlsscope
