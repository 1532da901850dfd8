#pragma once

// Named example cocycles.

#include <string>

#include "cocycle.hpp"

namespace pinchlab {

// 1 - golden ratio conjugate; keeps the rotation angles far from rationals of small height.
inline constexpr double kGoldenAngle = 0.3819660112501051;

// Fixed points at 0 (attracting, slope s on both sides) and 1/2 (repelling,
// slope 2 - s).  Needs 0 < s < 1.
inline CircleMap pinchedMap(double s = 0.84) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("attractor slope must lie in (0,1)");
  return makePwl({{0.0, 0.0}, {0.25, 0.25 * s}, {0.5, 0.5}, {0.75, 1.0 - 0.25 * s}});
}

// Range 0, symbol i rotates by (i + 1) * golden angle.
inline Cocycle rotationPreset(const Sft& sft) {
  return Cocycle::centered(sft, 0, [](const Word& w) { return CircleMap::rotation((w[0] + 1) * kGoldenAngle); });
}

// Constant projective action of diag(lambda, 1/lambda).
inline Cocycle mobiusPreset(const Sft& sft, double lambda = 2.0, std::size_t grid = 1024) {
  return Cocycle::constant(sft, makeMobius(lambda, 0.0, 0.0, 1.0 / lambda, grid));
}

// Range 1.  Center symbol 0: the pinched map conjugated by a rotation that
// depends on the neighbours (identity conjugation on 000).  Other centers:
// neighbour-dependent rotations.
inline Cocycle mixedPreset(const Sft& sft, double attractorSlope = 0.84) {
  const CircleMap pinch = pinchedMap(attractorSlope);
  return Cocycle::centered(sft, 1, [pinch](const Word& w) {
    if (w[1] == 0) {
      const double c = 0.05 * w[0] + 0.03 * w[2];
      return composeMaps(CircleMap::rotation(c), composeMaps(pinch, CircleMap::rotation(-c)));
    }
    return CircleMap::rotation(0.3 + 0.07 * w[0] + 0.11 * w[2] + 0.013 * w[1]);
  });
}

// Range 1 rotations depending on the whole window.
inline Cocycle isometricPreset(const Sft& sft) {
  return Cocycle::centered(sft, 1, [](const Word& w) {
    return CircleMap::rotation(0.3 + 0.1 * w[0] + 0.23 * w[1] + 0.05 * w[2]);
  });
}

inline Cocycle presetByName(const std::string& name, const Sft& sft) {
  if (name == "rotation") return rotationPreset(sft);
  if (name == "mobius") return mobiusPreset(sft);
  if (name == "mixed") return mixedPreset(sft);
  if (name == "isometric") return isometricPreset(sft);
  throw DomainError("unknown cocycle preset '" + name + "'");
}

}  // namespace pinchlab
