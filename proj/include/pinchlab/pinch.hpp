#pragma once

// Pinching witnesses, the homoclinic eta maps, the bump function on the shift,
// the choice of the rotation size, and the rotation-bump perturbation.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "errors.hpp"
#include "holonomy.hpp"
#include "symbolic.hpp"

namespace pinchlab {

struct PinchingWitness {
  SymbolicPoint x0;
  long period = 1;
  double attractor = 0.0;
  double repeller = 0.0;
  CircleMap returnMap;
};

namespace detail {

// Lexicographically least rotation of w equals w, and w is primitive.
inline bool isNecklace(const Word& w) {
  if (primitivePeriod(w) != w.size()) return false;
  for (std::size_t s = 1; s < w.size(); ++s) {
    Word r(w.begin() + static_cast<long>(s), w.end());
    r.insert(r.end(), w.begin(), w.begin() + static_cast<long>(s));
    if (r < w) return false;
  }
  return true;
}

}  // namespace detail

// First periodic orbit (by length, then lexicographically) whose return map
// has an attracting and a repelling fixed point.
inline std::optional<PinchingWitness> detectPinching(const Cocycle& F, long maxPeriod) {
  if (maxPeriod < 1) throw DomainError("maxPeriod must be at least 1");
  for (long len = 1; len <= maxPeriod; ++len) {
    for (const Word& w : detail::admissibleWords(F.base(), static_cast<std::size_t>(len))) {
      if (!F.base().admissibleCycle(w) || !detail::isNecklace(w)) continue;
      const SymbolicPoint x0 = periodicPoint(F.base(), w);
      CircleMap ret = fiberCompose(F, x0, len);
      std::vector<FixedPoint> fps;
      try {
        fps = classifyFixedPoints(ret);
      } catch (const DomainError&) {
        continue;  // identity return map
      }
      std::optional<double> a, r;
      for (const auto& fp : fps) {
        if (fp.type == FixedPointType::Attracting && !a) a = fp.point;
        if (fp.type == FixedPointType::Repelling && !r) r = fp.point;
      }
      if (a && r) return PinchingWitness{x0, len, *a, *r, std::move(ret)};
    }
  }
  return std::nullopt;
}

struct EtaMaps {
  CircleMap eta1;  // (g^{k1}_z)^{-1} o h^s_{x0, sigma^{k1} z}
  CircleMap eta2;  // g^{k2}_{sigma^{-k2} z} o h^u_{x0, sigma^{-k2} z}
  double residual = 0.0;
};

inline EtaMaps etaMaps(const Cocycle& G, const PinchingWitness& w, const HomoclinicPoint& hp, double tol) {
  const Holonomy hs = holonomy(G, w.x0, hp.z.shifted(hp.k1), Side::Stable, tol);
  const Holonomy hu = holonomy(G, w.x0, hp.z.shifted(-hp.k2), Side::Unstable, tol);
  const CircleMap toZ = fiberCompose(G, hp.z, hp.k1);
  EtaMaps e{composeMaps(invertMap(toZ), hs.map), composeMaps(fiberCompose(G, hp.z.shifted(-hp.k2), hp.k2), hu.map),
            std::max(hs.residual, hu.residual)};
  return e;
}

class BumpFunction {
 public:
  // phi(x) = clamp((rho^{-M} - d(x,z)) / (rho^{-M} - rho^{-M'}), 0, 1).
  BumpFunction(SymbolicPoint center, long M, long Mp, double rho)
      : center_(std::move(center)), m_(M), mp_(Mp), rho_(rho) {
    if (!(rho > 1.0)) throw DomainError("metric base must exceed 1");
    if (M < 0 || Mp <= M) throw DomainError("bump radii need 0 <= M < M'");
    outer_ = std::pow(rho, -static_cast<double>(M));
    inner_ = std::pow(rho, -static_cast<double>(Mp));
  }

  // phi identically equal to value (for degenerate test builds).
  static BumpFunction constant(const SymbolicPoint& center, double value) {
    BumpFunction b(center, 0, 1, 2.0);
    b.constant_ = value;
    return b;
  }

  const SymbolicPoint& center() const { return center_; }
  long outerIndex() const { return m_; }
  long innerIndex() const { return mp_; }
  double innerRadius() const { return inner_; }
  double outerRadius() const { return outer_; }
  double metricBase() const { return rho_; }
  double lipschitz() const { return constant_ ? 0.0 : 1.0 / (outer_ - inner_); }
  bool isConstant() const { return constant_.has_value(); }
  // Window radius on which phi is locally constant.
  long range() const { return constant_ ? 0 : mp_; }

  double valueAtDistance(double d) const {
    if (constant_) return *constant_;
    return std::clamp((outer_ - d) / (outer_ - inner_), 0.0, 1.0);
  }

  double operator()(const SymbolicPoint& x) const { return valueAtDistance(metric(x, center_, rho_)); }

  // phi on the cylinder of a centered window w = x_{-R} .. x_R with R >= M'.
  double onWindow(const Word& w) const {
    if (constant_) return *constant_;
    const long R = static_cast<long>(w.size() / 2);
    if (R < mp_) throw DomainError("bump is not locally constant on windows of radius " + std::to_string(R));
    long n = -1;
    for (long m = 0; m <= R && n < 0; ++m)
      if (w[R + m] != center_[m] || w[R - m] != center_[-m]) n = m;
    if (n < 0) return 1.0;
    return valueAtDistance(std::pow(rho_, -static_cast<double>(n)));
  }

 private:
  SymbolicPoint center_;
  long m_, mp_;
  double rho_;
  double outer_ = 1.0, inner_ = 0.0;
  std::optional<double> constant_;
};

// Builds the bump and checks exactly that the closed outer ball misses the
// orbit of x0 and every sigma^n(z), n != 0.  Beyond the scanned range the
// windows of sigma^n(z) lie in z's periodic tails and repeat.
inline BumpFunction bumpFunction(const SymbolicPoint& z, long M, long Mp, double rho, const SymbolicPoint& x0) {
  BumpFunction b(z, M, Mp, rho);
  const double outer = b.outerRadius();
  const long per0 = static_cast<long>(x0.rightPeriod().size() + x0.core().size());
  for (long j = 0; j < per0; ++j)
    if (metric(x0.shifted(j), z, rho) <= outer)
      throw DomainError("bump ball contains sigma^" + std::to_string(j) + "(x0) = " + x0.shifted(j).str());
  const long p = static_cast<long>(z.rightPeriod().size()), q = static_cast<long>(z.leftPeriod().size());
  const long reach = std::max(std::abs(z.leftTailEnd()), std::abs(z.rightTailStart())) + Mp + p + q;
  const long scan = std::max(reach, 2 * (Mp + static_cast<long>(z.core().size())));
  for (long n = -scan; n <= scan; ++n) {
    if (n == 0) continue;
    if (metric(z.shifted(n), z, rho) <= outer)
      throw DomainError("bump ball contains sigma^" + std::to_string(n) + "(z) = " + z.shifted(n).str());
  }
  return b;
}

struct DeltaChoice {
  double delta = 0.0;
  long halvings = 0;            // delta = upperBound * 2^{-halvings}
  double upperBound = 0.0;      // eps / (2 H1(phi))
  double separation = 0.0;      // achieved, min over the checked rotations
  double separationPlus = 0.0;  // with R_delta
  double separationMinus = 0.0; // with R_{-delta}
  double separationTwisted = 0.0; // with twist^{-1} o R_{-delta} o twist, when given
};

namespace detail {

inline double setSeparation(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 1.0;
  for (double u : a)
    for (double v : b) best = std::min(best, circleDistance(u, v));
  return best;
}

}  // namespace detail

// Largest delta = (eps / (2 H1(phi))) 2^{-j}, j >= 1, keeping the rotated
// eta1-image of {a, r} at least `margin` from the eta2-image.  Both rotation
// directions are checked; with a twist map t the relation
// t^{-1} o R_{-delta} o t o eta1 is checked as well.
inline DeltaChoice chooseDelta(double eps, const BumpFunction& bump, const CircleMap& eta1, const CircleMap& eta2,
                               double a, double r, double margin, const CircleMap* twist = nullptr) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (!(margin > 0.0)) throw DomainError("margin must be positive");
  const double h = bump.lipschitz();
  DeltaChoice out;
  out.upperBound = h > 0.0 ? eps / (2.0 * h) : eps / 2.0;
  const std::vector<double> targets{eta2(a), eta2(r)};
  const std::vector<double> sources{eta1(a), eta1(r)};
  double bestSeen = 0.0;
  for (long j = 1; j <= 40; ++j) {
    const double d = out.upperBound * std::ldexp(1.0, static_cast<int>(-j));
    std::vector<double> plus, minus, twisted;
    for (double s : sources) {
      plus.push_back(frac(s + d));
      minus.push_back(frac(s - d));
      if (twist) twisted.push_back(invertMap(*twist)(frac((*twist)(s) - d)));
    }
    const double sp = detail::setSeparation(plus, targets);
    const double sm = detail::setSeparation(minus, targets);
    const double st = twist ? detail::setSeparation(twisted, targets) : 1.0;
    const double sep = std::min({sp, sm, st});
    bestSeen = std::max(bestSeen, sep);
    if (sep >= margin) {
      out.delta = d;
      out.halvings = j;
      out.separation = sep;
      out.separationPlus = sp;
      out.separationMinus = sm;
      out.separationTwisted = twist ? st : sep;
      return out;
    }
  }
  throw DomainError("no admissible delta down to 2^-40 (best separation " + std::to_string(bestSeen) + ", eta1{a,r}={" +
                    std::to_string(sources[0]) + "," + std::to_string(sources[1]) + "}, eta2{a,r}={" +
                    std::to_string(targets[0]) + "," + std::to_string(targets[1]) + "})");
}

// g_w = R_{phi(w) delta} o f_w on centered windows of radius max(r, M').
inline Cocycle perturb(const Cocycle& F, const BumpFunction& bump, double delta) {
  const long R = std::max(F.range(), bump.range());
  const Cocycle Fw = F.widened(-R, static_cast<std::size_t>(2 * R + 1));
  return Cocycle::centered(
      F.base(), static_cast<int>(R),
      [&](const Word& w) {
        const double phi = bump.onWindow(w);
        const CircleMap& f = Fw.entry(w);
        return phi == 0.0 || delta == 0.0 ? f : f.postRotated(phi * delta);
      },
      F.alpha(), F.beta());
}

struct PerturbationReport {
  double delta = 0.0;
  double eps = 0.0;
  double maxSupDistance = 0.0;     // max_w sup_p d(g_w p, f_w p)
  double maxInverseSup = 0.0;      // same for the inverses
  bool lipschitzPreserved = true;  // H_1(g_w) == H_1(f_w) for every window
  CocycleDistanceReport distance;
  double holderBound = 0.0;        // delta * H_1(phi) * max(1, Lip of the inverses)
  bool periodicWindowUnchanged = true;
};

inline PerturbationReport perturbationReport(const Cocycle& F, const Cocycle& G, const BumpFunction& bump,
                                             double delta, double eps, double rho, const SymbolicPoint& x0) {
  PerturbationReport rep;
  rep.delta = delta;
  rep.eps = eps;
  const Cocycle Fw = F.widened(G.windowStart(), G.windowLength());
  double invLip = 1.0;
  for (const Word& w : G.windows()) {
    const CircleMap& f = Fw.entry(w);
    const CircleMap& g = G.entry(w);
    rep.maxSupDistance = std::max(rep.maxSupDistance, supDistance(f, g));
    rep.maxInverseSup = std::max(rep.maxInverseSup, supDistance(Fw.inverseEntry(w), G.inverseEntry(w)));
    if (holderConstant(f, 1.0) != holderConstant(g, 1.0)) rep.lipschitzPreserved = false;
    invLip = std::max(invLip, holderConstant(Fw.inverseEntry(w), 1.0));
  }
  rep.distance = cocycleDistanceReport(F, G, rho);
  rep.holderBound = delta * bump.lipschitz() * invLip;
  const long per0 = static_cast<long>(x0.rightPeriod().size() + x0.core().size());
  for (long j = 0; j < per0; ++j)
    if (supDistance(F.at(x0, j), G.at(x0, j)) != 0.0) rep.periodicWindowUnchanged = false;
  return rep;
}

}  // namespace pinchlab
