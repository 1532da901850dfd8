#pragma once

// Stable and unstable holonomies of a finite-range cocycle, their axiom
// residuals, the conjugated cocycle that is constant along stable sets, and
// its projection to the one-sided shift.

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "errors.hpp"
#include "markov.hpp"
#include "parallel.hpp"

namespace pinchlab {

enum class Side { Stable, Unstable };

inline const char* toString(Side s) { return s == Side::Stable ? "stable" : "unstable"; }

struct Holonomy {
  CircleMap map;
  Side side = Side::Stable;
  long truncation = 0;
  double residual = 0.0;            // sup distance between iterates n-1 and n
  std::vector<double> residuals;    // residuals[n-1] for n = 1..truncation
};

namespace detail {

// Stable: (f^n_y)^{-1} o f^n_x, built from the inside out as
// C <- f_{sigma^j y}^{-1} o C o f_{sigma^j x} for j = n-1 .. 0.
// Unstable: f_{sigma^{-1} y} o ... o f_{sigma^{-n} y} o f_{sigma^{-n} x}^{-1} o ... o f_{sigma^{-1} x}^{-1},
// built as C <- f_{sigma^{-j} y} o C o f_{sigma^{-j} x}^{-1} for j = n .. 1.
// Steps whose windows agree while C is still the identity are skipped.
inline CircleMap truncatedHolonomy(const Cocycle& F, const SymbolicPoint& x, const SymbolicPoint& y, Side side,
                                   long n) {
  CircleMap c = CircleMap::identity();
  bool trivial = true;
  for (long i = n; i >= 1; --i) {
    const long k = side == Side::Stable ? i - 1 : -i;
    if (trivial && F.windowCode(x, k) == F.windowCode(y, k)) continue;
    trivial = false;
    if (side == Side::Stable)
      c = composeMaps(F.inverseAt(y, k), composeMaps(c, F.at(x, k)));
    else
      c = composeMaps(F.at(y, k), composeMaps(c, F.inverseAt(x, k)));
  }
  return c;
}

// Past this many steps the windows along the two orbits agree forever, so the
// truncations are constant from then on.
inline long windowsAgreeAfter(const Cocycle& F, const SymbolicPoint& x, const SymbolicPoint& y, Side side) {
  const long bound = side == Side::Stable ? std::max(0L, -F.windowStart()) : std::max(0L, F.windowEnd());
  long last = 0;
  for (long i = 1; i <= bound; ++i) {
    const long k = side == Side::Stable ? i - 1 : -i;
    if (F.windowCode(x, k) != F.windowCode(y, k)) last = i;
  }
  return last;
}

}  // namespace detail

// h_{x,y} by iterating truncations until consecutive iterates are within tol.
inline Holonomy holonomy(const Cocycle& F, const SymbolicPoint& x, const SymbolicPoint& y, Side side, double tol,
                         long cap = 1000) {
  if (!(tol > 0.0)) throw DomainError("holonomy tolerance must be positive");
  if (side == Side::Stable && !sameFuture(x, y))
    throw DomainError("stable holonomy needs y in the local stable set of x");
  if (side == Side::Unstable && !samePast(x, y))
    throw DomainError("unstable holonomy needs y in the local unstable set of x");
  Holonomy h{CircleMap::identity(), side, 0, 0.0, {}};
  if (x == y) return h;
  const long settled = detail::windowsAgreeAfter(F, x, y, side);
  CircleMap prev = CircleMap::identity();
  for (long n = 1; n <= cap; ++n) {
    CircleMap cur = detail::truncatedHolonomy(F, x, y, side, n);
    const double r = supDistance(cur, prev);
    h.residuals.push_back(r);
    prev = std::move(cur);
    if (n > settled && r < tol) {
      h.map = prev;
      h.truncation = n;
      h.residual = r;
      return h;
    }
  }
  throw ConvergenceError("holonomy did not converge within the iteration cap", h.residuals.back(), cap);
}

// Sequence of sup-distances between consecutive truncations h_n, h_{n-1}.
inline std::vector<double> truncationResiduals(const Cocycle& F, const SymbolicPoint& x, const SymbolicPoint& y,
                                               Side side, long nMax) {
  std::vector<double> out;
  CircleMap prev = CircleMap::identity();
  for (long n = 1; n <= nMax; ++n) {
    CircleMap cur = detail::truncatedHolonomy(F, x, y, side, n);
    out.push_back(supDistance(cur, prev));
    prev = std::move(cur);
  }
  return out;
}

// exp of the least-squares slope of log(max(r_n, floor)) against n, fitted
// up to and including the first residual at or below the floor.
inline double fitDecayRatio(const std::vector<double>& residuals, double floor = 1e-16) {
  if (residuals.size() < 2) throw DomainError("decay fit needs at least two residuals");
  std::size_t n = 0;
  while (n < residuals.size() && residuals[n] > floor) ++n;
  n = std::max<std::size_t>(2, std::min(n + 1, residuals.size()));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i + 1);
    const double yi = std::log(std::max(residuals[i], floor));
    sx += xi;
    sy += yi;
    sxx += xi * xi;
    sxy += xi * yi;
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  return std::exp(slope);
}

struct HolonomyPairRecord {
  std::size_t id = 0;
  Side side = Side::Stable;
  std::string from, to;
  long truncation = 0;
  double residual = 0.0;
  double axiomA = 0.0;  // h_{y,z} o h_{x,y} vs h_{x,z}
  double axiomB = 0.0;  // equivariance along sigma (stable) or sigma^{-1} (unstable)
  double inverse = 0.0; // h_{y,x} o h_{x,y} vs identity
  bool failed = false;
  bool nonConvergent = false;
  std::string error;
};

struct ContinuitySample {
  double baseDistance = 0.0;  // d(y, y')
  double mapDistance = 0.0;   // sup distance between h_{x,y} and h_{x,y'}
};

struct HolonomyAudit {
  std::vector<HolonomyPairRecord> pairs;
  std::vector<ContinuitySample> continuity;
  double maxAxiomA = 0.0;
  double maxAxiomB = 0.0;
  double maxInverse = 0.0;
  std::size_t failures = 0;
  std::size_t nonConvergent = 0;
};

// A partner of x in its local stable (or unstable) set: a fresh past (or
// future) of the given length.
inline SymbolicPoint localPartner(const MarkovMeasure& mu, const SymbolicPoint& x, Side side, long length,
                                  std::mt19937_64& rng) {
  return side == Side::Stable ? resamplePast(mu, x, length, rng) : resampleFuture(mu, x, length, rng);
}

// Point agreeing with y on coordinates n >= -m (stable) or n <= m (unstable),
// resampled beyond.
inline SymbolicPoint nestedPartner(const MarkovMeasure& mu, const SymbolicPoint& y, Side side, long m, long length,
                                   std::mt19937_64& rng) {
  if (side == Side::Stable) return resamplePast(mu, y.shifted(-m), length, rng).shifted(m);
  return resampleFuture(mu, y.shifted(m), length, rng).shifted(-m);
}

struct AuditOptions {
  std::size_t pairCount = 100;
  double tol = 1e-8;
  std::uint64_t seed = 1;
  long coreLength = 12;
  long partnerLength = 8;
  std::vector<long> nestedDepths{1, 2, 3, 4, 5, 6};
};

// Residuals of the composition, equivariance and continuity axioms over
// sampled pairs.  Pair i uses sampleBase(mu, coreLength, seed + i) and an
// mt19937_64 seeded with seed + i for its partners.
inline HolonomyAudit holonomyAxiomResiduals(const Cocycle& F, const MarkovMeasure& mu, Side side,
                                            const AuditOptions& opt = {}) {
  HolonomyAudit audit;
  audit.pairs.resize(opt.pairCount);
  std::vector<std::vector<ContinuitySample>> cont(opt.pairCount);
  const double rho = mu.metricBase();
  parallelFor(opt.pairCount, [&](std::size_t i) {
    HolonomyPairRecord& rec = audit.pairs[i];
    rec.id = i;
    rec.side = side;
    try {
      const SymbolicPoint x = sampleBase(mu, opt.coreLength, opt.seed + i);
      std::mt19937_64 rng(opt.seed + i);
      const SymbolicPoint y = localPartner(mu, x, side, opt.partnerLength, rng);
      const SymbolicPoint z = localPartner(mu, x, side, opt.partnerLength, rng);
      rec.from = x.str();
      rec.to = y.str();
      const Holonomy hxy = holonomy(F, x, y, side, opt.tol);
      const Holonomy hyz = holonomy(F, y, z, side, opt.tol);
      const Holonomy hxz = holonomy(F, x, z, side, opt.tol);
      const Holonomy hyx = holonomy(F, y, x, side, opt.tol);
      rec.truncation = hxy.truncation;
      rec.residual = hxy.residual;
      rec.axiomA = supDistance(composeMaps(hyz.map, hxy.map), hxz.map);
      rec.inverse = supDistance(composeMaps(hyx.map, hxy.map), CircleMap::identity());
      if (side == Side::Stable) {
        const Holonomy hs = holonomy(F, x.shifted(1), y.shifted(1), side, opt.tol);
        rec.axiomB = supDistance(hs.map, composeMaps(F.at(y), composeMaps(hxy.map, F.inverseAt(x))));
      } else {
        const Holonomy hs = holonomy(F, x.shifted(-1), y.shifted(-1), side, opt.tol);
        rec.axiomB = supDistance(hs.map, composeMaps(F.inverseAt(y, -1), composeMaps(hxy.map, F.at(x, -1))));
      }
      for (long m : opt.nestedDepths) {
        const SymbolicPoint y2 = nestedPartner(mu, y, side, m, opt.partnerLength, rng);
        const Holonomy hxy2 = holonomy(F, x, y2, side, opt.tol);
        cont[i].push_back({metric(y, y2, rho), supDistance(hxy.map, hxy2.map)});
      }
    } catch (const ConvergenceError& e) {
      rec.failed = rec.nonConvergent = true;
      rec.error = e.what();
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });
  for (std::size_t i = 0; i < opt.pairCount; ++i) {
    const auto& rec = audit.pairs[i];
    if (rec.failed) {
      ++audit.failures;
      audit.nonConvergent += rec.nonConvergent;
      continue;
    }
    audit.maxAxiomA = std::max(audit.maxAxiomA, rec.axiomA);
    audit.maxAxiomB = std::max(audit.maxAxiomB, rec.axiomB);
    audit.maxInverse = std::max(audit.maxInverse, rec.inverse);
    audit.continuity.insert(audit.continuity.end(), cont[i].begin(), cont[i].end());
  }
  return audit;
}

// The cocycle conjugated by H(x, p) = (x, h^s_{phi(x), x}(p)), phi the anchor
// projection:  g~_x = h^s_{sigma x, phi(sigma x)} o f_x o h^s_{phi(x), x}.
// Evaluated on demand and memoized by canonical point.
class ConjugatedCocycle {
 public:
  ConjugatedCocycle(const Cocycle& F, Anchors anchors, double tol) : F_(F), anchors_(std::move(anchors)), tol_(tol) {}

  const Cocycle& original() const { return F_; }
  const Anchors& anchors() const { return anchors_; }
  double tol() const { return tol_; }

  // h^s_{phi(x), x}
  CircleMap fromAnchor(const SymbolicPoint& x) const {
    const std::string key = x.str();
    {
      std::lock_guard<std::mutex> g(lock_);
      auto it = fromAnchor_.find(key);
      if (it != fromAnchor_.end()) return it->second;
    }
    const SymbolicPoint a = anchorProjection(x, anchors_);
    CircleMap h = holonomy(F_, a, x, Side::Stable, tol_).map;
    std::lock_guard<std::mutex> g(lock_);
    fromAnchor_.emplace(key, h);
    return h;
  }

  // h^s_{x, phi(x)}
  CircleMap toAnchor(const SymbolicPoint& x) const {
    const SymbolicPoint a = anchorProjection(x, anchors_);
    return holonomy(F_, x, a, Side::Stable, tol_).map;
  }

  CircleMap at(const SymbolicPoint& x) const {
    const std::string key = x.str();
    {
      std::lock_guard<std::mutex> g(lock_);
      auto it = maps_.find(key);
      if (it != maps_.end()) return it->second;
    }
    const SymbolicPoint sx = x.shifted(1);
    CircleMap g = composeMaps(toAnchor(sx), composeMaps(F_.at(x), fromAnchor(x)));
    std::lock_guard<std::mutex> lk(lock_);
    maps_.emplace(key, g);
    return g;
  }

 private:
  const Cocycle& F_;
  Anchors anchors_;
  double tol_;
  mutable std::mutex lock_;
  mutable std::map<std::string, CircleMap> maps_;
  mutable std::map<std::string, CircleMap> fromAnchor_;
};

inline ConjugatedCocycle conjugateStableConstant(const Cocycle& F, const Anchors& anchors, double tol) {
  return ConjugatedCocycle(F, anchors, tol);
}

// The cocycle over the one-sided shift: a one-sided point is represented by
// its anchored two-sided extension, and g^_{x^} = g~ at that extension.
class OneSidedCocycle {
 public:
  explicit OneSidedCocycle(const ConjugatedCocycle& Ft) : Ft_(Ft) {}

  // Canonical representative of P^s(x).
  SymbolicPoint project(const SymbolicPoint& x) const { return anchorProjection(x, Ft_.anchors()); }

  // One-sided shift on representatives.
  SymbolicPoint shift(const SymbolicPoint& xhat) const { return project(xhat.shifted(1)); }

  CircleMap at(const SymbolicPoint& x) const { return Ft_.at(project(x)); }

  // g^^n at x^ = g^_{shift^{n-1} x^} o ... o g^_{x^}.
  CircleMap iterate(const SymbolicPoint& x, long n) const {
    SymbolicPoint cur = project(x);
    CircleMap acc = CircleMap::identity();
    for (long k = 0; k < n; ++k) {
      acc = composeMaps(at(cur), acc);
      cur = shift(cur);
    }
    return acc;
  }

  const ConjugatedCocycle& conjugated() const { return Ft_; }

 private:
  const ConjugatedCocycle& Ft_;
};

inline OneSidedCocycle projectOneSided(const ConjugatedCocycle& Ft) { return OneSidedCocycle(Ft); }

}  // namespace pinchlab
