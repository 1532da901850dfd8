#pragma once

// Probability measures on the circle (weighted atoms or a piecewise-linear
// CDF), pushforward by circle maps, and the circle Wasserstein-1 distance.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "circle_map.hpp"
#include "errors.hpp"

namespace pinchlab {

struct Atom {
  double position;
  double weight;
};

struct CdfKnot {
  double x;  // in [0,1]
  double c;  // CDF value, nondecreasing, c(1) - c(0) = 1
};

class FiberMeasure {
 public:
  static FiberMeasure atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw DomainError("atomic measure needs at least one atom");
    double total = 0.0;
    for (Atom& a : atoms) {
      if (!(a.weight >= 0.0) || !std::isfinite(a.position)) throw DomainError("bad atom");
      a.position = frac(a.position);
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("atom weights must sum to 1");
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    FiberMeasure m;
    m.atomic_ = true;
    m.atoms_ = std::move(atoms);
    return m;
  }

  static FiberMeasure cdf(std::vector<CdfKnot> knots) {
    if (knots.size() < 2 || knots.front().x != 0.0 || knots.back().x != 1.0)
      throw DomainError("CDF knots must span [0,1]");
    for (std::size_t i = 1; i < knots.size(); ++i)
      if (!(knots[i].x > knots[i - 1].x) || knots[i].c < knots[i - 1].c)
        throw DomainError("CDF must be nondecreasing on increasing knots");
    if (std::abs(knots.back().c - knots.front().c - 1.0) > 1e-12) throw DomainError("CDF must have total mass 1");
    const double c0 = knots.front().c;
    for (CdfKnot& k : knots) k.c -= c0;
    FiberMeasure m;
    m.atomic_ = false;
    m.cdf_ = std::move(knots);
    return m;
  }

  static FiberMeasure lebesgue() { return cdf({{0.0, 0.0}, {1.0, 1.0}}); }
  static FiberMeasure dirac(double p) { return atoms({{p, 1.0}}); }

  // n equal atoms at (i + offset)/n.
  static FiberMeasure uniformAtoms(std::size_t n, double offset) {
    std::vector<Atom> as(n);
    const double w = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) as[i] = {(static_cast<double>(i) + offset) / static_cast<double>(n), w};
    return atoms(std::move(as));
  }

  bool isAtomic() const { return atomic_; }
  const std::vector<Atom>& atomList() const { return atoms_; }
  const std::vector<CdfKnot>& cdfKnots() const { return cdf_; }

  double totalMass() const {
    if (!atomic_) return cdf_.back().c - cdf_.front().c;
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight;
    return s;
  }

  // Mass of the closed arc of radius r around p.
  double massNear(double p, double r) const {
    if (r >= 0.5) return 1.0;
    if (atomic_) {
      double s = 0.0;
      for (const Atom& a : atoms_)
        if (circleDistance(a.position, p) <= r) s += a.weight;
      return s;
    }
    const double lo = p - r, hi = p + r;
    return liftedCdf(hi) - liftedCdf(lo);
  }

  // C(t) extended by C(t + 1) = C(t) + 1 (continuous CDFs only).
  double liftedCdf(double t) const {
    const double k = std::floor(t);
    const double s = t - k;
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), s, [](double x, const CdfKnot& kn) { return x < kn.x; });
    if (it == cdf_.end()) return cdf_.back().c + k;
    const CdfKnot& b = *it;
    const CdfKnot& a = *(it - 1);
    return a.c + (b.c - a.c) * (s - a.x) / (b.x - a.x) + k;
  }

  // Right-continuous CDF F(t) = nu([0, t]) for t in [0,1].
  double cdfRight(double t) const {
    if (!atomic_) return liftedCdf(std::min(t, 1.0));
    double s = 0.0;
    for (const Atom& a : atoms_) {
      if (a.position > t) break;
      s += a.weight;
    }
    return s;
  }

 private:
  bool atomic_ = true;
  std::vector<Atom> atoms_;
  std::vector<CdfKnot> cdf_;
};

// f_* nu.  Atoms move to f(position); a CDF G(y) = nu([f^{-1}(0), f^{-1}(y)])
// stays piecewise linear with knots at the images of nu's and f's knots.
inline FiberMeasure pushforward(const FiberMeasure& nu, const CircleMap& f) {
  if (nu.isAtomic()) {
    std::vector<Atom> as = nu.atomList();
    for (Atom& a : as) a.position = f(a.position);
    return FiberMeasure::atoms(std::move(as));
  }
  std::vector<double> ys{0.0, 1.0};
  for (const CdfKnot& k : nu.cdfKnots()) ys.push_back(f(k.x));
  for (const Knot& k : f.knots()) ys.push_back(frac(k.v));
  std::sort(ys.begin(), ys.end());
  std::vector<double> uniq;
  for (double y : ys)
    if (uniq.empty() || y - uniq.back() > 1e-15) uniq.push_back(y);
  if (uniq.back() != 1.0) {
    if (1.0 - uniq.back() <= 1e-15) uniq.back() = 1.0;
    else uniq.push_back(1.0);
  }
  const double base = nu.liftedCdf(f.inverseLift(0.0));
  std::vector<CdfKnot> out;
  for (double y : uniq) {
    double c = nu.liftedCdf(f.inverseLift(y)) - base;
    if (!out.empty()) c = std::max(c, out.back().c);
    out.push_back({y, c});
  }
  out.back().c = 1.0;
  out.front().c = 0.0;
  return FiberMeasure::cdf(std::move(out));
}

// Convex combination with equal weights.  All inputs must share a representation.
inline FiberMeasure mixture(std::span<const FiberMeasure> parts) {
  if (parts.empty()) throw DomainError("mixture of no measures");
  if (parts.size() == 1) return parts.front();
  const double w = 1.0 / static_cast<double>(parts.size());
  if (parts.front().isAtomic()) {
    std::vector<Atom> as;
    double total = 0.0;
    for (const FiberMeasure& m : parts) {
      if (!m.isAtomic()) throw DomainError("cannot mix atomic and CDF measures");
      for (const Atom& a : m.atomList()) {
        as.push_back({a.position, a.weight * w});
        total += a.weight * w;
      }
    }
    for (Atom& a : as) a.weight /= total;
    return FiberMeasure::atoms(std::move(as));
  }
  std::vector<double> xs;
  for (const FiberMeasure& m : parts) {
    if (m.isAtomic()) throw DomainError("cannot mix atomic and CDF measures");
    for (const CdfKnot& k : m.cdfKnots()) xs.push_back(k.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<CdfKnot> out;
  for (double x : xs) {
    double c = 0.0;
    for (const FiberMeasure& m : parts) c += w * m.liftedCdf(x);
    out.push_back({x, c});
  }
  out.back().c = out.front().c + 1.0;
  return FiberMeasure::cdf(std::move(out));
}

namespace detail {

// A CDF on [0,1] that is linear between knots and may jump at them.
struct StepLinear {
  std::vector<double> x;
  std::vector<double> left, right;  // one-sided limits at x

  static StepLinear of(const FiberMeasure& m) {
    StepLinear s;
    if (m.isAtomic()) {
      s.x.push_back(0.0);
      s.left.push_back(0.0);
      s.right.push_back(0.0);
      double acc = 0.0;
      for (const Atom& a : m.atomList()) {
        if (a.position == s.x.back()) {
          acc += a.weight;
          s.right.back() = acc;
          continue;
        }
        s.x.push_back(a.position);
        s.left.push_back(acc);
        acc += a.weight;
        s.right.push_back(acc);
      }
      s.x.push_back(1.0);
      s.left.push_back(acc);
      s.right.push_back(acc);
    } else {
      for (const CdfKnot& k : m.cdfKnots()) {
        s.x.push_back(k.x);
        s.left.push_back(k.c);
        s.right.push_back(k.c);
      }
    }
    return s;
  }

  // Value just right of u (if atRight) or just left of u, for u in [0,1].
  double at(double u, bool atRight) const {
    auto it = std::lower_bound(x.begin(), x.end(), u);
    if (it != x.end() && *it == u) {
      const std::size_t i = static_cast<std::size_t>(it - x.begin());
      return atRight ? right[i] : left[i];
    }
    const std::size_t i = static_cast<std::size_t>(it - x.begin());
    const double r0 = right[i - 1], l1 = left[i];
    return r0 + (l1 - r0) * (u - x[i - 1]) / (x[i] - x[i - 1]);
  }
};

struct LinearPiece {
  double length;
  double d0, d1;
};

inline double pieceMassBelow(const LinearPiece& p, double c) {
  const double lo = std::min(p.d0, p.d1), hi = std::max(p.d0, p.d1);
  if (hi == lo) return c >= lo ? p.length : 0.0;
  return p.length * std::clamp((c - lo) / (hi - lo), 0.0, 1.0);
}

inline double pieceAbsIntegral(const LinearPiece& p, double c) {
  const double lo = std::min(p.d0, p.d1), hi = std::max(p.d0, p.d1);
  if (hi == lo) return p.length * std::abs(lo - c);
  double g;
  if (c <= lo)
    g = (hi - lo) * (0.5 * (lo + hi) - c);
  else if (c >= hi)
    g = (hi - lo) * (c - 0.5 * (lo + hi));
  else
    g = 0.5 * ((c - lo) * (c - lo) + (hi - c) * (hi - c));
  return p.length * g / (hi - lo);
}

}  // namespace detail

// W1 on the circle: min over c of the integral of |F1 - F2 - c|, the minimizer
// being a median of F1 - F2 under Lebesgue measure.
inline double transportDistance(const FiberMeasure& nu1, const FiberMeasure& nu2) {
  const auto s1 = detail::StepLinear::of(nu1);
  const auto s2 = detail::StepLinear::of(nu2);
  std::vector<double> xs = s1.x;
  xs.insert(xs.end(), s2.x.begin(), s2.x.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<detail::LinearPiece> pieces;
  pieces.reserve(xs.size());
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double a = xs[i - 1], b = xs[i];
    const double d0 = s1.at(a, true) - s2.at(a, true);
    const double d1 = s1.at(b, false) - s2.at(b, false);
    pieces.push_back({b - a, d0, d1});
    lo = std::min({lo, d0, d1});
    hi = std::max({hi, d0, d1});
  }
  // Bisection for the median of D.
  double a = lo, b = hi;
  for (int it = 0; it < 200 && b > a; ++it) {
    const double mid = 0.5 * (a + b);
    if (mid <= a || mid >= b) break;
    double below = 0.0;
    for (const auto& p : pieces) below += detail::pieceMassBelow(p, mid);
    if (below >= 0.5)
      b = mid;
    else
      a = mid;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double c : {a, b}) {
    double total = 0.0;
    for (const auto& p : pieces) total += detail::pieceAbsIntegral(p, c);
    best = std::min(best, total);
  }
  return best;
}

}  // namespace pinchlab
