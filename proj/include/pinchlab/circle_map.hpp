#pragma once

// Orientation-preserving circle homeomorphisms as monotone piecewise-linear
// lifts.  The lift F satisfies F(t + 1) = F(t) + 1 and is linear between the
// knots (t_i, v_i), t_0 < ... < t_{m-1} in [0, 1), closing up with the segment
// from (t_{m-1}, v_{m-1}) to (t_0 + 1, v_0 + 1).  A single-knot map is a rotation
// and carries slope exactly 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pinchlab {

// Distance on R/Z.
inline double circleDistance(double a, double b) {
  const double d = a - b;
  return std::abs(d - std::round(d));
}

inline double frac(double t) {
  const double f = t - std::floor(t);
  return f >= 1.0 ? 0.0 : f;
}

struct Knot {
  double t;
  double v;
};

class CircleMap {
 public:
  CircleMap() : CircleMap(std::vector<Knot>{{0.0, 0.0}}) {}

  // Throws DomainError unless the knots describe a strictly increasing degree-1 lift.
  explicit CircleMap(std::vector<Knot> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw DomainError("circle map needs at least one knot");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const Knot& k = knots_[i];
      if (!std::isfinite(k.t) || !std::isfinite(k.v) || k.t < 0.0 || k.t >= 1.0)
        throw DomainError("breakpoints must lie in [0,1)");
      if (i > 0 && !(k.t > knots_[i - 1].t)) throw DomainError("breakpoints must be strictly increasing");
      if (i > 0 && !(k.v > knots_[i - 1].v)) throw DomainError("lift values must be strictly increasing");
    }
    if (!(knots_.back().v < knots_.front().v + 1.0)) throw DomainError("lift must have degree one");
    const double shift = std::floor(knots_.front().v);
    if (shift != 0.0)
      for (Knot& k : knots_) k.v -= shift;
    computeSlopes();
  }

  static CircleMap rotation(double delta) { return CircleMap(std::vector<Knot>{{0.0, frac(delta)}}); }
  static CircleMap identity() { return rotation(0.0); }

  const std::vector<Knot>& knots() const { return knots_; }
  std::size_t size() const { return knots_.size(); }
  bool isRotation() const { return knots_.size() == 1; }
  // Rotation number of a single-knot map; meaningful only when isRotation().
  double rotationAngle() const { return frac(knots_.front().v - knots_.front().t); }
  const std::vector<double>& slopes() const { return slopes_; }
  double maxSlope() const { return *std::max_element(slopes_.begin(), slopes_.end()); }
  double minSlope() const { return *std::min_element(slopes_.begin(), slopes_.end()); }

  double lift(double t) const {
    const double k = std::floor(t);
    const double s = t - k;
    const std::size_t m = knots_.size();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s, [](double x, const Knot& kn) { return x < kn.t; });
    double a, va, b, vb, slope;
    if (it == knots_.begin()) {
      a = knots_[m - 1].t - 1.0;
      va = knots_[m - 1].v - 1.0;
      b = knots_[0].t;
      vb = knots_[0].v;
      slope = slopes_[m - 1];
    } else {
      const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      a = knots_[i].t;
      va = knots_[i].v;
      b = i + 1 < m ? knots_[i + 1].t : knots_[0].t + 1.0;
      vb = i + 1 < m ? knots_[i + 1].v : knots_[0].v + 1.0;
      slope = slopes_[i];
    }
    const double y = (s - a <= b - s) ? va + slope * (s - a) : vb - slope * (b - s);
    return y + k;
  }

  double operator()(double p) const { return frac(lift(p)); }

  // The t with lift(t) = y.
  double inverseLift(double y) const {
    const double k = std::floor(y - knots_.front().v);
    const double s = y - k;  // s in [v_0, v_0 + 1)
    const std::size_t m = knots_.size();
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s, [](double x, const Knot& kn) { return x < kn.v; });
    const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
    const double a = knots_[i].t;
    const double va = knots_[i].v;
    const double b = i + 1 < m ? knots_[i + 1].t : knots_[0].t + 1.0;
    const double vb = i + 1 < m ? knots_[i + 1].v : knots_[0].v + 1.0;
    const double slope = slopes_[i];
    const double t = (s - va <= vb - s) ? a + (s - va) / slope : b - (vb - s) / slope;
    return t + k;
  }

  // F(t + u) - F(t), integrated segment by segment so small offsets keep full
  // relative precision.  Exact for rotations.
  double liftIncrement(double t, double u) const {
    if (isRotation()) return u;
    const std::size_t m = knots_.size();
    const double s = t - std::floor(t);
    double acc = 0.0;
    auto segStart = [&](std::size_t i) { return knots_[i].t; };
    auto segEnd = [&](std::size_t i) { return i + 1 < m ? knots_[i + 1].t : knots_[0].t + 1.0; };
    if (u >= 0.0) {
      std::size_t i;
      double shift = 0.0;
      auto it = std::upper_bound(knots_.begin(), knots_.end(), s, [](double x, const Knot& kn) { return x < kn.t; });
      if (it == knots_.begin()) {
        i = m - 1;
        shift = -1.0;
      } else {
        i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      }
      double cur = s, rem = u;
      while (rem > 0.0) {
        const double e = segEnd(i) + shift;
        const double len = std::min(rem, e - cur);
        acc += slopes_[i] * len;
        rem -= len;
        cur = e;
        if (++i == m) {
          i = 0;
          shift += 1.0;
        }
      }
    } else {
      std::size_t i;
      double shift = 0.0;
      auto it = std::lower_bound(knots_.begin(), knots_.end(), s, [](const Knot& kn, double x) { return kn.t < x; });
      if (it == knots_.begin()) {
        i = m - 1;
        shift = -1.0;
      } else {
        i = static_cast<std::size_t>(it - knots_.begin()) - 1;
      }
      double cur = s, rem = -u;
      while (rem > 0.0) {
        const double st = segStart(i) + shift;
        const double len = std::min(rem, cur - st);
        acc -= slopes_[i] * len;
        rem -= len;
        cur = st;
        if (i == 0) {
          i = m - 1;
          shift -= 1.0;
        } else {
          --i;
        }
      }
    }
    return acc;
  }

  // R_c o f with the slopes of f carried over unchanged.
  CircleMap postRotated(double c) const {
    CircleMap g = *this;
    for (Knot& k : g.knots_) k.v += c;
    const double shift = std::floor(g.knots_.front().v);
    for (Knot& k : g.knots_) k.v -= shift;
    return g;
  }

  // f o R_c with the slopes of f carried over unchanged.
  CircleMap preRotated(double c) const {
    const std::size_t m = knots_.size();
    std::vector<Knot> moved(m);
    std::vector<double> slopes(m);
    for (std::size_t i = 0; i < m; ++i) {
      const double t = knots_[i].t - c;
      const double k = std::floor(t);
      moved[i] = {t - k, knots_[i].v - k};
    }
    // Rotate so the knots are sorted by position again.
    std::size_t first = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (moved[i].t < moved[first].t) first = i;
    std::vector<Knot> sorted(m);
    for (std::size_t i = 0; i < m; ++i) {
      sorted[i] = moved[(first + i) % m];
      slopes[i] = slopes_[(first + i) % m];
    }
    // The wrap can leave equal positions after rounding; fall back to the generic path.
    for (std::size_t i = 1; i < m; ++i)
      if (!(sorted[i].t > sorted[i - 1].t) || !(sorted[i].v > sorted[i - 1].v)) return fromKnotsLoose(moved);
    if (!(sorted.back().v < sorted.front().v + 1.0)) return fromKnotsLoose(moved);
    CircleMap g(std::move(sorted));
    if (!isRotation()) g.slopes_ = std::move(slopes);
    return g;
  }

  // Drops knots whose removal moves the lift by less than tol anywhere.
  CircleMap simplified(double tol) const {
    const std::size_t m = knots_.size();
    if (m <= 1) return *this;
    std::vector<Knot> kept{knots_[0]};
    std::vector<std::size_t> pending;
    for (std::size_t i = 1; i <= m; ++i) {
      const Knot next = i < m ? knots_[i] : Knot{knots_[0].t + 1.0, knots_[0].v + 1.0};
      if (i == m) {
        if (!pending.empty() && !chordFits(kept.back(), next, pending, tol))
          for (std::size_t j : pending) kept.push_back(knots_[j]);
        break;
      }
      std::vector<std::size_t> trial = pending;
      trial.push_back(i);
      const Knot after = i + 1 < m ? knots_[i + 1] : Knot{knots_[0].t + 1.0, knots_[0].v + 1.0};
      if (chordFits(kept.back(), after, trial, tol)) {
        pending = std::move(trial);
      } else {
        kept.push_back(knots_[i]);
        pending.clear();
      }
    }
    return CircleMap(std::move(kept));
  }

 private:
  static CircleMap fromKnotsLoose(std::vector<Knot> ks) {
    std::sort(ks.begin(), ks.end(), [](const Knot& a, const Knot& b) { return a.t < b.t; });
    std::vector<Knot> out;
    for (const Knot& k : ks)
      if (out.empty() || (k.t > out.back().t && k.v > out.back().v)) out.push_back(k);
    while (out.size() > 1 && !(out.back().v < out.front().v + 1.0)) out.pop_back();
    return CircleMap(std::move(out));
  }

  bool chordFits(const Knot& a, const Knot& b, const std::vector<std::size_t>& idx, double tol) const {
    const double slope = (b.v - a.v) / (b.t - a.t);
    for (std::size_t j : idx) {
      const double interp = a.v + slope * (knots_[j].t - a.t);
      if (std::abs(interp - knots_[j].v) >= tol) return false;
    }
    return true;
  }

  void computeSlopes() {
    const std::size_t m = knots_.size();
    slopes_.assign(m, 1.0);
    if (m == 1) return;
    for (std::size_t i = 0; i < m; ++i) {
      const double b = i + 1 < m ? knots_[i + 1].t : knots_[0].t + 1.0;
      const double vb = i + 1 < m ? knots_[i + 1].v : knots_[0].v + 1.0;
      slopes_[i] = (vb - knots_[i].v) / (b - knots_[i].t);
    }
  }

  std::vector<Knot> knots_;
  std::vector<double> slopes_;
};

// Knots closer than this are merged when composing.
inline constexpr double kKnotMergeTolerance = 1e-14;

// g o f, exact in the PWL class: knots at f's breakpoints and at the preimages
// under f of g's breakpoints.
inline CircleMap composeMaps(const CircleMap& g, const CircleMap& f) {
  if (g.isRotation()) return f.postRotated(g.rotationAngle());
  if (f.isRotation()) return g.preRotated(f.rotationAngle());
  std::vector<double> ts;
  ts.reserve(f.size() + g.size());
  for (const Knot& k : f.knots()) ts.push_back(k.t);
  const double f0 = f.lift(0.0);
  for (const Knot& k : g.knots()) {
    const double y = k.t + std::ceil(f0 - k.t);
    double t = f.inverseLift(y);
    if (t >= 1.0) t -= 1.0;
    if (t < 0.0) t += 1.0;
    if (t >= 1.0) t = 0.0;
    ts.push_back(t);
  }
  std::sort(ts.begin(), ts.end());
  std::vector<double> uniq;
  for (double t : ts)
    if (uniq.empty() || t - uniq.back() > kKnotMergeTolerance) uniq.push_back(t);
  while (uniq.size() > 1 && uniq.front() + 1.0 - uniq.back() <= kKnotMergeTolerance) uniq.pop_back();
  std::vector<Knot> knots;
  knots.reserve(uniq.size());
  for (double t : uniq) {
    const double v = g.lift(f.lift(t));
    if (knots.empty() || v > knots.back().v) knots.push_back({t, v});
  }
  while (knots.size() > 1 && !(knots.back().v < knots.front().v + 1.0)) knots.pop_back();
  return CircleMap(std::move(knots));
}

inline CircleMap invertMap(const CircleMap& f) {
  if (f.isRotation()) return CircleMap::rotation(-f.rotationAngle());
  const auto& ks = f.knots();
  const std::size_t m = ks.size();
  std::vector<Knot> inv(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double k = std::floor(ks[i].v);
    inv[i] = {ks[i].v - k, ks[i].t - k};
  }
  std::size_t first = 0;
  for (std::size_t i = 1; i < m; ++i)
    if (inv[i].t < inv[first].t) first = i;
  std::vector<Knot> sorted(m);
  for (std::size_t i = 0; i < m; ++i) sorted[i] = inv[(first + i) % m];
  return CircleMap(std::move(sorted));
}

// Piecewise-linear interpolation of the projective action of [[a,b],[c,d]]
// (det 1) on RP^1, parameterized by t in [0,1) <-> angle pi*t.
inline double mobiusAction(double a, double b, double c, double d, double t) {
  const double x = std::cos(M_PI * t), y = std::sin(M_PI * t);
  const double ang = std::atan2(c * x + d * y, a * x + b * y) / M_PI;
  return frac(ang);
}

inline CircleMap makeMobius(double a, double b, double c, double d, std::size_t gridSize) {
  if (std::abs(a * d - b * c - 1.0) > 1e-12) throw DomainError("mobius matrix must have determinant 1");
  if (gridSize < 16) throw DomainError("mobius grid size must be at least 16");
  std::vector<Knot> knots(gridSize);
  double prev = 0.0;
  for (std::size_t i = 0; i < gridSize; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(gridSize);
    const double th = mobiusAction(a, b, c, d, t);
    double v = th;
    if (i > 0) {
      double step = th - frac(prev);
      step -= std::floor(step);
      v = prev + step;
    }
    knots[i] = {t, v};
    prev = v;
  }
  return CircleMap(std::move(knots));
}

// Builds a map from (breakpoint, lift) pairs.
inline CircleMap makePwl(const std::vector<Knot>& knots) { return CircleMap(knots); }

// Hoelder constant.  beta = 1 gives the exact maximal slope; beta < 1 takes the
// sup of d(fp,fq)/d(p,q)^beta over pairs from the breakpoints plus a uniform grid.
inline double holderConstant(const CircleMap& f, double beta, std::size_t gridSize = 1024) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("Hoelder exponent must lie in (0,1]");
  if (beta == 1.0) return f.maxSlope();
  std::vector<double> pts;
  for (std::size_t i = 0; i < gridSize; ++i) pts.push_back(static_cast<double>(i) / static_cast<double>(gridSize));
  for (const Knot& k : f.knots()) pts.push_back(k.t);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<double> vals(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = f.lift(pts[i]);
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dp = circleDistance(pts[i], pts[j]);
      if (dp <= 0.0) continue;
      const double dv = circleDistance(vals[i], vals[j]);
      best = std::max(best, dv / std::pow(dp, beta));
    }
  return best;
}

// sup_p d(f1(p), f2(p)), exact: the lift difference is linear between the
// merged breakpoints, so the sup is attained at a breakpoint or is 1/2.
inline double supDistance(const CircleMap& f1, const CircleMap& f2) {
  std::vector<double> ts{0.0};
  for (const Knot& k : f1.knots()) ts.push_back(k.t);
  for (const Knot& k : f2.knots()) ts.push_back(k.t);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  ts.push_back(1.0);
  double best = 0.0;
  double dPrev = f1.lift(ts[0]) - f2.lift(ts[0]);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double dCur = f1.lift(ts[i]) - f2.lift(ts[i]);
    const double lo = std::min(dPrev, dCur), hi = std::max(dPrev, dCur);
    if (std::floor(hi - 0.5) >= std::ceil(lo - 0.5) && hi != lo) return 0.5;
    best = std::max({best, std::abs(dPrev - std::round(dPrev)), std::abs(dCur - std::round(dCur))});
    dPrev = dCur;
  }
  return best;
}

struct MapDistance {
  double dBeta;
  double dMax;
};

// d_beta(f1,f2) = sup distance + |H_beta(f1) - H_beta(f2)|; d_max also
// compares the inverses.
inline MapDistance mapDistance(const CircleMap& f1, const CircleMap& f2, double beta) {
  const double forward = supDistance(f1, f2) + std::abs(holderConstant(f1, beta) - holderConstant(f2, beta));
  const CircleMap i1 = invertMap(f1), i2 = invertMap(f2);
  const double backward = supDistance(i1, i2) + std::abs(holderConstant(i1, beta) - holderConstant(i2, beta));
  return {forward, std::max(forward, backward)};
}

enum class FixedPointType { Attracting, Repelling, Neutral, SemiStable };

inline const char* toString(FixedPointType t) {
  switch (t) {
    case FixedPointType::Attracting: return "attracting";
    case FixedPointType::Repelling: return "repelling";
    case FixedPointType::Neutral: return "neutral";
    case FixedPointType::SemiStable: return "semi-stable";
  }
  return "?";
}

struct FixedPoint {
  double point;  // isolated point, or the start of a neutral interval
  double end;    // equal to point unless the fixed set is an interval
  FixedPointType type;
};

namespace detail {

// +1 if the orbit of p + side*h returns within h/2 of p, -1 if it leaves past
// 2h, 0 if neither within the cap.
inline int sideBehaviour(const CircleMap& f, double p, double side, double h, int cap) {
  double base = p, u = side * h;
  for (int n = 0; n < cap; ++n) {
    u = f.liftIncrement(base, u);
    base = frac(f.lift(base));
    if (std::abs(u) <= 0.5 * h) return 1;
    if (std::abs(u) >= 2.0 * h || u * side <= 0.0) return -1;
  }
  return 0;
}

}  // namespace detail

// Fixed points from lift(t) - t in Z, solved segment by segment; stability is
// read off forward orbits of nearby points, without derivatives.
inline std::vector<FixedPoint> classifyFixedPoints(const CircleMap& f, int cap = 1000) {
  const auto& ks = f.knots();
  const std::size_t m = ks.size();
  std::vector<FixedPoint> intervals;
  std::vector<double> points;
  for (std::size_t i = 0; i < m; ++i) {
    const double a = ks[i].t;
    const double b = i + 1 < m ? ks[i + 1].t : ks[0].t + 1.0;
    const double va = ks[i].v;
    const double vb = i + 1 < m ? ks[i + 1].v : ks[0].v + 1.0;
    const double da = va - a, db = vb - b;
    if (f.slopes()[i] == 1.0 || std::abs(db - da) < 1e-15) {
      if (std::abs(da - std::round(da)) < 1e-13) intervals.push_back({a, b, FixedPointType::Neutral});
      continue;
    }
    const double lo = std::min(da, db), hi = std::max(da, db);
    for (double k = std::ceil(lo); k <= hi; k += 1.0) {
      const double t = a + (k - da) * (b - a) / (db - da);
      points.push_back(frac(t));
    }
  }
  if (intervals.size() == m) throw DomainError("all points fixed");

  // Merge neutral segments that touch.
  std::vector<FixedPoint> merged;
  for (const FixedPoint& iv : intervals) {
    if (!merged.empty() && std::abs(merged.back().end - iv.point) < 1e-15)
      merged.back().end = iv.end;
    else
      merged.push_back(iv);
  }
  if (merged.size() > 1 && std::abs(merged.back().end - (merged.front().point + 1.0)) < 1e-15) {
    merged.front().point = merged.back().point;
    merged.pop_back();
  }
  auto inInterval = [&](double p) {
    for (const FixedPoint& iv : merged) {
      const double len = iv.end - iv.point;
      if (frac(p - iv.point) <= len + 1e-13 || circleDistance(p, iv.point) < 1e-13) return true;
    }
    return false;
  };

  std::sort(points.begin(), points.end());
  std::vector<double> uniq;
  for (double p : points)
    if (!inInterval(p) && (uniq.empty() || p - uniq.back() > 1e-12)) uniq.push_back(p);
  if (uniq.size() > 1 && uniq.front() + 1.0 - uniq.back() <= 1e-12) uniq.pop_back();

  std::vector<FixedPoint> out;
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    const double p = uniq[i];
    double gap = 0.5;
    for (std::size_t j = 0; j < uniq.size(); ++j)
      if (j != i) gap = std::min(gap, circleDistance(p, uniq[j]));
    for (const FixedPoint& iv : merged) gap = std::min({gap, circleDistance(p, iv.point), circleDistance(p, iv.end)});
    const double h = std::min(1e-6, 0.25 * gap);
    const int right = detail::sideBehaviour(f, p, 1.0, h, cap);
    const int left = detail::sideBehaviour(f, p, -1.0, h, cap);
    FixedPointType type = FixedPointType::Neutral;
    if (right == 1 && left == 1)
      type = FixedPointType::Attracting;
    else if (right == -1 && left == -1)
      type = FixedPointType::Repelling;
    else if (right != 0 && left != 0)
      type = FixedPointType::SemiStable;
    out.push_back({p, p, type});
  }
  out.insert(out.end(), merged.begin(), merged.end());
  std::sort(out.begin(), out.end(), [](const FixedPoint& a, const FixedPoint& b) { return a.point < b.point; });
  return out;
}

}  // namespace pinchlab
