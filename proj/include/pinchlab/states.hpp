#pragma once

// Holonomy-equivariance defects of sampled disintegrations, the conjugated and
// one-sided families, their invariance residual, martingale recovery, and the
// support test at the pinching orbit.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "disintegration.hpp"
#include "holonomy.hpp"
#include "pinch.hpp"

namespace pinchlab {

enum class DefectSide { Stable, Unstable, Both };

struct DefectPair {
  std::size_t id = 0;
  Side side = Side::Stable;
  std::string x, y;
  double defect = 0.0;
  bool skipped = false;
  bool nonConvergent = false;
  std::string error;
};

struct DefectReport {
  double mean = 0.0;
  double max = 0.0;
  double stableMean = 0.0, stableMax = 0.0;
  double unstableMean = 0.0, unstableMax = 0.0;
  std::size_t skipped = 0;
  std::size_t nonConvergent = 0;
  std::vector<DefectPair> pairs;
};

struct DefectOptions {
  std::size_t pairCount = 100;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  long partnerLength = 0;  // 0: depth of D plus the cocycle range plus 1
};

namespace detail {

inline void scoreSide(const Cocycle& F, const Disintegration& D, const MarkovMeasure& mu, Side side,
                      const DefectOptions& opt, std::vector<DefectPair>& out) {
  const auto& meta = D.meta();
  const long len = opt.partnerLength > 0 ? opt.partnerLength : meta.depth + F.range() + 1;
  const std::size_t base = out.size();
  out.resize(base + opt.pairCount);
  parallelFor(opt.pairCount, [&](std::size_t i) {
    DefectPair& rec = out[base + i];
    rec.id = i;
    rec.side = side;
    const SymbolicPoint& x = D.points()[i % D.size()];
    std::mt19937_64 rng(opt.seed + i + (side == Side::Stable ? 0 : 0x9e3779b97f4a7c15ULL));
    const SymbolicPoint y = localPartner(mu, x, side, len, rng);
    rec.x = x.str();
    rec.y = y.str();
    try {
      const Holonomy h = holonomy(F, x, y, side, opt.tol);
      const FiberMeasure* my = D.find(y);
      const FiberMeasure est = my ? *my : estimateFiberMeasure(F, y, meta.depth, meta.atomCount, meta.seed);
      rec.defect = transportDistance(est, pushforward(D.measures()[i % D.size()], h.map));
    } catch (const ConvergenceError& e) {
      rec.skipped = rec.nonConvergent = true;
      rec.error = e.what();
    } catch (const std::exception& e) {
      rec.skipped = true;
      rec.error = e.what();
    }
  });
}

}  // namespace detail

// W1(m_y, (h_{x,y})_* m_x) over sampled pairs; missing m_y are estimated with
// D's own estimator parameters.
inline DefectReport stateDefect(const Cocycle& F, const Disintegration& D, const MarkovMeasure& mu, DefectSide side,
                                const DefectOptions& opt = {}) {
  if (D.empty()) throw DomainError("empty disintegration");
  DefectReport rep;
  if (side != DefectSide::Unstable) detail::scoreSide(F, D, mu, Side::Stable, opt, rep.pairs);
  if (side != DefectSide::Stable) detail::scoreSide(F, D, mu, Side::Unstable, opt, rep.pairs);
  std::size_t ns = 0, nu = 0;
  for (const auto& p : rep.pairs) {
    if (p.skipped) {
      ++rep.skipped;
      rep.nonConvergent += p.nonConvergent;
      continue;
    }
    if (p.side == Side::Stable) {
      rep.stableMean += p.defect;
      rep.stableMax = std::max(rep.stableMax, p.defect);
      ++ns;
    } else {
      rep.unstableMean += p.defect;
      rep.unstableMax = std::max(rep.unstableMax, p.defect);
      ++nu;
    }
  }
  if (ns) rep.stableMean /= static_cast<double>(ns);
  if (nu) rep.unstableMean /= static_cast<double>(nu);
  rep.mean = std::max(rep.stableMean, rep.unstableMean);
  rep.max = std::max(rep.stableMax, rep.unstableMax);
  return rep;
}

struct ConjugatedFamilies {
  Disintegration tilde;  // m~_x = (h^s_{x, phi(x)})_* m_x at the points of D
  Disintegration hat;    // m^ indexed by anchored representatives
  // W1(m~_x, m~_y) over sampled pairs with equal futures.
  ResidualSummary wellDefined;
};

// m^_{x^} is the equal-weight mixture of m~_x over the sampled x projecting to x^.
inline ConjugatedFamilies conjugatedDisintegration(const Disintegration& D, const ConjugatedCocycle& Ft) {
  ConjugatedFamilies out{Disintegration(D.meta()), Disintegration(D.meta()), {}};
  std::vector<std::optional<FiberMeasure>> tilde(D.size());
  parallelFor(D.size(), [&](std::size_t i) { tilde[i] = pushforward(D.measures()[i], Ft.toAnchor(D.points()[i])); });
  std::map<std::string, std::vector<std::size_t>> groups;
  std::map<std::string, SymbolicPoint> reps;
  for (std::size_t i = 0; i < D.size(); ++i) {
    out.tilde.insert(D.points()[i], *tilde[i]);
    const SymbolicPoint a = anchorProjection(D.points()[i], Ft.anchors());
    groups[a.str()].push_back(i);
    reps.emplace(a.str(), a);
  }
  std::vector<double> diffs;
  for (const auto& [key, idx] : groups) {
    std::vector<FiberMeasure> parts;
    for (std::size_t i : idx) parts.push_back(*tilde[i]);
    for (std::size_t j = 1; j < idx.size(); ++j) diffs.push_back(transportDistance(*tilde[idx[0]], *tilde[idx[j]]));
    out.hat.insert(reps.at(key), mixture(parts));
  }
  out.wellDefined = summarize(diffs);
  return out;
}

// W1(m^_{shift x^}, (g^_{x^})_* m^_{x^}) over the x^ whose image is sampled.
struct InvarianceReport {
  ResidualSummary residual;
  std::size_t skipped = 0;
};

inline InvarianceReport invarianceResidual(const OneSidedCocycle& ghat, const Disintegration& Dhat) {
  InvarianceReport rep;
  std::vector<double> vals(Dhat.size(), -1.0);
  parallelFor(Dhat.size(), [&](std::size_t i) {
    const SymbolicPoint& xh = Dhat.points()[i];
    const FiberMeasure* next = Dhat.find(ghat.shift(xh));
    if (!next) return;
    vals[i] = transportDistance(*next, pushforward(Dhat.measures()[i], ghat.at(xh)));
  });
  std::vector<double> kept;
  for (double v : vals) {
    if (v < 0.0)
      ++rep.skipped;
    else
      kept.push_back(v);
  }
  rep.residual = summarize(kept);
  return rep;
}

struct RecoveryStep {
  long n = 0;
  std::optional<FiberMeasure> recovered;
  double residual = 0.0;
};

struct RecoveryReport {
  std::vector<RecoveryStep> steps;
  std::vector<std::string> missing;  // representatives that need sampling
};

// Anchored representatives P^s(sigma^{-n} x) needed by martingaleRecovery.
inline std::vector<SymbolicPoint> recoveryPoints(const OneSidedCocycle& ghat, const SymbolicPoint& x,
                                                 const std::vector<long>& nList) {
  std::vector<SymbolicPoint> pts;
  for (long n : nList) pts.push_back(ghat.project(x.shifted(-n)));
  return pts;
}

// (g^^n_{P^s(sigma^{-n} x)})_* m^_{P^s(sigma^{-n} x)} compared with m~_x.
inline RecoveryReport martingaleRecovery(const OneSidedCocycle& ghat, const Disintegration& Dhat,
                                         const FiberMeasure& tildeAtX, const SymbolicPoint& x,
                                         const std::vector<long>& nList) {
  RecoveryReport rep;
  for (long n : nList) {
    if (n < 0) throw DomainError("recovery depth must be nonnegative");
    const SymbolicPoint w = ghat.project(x.shifted(-n));
    const FiberMeasure* m = Dhat.find(w);
    if (!m) {
      rep.missing.push_back(w.str());
      continue;
    }
    RecoveryStep s;
    s.n = n;
    s.recovered = pushforward(*m, ghat.iterate(w, n));
    s.residual = transportDistance(*s.recovered, tildeAtX);
    rep.steps.push_back(std::move(s));
  }
  return rep;
}

struct FiberSupportReport {
  double invarianceResidual = 0.0;  // W1((return map)_* m_{x0}, m_{x0})
  double massNearAttractor = 0.0;
  double massNearRepeller = 0.0;
  double outsideMass = 0.0;
};

inline FiberSupportReport periodicFiberSupport(const Cocycle& F, const Disintegration& D, const PinchingWitness& w,
                                               double tol) {
  const FiberMeasure* m = D.find(w.x0);
  if (!m) throw DomainError("x0 = " + w.x0.str() + " is not sampled");
  FiberSupportReport rep;
  const CircleMap ret = fiberCompose(F, w.x0, w.period);
  rep.invarianceResidual = transportDistance(pushforward(*m, ret), *m);
  rep.massNearAttractor = m->massNear(w.attractor, tol);
  rep.massNearRepeller = m->massNear(w.repeller, tol);
  const double near = circleDistance(w.attractor, w.repeller) > 2.0 * tol
                          ? rep.massNearAttractor + rep.massNearRepeller
                          : m->massNear(w.attractor, tol + circleDistance(w.attractor, w.repeller));
  rep.outsideMass = std::max(0.0, 1.0 - near);
  return rep;
}

}  // namespace pinchlab
