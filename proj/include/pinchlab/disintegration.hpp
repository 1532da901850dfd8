#pragma once

// Sampled families {x -> m_x} of fiber measures and the backward-pushforward
// estimator of the invariant family.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cocycle.hpp"
#include "fiber_measure.hpp"
#include "markov.hpp"
#include "parallel.hpp"

namespace pinchlab {

struct DisintegrationMeta {
  long depth = 0;
  std::size_t atomCount = 0;
  std::uint64_t seed = 0;
  std::string baseMeasure;
};

class Disintegration {
 public:
  Disintegration() = default;
  explicit Disintegration(DisintegrationMeta meta) : meta_(std::move(meta)) {}

  // Replaces any previous entry for the same point.
  void insert(const SymbolicPoint& x, FiberMeasure m) {
    if (std::abs(m.totalMass() - 1.0) > 1e-10) throw DomainError("fiber measure must have mass 1");
    const std::string key = x.str();
    auto it = index_.find(key);
    if (it != index_.end()) {
      measures_[it->second] = std::move(m);
      return;
    }
    index_.emplace(key, points_.size());
    points_.push_back(x);
    measures_.push_back(std::move(m));
  }

  const FiberMeasure* find(const SymbolicPoint& x) const {
    auto it = index_.find(x.str());
    return it == index_.end() ? nullptr : &measures_[it->second];
  }
  const FiberMeasure& at(const SymbolicPoint& x) const {
    const FiberMeasure* m = find(x);
    if (!m) throw DomainError("point " + x.str() + " is not sampled");
    return *m;
  }

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const std::vector<SymbolicPoint>& points() const { return points_; }
  const std::vector<FiberMeasure>& measures() const { return measures_; }
  const DisintegrationMeta& meta() const { return meta_; }

 private:
  DisintegrationMeta meta_;
  std::map<std::string, std::size_t> index_;
  std::vector<SymbolicPoint> points_;
  std::vector<FiberMeasure> measures_;
};

// (f^n_{sigma^{-n} x})_* of atoms at (i + u)/N, u uniform from the seed.  Each
// atom is pushed individually.  Pure in (F, x, depth, atomCount, seed).
inline FiberMeasure estimateFiberMeasure(const Cocycle& F, const SymbolicPoint& x, long depth, std::size_t atomCount,
                                         std::uint64_t seed) {
  if (depth < 0) throw DomainError("estimator depth must be nonnegative");
  if (atomCount == 0) throw DomainError("atom count must be positive");
  std::mt19937_64 rng(seed);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  std::vector<Atom> atoms(atomCount);
  const double w = 1.0 / static_cast<double>(atomCount);
  std::vector<const CircleMap*> chain;
  for (long k = -depth; k < 0; ++k) chain.push_back(&F.at(x, k));
  for (std::size_t i = 0; i < atomCount; ++i) {
    double p = (static_cast<double>(i) + u) / static_cast<double>(atomCount);
    for (const CircleMap* f : chain) p = (*f)(p);
    atoms[i] = {p, w};
  }
  return FiberMeasure::atoms(std::move(atoms));
}

inline Disintegration estimateInvariantDisintegration(const Cocycle& F, const MarkovMeasure& mu, long depth,
                                                      std::size_t atomCount, const std::vector<SymbolicPoint>& points,
                                                      std::uint64_t seed, std::string baseId = "markov") {
  if (depth < 0) throw DomainError("estimator depth must be nonnegative");
  for (const auto& x : points)
    if (!mu.sft().admissible(x)) throw DomainError("point " + x.str() + " is not admissible");
  std::vector<std::optional<FiberMeasure>> out(points.size());
  parallelFor(points.size(), [&](std::size_t i) { out[i] = estimateFiberMeasure(F, points[i], depth, atomCount, seed); });
  Disintegration D({depth, atomCount, seed, std::move(baseId)});
  for (std::size_t i = 0; i < points.size(); ++i) D.insert(points[i], std::move(*out[i]));
  return D;
}

// Points x_i = sampleBase(mu, coreLength, seed + i).
inline std::vector<SymbolicPoint> sampleBasePoints(const MarkovMeasure& mu, std::size_t count, long coreLength,
                                                   std::uint64_t seed) {
  std::vector<SymbolicPoint> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) pts.push_back(sampleBase(mu, coreLength, seed + i));
  return pts;
}

struct ResidualSummary {
  double mean = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

inline ResidualSummary summarize(const std::vector<double>& values) {
  ResidualSummary s;
  s.count = values.size();
  for (double v : values) {
    s.mean += v;
    s.max = std::max(s.max, v);
  }
  if (!values.empty()) s.mean /= static_cast<double>(values.size());
  return s;
}

// W1((f_x)_* m_x, m_{sigma x}) over the sampled points, with m_{sigma x}
// estimated by the same estimator and parameters as D.
inline ResidualSummary estimatorInvarianceResidual(const Cocycle& F, const Disintegration& D) {
  std::vector<double> r(D.size());
  const auto& meta = D.meta();
  parallelFor(D.size(), [&](std::size_t i) {
    const auto& x = D.points()[i];
    const auto next = estimateFiberMeasure(F, x.shifted(1), meta.depth, meta.atomCount, meta.seed);
    r[i] = transportDistance(pushforward(D.measures()[i], F.at(x)), next);
  });
  return summarize(r);
}

// Draws a point of the circle from nu.
inline double sampleFiber(const FiberMeasure& nu, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  if (nu.isAtomic()) {
    double acc = 0.0;
    for (const Atom& a : nu.atomList()) {
      acc += a.weight;
      if (u < acc) return a.position;
    }
    return nu.atomList().back().position;
  }
  const auto& ks = nu.cdfKnots();
  for (std::size_t i = 1; i < ks.size(); ++i)
    if (u < ks[i].c) {
      const double dc = ks[i].c - ks[i - 1].c;
      return ks[i - 1].x + (dc > 0.0 ? (u - ks[i - 1].c) / dc : 0.0) * (ks[i].x - ks[i - 1].x);
    }
  return ks.back().x;
}

}  // namespace pinchlab
