#pragma once

// Finite-n estimates of the exponent of contraction.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "cocycle.hpp"
#include "disintegration.hpp"
#include "parallel.hpp"

namespace pinchlab {

struct ExponentOptions {
  long nMax = 200;
  std::vector<double> ladder{1e-2, 1e-4, 1e-6, 1e-8};
  double saturation = 0.25;
};

struct LadderCurve {
  double eps = 0.0;
  int side = +1;           // q = p + side * eps
  std::vector<double> a;   // a[n-1] = log(d_n / eps) / n
  double tailMax = 0.0;    // max of a_n over n in [nMax/2, nMax]
  bool saturated = false;  // d_n exceeded the saturation level
};

struct ContractionEstimate {
  double value = 0.0;
  bool allSaturated = false;
  std::vector<LadderCurve> curves;
};

// lambda(F, x, p): two-point separations tracked as lift increments so they keep
// relative precision down to 1e-300.  Normalizing by the initial separation
// makes isometries give exactly 0.
inline ContractionEstimate contractionExponent(const Cocycle& F, const SymbolicPoint& x, double p,
                                               const ExponentOptions& opt = {}) {
  if (opt.nMax < 50) throw DomainError("nMax must be at least 50");
  if (opt.ladder.empty()) throw DomainError("epsilon ladder is empty");
  for (std::size_t i = 0; i < opt.ladder.size(); ++i)
    if (!(opt.ladder[i] > 0.0) || (i > 0 && !(opt.ladder[i] < opt.ladder[i - 1])))
      throw DomainError("epsilon ladder must be positive and decreasing");

  std::vector<const CircleMap*> chain(static_cast<std::size_t>(opt.nMax));
  for (long k = 0; k < opt.nMax; ++k) chain[static_cast<std::size_t>(k)] = &F.at(x, k);

  ContractionEstimate est;
  bool any = false;
  double best = -std::numeric_limits<double>::infinity();
  for (double eps : opt.ladder)
    for (int side : {+1, -1}) {
      LadderCurve c;
      c.eps = eps;
      c.side = side;
      c.a.reserve(static_cast<std::size_t>(opt.nMax));
      c.tailMax = -std::numeric_limits<double>::infinity();
      double base = frac(p), u = side * eps;
      for (long n = 1; n <= opt.nMax; ++n) {
        const CircleMap& f = *chain[static_cast<std::size_t>(n - 1)];
        u = f.liftIncrement(base, u);
        base = f(base);
        const double d = std::max(std::abs(u), 1e-300);
        if (d > opt.saturation) c.saturated = true;
        const double an = std::log(d / eps) / static_cast<double>(n);
        c.a.push_back(an);
        if (n >= opt.nMax / 2) c.tailMax = std::max(c.tailMax, an);
      }
      if (!c.saturated) {
        any = true;
        best = std::max(best, c.tailMax);
      }
      est.curves.push_back(std::move(c));
    }
  est.allSaturated = !any;
  est.value = any ? best : 0.0;
  return est;
}

struct ExponentSample {
  double mean = 0.0;
  double stdError = 0.0;
  std::vector<double> values;
  std::size_t saturated = 0;
};

// Monte-Carlo average of lambda(F, x, p) over the points of D (cycled when
// nSamples exceeds D) with p drawn from m_x under seed + i.  With
// backward = true the inverse cocycle is used at the reflected points.
inline ExponentSample measureExponent(const Cocycle& F, const Disintegration& D, const MarkovMeasure& mu,
                                      std::size_t nSamples, std::uint64_t seed, const ExponentOptions& opt = {},
                                      bool backward = false) {
  if (D.empty()) throw DomainError("empty disintegration");
  if (nSamples == 0) throw DomainError("nSamples must be positive");
  const Cocycle G = backward ? inverseCocycle(F) : F;
  ExponentSample out;
  out.values.assign(nSamples, 0.0);
  std::vector<char> sat(nSamples, 0);
  parallelFor(nSamples, [&](std::size_t i) {
    const std::size_t j = i % D.size();
    const SymbolicPoint& x = D.points()[j];
    if (!mu.sft().admissible(x)) throw DomainError("point " + x.str() + " is not admissible");
    std::mt19937_64 rng(seed + i);
    const double p = sampleFiber(D.measures()[j], rng);
    const auto est = contractionExponent(G, backward ? timeReversed(x) : x, p, opt);
    out.values[i] = est.value;
    sat[i] = est.allSaturated;
  });
  double sum = 0.0;
  for (std::size_t i = 0; i < nSamples; ++i) {
    sum += out.values[i];
    out.saturated += sat[i] != 0;
  }
  out.mean = sum / static_cast<double>(nSamples);
  if (nSamples > 1) {
    double ss = 0.0;
    for (double v : out.values) ss += (v - out.mean) * (v - out.mean);
    out.stdError = std::sqrt(ss / static_cast<double>(nSamples - 1) / static_cast<double>(nSamples));
  }
  return out;
}

}  // namespace pinchlab
