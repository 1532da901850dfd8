#pragma once

// Markov base measures on a subshift: stationary vector, cylinder masses,
// the local product density, and seeded sampling of two-sided paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "errors.hpp"
#include "symbolic.hpp"

namespace pinchlab {

using Matrix = std::vector<std::vector<double>>;

class MarkovMeasure {
 public:
  const Sft& sft() const { return sft_; }
  const Matrix& stochastic() const { return p_; }
  const std::vector<double>& stationary() const { return pi_; }
  double metricBase() const { return rho_; }

  double transition(int i, int j) const { return p_[i][j]; }

  // Reversed chain P*[j][i] = pi_i P[i][j] / pi_j (one step into the past).
  double reversedTransition(int j, int i) const { return pi_[i] * p_[i][j] / pi_[j]; }

 private:
  friend MarkovMeasure markovMeasure(const Sft&, const Matrix&, double);
  MarkovMeasure(Sft sft, Matrix p, std::vector<double> pi, double rho)
      : sft_(std::move(sft)), p_(std::move(p)), pi_(std::move(pi)), rho_(rho) {}

  Sft sft_;
  Matrix p_;
  std::vector<double> pi_;
  double rho_;
};

// Validates P against the shift and solves pi P = pi by power iteration on the
// lazy chain (P + I)/2, which has the same stationary vector and is aperiodic.
inline MarkovMeasure markovMeasure(const Sft& sft, const Matrix& p, double rho) {
  const int k = sft.alphabetSize();
  if (!(rho > 1.0)) throw DomainError("metric base must exceed 1");
  if (static_cast<int>(p.size()) != k) throw DomainError("stochastic matrix must be k x k");
  for (int i = 0; i < k; ++i) {
    if (static_cast<int>(p[i].size()) != k) throw DomainError("stochastic matrix must be k x k");
    double row = 0.0;
    for (int j = 0; j < k; ++j) {
      if (!(p[i][j] >= 0.0)) throw DomainError("stochastic matrix has a negative entry");
      if (p[i][j] > 0.0 && !sft.allowed(i, j))
        throw DomainError("P[" + std::to_string(i) + "][" + std::to_string(j) + "] > 0 on a forbidden transition");
      row += p[i][j];
    }
    if (std::abs(row - 1.0) > 1e-12) throw DomainError("row " + std::to_string(i) + " of P does not sum to 1");
  }
  // Irreducibility: every symbol reaches every other through positive entries.
  for (int s = 0; s < k; ++s) {
    std::vector<bool> seen(k, false);
    std::vector<int> stack{s};
    seen[s] = true;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < k; ++v)
        if (p[u][v] > 0.0 && !seen[v]) {
          seen[v] = true;
          stack.push_back(v);
        }
    }
    for (int v = 0; v < k; ++v)
      if (!seen[v]) throw DomainError("stochastic matrix is reducible");
  }

  std::vector<double> pi(k, 1.0 / k), next(k);
  double residual = 1.0;
  for (int it = 0; it < 1000000 && residual > 1e-13; ++it) {
    for (int j = 0; j < k; ++j) {
      double s = 0.5 * pi[j];
      for (int i = 0; i < k; ++i) s += 0.5 * pi[i] * p[i][j];
      next[j] = s;
    }
    double total = 0.0;
    for (double v : next) total += v;
    for (double& v : next) v /= total;
    pi.swap(next);
    residual = 0.0;
    for (int j = 0; j < k; ++j) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += pi[i] * p[i][j];
      residual = std::max(residual, std::abs(s - pi[j]));
    }
  }
  if (residual > 1e-13) throw ConvergenceError("stationary vector did not converge", residual, 1000000);
  return MarkovMeasure(sft, p, std::move(pi), rho);
}

// Bernoulli measure with the given symbol weights on the full shift.
inline MarkovMeasure bernoulliMeasure(const std::vector<double>& weights, double rho) {
  const int k = static_cast<int>(weights.size());
  return markovMeasure(Sft::fullShift(k), Matrix(k, weights), rho);
}

// mu([word] placed at any offset); shift invariance makes the offset irrelevant.
inline double cylinderMass(const MarkovMeasure& mu, const Word& word, long /*offset*/ = 0) {
  if (word.empty()) return 1.0;
  if (!mu.sft().admissible(word)) return 0.0;
  double m = mu.stationary()[word[0]];
  for (std::size_t j = 1; j < word.size(); ++j) m *= mu.transition(word[j - 1], word[j]);
  return m;
}

// Density of mu against mu^u x mu^s on the 0-cylinder of x.
inline double productDensity(const MarkovMeasure& mu, const SymbolicPoint& x) {
  return mu.transition(x[-1], x[0]) / mu.stationary()[x[0]];
}

namespace detail {

inline int drawIndex(std::mt19937_64& rng, const std::vector<double>& weights) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double u = uni(rng);
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

// Closes a finite two-sided path x_lo..x_hi (x_lo at coordinate lo) with periodic tails.
inline SymbolicPoint closePath(const Sft& sft, const Word& path, long lo) {
  const Word leftCycle = sft.shortestCycle(path.front());
  Word rightCycle = sft.shortestCycle(path.back());
  std::rotate(rightCycle.begin(), rightCycle.begin() + 1, rightCycle.end());
  return SymbolicPoint(leftCycle, path, rightCycle, -lo);
}

}  // namespace detail

// Samples x_{-L..L} from mu (x_0 ~ pi, forward via P, backward via P*), then
// closes both ends along shortest cycles.  Pure in (mu, coreLength, seed).
inline SymbolicPoint sampleBase(const MarkovMeasure& mu, long coreLength, std::uint64_t seed) {
  if (coreLength < 1) throw DomainError("coreLength must be at least 1");
  std::mt19937_64 rng(seed);
  const int k = mu.sft().alphabetSize();
  Word path(static_cast<std::size_t>(2 * coreLength + 1));
  path[coreLength] = detail::drawIndex(rng, mu.stationary());
  std::vector<double> w(k);
  for (long n = 1; n <= coreLength; ++n) {
    const int cur = path[coreLength + n - 1];
    for (int j = 0; j < k; ++j) w[j] = mu.transition(cur, j);
    path[coreLength + n] = detail::drawIndex(rng, w);
  }
  for (long n = 1; n <= coreLength; ++n) {
    const int cur = path[coreLength - n + 1];
    for (int i = 0; i < k; ++i) w[i] = mu.reversedTransition(cur, i);
    path[coreLength - n] = detail::drawIndex(rng, w);
  }
  return detail::closePath(mu.sft(), path, -coreLength);
}

// A point with the future of x and a fresh past of the given length drawn from
// the reversed chain conditioned on x_0.
inline SymbolicPoint resamplePast(const MarkovMeasure& mu, const SymbolicPoint& x, long length, std::mt19937_64& rng) {
  const int k = mu.sft().alphabetSize();
  Word past(static_cast<std::size_t>(length + 1));
  past[length] = x[0];
  std::vector<double> w(k);
  for (long n = length - 1; n >= 0; --n) {
    for (int i = 0; i < k; ++i) w[i] = mu.reversedTransition(past[n + 1], i);
    past[n] = detail::drawIndex(rng, w);
  }
  return splice(detail::closePath(mu.sft(), past, -length), x);
}

// A point with the past of x and a fresh future of the given length drawn from P.
inline SymbolicPoint resampleFuture(const MarkovMeasure& mu, const SymbolicPoint& x, long length,
                                    std::mt19937_64& rng) {
  const int k = mu.sft().alphabetSize();
  Word fut(static_cast<std::size_t>(length + 1));
  fut[0] = x[0];
  std::vector<double> w(k);
  for (long n = 1; n <= length; ++n) {
    for (int j = 0; j < k; ++j) w[j] = mu.transition(fut[n - 1], j);
    fut[n] = detail::drawIndex(rng, w);
  }
  return splice(x, detail::closePath(mu.sft(), fut, 0));
}

}  // namespace pinchlab
