#pragma once

// Finite-range cocycles over a subshift.  The fiber map at x depends only on
// the window x_s .. x_{s+L-1}; the usual centered range-r cocycle has s = -r,
// L = 2r + 1.  Windows are tabulated by their base-k code.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "circle_map.hpp"
#include "errors.hpp"
#include "symbolic.hpp"

namespace pinchlab {

namespace detail {

inline std::vector<Word> admissibleWords(const Sft& sft, std::size_t len) {
  std::vector<Word> out;
  if (len == 0) return {Word{}};
  Word w;
  std::function<void()> rec = [&] {
    if (w.size() == len) {
      out.push_back(w);
      return;
    }
    for (int a = 0; a < sft.alphabetSize(); ++a) {
      if (!w.empty() && !sft.allowed(w.back(), a)) continue;
      w.push_back(a);
      rec();
      w.pop_back();
    }
  };
  rec();
  return out;
}

}  // namespace detail

class Cocycle {
 public:
  using Rule = std::function<CircleMap(const Word&)>;

  Cocycle(Sft base, long windowStart, std::size_t windowLength, const Rule& rule, double alpha = 1.0,
          double beta = 1.0)
      : base_(std::move(base)), start_(windowStart), length_(windowLength), alpha_(alpha), beta_(beta) {
    if (windowLength == 0) throw DomainError("window length must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
      throw DomainError("Hoelder exponents must lie in (0,1]");
    const double slots = std::pow(static_cast<double>(base_.alphabetSize()), static_cast<double>(length_));
    if (slots > static_cast<double>(1u << 24)) throw DomainError("window table too large");
    maps_.resize(static_cast<std::size_t>(slots));
    inverses_.resize(maps_.size());
    words_ = detail::admissibleWords(base_, length_);
    for (const Word& w : words_) {
      const std::size_t c = code(w);
      maps_[c] = rule(w);
      inverses_[c] = invertMap(*maps_[c]);
    }
  }

  // Centered window of radius r.
  static Cocycle centered(const Sft& base, int r, const Rule& rule, double alpha = 1.0, double beta = 1.0) {
    if (r < 0) throw DomainError("range must be nonnegative");
    return Cocycle(base, -r, static_cast<std::size_t>(2 * r + 1), rule, alpha, beta);
  }

  static Cocycle constant(const Sft& base, const CircleMap& f) {
    return centered(base, 0, [&](const Word&) { return f; });
  }

  const Sft& base() const { return base_; }
  long windowStart() const { return start_; }
  std::size_t windowLength() const { return length_; }
  long windowEnd() const { return start_ + static_cast<long>(length_) - 1; }
  // Smallest r with the window inside [-r, r].
  long range() const { return std::max({0L, -start_, windowEnd()}); }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  // Admissible windows in lexicographic order.
  const std::vector<Word>& windows() const { return words_; }

  const CircleMap& entry(const Word& w) const {
    if (w.size() != length_) throw DomainError("window has the wrong length");
    const auto& m = maps_.at(code(w));
    if (!m) throw DomainError("window " + wordToString(w) + " is not admissible");
    return *m;
  }
  const CircleMap& inverseEntry(const Word& w) const {
    entry(w);
    return *inverses_[code(w)];
  }

  // Window code of sigma^k(x).
  std::size_t windowCode(const SymbolicPoint& x, long k = 0) const {
    std::size_t c = 0;
    const std::size_t kk = static_cast<std::size_t>(base_.alphabetSize());
    for (std::size_t i = 0; i < length_; ++i) c = c * kk + static_cast<std::size_t>(x[k + start_ + static_cast<long>(i)]);
    return c;
  }

  // f_{sigma^k x} and its inverse.
  const CircleMap& at(const SymbolicPoint& x, long k = 0) const {
    const auto& m = maps_[windowCode(x, k)];
    if (!m) throw DomainError("point " + x.str() + " is not admissible for the cocycle");
    return *m;
  }
  const CircleMap& inverseAt(const SymbolicPoint& x, long k = 0) const {
    const auto& m = inverses_[windowCode(x, k)];
    if (!m) throw DomainError("point " + x.str() + " is not admissible for the cocycle");
    return *m;
  }

  // Same cocycle tabulated on a larger window [start, start + length).
  Cocycle widened(long start, std::size_t length) const {
    const long off = start_ - start;
    if (off < 0 || off + static_cast<long>(length_) > static_cast<long>(length))
      throw DomainError("widened window must contain the original");
    return Cocycle(
        base_, start, length,
        [&](const Word& w) { return entry(Word(w.begin() + off, w.begin() + off + static_cast<long>(length_))); },
        alpha_, beta_);
  }

 private:
  std::size_t code(const Word& w) const {
    std::size_t c = 0;
    for (int a : w) c = c * static_cast<std::size_t>(base_.alphabetSize()) + static_cast<std::size_t>(a);
    return c;
  }

  Sft base_;
  long start_;
  std::size_t length_;
  double alpha_, beta_;
  std::vector<Word> words_;
  std::vector<std::optional<CircleMap>> maps_;
  std::vector<std::optional<CircleMap>> inverses_;
};

// f^n_x = f_{sigma^{n-1} x} o ... o f_x; negative n gives (f^{-n}_{sigma^n x})^{-1}.
inline CircleMap fiberCompose(const Cocycle& F, const SymbolicPoint& x, long n) {
  CircleMap acc = CircleMap::identity();
  if (n >= 0) {
    for (long k = 0; k < n; ++k) acc = composeMaps(F.at(x, k), acc);
    return acc;
  }
  // f^{-|n|}_x = f_{sigma^{-|n|} x}^{-1} o ... o f_{sigma^{-1} x}^{-1}
  for (long k = -1; k >= n; --k) acc = composeMaps(F.inverseAt(x, k), acc);
  return acc;
}

// F(x, p) iterated n >= 0 times on the fiber coordinate.
inline double applyForward(const Cocycle& F, const SymbolicPoint& x, double p, long n) {
  for (long k = 0; k < n; ++k) p = F.at(x, k)(p);
  return p;
}

struct DominationReport {
  double worst = 0.0;
  bool dominated = false;
  Word worstWindow;
  bool worstIsInverse = false;
};

// max over table entries and their inverses of H_beta(f) rho^{-alpha beta}.
inline DominationReport dominationCheck(const Cocycle& F, double rho, double c) {
  if (!(rho > 1.0)) throw DomainError("metric base must exceed 1");
  const double factor = std::pow(rho, -F.alpha() * F.beta());
  DominationReport rep;
  for (const Word& w : F.windows()) {
    const double hf = holderConstant(F.entry(w), F.beta()) * factor;
    const double hi = holderConstant(F.inverseEntry(w), F.beta()) * factor;
    if (hf > rep.worst || rep.worstWindow.empty()) {
      rep.worst = hf;
      rep.worstWindow = w;
      rep.worstIsInverse = false;
    }
    if (hi > rep.worst) {
      rep.worst = hi;
      rep.worstWindow = w;
      rep.worstIsInverse = true;
    }
  }
  rep.dominated = rep.worst <= c;
  return rep;
}

struct CocycleDistanceReport {
  double total = 0.0;
  double supTerm = 0.0;     // sup over windows of d_max(f_w, g_w)
  double holderTerm = 0.0;  // |H_alpha(F) - H_alpha(G)|
  double baseHolderF = 0.0, baseHolderG = 0.0;
};

namespace detail {

struct TabulatedMaps {
  std::vector<CircleMap> f, fi;
  std::vector<double> hf, hfi;
};

inline TabulatedMaps tabulate(const Cocycle& F) {
  TabulatedMaps t;
  for (const Word& w : F.windows()) {
    t.f.push_back(F.entry(w));
    t.fi.push_back(F.inverseEntry(w));
    t.hf.push_back(holderConstant(t.f.back(), F.beta()));
    t.hfi.push_back(holderConstant(t.fi.back(), F.beta()));
  }
  return t;
}

inline double maxDistance(const TabulatedMaps& a, std::size_t i, const TabulatedMaps& b, std::size_t j) {
  const double fwd = supDistance(a.f[i], b.f[j]) + std::abs(a.hf[i] - b.hf[j]);
  const double bwd = supDistance(a.fi[i], b.fi[j]) + std::abs(a.hfi[i] - b.hfi[j]);
  return std::max(fwd, bwd);
}

// Base Hoelder constant: max over window pairs of d_max / rho^{-alpha N},
// N the smallest |n| at which the windows differ.
inline double baseHolder(const Cocycle& F, const TabulatedMaps& t, double rho) {
  const auto& ws = F.windows();
  double best = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i)
    for (std::size_t j = i + 1; j < ws.size(); ++j) {
      long n = -1;
      for (std::size_t q = 0; q < ws[i].size(); ++q)
        if (ws[i][q] != ws[j][q]) {
          const long pos = std::abs(F.windowStart() + static_cast<long>(q));
          if (n < 0 || pos < n) n = pos;
        }
      const double d = maxDistance(t, i, t, j);
      if (d == 0.0) continue;
      best = std::max(best, d / std::pow(rho, -F.alpha() * static_cast<double>(n)));
    }
  return best;
}

}  // namespace detail

// Hoelder distance between two cocycles over the same shift, both tabulated on
// the smallest window containing each of theirs.
inline CocycleDistanceReport cocycleDistanceReport(const Cocycle& F, const Cocycle& G, double rho) {
  if (F.base().transitions() != G.base().transitions()) throw DomainError("cocycles over different shifts");
  if (!(rho > 1.0)) throw DomainError("metric base must exceed 1");
  const long s = std::min(F.windowStart(), G.windowStart());
  const long e = std::max(F.windowEnd(), G.windowEnd());
  const std::size_t len = static_cast<std::size_t>(e - s + 1);
  const Cocycle Fw = F.widened(s, len), Gw = G.widened(s, len);
  const auto tf = detail::tabulate(Fw), tg = detail::tabulate(Gw);
  CocycleDistanceReport rep;
  for (std::size_t i = 0; i < tf.f.size(); ++i) rep.supTerm = std::max(rep.supTerm, detail::maxDistance(tf, i, tg, i));
  rep.baseHolderF = detail::baseHolder(Fw, tf, rho);
  rep.baseHolderG = detail::baseHolder(Gw, tg, rho);
  rep.holderTerm = std::abs(rep.baseHolderF - rep.baseHolderG);
  rep.total = rep.supTerm + rep.holderTerm;
  return rep;
}

inline double cocycleDistance(const Cocycle& F, const Cocycle& G, double rho) {
  return cocycleDistanceReport(F, G, rho).total;
}

// The point x' with x'_n = x_{-n}; sigma^{-1} on x becomes sigma on x'.
inline SymbolicPoint timeReversed(const SymbolicPoint& x) {
  Word l(x.rightPeriod().rbegin(), x.rightPeriod().rend());
  Word c(x.core().rbegin(), x.core().rend());
  Word r(x.leftPeriod().rbegin(), x.leftPeriod().rend());
  return SymbolicPoint(std::move(l), std::move(c), std::move(r), x.rightTailStart() - 1);
}

// The inverse skew product over the reversed shift, in reflected coordinates:
// its fiber map at x' is (f_{sigma^{-1} x})^{-1}.  The window [s, s+L) becomes
// [2-s-L, 2-s), read backwards.
inline Cocycle inverseCocycle(const Cocycle& F) {
  const long s = 2 - F.windowStart() - static_cast<long>(F.windowLength());
  return Cocycle(
      F.base().reversed(), s, F.windowLength(),
      [&](const Word& w) { return F.inverseEntry(Word(w.rbegin(), w.rend())); }, F.alpha(), F.beta());
}

}  // namespace pinchlab
