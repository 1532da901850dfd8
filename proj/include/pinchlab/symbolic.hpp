#pragma once

// Subshifts of finite type and eventually periodic bi-infinite sequences.
//
// A point is stored as (left period, core, right period, origin offset).  The
// coordinate x_n reads the concatenation ...L L C R R... at index n + offset,
// where index 0 is the first symbol of the core and index -1 the last symbol of
// the left period.  Every constructor canonicalizes (primitive periods, maximal
// tails), so two points are equal iff their coordinate functions agree.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace pinchlab {

using Word = std::vector<int>;

inline std::string wordToString(const Word& w) {
  std::string s;
  s.reserve(w.size());
  for (int a : w) {
    if (a < 0 || a > 9) throw DomainError("symbol " + std::to_string(a) + " has no single-digit form");
    s.push_back(static_cast<char>('0' + a));
  }
  return s;
}

inline Word wordFromString(std::string_view s) {
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9') throw DomainError(std::string("bad symbol character '") + c + "'");
    w.push_back(c - '0');
  }
  return w;
}

namespace detail {

inline long floorMod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

// Length of the primitive root of a cyclic word.
inline std::size_t primitivePeriod(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool ok = true;
    for (std::size_t i = d; i < n && ok; ++i) ok = w[i] == w[i - d];
    if (ok) return d;
  }
  return n;
}

}  // namespace detail

class SymbolicPoint {
 public:
  SymbolicPoint(Word leftPeriod, Word core, Word rightPeriod, long originOffset = 0)
      : left_(std::move(leftPeriod)), core_(std::move(core)), right_(std::move(rightPeriod)),
        offset_(originOffset) {
    if (left_.empty() || right_.empty()) throw DomainError("periodic tails must be nonempty");
    canonicalize();
  }

  int operator[](long n) const {
    const long i = n + offset_;
    if (i < 0) return left_[detail::floorMod(i, static_cast<long>(left_.size()))];
    if (i < static_cast<long>(core_.size())) return core_[i];
    return right_[(i - static_cast<long>(core_.size())) % static_cast<long>(right_.size())];
  }

  const Word& leftPeriod() const { return left_; }
  const Word& core() const { return core_; }
  const Word& rightPeriod() const { return right_; }
  long originOffset() const { return offset_; }

  // Coordinates n < leftTailEnd() belong to the periodic left tail.
  long leftTailEnd() const { return -offset_; }
  // Coordinates n >= rightTailStart() belong to the periodic right tail.
  long rightTailStart() const { return static_cast<long>(core_.size()) - offset_; }

  bool isPeriodic() const { return core_.empty() && left_ == right_ && offset_ == 0; }

  // sigma^k
  SymbolicPoint shifted(long k) const { return SymbolicPoint(left_, core_, right_, offset_ + k); }

  // Coordinates x_first .. x_{first+len-1}.
  Word window(long first, std::size_t len) const {
    Word w(len);
    for (std::size_t i = 0; i < len; ++i) w[i] = (*this)[first + static_cast<long>(i)];
    return w;
  }

  std::string str() const {
    return wordToString(left_) + "|" + wordToString(core_) + "|" + wordToString(right_) + "@" +
           std::to_string(offset_);
  }

  static SymbolicPoint parse(std::string_view s) {
    const auto p1 = s.find('|');
    const auto p2 = p1 == std::string_view::npos ? p1 : s.find('|', p1 + 1);
    const auto at = p2 == std::string_view::npos ? p2 : s.find('@', p2 + 1);
    if (at == std::string_view::npos) throw DomainError("malformed point '" + std::string(s) + "'");
    long off = 0;
    try {
      off = std::stol(std::string(s.substr(at + 1)));
    } catch (const std::exception&) {
      throw DomainError("malformed origin offset in '" + std::string(s) + "'");
    }
    return SymbolicPoint(wordFromString(s.substr(0, p1)), wordFromString(s.substr(p1 + 1, p2 - p1 - 1)),
                         wordFromString(s.substr(p2 + 1, at - p2 - 1)), off);
  }

  friend bool operator==(const SymbolicPoint& a, const SymbolicPoint& b) {
    return a.offset_ == b.offset_ && a.core_ == b.core_ && a.left_ == b.left_ && a.right_ == b.right_;
  }

 private:
  void canonicalize() {
    const long p = static_cast<long>(detail::primitivePeriod(right_));
    const long q = static_cast<long>(detail::primitivePeriod(left_));
    const long a0 = leftTailEnd();
    const long b0 = rightTailStart();
    const auto& self = *this;

    bool purelyPeriodic = p == q;
    for (long n = a0 - p; purelyPeriodic && n < b0 + p; ++n) purelyPeriodic = self[n] == self[n + p];
    if (purelyPeriodic) {
      Word w = window(0, static_cast<std::size_t>(p));
      left_ = w;
      right_ = std::move(w);
      core_.clear();
      offset_ = 0;
      return;
    }

    long b = b0;
    while (b - 1 > a0 - p - q - 2 && self[b - 1] == self[b - 1 + p]) --b;
    long a = a0;
    while (a < b0 + p + q + 2 && self[a] == self[a - q]) ++a;
    if (a > b) a = b;

    Word left = window(a - q, static_cast<std::size_t>(q));
    Word core = window(a, static_cast<std::size_t>(b - a));
    Word right = window(b, static_cast<std::size_t>(p));
    left_ = std::move(left);
    core_ = std::move(core);
    right_ = std::move(right);
    offset_ = -a;
  }

  Word left_;
  Word core_;
  Word right_;
  long offset_;
};

// Smallest |n| with x_n != y_n, or nullopt when x == y.
inline std::optional<long> firstDisagreement(const SymbolicPoint& x, const SymbolicPoint& y) {
  const long pr = std::lcm(static_cast<long>(x.rightPeriod().size()), static_cast<long>(y.rightPeriod().size()));
  const long pl = std::lcm(static_cast<long>(x.leftPeriod().size()), static_cast<long>(y.leftPeriod().size()));
  const long hiEnd = std::max({x.rightTailStart(), y.rightTailStart(), 0L}) + pr;
  const long loEnd = std::min({x.leftTailEnd(), y.leftTailEnd(), 0L}) - pl;
  for (long m = 0; m <= hiEnd || -m >= loEnd; ++m) {
    if (m <= hiEnd && x[m] != y[m]) return m;
    if (-m >= loEnd && x[-m] != y[-m]) return m;
  }
  return std::nullopt;
}

// True when x_n == y_n for all n >= 0 (y in the local stable set of x).
inline bool sameFuture(const SymbolicPoint& x, const SymbolicPoint& y) {
  const long pr = std::lcm(static_cast<long>(x.rightPeriod().size()), static_cast<long>(y.rightPeriod().size()));
  const long hiEnd = std::max({x.rightTailStart(), y.rightTailStart(), 0L}) + pr;
  for (long n = 0; n <= hiEnd; ++n)
    if (x[n] != y[n]) return false;
  return true;
}

// True when x_n == y_n for all n <= 0 (y in the local unstable set of x).
inline bool samePast(const SymbolicPoint& x, const SymbolicPoint& y) {
  const long pl = std::lcm(static_cast<long>(x.leftPeriod().size()), static_cast<long>(y.leftPeriod().size()));
  const long loEnd = std::min({x.leftTailEnd(), y.leftTailEnd(), 0L}) - pl;
  for (long n = 0; n >= loEnd; --n)
    if (x[n] != y[n]) return false;
  return true;
}

// The point with the negative coordinates of `past` and the nonnegative
// coordinates of `future`.  Admissibility of the junction is the caller's job.
inline SymbolicPoint splice(const SymbolicPoint& past, const SymbolicPoint& future) {
  const long q = static_cast<long>(past.leftPeriod().size());
  const long p = static_cast<long>(future.rightPeriod().size());
  const long a = std::min(past.leftTailEnd(), 0L);
  const long b = std::max(future.rightTailStart(), 0L);
  Word core = past.window(a, static_cast<std::size_t>(-a));
  Word fut = future.window(0, static_cast<std::size_t>(b));
  core.insert(core.end(), fut.begin(), fut.end());
  return SymbolicPoint(past.window(a - q, static_cast<std::size_t>(q)), std::move(core),
                       future.window(b, static_cast<std::size_t>(p)), -a);
}

// d_rho(x, y) = rho^{-N}, N the length of the symmetric agreement window.
inline double metric(const SymbolicPoint& x, const SymbolicPoint& y, double rho) {
  if (!(rho > 1.0)) throw DomainError("metric base must exceed 1");
  const auto n = firstDisagreement(x, y);
  if (!n) return 0.0;
  return std::pow(rho, -static_cast<double>(*n));
}

class Sft {
 public:
  Sft(int alphabetSize, std::vector<std::vector<bool>> transitions)
      : k_(alphabetSize), a_(std::move(transitions)) {
    if (k_ <= 0) throw DomainError("alphabet size must be positive");
    if (static_cast<int>(a_.size()) != k_) throw DomainError("transition matrix must be k x k");
    for (const auto& row : a_)
      if (static_cast<int>(row.size()) != k_) throw DomainError("transition matrix must be k x k");
    for (int i = 0; i < k_; ++i) {
      bool out = false, in = false;
      for (int j = 0; j < k_; ++j) {
        out = out || a_[i][j];
        in = in || a_[j][i];
      }
      if (!out || !in) throw DomainError("symbol " + std::to_string(i) + " is a dead state");
    }
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        if (shortestPath(i, j).empty()) throw DomainError("transition graph is not strongly connected");
  }

  static Sft fullShift(int k) { return Sft(k, std::vector<std::vector<bool>>(k, std::vector<bool>(k, true))); }
  // Binary shift forbidding the word "11".
  static Sft goldenMean() { return Sft(2, {{true, true}, {true, false}}); }

  int alphabetSize() const { return k_; }
  bool allowed(int i, int j) const {
    return i >= 0 && j >= 0 && i < k_ && j < k_ && a_[i][j];
  }
  const std::vector<std::vector<bool>>& transitions() const { return a_; }

  bool admissible(const Word& w) const {
    for (int s : w)
      if (s < 0 || s >= k_) return false;
    for (std::size_t i = 1; i < w.size(); ++i)
      if (!a_[w[i - 1]][w[i]]) return false;
    return true;
  }

  // Admissible as a cyclic word (wrap-around junction included).
  bool admissibleCycle(const Word& w) const {
    return !w.empty() && admissible(w) && a_[w.back()][w.front()];
  }

  bool admissible(const SymbolicPoint& x) const {
    const long from = x.leftTailEnd() - static_cast<long>(x.leftPeriod().size()) - 1;
    const long to = x.rightTailStart() + static_cast<long>(x.rightPeriod().size()) + 1;
    for (long n = from; n <= to; ++n) {
      const int s = x[n];
      if (s < 0 || s >= k_) return false;
      if (n > from && !a_[x[n - 1]][s]) return false;
    }
    return true;
  }

  // The sft of sigma^{-1}: transitions transposed, so reversed words are admissible.
  Sft reversed() const {
    std::vector<std::vector<bool>> t(k_, std::vector<bool>(k_));
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j) t[i][j] = a_[j][i];
    return Sft(k_, std::move(t));
  }

  // A shortest admissible path i -> ... -> j with at least one edge, endpoints
  // included.  Empty if none exists.
  Word shortestPath(int i, int j) const {
    std::vector<int> prev(k_, -1);
    std::vector<bool> seen(k_, false);
    std::queue<int> queue;
    for (int s = 0; s < k_; ++s)
      if (a_[i][s] && !seen[s]) {
        seen[s] = true;
        prev[s] = i;
        queue.push(s);
      }
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      if (u == j) break;
      for (int s = 0; s < k_; ++s)
        if (a_[u][s] && !seen[s]) {
          seen[s] = true;
          prev[s] = u;
          queue.push(s);
        }
    }
    if (!seen[j]) return {};
    // prev[u] == i only on the first BFS layer, so the walk stops there.
    Word path{j};
    int u = j;
    do {
      u = prev[u];
      path.push_back(u);
    } while (u != i);
    std::reverse(path.begin(), path.end());
    return path;
  }

  // A shortest admissible cycle through symbol s, starting with s.
  Word shortestCycle(int s) const {
    Word path = shortestPath(s, s);
    path.pop_back();
    return path;
  }

 private:
  int k_;
  std::vector<std::vector<bool>> a_;
};

inline void requireSameAlphabet(const Sft& sft, const SymbolicPoint& x) {
  if (!sft.admissible(x)) throw DomainError("point " + x.str() + " is not admissible for this shift");
}

// The periodic point ...www.www... with x_0 = word[0].
inline SymbolicPoint periodicPoint(const Sft& sft, const Word& word) {
  if (word.empty()) throw DomainError("periodic word must be nonempty");
  if (!sft.admissibleCycle(word))
    throw DomainError("word " + wordToString(word) + " is not admissible as a cycle");
  return SymbolicPoint(word, {}, word, 0);
}

struct HomoclinicPoint {
  SymbolicPoint z;
  long k1;  // sigma^{k1}(z) shares the future of x0
  long k2;  // sigma^{-k2}(z) shares the past of x0
};

// z = (x0's period)^infty . bridgeOut bridgeIn . (x0's period)^infty with the
// bridge starting at coordinate 0.  k1 = bridge length, k2 = period of x0.
inline HomoclinicPoint homoclinicPoint(const Sft& sft, const SymbolicPoint& x0, const Word& bridgeOut,
                                       const Word& bridgeIn) {
  const long per = static_cast<long>(x0.rightPeriod().size());
  if (!(x0.shifted(per) == x0) || !x0.core().empty()) throw DomainError("x0 must be a periodic point");
  Word core = bridgeOut;
  core.insert(core.end(), bridgeIn.begin(), bridgeIn.end());
  if (core.empty()) throw DomainError("homoclinic bridge must be nonempty");
  const Word phase0 = x0.window(0, static_cast<std::size_t>(per));
  const Word tailLeft = x0.window(-per, static_cast<std::size_t>(per));
  if (core.front() == x0[0])
    throw DomainError("homoclinic point would lie in the same 0-cylinder as x0");
  Word full = tailLeft;
  full.insert(full.end(), core.begin(), core.end());
  full.insert(full.end(), phase0.begin(), phase0.end());
  if (!sft.admissible(full)) throw DomainError("bridge " + wordToString(core) + " is not admissible");
  const long k1 = static_cast<long>(core.size());
  SymbolicPoint z(tailLeft, core, phase0, 0);
  return {z, k1, per};
}

// Reference points x_i with (x_i)_0 = i, one per symbol (nullopt when absent).
using Anchors = std::vector<std::optional<SymbolicPoint>>;

// Periodic points on shortest cycles, one per symbol.
inline Anchors defaultAnchors(const Sft& sft) {
  Anchors anchors(sft.alphabetSize());
  for (int i = 0; i < sft.alphabetSize(); ++i) anchors[i] = periodicPoint(sft, sft.shortestCycle(i));
  return anchors;
}

// W^s_loc(x) intersected with W^u_loc(x_{x_0}).
inline SymbolicPoint anchorProjection(const SymbolicPoint& x, const Anchors& anchors) {
  const int s = x[0];
  if (s < 0 || s >= static_cast<int>(anchors.size()) || !anchors[s])
    throw DomainError("no anchor for symbol " + std::to_string(s));
  if ((*anchors[s])[0] != s) throw DomainError("anchor for symbol " + std::to_string(s) + " has wrong 0-coordinate");
  return splice(*anchors[s], x);
}

}  // namespace pinchlab
