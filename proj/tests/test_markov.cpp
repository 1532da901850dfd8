#include <cmath>

#include <catch_amalgamated.hpp>

#include <pinchlab/markov.hpp>

using namespace pinchlab;
using Catch::Approx;

namespace {

const Matrix kSkewed{{0.9, 0.1}, {0.5, 0.5}};

// All words of the given length over k symbols.
std::vector<Word> allWords(int k, int len) {
  std::vector<Word> out{Word{}};
  for (int i = 0; i < len; ++i) {
    std::vector<Word> next;
    for (const auto& w : out)
      for (int s = 0; s < k; ++s) {
        Word v = w;
        v.push_back(s);
        next.push_back(v);
      }
    out = std::move(next);
  }
  return out;
}

// Exhaustive local-product check: for every cylinder with past length m >= 1
// and future length n, mu(E) = mu^u(past) * mu^s(future) * density.
double productResidual(const MarkovMeasure& mu, int maxPast, int maxFuture) {
  double worst = 0.0;
  for (int m = 1; m <= maxPast; ++m)
    for (int n = 0; n <= maxFuture; ++n)
      for (const auto& w : allWords(mu.sft().alphabetSize(), m + n + 1)) {
        const Word past(w.begin(), w.begin() + m);
        const Word future(w.begin() + m, w.end());
        const SymbolicPoint x(Word{w.front()}, w, Word{w.back()}, m);
        if (!mu.sft().admissible(w)) continue;
        const double lhs = cylinderMass(mu, w);
        const double rhs = cylinderMass(mu, past) * cylinderMass(mu, future) * productDensity(mu, x);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
  return worst;
}

}  // namespace

TEST_CASE("stationary vectors")
{
  const auto bern = bernoulliMeasure({0.5, 0.5}, 2.0);
  REQUIRE(bern.stationary()[0] == Approx(0.5).margin(1e-13));
  REQUIRE(bern.stationary()[1] == Approx(0.5).margin(1e-13));

  // pi P = pi by hand: 0.1 pi_0 = 0.5 pi_1, pi_0 + pi_1 = 1.
  const auto mu = markovMeasure(Sft::fullShift(2), kSkewed, 2.0);
  REQUIRE(mu.stationary()[0] == Approx(5.0 / 6.0).margin(1e-12));
  REQUIRE(mu.stationary()[1] == Approx(1.0 / 6.0).margin(1e-12));

  // Periodic chain still converges thanks to the lazy iteration.
  const auto flip = markovMeasure(Sft::fullShift(2), {{0.0, 1.0}, {1.0, 0.0}}, 2.0);
  REQUIRE(flip.stationary()[0] == Approx(0.5).margin(1e-13));
}

TEST_CASE("markov measure validation")
{
  REQUIRE_THROWS_AS(markovMeasure(Sft::fullShift(2), {{1.0, 0.0}, {1.0, 0.0}}, 2.0), DomainError);
  REQUIRE_THROWS_AS(markovMeasure(Sft::goldenMean(), {{0.5, 0.5}, {0.5, 0.5}}, 2.0), DomainError);
  REQUIRE_THROWS_AS(markovMeasure(Sft::fullShift(2), {{0.5, 0.6}, {0.5, 0.5}}, 2.0), DomainError);
  REQUIRE_THROWS_AS(markovMeasure(Sft::fullShift(2), kSkewed, 1.0), DomainError);
}

TEST_CASE("cylinder masses")
{
  const auto bern = bernoulliMeasure({0.5, 0.5}, 2.0);
  REQUIRE(cylinderMass(bern, Word{0, 1}) == Approx(0.25));
  const auto mu = markovMeasure(Sft::fullShift(2), kSkewed, 2.0);
  REQUIRE(cylinderMass(mu, Word{0, 1}) == Approx(1.0 / 12.0).margin(1e-13));
  REQUIRE(cylinderMass(mu, Word{0, 1}, 0) == cylinderMass(mu, Word{0, 1}, 17));
  const auto gm = markovMeasure(Sft::goldenMean(), {{0.5, 0.5}, {1.0, 0.0}}, 2.0);
  REQUIRE(cylinderMass(gm, Word{1, 1}) == 0.0);
}

TEST_CASE("product density reproduces cylinder masses")
{
  const auto bern = bernoulliMeasure({0.5, 0.5}, 2.0);
  const SymbolicPoint x(Word{0}, Word{1, 0}, Word{1}, 1);
  REQUIRE(productDensity(bern, x) == Approx(1.0));

  const auto mu = markovMeasure(Sft::fullShift(2), kSkewed, 2.0);
  const SymbolicPoint y(Word{0}, Word{1}, Word{0}, 0);  // y_{-1} = 0, y_0 = 1
  REQUIRE(productDensity(mu, y) == Approx(0.6).margin(1e-12));

  REQUIRE(productResidual(bern, 3, 3) <= 1e-12);
  REQUIRE(productResidual(mu, 3, 3) <= 1e-12);
  // Exhaustive up to total cylinder length 7.
  REQUIRE(productResidual(mu, 3, 3) <= 1e-12);
  const auto gm = markovMeasure(Sft::goldenMean(), {{0.3, 0.7}, {1.0, 0.0}}, 2.0);
  REQUIRE(productResidual(gm, 4, 2) <= 1e-12);
}

TEST_CASE("sampling is deterministic and matches the stationary law")
{
  const auto mu = markovMeasure(Sft::fullShift(2), kSkewed, 2.0);
  REQUIRE(sampleBase(mu, 5, 42) == sampleBase(mu, 5, 42));
  REQUIRE_THROWS_AS(sampleBase(mu, 0, 1), DomainError);

  const int n = 10000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    const auto x = sampleBase(mu, 3, 1000 + i);
    REQUIRE(mu.sft().admissible(x));
    zeros += x[0] == 0;
  }
  const double p = 5.0 / 6.0;
  const double sigma = std::sqrt(p * (1 - p) / n);
  REQUIRE(std::abs(zeros / double(n) - p) <= 3 * sigma);

  // Backward steps follow the reversed chain: frequency of x_{-1} = 1 given x_0 = 0.
  int given0 = 0, prev1 = 0;
  for (int i = 0; i < n; ++i) {
    const auto x = sampleBase(mu, 2, 50000 + i);
    if (x[0] == 0) {
      ++given0;
      prev1 += x[-1] == 1;
    }
  }
  const double q = mu.reversedTransition(0, 1);
  REQUIRE(std::abs(prev1 / double(given0) - q) <= 4 * std::sqrt(q * (1 - q) / given0));
}

TEST_CASE("resampled pasts and futures stay in the local sets")
{
  const auto gm = markovMeasure(Sft::goldenMean(), {{0.4, 0.6}, {1.0, 0.0}}, 2.0);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto x = sampleBase(gm, 6, i);
    const auto y = resamplePast(gm, x, 5, rng);
    const auto z = resampleFuture(gm, x, 5, rng);
    REQUIRE(gm.sft().admissible(y));
    REQUIRE(gm.sft().admissible(z));
    REQUIRE(sameFuture(x, y));
    REQUIRE(samePast(x, z));
  }
}
