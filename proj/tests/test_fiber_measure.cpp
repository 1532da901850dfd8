#include <random>

#include <catch_amalgamated.hpp>

#include <pinchlab/fiber_measure.hpp>

using namespace pinchlab;
using Catch::Approx;

TEST_CASE("measure construction")
{
  REQUIRE_THROWS_AS(FiberMeasure::atoms({}), DomainError);
  REQUIRE_THROWS_AS(FiberMeasure::atoms({{0.1, 0.5}}), DomainError);
  REQUIRE_THROWS_AS(FiberMeasure::cdf({{0.0, 0.0}, {0.5, 0.7}, {1.0, 0.6}}), DomainError);
  const auto m = FiberMeasure::atoms({{1.25, 0.5}, {-0.25, 0.5}});
  REQUIRE(m.atomList()[0].position == Approx(0.25));
  REQUIRE(m.atomList()[1].position == Approx(0.75));
  REQUIRE(m.totalMass() == Approx(1.0));
  REQUIRE(FiberMeasure::lebesgue().massNear(0.95, 0.1) == Approx(0.2));
}

TEST_CASE("transport distance between simple measures")
{
  REQUIRE(transportDistance(FiberMeasure::dirac(0.0), FiberMeasure::dirac(0.5)) == Approx(0.5));
  REQUIRE(transportDistance(FiberMeasure::dirac(0.1), FiberMeasure::dirac(0.9)) == Approx(0.2));
  // Lebesgue to a point mass: mean circle distance = 1/4.
  REQUIRE(transportDistance(FiberMeasure::lebesgue(), FiberMeasure::dirac(0.3)) == Approx(0.25).margin(1e-12));
  // Half-and-half split against uniform atoms.
  const auto two = FiberMeasure::atoms({{0.0, 0.5}, {0.5, 0.5}});
  REQUIRE(transportDistance(two, FiberMeasure::lebesgue()) == Approx(0.125).margin(1e-12));
  REQUIRE(transportDistance(FiberMeasure::uniformAtoms(1000, 0.5), FiberMeasure::lebesgue()) ==
          Approx(0.00025).margin(1e-12));
}

TEST_CASE("transport distance is a metric and rotation covariant")
{
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto randomAtoms = [&](int n) {
    std::vector<Atom> as;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      as.push_back({uni(rng), uni(rng) + 0.01});
      total += as.back().weight;
    }
    for (Atom& a : as) a.weight /= total;
    return FiberMeasure::atoms(as);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = randomAtoms(4), b = randomAtoms(5), c = randomAtoms(3);
    const double ab = transportDistance(a, b);
    REQUIRE(ab == Approx(transportDistance(b, a)).margin(1e-12));
    REQUIRE(transportDistance(a, c) <= ab + transportDistance(b, c) + 1e-12);
    REQUIRE(transportDistance(a, a) <= 1e-12);
    const auto r = CircleMap::rotation(uni(rng));
    REQUIRE(transportDistance(pushforward(a, r), pushforward(b, r)) == Approx(ab).margin(1e-12));
    REQUIRE(ab <= 0.5 + 1e-12);
  }
}

TEST_CASE("pushforward of atoms and CDFs")
{
  const auto f = makePwl({{0.0, 0.1}, {0.5, 0.3}});
  const auto d = pushforward(FiberMeasure::dirac(0.25), f);
  REQUIRE(d.atomList()[0].position == Approx(0.2));

  // Lebesgue pushed by f: density 1/0.4 on [0.1,0.3] and 1/1.6 elsewhere.
  const auto leb = pushforward(FiberMeasure::lebesgue(), f);
  REQUIRE(leb.massNear(0.2, 0.1) == Approx(0.5).margin(1e-12));
  REQUIRE(leb.massNear(0.65, 0.05) == Approx(0.1 / 1.6).margin(1e-12));

  // Pushforward then transport agrees with the atomic approximation.
  const auto atoms = pushforward(FiberMeasure::uniformAtoms(4000, 0.5), f);
  REQUIRE(transportDistance(atoms, leb) <= 1e-3);

  const auto back = pushforward(leb, invertMap(f));
  REQUIRE(transportDistance(back, FiberMeasure::lebesgue()) <= 1e-12);
}

TEST_CASE("pushforward round trip and identities")
{
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto f = makePwl({{0.0, 0.3}, {0.2, 0.35}, {0.7, 0.9}});
  const auto fi = invertMap(f);
  std::vector<Atom> as;
  for (int i = 0; i < 20; ++i) as.push_back({uni(rng), 0.05});
  const auto nu = FiberMeasure::atoms(as);
  const auto there = pushforward(nu, f);
  REQUIRE(there.totalMass() == Approx(1.0).margin(1e-15));
  REQUIRE(transportDistance(pushforward(there, fi), nu) <= 1e-10);
  REQUIRE(transportDistance(pushforward(nu, CircleMap::identity()), nu) == 0.0);
  const auto leb = pushforward(FiberMeasure::lebesgue(), CircleMap::rotation(0.3));
  REQUIRE(transportDistance(leb, FiberMeasure::lebesgue()) <= 1e-15);
}

TEST_CASE("mixtures")
{
  const std::vector<FiberMeasure> parts{FiberMeasure::dirac(0.1), FiberMeasure::dirac(0.6)};
  const auto m = mixture(parts);
  REQUIRE(m.massNear(0.1, 0.01) == Approx(0.5));
  const std::vector<FiberMeasure> mixed{FiberMeasure::dirac(0.1), FiberMeasure::lebesgue()};
  REQUIRE_THROWS_AS(mixture(mixed), DomainError);
  const std::vector<FiberMeasure> cdfs{FiberMeasure::lebesgue(), pushforward(FiberMeasure::lebesgue(), makePwl({{0.0, 0.1}, {0.5, 0.3}}))};
  REQUIRE(mixture(cdfs).totalMass() == Approx(1.0));
}
