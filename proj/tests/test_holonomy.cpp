#include <random>

#include <catch_amalgamated.hpp>

#include <pinchlab/holonomy.hpp>
#include <pinchlab/presets.hpp>

using namespace pinchlab;
using Catch::Approx;

namespace {

const Sft kFull = Sft::fullShift(2);

// Slopes in [0.84, 1.2] everywhere: worst domination constant 0.6 at rho = 2.
Cocycle dominatedCocycle() { return mixedPreset(kFull); }

}  // namespace

TEST_CASE("trivial holonomies") {
  const auto mu = bernoulliMeasure({0.5, 0.5}, 2.0);
  const SymbolicPoint x = sampleBase(mu, 10, 1);
  const Cocycle F = dominatedCocycle();

  const Holonomy h = holonomy(F, x, x, Side::Stable, 1e-8);
  CHECK(supDistance(h.map, CircleMap::identity()) == 0.0);
  CHECK(h.residual == 0.0);
  CHECK(h.truncation == 0);

  SECTION("constant cocycle gives the identity") {
    const Cocycle C = Cocycle::constant(kFull, pinchedMap());
    std::mt19937_64 rng(3);
    for (Side side : {Side::Stable, Side::Unstable}) {
      const SymbolicPoint y = localPartner(mu, x, side, 8, rng);
      CHECK(supDistance(holonomy(C, x, y, side, 1e-8).map, CircleMap::identity()) == 0.0);
    }
  }
}

TEST_CASE("points differing at coordinate -1") {
  const Cocycle F = dominatedCocycle();
  const SymbolicPoint x = SymbolicPoint::parse("0|0110|1@2");
  const SymbolicPoint y = SymbolicPoint::parse("0|0010|1@2");
  REQUIRE(sameFuture(x, y));
  REQUIRE(firstDisagreement(x, y) == 1L);
  REQUIRE(x[-1] != y[-1]);

  const Holonomy h = holonomy(F, x, y, Side::Stable, 1e-8);
  // Windows agree from step 1 on, so every truncation equals f_y^{-1} o f_x.
  const CircleMap expected = composeMaps(F.inverseAt(y), F.at(x));
  CHECK(supDistance(h.map, expected) == 0.0);
  CHECK(supDistance(h.map, detail::truncatedHolonomy(F, x, y, Side::Stable, 200)) == 0.0);

  const auto res = truncationResiduals(F, x, y, Side::Stable, 60);
  CHECK(res.front() > 0.0);
  for (std::size_t i = 1; i < res.size(); ++i) CHECK(res[i] == 0.0);
  CHECK(fitDecayRatio(res) <= dominationCheck(F, 2.0, 1.0).worst);

  CHECK_THROWS_AS(holonomy(F, x, y, Side::Stable, 1e-8, 1), ConvergenceError);
}

TEST_CASE("decay fit") {
  std::vector<double> geometric;
  for (int n = 0; n < 30; ++n) geometric.push_back(0.3 * std::pow(0.7, n));
  CHECK(fitDecayRatio(geometric) == Approx(0.7).epsilon(1e-12));
  CHECK_THROWS_AS(fitDecayRatio({1.0}), DomainError);
}

TEST_CASE("local set preconditions") {
  const Cocycle F = dominatedCocycle();
  const SymbolicPoint x = SymbolicPoint::parse("0|0110|1@2");
  const SymbolicPoint y = SymbolicPoint::parse("0|0100|1@2");  // differs at coordinate 0
  CHECK_THROWS_AS(holonomy(F, x, y, Side::Stable, 1e-8), DomainError);
  CHECK_THROWS_AS(holonomy(F, x, y, Side::Unstable, 1e-8), DomainError);
  CHECK_THROWS_AS(holonomy(F, x, x, Side::Stable, 0.0), DomainError);
}

TEST_CASE("holonomy axioms") {
  const auto mu = bernoulliMeasure({0.5, 0.5}, 2.0);
  AuditOptions opt;
  opt.pairCount = 100;
  opt.tol = 1e-8;

  SECTION("constant cocycle") {
    const Cocycle C = Cocycle::constant(kFull, pinchedMap());
    for (Side side : {Side::Stable, Side::Unstable}) {
      const auto a = holonomyAxiomResiduals(C, mu, side, opt);
      CHECK(a.failures == 0);
      CHECK(a.maxAxiomA == 0.0);
      CHECK(a.maxAxiomB == Approx(0.0).margin(1e-15));
    }
  }
  SECTION("dominated range 1 cocycle") {
    const Cocycle F = dominatedCocycle();
    REQUIRE(dominationCheck(F, 2.0, 0.6 + 1e-12).dominated);
    for (Side side : {Side::Stable, Side::Unstable}) {
      const auto a = holonomyAxiomResiduals(F, mu, side, opt);
      CHECK(a.failures == 0);
      CHECK(a.maxAxiomA < 10 * opt.tol);
      CHECK(a.maxAxiomB < 10 * opt.tol);
      for (const auto& p : a.pairs) CHECK(p.inverse <= 2 * p.residual + 1e-14);
      // Holonomies read only coordinates >= -range (stable) or <= range
      // (unstable) of the endpoint, so nested partners agreeing beyond that
      // give the same map.
      for (const auto& c : a.continuity)
        if (c.baseDistance <= std::pow(2.0, -(F.range() + 1))) CHECK(c.mapDistance == 0.0);
    }
  }
  SECTION("deterministic") {
    const Cocycle F = dominatedCocycle();
    opt.pairCount = 20;
    const auto a = holonomyAxiomResiduals(F, mu, Side::Stable, opt);
    const auto b = holonomyAxiomResiduals(F, mu, Side::Stable, opt);
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
      CHECK(a.pairs[i].to == b.pairs[i].to);
      CHECK(a.pairs[i].axiomA == b.pairs[i].axiomA);
    }
  }
}

TEST_CASE("stable-constant conjugation") {
  const auto mu = bernoulliMeasure({0.5, 0.5}, 2.0);
  const Anchors anchors = defaultAnchors(kFull);

  SECTION("constant cocycle is unchanged") {
    const Cocycle C = Cocycle::constant(kFull, pinchedMap());
    const auto Ft = conjugateStableConstant(C, anchors, 1e-8);
    const auto ghat = projectOneSided(Ft);
    for (int i = 0; i < 10; ++i) {
      const SymbolicPoint x = sampleBase(mu, 10, 50 + i);
      CHECK(supDistance(Ft.at(x), pinchedMap()) < 1e-15);
      CHECK(supDistance(ghat.at(x), pinchedMap()) < 1e-15);
    }
  }

  const Cocycle F = dominatedCocycle();
  const auto Ft = conjugateStableConstant(F, anchors, 1e-8);

  SECTION("anchored points need no conjugation") {
    const SymbolicPoint a = anchorProjection(sampleBase(mu, 10, 7), anchors);
    CHECK(supDistance(Ft.fromAnchor(a), CircleMap::identity()) == 0.0);
  }
  SECTION("constant along stable sets") {
    std::mt19937_64 rng(12);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const SymbolicPoint x = sampleBase(mu, 10, 100 + i);
      const SymbolicPoint y = localPartner(mu, x, Side::Stable, 8, rng);
      worst = std::max(worst, supDistance(Ft.at(x), Ft.at(y)));
    }
    CHECK(worst < 1e-6);
  }
  SECTION("one-sided projection") {
    const auto ghat = projectOneSided(Ft);
    std::mt19937_64 rng(13);
    double semi = 0.0, welldef = 0.0;
    for (int i = 0; i < 50; ++i) {
      const SymbolicPoint x = sampleBase(mu, 10, 200 + i);
      CHECK(ghat.shift(ghat.project(x)) == ghat.project(x.shifted(1)));
      semi = std::max(semi, supDistance(ghat.at(ghat.project(x)), Ft.at(x)));
      const SymbolicPoint y = localPartner(mu, x, Side::Stable, 8, rng);
      welldef = std::max(welldef, supDistance(ghat.at(x), ghat.at(y)));
    }
    CHECK(semi < 1e-6);
    CHECK(welldef == 0.0);
    const SymbolicPoint x = sampleBase(mu, 10, 5);
    CHECK(supDistance(ghat.iterate(x, 3), composeMaps(ghat.at(x.shifted(2)), composeMaps(ghat.at(x.shifted(1)), ghat.at(x)))) < 1e-10);
  }
}

TEST_CASE("decay fit stops at the floor") {
  CHECK(fitDecayRatio({1e-3, 0.0, 0.0, 0.0, 0.0}) == Approx(1e-13).epsilon(1e-9));
  CHECK(fitDecayRatio({0.0, 0.0, 0.0}) == Approx(1.0));
}
