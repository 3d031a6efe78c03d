#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "porolab/approx.hpp"
#include "porolab/rng.hpp"
#include "porolab/system.hpp"

using namespace porolab;

namespace {

// Two rotated contractions on the unit square; exercises non-identity
// orthogonal parts. The images overlap, which is fine for composition and
// nesting tests.
SystemSpec rotated_pair() {
  SimilitudeMap a{0.4, Mat::rotation2(0.7), Vec{0.26, 0.01}};
  SimilitudeMap b{0.4, Mat::rotation2(-0.4), Vec{0.45, 0.3}};
  return SystemSpec::make(2, {a, b},
                          Box::from_corner_sides(Vec{0, 0}, Vec{1, 1}),
                          "rotated_pair");
}

SystemSpec three_quarters() {
  auto m = [](double tx, double ty) {
    return SimilitudeMap::scaling(2, 0.5, Vec{tx, ty});
  };
  return SystemSpec::make(2, {m(0, 0), m(0.5, 0), m(0, 0.5)},
                          Box::from_corner_sides(Vec{0, 0}, Vec{1, 1}),
                          "three_quarters");
}

}  // namespace

TEST_CASE("word composition") {
  const SystemSpec fc = builtin_system("four_corners");

  SECTION("empty word is the identity") {
    const SimilitudeMap id = compose(fc, Word{});
    CHECK(id.ratio == 1.0);
    CHECK(id.orthogonal.orthogonality_defect() == 0.0);
    CHECK(norm(id.translation) == 0.0);
  }
  SECTION("single letter returns the map itself") {
    const SimilitudeMap f = compose(fc, Word{2});
    CHECK(f.ratio == 0.25);
    CHECK(f.translation.v[0] == 0.75);
    CHECK(f.translation.v[1] == 0.0);
  }
  SECTION("two letters compose left to right") {
    const SimilitudeMap f = compose(fc, Word{1, 2});
    CHECK(f.ratio == 0.0625);
    CHECK(f.translation.v[0] == 0.1875);
    CHECK(f.translation.v[1] == 0.0);
    const Vec y = f.apply(Vec{1, 1});
    CHECK(y.v[0] == Catch::Approx(1.0 / 16 + 3.0 / 16).margin(1e-15));
  }
  SECTION("letters outside the index set name the offending position") {
    try {
      compose(fc, Word{1, 7, 2});
      FAIL("expected UsageError");
    } catch (const UsageError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("position 1") != std::string::npos);
      CHECK(msg.find("7") != std::string::npos);
    }
  }
}

TEST_CASE("composition ratio is multiplicative on random words") {
  for (const SystemSpec& spec : {builtin_system("four_corners"), rotated_pair()}) {
    Rng rng(99);
    for (int rep = 0; rep < 40; ++rep) {
      Word w, v;
      const size_t lw = rng.index(5), lv = 1 + rng.index(3);
      for (size_t i = 0; i < lw; ++i)
        w.letters.push_back(static_cast<int>(rng.index(spec.branching())) + 1);
      for (size_t i = 0; i < lv; ++i)
        v.letters.push_back(static_cast<int>(rng.index(spec.branching())) + 1);
      Word wv = w;
      wv.letters.insert(wv.letters.end(), v.letters.begin(), v.letters.end());
      REQUIRE(wv.length() <= 8);
      const double lhs = compose(spec, wv).ratio;
      const double rhs = compose(spec, w).ratio * compose(spec, v).ratio;
      CHECK(std::fabs(lhs - rhs) <= 1e-12 * std::max(lhs, rhs));
    }
  }
}

TEST_CASE("generate: counts, boxes, weights, resolution") {
  const SystemSpec fc = builtin_system("four_corners");

  SECTION("depth zero is the seed box itself") {
    const LimitSetApprox ap = generate(fc, 0);
    REQUIRE(ap.count() == 1);
    CHECK(ap.resolution == Catch::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(ap.cylinder(0).word().empty());
  }
  SECTION("four corners at depth 2") {
    const LimitSetApprox ap = generate(fc, 2);
    REQUIRE(ap.count() == 16);
    for (size_t i = 0; i < 16; ++i) {
      const Box b = ap.cylinder(i).image_box();
      CHECK(b.side(0) == Catch::Approx(1.0 / 16).epsilon(1e-14));
      CHECK(ap.cylinder(i).weight() == Catch::Approx(1.0 / 16).epsilon(1e-14));
    }
  }
  SECTION("segment system at depth 3") {
    const LimitSetApprox ap = generate(builtin_system("segment2"), 3);
    REQUIRE(ap.count() == 8);
    for (size_t i = 0; i < 8; ++i)
      CHECK(ap.cylinder(i).diameter() == Catch::Approx(0.125).epsilon(1e-14));
  }
  SECTION("atom budget is enforced with the required size") {
    try {
      generate(fc, 15);
      FAIL("expected CapacityError");
    } catch (const CapacityError& e) {
      CHECK(e.required > 4e6);
    }
  }
}

TEST_CASE("generate invariants") {
  SECTION("nesting: child boxes sit inside parent boxes") {
    for (const SystemSpec& spec : {builtin_system("four_corners"), rotated_pair()}) {
      const LimitSetApprox parent = generate(spec, 3);
      const LimitSetApprox child = generate(spec, 4);
      const size_t m = spec.branching();
      for (size_t i = 0; i < parent.count(); ++i) {
        const Box pb = parent.cylinder(i).image_box();
        for (size_t c = 0; c < m; ++c) {
          const Box cb = child.cylinder(i * m + c).image_box();
          CHECK(pb.contains_box(cb, 1e-12));
        }
      }
    }
  }
  SECTION("atoms lie in their cylinder boxes") {
    for (const SystemSpec& spec :
         {builtin_system("four_corners"), rotated_pair(),
          builtin_system("sierpinski")}) {
      const LimitSetApprox ap = generate(spec, 5);
      for (size_t i = 0; i < ap.count(); ++i) {
        const Box b = ap.cylinder(i).image_box().expanded(1e-12);
        CHECK(b.contains_closed(ap.atom_ptr(i)));
      }
    }
  }
  SECTION("weight conservation across depths") {
    auto total = [](const LimitSetApprox& ap) {
      Kahan k;
      for (double w : ap.weights) k.add(w);
      return k.value();
    };
    const SystemSpec seg = builtin_system("segment2");
    for (int d = 0; d <= 12; ++d)
      CHECK(std::fabs(total(generate(seg, d)) - 1.0) <= 1e-10);
    const SystemSpec fc = builtin_system("four_corners");
    for (int d = 0; d <= 9; ++d)
      CHECK(std::fabs(total(generate(fc, d)) - 1.0) <= 1e-10);
    const SystemSpec tq = three_quarters();
    for (int d = 0; d <= 8; ++d)
      CHECK(std::fabs(total(generate(tq, d)) - 1.0) <= 1e-10);
    const SystemSpec dust = builtin_system("cantor_dust_unrect3d");
    for (int d = 0; d <= 5; ++d)
      CHECK(std::fabs(total(generate(dust, d)) - 1.0) <= 1e-10);
  }
  SECTION("resolution bound") {
    const SystemSpec fc = builtin_system("four_corners");
    for (int d : {1, 3, 6}) {
      const LimitSetApprox ap = generate(fc, d);
      CHECK(ap.resolution <=
            std::pow(fc.uniform_ratio_bound, d) * fc.seed_diameter() + 1e-15);
    }
  }
}

TEST_CASE("stopping families") {
  const SystemSpec fc = builtin_system("four_corners");
  const LimitSetApprox ap = generate(fc, 8);

  SECTION("corner ball at r = 0.3") {
    const StoppingFamily fam = stopping_family(fc, ap, Vec{0, 0}, 0.3, true);
    REQUIRE(fam.cardinality == 4);
    std::set<Word> got(fam.words.begin(), fam.words.end());
    std::set<Word> want = {Word{1, 1}, Word{1, 2}, Word{1, 3}, Word{1, 4}};
    CHECK(got == want);
    CHECK(fam.coverage_ok);
    // Diameter sandwich with C bounded below by the smallest ratio.
    for (double dia : fam.diameters) {
      CHECK(dia <= 0.3);
      CHECK(dia >= fc.min_ratio() * 0.3);
    }
  }
  SECTION("ball disjoint from the seed box") {
    const StoppingFamily fam = stopping_family(fc, ap, Vec{5, 5}, 0.1, true);
    CHECK(fam.cardinality == 0);
    CHECK(fam.coverage_ok);
  }
  SECTION("segment: boundary touch keeps the right-hand cylinder") {
    // The interval [1/2, 1] touches the closed ball B((0,0), 1/2) at its left
    // endpoint, so both depth-1 words pass the closed intersection test.
    const SystemSpec seg = builtin_system("segment2");
    const LimitSetApprox sap = generate(seg, 8);
    const StoppingFamily fam = stopping_family(seg, sap, Vec{0, 0}, 0.5, true);
    std::set<Word> got(fam.words.begin(), fam.words.end());
    std::set<Word> want = {Word{1}, Word{2}};
    CHECK(got == want);
  }
  SECTION("domain and refinement errors") {
    CHECK_THROWS_AS(stopping_family(fc, ap, Vec{0, 0}, 2.0), DomainError);
    const LimitSetApprox shallow = generate(fc, 2);
    try {
      stopping_family(fc, shallow, Vec{0, 0}, 0.001);
      FAIL("expected RefinementError");
    } catch (const RefinementError& e) {
      CHECK(e.required_depth == 6);
    }
  }
}

TEST_CASE("stopping family coverage property at depth 10") {
  const SystemSpec fc = builtin_system("four_corners");
  const LimitSetApprox ap = generate(fc, 10);
  Rng rng(2024);
  int verified = 0;
  for (int rep = 0; rep < 100; ++rep) {
    Vec x{rng.uniform(-0.3, 1.3), rng.uniform(-0.3, 1.3)};
    const double r = std::pow(2.0, rng.uniform(-9.0, 0.4));
    if (r > fc.seed_diameter()) continue;
    const StoppingFamily fam = stopping_family(fc, ap, x, r, true);
    CHECK(fam.coverage_ok);
    for (double dia : fam.diameters) {
      CHECK(dia <= r);
      CHECK(dia >= fc.min_ratio() * r - 1e-15);
    }
    ++verified;
  }
  CHECK(verified >= 90);
}

TEST_CASE("open set condition") {
  SECTION("four corners satisfies it") {
    const OscReport rep = check_osc(builtin_system("four_corners"));
    CHECK(rep.satisfied);
    CHECK_FALSE(rep.witness.has_value());
  }
  SECTION("overlapping halves are rejected with a witness") {
    auto half = [](double tx) {
      return SimilitudeMap::scaling(2, 0.5, Vec{tx, 0.0});
    };
    const SystemSpec bad = SystemSpec::make(
        2, {half(0.0), half(0.25)},
        Box::from_corner_sides(Vec{0, 0}, Vec{1, 1}), "overlap");
    const OscReport rep = check_osc(bad);
    REQUIRE_FALSE(rep.satisfied);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->first == 1);
    CHECK(rep.witness->second == 2);
  }
  SECTION("single-map systems never construct") {
    CHECK_THROWS_AS(
        SystemSpec::make(2, {SimilitudeMap::scaling(2, 0.5, Vec{0, 0})},
                         Box::from_corner_sides(Vec{0, 0}, Vec{1, 1})),
        UsageError);
  }
  SECTION("degenerate seed boxes use relative interiors") {
    CHECK(check_osc(builtin_system("segment2")).satisfied);
    CHECK(check_osc(builtin_system("sierpinski")).satisfied);
    CHECK(check_osc(builtin_system("cantor_dust_unrect3d")).satisfied);
  }
}

TEST_CASE("similarity dimension") {
  CHECK(similarity_dimension(builtin_system("four_corners")) ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(similarity_dimension(builtin_system("segment2")) ==
        Catch::Approx(1.0).margin(1e-12));
  CHECK(similarity_dimension(three_quarters()) ==
        Catch::Approx(std::log(3.0) / std::log(2.0)).margin(1e-12));
  CHECK(similarity_dimension(builtin_system("cantor_dust_unrect3d")) ==
        Catch::Approx(1.5).margin(1e-12));
  // Mixed ratios go through bisection.
  SimilitudeMap a = SimilitudeMap::scaling(2, 0.5, Vec{0, 0});
  SimilitudeMap b = SimilitudeMap::scaling(2, 0.25, Vec{0.75, 0.75});
  const SystemSpec mixed = SystemSpec::make(
      2, {a, b}, Box::from_corner_sides(Vec{0, 0}, Vec{1, 1}), "mixed");
  const double t = similarity_dimension(mixed);
  CHECK(std::fabs(std::pow(0.5, t) + std::pow(0.25, t) - 1.0) < 1e-11);
}

TEST_CASE("distortion and diameter comparability constants") {
  SECTION("similitudes have distortion exactly one") {
    const SystemSpec fc = builtin_system("four_corners");
    const LimitSetApprox ap = generate(fc, 7);
    const BdpReport rep = bdp_cifs1_constants(fc, ap);
    CHECK(rep.K_bdp == 1.0);
    CHECK(rep.D == Catch::Approx(std::sqrt(2.0)).epsilon(0.05));
  }
  SECTION("segment diameters match the derivative norm") {
    const SystemSpec seg = builtin_system("segment2");
    const LimitSetApprox ap = generate(seg, 9);
    const BdpReport rep = bdp_cifs1_constants(seg, ap);
    CHECK(rep.D == Catch::Approx(1.0).epsilon(0.05));
  }
}
