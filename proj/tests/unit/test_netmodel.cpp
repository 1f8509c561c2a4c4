#include <doctest.h>

#include <random>

#include "mcnet/netmodel.hpp"

using namespace mcnet;

namespace {

NetworkSpec oneToOne() {
  NetworkSpec spec;
  spec.lattice = {0.01, {6, 3, 3}, 0.05};
  spec.transmitters.push_back({{{1, 1, 1}}, {{{0.0, 10}}, {}, CountModel::deterministic}});
  spec.receivers.push_back({{{4, 1, 1}}, 2.5e-3, 0.05, LinearKinetics{}});
  spec.horizon = 1.0;
  return spec;
}

bool hasCode(const std::vector<Violation>& vs, ErrorCode code) {
  for (const auto& v : vs)
    if (v.code == code) return true;
  return false;
}

}  // namespace

TEST_SUITE("netmodel") {
  TEST_CASE("lattice indexing round trips") {
    LatticeSpec lat{1.0, {4, 5, 6}, 1.0};
    CHECK(lat.voxelCount() == 120);
    for (std::size_t n = 0; n < lat.voxelCount(); ++n) CHECK(lat.index(lat.voxel(n)) == n);
    CHECK(lat.index({0, 0, 1}) == 1);
    CHECK(lat.contains({3, 4, 5}));
    CHECK_FALSE(lat.contains({4, 0, 0}));
    CHECK_FALSE(lat.contains({0, -1, 0}));
  }

  TEST_CASE("jump rate is D over delta squared") { CHECK(jumpRate({0.01, {1, 1, 1}, 0.05}) == doctest::Approx(500.0)); }

  TEST_CASE("neighbours respect reflective faces") {
    LatticeSpec lat{1.0, {3, 3, 3}, 1.0};
    CHECK(neighbors({1, 1, 1}, lat).size() == 6);
    CHECK(neighbors({0, 0, 0}, lat).size() == 3);
    CHECK(neighbors({0, 1, 1}, lat).size() == 5);
    CHECK_THROWS_AS(neighbors({3, 0, 0}, lat), Error);
  }

  TEST_CASE("burst trains expand to events strictly before start + duration") {
    EmissionSchedule s;
    s.trains.push_back({0.0, 1e-4, 10, 0.2});
    const auto ev = expandSchedule(s);
    REQUIRE(ev.size() == 2000);
    CHECK(ev.front().time == 0.0);
    CHECK(ev.back().time < 0.2);
    CHECK(ev[1].count == 10);
  }

  TEST_CASE("coincident events are rejected") {
    EmissionSchedule s;
    s.events = {{0.5, 1}, {0.5, 2}};
    CHECK_THROWS_AS(expandSchedule(s), Error);
  }

  TEST_CASE("valid spec passes, invariants are all reported") {
    CHECK(violations(oneToOne()).empty());
    auto bad = oneToOne();
    bad.receivers[0].voxels = {{1, 1, 1}};  // on the transmitter
    bad.receivers[0].kPlus = -1.0;
    bad.transmitters[0].schedule.events = {{2.0, 5}};
    const auto vs = violations(bad);
    CHECK(hasCode(vs, ErrorCode::OverlappingVoxels));
    CHECK(hasCode(vs, ErrorCode::NonPositiveParameter));
    CHECK(hasCode(vs, ErrorCode::EventBeyondHorizon));
    try {
      validate(bad);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.violations().size() >= 3);
    }

    auto outside = oneToOne();
    outside.receivers[0].voxels = {{6, 1, 1}};
    CHECK(hasCode(violations(outside), ErrorCode::IndexOutOfLattice));
    auto empty = oneToOne();
    empty.transmitters[0].voxels.clear();
    CHECK(hasCode(violations(empty), ErrorCode::EmptyDevice));
  }

  TEST_CASE("uniform split gives the remainder to the smallest voxels") {
    const std::vector<Voxel> vox = {{1, 0, 0}, {0, 0, 0}, {0, 1, 0}};
    const auto split = splitUniform(11, vox);
    CHECK(split == std::vector<long>{3, 4, 4});
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      const long count = std::uniform_int_distribution<long>(0, 1000)(rng);
      const auto s = splitUniform(count, vox);
      long sum = 0;
      for (auto v : s) sum += v;
      CHECK(sum == count);
      CHECK(*std::max_element(s.begin(), s.end()) - *std::min_element(s.begin(), s.end()) <= 1);
    }
  }

  TEST_CASE("arrival timeline merges transmitters in time order") {
    auto spec = oneToOne();
    spec.transmitters[0].schedule.events = {{0.0, 1}, {0.6, 2}};
    spec.transmitters.push_back({{{0, 0, 0}}, {{{0.6, 3}, {0.3, 4}}, {}, CountModel::deterministic}});
    const auto tl = arrivalTimeline(spec);
    REQUIRE(tl.size() == 4);
    CHECK(tl[1].time == 0.3);
    CHECK(tl[2].transmitter == 0);
    CHECK(tl[3].transmitter == 1);
  }

  TEST_CASE("clearance rule translates devices and sizes the box") {
    NetworkSpec spec = oneToOne();
    spec.transmitters[0].voxels = {{0, 0, 0}};
    spec.receivers[0].voxels = {{3, 0, 0}};
    const auto boxed = withClearance(spec, 8);
    CHECK(boxed.lattice.extent == std::array<int, 3>{20, 17, 17});
    CHECK(boxed.transmitters[0].voxels[0] == Voxel{8, 8, 8});
    CHECK(boxed.receivers[0].voxels[0] == Voxel{11, 8, 8});
    CHECK(violations(boxed).empty());
  }

  TEST_CASE("outer shell fraction") {
    LatticeSpec lat{1.0, {3, 3, 3}, 1.0};
    std::vector<double> counts(27, 0.0);
    counts[lat.index({1, 1, 1})] = 3.0;
    CHECK(outerShellFraction(lat, counts) == 0.0);
    counts[lat.index({0, 1, 1})] = 1.0;
    CHECK(outerShellFraction(lat, counts) == doctest::Approx(0.25));
  }
}
