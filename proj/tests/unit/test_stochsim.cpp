#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mcnet/reaction_network.hpp"
#include "mcnet/stochsim.hpp"
#include "oracles.hpp"

using namespace mcnet;

namespace {

NetworkSpec line(int length, long molecules, double kPlus, double kMinus) {
  NetworkSpec spec;
  spec.lattice = {1.0, {length, 1, 1}, 0.5};
  spec.transmitters.push_back({{{0, 0, 0}}, {{{0.0, molecules}}, {}, CountModel::deterministic}});
  spec.receivers.push_back({{{length - 1, 0, 0}}, kPlus, kMinus, LinearKinetics{}});
  spec.horizon = 2.0;
  return spec;
}

std::vector<double> grid(double stop, int n) {
  std::vector<double> g;
  for (int m = 0; m <= n; ++m) g.push_back(stop * m / n);
  return g;
}

}  // namespace

TEST_SUITE("stochsim") {
  TEST_CASE("channel catalogue") {
    NetworkSpec two;
    two.lattice = {1.0, {2, 1, 1}, 1.0};
    two.horizon = 1.0;
    CHECK(buildChannels(two).size() == 2);

    auto spec = line(3, 5, 1.0, 0.5);
    // 2 edges x 2 directions + bind + unbind
    CHECK(buildChannels(spec).size() == 6);

    spec.receivers[0].kinetics = MichaelisMenten{1.0, 0.5, 2.0, 0.5, 3};
    CHECK(buildChannels(spec).size() == 4 + 4);
  }

  TEST_CASE("empty schedules give an all-zero trajectory") {
    auto spec = line(3, 5, 1.0, 0.5);
    spec.transmitters[0].schedule.events.clear();
    const auto g = grid(1.0, 10);
    const auto tau = simulateTau(spec, {}, 3, g);
    const auto ssa = simulateSSA(spec, 3, g);
    for (std::size_t t = 0; t < g.size(); ++t) {
      CHECK(tau.outputs[t][0] == 0);
      CHECK(ssa.outputs[t][0] == 0);
      CHECK(tau.freeTotal[t] == 0);
    }
  }

  TEST_CASE("without binding the free count is conserved") {
    auto spec = line(4, 10, 0.0, 0.5);
    const auto g = grid(2.0, 20);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto tr = simulateTau(spec, {1e-3, 20, false}, seed, g);
      for (std::size_t t = 0; t < g.size(); ++t) {
        CHECK(tr.outputs[t][0] == 0);
        CHECK(tr.freeTotal[t] == 10);
      }
    }
  }

  TEST_CASE("trajectories are reproducible and conserve molecules") {
    auto spec = line(4, 30, 2.0, 1.0);
    spec.transmitters[0].schedule.trains.push_back({0.5, 0.01, 3, 0.2});
    const auto g = grid(2.0, 40);
    const auto a = simulateTau(spec, {0.01, 20, true}, 11, g);
    const auto b = simulateTau(spec, {0.01, 20, true}, 11, g);
    CHECK(a.states == b.states);
    const auto c = simulateSSA(spec, 11, g, {true});
    const auto d = simulateSSA(spec, 11, g, {true});
    CHECK(c.states == d.states);
    for (const auto* tr : {&a, &c}) {
      for (std::size_t t = 0; t < g.size(); ++t) {
        CHECK(tr->freeTotal[t] + tr->boundTotal[t] == tr->emitted[t]);
        for (auto v : tr->states[t]) CHECK(v >= 0);
      }
    }
  }

  TEST_CASE("Michaelis-Menten enzymes are conserved") {
    auto spec = line(3, 40, 0.0, 0.0);
    spec.receivers[0].kinetics = MichaelisMenten{5.0, 1.0, 20.0, 0.5, 4};
    const auto net = buildNetwork(spec);
    const auto& site = net.sites[0];
    const auto g = grid(2.0, 40);
    const auto tau = simulateTau(spec, {0.005, 20, true}, 5, g);
    const auto ssa = simulateSSA(spec, 5, g, {true});
    for (const auto* tr : {&tau, &ssa}) {
      for (std::size_t t = 0; t < g.size(); ++t) {
        CHECK(tr->states[t][site.enzymeSpecies] + tr->states[t][site.intermediateSpecies] == 4);
        CHECK(tr->freeTotal[t] + tr->boundTotal[t] == tr->emitted[t]);
      }
    }
  }

  TEST_CASE("arrivals jump the transmitter voxel by exactly the emitted count") {
    auto spec = line(3, 7, 1.0, 1.0);
    spec.transmitters[0].schedule.events = {{0.5, 7}};
    const std::vector<double> g = {0.5};
    const auto tr = simulateSSA(spec, 2, g, {true});
    CHECK(tr.states[0][0] == 7);
    CHECK(tr.emitted[0] == 7);
  }

  TEST_CASE("two voxels, one molecule: occupancy tends to one half") {
    NetworkSpec spec;
    spec.lattice = {1.0, {2, 1, 1}, 1.0};
    spec.transmitters.push_back({{{0, 0, 0}}, {{{0.0, 1}}, {}, CountModel::deterministic}});
    spec.horizon = 400.0;
    std::vector<double> g;
    for (int m = 1; m <= 4000; ++m) g.push_back(0.1 * m);
    const auto tr = simulateSSA(spec, 99, g, {true});
    double left = 0.0;
    for (const auto& s : tr.states) left += static_cast<double>(s[0]);
    const double fraction = left / static_cast<double>(g.size());
    // Samples 0.1 apart are correlated over 1/(2 rate) = 0.5; effective n ~ 800.
    CHECK(std::abs(fraction - 0.5) < 4.0 * std::sqrt(0.25 / 800.0));
  }

  TEST_CASE("binding law of a single release matches the binomial oracle") {
    NetworkSpec spec;
    spec.lattice = {1.0, {2, 1, 1}, 1.0};
    spec.transmitters.push_back({{{0, 0, 0}}, {{{0.0, 1}}, {}, CountModel::deterministic}});
    spec.receivers.push_back({{{1, 0, 0}}, 1.5, 0.7, LinearKinetics{}});
    spec.horizon = 1.0;
    const std::vector<double> g = {0.8};
    const double p = oracle::expmReceiverMeans(spec, g)[0][0];
    spec.transmitters[0].schedule.events[0].count = 6;
    EnsembleOptions eo;
    eo.method = SimMethod::ssa;
    eo.replicates = 4000;
    eo.keepTrajectories = true;
    const auto stats = ensemble(spec, eo, 17, g);
    std::vector<double> counts(7, 0.0);
    for (const auto& tr : stats.trajectories) counts[static_cast<std::size_t>(tr.outputs[0][0])] += 1.0;
    const auto pmf = oracle::binomialPmf(6, p);
    CHECK(oracle::chiSquarePValue(counts, pmf) > 0.01);
  }

  TEST_CASE("tau-leap and SSA ensemble means agree on a tiny net") {
    auto spec = line(3, 20, 1.0, 0.5);
    const auto g = grid(2.0, 10);
    EnsembleOptions eo;
    eo.replicates = 1500;
    eo.tau.tau = 0.01;
    const auto tau = ensemble(spec, eo, 5, g);
    eo.method = SimMethod::ssa;
    const auto ssa = ensemble(spec, eo, 6, g);
    const auto exact = oracle::expmReceiverMeans(spec, g);
    for (std::size_t t = 1; t < g.size(); ++t) {
      const double joint = std::hypot(tau.standardError(0, t), ssa.standardError(0, t));
      CHECK(std::abs(tau.mean[0][t] - ssa.mean[0][t]) < 4.0 * joint);
      CHECK(std::abs(ssa.mean[0][t] - exact[0][t]) < 4.0 * ssa.standardError(0, t));
    }
  }

  TEST_CASE("ensemble statistics") {
    auto spec = line(3, 20, 1.0, 0.5);
    spec.transmitters[0].schedule.events.clear();
    const auto g = grid(1.0, 5);
    EnsembleOptions eo;
    eo.replicates = 4;
    const auto zero = ensemble(spec, eo, 1, g);
    for (std::size_t t = 0; t < g.size(); ++t) {
      CHECK(zero.mean[0][t] == 0.0);
      CHECK(zero.stddev[0][t] == 0.0);
    }

    // Reduction order is fixed, so the thread count does not matter.
    auto busy = line(3, 20, 1.0, 0.5);
    eo.replicates = 16;
    eo.threads = 1;
    const auto one = ensemble(busy, eo, 9, g);
    eo.threads = 4;
    const auto four = ensemble(busy, eo, 9, g);
    CHECK(one.mean == four.mean);
    CHECK(one.stddev == four.stddev);
    CHECK(replicateSeed(9, 0) != replicateSeed(9, 1));
  }

  TEST_CASE("standard error shrinks like one over root n") {
    auto spec = line(3, 20, 1.0, 0.5);
    const std::vector<double> g = {1.0};
    EnsembleOptions eo;
    eo.replicates = 400;
    const auto small = ensemble(spec, eo, 21, g);
    eo.replicates = 1600;
    const auto large = ensemble(spec, eo, 22, g);
    const double ratio = small.standardError(0, 0) / large.standardError(0, 0);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
  }

  TEST_CASE("poisson counts are drawn once per event") {
    auto spec = line(2, 50, 0.0, 0.0);
    spec.transmitters[0].schedule.countModel = CountModel::poisson;
    const std::vector<double> g = {0.0};
    EnsembleOptions eo;
    eo.replicates = 2000;
    eo.keepTrajectories = true;
    const auto stats = ensemble(spec, eo, 31, g);
    double sum = 0.0;
    double sq = 0.0;
    for (const auto& tr : stats.trajectories) {
      sum += static_cast<double>(tr.emitted[0]);
      sq += static_cast<double>(tr.emitted[0] * tr.emitted[0]);
    }
    const double mean = sum / 2000.0;
    const double var = sq / 2000.0 - mean * mean;
    CHECK(std::abs(mean - 50.0) < 4.0 * std::sqrt(50.0 / 2000.0));
    CHECK(var == doctest::Approx(50.0).epsilon(0.15));
  }
}
