#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcnet/moments.hpp"
#include "mcnet/xfer.hpp"
#include "oracles.hpp"

using namespace mcnet;

namespace {

NetworkSpec pair(double kPlus) {
  NetworkSpec spec;
  spec.lattice = {0.01, {9, 5, 5}, 0.05};
  spec.transmitters.push_back({{{2, 2, 2}}, {{{0.0, 40}, {0.3, 25}}, {}, CountModel::deterministic}});
  spec.receivers.push_back({{{5, 2, 2}}, kPlus, 0.5, LinearKinetics{}});
  spec.horizon = 1.0;
  return spec;
}

std::vector<double> grid(double stop, int n) {
  std::vector<double> g;
  for (int m = 0; m <= n; ++m) g.push_back(stop * m / n);
  return g;
}

double relRmse(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_SUITE("xfer") {
  TEST_CASE("input transform sums delayed counts") {
    EmissionSchedule sched{{{0.1, 3}, {0.4, 2}}, {}, CountModel::deterministic};
    const Complex s(2.0, 5.0);
    const Complex want = 3.0 * std::exp(-0.1 * s) + 2.0 * std::exp(-0.4 * s);
    CHECK(std::abs(inputTransform(sched, s) - want) < 1e-14);
  }

  TEST_CASE("kernel configuration checks") {
    KernelConfig bad;
    bad.kind = KernelKind::lattice;
    bad.phi0 = Phi0Strategy::cutoff;
    CHECK_THROWS_AS(validate(bad), Error);
    KernelConfig odd;
    odd.quadraturePoints = 15;
    CHECK_THROWS_AS(validate(odd), Error);
  }

  TEST_CASE("assembled system satisfies its defining equation") {
    const auto spec = pair(2e-3);
    for (const KernelConfig cfg : {KernelConfig{}, KernelConfig{KernelKind::continuum, Phi0Strategy::cutoff}}) {
      const Complex s(3.0, 7.0);
      const auto ev = assembleTransfer(spec, cfg, s);
      const Eigen::Index n = ev.c.size();
      const Eigen::VectorXcd lhs = (Eigen::MatrixXcd::Identity(n, n) + s * ev.rho * ev.psi0) * ev.c;
      const Eigen::VectorXcd rhs = ev.rho * ev.psi * ev.k;
      CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
      const auto dec = decoupledTransfer(spec, cfg, s);
      CHECK((dec.c - rhs).norm() <= 1e-12 * rhs.norm());
    }
  }

  TEST_CASE("continuum kernel uses the physical displacement") {
    const auto spec = pair(2e-3);
    KernelConfig cfg{KernelKind::continuum, Phi0Strategy::cutoff};
    const Complex s(1.0, 0.0);
    const auto ev = assembleTransfer(spec, cfg, s);
    CHECK(std::abs(ev.psi(0, 0) - oracle::phi(0.03, s, 0.05)) < 1e-12 * std::abs(ev.psi(0, 0)));
    CHECK(std::abs(ev.psi0(0, 0) - 1.0 / (2.0 * std::numbers::pi * 0.05 * 0.01)) < 1e-9);
    CHECK(std::abs(ev.rho(0, 0) - 2e-3 / (s + 0.5)) < 1e-15);
  }

  TEST_CASE("bounded lattice transfer reproduces the mean ODE") {
    const auto spec = pair(2e-3);
    const auto g = grid(1.0, 50);
    const auto ode = meanOde(spec, g);
    const auto tf = receiverOutputTimeSeries(spec, KernelConfig{}, g);
    CHECK(tf.mean[0][0] == 0.0);
    CHECK(relRmse(tf.mean[0], ode.mean[0]) < 1e-5);
  }

  TEST_CASE("two-receiver bounded transfer reproduces the mean ODE") {
    auto spec = pair(2e-3);
    spec.receivers.push_back({{{6, 2, 2}, {6, 3, 2}}, 1e-3, 1.5, LinearKinetics{}});
    spec.transmitters.push_back({{{1, 1, 1}, {1, 2, 1}}, {{{0.2, 15}}, {}, CountModel::deterministic}});
    const auto g = grid(1.0, 40);
    const auto ode = meanOde(spec, g);
    const auto tf = receiverOutputTimeSeries(spec, KernelConfig{}, g);
    for (std::size_t u = 0; u < 2; ++u) CHECK(relRmse(tf.mean[u], ode.mean[u]) < 1e-5);
  }

  TEST_CASE("dropping absorption feedback overestimates the output") {
    const auto spec = pair(5e-3);
    const auto g = grid(1.0, 20);
    const auto coupled = receiverOutputTimeSeries(spec, KernelConfig{}, g);
    const auto dec = receiverOutputTimeSeries(spec, KernelConfig{}, g, true);
    for (std::size_t t = 1; t < g.size(); ++t) CHECK(dec.mean[0][t] > coupled.mean[0][t]);
  }

  TEST_CASE("mean scales linearly with emitted counts") {
    auto spec = pair(2e-3);
    const auto g = grid(1.0, 10);
    const auto a = receiverOutputTimeSeries(spec, KernelConfig{}, g);
    for (auto& e : spec.transmitters[0].schedule.events) e.count *= 3;
    const auto b = receiverOutputTimeSeries(spec, KernelConfig{}, g);
    for (std::size_t t = 1; t < g.size(); ++t) CHECK(b.mean[0][t] == doctest::Approx(3.0 * a.mean[0][t]).epsilon(1e-9));
  }
}
