#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mcnet/kernels.hpp"
#include "oracles.hpp"

using namespace mcnet;

TEST_SUITE("kernels") {
  TEST_CASE("continuum kernel") {
    const Complex s(2.0, 1.0);
    CHECK(std::abs(phiKernel({0.03, 0.0, 0.04}, s, 0.05) - oracle::phi(0.05, s, 0.05)) < 1e-12);
    CHECK_THROWS_AS(phiKernel({0.0, 0.0, 0.0}, s, 0.05), Error);
    CHECK(std::abs(rhoKernel(Complex(1.0, 0.0), 2.0, 3.0) - Complex(0.5, 0.0)) < 1e-15);
    CHECK_THROWS_AS(rhoKernel(Complex(-3.0, 0.0), 2.0, 3.0), Error);
  }

  TEST_CASE("dispersion roots are reciprocal") {
    for (const Complex b : {Complex(2.5, 0.0), Complex(6.0, 0.3), Complex(2.0001, 1e-3), Complex(-3.0, 2.0)}) {
      const auto r = dispersionRoots(b);
      CHECK(std::abs(r.inner) < 1.0);
      CHECK(std::abs(r.inner * r.outer - 1.0) < 1e-12);
      CHECK(std::abs(r.inner * r.inner - b * r.inner + 1.0) < 1e-12);
    }
    CHECK_THROWS_AS(dispersionRoots(Complex(2.0, 0.0)), Error);
    CHECK_THROWS_AS(dispersionRoots(Complex(0.5, 0.0)), Error);
  }

  TEST_CASE("printed and difference forms differ") {
    const Complex w = std::polar(1.0, 0.7);
    const Complex s(1.0, 0.0);
    const auto a = dispersionCoefficient(w, w, s, 1.0, 1.0, DispersionForm::differenceEquation);
    const auto b = dispersionCoefficient(w, w, s, 1.0, 1.0, DispersionForm::printed);
    CHECK(std::abs(a - b) > 1e-3);
  }

  TEST_CASE("lattice kernel solves the discrete resolvent equation") {
    // s psi(0) - d (sum of neighbours - 6 psi(0)) = 1 / delta^3, d = D / delta^2
    const double diffusion = 0.05;
    const double delta = 0.01;
    const double d = diffusion / (delta * delta);
    for (const Complex s : {Complex(0.5, 0.0), Complex(20.0, 0.0), Complex(3.0, 40.0)}) {
      FreeLatticeKernel k(diffusion, delta);
      const Voxel offs[] = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {1, 1, 0}};
      const auto v = k.evaluate(s, offs);
      const Complex lhs0 = s * v.values[0] - d * (6.0 * v.values[1] - 6.0 * v.values[0]);
      CHECK(std::abs(lhs0 * std::pow(delta, 3) - 1.0) < 1e-7);
      // At (1,0,0): neighbours are (0,0,0), (2,0,0) and four (1,1,0).
      const Complex lhs1 = s * v.values[1] - d * (v.values[0] + v.values[2] + 4.0 * v.values[3] - 6.0 * v.values[1]);
      CHECK(std::abs(lhs1) * std::pow(delta, 3) < 1e-7);
    }
  }

  TEST_CASE("lattice kernel matches its Bessel integral representation") {
    for (const double delta : {0.01, 0.0025}) {
      for (const double s : {1.0, 20.0, 400.0}) {
        const Voxel offs[] = {{0, 0, 0}, {1, 0, 0}, {3, 0, 0}, {2, 2, 1}, {8, 0, 0}, {5, 4, 3}};
        const auto v = FreeLatticeKernel(0.05, delta).evaluate(Complex(s, 0.0), offs);
        for (std::size_t m = 0; m < std::size(offs); ++m) {
          const double want = oracle::latticeGreenBessel(offs[m], s, 0.05, delta);
          CHECK(std::abs(v.values[m] - want) <= 1e-10 * want);
        }
      }
    }
  }

  TEST_CASE("lattice kernel is symmetric under axis permutations and sign") {
    const Complex s(4.0, 2.0);
    const auto a = psiKernel({3, 1, 0}, s, 0.05, 0.01);
    const auto b = psiKernel({0, -3, 1}, s, 0.05, 0.01);
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
  }

  TEST_CASE("quadrature is stable under node doubling in the right half plane") {
    for (const double delta : {0.01, 0.005, 0.0025}) {
      for (const Complex s : {Complex(0.05, 0.0), Complex(1.0, 0.0), Complex(50.0, 0.0), Complex(2.0, 80.0)}) {
        PsiOptions po;
        po.nodes = 256;
        po.strict = false;
        const auto m1 = psiKernel({3, 0, 0}, s, 0.05, delta, po);
        po.nodes = 512;
        const auto m2 = psiKernel({3, 0, 0}, s, 0.05, delta, po);
        CHECK(std::abs(m1 - m2) <= 1e-8 * std::abs(m2));
      }
    }
  }

  TEST_CASE("lattice kernel approaches the continuum kernel at fixed distance") {
    const double diffusion = 0.05;
    const Complex s(1.0, 0.0);
    double previous = 1.0;
    for (const int n : {1, 2, 4}) {
      const double delta = 0.01 / n;
      const auto psi = psiKernel({3 * n, 0, 0}, s, diffusion, delta);
      const auto ph = oracle::phi(0.03, s, diffusion);
      const double rel = std::abs(psi - ph) / std::abs(ph);
      CHECK(rel < 0.05);
      CHECK(rel < previous);
      previous = rel;
    }
  }

  TEST_CASE("box kernel matches a direct sparse solve") {
    const LatticeSpec lat{0.01, {7, 4, 3}, 0.05};
    const BoxLatticeKernel box(lat);
    for (const Complex s : {Complex(1.0, 0.0), Complex(-2.0, 30.0)}) {
      const Voxel src{1, 2, 0};
      const auto ref = oracle::boxResolvent(lat, src, s);
      for (const Voxel target : {Voxel{1, 2, 0}, Voxel{5, 0, 2}, Voxel{6, 3, 1}}) {
        const Complex got = box(target, src, s);
        const Complex want = ref[lat.index(target)];
        CHECK(std::abs(got - want) <= 1e-9 * std::abs(want));
      }
    }
  }
}
