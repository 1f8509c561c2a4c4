#pragma once

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "mcnet/netmodel.hpp"

namespace mcnet {

using Complex = std::complex<double>;

/// Free-space continuum kernel exp(-sqrt(s/D)|v|) / (4 pi D |v|). Throws ZeroDisplacement.
Complex phiKernel(const std::array<double, 3>& displacement, Complex s, double diffusion);

/// Receiver kinetics k+ / (s + k-). Throws PoleHit at s = -k-.
Complex rhoKernel(Complex s, double kPlus, double kMinus);

enum class DispersionForm {
  differenceEquation,  // per-axis (W + 1/W - 2), from the lattice Laplacian
  printed,             // per-axis (W - 1/W)^2 as typeset in the source derivation
};

struct DispersionRoots {
  Complex inner;  // |inner| < 1
  Complex outer;  // 1 / inner
};

/// Coefficient b of W^2 - b W + 1 = 0 at the node (Wx, Wy).
Complex dispersionCoefficient(Complex wx, Complex wy, Complex s, double diffusion, double delta,
                              DispersionForm form = DispersionForm::differenceEquation);

/// Both roots of the per-node quadratic; the outer root is found first so the
/// inner one never suffers cancellation. Throws DegenerateRoots when |roots| ~ 1.
DispersionRoots dispersionRoots(Complex b);

/// The root with modulus below one.
Complex latticeDispersionRoot(Complex wx, Complex wy, Complex s, double diffusion, double delta,
                              DispersionForm form = DispersionForm::differenceEquation);

struct PsiOptions {
  int nodes = 256;  // quadrature nodes per axis (even, >= 16)
  DispersionForm form = DispersionForm::differenceEquation;
  double tolerance = 1e-8;  // relative change allowed under node doubling
  bool strict = true;       // throw QuadratureNotConverged instead of reporting
};

struct PsiValues {
  std::vector<Complex> values;  // aligned with the requested offsets
  double relativeChange = 0.0;  // max over offsets of |psi_M - psi_2M| / |psi_2M|
};

/// Infinite-medium lattice Green's function in concentration units.
///   psi(xi, s) = 1/(D delta) (2 pi)^-2 int int cos(i tx) cos(j ty) W*^{|k|+1} / (1 - W*^2) dtx dty
/// Trapezoidal rule in a periodic stretched variable t = u - a sin u that
/// concentrates nodes where the integrand is sharp (small |s| delta^2 / D).
class FreeLatticeKernel {
 public:
  FreeLatticeKernel(double diffusion, double delta, PsiOptions options = {});

  PsiValues evaluate(Complex s, std::span<const Voxel> offsets) const;
  Complex operator()(Voxel offset, Complex s) const;

  double diffusion() const { return diffusion_; }
  double delta() const { return delta_; }
  const PsiOptions& options() const { return options_; }

 private:
  double diffusion_;
  double delta_;
  PsiOptions options_;
};

/// Convenience wrapper over FreeLatticeKernel for one offset.
Complex psiKernel(Voxel offset, Complex s, double diffusion, double delta, const PsiOptions& options = {});

/// Exact resolvent of the lattice diffusion operator on a finite reflective box,
/// in the same units as psi: cosine modes on the two shorter axes and closed-form
/// image sums along the longest one.
class BoxLatticeKernel {
 public:
  explicit BoxLatticeKernel(const LatticeSpec& lattice);

  /// Kernel between voxel pairs (target, source) at one s.
  std::vector<Complex> evaluate(Complex s, std::span<const std::pair<Voxel, Voxel>> pairs) const;
  Complex operator()(Voxel target, Voxel source, Complex s) const;

 private:
  LatticeSpec lattice_;
  std::array<int, 3> axes_;  // permutation placing the longest axis last
};

}  // namespace mcnet
