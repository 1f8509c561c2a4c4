#include "mcnet/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mcnet {

namespace {

constexpr double kPi = std::numbers::pi;

Complex ipow(Complex w, int n) {
  Complex result(1.0, 0.0);
  while (n > 0) {
    if (n & 1) result *= w;
    w *= w;
    n >>= 1;
  }
  return result;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Complex phiKernel(const std::array<double, 3>& v, Complex s, double diffusion) {
  const double r = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (!(r > 0.0)) throw Error(ErrorCode::ZeroDisplacement, "continuum kernel is undefined at zero displacement");
  Complex root = std::sqrt(s / diffusion);
  if (root.real() < 0.0) root = -root;
  return std::exp(-root * r) / (4.0 * kPi * diffusion * r);
}

Complex rhoKernel(Complex s, double kPlus, double kMinus) {
  const Complex den = s + kMinus;
  if (den == Complex(0.0, 0.0)) throw Error(ErrorCode::PoleHit, "s = -k- is a pole of the receiver kinetics");
  return kPlus / den;
}

Complex dispersionCoefficient(Complex wx, Complex wy, Complex s, double diffusion, double delta, DispersionForm form) {
  const Complex eps = s * (delta * delta / diffusion);
  if (form == DispersionForm::printed) {
    const Complex dx = wx - 1.0 / wx;
    const Complex dy = wy - 1.0 / wy;
    return 2.0 + dx * dx + dy * dy + eps;
  }
  return 2.0 - (wx + 1.0 / wx - 2.0) - (wy + 1.0 / wy - 2.0) + eps;
}

DispersionRoots dispersionRoots(Complex b) {
  const Complex disc = std::sqrt(b * b - 4.0);
  const Complex plus = 0.5 * (b + disc);
  const Complex minus = 0.5 * (b - disc);
  const Complex outer = std::abs(plus) >= std::abs(minus) ? plus : minus;
  if (!(std::abs(outer) > 1.0 + 1e-12) || !finite(outer)) {
    std::ostringstream msg;
    msg << "dispersion roots on the unit circle (b = " << b << ")";
    throw Error(ErrorCode::DegenerateRoots, msg.str());
  }
  return {1.0 / outer, outer};
}

Complex latticeDispersionRoot(Complex wx, Complex wy, Complex s, double diffusion, double delta, DispersionForm form) {
  return dispersionRoots(dispersionCoefficient(wx, wy, s, diffusion, delta, form)).inner;
}

FreeLatticeKernel::FreeLatticeKernel(double diffusion, double delta, PsiOptions options)
    : diffusion_(diffusion), delta_(delta), options_(options) {
  if (!(diffusion > 0.0) || !(delta > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "D and delta must be > 0");
  if (options_.nodes < 16 || options_.nodes % 2) throw Error(ErrorCode::InvalidArgument, "quadrature nodes must be even and >= 16");
}

PsiValues FreeLatticeKernel::evaluate(Complex s, std::span<const Voxel> offsets) const {
  const Complex eps = s * (delta_ * delta_ / diffusion_);
  // Stretch strength follows the width sqrt(eps) of the sharp region near theta = 0.
  const double c = std::clamp(3.0 * std::abs(std::sqrt(eps)), 0.03, 1.0);
  const double a = 1.0 - c;

  const int fine = 2 * options_.nodes;
  const int half = fine / 2;  // u in [0, pi]; the integrand is even in each variable
  std::vector<double> theta(half + 1), jac(half + 1), wFine(half + 1), wCoarse(half + 1);
  for (int m = 0; m <= half; ++m) {
    const double u = 2.0 * kPi * m / fine;
    theta[m] = u - a * std::sin(u);
    jac[m] = 1.0 - a * std::cos(u);
    wFine[m] = (m == 0 || m == half) ? 1.0 : 2.0;
    wCoarse[m] = (m % 2) ? 0.0 : ((m == 0 || m == half) ? 1.0 : 2.0);
  }

  // Put the largest |component| on the W^|k| axis; the integral is symmetric.
  struct Job {
    int i, j, k;
  };
  std::vector<Job> jobs;
  for (const auto& v : offsets) {
    std::array<int, 3> c3{std::abs(v.i), std::abs(v.j), std::abs(v.k)};
    std::sort(c3.begin(), c3.end());
    jobs.push_back({c3[0], c3[1], c3[2]});
  }
  const std::size_t nj = jobs.size();
  std::vector<double> cosI(nj * (half + 1)), cosJ(nj * (half + 1));
  for (std::size_t q = 0; q < nj; ++q) {
    for (int m = 0; m <= half; ++m) {
      cosI[q * (half + 1) + m] = std::cos(jobs[q].i * theta[m]);
      cosJ[q * (half + 1) + m] = std::cos(jobs[q].j * theta[m]);
    }
  }

  std::vector<Complex> sumFine(nj), sumCoarse(nj);
  const Complex unit(1.0, 0.0);
  for (int mx = 0; mx <= half; ++mx) {
    const Complex wx = std::polar(1.0, theta[mx]);
    for (int my = 0; my <= half; ++my) {
      const Complex wy = std::polar(1.0, theta[my]);
      const Complex w = dispersionRoots(dispersionCoefficient(wx, wy, s, diffusion_, delta_, options_.form)).inner;
      const Complex base = w / (unit - w * w) * (jac[mx] * jac[my]);
      const double ff = wFine[mx] * wFine[my];
      const double fc = wCoarse[mx] * wCoarse[my];
      for (std::size_t q = 0; q < nj; ++q) {
        const Complex term = base * ipow(w, jobs[q].k) * (cosI[q * (half + 1) + mx] * cosJ[q * (half + 1) + my]);
        sumFine[q] += ff * term;
        if (fc != 0.0) sumCoarse[q] += fc * term;
      }
    }
  }

  PsiValues out;
  out.values.resize(nj);
  const double pre = 1.0 / (diffusion_ * delta_);
  const double nFine = static_cast<double>(fine) * fine;
  const double nCoarse = static_cast<double>(options_.nodes) * options_.nodes;
  for (std::size_t q = 0; q < nj; ++q) {
    const Complex vf = pre * sumFine[q] / nFine;
    const Complex vc = pre * sumCoarse[q] / nCoarse;
    if (!finite(vc) || !finite(vf)) throw Error(ErrorCode::QuadratureNotConverged, "non-finite lattice kernel");
    out.values[q] = vc;
    const double scale = std::abs(vf);
    const double change = scale > 0.0 ? std::abs(vf - vc) / scale : std::abs(vf - vc);
    out.relativeChange = std::max(out.relativeChange, change);
  }
  if (options_.strict && out.relativeChange > options_.tolerance) {
    std::ostringstream msg;
    msg << "lattice kernel changed by " << out.relativeChange << " under node doubling at s = " << s;
    throw Error(ErrorCode::QuadratureNotConverged, msg.str());
  }
  return out;
}

Complex FreeLatticeKernel::operator()(Voxel offset, Complex s) const {
  const Voxel one[] = {offset};
  return evaluate(s, one).values[0];
}

Complex psiKernel(Voxel offset, Complex s, double diffusion, double delta, const PsiOptions& options) {
  return FreeLatticeKernel(diffusion, delta, options)(offset, s);
}

BoxLatticeKernel::BoxLatticeKernel(const LatticeSpec& lattice) : lattice_(lattice), axes_{0, 1, 2} {
  std::stable_sort(axes_.begin(), axes_.end(), [&](int p, int q) { return lattice.extent[p] < lattice.extent[q]; });
}

std::vector<Complex> BoxLatticeKernel::evaluate(Complex s, std::span<const std::pair<Voxel, Voxel>> pairs) const {
  const int nx = lattice_.extent[axes_[0]];
  const int ny = lattice_.extent[axes_[1]];
  const int nz = lattice_.extent[axes_[2]];
  auto coord = [](Voxel v, int axis) { return axis == 0 ? v.i : (axis == 1 ? v.j : v.k); };

  const std::size_t np = pairs.size();
  // Mode products along the two transverse axes, per pair.
  std::vector<double> modeX(np * nx), modeY(np * ny);
  std::vector<int> kt(np), ks(np);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& [t, src] = pairs[p];
    if (!lattice_.contains(t) || !lattice_.contains(src)) throw Error(ErrorCode::IndexOutOfLattice, "kernel voxel outside lattice");
    for (int m = 0; m < nx; ++m) {
      const double th = kPi * m / nx;
      modeX[p * nx + m] = (m ? 2.0 : 1.0) / nx * std::cos(th * (coord(t, axes_[0]) + 0.5)) * std::cos(th * (coord(src, axes_[0]) + 0.5));
    }
    for (int m = 0; m < ny; ++m) {
      const double th = kPi * m / ny;
      modeY[p * ny + m] = (m ? 2.0 : 1.0) / ny * std::cos(th * (coord(t, axes_[1]) + 0.5)) * std::cos(th * (coord(src, axes_[1]) + 0.5));
    }
    kt[p] = coord(t, axes_[2]);
    ks[p] = coord(src, axes_[2]);
  }

  const Complex eps = s * (lattice_.delta * lattice_.delta / lattice_.diffusion);
  const Complex unit(1.0, 0.0);
  std::vector<Complex> sum(np);
  for (int mx = 0; mx < nx; ++mx) {
    const double lx = 2.0 * (1.0 - std::cos(kPi * mx / nx));
    for (int my = 0; my < ny; ++my) {
      const double ly = 2.0 * (1.0 - std::cos(kPi * my / ny));
      const Complex w = dispersionRoots(2.0 + lx + ly + eps).inner;
      const Complex w2n = ipow(w, 2 * nz);
      const Complex scale = w / (unit - w * w) / (unit - w2n);
      for (std::size_t p = 0; p < np; ++p) {
        const int d1 = std::abs(kt[p] - ks[p]);
        const int d2 = kt[p] + ks[p] + 1;
        const Complex images = ipow(w, d1) + ipow(w, 2 * nz - d1) + ipow(w, d2) + ipow(w, 2 * nz - d2);
        sum[p] += modeX[p * nx + mx] * modeY[p * ny + my] * images * scale;
      }
    }
  }
  const double pre = 1.0 / (lattice_.diffusion * lattice_.delta);
  for (auto& v : sum) {
    v *= pre;
    if (!finite(v)) throw Error(ErrorCode::SingularSystem, "non-finite box kernel");
  }
  return sum;
}

Complex BoxLatticeKernel::operator()(Voxel target, Voxel source, Complex s) const {
  const std::pair<Voxel, Voxel> one[] = {{target, source}};
  return evaluate(s, one)[0];
}

}  // namespace mcnet
