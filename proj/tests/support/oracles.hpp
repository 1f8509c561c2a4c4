#pragma once

// Independent reference computations for the tests. Nothing here calls the
// solver under test, only the network description and the species layout.

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcnet/netmodel.hpp"

namespace oracle {

using Complex = std::complex<double>;

/// Dense generator of the linear network in the ReactionNetwork species order,
/// assembled from the lattice geometry and receiver constants directly.
Eigen::MatrixXd denseGenerator(const mcnet::NetworkSpec& spec);

/// Receiver means on `times` from matrix exponentials between deterministic
/// arrivals.
std::vector<std::vector<double>> expmReceiverMeans(const mcnet::NetworkSpec& spec, std::span<const double> times);

/// Full-state mean and covariance at `t` from the Lyapunov integral, by
/// exponentiating the block matrix [[A, Q], [0, -A^T]] between arrivals.
struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
Moments expmMoments(const mcnet::NetworkSpec& spec, double t);

/// Binomial(n, p) probabilities. Molecules released together move independently,
/// so their bound count follows this law with p the one-molecule bound probability.
std::vector<double> binomialPmf(int n, double p);

/// exp(-sqrt(s/D) r) / (4 pi D r) written out again.
Complex phi(double r, Complex s, double diffusion);

/// Infinite-lattice Green's function at real s > 0 from its Bessel integral,
///   1/delta^3 int_0^inf e^{-s t} prod_a e^{-2dt} I_{n_a}(2dt) dt,  d = D / delta^2.
double latticeGreenBessel(mcnet::Voxel offset, double s, double diffusion, double delta);

/// Resolvent (s - L)^-1 e_source / delta^3 on a reflective box by sparse LU.
std::vector<Complex> boxResolvent(const mcnet::LatticeSpec& lattice, mcnet::Voxel source, Complex s);

struct LaplacePair {
  std::string name;
  std::function<Complex(Complex)> transform;
  std::function<double(double)> original;
};
std::vector<LaplacePair> laplacePairs();

/// Upper tail of the chi-square statistic of `observed` counts against
/// `probabilities`, pooling adjacent cells until each expects at least 5.
double chiSquarePValue(std::span<const double> observed, std::span<const double> probabilities);

}  // namespace oracle
