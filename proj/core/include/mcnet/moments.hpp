#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "mcnet/netmodel.hpp"
#include "mcnet/reaction_network.hpp"

namespace mcnet {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// A with sum_j r_j W_j(q) = A q, over the species layout of ReactionNetwork.
/// Throws NonlinearKinetics when any receiver uses Michaelis-Menten kinetics.
SparseMatrix buildGenerator(const NetworkSpec& spec);
SparseMatrix buildGenerator(const ReactionNetwork& net);

struct MomentOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  std::size_t dimensionCap = 2000;
  std::size_t maxSteps = 50'000'000;
  bool keepStates = false;  // full mean vector per sample
};

struct ArrivalDiagnostic {
  double time = 0.0;
  // max |Sigma+ - Sigma-| where Sigma+ comes from the raw second moment
  // E[QQ^T] updated by the jump, relative to max |Sigma-| (only with covariance).
  double covarianceJump = 0.0;
  double addedVariance = 0.0;  // trace of cov(K) added by random counts
};

struct MomentSolution {
  std::vector<double> grid;
  std::vector<std::vector<double>> mean;    // [receiver][time]
  std::vector<std::vector<double>> stddev;  // [receiver][time], covariance solves only
  std::vector<Eigen::MatrixXd> receiverCovariance;  // [time], U x U
  std::vector<double> freeTotal;   // [time]
  std::vector<double> boundTotal;  // [time]
  std::vector<double> emitted;     // [time] cumulative mean emissions
  std::vector<Eigen::VectorXd> states;
  std::vector<ArrivalDiagnostic> arrivals;
  // smallest eigenvalue of the full covariance relative to its trace, over samples
  double minEigenRatio = 0.0;
  std::size_t steps = 0;
};

/// Mean dynamics d<Q>/dt = A<Q>, restarted at every arrival where <Q> jumps by the
/// (mean) emitted counts. Samples are right-continuous.
MomentSolution meanOde(const NetworkSpec& spec, std::span<const double> grid, const MomentOptions& options = {});

/// Mean and full-state covariance, dSigma/dt = A Sigma + Sigma A^T + sum_j r_j r_j^T W_j(<Q>).
/// Deterministic arrivals leave Sigma unchanged; Poisson counts add cov(K).
MomentSolution covarianceOde(const NetworkSpec& spec, std::span<const double> grid,
                             const MomentOptions& options = {});

/// Smallest eigenvalue of a symmetric matrix divided by its trace (0 for a zero matrix).
double psdRatio(const Eigen::MatrixXd& sigma);

}  // namespace mcnet
