#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mcnet/invlaplace.hpp"
#include "mcnet/kernels.hpp"
#include "mcnet/netmodel.hpp"

namespace mcnet {

enum class KernelKind { continuum, lattice };
enum class Phi0Strategy { latticePsi0, cutoff };
// bounded: exact reflective-box resolvent on spec.lattice; free: infinite medium.
enum class KernelDomain { bounded, free };

struct KernelConfig {
  KernelKind kind = KernelKind::lattice;
  Phi0Strategy phi0 = Phi0Strategy::latticePsi0;
  int quadraturePoints = 256;
  KernelDomain domain = KernelDomain::bounded;
  DispersionForm form = DispersionForm::differenceEquation;
};

/// Throws InvalidArgument for a cutoff strategy on the lattice kernel or bad node counts.
void validate(const KernelConfig& config);

/// sum_b k_b exp(-s t_b) over the expanded schedule (mean counts for Poisson models).
Complex inputTransform(const EmissionSchedule& schedule, Complex s);

// Site-level frequency response at one s. Sites are receiver voxels in receiver
// order, sources are transmitter voxels in transmitter order; devices with one
// voxel make these the device-level matrices.
struct TransferEvaluation {
  Complex s;
  Eigen::MatrixXcd psi;   // sites x sources
  Eigen::MatrixXcd psi0;  // sites x sites
  Eigen::MatrixXcd rho;   // sites x sites, diagonal
  Eigen::VectorXcd k;     // per source voxel
  Eigen::VectorXcd c;     // per site
  Eigen::VectorXcd output;  // per receiver device (sum over its sites)
};

/// Precomputed geometry for repeated evaluation at many s.
class TransferModel {
 public:
  TransferModel(const NetworkSpec& spec, const KernelConfig& config);

  std::size_t siteCount() const { return sites_.size(); }
  std::size_t sourceCount() const { return sources_.size(); }
  std::size_t receiverCount() const { return receiverCount_; }

  /// Kernel matrices and rho at s (k and c left empty).
  TransferEvaluation kernels(Complex s) const;

  /// Device outputs per unit impulse at each source voxel: receivers x sources.
  Eigen::MatrixXcd deviceTransfer(Complex s, bool decoupled) const;

  /// Impulse trains per source voxel, with counts split by the remainder rule.
  std::vector<ImpulseTrain> sourceTrains() const;

  /// Largest relative change of the free lattice kernel under node doubling seen so far.
  double maxKernelChange() const { return *maxKernelChange_; }

 private:
  NetworkSpec spec_;
  KernelConfig config_;
  std::vector<Voxel> sites_;
  std::vector<std::size_t> siteReceiver_;
  std::vector<double> siteKPlus_;
  std::vector<double> siteKMinus_;
  std::vector<Voxel> sources_;
  std::vector<std::size_t> sourceTransmitter_;
  std::vector<std::size_t> sourceSlot_;
  std::size_t receiverCount_ = 0;
  std::unique_ptr<FreeLatticeKernel> free_;
  std::unique_ptr<BoxLatticeKernel> box_;
  std::shared_ptr<double> maxKernelChange_;
};

/// Solves (I + s Rho Psi0) C = Rho Psi K. Throws SingularSystem.
TransferEvaluation assembleTransfer(const NetworkSpec& spec, const KernelConfig& config, Complex s);

/// C = Rho Psi K, the absorption feedback dropped.
TransferEvaluation decoupledTransfer(const NetworkSpec& spec, const KernelConfig& config, Complex s);

struct TransferSeries {
  std::vector<double> grid;
  std::vector<std::vector<double>> mean;           // [receiver][time]
  std::vector<std::vector<double>> errorEstimate;  // [receiver][time]
  std::size_t transformEvaluations = 0;
  double maxKernelChange = 0.0;
};

/// Mean complex counts per receiver on `grid` by inverting the transfer applied to
/// the emission impulse trains. Grid times <= 0 carry no causal input and give 0.
TransferSeries receiverOutputTimeSeries(const NetworkSpec& spec, const KernelConfig& config,
                                        std::span<const double> grid, bool decoupled = false,
                                        const TalbotOptions& inversion = {.nodes = 32,
                                                                          .tolerance = 1e-4,
                                                                          .absoluteFloor = 0,
                                                                          .enforce = true,
                                                                          .checkConjugate = true});

}  // namespace mcnet
