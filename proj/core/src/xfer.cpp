#include "mcnet/xfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <Eigen/LU>

namespace mcnet {

namespace {

std::array<int, 3> canonical(Voxel v) {
  std::array<int, 3> c{std::abs(v.i), std::abs(v.j), std::abs(v.k)};
  std::sort(c.begin(), c.end());
  return c;
}

}  // namespace

void validate(const KernelConfig& config) {
  if (config.kind == KernelKind::lattice && config.phi0 == Phi0Strategy::cutoff) {
    throw Error(ErrorCode::InvalidArgument, "the cutoff self-kernel applies to the continuum kernel only");
  }
  if (config.quadraturePoints < 16 || config.quadraturePoints % 2) {
    throw Error(ErrorCode::InvalidArgument, "quadrature points must be even and >= 16");
  }
}

Complex inputTransform(const EmissionSchedule& schedule, Complex s) {
  Complex sum(0.0, 0.0);
  for (const auto& e : expandSchedule(schedule)) sum += static_cast<double>(e.count) * std::exp(-s * e.time);
  return sum;
}

TransferModel::TransferModel(const NetworkSpec& spec, const KernelConfig& config)
    : spec_(spec), config_(config), maxKernelChange_(std::make_shared<double>(0.0)) {
  validate(spec_);
  validate(config_);
  if (!spec_.isLinear()) throw Error(ErrorCode::NonlinearKinetics, "transfer functions need linear receiver kinetics");
  receiverCount_ = spec_.receivers.size();
  for (std::size_t u = 0; u < spec_.receivers.size(); ++u) {
    const auto& rx = spec_.receivers[u];
    for (const auto& v : rx.voxels) {
      sites_.push_back(v);
      siteReceiver_.push_back(u);
      siteKPlus_.push_back(rx.kPlus / static_cast<double>(rx.voxels.size()));
      siteKMinus_.push_back(rx.kMinus);
    }
  }
  for (std::size_t a = 0; a < spec_.transmitters.size(); ++a) {
    const auto& tx = spec_.transmitters[a];
    for (std::size_t m = 0; m < tx.voxels.size(); ++m) {
      sources_.push_back(tx.voxels[m]);
      sourceTransmitter_.push_back(a);
      sourceSlot_.push_back(m);
    }
  }
  PsiOptions po;
  po.nodes = config_.quadraturePoints;
  po.form = config_.form;
  po.strict = false;
  const bool needFree = config_.kind == KernelKind::continuum ? config_.phi0 == Phi0Strategy::latticePsi0
                                                             : config_.domain == KernelDomain::free;
  if (needFree) free_ = std::make_unique<FreeLatticeKernel>(spec_.lattice.diffusion, spec_.lattice.delta, po);
  if (config_.kind == KernelKind::lattice && config_.domain == KernelDomain::bounded) {
    box_ = std::make_unique<BoxLatticeKernel>(spec_.lattice);
  }
}

TransferEvaluation TransferModel::kernels(Complex s) const {
  const auto nr = static_cast<Eigen::Index>(sites_.size());
  const auto ns = static_cast<Eigen::Index>(sources_.size());
  TransferEvaluation ev;
  ev.s = s;
  ev.psi.resize(nr, ns);
  ev.psi0.resize(nr, nr);
  ev.rho = Eigen::MatrixXcd::Zero(nr, nr);
  for (Eigen::Index r = 0; r < nr; ++r) ev.rho(r, r) = rhoKernel(s, siteKPlus_[static_cast<std::size_t>(r)], siteKMinus_[static_cast<std::size_t>(r)]);

  const double delta = spec_.lattice.delta;
  const double diffusion = spec_.lattice.diffusion;

  if (config_.kind == KernelKind::continuum) {
    auto phi = [&](Voxel a, Voxel b) {
      const Voxel d = a - b;
      return phiKernel({d.i * delta, d.j * delta, d.k * delta}, s, diffusion);
    };
    Complex self;
    if (config_.phi0 == Phi0Strategy::cutoff) {
      self = 1.0 / (2.0 * std::numbers::pi * diffusion * delta);
    } else {
      const Voxel zero[] = {Voxel{}};
      const auto v = free_->evaluate(s, zero);
      *maxKernelChange_ = std::max(*maxKernelChange_, v.relativeChange);
      self = v.values[0];
    }
    for (Eigen::Index r = 0; r < nr; ++r) {
      for (Eigen::Index q = 0; q < ns; ++q) ev.psi(r, q) = phi(sites_[static_cast<std::size_t>(r)], sources_[static_cast<std::size_t>(q)]);
      for (Eigen::Index q = 0; q < nr; ++q) {
        ev.psi0(r, q) = r == q ? self : phi(sites_[static_cast<std::size_t>(r)], sites_[static_cast<std::size_t>(q)]);
      }
    }
    return ev;
  }

  if (box_) {
    std::vector<std::pair<Voxel, Voxel>> pairs;
    for (Eigen::Index r = 0; r < nr; ++r) {
      for (Eigen::Index q = 0; q < ns; ++q) pairs.emplace_back(sites_[static_cast<std::size_t>(r)], sources_[static_cast<std::size_t>(q)]);
      for (Eigen::Index q = 0; q < nr; ++q) pairs.emplace_back(sites_[static_cast<std::size_t>(r)], sites_[static_cast<std::size_t>(q)]);
    }
    const auto vals = box_->evaluate(s, pairs);
    std::size_t p = 0;
    for (Eigen::Index r = 0; r < nr; ++r) {
      for (Eigen::Index q = 0; q < ns; ++q) ev.psi(r, q) = vals[p++];
      for (Eigen::Index q = 0; q < nr; ++q) ev.psi0(r, q) = vals[p++];
    }
    return ev;
  }

  // Free lattice: evaluate each distinct offset class once.
  std::map<std::array<int, 3>, std::size_t> slot;
  std::vector<Voxel> offsets;
  auto index = [&](Voxel d) {
    const auto key = canonical(d);
    auto [it, inserted] = slot.emplace(key, offsets.size());
    if (inserted) offsets.push_back({key[0], key[1], key[2]});
    return it->second;
  };
  std::vector<std::size_t> psiSlot(static_cast<std::size_t>(nr * ns)), psi0Slot(static_cast<std::size_t>(nr * nr));
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index q = 0; q < ns; ++q) psiSlot[static_cast<std::size_t>(r * ns + q)] = index(sites_[static_cast<std::size_t>(r)] - sources_[static_cast<std::size_t>(q)]);
    for (Eigen::Index q = 0; q < nr; ++q) psi0Slot[static_cast<std::size_t>(r * nr + q)] = index(sites_[static_cast<std::size_t>(r)] - sites_[static_cast<std::size_t>(q)]);
  }
  const auto vals = free_->evaluate(s, offsets);
  *maxKernelChange_ = std::max(*maxKernelChange_, vals.relativeChange);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index q = 0; q < ns; ++q) ev.psi(r, q) = vals.values[psiSlot[static_cast<std::size_t>(r * ns + q)]];
    for (Eigen::Index q = 0; q < nr; ++q) ev.psi0(r, q) = vals.values[psi0Slot[static_cast<std::size_t>(r * nr + q)]];
  }
  return ev;
}

Eigen::MatrixXcd TransferModel::deviceTransfer(Complex s, bool decoupled) const {
  const auto ev = kernels(s);
  const auto nr = ev.psi.rows();
  Eigen::MatrixXcd siteResponse = ev.rho * ev.psi;
  if (!decoupled) {
    Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(nr, nr) + s * ev.rho * ev.psi0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);
    if (!(lu.rcond() > 1e-14)) {
      std::ostringstream msg;
      msg << "transfer system is singular at s = " << s;
      throw Error(ErrorCode::SingularSystem, msg.str());
    }
    siteResponse = lu.solve(siteResponse);
  }
  Eigen::MatrixXcd device = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(receiverCount_), ev.psi.cols());
  for (Eigen::Index r = 0; r < nr; ++r) device.row(static_cast<Eigen::Index>(siteReceiver_[static_cast<std::size_t>(r)])) += siteResponse.row(r);
  return device;
}

std::vector<ImpulseTrain> TransferModel::sourceTrains() const {
  std::vector<ImpulseTrain> trains(sources_.size());
  std::size_t first = 0;
  for (const auto& tx : spec_.transmitters) {
    for (const auto& e : expandSchedule(tx.schedule)) {
      const auto split = splitUniform(e.count, tx.voxels);
      for (std::size_t m = 0; m < tx.voxels.size(); ++m) {
        if (split[m] == 0) continue;
        trains[first + m].times.push_back(e.time);
        trains[first + m].weights.push_back(static_cast<double>(split[m]));
      }
    }
    first += tx.voxels.size();
  }
  return trains;
}

namespace {

TransferEvaluation solveAt(const NetworkSpec& spec, const KernelConfig& config, Complex s, bool decoupled) {
  TransferModel model(spec, config);
  auto ev = model.kernels(s);
  const auto trains = model.sourceTrains();
  ev.k.resize(static_cast<Eigen::Index>(trains.size()));
  for (std::size_t q = 0; q < trains.size(); ++q) {
    Complex kq(0.0, 0.0);
    for (std::size_t b = 0; b < trains[q].times.size(); ++b) kq += trains[q].weights[b] * std::exp(-s * trains[q].times[b]);
    ev.k[static_cast<Eigen::Index>(q)] = kq;
  }
  const auto nr = ev.psi.rows();
  Eigen::VectorXcd rhs = ev.rho * (ev.psi * ev.k);
  if (decoupled) {
    ev.c = rhs;
  } else {
    Eigen::MatrixXcd lhs = Eigen::MatrixXcd::Identity(nr, nr) + s * ev.rho * ev.psi0;
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(lhs);
    if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularSystem, "transfer system is singular");
    ev.c = lu.solve(rhs);
  }
  ev.output = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(spec.receivers.size()));
  Eigen::Index r = 0;
  for (std::size_t u = 0; u < spec.receivers.size(); ++u) {
    for (std::size_t m = 0; m < spec.receivers[u].voxels.size(); ++m) ev.output[static_cast<Eigen::Index>(u)] += ev.c[r++];
  }
  return ev;
}

}  // namespace

TransferEvaluation assembleTransfer(const NetworkSpec& spec, const KernelConfig& config, Complex s) {
  return solveAt(spec, config, s, false);
}

TransferEvaluation decoupledTransfer(const NetworkSpec& spec, const KernelConfig& config, Complex s) {
  return solveAt(spec, config, s, true);
}

TransferSeries receiverOutputTimeSeries(const NetworkSpec& spec, const KernelConfig& config,
                                        std::span<const double> grid, bool decoupled,
                                        const TalbotOptions& inversion) {
  TransferModel model(spec, config);
  TransferSeries out;
  out.grid.assign(grid.begin(), grid.end());
  const std::size_t nu = model.receiverCount();
  out.mean.assign(nu, std::vector<double>(grid.size(), 0.0));
  out.errorEstimate.assign(nu, std::vector<double>(grid.size(), 0.0));

  std::vector<double> positive;
  std::size_t firstPositive = 0;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (n && !(grid[n] > grid[n - 1])) throw Error(ErrorCode::NonMonotoneTimes, "grid must ascend");
    if (grid[n] > 0.0) positive.push_back(grid[n]);
    else ++firstPositive;
  }
  if (positive.empty() || nu == 0) return out;

  const auto trains = model.sourceTrains();
  auto transfer = [&](Complex s) { return model.deviceTransfer(s, decoupled); };
  const auto inv = invertImpulseTrains(transfer, trains, positive, inversion);
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t n = 0; n < positive.size(); ++n) {
      out.mean[u][firstPositive + n] = inv.values(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(n));
      out.errorEstimate[u][firstPositive + n] = inv.errorEstimate(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(n));
    }
  }
  out.transformEvaluations = inv.transformEvaluations;
  out.maxKernelChange = model.maxKernelChange();
  return out;
}

}  // namespace mcnet
