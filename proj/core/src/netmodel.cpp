#include "mcnet/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace mcnet {

std::string_view toString(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OverlappingVoxels: return "OverlappingVoxels";
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::EventBeyondHorizon: return "EventBeyondHorizon";
    case ErrorCode::IndexOutOfLattice: return "IndexOutOfLattice";
    case ErrorCode::NonMonotoneTimes: return "NonMonotoneTimes";
    case ErrorCode::EmptyDevice: return "EmptyDevice";
    case ErrorCode::DuplicateVoxel: return "DuplicateVoxel";
    case ErrorCode::StepRejectionLimit: return "StepRejectionLimit";
    case ErrorCode::NonlinearKinetics: return "NonlinearKinetics";
    case ErrorCode::IntegratorFailure: return "IntegratorFailure";
    case ErrorCode::DimensionCap: return "DimensionCap";
    case ErrorCode::TruncationMassExceeded: return "TruncationMassExceeded";
    case ErrorCode::ZeroDisplacement: return "ZeroDisplacement";
    case ErrorCode::DegenerateRoots: return "DegenerateRoots";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::PoleHit: return "PoleHit";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ContourEvaluationFailure: return "ContourEvaluationFailure";
    case ErrorCode::AccuracyNotMet: return "AccuracyNotMet";
    case ErrorCode::ConfigParseError: return "ConfigParseError";
    case ErrorCode::NonDivisibleDelta: return "NonDivisibleDelta";
    case ErrorCode::EmptyWindow: return "EmptyWindow";
    case ErrorCode::GridMismatch: return "GridMismatch";
  }
  return "Unknown";
}

namespace {

std::string joinMessages(const std::vector<Violation>& violations) {
  std::ostringstream out;
  for (std::size_t n = 0; n < violations.size(); ++n) {
    if (n) out << "; ";
    out << toString(violations[n].code) << " (" << violations[n].message << ")";
  }
  return out.str();
}

ErrorCode firstCode(const std::vector<Violation>& violations) {
  return violations.empty() ? ErrorCode::InvalidArgument : violations.front().code;
}

std::string describe(Voxel v) {
  std::ostringstream out;
  out << '[' << v.i << ',' << v.j << ',' << v.k << ']';
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(firstCode(violations), joinMessages(violations)), violations_(std::move(violations)) {}

std::size_t LatticeSpec::voxelCount() const {
  return static_cast<std::size_t>(extent[0]) * static_cast<std::size_t>(extent[1]) *
         static_cast<std::size_t>(extent[2]);
}

bool LatticeSpec::contains(Voxel v) const {
  return v.i >= 0 && v.j >= 0 && v.k >= 0 && v.i < extent[0] && v.j < extent[1] && v.k < extent[2];
}

std::size_t LatticeSpec::index(Voxel v) const {
  return (static_cast<std::size_t>(v.i) * static_cast<std::size_t>(extent[1]) +
          static_cast<std::size_t>(v.j)) *
             static_cast<std::size_t>(extent[2]) +
         static_cast<std::size_t>(v.k);
}

Voxel LatticeSpec::voxel(std::size_t index) const {
  const auto nz = static_cast<std::size_t>(extent[2]);
  const auto ny = static_cast<std::size_t>(extent[1]);
  Voxel v;
  v.k = static_cast<int>(index % nz);
  index /= nz;
  v.j = static_cast<int>(index % ny);
  v.i = static_cast<int>(index / ny);
  return v;
}

double jumpRate(const LatticeSpec& lattice) {
  return lattice.diffusion / (lattice.delta * lattice.delta);
}

std::vector<Voxel> neighbors(Voxel v, const LatticeSpec& lattice) {
  if (!lattice.contains(v)) {
    throw Error(ErrorCode::IndexOutOfLattice, "voxel " + describe(v) + " outside lattice");
  }
  static constexpr std::array<Voxel, 6> kSteps{
      {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}}};
  std::vector<Voxel> out;
  out.reserve(6);
  for (const auto& step : kSteps) {
    const Voxel w = v + step;
    if (lattice.contains(w)) out.push_back(w);
  }
  return out;
}

std::vector<Emission> expandSchedule(const EmissionSchedule& schedule) {
  std::vector<Emission> out = schedule.events;
  for (const auto& train : schedule.trains) {
    if (!(train.period > 0.0) || !(train.duration >= 0.0)) {
      throw Error(ErrorCode::NonPositiveParameter, "burst train needs period > 0 and duration >= 0");
    }
    // Events strictly before start + duration; the slack absorbs duration/period
    // ratios that are integers up to rounding.
    const double ratio = train.duration / train.period;
    const auto n = static_cast<long>(std::ceil(ratio - 1e-9));
    for (long m = 0; m < n; ++m) {
      out.push_back({train.start + static_cast<double>(m) * train.period, train.count});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Emission& a, const Emission& b) { return a.time < b.time; });
  for (std::size_t n = 1; n < out.size(); ++n) {
    if (!(out[n].time > out[n - 1].time)) {
      std::ostringstream msg;
      msg << "two emissions at t=" << out[n].time;
      throw Error(ErrorCode::NonMonotoneTimes, msg.str());
    }
  }
  return out;
}

bool NetworkSpec::isLinear() const {
  return std::all_of(receivers.begin(), receivers.end(),
                     [](const ReceiverSpec& r) { return r.isLinear(); });
}

std::vector<Violation> violations(const NetworkSpec& spec) {
  std::vector<Violation> out;
  auto add = [&out](ErrorCode code, std::string msg) { out.push_back({code, std::move(msg)}); };
  const auto& lat = spec.lattice;

  if (!(lat.delta > 0.0) || !std::isfinite(lat.delta)) add(ErrorCode::NonPositiveParameter, "lattice.delta must be > 0");
  if (!(lat.diffusion > 0.0) || !std::isfinite(lat.diffusion)) add(ErrorCode::NonPositiveParameter, "medium.D must be > 0");
  for (int axis = 0; axis < 3; ++axis) {
    if (lat.extent[axis] < 1) add(ErrorCode::NonPositiveParameter, "lattice.extent components must be >= 1");
  }
  if (out.empty() && !std::isfinite(jumpRate(lat))) add(ErrorCode::NonPositiveParameter, "jump rate is not finite");
  if (!(spec.horizon > 0.0)) add(ErrorCode::NonPositiveParameter, "horizon must be > 0");

  // Owner of each voxel, for the pairwise-disjointness check.
  std::set<std::pair<Voxel, std::string>> seen;
  std::vector<std::pair<Voxel, std::string>> owners;
  auto claim = [&](const std::vector<Voxel>& voxels, const std::string& device) {
    if (voxels.empty()) add(ErrorCode::EmptyDevice, device + " has no voxels");
    std::set<Voxel> local;
    for (const auto& v : voxels) {
      if (!lat.contains(v)) add(ErrorCode::IndexOutOfLattice, device + " voxel " + describe(v) + " outside lattice");
      if (!local.insert(v).second) add(ErrorCode::DuplicateVoxel, device + " lists voxel " + describe(v) + " twice");
    }
    for (const auto& v : local) {
      for (const auto& [w, other] : owners) {
        if (w == v) add(ErrorCode::OverlappingVoxels, device + " and " + other + " share voxel " + describe(v));
      }
    }
    for (const auto& v : local) owners.emplace_back(v, device);
  };

  for (std::size_t a = 0; a < spec.transmitters.size(); ++a) {
    const auto name = "transmitter[" + std::to_string(a) + "]";
    const auto& tx = spec.transmitters[a];
    claim(tx.voxels, name);
    for (const auto& e : tx.schedule.events) {
      if (e.count < 1) add(ErrorCode::NonPositiveParameter, name + " emission count must be >= 1");
      if (!(e.time >= 0.0)) add(ErrorCode::NonPositiveParameter, name + " emission time must be >= 0");
    }
    for (const auto& train : tx.schedule.trains) {
      if (train.count < 1) add(ErrorCode::NonPositiveParameter, name + " burst count must be >= 1");
      if (!(train.period > 0.0)) add(ErrorCode::NonPositiveParameter, name + " burst period must be > 0");
      if (!(train.duration >= 0.0)) add(ErrorCode::NonPositiveParameter, name + " burst duration must be >= 0");
      if (!(train.start >= 0.0)) add(ErrorCode::NonPositiveParameter, name + " burst start must be >= 0");
    }
    try {
      const auto events = expandSchedule(tx.schedule);
      if (!events.empty() && !(events.back().time < spec.horizon)) {
        add(ErrorCode::EventBeyondHorizon, name + " emits at or after the horizon");
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NonMonotoneTimes) add(ErrorCode::NonMonotoneTimes, name + " schedule has coincident events");
    }
  }

  for (std::size_t u = 0; u < spec.receivers.size(); ++u) {
    const auto name = "receiver[" + std::to_string(u) + "]";
    const auto& rx = spec.receivers[u];
    claim(rx.voxels, name);
    if (!(rx.kPlus >= 0.0)) add(ErrorCode::NonPositiveParameter, name + " kplus must be >= 0");
    if (!(rx.kMinus >= 0.0)) add(ErrorCode::NonPositiveParameter, name + " kminus must be >= 0");
    if (const auto* mm = std::get_if<MichaelisMenten>(&rx.kinetics)) {
      if (!(mm->g1plus >= 0.0 && mm->g1minus >= 0.0 && mm->g2 >= 0.0 && mm->g3 >= 0.0)) {
        add(ErrorCode::NonPositiveParameter, name + " Michaelis-Menten constants must be >= 0");
      }
      if (mm->eTotal < 1) add(ErrorCode::NonPositiveParameter, name + " eTotal must be >= 1");
    }
  }
  return out;
}

const NetworkSpec& validate(const NetworkSpec& spec) {
  auto found = violations(spec);
  if (!found.empty()) throw ValidationError(std::move(found));
  return spec;
}

std::vector<long> splitUniform(long count, std::span<const Voxel> voxels) {
  const auto n = static_cast<long>(voxels.size());
  if (n == 0) throw Error(ErrorCode::EmptyDevice, "cannot split emission over zero voxels");
  std::vector<long> out(voxels.size(), count / n);
  long remainder = count % n;
  std::vector<std::size_t> order(voxels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return voxels[a] < voxels[b]; });
  for (std::size_t m = 0; remainder > 0; ++m, --remainder) ++out[order[m]];
  return out;
}

std::vector<Arrival> arrivalTimeline(const NetworkSpec& spec) {
  std::vector<Arrival> out;
  for (std::size_t a = 0; a < spec.transmitters.size(); ++a) {
    for (const auto& e : expandSchedule(spec.transmitters[a].schedule)) {
      out.push_back({e.time, a, e.count});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Arrival& x, const Arrival& y) { return x.time < y.time; });
  return out;
}

NetworkSpec withClearance(NetworkSpec spec, int clearance) {
  std::array<int, 3> lo{std::numeric_limits<int>::max(), std::numeric_limits<int>::max(),
                        std::numeric_limits<int>::max()};
  std::array<int, 3> hi{std::numeric_limits<int>::min(), std::numeric_limits<int>::min(),
                        std::numeric_limits<int>::min()};
  auto visit = [&](const std::vector<Voxel>& voxels) {
    for (const auto& v : voxels) {
      const std::array<int, 3> c{v.i, v.j, v.k};
      for (int axis = 0; axis < 3; ++axis) {
        lo[axis] = std::min(lo[axis], c[axis]);
        hi[axis] = std::max(hi[axis], c[axis]);
      }
    }
  };
  for (const auto& tx : spec.transmitters) visit(tx.voxels);
  for (const auto& rx : spec.receivers) visit(rx.voxels);
  if (lo[0] > hi[0]) {
    spec.lattice.extent = {2 * clearance + 1, 2 * clearance + 1, 2 * clearance + 1};
    return spec;
  }
  const Voxel shift{clearance - lo[0], clearance - lo[1], clearance - lo[2]};
  for (auto& tx : spec.transmitters) {
    for (auto& v : tx.voxels) v = v + shift;
  }
  for (auto& rx : spec.receivers) {
    for (auto& v : rx.voxels) v = v + shift;
  }
  for (int axis = 0; axis < 3; ++axis) spec.lattice.extent[axis] = hi[axis] - lo[axis] + 1 + 2 * clearance;
  return spec;
}

double outerShellFraction(const LatticeSpec& lattice, std::span<const double> freeCounts) {
  double total = 0.0;
  double shell = 0.0;
  for (std::size_t n = 0; n < freeCounts.size(); ++n) {
    const Voxel v = lattice.voxel(n);
    total += freeCounts[n];
    const std::array<int, 3> c{v.i, v.j, v.k};
    bool outer = false;
    for (int axis = 0; axis < 3; ++axis) {
      // Degenerate axes (extent 1) have no outer layer of their own.
      if (lattice.extent[axis] > 1 && (c[axis] == 0 || c[axis] == lattice.extent[axis] - 1)) outer = true;
    }
    if (outer) shell += freeCounts[n];
  }
  return total > 0.0 ? shell / total : 0.0;
}

}  // namespace mcnet
