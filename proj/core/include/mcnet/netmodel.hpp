#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "mcnet/error.hpp"

namespace mcnet {

// Integer voxel coordinate. Inside a lattice every component is in [0, extent).
// Differences of voxels (offsets) may be negative.
struct Voxel {
  int i = 0;
  int j = 0;
  int k = 0;

  friend auto operator<=>(const Voxel&, const Voxel&) = default;
};

inline Voxel operator-(Voxel a, Voxel b) { return {a.i - b.i, a.j - b.j, a.k - b.k}; }
inline Voxel operator+(Voxel a, Voxel b) { return {a.i + b.i, a.j + b.j, a.k + b.k}; }

// Reflective cubic lattice filled with an isotropic medium.
struct LatticeSpec {
  double delta = 1.0;               // voxel edge length
  std::array<int, 3> extent{1, 1, 1};
  double diffusion = 1.0;           // macroscopic diffusion coefficient D

  std::size_t voxelCount() const;
  bool contains(Voxel v) const;
  // Row-major linear index (k fastest).
  std::size_t index(Voxel v) const;
  Voxel voxel(std::size_t index) const;
};

/// Per-molecule hop rate to each face neighbour, D / delta^2.
double jumpRate(const LatticeSpec& lattice);

/// Face-adjacent voxels inside the lattice. Throws IndexOutOfLattice.
std::vector<Voxel> neighbors(Voxel v, const LatticeSpec& lattice);

struct Emission {
  double time = 0.0;
  long count = 0;

  friend bool operator==(const Emission&, const Emission&) = default;
};

// `count` molecules at start, start + period, ... for every event strictly before start + duration.
struct BurstTrain {
  double start = 0.0;
  double period = 1.0;
  long count = 1;
  double duration = 0.0;
};

enum class CountModel { deterministic, poisson };

struct EmissionSchedule {
  std::vector<Emission> events;
  std::vector<BurstTrain> trains;
  // With poisson, each event's count is the mean of an independent Poisson draw.
  CountModel countModel = CountModel::deterministic;
};

/// Explicit events and expanded trains, merged and sorted. Throws NonMonotoneTimes
/// if two events land on the same instant.
std::vector<Emission> expandSchedule(const EmissionSchedule& schedule);

struct TransmitterSpec {
  std::vector<Voxel> voxels;
  EmissionSchedule schedule;
};

struct LinearKinetics {};

// L + E <-> I -> C + E, C -> L, with eTotal enzymes per receiver.
struct MichaelisMenten {
  double g1plus = 0.0;
  double g1minus = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  long eTotal = 1;
};

using Kinetics = std::variant<LinearKinetics, MichaelisMenten>;

struct ReceiverSpec {
  std::vector<Voxel> voxels;
  double kPlus = 0.0;   // volume / time (3-D convention)
  double kMinus = 0.0;  // 1 / time
  Kinetics kinetics = LinearKinetics{};

  bool isLinear() const { return std::holds_alternative<LinearKinetics>(kinetics); }
};

struct NetworkSpec {
  LatticeSpec lattice;
  std::vector<TransmitterSpec> transmitters;
  std::vector<ReceiverSpec> receivers;
  double horizon = 1.0;

  bool isLinear() const;
};

/// Every violated invariant of `spec`; empty when the spec is valid.
std::vector<Violation> violations(const NetworkSpec& spec);

/// Returns `spec` unchanged when valid, otherwise throws ValidationError listing
/// each violation.
const NetworkSpec& validate(const NetworkSpec& spec);

/// Splits `count` molecules uniformly over `voxels`. Remainder molecules go to the
/// lexicographically smallest voxels. Result is aligned with `voxels`.
std::vector<long> splitUniform(long count, std::span<const Voxel> voxels);

// One transmitter emission in the merged network timeline.
struct Arrival {
  double time = 0.0;
  std::size_t transmitter = 0;
  long count = 0;
};

/// All transmitter events merged by time (ties keep transmitter order).
std::vector<Arrival> arrivalTimeline(const NetworkSpec& spec);

/// Translates device voxels so that every device has `clearance` voxels of medium
/// on every side and sets the lattice extent to the resulting bounding box.
NetworkSpec withClearance(NetworkSpec spec, int clearance = 8);

/// Fraction of the free molecules located in the outermost voxel shell.
double outerShellFraction(const LatticeSpec& lattice, std::span<const double> freeCounts);

}  // namespace mcnet
