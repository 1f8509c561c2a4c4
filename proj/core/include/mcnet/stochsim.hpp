#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mcnet/netmodel.hpp"
#include "mcnet/reaction_network.hpp"

namespace mcnet {

// Receiver outputs of one stochastic run, held right-continuously on the grid.
struct Trajectory {
  std::vector<double> sampleTimes;
  std::vector<std::vector<long>> outputs;  // [time][receiver] complex counts
  std::vector<long> freeTotal;             // [time]
  std::vector<long> boundTotal;            // [time] complexes + intermediates
  std::vector<long> emitted;               // [time] cumulative molecules emitted
  std::vector<std::vector<long>> states;   // [time][species], only when requested
  std::uint64_t seed = 0;
};

struct TauOptions {
  double tau = 1e-4;
  int maxHalvings = 20;
  bool recordStates = false;
};

struct SsaOptions {
  bool recordStates = false;
  std::uint64_t maxEvents = 2'000'000'000ULL;
};

/// Constant-step tau-leaping. Arrivals are applied exactly by splitting steps at
/// arrival and sample instants. First-order channels sharing a reactant fire
/// Binomial(n, a tau) molecules per step (the Poisson leap's mean, never negative).
/// Second-order channels that all consume one species (the enzyme of a
/// Michaelis-Menten receiver) draw their total from a binomial on that species and
/// split it by propensity. Other groups draw Poisson counts; a step that would
/// drive a reactant negative is re-drawn as two half steps, recursively up to
/// `maxHalvings` times.
Trajectory simulateTau(const NetworkSpec& spec, const TauOptions& options, std::uint64_t seed,
                       std::span<const double> grid);
Trajectory simulateTau(const ReactionNetwork& net, const NetworkSpec& spec, const TauOptions& options,
                       std::uint64_t seed, std::span<const double> grid);

/// Exact next-reaction sampling (Gillespie direct method) between arrivals.
Trajectory simulateSSA(const NetworkSpec& spec, std::uint64_t seed, std::span<const double> grid,
                       const SsaOptions& options = {});
Trajectory simulateSSA(const ReactionNetwork& net, const NetworkSpec& spec, std::uint64_t seed,
                       std::span<const double> grid, const SsaOptions& options = {});

enum class SimMethod { tauLeap, ssa };

struct EnsembleOptions {
  std::size_t replicates = 125;
  SimMethod method = SimMethod::tauLeap;
  TauOptions tau;
  SsaOptions ssa;
  unsigned threads = 0;  // 0: hardware concurrency
  bool keepTrajectories = false;
};

struct EnsembleStats {
  std::vector<double> sampleTimes;
  std::vector<std::vector<double>> mean;    // [receiver][time]
  std::vector<std::vector<double>> stddev;  // [receiver][time], unbiased (n - 1)
  std::size_t replicates = 0;
  std::vector<Trajectory> trajectories;

  double standardError(std::size_t receiver, std::size_t time) const;
};

/// Seed of replicate `index`, derived from `baseSeed` by a splitmix64 step.
std::uint64_t replicateSeed(std::uint64_t baseSeed, std::size_t index);

/// Independent replicates, run concurrently; statistics reduced in replicate order
/// so the result does not depend on scheduling.
EnsembleStats ensemble(const NetworkSpec& spec, const EnsembleOptions& options, std::uint64_t baseSeed,
                       std::span<const double> grid);

}  // namespace mcnet
