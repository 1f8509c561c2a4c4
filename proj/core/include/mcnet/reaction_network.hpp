#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mcnet/netmodel.hpp"

namespace mcnet {

inline constexpr std::size_t kNoSpecies = std::numeric_limits<std::size_t>::max();

struct StoichEntry {
  std::size_t species = 0;
  int delta = 0;
};

enum class ChannelKind { diffusion, bind, unbind, mmBind, mmUnbind, mmCatalysis, mmRelease };

// One jump r_j with mass-action propensity W_j(q) = rate * prod(q[reactant]).
struct JumpChannel {
  ChannelKind kind = ChannelKind::diffusion;
  double rate = 0.0;
  std::array<std::size_t, 2> reactants{kNoSpecies, kNoSpecies};
  std::vector<StoichEntry> change;

  bool firstOrder() const { return reactants[1] == kNoSpecies; }

  template <typename T>
  double propensity(std::span<const T> q) const {
    double a = rate * static_cast<double>(q[reactants[0]]);
    if (reactants[1] != kNoSpecies) a *= static_cast<double>(q[reactants[1]]);
    return a;
  }
};

// A receiver voxel. Complexes are tracked per site so unbinding releases into the
// voxel the molecule bound in.
struct ReceiverSite {
  std::size_t receiver = 0;
  Voxel voxel;
  std::size_t freeSpecies = 0;
  std::size_t complexSpecies = 0;
  std::size_t enzymeSpecies = kNoSpecies;
  std::size_t intermediateSpecies = kNoSpecies;
  long enzymes = 0;  // initial enzyme count (Michaelis-Menten only)
};

/// Species layout and jump catalogue shared by the stochastic and moment solvers.
/// Species order: free molecules per voxel (lattice index order), then for each
/// receiver site its complex count, followed by enzyme and intermediate counts for
/// Michaelis-Menten sites.
struct ReactionNetwork {
  LatticeSpec lattice;
  std::size_t voxelCount = 0;
  std::size_t speciesCount = 0;
  std::vector<ReceiverSite> sites;
  std::vector<std::vector<std::size_t>> receiverSites;
  std::vector<std::vector<std::size_t>> transmitterSpecies;  // free species per transmitter voxel
  std::vector<std::vector<Voxel>> transmitterVoxels;
  std::vector<JumpChannel> channels;

  std::vector<long> initialState() const;

  /// Molecules held at receivers (complexes plus Michaelis-Menten intermediates).
  template <typename T>
  double boundTotal(std::span<const T> q) const {
    double sum = 0.0;
    for (const auto& s : sites) {
      sum += static_cast<double>(q[s.complexSpecies]);
      if (s.intermediateSpecies != kNoSpecies) sum += static_cast<double>(q[s.intermediateSpecies]);
    }
    return sum;
  }

  template <typename T>
  double freeTotal(std::span<const T> q) const {
    double sum = 0.0;
    for (std::size_t n = 0; n < voxelCount; ++n) sum += static_cast<double>(q[n]);
    return sum;
  }

  /// Complex count summed over the sites of receiver `u`.
  template <typename T>
  double receiverOutput(std::span<const T> q, std::size_t u) const {
    double sum = 0.0;
    for (auto site : receiverSites[u]) sum += static_cast<double>(q[sites[site].complexSpecies]);
    return sum;
  }
};

ReactionNetwork buildNetwork(const NetworkSpec& spec);

/// The jump catalogue alone: one channel per directed lattice edge plus the
/// receiver reactions.
std::vector<JumpChannel> buildChannels(const NetworkSpec& spec);

}  // namespace mcnet
