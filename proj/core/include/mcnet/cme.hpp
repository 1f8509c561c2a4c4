#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mcnet/netmodel.hpp"

namespace mcnet {

struct CmeOptions {
  // Per-species inclusive upper bound; empty means every species is capped at the
  // total number of molecules the schedule emits (exact for closed systems).
  std::vector<long> caps;
  std::size_t maxStates = 1'000'000;
  double massTolerance = 1e-8;
  double rtol = 1e-11;
  double atol = 1e-15;
};

struct CmeSolution {
  std::vector<double> grid;
  std::vector<std::vector<double>> mean;      // [receiver][time]
  std::vector<std::vector<double>> variance;  // [receiver][time]
  std::vector<std::vector<std::vector<double>>> outputPmf;  // [receiver][time][count]
  std::vector<double> freeMean;   // [time]
  std::vector<double> totalMass;  // [time] probability kept inside the truncation
  std::vector<double> lostMass;   // [time] probability that left it
  std::size_t stateCount = 0;
};

/// Finite-state projection of the master equation on the product space of species
/// counts. Probability flowing past a cap is collected in a sink; if it exceeds
/// `massTolerance` TruncationMassExceeded is thrown.
CmeSolution cmeExact(const NetworkSpec& spec, std::span<const double> grid, const CmeOptions& options = {});

}  // namespace mcnet
