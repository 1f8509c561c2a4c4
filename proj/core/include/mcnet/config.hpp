#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcnet/invlaplace.hpp"
#include "mcnet/moments.hpp"
#include "mcnet/netmodel.hpp"
#include "mcnet/xfer.hpp"

namespace mcnet {

enum class Method { tauSim, ssaSim, meanOde, covOde, xferLattice, xferContinuum, xferCutoff, decoupled };

std::string_view toString(Method method);
std::optional<Method> parseMethod(std::string_view name);
bool isStochastic(Method method);

struct Scenario {
  std::string name;
  NetworkSpec network;  // device voxels already shifted when the lattice extent is automatic
  std::vector<Method> methods;
  std::vector<double> grid;
  std::size_t replicates = 125;
  double tau = 1e-4;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int clearance = 8;
  bool autoExtent = true;
  KernelConfig kernel;  // for xferLattice
  // Kernel used by the decoupled model (continuum phi by default).
  KernelKind decoupledKernel = KernelKind::continuum;
  TalbotOptions inversion{32, 1e-4, 0.0, true, true};
  MomentOptions moments;
  std::optional<Method> reference;
  // Delta sweep: device voxels are given on the coarsest lattice (edge chi = lattice.delta)
  // and refined per entry.
  std::vector<double> sweepDeltas;
  // Optional detector settings applied to every output.
  std::optional<double> detectThreshold;
  std::optional<double> symbolDuration;
  // Base specification before clearance shifting (what sweepDelta refines).
  NetworkSpec baseNetwork;
};

/// Parses key = value scenario text. Unknown keys, malformed values, an empty
/// method list or a grid outside the horizon raise ConfigParseError; network
/// invariant violations raise ValidationError.
Scenario parseScenario(std::string_view text, std::string_view origin = "<config>");
Scenario loadScenario(const std::filesystem::path& path);

/// Emission schedule grammar used by transmitter[n].schedule, e.g.
///   burst(0, 1e-4, 10, 0.2) event(1.5, 3) symbols(01, 2, 1e-4, 10, 0.2)
EmissionSchedule parseSchedule(std::string_view text);

/// Grid syntax "start:step:stop" or a whitespace/comma separated list.
std::vector<double> parseGrid(std::string_view text);

}  // namespace mcnet
