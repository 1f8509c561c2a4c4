#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcnet/config.hpp"

namespace mcnet {

struct MethodResult {
  Method method = Method::meanOde;
  std::vector<double> grid;
  std::vector<std::vector<double>> mean;    // [receiver][time]
  std::vector<std::vector<double>> stddev;  // [receiver][time]; empty for mean-only methods
  std::size_t replicates = 0;
  // max over samples of |free + bound - emitted| / max(1, emitted)
  double conservationError = 0.0;
  // Free molecules in the outer lattice shell at the final sample (meanOde only, else NaN).
  double shellFraction = 0.0;
  double seconds = 0.0;
  bool linearSurrogate = false;  // MM receivers replaced by linear kplus/kminus kinetics
};

struct SeriesComparison {
  double rmse = 0.0;          // ||A - B||_2 / sqrt(n)
  double relativeRmse = 0.0;  // ||A - B||_2 / ||B||_2, or rmse when `absolute`
  bool absolute = false;      // reference identically zero
  double peakDifference = 0.0;      // max A - max B
  double peakTimeDifference = 0.0;  // argmax A - argmax B (first maxima)
};

/// A against reference B. Throws GridMismatch unless both grids are identical.
SeriesComparison compareSeries(std::span<const double> gridA, std::span<const double> a,
                               std::span<const double> gridB, std::span<const double> b);

struct ComparisonEntry {
  Method method;
  Method reference;
  std::size_t receiver = 0;
  SeriesComparison metrics;
};

struct BandEntry {
  Method method;     // stochastic
  Method reference;  // deterministic
  std::size_t receiver = 0;
  double fractionWithin3SE = 0.0;
  double maxAbsZ = 0.0;
};

// Symbols decoded from one mean series (scenario detect.threshold and detect.duration).
struct SymbolEntry {
  Method method;
  std::size_t receiver = 0;
  std::vector<int> bits;
};

struct ComparisonReport {
  std::string scenario;
  std::optional<Method> reference;
  std::vector<ComparisonEntry> pairs;
  std::vector<BandEntry> bands;
  std::vector<SymbolEntry> symbols;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<MethodResult> methods;
  ComparisonReport report;
};

/// Runs one method of the scenario on spec `network` (defaults to scenario.network).
/// Mean-only methods replace Michaelis-Menten receivers by their linear surrogate.
MethodResult runMethod(const Scenario& scenario, Method method);
MethodResult runMethod(const Scenario& scenario, const NetworkSpec& network, Method method);

/// Pairwise comparison of the method results (reference first), standard-error
/// bands of every stochastic method against every mean-only method, and decoded
/// symbols when the scenario sets a detector.
ComparisonReport buildReport(const Scenario& scenario, const std::vector<MethodResult>& results);

/// Runs every requested method, concurrently when scenario.threads allows. When
/// `outDir` is given, writes `<name>-<method>.csv` per method and `<name>-report.json`.
ScenarioResult runScenario(const Scenario& scenario, const std::optional<std::filesystem::path>& outDir = {});

/// Network refined to voxel edge `delta`: every voxel of the base lattice (edge
/// scenario.baseNetwork.lattice.delta, the device edge) becomes an n^3 block,
/// n = base edge / delta. Every block voxel receives the full event count
/// (`countScale` = n^3 is returned) so that mean outputs divided by n^3 equal
/// a uniform spread of each emission (exact for linear receivers). Throws
/// NonDivisibleDelta.
NetworkSpec refineNetwork(const Scenario& scenario, double delta, long* countScale = nullptr);

struct SweepLevel {
  double delta = 0.0;
  std::size_t voxelsPerDevice = 0;
  std::vector<MethodResult> methods;
};

struct SweepResult {
  Scenario scenario;
  std::vector<SweepLevel> levels;
  // [method][level - 1][receiver]: level against the previous (coarser) level
  std::vector<std::vector<std::vector<double>>> successiveRmse;
};

/// Runs the mean-only methods of the scenario for each Δ in scenario.sweepDeltas.
SweepResult sweepDelta(const Scenario& scenario, const std::optional<std::filesystem::path>& outDir = {});

/// s1 (1) when the peak of window [m d, (m + 1) d) reaches `threshold`, else s0.
/// A value exactly at the threshold gives s1. The final grid point closes the last
/// window. Throws EmptyWindow when a window holds no sample.
std::vector<int> detectSymbols(std::span<const double> times, std::span<const double> values, double threshold,
                               double symbolDuration);

}  // namespace mcnet
