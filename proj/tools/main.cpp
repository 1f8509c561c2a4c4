#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcnet/config.hpp"
#include "mcnet/csv.hpp"
#include "mcnet/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverError = 3;

int exitCodeFor(mcnet::ErrorCode code) {
  using mcnet::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::OverlappingVoxels:
    case ErrorCode::NonPositiveParameter:
    case ErrorCode::EventBeyondHorizon:
    case ErrorCode::IndexOutOfLattice:
    case ErrorCode::NonMonotoneTimes:
    case ErrorCode::EmptyDevice:
    case ErrorCode::DuplicateVoxel:
    case ErrorCode::ConfigParseError:
    case ErrorCode::NonDivisibleDelta:
    case ErrorCode::EmptyWindow:
    case ErrorCode::GridMismatch:
      return kConfigError;
    default:
      return kSolverError;
  }
}

mcnet::Scenario load(const std::string& path, std::optional<std::uint64_t> seed) {
  auto sc = mcnet::loadScenario(path);
  if (seed) sc.seed = *seed;
  return sc;
}

void printSummary(const mcnet::ScenarioResult& result) {
  for (const auto& m : result.methods) {
    std::printf("%-14s %8.2fs  conservation %.3g", std::string(mcnet::toString(m.method)).c_str(), m.seconds,
                m.conservationError);
    if (m.shellFraction == m.shellFraction) std::printf("  boundary shell %.3g", m.shellFraction);
    std::printf("\n");
  }
  for (const auto& p : result.report.pairs) {
    std::printf("%s vs %s receiver %zu: relative RMSE %.4g%s, peak diff %.4g, peak time diff %.4g\n",
                std::string(mcnet::toString(p.method)).c_str(), std::string(mcnet::toString(p.reference)).c_str(),
                p.receiver, p.metrics.relativeRmse, p.metrics.absolute ? " (absolute)" : "", p.metrics.peakDifference,
                p.metrics.peakTimeDifference);
  }
  for (const auto& b : result.report.bands) {
    std::printf("%s within 3 SE of %s receiver %zu: %.1f%% of samples (max |z| %.2f)\n",
                std::string(mcnet::toString(b.method)).c_str(), std::string(mcnet::toString(b.reference)).c_str(),
                b.receiver, 100.0 * b.fractionWithin3SE, b.maxAbsZ);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Molecular communication network channel models"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  std::string outDir = "out";
  app.add_option("--seed", seed, "Override run.seed");
  app.add_option("--out", outDir, "Output directory")->capture_default_str();

  std::string configPath;
  auto* run = app.add_subcommand("run", "Run every method of a scenario");
  run->add_option("config", configPath, "Scenario file")->required();
  run->fallthrough();

  auto* sweep = app.add_subcommand("sweep-delta", "Refine the voxel edge over sweep.deltas");
  sweep->add_option("config", configPath, "Scenario file")->required();
  sweep->fallthrough();

  std::string csvPath;
  double threshold = 0.0;
  double duration = 0.0;
  auto* detect = app.add_subcommand("detect", "Threshold detection of ON-OFF symbols");
  detect->add_option("csv", csvPath, "Result CSV")->required();
  detect->add_option("--threshold", threshold, "Peak threshold (s1 when peak >= threshold)")->required();
  detect->add_option("--duration", duration, "Symbol duration")->required();

  std::string csvA;
  std::string csvB;
  auto* compare = app.add_subcommand("compare", "Relative RMSE of A against reference B");
  compare->add_option("csvA", csvA, "Series A")->required();
  compare->add_option("csvB", csvB, "Reference series B")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*run) {
      const auto result = mcnet::runScenario(load(configPath, seed), outDir);
      printSummary(result);
    } else if (*sweep) {
      const auto sc = load(configPath, seed);
      const auto result = mcnet::sweepDelta(sc, outDir);
      for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
        for (std::size_t l = 0; l < result.successiveRmse[mi].size(); ++l) {
          for (std::size_t u = 0; u < result.successiveRmse[mi][l].size(); ++u) {
            std::printf("%s receiver %zu: delta %.6g vs %.6g relative RMSE %.4g\n",
                        std::string(mcnet::toString(sc.methods[mi])).c_str(), u, result.levels[l + 1].delta,
                        result.levels[l].delta, result.successiveRmse[mi][l][u]);
          }
        }
      }
    } else if (*detect) {
      for (const auto& s : mcnet::readSeriesCsv(csvPath)) {
        const auto symbols = mcnet::detectSymbols(s.time, s.mean, threshold, duration);
        std::printf("%s receiver %zu:", s.method.c_str(), s.receiver);
        for (int b : symbols) std::printf(" s%d", b);
        std::printf("\n");
      }
    } else if (*compare) {
      const auto a = mcnet::readSeriesCsv(csvA);
      const auto b = mcnet::readSeriesCsv(csvB);
      std::map<std::size_t, const mcnet::CsvSeries*> byReceiver;
      for (const auto& s : b) byReceiver.emplace(s.receiver, &s);
      bool matched = false;
      for (const auto& s : a) {
        auto it = byReceiver.find(s.receiver);
        if (it == byReceiver.end()) continue;
        matched = true;
        const auto c = mcnet::compareSeries(s.time, s.mean, it->second->time, it->second->mean);
        std::printf("receiver %zu: %s vs %s relative RMSE %s%s peak diff %s peak time diff %s\n", s.receiver,
                    s.method.c_str(), it->second->method.c_str(), mcnet::formatDouble(c.relativeRmse).c_str(),
                    c.absolute ? " (absolute)" : "", mcnet::formatDouble(c.peakDifference).c_str(),
                    mcnet::formatDouble(c.peakTimeDifference).c_str());
      }
      if (!matched) throw mcnet::Error(mcnet::ErrorCode::GridMismatch, "no receiver appears in both files");
    }
  } catch (const mcnet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverError;
  }
  return 0;
}
