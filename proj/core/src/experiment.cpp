#include "mcnet/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mcnet/csv.hpp"
#include "mcnet/moments.hpp"
#include "mcnet/reaction_network.hpp"
#include "mcnet/stochsim.hpp"
#include "mcnet/xfer.hpp"

namespace mcnet {

namespace {

using Json = nlohmann::ordered_json;

double conservationOf(std::span<const double> freeTotal, std::span<const double> boundTotal,
                      std::span<const double> emitted) {
  double worst = 0.0;
  for (std::size_t t = 0; t < emitted.size(); ++t) {
    const double err = std::abs(freeTotal[t] + boundTotal[t] - emitted[t]) / std::max(1.0, emitted[t]);
    worst = std::max(worst, err);
  }
  return worst;
}

std::size_t firstArgmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

KernelConfig kernelFor(const Scenario& sc, Method method) {
  KernelConfig k = sc.kernel;
  switch (method) {
    case Method::xferLattice:
      k.kind = KernelKind::lattice;
      k.phi0 = Phi0Strategy::latticePsi0;
      break;
    case Method::xferContinuum:
      k.kind = KernelKind::continuum;
      k.phi0 = Phi0Strategy::latticePsi0;
      break;
    case Method::xferCutoff:
      k.kind = KernelKind::continuum;
      k.phi0 = Phi0Strategy::cutoff;
      break;
    case Method::decoupled:
      k.kind = sc.decoupledKernel;
      k.phi0 = Phi0Strategy::latticePsi0;
      break;
    default:
      break;
  }
  return k;
}

std::vector<Method> orderedMethods(const Scenario& sc) {
  std::vector<Method> order = sc.methods;
  std::optional<Method> ref = sc.reference;
  if (!ref) {
    for (auto m : {Method::meanOde, Method::covOde, Method::xferLattice}) {
      if (std::find(order.begin(), order.end(), m) != order.end()) {
        ref = m;
        break;
      }
    }
  }
  if (ref) {
    auto it = std::find(order.begin(), order.end(), *ref);
    if (it != order.end()) std::rotate(order.begin(), it, it + 1);
  }
  return order;
}

Json comparisonJson(const SeriesComparison& c) {
  Json j;
  j["rmse"] = c.rmse;
  j["relativeRmse"] = c.relativeRmse;
  j["absolute"] = c.absolute;
  j["peakDifference"] = c.peakDifference;
  j["peakTimeDifference"] = c.peakTimeDifference;
  return j;
}

Json reportJson(const ScenarioResult& result) {
  Json j;
  j["scenario"] = result.scenario.name;
  const auto& net = result.scenario.network;
  j["lattice"] = {{"delta", net.lattice.delta},
                  {"extent", {net.lattice.extent[0], net.lattice.extent[1], net.lattice.extent[2]}},
                  {"D", net.lattice.diffusion},
                  {"clearance", result.scenario.autoExtent ? Json(result.scenario.clearance) : Json(nullptr)}};
  j["reference"] = result.report.reference ? Json(std::string(toString(*result.report.reference))) : Json(nullptr);
  Json methods = Json::array();
  for (const auto& m : result.methods) {
    Json e;
    e["method"] = std::string(toString(m.method));
    e["replicates"] = m.replicates;
    e["linearSurrogate"] = m.linearSurrogate;
    e["conservationError"] = m.conservationError;
    e["boundaryShellFraction"] = std::isnan(m.shellFraction) ? Json(nullptr) : Json(m.shellFraction);
    Json peaks = Json::array();
    for (std::size_t u = 0; u < m.mean.size(); ++u) {
      const auto at = firstArgmax(m.mean[u]);
      peaks.push_back({{"receiver", u}, {"peak", m.mean[u][at]}, {"peakTime", m.grid[at]}});
    }
    e["peaks"] = peaks;
    methods.push_back(e);
  }
  j["methods"] = methods;
  Json pairs = Json::array();
  for (const auto& p : result.report.pairs) {
    Json e = comparisonJson(p.metrics);
    e["method"] = std::string(toString(p.method));
    e["reference"] = std::string(toString(p.reference));
    e["receiver"] = p.receiver;
    pairs.push_back(e);
  }
  j["pairs"] = pairs;
  Json bands = Json::array();
  for (const auto& b : result.report.bands) {
    bands.push_back({{"method", std::string(toString(b.method))},
                     {"reference", std::string(toString(b.reference))},
                     {"receiver", b.receiver},
                     {"fractionWithin3SE", b.fractionWithin3SE},
                     {"maxAbsZ", b.maxAbsZ}});
  }
  j["bands"] = bands;
  if (!result.report.symbols.empty()) {
    Json symbols = Json::array();
    for (const auto& e : result.report.symbols) {
      symbols.push_back({{"method", std::string(toString(e.method))}, {"receiver", e.receiver}, {"bits", e.bits}});
    }
    j["symbols"] = symbols;
  }
  return j;
}

void writeMethodCsv(const std::filesystem::path& path, const MethodResult& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  writeSeriesCsv(out, toString(r.method), r.grid, r.mean, r.stddev);
}

}  // namespace

SeriesComparison compareSeries(std::span<const double> gridA, std::span<const double> a,
                               std::span<const double> gridB, std::span<const double> b) {
  if (gridA.size() != gridB.size() || a.size() != gridA.size() || b.size() != gridB.size()) {
    throw Error(ErrorCode::GridMismatch, "series lengths differ");
  }
  if (a.empty()) throw Error(ErrorCode::GridMismatch, "empty series");
  for (std::size_t t = 0; t < gridA.size(); ++t) {
    if (std::abs(gridA[t] - gridB[t]) > 1e-12 * std::max(1.0, std::abs(gridB[t]))) {
      std::ostringstream msg;
      msg << "grids differ at sample " << t << " (" << gridA[t] << " vs " << gridB[t] << ")";
      throw Error(ErrorCode::GridMismatch, msg.str());
    }
  }
  SeriesComparison c;
  double diff2 = 0.0;
  double ref2 = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    diff2 += (a[t] - b[t]) * (a[t] - b[t]);
    ref2 += b[t] * b[t];
  }
  c.rmse = std::sqrt(diff2 / static_cast<double>(a.size()));
  c.absolute = ref2 == 0.0;
  c.relativeRmse = c.absolute ? c.rmse : std::sqrt(diff2 / ref2);
  const auto pa = firstArgmax(a);
  const auto pb = firstArgmax(b);
  c.peakDifference = a[pa] - b[pb];
  c.peakTimeDifference = gridA[pa] - gridB[pb];
  return c;
}

MethodResult runMethod(const Scenario& scenario, Method method) { return runMethod(scenario, scenario.network, method); }

static NetworkSpec linearSurrogate(NetworkSpec spec) {
  for (auto& rx : spec.receivers) rx.kinetics = LinearKinetics{};
  return spec;
}

MethodResult runMethod(const Scenario& sc, const NetworkSpec& given, Method method) {
  // Mean-only methods solve Michaelis-Menten receivers through their linear
  // surrogate (receiver kplus and kminus).
  const bool surrogate = !isStochastic(method) && !given.isLinear();
  const NetworkSpec surrogateSpec = surrogate ? validate(linearSurrogate(given)) : NetworkSpec{};
  const NetworkSpec& network = surrogate ? surrogateSpec : given;
  const auto started = std::chrono::steady_clock::now();
  MethodResult r;
  r.method = method;
  r.grid = sc.grid;
  r.shellFraction = std::numeric_limits<double>::quiet_NaN();

  switch (method) {
    case Method::tauSim:
    case Method::ssaSim: {
      EnsembleOptions eo;
      eo.replicates = sc.replicates;
      eo.method = method == Method::tauSim ? SimMethod::tauLeap : SimMethod::ssa;
      eo.tau.tau = sc.tau;
      eo.threads = sc.threads;
      eo.keepTrajectories = true;
      auto stats = ensemble(network, eo, sc.seed, sc.grid);
      r.mean = std::move(stats.mean);
      r.stddev = std::move(stats.stddev);
      r.replicates = stats.replicates;
      for (const auto& tr : stats.trajectories) {
        for (std::size_t t = 0; t < tr.emitted.size(); ++t) {
          const double err = std::abs(static_cast<double>(tr.freeTotal[t] + tr.boundTotal[t] - tr.emitted[t])) /
                             std::max(1.0, static_cast<double>(tr.emitted[t]));
          r.conservationError = std::max(r.conservationError, err);
        }
      }
      break;
    }
    case Method::meanOde:
    case Method::covOde: {
      MomentOptions mo = sc.moments;
      if (method == Method::meanOde) mo.keepStates = true;
      auto sol = method == Method::meanOde ? meanOde(network, sc.grid, mo) : covarianceOde(network, sc.grid, mo);
      r.mean = std::move(sol.mean);
      if (method == Method::covOde) r.stddev = std::move(sol.stddev);
      r.conservationError = conservationOf(sol.freeTotal, sol.boundTotal, sol.emitted);
      if (!sol.states.empty()) {
        const auto& last = sol.states.back();
        const std::size_t n = network.lattice.voxelCount();
        r.shellFraction = outerShellFraction(network.lattice, std::span<const double>(last.data(), n));
      }
      break;
    }
    case Method::xferLattice:
    case Method::xferContinuum:
    case Method::xferCutoff:
    case Method::decoupled: {
      auto series = receiverOutputTimeSeries(network, kernelFor(sc, method), sc.grid, method == Method::decoupled,
                                             sc.inversion);
      r.mean = std::move(series.mean);
      break;
    }
  }
  r.linearSurrogate = surrogate;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return r;
}

ComparisonReport buildReport(const Scenario& sc, const std::vector<MethodResult>& results) {
  ComparisonReport rep;
  rep.scenario = sc.name;
  const auto order = orderedMethods(sc);
  std::vector<const MethodResult*> ordered;
  for (auto m : order) {
    for (const auto& r : results) {
      if (r.method == m) ordered.push_back(&r);
    }
  }
  if (!ordered.empty() && (sc.reference || !isStochastic(ordered.front()->method))) rep.reference = ordered.front()->method;

  for (std::size_t i = 0; i < ordered.size(); ++i) {
    for (std::size_t j = i + 1; j < ordered.size(); ++j) {
      const auto& b = *ordered[i];
      const auto& a = *ordered[j];
      for (std::size_t u = 0; u < std::min(a.mean.size(), b.mean.size()); ++u) {
        rep.pairs.push_back({a.method, b.method, u, compareSeries(a.grid, a.mean[u], b.grid, b.mean[u])});
      }
    }
  }
  for (const auto* s : ordered) {
    if (s->stddev.empty() || !isStochastic(s->method)) continue;
    for (const auto* d : ordered) {
      if (isStochastic(d->method)) continue;
      for (std::size_t u = 0; u < std::min(s->mean.size(), d->mean.size()); ++u) {
        BandEntry band{s->method, d->method, u, 0.0, 0.0};
        std::size_t inside = 0;
        const double root = std::sqrt(static_cast<double>(std::max<std::size_t>(s->replicates, 1)));
        for (std::size_t t = 0; t < s->grid.size(); ++t) {
          const double se = s->stddev[u][t] / root;
          const double gap = std::abs(s->mean[u][t] - d->mean[u][t]);
          const double tol = 1e-9 * std::max(1.0, std::abs(d->mean[u][t]));
          if (gap <= 3.0 * se + tol) ++inside;
          if (se > 0.0) band.maxAbsZ = std::max(band.maxAbsZ, gap / se);
        }
        band.fractionWithin3SE = static_cast<double>(inside) / static_cast<double>(s->grid.size());
        rep.bands.push_back(band);
      }
    }
  }
  if (sc.detectThreshold && sc.symbolDuration) {
    for (const auto* r : ordered) {
      for (std::size_t u = 0; u < r->mean.size(); ++u) {
        rep.symbols.push_back({r->method, u, detectSymbols(r->grid, r->mean[u], *sc.detectThreshold, *sc.symbolDuration)});
      }
    }
  }
  return rep;
}

ScenarioResult runScenario(const Scenario& sc, const std::optional<std::filesystem::path>& outDir) {
  ScenarioResult result;
  result.scenario = sc;
  if (outDir) std::filesystem::create_directories(*outDir);

  std::mutex ioMutex;
  auto job = [&](Method m) {
    auto r = runMethod(sc, m);
    if (outDir) {
      std::lock_guard lock(ioMutex);
      writeMethodCsv(*outDir / (sc.name + "-" + std::string(toString(m)) + ".csv"), r);
    }
    return r;
  };

  const bool concurrent = sc.methods.size() > 1 && sc.threads != 1;
  if (concurrent) {
    std::vector<std::future<MethodResult>> futures;
    for (auto m : sc.methods) futures.push_back(std::async(std::launch::async, job, m));
    std::exception_ptr firstError;
    for (auto& f : futures) {
      try {
        result.methods.push_back(f.get());
      } catch (...) {
        if (!firstError) firstError = std::current_exception();
      }
    }
    if (firstError) std::rethrow_exception(firstError);
  } else {
    for (auto m : sc.methods) result.methods.push_back(job(m));
  }

  result.report = buildReport(sc, result.methods);
  if (outDir) {
    std::ofstream out(*outDir / (sc.name + "-report.json"), std::ios::binary);
    out << reportJson(result).dump(2) << '\n';
  }
  return result;
}

NetworkSpec refineNetwork(const Scenario& sc, double delta, long* countScale) {
  const NetworkSpec& base = sc.baseNetwork;
  const double chi = base.lattice.delta;
  if (!(delta > 0.0)) throw Error(ErrorCode::NonDivisibleDelta, "voxel edge must be positive");
  const double ratio = chi / delta;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * ratio) {
    std::ostringstream msg;
    msg << "voxel edge " << delta << " does not divide the device edge " << chi;
    throw Error(ErrorCode::NonDivisibleDelta, msg.str());
  }
  const int m = static_cast<int>(n);
  auto refine = [m](const std::vector<Voxel>& voxels) {
    std::vector<Voxel> out;
    for (const auto& v : voxels) {
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c) out.push_back({v.i * m + a, v.j * m + b, v.k * m + c});
    }
    std::sort(out.begin(), out.end());
    return out;
  };
  NetworkSpec net = base;
  net.lattice.delta = chi / static_cast<double>(n);
  const long scale = n * n * n;
  for (auto& tx : net.transmitters) {
    tx.voxels = refine(tx.voxels);
    for (auto& e : tx.schedule.events) e.count *= scale;
    for (auto& train : tx.schedule.trains) train.count *= scale;
  }
  for (auto& rx : net.receivers) {
    rx.voxels = refine(rx.voxels);
  }
  if (sc.autoExtent) {
    // Clearance is kept in base voxels of physical length.
    net = withClearance(std::move(net), sc.clearance * m);
  } else {
    for (auto& e : net.lattice.extent) e *= m;
  }
  validate(net);
  if (countScale) *countScale = scale;
  return net;
}

SweepResult sweepDelta(const Scenario& sc, const std::optional<std::filesystem::path>& outDir) {
  if (sc.sweepDeltas.empty()) throw Error(ErrorCode::ConfigParseError, "sweep.deltas is empty");
  for (auto m : sc.methods) {
    if (isStochastic(m) || m == Method::covOde) {
      throw Error(ErrorCode::ConfigParseError, "the delta sweep runs mean-only methods; remove " + std::string(toString(m)));
    }
  }
  SweepResult result;
  result.scenario = sc;
  if (outDir) std::filesystem::create_directories(*outDir);
  for (double delta : sc.sweepDeltas) {
    long scale = 1;
    const NetworkSpec net = refineNetwork(sc, delta, &scale);
    SweepLevel level;
    level.delta = net.lattice.delta;
    level.voxelsPerDevice = static_cast<std::size_t>(scale);
    for (auto m : sc.methods) {
      auto r = runMethod(sc, net, m);
      for (auto& row : r.mean)
        for (auto& v : row) v /= static_cast<double>(scale);
      if (outDir) {
        std::ostringstream name;
        name << sc.name << "-n" << std::lround(std::cbrt(static_cast<double>(scale))) << '-' << toString(m) << ".csv";
        writeMethodCsv(*outDir / name.str(), r);
      }
      level.methods.push_back(std::move(r));
    }
    result.levels.push_back(std::move(level));
  }
  result.successiveRmse.resize(sc.methods.size());
  for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
    for (std::size_t l = 1; l < result.levels.size(); ++l) {
      const auto& a = result.levels[l].methods[mi];
      const auto& b = result.levels[l - 1].methods[mi];
      std::vector<double> row;
      for (std::size_t u = 0; u < a.mean.size(); ++u) row.push_back(compareSeries(a.grid, a.mean[u], b.grid, b.mean[u]).relativeRmse);
      result.successiveRmse[mi].push_back(row);
    }
  }
  if (outDir) {
    Json j;
    j["scenario"] = sc.name;
    Json levels = Json::array();
    for (const auto& l : result.levels) levels.push_back({{"delta", l.delta}, {"voxelsPerDevice", l.voxelsPerDevice}});
    j["levels"] = levels;
    Json table = Json::array();
    for (std::size_t mi = 0; mi < sc.methods.size(); ++mi) {
      for (std::size_t l = 0; l < result.successiveRmse[mi].size(); ++l) {
        table.push_back({{"method", std::string(toString(sc.methods[mi]))},
                         {"delta", result.levels[l + 1].delta},
                         {"previousDelta", result.levels[l].delta},
                         {"relativeRmse", result.successiveRmse[mi][l]}});
      }
    }
    j["convergence"] = table;
    std::ofstream out(*outDir / (sc.name + "-sweep.json"), std::ios::binary);
    out << j.dump(2) << '\n';
  }
  return result;
}

std::vector<int> detectSymbols(std::span<const double> times, std::span<const double> values, double threshold,
                               double symbolDuration) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold must be > 0");
  if (!(symbolDuration > 0.0)) throw Error(ErrorCode::InvalidArgument, "symbol duration must be > 0");
  if (times.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "times and values differ in length");
  if (times.empty()) throw Error(ErrorCode::EmptyWindow, "empty series");
  const double last = times.back();
  const auto windows = static_cast<std::size_t>(std::max(1.0, std::ceil(last / symbolDuration - 1e-9)));
  std::vector<double> peak(windows, -std::numeric_limits<double>::infinity());
  std::vector<bool> seen(windows, false);
  for (std::size_t t = 0; t < times.size(); ++t) {
    if (times[t] < 0.0) continue;
    auto m = static_cast<std::size_t>(std::floor(times[t] / symbolDuration + 1e-9));
    m = std::min(m, windows - 1);
    seen[m] = true;
    peak[m] = std::max(peak[m], values[t]);
  }
  std::vector<int> symbols(windows);
  for (std::size_t m = 0; m < windows; ++m) {
    if (!seen[m]) {
      std::ostringstream msg;
      msg << "symbol window " << m << " holds no sample";
      throw Error(ErrorCode::EmptyWindow, msg.str());
    }
    symbols[m] = peak[m] >= threshold ? 1 : 0;
  }
  return symbols;
}

}  // namespace mcnet
