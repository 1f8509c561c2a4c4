#include "mcnet/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace mcnet {

namespace {

[[noreturn]] void fail(std::string_view origin, std::size_t line, const std::string& message) {
  std::ostringstream msg;
  msg << origin;
  if (line) msg << ':' << line;
  msg << ": " << message;
  throw Error(ErrorCode::ConfigParseError, msg.str());
}

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> tokens(std::string_view s, std::string_view separators = " \t,") {
  std::vector<std::string> out;
  std::string current;
  for (char ch : s) {
    if (separators.find(ch) != std::string_view::npos) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

double toDouble(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigParseError, "not a number: '" + s + "'");
  }
  if (used != s.size()) throw Error(ErrorCode::ConfigParseError, "not a number: '" + s + "'");
  return v;
}

long toLong(const std::string& s) {
  long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) {
    // Accept integral values written in floating notation such as 1e3.
    const double d = toDouble(s);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw Error(ErrorCode::ConfigParseError, "not an integer: '" + s + "'");
    return static_cast<long>(d);
  }
  return v;
}

std::vector<double> numbers(std::string_view s) {
  std::vector<double> out;
  for (const auto& t : tokens(s)) out.push_back(toDouble(t));
  return out;
}

std::vector<Voxel> parseVoxels(std::string_view s) {
  std::vector<Voxel> out;
  for (const auto& group : tokens(s, ";")) {
    const auto v = tokens(group, " \t,[]()");
    if (v.size() != 3) throw Error(ErrorCode::ConfigParseError, "voxel needs three integers: '" + trim(group) + "'");
    out.push_back({static_cast<int>(toLong(v[0])), static_cast<int>(toLong(v[1])), static_cast<int>(toLong(v[2]))});
  }
  return out;
}

// Expands "cube(x, y, z, n)" into the n^3 block with lowest corner (x, y, z).
std::vector<Voxel> parseDeviceVoxels(std::string_view s) {
  const std::string text = trim(s);
  static const std::regex cube(R"(^cube\s*\(([^)]*)\)$)");
  std::smatch m;
  if (std::regex_match(text, m, cube)) {
    const auto args = tokens(m[1].str());
    if (args.size() != 4) throw Error(ErrorCode::ConfigParseError, "cube(x, y, z, n) takes four integers");
    const int x = static_cast<int>(toLong(args[0]));
    const int y = static_cast<int>(toLong(args[1]));
    const int z = static_cast<int>(toLong(args[2]));
    const int n = static_cast<int>(toLong(args[3]));
    std::vector<Voxel> out;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) out.push_back({x + i, y + j, z + k});
    return out;
  }
  return parseVoxels(text);
}

Kinetics parseKinetics(std::string_view s) {
  const std::string text = trim(s);
  if (text == "linear") return LinearKinetics{};
  static const std::regex mm(R"(^(mm|michaelisMenten)\s*\(([^)]*)\)$)");
  std::smatch m;
  if (!std::regex_match(text, m, mm)) throw Error(ErrorCode::ConfigParseError, "kinetics must be linear or mm(g1plus, g1minus, g2, g3, eTotal)");
  const auto args = tokens(m[2].str());
  if (args.size() != 5) throw Error(ErrorCode::ConfigParseError, "mm(...) takes five values");
  MichaelisMenten k;
  k.g1plus = toDouble(args[0]);
  k.g1minus = toDouble(args[1]);
  k.g2 = toDouble(args[2]);
  k.g3 = toDouble(args[3]);
  k.eTotal = toLong(args[4]);
  return k;
}

template <typename T>
T& slot(std::vector<T>& v, std::size_t index) {
  if (index >= 4096) throw Error(ErrorCode::ConfigParseError, "device index too large");
  if (v.size() <= index) v.resize(index + 1);
  return v[index];
}

bool parseBool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::ConfigParseError, "not a boolean: '" + s + "'");
}

}  // namespace

std::string_view toString(Method method) {
  switch (method) {
    case Method::tauSim: return "tauSim";
    case Method::ssaSim: return "ssaSim";
    case Method::meanOde: return "meanOde";
    case Method::covOde: return "covOde";
    case Method::xferLattice: return "xferLattice";
    case Method::xferContinuum: return "xferContinuum";
    case Method::xferCutoff: return "xferCutoff";
    case Method::decoupled: return "decoupled";
  }
  return "unknown";
}

std::optional<Method> parseMethod(std::string_view name) {
  for (auto m : {Method::tauSim, Method::ssaSim, Method::meanOde, Method::covOde, Method::xferLattice,
                 Method::xferContinuum, Method::xferCutoff, Method::decoupled}) {
    if (toString(m) == name) return m;
  }
  return std::nullopt;
}

bool isStochastic(Method method) { return method == Method::tauSim || method == Method::ssaSim; }

EmissionSchedule parseSchedule(std::string_view text) {
  EmissionSchedule schedule;
  const std::string s = trim(text);
  if (s.empty() || s == "none") return schedule;
  static const std::regex item(R"(\s*([A-Za-z]+)\s*\(([^)]*)\)\s*;?)");
  auto it = std::sregex_iterator(s.begin(), s.end(), item);
  std::size_t consumed = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (static_cast<std::size_t>(m.position(0)) != consumed) break;
    consumed += static_cast<std::size_t>(m.length(0));
    const std::string kind = m[1].str();
    const auto args = tokens(m[2].str());
    if (kind == "burst") {
      if (args.size() != 4) throw Error(ErrorCode::ConfigParseError, "burst(start, period, count, duration) takes four values");
      schedule.trains.push_back({toDouble(args[0]), toDouble(args[1]), toLong(args[2]), toDouble(args[3])});
    } else if (kind == "event") {
      if (args.size() != 2) throw Error(ErrorCode::ConfigParseError, "event(time, count) takes two values");
      schedule.events.push_back({toDouble(args[0]), toLong(args[1])});
    } else if (kind == "symbols") {
      // symbols(bits, symbolDuration, period, count, onDuration): a burst train at
      // the start of every '1' symbol.
      if (args.size() != 5) throw Error(ErrorCode::ConfigParseError, "symbols(bits, duration, period, count, on) takes five values");
      const double duration = toDouble(args[1]);
      for (std::size_t b = 0; b < args[0].size(); ++b) {
        const char bit = args[0][b];
        if (bit != '0' && bit != '1') throw Error(ErrorCode::ConfigParseError, "symbol bits must be 0 or 1");
        if (bit == '1') schedule.trains.push_back({static_cast<double>(b) * duration, toDouble(args[2]), toLong(args[3]), toDouble(args[4])});
      }
    } else {
      throw Error(ErrorCode::ConfigParseError, "unknown schedule item '" + kind + "'");
    }
  }
  if (consumed != s.size()) throw Error(ErrorCode::ConfigParseError, "cannot parse schedule near '" + s.substr(consumed) + "'");
  return schedule;
}

std::vector<double> parseGrid(std::string_view text) {
  const std::string s = trim(text);
  const auto parts = tokens(s, ":");
  if (parts.size() == 3 && s.find(':') != std::string::npos) {
    const double start = toDouble(trim(parts[0]));
    const double step = toDouble(trim(parts[1]));
    const double stop = toDouble(trim(parts[2]));
    if (!(step > 0.0) || stop < start) throw Error(ErrorCode::ConfigParseError, "grid start:step:stop needs step > 0 and stop >= start");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    std::vector<double> grid;
    for (long m = 0; m <= n; ++m) grid.push_back(start + static_cast<double>(m) * step);
    return grid;
  }
  auto grid = numbers(s);
  if (grid.empty()) throw Error(ErrorCode::ConfigParseError, "empty grid");
  return grid;
}

Scenario parseScenario(std::string_view text, std::string_view origin) {
  Scenario sc;
  sc.kernel.domain = KernelDomain::bounded;
  NetworkSpec& net = sc.baseNetwork;
  net.lattice.extent = {0, 0, 0};
  bool methodsGiven = false;
  bool gridGiven = false;
  bool extentGiven = false;
  Voxel offset{};

  static const std::regex indexed(R"(^(transmitter|receiver)\[(\d+)\]\.(\w+)$)");
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t lineNo = 0;
  std::map<std::string, std::size_t> seenKeys;
  while (std::getline(in, raw)) {
    ++lineNo;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(origin, lineNo, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seenKeys.emplace(key, lineNo).second) fail(origin, lineNo, "duplicate key '" + key + "'");
    try {
      std::smatch m;
      if (std::regex_match(key, m, indexed)) {
        const auto index = static_cast<std::size_t>(std::stoul(m[2].str()));
        const std::string field = m[3].str();
        if (m[1] == "transmitter") {
          auto& tx = slot(net.transmitters, index);
          if (field == "voxel" || field == "voxels") tx.voxels = parseDeviceVoxels(value);
          else if (field == "schedule") {
            const auto model = tx.schedule.countModel;
            tx.schedule = parseSchedule(value);
            tx.schedule.countModel = model;
          } else if (field == "counts") {
            if (value == "deterministic") tx.schedule.countModel = CountModel::deterministic;
            else if (value == "poisson") tx.schedule.countModel = CountModel::poisson;
            else fail(origin, lineNo, "counts must be deterministic or poisson");
          } else fail(origin, lineNo, "unknown transmitter field '" + field + "'");
        } else {
          auto& rx = slot(net.receivers, index);
          if (field == "voxel" || field == "voxels") rx.voxels = parseDeviceVoxels(value);
          else if (field == "kplus") rx.kPlus = toDouble(value);
          else if (field == "kminus") rx.kMinus = toDouble(value);
          else if (field == "kinetics") rx.kinetics = parseKinetics(value);
          else fail(origin, lineNo, "unknown receiver field '" + field + "'");
        }
      } else if (key == "name") sc.name = value;
      else if (key == "lattice.delta") net.lattice.delta = toDouble(value);
      else if (key == "lattice.extent") {
        if (value == "auto") continue;
        const auto e = tokens(value, " \t,x");
        if (e.size() != 3) fail(origin, lineNo, "lattice.extent needs three integers or 'auto'");
        net.lattice.extent = {static_cast<int>(toLong(e[0])), static_cast<int>(toLong(e[1])), static_cast<int>(toLong(e[2]))};
        extentGiven = true;
      } else if (key == "lattice.offset") {
        const auto e = parseVoxels(value);
        if (e.size() != 1) fail(origin, lineNo, "lattice.offset needs three integers");
        offset = e[0];
      } else if (key == "lattice.clearance") sc.clearance = static_cast<int>(toLong(value));
      else if (key == "medium.D") net.lattice.diffusion = toDouble(value);
      else if (key == "run.horizon") net.horizon = toDouble(value);
      else if (key == "run.methods") {
        methodsGiven = true;
        for (const auto& t : tokens(value)) {
          const auto mth = parseMethod(t);
          if (!mth) fail(origin, lineNo, "unknown method '" + t + "'");
          if (std::find(sc.methods.begin(), sc.methods.end(), *mth) == sc.methods.end()) sc.methods.push_back(*mth);
        }
      } else if (key == "run.grid") {
        sc.grid = parseGrid(value);
        gridGiven = true;
      } else if (key == "run.tau") sc.tau = toDouble(value);
      else if (key == "run.replicates") sc.replicates = static_cast<std::size_t>(toLong(value));
      else if (key == "run.seed") sc.seed = static_cast<std::uint64_t>(toLong(value));
      else if (key == "run.threads") sc.threads = static_cast<unsigned>(toLong(value));
      else if (key == "run.reference") {
        const auto mth = parseMethod(value);
        if (!mth) fail(origin, lineNo, "unknown reference method '" + value + "'");
        sc.reference = mth;
      } else if (key == "kernel.quadrature") sc.kernel.quadraturePoints = static_cast<int>(toLong(value));
      else if (key == "kernel.domain") {
        if (value == "bounded") sc.kernel.domain = KernelDomain::bounded;
        else if (value == "free") sc.kernel.domain = KernelDomain::free;
        else fail(origin, lineNo, "kernel.domain must be bounded or free");
      } else if (key == "kernel.form") {
        if (value == "difference") sc.kernel.form = DispersionForm::differenceEquation;
        else if (value == "printed") sc.kernel.form = DispersionForm::printed;
        else fail(origin, lineNo, "kernel.form must be difference or printed");
      } else if (key == "decoupled.kernel") {
        if (value == "continuum") sc.decoupledKernel = KernelKind::continuum;
        else if (value == "lattice") sc.decoupledKernel = KernelKind::lattice;
        else fail(origin, lineNo, "decoupled.kernel must be continuum or lattice");
      } else if (key == "inversion.nodes") sc.inversion.nodes = static_cast<int>(toLong(value));
      else if (key == "inversion.tolerance") sc.inversion.tolerance = toDouble(value);
      else if (key == "moments.cap") sc.moments.dimensionCap = static_cast<std::size_t>(toLong(value));
      else if (key == "moments.rtol") sc.moments.rtol = toDouble(value);
      else if (key == "moments.atol") sc.moments.atol = toDouble(value);
      else if (key == "sweep.deltas") sc.sweepDeltas = numbers(value);
      else if (key == "detect.threshold") sc.detectThreshold = toDouble(value);
      else if (key == "detect.duration") sc.symbolDuration = toDouble(value);
      else if (key == "report.keepStates") sc.moments.keepStates = parseBool(value);
      else fail(origin, lineNo, "unknown key '" + key + "'");
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigParseError && std::string_view(e.what()).find(origin) != std::string_view::npos) throw;
      fail(origin, lineNo, e.what());
    }
  }

  if (!methodsGiven || sc.methods.empty()) fail(origin, 0, "run.methods must name at least one method");
  if (sc.name.empty()) sc.name = "scenario";
  if (!gridGiven) {
    for (int n = 0; n <= 200; ++n) sc.grid.push_back(net.horizon * n / 200.0);
  }
  for (std::size_t n = 0; n < sc.grid.size(); ++n) {
    if (sc.grid[n] < 0.0 || sc.grid[n] > net.horizon * (1.0 + 1e-12) || (n && !(sc.grid[n] > sc.grid[n - 1]))) {
      fail(origin, 0, "run.grid must ascend inside [0, run.horizon]");
    }
    sc.grid[n] = std::min(sc.grid[n], net.horizon);
  }
  if (sc.replicates < 2 && (std::find_if(sc.methods.begin(), sc.methods.end(), isStochastic) != sc.methods.end())) {
    fail(origin, 0, "run.replicates must be >= 2 for stochastic methods");
  }
  if (!(sc.tau > 0.0)) fail(origin, 0, "run.tau must be > 0");
  if (sc.clearance < 0) fail(origin, 0, "lattice.clearance must be >= 0");

  if (offset != Voxel{}) {
    if (!extentGiven) fail(origin, 0, "lattice.offset needs an explicit lattice.extent");
    for (auto& tx : net.transmitters)
      for (auto& v : tx.voxels) v = v + offset;
    for (auto& rx : net.receivers)
      for (auto& v : rx.voxels) v = v + offset;
  }
  sc.autoExtent = !extentGiven;
  sc.network = sc.autoExtent ? withClearance(net, sc.clearance) : net;
  if (sc.autoExtent) sc.baseNetwork.lattice.extent = sc.network.lattice.extent;
  validate(sc.network);
  try {
    validate(sc.kernel);
  } catch (const Error& e) {
    fail(origin, 0, e.what());
  }
  return sc;
}

Scenario loadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigParseError, "cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parseScenario(text.str(), path.string());
}

}  // namespace mcnet
