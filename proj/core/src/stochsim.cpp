#include "mcnet/stochsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace mcnet {

namespace {

using Rng = std::mt19937_64;

double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Open interval (0, 1], for waiting times.
double uniformPositive(Rng& rng) { return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53; }

long samplePoisson(Rng& rng, double mean) {
  if (!(mean > 0.0)) return 0;
  if (mean < 12.0) {
    // Sequential inversion.
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform01(rng);
    long k = 0;
    while (u > cdf && k < 200) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }
  return std::poisson_distribution<long>(mean)(rng);
}

void checkGrid(std::span<const double> grid, double horizon) {
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!(grid[n] >= 0.0) || grid[n] > horizon) {
      throw Error(ErrorCode::InvalidArgument, "sample times must lie in [0, horizon]");
    }
    if (n && !(grid[n] > grid[n - 1])) throw Error(ErrorCode::NonMonotoneTimes, "sample grid must be ascending");
  }
}

// Emission events with their realised counts for one replicate.
struct Realisation {
  std::vector<Arrival> arrivals;
};

Realisation realise(const NetworkSpec& spec, Rng& rng) {
  Realisation out;
  out.arrivals = arrivalTimeline(spec);
  for (auto& a : out.arrivals) {
    if (spec.transmitters[a.transmitter].schedule.countModel == CountModel::poisson) {
      a.count = samplePoisson(rng, static_cast<double>(a.count));
    }
  }
  return out;
}

class Recorder {
 public:
  Recorder(const ReactionNetwork& net, std::size_t samples, bool states, std::uint64_t seed) : net_(net), states_(states) {
    traj_.seed = seed;
    traj_.sampleTimes.reserve(samples);
    traj_.outputs.reserve(samples);
  }

  void record(double t, std::span<const long> q, long emitted) {
    traj_.sampleTimes.push_back(t);
    std::vector<long> out(net_.receiverSites.size());
    for (std::size_t u = 0; u < out.size(); ++u) out[u] = static_cast<long>(net_.receiverOutput(q, u));
    traj_.outputs.push_back(std::move(out));
    traj_.freeTotal.push_back(static_cast<long>(net_.freeTotal(q)));
    traj_.boundTotal.push_back(static_cast<long>(net_.boundTotal(q)));
    traj_.emitted.push_back(emitted);
    if (states_) traj_.states.emplace_back(q.begin(), q.end());
  }

  Trajectory take() { return std::move(traj_); }

 private:
  const ReactionNetwork& net_;
  bool states_;
  Trajectory traj_;
};

long applyArrival(const ReactionNetwork& net, const Arrival& a, std::vector<long>& q) {
  const auto split = splitUniform(a.count, net.transmitterVoxels[a.transmitter]);
  const auto& species = net.transmitterSpecies[a.transmitter];
  for (std::size_t m = 0; m < species.size(); ++m) q[species[m]] += split[m];
  return a.count;
}

// Binomial(n, p) laws for n = 1, 2, ... while the mean n p stays small, for the
// common case of a full step of fixed length. CDFs are stored back to back.
class BinomialTable {
 public:
  explicit BinomialTable(double p) {
    begin_.push_back(0);
    if (!(p > 0.0) || p > 1.0) return;
    for (long n = 1; static_cast<double>(n) * p < 12.0 && n < 4096; ++n) {
      double pk = std::pow(1.0 - p, static_cast<double>(n));
      double c = pk;
      cdf_.push_back(c);
      const double mean = static_cast<double>(n) * p;
      for (long k = 1; k <= n && c < 1.0 - 1e-15; ++k) {
        pk *= (static_cast<double>(n - k + 1) / static_cast<double>(k)) * (p / (1.0 - p));
        c += pk;
        cdf_.push_back(c);
        if (static_cast<double>(k) > mean && pk < 1e-17) break;
      }
      begin_.push_back(cdf_.size());
    }
  }

  // -1 when n is outside the table.
  long sample(long n, Rng& rng) const {
    if (n < 1 || n >= static_cast<long>(begin_.size())) return -1;
    const double* first = cdf_.data() + begin_[static_cast<std::size_t>(n - 1)];
    const double* last = cdf_.data() + begin_[static_cast<std::size_t>(n)];
    const double u = uniform01(rng);
    const double* it = first;
    while (it + 1 < last && u > *it) ++it;
    return static_cast<long>(it - first);
  }

 private:
  std::vector<double> cdf_;
  std::vector<std::size_t> begin_;
};

// Number of n independent molecules that fire a first-order group of total rate
// `rate` within dt: Binomial(n, rate dt), mean n rate dt as in the Poisson leap.
// When rate dt exceeds one the step is cut into equal substeps.
long sampleFirings(Rng& rng, long n, double rate, double dt) {
  const double mean = rate * dt;
  if (!(mean > 0.0) || n == 0) return 0;
  const double substeps = std::ceil(mean);
  const double p = mean / substeps;
  long left = n;
  for (double m = 0; m < substeps && left > 0; m += 1.0) {
    if (p >= 1.0) return n;
    left -= std::binomial_distribution<long>(left, p)(rng);
  }
  return n - left;
}

// Uniform indices in [0, n) peeled off one 64-bit draw as base-n digits, a few at
// a time. Eight digits of n <= 8 leave at least 40 bits of resolution.
__extension__ using Wide = unsigned __int128;

class IndexSource {
 public:
  std::size_t next(Rng& rng, std::size_t n) {
    if (n > 8) return static_cast<std::size_t>((static_cast<Wide>(rng()) * n) >> 64);
    if (left_ == 0) {
      bits_ = rng();
      left_ = 8;
    }
    const auto p = static_cast<Wide>(bits_) * n;
    bits_ = static_cast<std::uint64_t>(p);
    --left_;
    return static_cast<std::size_t>(p >> 64);
  }

 private:
  std::uint64_t bits_ = 0;
  int left_ = 0;
};

// Channels grouped by shared reactant species. First-order groups with a single
// reactant take a fast path: a binomial draw for the number of molecules that
// fire, then a multinomial split over the channels. The mean increment per step
// equals the Poisson leap's, and no count can go negative. Other groups use
// per-channel Poisson draws with step halving on over-consumption.
class TauLeaper {
 public:
  TauLeaper(const ReactionNetwork& net, int maxHalvings, double tau) : net_(net), maxHalvings_(maxHalvings), tau_(tau) {
    const std::size_t ns = net.speciesCount;
    std::vector<std::size_t> parent(ns);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (const auto& c : net.channels) {
      if (c.reactants[1] != kNoSpecies) parent[find(c.reactants[0])] = find(c.reactants[1]);
    }
    std::vector<std::size_t> groupOf(ns, kNoSpecies);
    for (std::size_t j = 0; j < net.channels.size(); ++j) {
      const auto root = find(net.channels[j].reactants[0]);
      if (groupOf[root] == kNoSpecies) {
        groupOf[root] = groups_.size();
        groups_.emplace_back();
      }
      groups_[groupOf[root]].channels.push_back(j);
    }
    std::vector<double> tableRates;
    for (auto& g : groups_) {
      std::vector<std::size_t> species;
      bool linear = true;
      for (auto j : g.channels) {
        const auto& c = net.channels[j];
        if (!c.firstOrder()) linear = false;
        for (auto r : c.reactants) {
          if (r != kNoSpecies && std::find(species.begin(), species.end(), r) == species.end()) species.push_back(r);
        }
      }
      g.species = species;
      g.linear = linear && species.size() == 1;
      for (std::size_t m = 0; m < species.size() && !g.linear; ++m) {
        bool everywhere = true;
        for (auto j : g.channels) {
          const auto& r = net.channels[j].reactants;
          everywhere = everywhere && (r[0] == species[m]) != (r[1] == species[m]);
        }
        if (everywhere) {
          g.anchor = m;
          break;
        }
      }
      if (!g.linear) continue;
      double cumulative = 0.0;
      g.equalRates = true;
      g.simple = true;
      for (auto j : g.channels) {
        const auto& c = net.channels[j];
        cumulative += c.rate;
        g.cumulative.push_back(cumulative);
        if (c.rate != net.channels[g.channels.front()].rate) g.equalRates = false;
        std::size_t dest = kNoSpecies;
        for (const auto& e : c.change) {
          if (e.species == c.reactants[0]) continue;
          if (e.delta != 1 || dest != kNoSpecies) g.simple = false;
          dest = e.species;
        }
        g.dest.push_back(dest);
      }
      g.totalRate = cumulative;
      auto it = std::find(tableRates.begin(), tableRates.end(), cumulative);
      g.table = static_cast<std::size_t>(it - tableRates.begin());
      if (it == tableRates.end()) tableRates.push_back(cumulative);
    }
    for (double rate : tableRates) tables_.emplace_back(rate * tau_);
    delta_.assign(ns, 0);

    // Compact copies of the equal-rate single-destination groups (every diffusion-only
    // voxel), which dominate the work.
    for (std::size_t gi = 0; gi < groups_.size(); ++gi) {
      const auto& g = groups_[gi];
      if (g.linear && g.simple && g.equalRates && g.channels.size() <= 8) {
        Fast f;
        f.species = static_cast<std::uint32_t>(g.species[0]);
        f.group = static_cast<std::uint32_t>(gi);
        f.table = static_cast<std::uint16_t>(g.table);
        f.count = static_cast<std::uint16_t>(g.channels.size());
        f.destBegin = static_cast<std::uint32_t>(fastDest_.size());
        for (auto d : g.dest) fastDest_.push_back(static_cast<std::uint32_t>(d));
        fast_.push_back(f);
      } else {
        slow_.push_back(gi);
      }
    }
  }

  // delta_ is all zero on entry and on exit.
  void step(std::vector<long>& q, double dt, Rng& rng) {
    const bool fullStep = dt == tau_;
    for (const auto& f : fast_) {
      const long n = q[f.species];
      if (n == 0) continue;
      long k = fullStep ? tables_[f.table].sample(n, rng) : -1;
      if (k < 0) k = sampleFirings(rng, n, groups_[f.group].totalRate, dt);
      if (k > 16) {
        delta_[f.species] -= split(groups_[f.group], k, rng);
        continue;
      }
      delta_[f.species] -= k;
      const std::uint32_t* dest = fastDest_.data() + f.destBegin;
      for (long m = 0; m < k; ++m) ++delta_[dest[indices_.next(rng, f.count)]];
    }
    for (auto gi : slow_) {
      const auto& g = groups_[gi];
      if (g.linear) {
        const long n = q[g.species[0]];
        if (n == 0) continue;
        long k = fullStep ? tables_[g.table].sample(n, rng) : -1;
        if (k < 0) k = sampleFirings(rng, n, g.totalRate, dt);
        delta_[g.species[0]] -= split(g, k, rng);
      } else {
        local_.clear();
        for (auto s : g.species) local_.push_back(q[s]);
        leapGeneral(g, dt, 0, rng);
        for (std::size_t m = 0; m < g.species.size(); ++m) delta_[g.species[m]] += local_[m] - q[g.species[m]];
      }
    }
    for (std::size_t s = 0; s < q.size(); ++s) {
      q[s] += delta_[s];
      delta_[s] = 0;
    }
  }

 private:
  struct Group {
    std::vector<std::size_t> channels;
    std::vector<std::size_t> species;
    bool linear = false;
    bool equalRates = false;
    bool simple = false;  // every channel moves one molecule to one destination
    std::vector<std::size_t> dest;
    std::vector<double> cumulative;
    double totalRate = 0.0;
    std::size_t table = 0;
    // Slot of a species every channel consumes exactly once, or npos.
    std::size_t anchor = static_cast<std::size_t>(-1);
  };

  void credit(const Group& g, std::size_t c, long firings) {
    if (g.simple) {
      delta_[g.dest[c]] += firings;
      return;
    }
    const auto& ch = net_.channels[g.channels[c]];
    for (const auto& e : ch.change) {
      if (e.species == ch.reactants[0] || e.species == ch.reactants[1]) continue;
      delta_[e.species] += static_cast<long>(e.delta) * firings;
    }
  }

  [[noreturn]] void rejectLimit() const {
    std::ostringstream msg;
    msg << "negative count persists after " << maxHalvings_ << " step halvings";
    throw Error(ErrorCode::StepRejectionLimit, msg.str());
  }

  // Multinomial split of k firings over the group's channels.
  long split(const Group& g, long k, Rng& rng) {
    if (k == 0) return 0;
    const std::size_t nc = g.channels.size();
    if (nc == 1) {
      credit(g, 0, k);
    } else if (k <= 16) {
      for (long m = 0; m < k; ++m) {
        std::size_t c = 0;
        if (g.equalRates) {
          c = indices_.next(rng, nc);
        } else {
          const double u = uniform01(rng) * g.totalRate;
          while (c + 1 < nc && u >= g.cumulative[c]) ++c;
        }
        credit(g, c, 1);
      }
    } else {
      long left = k;
      double restRate = g.totalRate;
      for (std::size_t c = 0; c < nc && left > 0; ++c) {
        const double rate = g.cumulative[c] - (c ? g.cumulative[c - 1] : 0.0);
        long take = left;
        if (c + 1 < nc) {
          const double p = std::clamp(rate / restRate, 0.0, 1.0);
          take = std::binomial_distribution<long>(left, p)(rng);
        }
        if (take) credit(g, c, take);
        left -= take;
        restRate -= rate;
      }
    }
    return k;
  }

  // Per-channel draws on local reactant counts (local_ aligned with g.species).
  // With an anchor species the firings are Binomial(n_anchor, A dt / n_anchor)
  // split over the channels in proportion to their propensities A_j, which keeps
  // the mean step of the Poisson leap; otherwise each channel draws Poisson(A_j dt).
  // Over-consumption of any reactant re-draws the step as two halves.
  void leapGeneral(const Group& g, double dt, int depth, Rng& rng) {
    const std::size_t nc = g.channels.size();
    auto slotOf = [&](std::size_t species) {
      return static_cast<std::size_t>(std::find(g.species.begin(), g.species.end(), species) - g.species.begin());
    };
    std::vector<double> a(nc);
    double total = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& ch = net_.channels[g.channels[c]];
      a[c] = ch.rate * static_cast<double>(local_[slotOf(ch.reactants[0])]);
      if (ch.reactants[1] != kNoSpecies) a[c] *= static_cast<double>(local_[slotOf(ch.reactants[1])]);
      total += a[c];
    }
    if (!(total > 0.0)) return;
    std::vector<long> draws(nc, 0);
    if (g.anchor != static_cast<std::size_t>(-1)) {
      const long n = local_[g.anchor];
      const long k = sampleFirings(rng, n, total / static_cast<double>(n), dt);
      long left = k;
      double rest = total;
      for (std::size_t c = 0; c < nc && left > 0; ++c) {
        long take = left;
        if (c + 1 < nc) take = std::binomial_distribution<long>(left, std::clamp(a[c] / rest, 0.0, 1.0))(rng);
        draws[c] = take;
        left -= take;
        rest -= a[c];
      }
    } else {
      for (std::size_t c = 0; c < nc; ++c) draws[c] = samplePoisson(rng, a[c] * dt);
    }
    std::vector<long> consumed(g.species.size(), 0);
    for (std::size_t c = 0; c < nc; ++c) {
      for (auto r : net_.channels[g.channels[c]].reactants) {
        if (r != kNoSpecies) consumed[slotOf(r)] += draws[c];
      }
    }
    bool ok = true;
    for (std::size_t m = 0; m < consumed.size(); ++m) ok = ok && consumed[m] <= local_[m];
    if (!ok) {
      if (depth >= maxHalvings_) rejectLimit();
      leapGeneral(g, 0.5 * dt, depth + 1, rng);
      leapGeneral(g, 0.5 * dt, depth + 1, rng);
      return;
    }
    for (std::size_t m = 0; m < consumed.size(); ++m) local_[m] -= consumed[m];
    for (std::size_t c = 0; c < nc; ++c) {
      if (draws[c]) credit(g, c, draws[c]);
    }
  }

  const ReactionNetwork& net_;
  int maxHalvings_;
  double tau_;
  struct Fast {
    std::uint32_t species;
    std::uint32_t group;
    std::uint32_t destBegin;
    std::uint16_t table;
    std::uint16_t count;
  };

  std::vector<Group> groups_;
  std::vector<Fast> fast_;
  std::vector<std::uint32_t> fastDest_;
  std::vector<std::size_t> slow_;
  IndexSource indices_;
  std::vector<BinomialTable> tables_;
  std::vector<long> delta_;
  std::vector<long> local_;
};

}  // namespace

Trajectory simulateTau(const NetworkSpec& spec, const TauOptions& options, std::uint64_t seed,
                       std::span<const double> grid) {
  const auto net = buildNetwork(spec);
  return simulateTau(net, spec, options, seed, grid);
}

Trajectory simulateTau(const ReactionNetwork& net, const NetworkSpec& spec, const TauOptions& options,
                       std::uint64_t seed, std::span<const double> grid) {
  if (!(options.tau > 0.0)) throw Error(ErrorCode::NonPositiveParameter, "tau must be > 0");
  checkGrid(grid, spec.horizon);
  Rng rng(seed);
  const auto real = realise(spec, rng);
  TauLeaper leaper(net, options.maxHalvings, options.tau);
  Recorder rec(net, grid.size(), options.recordStates, seed);

  auto q = net.initialState();
  long emitted = 0;
  double t = 0.0;
  std::size_t ia = 0;
  std::size_t ig = 0;
  const double snap = options.tau * 1e-9;
  while (true) {
    while (ia < real.arrivals.size() && real.arrivals[ia].time <= t) emitted += applyArrival(net, real.arrivals[ia++], q);
    while (ig < grid.size() && grid[ig] <= t) rec.record(grid[ig++], q, emitted);
    if (ig == grid.size()) break;
    double next = std::min(t + options.tau, grid[ig]);
    if (ia < real.arrivals.size()) next = std::min(next, real.arrivals[ia].time);
    // Land exactly on a nearby boundary instead of leaving a sliver step.
    if (grid[ig] - next < snap) next = grid[ig];
    if (ia < real.arrivals.size() && real.arrivals[ia].time - next < snap) next = std::max(next, real.arrivals[ia].time);
    // A step that ends within rounding of t + tau is a full step.
    const double dt = std::abs(next - t - options.tau) < snap ? options.tau : next - t;
    leaper.step(q, dt, rng);
    t = next;
  }
  return rec.take();
}

Trajectory simulateSSA(const NetworkSpec& spec, std::uint64_t seed, std::span<const double> grid,
                       const SsaOptions& options) {
  const auto net = buildNetwork(spec);
  return simulateSSA(net, spec, seed, grid, options);
}

Trajectory simulateSSA(const ReactionNetwork& net, const NetworkSpec& spec, std::uint64_t seed,
                       std::span<const double> grid, const SsaOptions& options) {
  checkGrid(grid, spec.horizon);
  Rng rng(seed);
  const auto real = realise(spec, rng);
  Recorder rec(net, grid.size(), options.recordStates, seed);

  const std::size_t nc = net.channels.size();
  std::vector<std::vector<std::size_t>> dependents(net.speciesCount);
  for (std::size_t j = 0; j < nc; ++j) {
    for (auto r : net.channels[j].reactants) {
      if (r != kNoSpecies) dependents[r].push_back(j);
    }
  }

  auto q = net.initialState();
  std::vector<double> a(nc, 0.0);
  double total = 0.0;
  auto refresh = [&] {
    total = 0.0;
    for (std::size_t j = 0; j < nc; ++j) total += a[j] = net.channels[j].propensity(std::span<const long>(q));
  };
  refresh();

  long emitted = 0;
  double t = 0.0;
  std::size_t ia = 0;
  std::size_t ig = 0;
  std::uint64_t events = 0;
  while (true) {
    bool arrived = false;
    while (ia < real.arrivals.size() && real.arrivals[ia].time <= t) {
      emitted += applyArrival(net, real.arrivals[ia++], q);
      arrived = true;
    }
    if (arrived) refresh();
    while (ig < grid.size() && grid[ig] <= t) rec.record(grid[ig++], q, emitted);
    if (ig == grid.size()) break;
    double boundary = grid[ig];
    if (ia < real.arrivals.size()) boundary = std::min(boundary, real.arrivals[ia].time);

    const double wait = total > 0.0 ? -std::log(uniformPositive(rng)) / total : INFINITY;
    if (t + wait >= boundary) {
      // Memoryless: restart the clock at the boundary.
      t = boundary;
      continue;
    }
    t += wait;
    double u = uniform01(rng) * total;
    std::size_t j = 0;
    for (; j + 1 < nc; ++j) {
      if (u < a[j]) break;
      u -= a[j];
    }
    while (a[j] <= 0.0 && j > 0) --j;  // guard against rounding past the last enabled channel
    for (const auto& e : net.channels[j].change) q[e.species] += e.delta;
    for (const auto& e : net.channels[j].change) {
      for (auto d : dependents[e.species]) {
        const double fresh = net.channels[d].propensity(std::span<const long>(q));
        total += fresh - a[d];
        a[d] = fresh;
      }
    }
    if (++events % 4096 == 0) refresh();
    if (events > options.maxEvents) throw Error(ErrorCode::InvalidArgument, "SSA event budget exhausted");
  }
  return rec.take();
}

std::uint64_t replicateSeed(std::uint64_t baseSeed, std::size_t index) {
  std::uint64_t z = baseSeed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double EnsembleStats::standardError(std::size_t receiver, std::size_t time) const {
  return stddev[receiver][time] / std::sqrt(static_cast<double>(replicates));
}

EnsembleStats ensemble(const NetworkSpec& spec, const EnsembleOptions& options, std::uint64_t baseSeed,
                       std::span<const double> grid) {
  if (options.replicates < 2) throw Error(ErrorCode::InvalidArgument, "ensemble needs at least 2 replicates");
  const auto net = buildNetwork(spec);
  std::vector<Trajectory> runs(options.replicates);

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, options.replicates));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t r = next++; r < options.replicates && !failed; r = next++) {
      try {
        const auto seed = replicateSeed(baseSeed, r);
        runs[r] = options.method == SimMethod::tauLeap ? simulateTau(net, spec, options.tau, seed, grid)
                                                       : simulateSSA(net, spec, seed, grid, options.ssa);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned n = 0; n < threads; ++n) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  EnsembleStats stats;
  stats.sampleTimes.assign(grid.begin(), grid.end());
  stats.replicates = options.replicates;
  const std::size_t nu = net.receiverSites.size();
  const std::size_t nt = grid.size();
  stats.mean.assign(nu, std::vector<double>(nt, 0.0));
  stats.stddev.assign(nu, std::vector<double>(nt, 0.0));
  const double n = static_cast<double>(options.replicates);
  for (std::size_t u = 0; u < nu; ++u) {
    for (std::size_t t = 0; t < nt; ++t) {
      double mean = 0.0;
      for (const auto& run : runs) mean += static_cast<double>(run.outputs[t][u]);
      mean /= n;
      double ss = 0.0;
      for (const auto& run : runs) {
        const double d = static_cast<double>(run.outputs[t][u]) - mean;
        ss += d * d;
      }
      stats.mean[u][t] = mean;
      stats.stddev[u][t] = std::sqrt(ss / (n - 1.0));
    }
  }
  if (options.keepTrajectories) stats.trajectories = std::move(runs);
  return stats;
}

}  // namespace mcnet
