#include "mcnet/cme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "mcnet/reaction_network.hpp"

namespace mcnet {

namespace odeint = boost::numeric::odeint;

namespace {

struct Transition {
  std::size_t from;
  std::size_t to;  // == states for the sink
  double rate;
};

}  // namespace

CmeSolution cmeExact(const NetworkSpec& spec, std::span<const double> grid, const CmeOptions& options) {
  const auto net = buildNetwork(spec);
  const std::size_t ns = net.speciesCount;
  const auto arrivals = arrivalTimeline(spec);
  for (const auto& tx : spec.transmitters) {
    if (tx.schedule.countModel != CountModel::deterministic) {
      throw Error(ErrorCode::InvalidArgument, "cmeExact supports deterministic emission counts only");
    }
  }
  long total = 0;
  for (const auto& a : arrivals) total += a.count;
  for (const auto& s : net.sites) total = std::max(total, s.enzymes);

  std::vector<long> caps = options.caps;
  if (caps.empty()) caps.assign(ns, total);
  if (caps.size() != ns) throw Error(ErrorCode::InvalidArgument, "caps must have one entry per species");

  std::vector<std::size_t> stride(ns);
  std::size_t states = 1;
  for (std::size_t s = ns; s-- > 0;) {
    stride[s] = states;
    const auto radix = static_cast<std::size_t>(caps[s] + 1);
    if (states > options.maxStates / radix) {
      throw Error(ErrorCode::DimensionCap, "truncated state space exceeds maxStates");
    }
    states *= radix;
  }

  auto decode = [&](std::size_t index, std::vector<long>& q) {
    for (std::size_t s = 0; s < ns; ++s) {
      q[s] = static_cast<long>(index / stride[s]);
      index %= stride[s];
    }
  };

  std::vector<Transition> moves;
  std::vector<double> exitRate(states, 0.0);
  std::vector<long> q(ns);
  for (std::size_t index = 0; index < states; ++index) {
    decode(index, q);
    for (const auto& c : net.channels) {
      const double a = c.propensity(std::span<const long>(q));
      if (!(a > 0.0)) continue;
      exitRate[index] += a;
      bool inside = true;
      std::size_t to = index;
      for (const auto& e : c.change) {
        const long v = q[e.species] + e.delta;
        if (v < 0 || v > caps[e.species]) inside = false;
        to = static_cast<std::size_t>(static_cast<long long>(to) + static_cast<long long>(e.delta) * static_cast<long long>(stride[e.species]));
      }
      moves.push_back({index, inside ? to : states, a});
    }
  }

  using State = std::vector<double>;
  State p(states + 1, 0.0);
  {
    const auto init = net.initialState();
    std::size_t index = 0;
    for (std::size_t s = 0; s < ns; ++s) index += static_cast<std::size_t>(init[s]) * stride[s];
    p[index] = 1.0;
  }
  auto rhs = [&](const State& x, State& dx, double) {
    for (std::size_t i = 0; i < states; ++i) dx[i] = -exitRate[i] * x[i];
    dx[states] = 0.0;
    for (const auto& m : moves) dx[m.to] += m.rate * x[m.from];
  };

  CmeSolution out;
  out.grid.assign(grid.begin(), grid.end());
  out.stateCount = states;
  const std::size_t nu = net.receiverSites.size();
  out.mean.assign(nu, {});
  out.variance.assign(nu, {});
  out.outputPmf.assign(nu, {});

  auto record = [&](const State& x) {
    double kept = 0.0;
    double freeMean = 0.0;
    std::vector<std::vector<double>> pmf(nu);
    for (std::size_t u = 0; u < nu; ++u) {
      long maxOut = 0;
      for (auto site : net.receiverSites[u]) maxOut += caps[net.sites[site].complexSpecies];
      pmf[u].assign(static_cast<std::size_t>(maxOut + 1), 0.0);
    }
    for (std::size_t i = 0; i < states; ++i) {
      if (x[i] == 0.0) continue;
      decode(i, q);
      kept += x[i];
      freeMean += x[i] * net.freeTotal(std::span<const long>(q));
      for (std::size_t u = 0; u < nu; ++u) pmf[u][static_cast<std::size_t>(net.receiverOutput(std::span<const long>(q), u))] += x[i];
    }
    for (std::size_t u = 0; u < nu; ++u) {
      double m1 = 0.0;
      double m2 = 0.0;
      for (std::size_t k = 0; k < pmf[u].size(); ++k) {
        m1 += static_cast<double>(k) * pmf[u][k];
        m2 += static_cast<double>(k * k) * pmf[u][k];
      }
      out.mean[u].push_back(m1);
      out.variance[u].push_back(m2 - m1 * m1);
      out.outputPmf[u].push_back(std::move(pmf[u]));
    }
    out.freeMean.push_back(freeMean);
    out.totalMass.push_back(kept);
    out.lostMass.push_back(x[states]);
    if (x[states] > options.massTolerance) {
      std::ostringstream msg;
      msg << "probability mass " << x[states] << " left the truncated space";
      throw Error(ErrorCode::TruncationMassExceeded, msg.str());
    }
  };

  auto applyArrival = [&](const Arrival& a, State& x) {
    const auto split = splitUniform(a.count, net.transmitterVoxels[a.transmitter]);
    const auto& species = net.transmitterSpecies[a.transmitter];
    State shifted(states + 1, 0.0);
    shifted[states] = x[states];
    for (std::size_t i = 0; i < states; ++i) {
      if (x[i] == 0.0) continue;
      decode(i, q);
      bool inside = true;
      std::size_t to = i;
      for (std::size_t m = 0; m < species.size(); ++m) {
        if (q[species[m]] + split[m] > caps[species[m]]) inside = false;
        to += static_cast<std::size_t>(split[m]) * stride[species[m]];
      }
      shifted[inside ? to : states] += x[i];
    }
    x.swap(shifted);
  };

  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!(grid[n] >= 0.0) || grid[n] > spec.horizon || (n && !(grid[n] > grid[n - 1]))) {
      throw Error(ErrorCode::NonMonotoneTimes, "grid must be ascending inside [0, horizon]");
    }
  }

  auto controlled = odeint::make_controlled(options.atol, options.rtol, odeint::runge_kutta_dopri5<State>());
  double t = 0.0;
  std::size_t ia = 0;
  std::size_t ig = 0;
  while (true) {
    while (ia < arrivals.size() && arrivals[ia].time <= t) applyArrival(arrivals[ia++], p);
    while (ig < grid.size() && grid[ig] <= t) {
      record(p);
      ++ig;
    }
    if (ig == grid.size()) break;
    double target = grid[ig];
    if (ia < arrivals.size()) target = std::min(target, arrivals[ia].time);
    odeint::integrate_adaptive(controlled, rhs, p, t, target, std::min(1e-3, target - t));
    controlled.reset();
    t = target;
  }
  return out;
}

}  // namespace mcnet
