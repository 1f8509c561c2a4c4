#include "mcnet/moments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/numeric/odeint.hpp>

namespace mcnet {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::vector<double>;

void requireLinear(const NetworkSpec& spec) {
  if (!spec.isLinear()) throw Error(ErrorCode::NonlinearKinetics, "moment equations need linear receiver kinetics");
}

void checkGrid(std::span<const double> grid, double horizon) {
  for (std::size_t n = 0; n < grid.size(); ++n) {
    if (!(grid[n] >= 0.0) || grid[n] > horizon) throw Error(ErrorCode::InvalidArgument, "grid outside [0, horizon]");
    if (n && !(grid[n] > grid[n - 1])) throw Error(ErrorCode::NonMonotoneTimes, "grid must be ascending");
  }
}

// Emission jump of one arrival in mean and covariance terms.
struct Jump {
  std::vector<std::size_t> species;
  std::vector<double> mean;  // E[k]
  Eigen::MatrixXd cov;       // cov(k), zero for deterministic counts
};

Jump arrivalJump(const ReactionNetwork& net, const NetworkSpec& spec, const Arrival& a) {
  Jump j;
  j.species = net.transmitterSpecies[a.transmitter];
  const auto& voxels = net.transmitterVoxels[a.transmitter];
  const std::size_t n = voxels.size();
  j.mean.assign(n, 0.0);
  j.cov = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (spec.transmitters[a.transmitter].schedule.countModel == CountModel::deterministic) {
    const auto split = splitUniform(a.count, voxels);
    for (std::size_t m = 0; m < n; ++m) j.mean[m] = static_cast<double>(split[m]);
    return j;
  }
  // K ~ Poisson(lambda) split by the remainder rule; enumerate the law of the split.
  const double lambda = static_cast<double>(a.count);
  const long top = static_cast<long>(lambda + 14.0 * std::sqrt(lambda) + 40.0);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (long k = 0; k <= top; ++k) {
    const double p = std::exp(static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
    if (p == 0.0) continue;
    const auto split = splitUniform(k, voxels);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t m = 0; m < n; ++m) v[static_cast<Eigen::Index>(m)] = static_cast<double>(split[m]);
    first += p * v;
    second += p * v * v.transpose();
  }
  for (std::size_t m = 0; m < n; ++m) j.mean[m] = first[static_cast<Eigen::Index>(m)];
  j.cov = second - first * first.transpose();
  return j;
}

// Integrates a piecewise-smooth system between breakpoints (arrivals and grid
// times). At each breakpoint arrivals are applied before the sample is taken.
class Segmenter {
 public:
  using Rhs = std::function<void(const State&, State&, double)>;

  Segmenter(const MomentOptions& options) : options_(options) {}

  template <typename ApplyArrival, typename Record>
  std::size_t run(const Rhs& rhs, State& x, std::span<const Arrival> arrivals, std::span<const double> grid,
                  ApplyArrival&& apply, Record&& record) {
    auto stepper = odeint::make_controlled(options_.atol, options_.rtol, odeint::runge_kutta_dopri5<State>());
    auto system = [&](const State& y, State& dydt, double t) { rhs(y, dydt, t); };
    double t = 0.0;
    double dt = 1e-6;
    std::size_t ia = 0;
    std::size_t ig = 0;
    std::size_t steps = 0;
    while (true) {
      bool jumped = false;
      while (ia < arrivals.size() && arrivals[ia].time <= t) {
        apply(arrivals[ia++], x, t);
        jumped = true;
      }
      if (jumped) stepper.reset();
      while (ig < grid.size() && grid[ig] <= t) record(ig++, x);
      if (ig == grid.size()) break;
      double target = grid[ig];
      if (ia < arrivals.size()) target = std::min(target, arrivals[ia].time);
      std::size_t rejections = 0;
      while (t < target) {
        double h = std::min(dt, target - t);
        const bool last = h == target - t;
        const double before = t;
        if (stepper.try_step(system, x, t, h) == odeint::success) {
          ++steps;
          rejections = 0;
          // Keep the proposed size for the next step unless it was clipped.
          if (!last || h > dt) dt = h;
          if (last) t = target;  // avoid drift below the breakpoint
          if (!(t > before)) throw Error(ErrorCode::IntegratorFailure, "integrator made no progress");
        } else {
          dt = h;
          if (++rejections > 200 || !(dt > 1e-15 * std::max(1.0, t))) {
            std::ostringstream msg;
            msg << "step size underflow at t = " << t;
            throw Error(ErrorCode::IntegratorFailure, msg.str());
          }
        }
        if (steps > options_.maxSteps) throw Error(ErrorCode::IntegratorFailure, "step budget exhausted");
      }
    }
    return steps;
  }

 private:
  const MomentOptions& options_;
};

struct Observer {
  const ReactionNetwork& net;
  MomentSolution& out;
  bool keepStates;

  void sample(std::size_t, const double* mean, double emitted) {
    std::span<const double> q(mean, net.speciesCount);
    for (std::size_t u = 0; u < net.receiverSites.size(); ++u) out.mean[u].push_back(net.receiverOutput(q, u));
    out.freeTotal.push_back(net.freeTotal(q));
    out.boundTotal.push_back(net.boundTotal(q));
    out.emitted.push_back(emitted);
    if (keepStates) out.states.push_back(Eigen::Map<const Eigen::VectorXd>(mean, static_cast<Eigen::Index>(net.speciesCount)));
  }
};

inline std::size_t packedIndex(std::size_t i, std::size_t j, std::size_t n) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + j;  // upper triangle, row-major
}

void unpack(const double* packed, std::size_t n, Eigen::MatrixXd& full) {
  std::size_t p = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j, ++p) {
      full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = packed[p];
      full(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = packed[p];
    }
  }
}

}  // namespace

SparseMatrix buildGenerator(const NetworkSpec& spec) {
  requireLinear(spec);
  return buildGenerator(buildNetwork(spec));
}

SparseMatrix buildGenerator(const ReactionNetwork& net) {
  std::vector<Eigen::Triplet<double>> entries;
  for (const auto& c : net.channels) {
    if (!c.firstOrder()) throw Error(ErrorCode::NonlinearKinetics, "second-order channel in generator");
    for (const auto& e : c.change) {
      entries.emplace_back(static_cast<int>(e.species), static_cast<int>(c.reactants[0]), e.delta * c.rate);
    }
  }
  const auto n = static_cast<Eigen::Index>(net.speciesCount);
  SparseMatrix a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());
  a.makeCompressed();
  return a;
}

double psdRatio(const Eigen::MatrixXd& sigma) {
  const double trace = sigma.trace();
  if (sigma.size() == 0 || !(std::abs(trace) > 0.0)) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() / trace;
}

MomentSolution meanOde(const NetworkSpec& spec, std::span<const double> grid, const MomentOptions& options) {
  requireLinear(spec);
  checkGrid(grid, spec.horizon);
  const auto net = buildNetwork(spec);
  const SparseMatrix a = buildGenerator(net);
  const std::size_t n = net.speciesCount;

  MomentSolution out;
  out.grid.assign(grid.begin(), grid.end());
  out.mean.assign(net.receiverSites.size(), {});
  Observer obs{net, out, options.keepStates};

  State x(n, 0.0);
  double emitted = 0.0;
  const auto arrivals = arrivalTimeline(spec);
  auto rhs = [&](const State& y, State& dydt, double) {
    Eigen::Map<const Eigen::VectorXd> ym(y.data(), static_cast<Eigen::Index>(n));
    Eigen::Map<Eigen::VectorXd> dm(dydt.data(), static_cast<Eigen::Index>(n));
    dm.noalias() = a * ym;
  };
  auto apply = [&](const Arrival& arr, State& y, double t) {
    const auto jump = arrivalJump(net, spec, arr);
    for (std::size_t m = 0; m < jump.species.size(); ++m) y[jump.species[m]] += jump.mean[m];
    double added = 0.0;
    for (double v : jump.mean) added += v;
    emitted += added;
    out.arrivals.push_back({t, 0.0, jump.cov.trace()});
  };
  Segmenter seg(options);
  out.steps = seg.run(rhs, x, arrivals, grid, apply, [&](std::size_t g, const State& y) { obs.sample(g, y.data(), emitted); });
  return out;
}

MomentSolution covarianceOde(const NetworkSpec& spec, std::span<const double> grid, const MomentOptions& options) {
  requireLinear(spec);
  checkGrid(grid, spec.horizon);
  const auto net = buildNetwork(spec);
  const std::size_t n = net.speciesCount;
  if (n > options.dimensionCap) {
    std::ostringstream msg;
    msg << "state dimension " << n << " exceeds covariance cap " << options.dimensionCap;
    throw Error(ErrorCode::DimensionCap, msg.str());
  }
  const SparseMatrix a = buildGenerator(net);
  const std::size_t packed = n * (n + 1) / 2;

  // Noise term sum_j r_j r_j^T rate_j m[reactant_j], as (packed slot, reactant, coefficient).
  struct NoiseTerm {
    std::size_t slot;
    std::size_t reactant;
    double coefficient;
  };
  std::vector<NoiseTerm> noise;
  for (const auto& c : net.channels) {
    for (std::size_t p = 0; p < c.change.size(); ++p) {
      for (std::size_t q = p; q < c.change.size(); ++q) {
        const auto& e = c.change[p];
        const auto& f = c.change[q];
        // (i, j) and (j, i) of r r^T share one packed slot.
        noise.push_back({packedIndex(e.species, f.species, n), c.reactants[0], double(e.delta * f.delta) * c.rate});
      }
    }
  }

  MomentSolution out;
  out.grid.assign(grid.begin(), grid.end());
  const std::size_t nu = net.receiverSites.size();
  out.mean.assign(nu, {});
  out.stddev.assign(nu, {});
  Observer obs{net, out, options.keepStates};

  // Receiver aggregation: receiver u output is the sum of its site complexes.
  Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(n));
  for (std::size_t u = 0; u < nu; ++u) {
    for (auto s : net.receiverSites[u]) agg(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(net.sites[s].complexSpecies)) = 1.0;
  }

  State x(n + packed, 0.0);
  Eigen::MatrixXd sigma(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::MatrixXd product(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  double emitted = 0.0;
  const auto arrivals = arrivalTimeline(spec);

  auto rhs = [&](const State& y, State& dydt, double) {
    const auto ni = static_cast<Eigen::Index>(n);
    Eigen::Map<const Eigen::VectorXd> m(y.data(), ni);
    Eigen::Map<Eigen::VectorXd> dm(dydt.data(), ni);
    dm.noalias() = a * m;
    unpack(y.data() + n, n, sigma);
    product.noalias() = a * sigma;
    double* ds = dydt.data() + n;
    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j, ++p) {
        ds[p] = product(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +
                product(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
      }
    }
    for (const auto& term : noise) ds[term.slot] += term.coefficient * y[term.reactant];
  };

  const bool diagnose = true;
  auto apply = [&](const Arrival& arr, State& y, double t) {
    const auto jump = arrivalJump(net, spec, arr);
    ArrivalDiagnostic diag{t, 0.0, jump.cov.trace()};
    const double* before = y.data() + n;
    std::vector<double> raw;
    if (diagnose) {
      // Sigma+ = E[(Q+k)(Q+k)^T] - E[Q+k]E[Q+k]^T, from E[QQ^T] = Sigma + m m^T.
      std::vector<double> kMean(n, 0.0);
      for (std::size_t q = 0; q < jump.species.size(); ++q) kMean[jump.species[q]] = jump.mean[q];
      raw.resize(packed);
      double scale = 0.0;
      std::size_t p = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double mi = y[i];
        const double mip = mi + kMean[i];
        for (std::size_t j = i; j < n; ++j, ++p) {
          const double mj = y[j];
          const double mjp = mj + kMean[j];
          const double second = before[p] + mi * mj;
          const double kk = kMean[i] * kMean[j];
          raw[p] = second + mi * kMean[j] + kMean[i] * mj + kk - mip * mjp;
          scale = std::max(scale, std::abs(before[p]));
        }
      }
      for (std::size_t q = 0; q < jump.species.size(); ++q) {
        for (std::size_t r = q; r < jump.species.size(); ++r) {
          raw[packedIndex(jump.species[q], jump.species[r], n)] += jump.cov(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r));
        }
      }
      double dev = 0.0;
      for (std::size_t r = 0; r < packed; ++r) dev = std::max(dev, std::abs(raw[r] - before[r]));
      // Subtract the intended cov(K) jump so only the discontinuity beyond it is reported.
      if (diag.addedVariance > 0.0) {
        dev = 0.0;
        std::vector<double> expected(before, before + packed);
        for (std::size_t q = 0; q < jump.species.size(); ++q) {
          for (std::size_t r = q; r < jump.species.size(); ++r) {
            expected[packedIndex(jump.species[q], jump.species[r], n)] += jump.cov(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r));
          }
        }
        for (std::size_t r = 0; r < packed; ++r) dev = std::max(dev, std::abs(raw[r] - expected[r]));
      }
      diag.covarianceJump = dev / std::max(1.0, scale);
    }
    for (std::size_t q = 0; q < jump.species.size(); ++q) y[jump.species[q]] += jump.mean[q];
    for (double v : jump.mean) emitted += v;
    if (diag.addedVariance > 0.0) {
      for (std::size_t q = 0; q < jump.species.size(); ++q) {
        for (std::size_t r = q; r < jump.species.size(); ++r) {
          y[n + packedIndex(jump.species[q], jump.species[r], n)] += jump.cov(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r));
        }
      }
    }
    out.arrivals.push_back(diag);
  };

  const bool fullPsd = n <= 600;
  out.minEigenRatio = 0.0;
  auto record = [&](std::size_t g, const State& y) {
    obs.sample(g, y.data(), emitted);
    unpack(y.data() + n, n, sigma);
    Eigen::MatrixXd rc = agg * sigma * agg.transpose();
    for (std::size_t u = 0; u < nu; ++u) {
      out.stddev[u].push_back(std::sqrt(std::max(0.0, rc(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u)))));
    }
    out.receiverCovariance.push_back(std::move(rc));
    if (fullPsd || g + 1 == grid.size()) out.minEigenRatio = std::min(out.minEigenRatio, psdRatio(sigma));
  };

  Segmenter seg(options);
  out.steps = seg.run(rhs, x, arrivals, grid, apply, record);
  return out;
}

}  // namespace mcnet
