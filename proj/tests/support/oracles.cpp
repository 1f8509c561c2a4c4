#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Sparse>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

namespace {

struct Layout {
  std::size_t voxels = 0;
  std::vector<std::size_t> siteVoxel;    // lattice index per receiver site
  std::vector<std::size_t> siteComplex;  // species index per receiver site
  std::vector<double> siteKf;
  std::vector<double> siteKb;
  std::vector<std::vector<std::size_t>> receiverSites;
  std::size_t species = 0;
};

Layout layout(const mcnet::NetworkSpec& spec) {
  Layout l;
  l.voxels = spec.lattice.voxelCount();
  l.species = l.voxels;
  const double volume = std::pow(spec.lattice.delta, 3);
  for (const auto& rx : spec.receivers) {
    std::vector<std::size_t> sites;
    for (const auto& v : rx.voxels) {
      sites.push_back(l.siteVoxel.size());
      l.siteVoxel.push_back(spec.lattice.index(v));
      l.siteComplex.push_back(l.species++);
      l.siteKf.push_back(rx.kPlus / (static_cast<double>(rx.voxels.size()) * volume));
      l.siteKb.push_back(rx.kMinus);
    }
    l.receiverSites.push_back(sites);
  }
  return l;
}

// Jump list (source species, target species, rate per molecule).
struct Jump {
  std::size_t from;
  std::size_t to;
  double rate;
};

std::vector<Jump> jumps(const mcnet::NetworkSpec& spec, const Layout& l) {
  std::vector<Jump> out;
  const auto& lat = spec.lattice;
  const double hop = lat.diffusion / (lat.delta * lat.delta);
  for (std::size_t n = 0; n < l.voxels; ++n) {
    const auto v = lat.voxel(n);
    const mcnet::Voxel steps[] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& d : steps) {
      const auto w = v + d;
      if (lat.contains(w)) out.push_back({n, lat.index(w), hop});
    }
  }
  for (std::size_t s = 0; s < l.siteVoxel.size(); ++s) {
    out.push_back({l.siteVoxel[s], l.siteComplex[s], l.siteKf[s]});
    out.push_back({l.siteComplex[s], l.siteVoxel[s], l.siteKb[s]});
  }
  return out;
}

Eigen::MatrixXd generatorFrom(const std::vector<Jump>& js, std::size_t n) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const auto& j : js) {
    a(static_cast<Eigen::Index>(j.from), static_cast<Eigen::Index>(j.from)) -= j.rate;
    a(static_cast<Eigen::Index>(j.to), static_cast<Eigen::Index>(j.from)) += j.rate;
  }
  return a;
}

// Emissions split by the remainder rule over the transmitter voxels.
void emit(const mcnet::NetworkSpec& spec, const mcnet::Arrival& a, Eigen::VectorXd& q) {
  const auto& voxels = spec.transmitters[a.transmitter].voxels;
  const auto split = mcnet::splitUniform(a.count, voxels);
  for (std::size_t m = 0; m < voxels.size(); ++m) q[static_cast<Eigen::Index>(spec.lattice.index(voxels[m]))] += static_cast<double>(split[m]);
}

}  // namespace

Eigen::MatrixXd denseGenerator(const mcnet::NetworkSpec& spec) {
  const auto l = layout(spec);
  return generatorFrom(jumps(spec, l), l.species);
}

std::vector<std::vector<double>> expmReceiverMeans(const mcnet::NetworkSpec& spec, std::span<const double> times) {
  const auto l = layout(spec);
  const Eigen::MatrixXd a = generatorFrom(jumps(spec, l), l.species);
  const auto arrivals = mcnet::arrivalTimeline(spec);
  std::vector<std::vector<double>> out(spec.receivers.size(), std::vector<double>(times.size()));
  for (std::size_t t = 0; t < times.size(); ++t) {
    Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(l.species));
    double now = 0.0;
    for (const auto& arr : arrivals) {
      if (arr.time > times[t]) break;
      q = (a * (arr.time - now)).exp() * q;
      emit(spec, arr, q);
      now = arr.time;
    }
    q = (a * (times[t] - now)).exp() * q;
    for (std::size_t u = 0; u < spec.receivers.size(); ++u) {
      double sum = 0.0;
      for (auto site : l.receiverSites[u]) sum += q[static_cast<Eigen::Index>(l.siteComplex[site])];
      out[u][t] = sum;
    }
  }
  return out;
}

Moments expmMoments(const mcnet::NetworkSpec& spec, double t) {
  const auto l = layout(spec);
  const auto js = jumps(spec, l);
  const Eigen::MatrixXd a = generatorFrom(js, l.species);
  const auto n = static_cast<Eigen::Index>(l.species);
  Moments m{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};

  // vec(Sigma) and the mean evolve together as
  //   d/dt [vec Sigma; m] = [[I (x) A + A (x) I, B], [0, A]] [vec Sigma; m]
  // with B m = vec(sum_j rate_j r_j r_j^T m_from(j)), so one exponential per
  // interval is exact.
  const Eigen::Index nn = n * n;
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(nn + n, nn + n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // column-major vec: index of Sigma(r, c) is c n + r
      big.block(j * n, i * n, n, n) += id(j, i) * a;
      big.block(j * n, i * n, n, n) += a(j, i) * id;
    }
  }
  for (const auto& j : js) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
    r[static_cast<Eigen::Index>(j.from)] -= 1.0;
    r[static_cast<Eigen::Index>(j.to)] += 1.0;
    const Eigen::MatrixXd outer = j.rate * r * r.transpose();
    for (Eigen::Index c = 0; c < n; ++c)
      for (Eigen::Index rr = 0; rr < n; ++rr) big(c * n + rr, nn + static_cast<Eigen::Index>(j.from)) += outer(rr, c);
  }
  big.bottomRightCorner(n, n) = a;

  auto advance = [&](double h) {
    if (h <= 0.0) return;
    Eigen::VectorXd x(nn + n);
    x.head(nn) = Eigen::Map<const Eigen::VectorXd>(m.covariance.data(), nn);
    x.tail(n) = m.mean;
    x = (big * h).exp() * x;
    m.covariance = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
    m.mean = x.tail(n);
  };

  double now = 0.0;
  for (const auto& arr : mcnet::arrivalTimeline(spec)) {
    if (arr.time > t) break;
    advance(arr.time - now);
    emit(spec, arr, m.mean);
    now = arr.time;
  }
  advance(t - now);
  return m;
}

std::vector<double> binomialPmf(int n, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    pmf[static_cast<std::size_t>(k)] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) *
                                       std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return pmf;
}

Complex phi(double r, Complex s, double diffusion) {
  return std::exp(-std::sqrt(s / diffusion) * r) / (4.0 * std::numbers::pi * diffusion * r);
}

namespace {

// e^{-x} I_n(x); the asymptotic series takes over before I_n overflows.
double scaledBesselI(int n, double x) {
  if (x < 500.0) return boost::math::cyl_bessel_i(n, x) * std::exp(-x);
  const double mu = 4.0 * n * n;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * x);
    sum += term;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

}  // namespace

double latticeGreenBessel(mcnet::Voxel offset, double s, double diffusion, double delta) {
  const double d = diffusion / (delta * delta);
  const int n[] = {std::abs(offset.i), std::abs(offset.j), std::abs(offset.k)};
  boost::math::quadrature::exp_sinh<double> quad;
  const auto f = [&](double t) {
    const double x = 2.0 * d * t;
    double v = std::exp(-s * t);
    for (int a : n) v *= scaledBesselI(a, x);
    return v;
  };
  return quad.integrate(f) / (delta * delta * delta);
}

std::vector<Complex> boxResolvent(const mcnet::LatticeSpec& lattice, mcnet::Voxel source, Complex s) {
  const auto n = static_cast<Eigen::Index>(lattice.voxelCount());
  const double hop = lattice.diffusion / (lattice.delta * lattice.delta);
  std::vector<Eigen::Triplet<Complex>> entries;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = lattice.voxel(static_cast<std::size_t>(i));
    Complex diag = s;
    const mcnet::Voxel steps[] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    for (const auto& d : steps) {
      const auto w = v + d;
      if (!lattice.contains(w)) continue;
      diag += hop;
      entries.emplace_back(i, static_cast<Eigen::Index>(lattice.index(w)), -hop);
    }
    entries.emplace_back(i, i, diag);
  }
  Eigen::SparseMatrix<Complex> m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(m);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  rhs[static_cast<Eigen::Index>(lattice.index(source))] = 1.0 / std::pow(lattice.delta, 3);
  const Eigen::VectorXcd x = lu.solve(rhs);
  return {x.data(), x.data() + n};
}

std::vector<LaplacePair> laplacePairs() {
  using std::exp;
  using std::sqrt;
  const double pi = std::numbers::pi;
  return {
      {"1/(s+1) <-> exp(-t)", [](Complex s) { return 1.0 / (s + 1.0); }, [](double t) { return exp(-t); }},
      {"1/s^2 <-> t", [](Complex s) { return 1.0 / (s * s); }, [](double t) { return t; }},
      {"1/(s^2+1) <-> sin t", [](Complex s) { return 1.0 / (s * s + 1.0); }, [](double t) { return std::sin(t); }},
      {"s/(s^2+4) <-> cos 2t", [](Complex s) { return s / (s * s + 4.0); }, [](double t) { return std::cos(2.0 * t); }},
      {"1/sqrt(s) <-> 1/sqrt(pi t)", [](Complex s) { return 1.0 / sqrt(s); }, [pi](double t) { return 1.0 / std::sqrt(pi * t); }},
      {"exp(-sqrt(s))/s <-> erfc(1/(2 sqrt t))", [](Complex s) { return exp(-sqrt(s)) / s; },
       [](double t) { return boost::math::erfc(0.5 / std::sqrt(t)); }},
      {"exp(-sqrt(s)) <-> exp(-1/(4t))/(2 sqrt(pi) t^1.5)", [](Complex s) { return exp(-sqrt(s)); },
       [pi](double t) { return std::exp(-0.25 / t) / (2.0 * std::sqrt(pi) * std::pow(t, 1.5)); }},
      {"1/((s+1)(s+3)) <-> (exp(-t)-exp(-3t))/2", [](Complex s) { return 1.0 / ((s + 1.0) * (s + 3.0)); },
       [](double t) { return 0.5 * (std::exp(-t) - std::exp(-3.0 * t)); }},
      {"log(s)/s <-> -gamma - log t", [](Complex s) { return std::log(s) / s; },
       [](double t) { return -0.57721566490153286 - std::log(t); }},
  };
}

double chiSquarePValue(std::span<const double> observed, std::span<const double> probabilities) {
  double total = 0.0;
  for (double o : observed) total += o;
  std::vector<double> obs;
  std::vector<double> expct;
  double o = 0.0;
  double e = 0.0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    o += observed[k];
    e += probabilities[k] * total;
    if (e >= 5.0) {
      obs.push_back(o);
      expct.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (expct.empty()) {
      obs.push_back(o);
      expct.push_back(e);
    } else {
      obs.back() += o;
      expct.back() += e;
    }
  }
  if (expct.size() < 2) return 1.0;
  double stat = 0.0;
  for (std::size_t k = 0; k < obs.size(); ++k) stat += (obs[k] - expct[k]) * (obs[k] - expct[k]) / expct[k];
  const double dof = static_cast<double>(obs.size() - 1);
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

}  // namespace oracle
