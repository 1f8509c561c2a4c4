#include "mcnet/invlaplace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "mcnet/error.hpp"

namespace mcnet {

namespace {

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void requireFinite(Complex v, Complex s) {
  if (!finite(v)) {
    std::ostringstream msg;
    msg << "transform not finite at s = " << s;
    throw Error(ErrorCode::ContourEvaluationFailure, msg.str());
  }
}

void conjugateCheck(Complex fs, Complex fc, Complex s) {
  const double scale = std::max(std::abs(fs), 1e-300);
  if (std::abs(fc - std::conj(fs)) > 1e-9 * scale && std::abs(fs) > 1e-250) {
    std::ostringstream msg;
    msg << "transform is not conjugate-symmetric at s = " << s << " (time function would be complex)";
    throw Error(ErrorCode::ContourEvaluationFailure, msg.str());
  }
}

}  // namespace

TalbotContour talbotContour(double t, int nodes) {
  if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "inversion time must be > 0");
  if (nodes < 4 || nodes % 2) throw Error(ErrorCode::InvalidArgument, "Talbot node count must be even and >= 4");
  const double r = 2.0 * nodes / (5.0 * t);
  TalbotContour c;
  c.nodes.reserve(static_cast<std::size_t>(nodes));
  c.weights.reserve(static_cast<std::size_t>(nodes));
  c.nodes.emplace_back(r, 0.0);
  c.weights.emplace_back(0.5 * r / nodes, 0.0);
  for (int k = 1; k < nodes; ++k) {
    const double theta = k * std::numbers::pi / nodes;
    const double cot = 1.0 / std::tan(theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    c.nodes.push_back(r * theta * Complex(cot, 1.0));
    c.weights.push_back((r / nodes) * Complex(1.0, sigma));
  }
  return c;
}

double talbot(const Evaluator& transform, double t, int nodes) {
  const auto c = talbotContour(t, nodes);
  double sum = 0.0;
  for (std::size_t k = 0; k < c.nodes.size(); ++k) {
    const Complex v = transform(c.nodes[k]);
    requireFinite(v, c.nodes[k]);
    sum += (c.weights[k] * std::exp(c.nodes[k] * t) * v).real();
  }
  return sum;
}

Inversion invert(const Evaluator& transform, std::span<const double> times, const TalbotOptions& options) {
  Inversion out;
  for (std::size_t n = 0; n < times.size(); ++n) {
    const double t = times[n];
    if (!(t > 0.0)) throw Error(ErrorCode::InvalidArgument, "inversion times must be > 0");
    if (n && !(t > times[n - 1])) throw Error(ErrorCode::NonMonotoneTimes, "inversion times must ascend");
    const double fine = talbot(transform, t, options.nodes);
    const double coarse = talbot(transform, t, options.nodes / 2);
    if (options.checkConjugate) {
      const Complex s = talbotContour(t, options.nodes).nodes[static_cast<std::size_t>(options.nodes / 2)];
      conjugateCheck(transform(s), transform(std::conj(s)), s);
    }
    const double err = std::abs(fine - coarse);
    if (options.enforce && err > std::max(options.tolerance * std::abs(fine), options.absoluteFloor)) {
      std::ostringstream msg;
      msg << "estimated error " << err << " at t = " << t << " exceeds target";
      throw Error(ErrorCode::AccuracyNotMet, msg.str());
    }
    out.values.push_back(fine);
    out.errorEstimate.push_back(err);
  }
  return out;
}

TrainInversion invertImpulseTrains(const MatrixEvaluator& transfer, std::span<const ImpulseTrain> inputs,
                                   std::span<const double> times, const TalbotOptions& options) {
  constexpr int kMaxLevel = 60;
  TrainInversion out;
  if (times.empty()) return out;
  for (std::size_t n = 1; n < times.size(); ++n) {
    if (!(times[n] > times[n - 1])) throw Error(ErrorCode::NonMonotoneTimes, "grid must ascend");
  }
  const double reference = times.back();

  struct Level {
    TalbotContour fine;
    TalbotContour coarse;
    std::vector<Eigen::MatrixXcd> gFine;
    std::vector<Eigen::MatrixXcd> gCoarse;
  };
  std::map<int, Level> levels;
  std::size_t rows = 0;
  bool haveRows = false;

  std::size_t evaluations = 0;
  auto evaluate = [&](Complex s) {
    Eigen::MatrixXcd g = transfer(s);
    ++evaluations;
    for (Eigen::Index i = 0; i < g.size(); ++i) requireFinite(g.data()[i], s);
    if (static_cast<std::size_t>(g.cols()) != inputs.size()) {
      throw Error(ErrorCode::InvalidArgument, "transfer columns must match the impulse inputs");
    }
    return g;
  };
  auto level = [&](int j) -> Level& {
    auto it = levels.find(j);
    if (it != levels.end()) return it->second;
    Level lv;
    const double tHi = reference * std::ldexp(1.0, -j);
    lv.fine = talbotContour(tHi, options.nodes);
    lv.coarse = talbotContour(tHi, options.nodes / 2);
    for (const auto& s : lv.fine.nodes) lv.gFine.push_back(evaluate(s));
    for (const auto& s : lv.coarse.nodes) lv.gCoarse.push_back(evaluate(s));
    if (options.checkConjugate) {
      const auto& s = lv.fine.nodes[static_cast<std::size_t>(options.nodes / 2)];
      const Eigen::MatrixXcd gc = evaluate(std::conj(s));
      const auto& gs = lv.gFine[static_cast<std::size_t>(options.nodes / 2)];
      for (Eigen::Index i = 0; i < gs.size(); ++i) conjugateCheck(gs.data()[i], gc.data()[i], s);
    }
    if (!haveRows) {
      rows = static_cast<std::size_t>(lv.gFine.front().rows());
      haveRows = true;
    }
    return levels.emplace(j, std::move(lv)).first->second;
  };

  auto binOf = [&](double tau) {
    const int j = static_cast<int>(std::floor(std::log2(reference / tau)));
    return std::clamp(j, 0, kMaxLevel);
  };

  // Per (time, level, input): z_k = sum_b w_b exp(s_k tau_b), then y += Re sum_k weight_k z_k G_k.
  std::vector<std::vector<Eigen::VectorXd>> fineVals(times.size()), coarseVals(times.size());
  for (std::size_t n = 0; n < times.size(); ++n) {
    const double t = times[n];
    std::map<int, std::vector<std::vector<std::pair<double, double>>>> bins;  // level -> input -> (tau, w)
    for (std::size_t a = 0; a < inputs.size(); ++a) {
      const auto& train = inputs[a];
      for (std::size_t b = 0; b < train.times.size(); ++b) {
        const double tau = t - train.times[b];
        if (!(tau > 0.0) || train.weights[b] == 0.0) continue;
        auto& perInput = bins[binOf(tau)];
        perInput.resize(inputs.size());
        perInput[a].emplace_back(tau, train.weights[b]);
      }
    }
    Eigen::VectorXcd accFine, accCoarse;
    for (auto& [j, perInput] : bins) {
      Level& lv = level(j);
      if (accFine.size() == 0) {
        accFine = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rows));
        accCoarse = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rows));
      }
      for (std::size_t a = 0; a < perInput.size(); ++a) {
        if (perInput[a].empty()) continue;
        auto accumulate = [&](const TalbotContour& c, const std::vector<Eigen::MatrixXcd>& g, Eigen::VectorXcd& acc) {
          for (std::size_t k = 0; k < c.nodes.size(); ++k) {
            Complex z(0.0, 0.0);
            for (const auto& [tau, w] : perInput[a]) z += w * std::exp(c.nodes[k] * tau);
            acc += (c.weights[k] * z) * g[k].col(static_cast<Eigen::Index>(a));
          }
        };
        accumulate(lv.fine, lv.gFine, accFine);
        accumulate(lv.coarse, lv.gCoarse, accCoarse);
      }
    }
    if (accFine.size()) {
      fineVals[n].push_back(accFine.real());
      coarseVals[n].push_back(accCoarse.real());
    }
  }

  if (!haveRows) {
    // No causal contributions anywhere: evaluate once only to learn the output count.
    rows = static_cast<std::size_t>(evaluate(Complex(1.0 / reference, 0.0)).rows());
  }
  const auto nr = static_cast<Eigen::Index>(rows);
  const auto nt = static_cast<Eigen::Index>(times.size());
  out.values = Eigen::MatrixXd::Zero(nr, nt);
  out.errorEstimate = Eigen::MatrixXd::Zero(nr, nt);
  for (Eigen::Index n = 0; n < nt; ++n) {
    if (fineVals[static_cast<std::size_t>(n)].empty()) continue;
    out.values.col(n) = fineVals[static_cast<std::size_t>(n)][0];
    out.errorEstimate.col(n) = (fineVals[static_cast<std::size_t>(n)][0] - coarseVals[static_cast<std::size_t>(n)][0]).cwiseAbs();
  }
  out.transformEvaluations = evaluations;
  if (options.enforce) {
    for (Eigen::Index r = 0; r < nr; ++r) {
      const double scale = out.values.row(r).cwiseAbs().maxCoeff();
      const double allowed = std::max(options.tolerance * scale, options.absoluteFloor);
      const double worst = out.errorEstimate.row(r).maxCoeff();
      if (worst > allowed) {
        std::ostringstream msg;
        msg << "estimated error " << worst << " exceeds " << allowed << " on output " << r;
        throw Error(ErrorCode::AccuracyNotMet, msg.str());
      }
    }
  }
  return out;
}

}  // namespace mcnet
