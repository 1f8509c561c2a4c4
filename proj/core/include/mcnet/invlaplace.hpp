#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mcnet {

using Complex = std::complex<double>;
using Evaluator = std::function<Complex(Complex)>;

struct TalbotOptions {
  int nodes = 32;            // M; the error estimate reruns with M / 2
  double tolerance = 1e-6;   // relative accuracy target
  double absoluteFloor = 0;  // errors below this are accepted regardless of |f|
  bool enforce = true;       // throw AccuracyNotMet when the target is missed
  bool checkConjugate = true;
};

struct Inversion {
  std::vector<double> values;
  std::vector<double> errorEstimate;  // |f_M - f_{M/2}| per time
};

/// Fixed Talbot contour s(theta) = r theta (cot theta + i), r = 2M / (5t).
/// Times must be strictly positive. Throws ContourEvaluationFailure when F is not
/// finite or not conjugate-symmetric on the contour, and AccuracyNotMet when the
/// estimate exceeds the target.
Inversion invert(const Evaluator& transform, std::span<const double> times, const TalbotOptions& options = {});

/// Single-time inversion with M nodes and no checks.
double talbot(const Evaluator& transform, double t, int nodes);

/// Contour nodes and weights for time `t`: f(t) ~= Re sum_k weight_k e^{s_k t} F(s_k).
struct TalbotContour {
  std::vector<Complex> nodes;
  std::vector<Complex> weights;
};
TalbotContour talbotContour(double t, int nodes);

/// Matrix-valued transfer G(s) (outputs x inputs).
using MatrixEvaluator = std::function<Eigen::MatrixXcd(Complex)>;

// Impulse input sum_b weight_b delta(t - time_b) feeding one column of G.
struct ImpulseTrain {
  std::vector<double> times;
  std::vector<double> weights;
};

struct TrainInversion {
  Eigen::MatrixXd values;         // outputs x times
  Eigen::MatrixXd errorEstimate;  // outputs x times
  std::size_t transformEvaluations = 0;
};

/// Response y(t) = sum_inputs sum_b weight_b g(t - time_b) with g the inverse
/// transform of G. Delays are binned on the ladder T 2^-j (bin j holds delays in
/// (T 2^-(j+1), T 2^-j]); every delay in a bin is inverted on the contour of the
/// bin's upper edge, so G is evaluated on a few shared contours instead of once per
/// (time, impulse). Events at or after a grid time do not contribute to it.
TrainInversion invertImpulseTrains(const MatrixEvaluator& transfer, std::span<const ImpulseTrain> inputs,
                                   std::span<const double> times, const TalbotOptions& options = {});

}  // namespace mcnet
