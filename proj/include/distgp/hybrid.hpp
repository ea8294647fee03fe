#pragma once

#include "distgp/geometry.hpp"
#include "distgp/regression.hpp"

namespace distgp {

double std_normal_cdf(double t);

/// Phi((mu(x) - threshold) / sigma(x)); degenerates to a step at sigma = 0.
double confidence_level(const GpModel& gp, const Configuration& x, double threshold);

enum class HybridBranch { gp, sensor };

struct NoisySensor {
    const Environment* env = nullptr;
    double eta = 0.0;
    Rng* rng = nullptr; // caller-owned; draws consumed in a fixed order
};

/// Returns the GP mean where the lower confidence bound clears the threshold
/// and an average of n_sensor noisy draws elsewhere.
struct HybridEstimator {
    const GpModel* gp = nullptr;
    double z = 1.64;      // standard deviations; 1.64 ~ one-sided 95%
    int n_sensor = 5;
    NoisySensor sensor;
    double threshold = 0.0;

    void validate() const;
};

struct HybridPrediction {
    double value = 0.0;
    HybridBranch branch = HybridBranch::gp;
};

HybridPrediction hybrid_predict(const HybridEstimator& h, const Configuration& x);

} // namespace distgp
