#include "distgp/hybrid.hpp"

#include <cmath>
#include <stdexcept>

namespace distgp {

double std_normal_cdf(double t) {
    return 0.5 * std::erfc(-t / std::sqrt(2.0));
}

double confidence_level(const GpModel& gp, const Configuration& x, double threshold) {
    const double mean = gp_mean(gp, x);
    const double sigma = std::sqrt(gp_variance(gp, x));
    if (sigma == 0.0) {
        if (mean > threshold)
            return 1.0;
        if (mean < threshold)
            return 0.0;
        return 0.5;
    }
    return std_normal_cdf((mean - threshold) / sigma);
}

void HybridEstimator::validate() const {
    if (gp == nullptr)
        throw std::invalid_argument("hybrid: missing GP model");
    if (z < 0.0)
        throw std::invalid_argument("hybrid: z must be >= 0");
    if (n_sensor < 1)
        throw std::invalid_argument("hybrid: n_sensor must be >= 1");
    if (sensor.env == nullptr || sensor.rng == nullptr)
        throw std::invalid_argument("hybrid: missing sensor source");
}

HybridPrediction hybrid_predict(const HybridEstimator& h, const Configuration& x) {
    h.validate();
    // The branch test is exactly the regression module's lower bound so the
    // two stay bitwise consistent.
    if (confidence_lower_bound(*h.gp, x, h.z) >= h.threshold)
        return {gp_mean(*h.gp, x), HybridBranch::gp};
    double sum = 0.0;
    for (int i = 0; i < h.n_sensor; ++i)
        sum += noisy_distance(*h.sensor.env, x, h.sensor.eta, *h.sensor.rng);
    return {sum / h.n_sensor, HybridBranch::sensor};
}

} // namespace distgp
