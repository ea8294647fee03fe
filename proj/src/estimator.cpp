#include "distgp/estimator.hpp"

#include <cmath>

namespace distgp {

double GpEstimator::predict(const Configuration& x) {
    const GpModel& m = *model_;
    if (m.spec.kind == KernelKind::gaussian) {
        // |x_i - x|^2 = |x_i|^2 - 2 x_i.x + |x|^2, evaluated as one matvec
        // plus vectorized exp; clamp tiny negative round-off.
        tmp_.noalias() = m.X * x;
        const double xn = x.squaredNorm();
        kvec_.array() =
            ((xsq_.array() - 2.0 * tmp_.array() + xn).max(0.0) * -m.spec.gamma).exp();
    } else {
        control_points_flat(m.spec.robot, x, cp_);
        const double half_gamma = 0.5 * m.spec.gamma;
        const int mm = m.spec.robot.dof;
        kvec_.setZero();
        for (int k = 0; k < mm; ++k) {
            tmp_.array() = (m.train_cp.col(2 * k).array() - cp_[2 * k]).square() +
                           (m.train_cp.col(2 * k + 1).array() - cp_[2 * k + 1]).square();
            kvec_.array() += (1.0 + half_gamma * tmp_.array()).square().inverse();
        }
    }
    return kvec_.dot(m.alpha) + m.prior_mean;
}

} // namespace distgp
