#pragma once

#include <Eigen/Core>
#include <string>

#include "distgp/kinematics.hpp"

namespace distgp {

enum class KernelKind { gaussian, fk };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

struct KernelSpec {
    KernelKind kind = KernelKind::gaussian;
    double gamma = 1.0;
    RobotModel robot; // required for the fk kernel

    void validate() const;
    /// k(x, x): 1 for gaussian, M (= dof) for fk.
    double prior_variance() const;
};

/// exp(-gamma * |x - x2|^2)
double gaussian_kernel(const Configuration& x, const Configuration& x2, double gamma);

/// sum_m (1 + gamma/2 * |FK_m(x) - FK_m(x2)|^2)^-2 over the M control points.
double fk_kernel(const Configuration& x, const Configuration& x2, const KernelSpec& spec);

/// fk kernel on preflattened control points (x0,y0,x1,y1,...).
double fk_kernel_points(const Eigen::VectorXd& cp_a, const Eigen::VectorXd& cp_b, double gamma);

double kernel_value(const KernelSpec& spec, const Configuration& x, const Configuration& x2);

/// Rows of X / X2 are configurations. For the fk kernel, control points are
/// evaluated once per configuration, not once per pair.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& X2);

/// N x 2M matrix of flattened control points, one row per configuration.
Eigen::MatrixXd control_point_rows(const RobotModel& robot, const Eigen::MatrixXd& X);

/// Median-heuristic gaussian width: 1 / (2 * median^2) of pairwise C-space
/// distances (capped sample). The fk default is 1.
double default_gamma(KernelKind kind, const Eigen::MatrixXd& X);

} // namespace distgp
