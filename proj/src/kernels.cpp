#include "distgp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace distgp {

std::string to_string(KernelKind kind) {
    return kind == KernelKind::gaussian ? "gaussian" : "fk";
}

KernelKind kernel_kind_from_string(const std::string& s) {
    if (s == "gaussian")
        return KernelKind::gaussian;
    if (s == "fk")
        return KernelKind::fk;
    throw std::invalid_argument("unknown kernel kind: " + s);
}

void KernelSpec::validate() const {
    if (gamma <= 0.0)
        throw std::invalid_argument("kernel: gamma must be > 0");
    if (kind == KernelKind::fk)
        robot.validate();
}

double KernelSpec::prior_variance() const {
    return kind == KernelKind::fk ? static_cast<double>(robot.dof) : 1.0;
}

double gaussian_kernel(const Configuration& x, const Configuration& x2, double gamma) {
    if (x.size() != x2.size())
        throw std::invalid_argument("gaussian_kernel: dimension mismatch");
    if (gamma <= 0.0)
        throw std::invalid_argument("gaussian_kernel: gamma must be > 0");
    return std::exp(-gamma * (x - x2).squaredNorm());
}

double fk_kernel_points(const Eigen::VectorXd& cp_a, const Eigen::VectorXd& cp_b, double gamma) {
    const int m = static_cast<int>(cp_a.size()) / 2;
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
        const double dx = cp_a[2 * i] - cp_b[2 * i];
        const double dy = cp_a[2 * i + 1] - cp_b[2 * i + 1];
        const double u = 1.0 + 0.5 * gamma * (dx * dx + dy * dy);
        sum += 1.0 / (u * u);
    }
    return sum;
}

double fk_kernel(const Configuration& x, const Configuration& x2, const KernelSpec& spec) {
    if (spec.kind != KernelKind::fk)
        throw std::invalid_argument("fk_kernel: spec is not an fk kernel");
    spec.validate();
    if (x.size() != spec.robot.dof || x2.size() != spec.robot.dof)
        throw std::invalid_argument("fk_kernel: dimension mismatch");
    Eigen::VectorXd cp_a(2 * spec.robot.dof), cp_b(2 * spec.robot.dof);
    control_points_flat(spec.robot, x, cp_a);
    control_points_flat(spec.robot, x2, cp_b);
    return fk_kernel_points(cp_a, cp_b, spec.gamma);
}

double kernel_value(const KernelSpec& spec, const Configuration& x, const Configuration& x2) {
    return spec.kind == KernelKind::gaussian ? gaussian_kernel(x, x2, spec.gamma)
                                             : fk_kernel(x, x2, spec);
}

Eigen::MatrixXd control_point_rows(const RobotModel& robot, const Eigen::MatrixXd& X) {
    if (X.cols() != robot.dof)
        throw std::invalid_argument("control_point_rows: dimension mismatch");
    Eigen::MatrixXd cp(X.rows(), 2 * robot.dof);
    Eigen::VectorXd row(2 * robot.dof);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        control_points_flat(robot, X.row(i).transpose(), row);
        cp.row(i) = row;
    }
    return cp;
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X,
                            const Eigen::MatrixXd& X2) {
    spec.validate();
    if (X.cols() != X2.cols())
        throw std::invalid_argument("gram_matrix: dimension mismatch");
    const Eigen::Index n = X.rows(), n2 = X2.rows();
    Eigen::MatrixXd gram(n, n2);
    if (spec.kind == KernelKind::gaussian) {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n2; ++j)
                gram(i, j) = std::exp(-spec.gamma * (X.row(i) - X2.row(j)).squaredNorm());
    } else {
        const Eigen::MatrixXd cp = control_point_rows(spec.robot, X);
        const Eigen::MatrixXd cp2 = control_point_rows(spec.robot, X2);
        const int m = spec.robot.dof;
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n2; ++j) {
                double sum = 0.0;
                for (int k = 0; k < m; ++k) {
                    const double dx = cp(i, 2 * k) - cp2(j, 2 * k);
                    const double dy = cp(i, 2 * k + 1) - cp2(j, 2 * k + 1);
                    const double u = 1.0 + 0.5 * spec.gamma * (dx * dx + dy * dy);
                    sum += 1.0 / (u * u);
                }
                gram(i, j) = sum;
            }
        }
    }
    return gram;
}

double default_gamma(KernelKind kind, const Eigen::MatrixXd& X) {
    if (kind == KernelKind::fk)
        return 1.0;
    // Median heuristic over pairwise distances; cap the sample so that large
    // training sets do not make this quadratic scan expensive.
    const Eigen::Index n = std::min<Eigen::Index>(X.rows(), 300);
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            d2.push_back((X.row(i) - X.row(j)).squaredNorm());
    if (d2.empty())
        return 1.0;
    std::nth_element(d2.begin(), d2.begin() + d2.size() / 2, d2.end());
    const double med2 = d2[d2.size() / 2];
    if (med2 <= 0.0)
        return 1.0;
    return 1.0 / (2.0 * med2);
}

} // namespace distgp
