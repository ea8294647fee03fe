#include "distgp/regression.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace distgp {

namespace {

constexpr double kJitterStart = 1e-10;
constexpr double kJitterCap = 1e-4;

struct Factorization {
    Eigen::MatrixXd chol_L;
    Eigen::VectorXd alpha;
    double jitter = 0.0;
};

// Cholesky of K + (eta2 + jitter) I with jitter escalation.
Factorization factorize(const Eigen::MatrixXd& K, const Eigen::VectorXd& y_centered,
                        double eta2) {
    for (double jitter = kJitterStart; jitter <= kJitterCap; jitter *= 10.0) {
        Eigen::MatrixXd A = K;
        A.diagonal().array() += eta2 + jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) {
            Factorization f;
            f.chol_L = llt.matrixL();
            f.alpha = llt.solve(y_centered);
            f.jitter = jitter;
            return f;
        }
    }
    throw std::runtime_error("gp_fit: ill-conditioned Gram matrix");
}

double lml_from_fit(const Eigen::VectorXd& y_centered, const Factorization& f) {
    const double n = static_cast<double>(y_centered.size());
    return -0.5 * y_centered.dot(f.alpha) - f.chol_L.diagonal().array().log().sum() -
           0.5 * n * std::log(2.0 * M_PI);
}

} // namespace

GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const KernelSpec& spec, double eta2, double prior_mean) {
    spec.validate();
    if (X.rows() != y.size() || X.rows() < 1)
        throw std::invalid_argument("gp_fit: X and y sizes must agree and be >= 1");
    if (eta2 < 0.0)
        throw std::invalid_argument("gp_fit: eta2 must be >= 0");

    GpModel m;
    m.spec = spec;
    m.X = X;
    m.y = y;
    m.eta2 = eta2;
    m.prior_mean = prior_mean;
    if (spec.kind == KernelKind::fk)
        m.train_cp = control_point_rows(spec.robot, X);

    const Eigen::MatrixXd K = gram_matrix(spec, X, X);
    Factorization f = factorize(K, (y.array() - prior_mean).matrix(), eta2);
    m.chol_L = std::move(f.chol_L);
    m.alpha = std::move(f.alpha);
    m.jitter = f.jitter;
    return m;
}

void gp_cross_kernel(const GpModel& model, const Configuration& x,
                     Eigen::Ref<Eigen::VectorXd> out) {
    const Eigen::Index n = model.X.rows();
    if (model.spec.kind == KernelKind::gaussian) {
        const double gamma = model.spec.gamma;
        for (Eigen::Index i = 0; i < n; ++i)
            out[i] = std::exp(-gamma * (model.X.row(i).transpose() - x).squaredNorm());
    } else {
        const int m = model.spec.robot.dof;
        Eigen::VectorXd cp(2 * m);
        control_points_flat(model.spec.robot, x, cp);
        const double half_gamma = 0.5 * model.spec.gamma;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sum = 0.0;
            for (int k = 0; k < m; ++k) {
                const double dx = model.train_cp(i, 2 * k) - cp[2 * k];
                const double dy = model.train_cp(i, 2 * k + 1) - cp[2 * k + 1];
                const double u = 1.0 + half_gamma * (dx * dx + dy * dy);
                sum += 1.0 / (u * u);
            }
            out[i] = sum;
        }
    }
}

double gp_mean(const GpModel& model, const Configuration& x) {
    if (x.size() != model.X.cols())
        throw std::invalid_argument("gp_mean: dimension mismatch");
    Eigen::VectorXd k(model.X.rows());
    gp_cross_kernel(model, x, k);
    return k.dot(model.alpha) + model.prior_mean;
}

double gp_variance(const GpModel& model, const Configuration& x) {
    if (x.size() != model.X.cols())
        throw std::invalid_argument("gp_variance: dimension mismatch");
    Eigen::VectorXd k(model.X.rows());
    gp_cross_kernel(model, x, k);
    const Eigen::VectorXd v = model.chol_L.triangularView<Eigen::Lower>().solve(k);
    const double var = model.spec.prior_variance() - v.squaredNorm();
    if (var < -1e-9)
        throw std::runtime_error("gp_variance: negative variance indicates numerical failure");
    return var > 0.0 ? var : 0.0;
}

double gp_log_marginal_likelihood(const GpModel& model) {
    Factorization f;
    f.chol_L = model.chol_L;
    f.alpha = model.alpha;
    return lml_from_fit((model.y.array() - model.prior_mean).matrix(), f);
}

double confidence_lower_bound(const GpModel& model, const Configuration& x, double z) {
    if (z < 0.0)
        throw std::invalid_argument("confidence_lower_bound: z must be >= 0");
    return gp_mean(model, x) - z * std::sqrt(gp_variance(model, x));
}

HyperparamResult select_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        KernelKind kind, const RobotModel& robot,
                                        const Eta2Mode& eta2_mode) {
    if (X.rows() < 10)
        throw std::invalid_argument("select_hyperparameters: need at least 10 points");

    const double base_gamma = default_gamma(kind, X);
    const Eigen::Index n = X.rows();

    // Squared distances are gamma-independent; compute them once and reuse
    // across the whole grid.
    Eigen::MatrixXd d2_cspace;
    std::vector<Eigen::MatrixXd> d2_cp;
    if (kind == KernelKind::gaussian) {
        d2_cspace.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j) {
                const double d = (X.row(i) - X.row(j)).squaredNorm();
                d2_cspace(i, j) = d;
                d2_cspace(j, i) = d;
            }
    } else {
        const Eigen::MatrixXd cp = control_point_rows(robot, X);
        d2_cp.resize(robot.dof);
        for (int k = 0; k < robot.dof; ++k) {
            d2_cp[k].resize(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double dx = cp(i, 2 * k) - cp(j, 2 * k);
                    const double dy = cp(i, 2 * k + 1) - cp(j, 2 * k + 1);
                    const double d = dx * dx + dy * dy;
                    d2_cp[k](i, j) = d;
                    d2_cp[k](j, i) = d;
                }
        }
    }

    std::vector<double> eta2_grid;
    if (eta2_mode.search) {
        for (int k = -6; k <= 0; ++k)
            eta2_grid.push_back(std::pow(10.0, k));
    } else {
        eta2_grid.push_back(eta2_mode.fixed_value);
    }

    HyperparamResult best;
    bool have_best = false;
    for (int g = -4; g <= 4; ++g) {
        const double gamma = base_gamma * std::pow(2.0, g);
        Eigen::MatrixXd K;
        if (kind == KernelKind::gaussian) {
            K = (-gamma * d2_cspace.array()).exp().matrix();
        } else {
            K = Eigen::MatrixXd::Zero(n, n);
            for (const auto& d2 : d2_cp)
                K.array() += (1.0 + 0.5 * gamma * d2.array()).square().inverse();
        }
        for (const double eta2 : eta2_grid) {
            double lml;
            try {
                const Factorization f = factorize(K, y, eta2);
                lml = lml_from_fit(y, f);
            } catch (const std::runtime_error&) {
                continue;
            }
            if (!have_best || lml > best.log_marginal_likelihood) {
                best.spec.kind = kind;
                best.spec.gamma = gamma;
                if (kind == KernelKind::fk)
                    best.spec.robot = robot;
                best.eta2 = eta2;
                best.log_marginal_likelihood = lml;
                have_best = true;
            }
        }
    }
    if (!have_best)
        throw std::runtime_error("select_hyperparameters: no candidate factorized");
    return best;
}

KrModel kr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec) {
    if (spec.kind != KernelKind::gaussian)
        throw std::invalid_argument("kr_fit: kernel regression supports the gaussian kernel only");
    spec.validate();
    if (X.rows() != y.size() || X.rows() < 1)
        throw std::invalid_argument("kr_fit: X and y sizes must agree and be >= 1");
    return {spec, X, y};
}

double kr_predict(const KrModel& model, const Configuration& x) {
    if (x.size() != model.X.cols())
        throw std::invalid_argument("kr_predict: dimension mismatch");
    const Eigen::Index n = model.X.rows();
    double num = 0.0, den = 0.0;
    double best_d2 = std::numeric_limits<double>::infinity();
    Eigen::Index nearest = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d2 = (model.X.row(i).transpose() - x).squaredNorm();
        const double w = std::exp(-model.spec.gamma * d2);
        num += w * model.y[i];
        den += w;
        if (d2 < best_d2) {
            best_d2 = d2;
            nearest = i;
        }
    }
    // All weights underflowed: fall back to the nearest-neighbor label.
    if (den <= 1e-300)
        return model.y[nearest];
    return num / den;
}

} // namespace distgp
