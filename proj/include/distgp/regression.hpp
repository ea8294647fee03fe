#pragma once

#include <Eigen/Core>
#include <optional>

#include "distgp/kernels.hpp"

namespace distgp {

/// Exact GP posterior over distance labels. Immutable once fitted.
struct GpModel {
    KernelSpec spec;
    Eigen::MatrixXd X;      // N x D training configurations
    Eigen::VectorXd y;      // N labels
    double eta2 = 0.0;      // measurement noise variance
    double prior_mean = 0.0;
    double jitter = 0.0;    // diagonal jitter actually used by the factorization

    Eigen::MatrixXd chol_L; // lower factor of K + (eta2 + jitter) I
    Eigen::VectorXd alpha;  // (K + (eta2 + jitter) I)^-1 (y - prior_mean)

    // fk-kernel cache: flattened training control points (N x 2M).
    Eigen::MatrixXd train_cp;

    int size() const { return static_cast<int>(X.rows()); }
};

GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
               const KernelSpec& spec, double eta2, double prior_mean = 0.0);

/// Cross-kernel vector k(x, X) against the training set.
void gp_cross_kernel(const GpModel& model, const Configuration& x,
                     Eigen::Ref<Eigen::VectorXd> out);

double gp_mean(const GpModel& model, const Configuration& x);
double gp_variance(const GpModel& model, const Configuration& x);
double gp_log_marginal_likelihood(const GpModel& model);

/// mu(x) - z * sigma(x)
double confidence_lower_bound(const GpModel& model, const Configuration& x, double z);

struct Eta2Mode {
    bool search = false;
    double fixed_value = 0.0025; // 0.05^2

    static Eta2Mode fixed(double v) { return {false, v}; }
    static Eta2Mode searched() { return {true, 0.0}; }
};

struct HyperparamResult {
    KernelSpec spec;
    double eta2 = 0.0;
    double log_marginal_likelihood = 0.0;
};

/// Grid search maximizing the log marginal likelihood. The gamma grid is
/// default * 2^k for k in [-4, 4]; the eta2 grid (search mode) is 10^k for
/// k in [-6, 0]. Ties break toward smaller gamma, then smaller eta2.
HyperparamResult select_hyperparameters(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        KernelKind kind, const RobotModel& robot,
                                        const Eta2Mode& eta2_mode);

/// Nadaraya-Watson regressor; gaussian kernel only.
struct KrModel {
    KernelSpec spec;
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
};

KrModel kr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec);
double kr_predict(const KrModel& model, const Configuration& x);

} // namespace distgp
