#pragma once

#include <memory>
#include <string>

#include "distgp/hybrid.hpp"

namespace distgp {

/// Pluggable distance-to-collision predictor. predict() is non-const because
/// noisy and hybrid estimators consume a random stream.
class DistanceEstimator {
public:
    virtual ~DistanceEstimator() = default;
    virtual double predict(const Configuration& x) = 0;
    virtual const std::string& name() const = 0;
};

class OracleEstimator final : public DistanceEstimator {
public:
    explicit OracleEstimator(const Environment& env) : env_(&env) {}
    double predict(const Configuration& x) override {
        return distance_to_collision(*env_, x).value;
    }
    const std::string& name() const override {
        static const std::string n = "oracle";
        return n;
    }

private:
    const Environment* env_;
};

/// Oracle plus fresh Gaussian noise per evaluation ("GJK/EPA (Noisy)").
class NoisyOracleEstimator final : public DistanceEstimator {
public:
    NoisyOracleEstimator(const Environment& env, double eta, std::uint64_t seed)
        : env_(&env), eta_(eta), rng_(make_rng(seed)) {}
    double predict(const Configuration& x) override {
        return noisy_distance(*env_, x, eta_, rng_);
    }
    const std::string& name() const override {
        static const std::string n = "noisy-oracle";
        return n;
    }

private:
    const Environment* env_;
    double eta_;
    Rng rng_;
};

class KrEstimator final : public DistanceEstimator {
public:
    explicit KrEstimator(const KrModel& model) : model_(&model) {}
    double predict(const Configuration& x) override { return kr_predict(*model_, x); }
    const std::string& name() const override {
        static const std::string n = "kr";
        return n;
    }

private:
    const KrModel* model_;
};

class GpEstimator final : public DistanceEstimator {
public:
    explicit GpEstimator(const GpModel& model)
        : model_(&model),
          name_(model.spec.kind == KernelKind::gaussian ? "gp-gaussian" : "gp-fk"),
          kvec_(model.X.rows()),
          tmp_(model.X.rows()),
          cp_(model.spec.kind == KernelKind::fk ? 2 * model.spec.robot.dof : 0) {
        if (model.spec.kind == KernelKind::gaussian)
            xsq_ = model.X.rowwise().squaredNorm();
    }

    double predict(const Configuration& x) override;
    const std::string& name() const override { return name_; }

private:
    const GpModel* model_;
    std::string name_;
    Eigen::VectorXd kvec_; // preallocated query workspace
    Eigen::VectorXd tmp_;
    Eigen::VectorXd xsq_;  // training-row squared norms (gaussian kernel)
    Eigen::VectorXd cp_;
};

class HybridWrapper final : public DistanceEstimator {
public:
    HybridWrapper(const GpModel& gp, const Environment& env, double eta,
                  std::uint64_t seed, double z = 1.64, int n_sensor = 5,
                  double threshold = 0.0)
        : rng_(make_rng(seed)) {
        hybrid_.gp = &gp;
        hybrid_.z = z;
        hybrid_.n_sensor = n_sensor;
        hybrid_.sensor = {&env, eta, &rng_};
        hybrid_.threshold = threshold;
    }

    double predict(const Configuration& x) override {
        const HybridPrediction p = hybrid_predict(hybrid_, x);
        if (p.branch != last_branch_) {
            if (have_last_)
                ++branch_switches_;
            last_branch_ = p.branch;
            have_last_ = true;
        }
        return p.value;
    }
    const std::string& name() const override {
        static const std::string n = "hybrid";
        return n;
    }
    const HybridEstimator& hybrid() const { return hybrid_; }
    int branch_switches() const { return branch_switches_; }

private:
    Rng rng_;
    HybridEstimator hybrid_;
    HybridBranch last_branch_ = HybridBranch::gp;
    bool have_last_ = false;
    int branch_switches_ = 0;
};

} // namespace distgp
