#pragma once

#include <cstdint>
#include <string>

#include "distgp/geometry.hpp"

namespace distgp {

struct DatasetMeta {
    std::uint64_t env_hash = 0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    bool noise_free = true;
};

struct Dataset {
    Eigen::MatrixXd X; // N x D
    Eigen::VectorXd y;
    DatasetMeta meta;
};

/// Content digest of an environment (FNV-1a over the canonical serialization).
std::uint64_t environment_hash(const Environment& env);

/// Each joint sampled independently and uniformly over its limits.
Eigen::MatrixXd sample_configs(const RobotModel& robot, int n, Rng& rng);

/// Labels every row with a noisy distance measurement. Rows use independent
/// streams derived from (seed, row), so output is independent of jobs.
Dataset label_dataset(const Eigen::MatrixXd& X, const Environment& env, double eta,
                      std::uint64_t seed, int jobs = 1);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

} // namespace distgp
