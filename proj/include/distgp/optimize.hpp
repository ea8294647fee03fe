#pragma once

#include <string>
#include <vector>

#include "distgp/estimator.hpp"

namespace distgp {

struct RrtParams {
    double step = 0.2;             // max-norm extension step, radians
    double goal_bias = 0.05;
    double check_resolution = 0.05; // max joint change between edge checks
    int max_iterations = 50000;
};

/// Feasible C-space path from start to goal, collision checked against the
/// noise-free oracle. Throws when start/goal collide or the cap is exhausted.
Eigen::MatrixXd rrt_plan(const Environment& env, const Configuration& start,
                         const Configuration& goal, Rng& rng,
                         const RrtParams& params = {});

/// Arc-length-uniform reparameterization (in C-space) to exactly T waypoints.
Eigen::MatrixXd resample_trajectory(const Eigen::MatrixXd& path, int T);

/// Sum of workspace end-effector displacements between consecutive waypoints.
double path_length(const Eigen::MatrixXd& waypoints, const RobotModel& robot);

enum class OptimizeMode { constraint, maximize };

struct OptimizeParams {
    OptimizeMode mode = OptimizeMode::constraint;
    int T = 30;
    double dtheta_max = 0.3;
    double d_min = 0.2;
    int outer_max = 20;
    int inner_max = 60;
    double grad_tol = 1e-6;
    double fd_step = 1e-6;          // central differences on estimator terms
    double softmin_temp = 0.01;     // maximize mode inner objective only
    double constraint_tol = 1e-4;
};

struct OptimizeProblem {
    const Environment* env = nullptr;      // oracle used for verification fields
    DistanceEstimator* estimator = nullptr;
    Configuration start;
    Configuration goal;
    OptimizeParams params;
};

struct OptimizeReport {
    std::string estimator;
    double path_length = 0.0;
    double estimator_min_distance = 0.0; // min over waypoints per the estimator
    double oracle_min_distance = 0.0;    // min over waypoints per the oracle
    double objective = 0.0;              // L (constraint) or C*L with hard min (maximize)
    int outer_iterations = 0;
    int inner_iterations = 0;
    bool converged = false;
    std::string status;                  // "converged" | "max-iters"
    std::vector<double> merit_history;   // accepted outer iterates, non-increasing
    double wall_time_s = 0.0;
};

struct OptimizeResult {
    Eigen::MatrixXd waypoints; // T x D, endpoints pinned
    OptimizeReport report;
};

OptimizeResult optimize_constraint(const OptimizeProblem& problem,
                                   const Eigen::MatrixXd& seed);
OptimizeResult optimize_maximize(const OptimizeProblem& problem,
                                 const Eigen::MatrixXd& seed);

} // namespace distgp
