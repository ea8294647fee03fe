#pragma once

#include <optional>
#include <string>
#include <vector>

#include "distgp/dataset.hpp"
#include "distgp/estimator.hpp"
#include "distgp/optimize.hpp"

namespace distgp {

struct MetricsReport {
    double mse = 0.0;
    std::optional<double> tpmse; // absent when no positive-label rows
    std::optional<double> tnmse; // absent when no negative-label rows
    int n_test = 0;
    int n_pos = 0;
    int n_neg = 0;
    double mean_true_distance = 0.0;
};

/// MSE / TPMSE / TNMSE against a noise-free test set.
MetricsReport eval_metrics(DistanceEstimator& predictor, const Dataset& testset);

struct TimingReport {
    double per_query_mean_us = 0.0;
    double per_query_p50_us = 0.0;
    double per_query_p95_us = 0.0;
    int n_queries = 0;
    int n_warmup = 0;
};

/// Single-threaded wall-clock timing; warmup queries excluded.
TimingReport time_queries(DistanceEstimator& predictor, const Eigen::MatrixXd& queries,
                          int n_warmup = 100);

// ---- Scene generation ----

struct SceneConfig {
    int dof = 7;
    double link_length = 1.0;
    double link_width = 0.1;
    int min_vertices = 3;
    int max_vertices = 8;
};

/// Convex polygon with its centroid uniform in the reachable annulus.
ConvexPolygon random_obstacle(const RobotModel& robot, Rng& rng, int min_vertices = 3,
                              int max_vertices = 8);

/// Robot plus one random obstacle; fully determined by the seed.
Environment random_environment(const SceneConfig& cfg, std::uint64_t seed);

/// Two box obstacles mirrored about the x axis leaving a horizontal passage
/// of width gap_factor * link_width.
Environment narrow_passage_environment(const SceneConfig& cfg, double gap_factor = 3.0);

// ---- Accuracy experiment (per-method MSE + query time rows) ----

struct AccuracyConfig {
    std::uint64_t master_seed = 1;
    int n_scenes = 10;
    int n_train = 500;
    int n_test = 2000;
    double eta = 0.05;
    SceneConfig scene;
    Eta2Mode eta2_mode = Eta2Mode::searched();
    int jobs = 1;
};

struct AccuracyRow {
    std::string method;
    std::optional<MetricsReport> metrics; // absent for the oracle row
    double query_us = 0.0;
};

struct SceneAccuracyResult {
    std::uint64_t env_seed = 0;
    double mean_true_distance = 0.0;
    std::vector<AccuracyRow> rows; // oracle, kr, gp-gaussian, gp-fk
};

struct AccuracyExperimentResult {
    AccuracyConfig config;
    std::vector<SceneAccuracyResult> scenes;
};

AccuracyExperimentResult run_accuracy_experiment(const AccuracyConfig& cfg);

// ---- Optimization experiment (Tables II / III pattern) ----

struct OptExperimentConfig {
    OptimizeMode mode = OptimizeMode::constraint;
    std::uint64_t master_seed = 1;
    int n_trials = 20;
    std::vector<std::string> estimators = {"oracle", "noisy-oracle", "kr",
                                           "gp-gaussian", "gp-fk"};
    OptimizeParams params;
    SceneConfig scene;
    int n_train = 500;
    double eta = 0.05;
    Eta2Mode eta2_mode = Eta2Mode::searched();
    int jobs = 1;
};

struct TrialMethodResult {
    std::string method;
    OptimizeReport report;
    Eigen::MatrixXd waypoints;
    /// min oracle d_R - d_min (constraint mode) or min oracle d_R (maximize).
    double oracle_clearance_metric = 0.0;
};

struct TrialResult {
    std::uint64_t seed = 0;
    bool skipped = false; // RRT or start/goal sampling failure
    std::string skip_reason;
    std::vector<TrialMethodResult> methods;
};

struct OptExperimentResult {
    OptExperimentConfig config;
    std::vector<TrialResult> trials;
    int n_skipped = 0;
};

OptExperimentResult run_optimization_experiment(const OptExperimentConfig& cfg);

// ---- Narrow-passage hybrid trace ----

struct NarrowPassageConfig {
    std::uint64_t master_seed = 1;
    double gap_factor = 3.0;
    SceneConfig scene;
    int n_train = 500;
    /// Joint-space spread (radians, per joint) of the task-focused training
    /// samples around the seed trajectory; <= 0 falls back to uniform
    /// sampling over the joint limits.
    double train_spread = 0.2;
    /// Leading fraction of the seed trajectory the training samples cover;
    /// the remainder (the tight approach to the passage) stays unexplored.
    double train_fraction = 0.4;
    double eta = 0.05;
    double z = 1.64;
    int n_sensor = 5;
    Eta2Mode eta2_mode = Eta2Mode::fixed(0.0025);
    // Constraint mode with d_min below the passage clearance (the default gap
    // of 3 link widths leaves 0.1 of clearance for a straight arm).
    OptimizeParams params = [] {
        OptimizeParams p;
        p.mode = OptimizeMode::constraint;
        p.d_min = 0.05;
        return p;
    }();
};

struct NarrowTraceRow {
    int t = 0;
    double gp_mean = 0.0;
    double gp_sigma = 0.0;
    double hybrid_value = 0.0;
    bool sensor_branch = false;
    double confidence = 0.0; // P(d_R > 0)
    double oracle = 0.0;
};

struct NarrowPassageResult {
    NarrowPassageConfig config;
    Eigen::MatrixXd waypoints;
    OptimizeReport report;
    std::vector<NarrowTraceRow> trace;
};

NarrowPassageResult run_narrow_passage(const NarrowPassageConfig& cfg);

// ---- C-space field rasterization (2-DOF scenes only) ----

struct FieldRow {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double oracle = 0.0;
    std::optional<double> model_mean;
    std::optional<double> model_sigma;
    std::optional<double> confidence;
};

std::vector<FieldRow> export_cspace_field(const Environment& env, const GpModel* model,
                                          int resolution);

// ---- Delimited-report rendering (CSV plus aligned text tables) ----

std::string accuracy_csv(const AccuracyExperimentResult& r);
std::string accuracy_table(const AccuracyExperimentResult& r);
std::string optimization_csv(const OptExperimentResult& r);
std::string optimization_table(const OptExperimentResult& r);
std::string narrow_passage_csv(const NarrowPassageResult& r);
std::string field_csv(const std::vector<FieldRow>& rows);

} // namespace distgp
