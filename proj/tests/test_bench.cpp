#include <doctest.h>

#include <cmath>

#include "distgp/bench.hpp"

using namespace distgp;

namespace {

// Estimator returning the oracle plus a constant offset.
class OffsetOracle final : public DistanceEstimator {
public:
    OffsetOracle(const Environment& env, double offset) : env_(&env), offset_(offset) {}
    double predict(const Configuration& x) override {
        return distance_to_collision(*env_, x).value + offset_;
    }
    const std::string& name() const override {
        static const std::string n = "offset-oracle";
        return n;
    }

private:
    const Environment* env_;
    double offset_;
};

Environment two_dof_env() {
    Environment env;
    env.robot = RobotModel::uniform(2);
    ConvexPolygon obs;
    obs.vertices = {Vec2(1.2, 0.8), Vec2(1.8, 0.8), Vec2(1.8, 1.4), Vec2(1.2, 1.4)};
    env.obstacles = {obs};
    return env;
}

} // namespace

TEST_CASE("metrics against a noise-free test set") {
    const Environment env = two_dof_env();
    Rng rng = make_rng(1, 0);
    const Eigen::MatrixXd X = sample_configs(env.robot, 500, rng);
    const Dataset testset = label_dataset(X, env, 0.0, 3);

    OracleEstimator oracle(env);
    const MetricsReport perfect = eval_metrics(oracle, testset);
    CHECK(perfect.mse == doctest::Approx(0.0));
    CHECK(perfect.n_test == 500);
    CHECK(perfect.n_pos + perfect.n_neg == 500);
    REQUIRE(perfect.tpmse.has_value());
    REQUIRE(perfect.tnmse.has_value());
    CHECK(*perfect.tpmse == doctest::Approx(0.0));
    CHECK(*perfect.tnmse == doctest::Approx(0.0));
    CHECK(perfect.mean_true_distance == doctest::Approx(testset.y.mean()));

    // Constant offset c gives MSE = TPMSE = TNMSE = c^2.
    OffsetOracle shifted(env, 0.1);
    const MetricsReport off = eval_metrics(shifted, testset);
    CHECK(off.mse == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(*off.tpmse == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(*off.tnmse == doctest::Approx(0.01).epsilon(1e-9));

    // MSE decomposes into the label-sign partition.
    CHECK(off.mse * off.n_test ==
          doctest::Approx(*off.tpmse * off.n_pos + *off.tnmse * off.n_neg).epsilon(1e-9));

    // Noisy test sets are rejected: the metrics are defined against truth.
    const Dataset noisy = label_dataset(X.topRows(50), env, 0.05, 4);
    CHECK_THROWS(eval_metrics(oracle, noisy));
}

TEST_CASE("metrics with single-sign test sets") {
    const Environment env = two_dof_env();
    // Handcrafted all-positive set (configurations pointing away).
    Eigen::MatrixXd X(12, 2);
    for (int i = 0; i < 12; ++i) {
        X(i, 0) = -M_PI / 2.0 - 0.3 + 0.05 * i;
        X(i, 1) = 0.1 * i - 0.5;
    }
    const Dataset ds = label_dataset(X, env, 0.0, 9);
    REQUIRE(ds.y.minCoeff() > 0.0);
    OracleEstimator oracle(env);
    const MetricsReport rep = eval_metrics(oracle, ds);
    CHECK(rep.n_neg == 0);
    CHECK(rep.tpmse.has_value());
    CHECK_FALSE(rep.tnmse.has_value());
}

TEST_CASE("query timing") {
    const Environment env = two_dof_env();
    Rng rng = make_rng(2, 0);
    const Eigen::MatrixXd Q = sample_configs(env.robot, 2000, rng);
    OracleEstimator oracle(env);
    const TimingReport t = time_queries(oracle, Q);
    CHECK(t.n_queries == 2000);
    CHECK(t.n_warmup == 100);
    CHECK(t.per_query_mean_us > 0.0);
    CHECK(t.per_query_p50_us > 0.0);
    CHECK(t.per_query_p95_us >= t.per_query_p50_us);

    // Too few queries for a stable estimate.
    CHECK_THROWS(time_queries(oracle, Q.topRows(500)));
}

TEST_CASE("random scene generation") {
    SceneConfig cfg;
    cfg.dof = 7;
    const Environment a = random_environment(cfg, 42);
    const Environment b = random_environment(cfg, 42);
    const Environment c = random_environment(cfg, 43);
    CHECK_NOTHROW(a.validate());
    CHECK(environment_hash(a) == environment_hash(b));
    CHECK(environment_hash(a) != environment_hash(c));
    CHECK(a.robot.dof == 7);
    REQUIRE(a.obstacles.size() == 1);

    // Obstacle centroid sits inside the reachable annulus, never at the base.
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Environment env = random_environment(cfg, seed);
        const double r = env.obstacles[0].centroid().norm();
        CHECK(r > 0.2 * env.robot.reach());
        CHECK(r < env.robot.reach());
        const auto& verts = env.obstacles[0].vertices;
        CHECK(verts.size() >= 3);
        CHECK(verts.size() <= 8);
    }
}

TEST_CASE("narrow passage scene") {
    SceneConfig cfg;
    cfg.dof = 7;
    const Environment env = narrow_passage_environment(cfg, 3.0);
    CHECK_NOTHROW(env.validate());
    REQUIRE(env.obstacles.size() == 2);

    // Mirrored about the x axis with a gap of 3 link widths.
    const Vec2 c0 = env.obstacles[0].centroid();
    const Vec2 c1 = env.obstacles[1].centroid();
    CHECK(c0.x() == doctest::Approx(c1.x()));
    CHECK(c0.y() == doctest::Approx(-c1.y()));
    double min_gap = 1e300;
    for (const auto& v : env.obstacles[0].vertices)
        min_gap = std::min(min_gap, std::fabs(v.y()));
    for (const auto& v : env.obstacles[1].vertices)
        min_gap = std::min(min_gap, std::fabs(v.y()));
    CHECK(2.0 * min_gap == doctest::Approx(3.0 * cfg.link_width).epsilon(1e-9));

    // A straight arm through the passage is collision-free with the expected
    // clearance; vertical arm is free too (passage is off to the side).
    Configuration straight = Eigen::VectorXd::Zero(7);
    const double d = distance_to_collision(env, straight).value;
    CHECK(d == doctest::Approx(0.5 * (3.0 - 1.0) * cfg.link_width).epsilon(1e-6));
}

TEST_CASE("small accuracy experiment runs deterministically") {
    AccuracyConfig cfg;
    cfg.master_seed = 7;
    cfg.n_scenes = 1;
    cfg.n_train = 60;
    cfg.n_test = 1200;
    cfg.scene.dof = 2;

    const AccuracyExperimentResult a = run_accuracy_experiment(cfg);
    REQUIRE(a.scenes.size() == 1);
    REQUIRE(a.scenes[0].rows.size() == 4);
    CHECK(a.scenes[0].rows[0].method == "oracle");
    CHECK_FALSE(a.scenes[0].rows[0].metrics.has_value());
    for (std::size_t i = 1; i < 4; ++i) {
        REQUIRE(a.scenes[0].rows[i].metrics.has_value());
        CHECK(a.scenes[0].rows[i].metrics->mse >= 0.0);
        CHECK(a.scenes[0].rows[i].query_us > 0.0);
    }

    cfg.jobs = 4;
    const AccuracyExperimentResult b = run_accuracy_experiment(cfg);
    for (std::size_t i = 1; i < 4; ++i)
        CHECK(a.scenes[0].rows[i].metrics->mse == b.scenes[0].rows[i].metrics->mse);

    const std::string csv = accuracy_csv(a);
    CHECK(csv.find("method") != std::string::npos);
    CHECK(csv.find("gp-fk") != std::string::npos);
    CHECK(accuracy_table(a).find("gp-gaussian") != std::string::npos);
}

TEST_CASE("cspace field export") {
    const Environment env = two_dof_env();
    const auto rows = export_cspace_field(env, nullptr, 16);
    REQUIRE(rows.size() == 16 * 16);
    for (const auto& r : rows) {
        CHECK(r.theta1 >= -M_PI);
        CHECK(r.theta1 <= M_PI);
        CHECK_FALSE(r.model_mean.has_value());
        CHECK(std::isfinite(r.oracle));
    }
    // Spot-check one oracle value.
    Configuration q(2);
    q << rows[0].theta1, rows[0].theta2;
    CHECK(rows[0].oracle == doctest::Approx(distance_to_collision(env, q).value));

    Environment seven;
    seven.robot = RobotModel::uniform(7);
    seven.obstacles = env.obstacles;
    CHECK_THROWS(export_cspace_field(seven, nullptr, 8));

    const std::string csv = field_csv(rows);
    CHECK(csv.find("theta1") != std::string::npos);
}
