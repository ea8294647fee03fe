#include <doctest.h>

#include <cmath>

#include "distgp/dataset.hpp"
#include "distgp/optimize.hpp"

using namespace distgp;

namespace {

ConvexPolygon box(double cx, double cy, double w, double h) {
    ConvexPolygon p;
    p.vertices = {Vec2(cx - w / 2, cy - h / 2), Vec2(cx + w / 2, cy - h / 2),
                  Vec2(cx + w / 2, cy + h / 2), Vec2(cx - w / 2, cy + h / 2)};
    return p;
}

// Obstacle far outside the reach: planning is effectively unconstrained.
Environment free_env(int dof) {
    Environment env;
    env.robot = RobotModel::uniform(dof);
    env.obstacles = {box(100.0, 100.0, 1.0, 1.0)};
    return env;
}

Environment blocked_env() {
    Environment env;
    env.robot = RobotModel::uniform(2);
    env.obstacles = {box(1.5, 0.9, 0.6, 0.6)};
    return env;
}

double max_step(const Eigen::MatrixXd& W) {
    double s = 0.0;
    for (int t = 0; t + 1 < W.rows(); ++t)
        s = std::max(s, (W.row(t + 1) - W.row(t)).cwiseAbs().maxCoeff());
    return s;
}

} // namespace

TEST_CASE("rrt handles trivial and invalid inputs") {
    const Environment env = free_env(2);
    Rng rng = make_rng(1, 0);

    Configuration s = Eigen::VectorXd::Zero(2);
    const Eigen::MatrixXd same = rrt_plan(env, s, s, rng);
    REQUIRE(same.rows() >= 1);
    CHECK((same.row(0).transpose() - s).norm() == 0.0);
    CHECK((same.row(same.rows() - 1).transpose() - s).norm() == 0.0);

    // Colliding endpoints are rejected.
    Environment hit = env;
    hit.obstacles = {box(1.0, 0.0, 0.4, 0.4)};
    CHECK_THROWS(rrt_plan(hit, s, Eigen::VectorXd::Constant(2, 1.0), rng));
    CHECK_THROWS(rrt_plan(hit, Eigen::VectorXd::Constant(2, 1.0), s, rng));

    // Dimension mismatch.
    CHECK_THROWS(rrt_plan(env, s, Eigen::VectorXd::Zero(3), rng));
}

TEST_CASE("rrt connects free space reliably with bounded steps") {
    const Environment env = free_env(3);
    Configuration s = Eigen::VectorXd::Constant(3, -1.0);
    Configuration g = Eigen::VectorXd::Constant(3, 1.5);
    int successes = 0;
    for (int seed = 0; seed < 100; ++seed) {
        Rng rng = make_rng(seed, 0);
        try {
            const Eigen::MatrixXd path = rrt_plan(env, s, g, rng);
            ++successes;
            CHECK((path.row(0).transpose() - s).norm() < 1e-12);
            CHECK((path.row(path.rows() - 1).transpose() - g).norm() < 1e-12);
            CHECK(max_step(path) <= 0.2 + 1e-9);
        } catch (const std::exception&) {
        }
    }
    CHECK(successes >= 99);

    // Deterministic for a fixed stream.
    Rng a = make_rng(5, 0), b = make_rng(5, 0);
    CHECK(rrt_plan(env, s, g, a) == rrt_plan(env, s, g, b));
}

TEST_CASE("rrt paths avoid obstacles along every edge") {
    const Environment env = blocked_env();
    Configuration s(2), g(2);
    s << M_PI / 2.0, 0.0;
    g << -M_PI / 2.0, 0.0;
    Rng rng = make_rng(33, 0);
    const Eigen::MatrixXd path = rrt_plan(env, s, g, rng);
    for (int t = 0; t + 1 < path.rows(); ++t) {
        const Eigen::VectorXd a = path.row(t), b = path.row(t + 1);
        const int steps = 20;
        for (int k = 0; k <= steps; ++k) {
            const Configuration q = a + (b - a) * (double(k) / steps);
            CHECK(distance_to_collision(env, q).value > 0.0);
        }
    }
}

TEST_CASE("trajectory resampling") {
    Eigen::MatrixXd path(3, 1);
    path << 0.0, 1.0, 3.0;
    const Eigen::MatrixXd r = resample_trajectory(path, 7);
    REQUIRE(r.rows() == 7);
    CHECK(r(0, 0) == doctest::Approx(0.0));
    CHECK(r(6, 0) == doctest::Approx(3.0));
    // Arc-length-uniform: consecutive gaps all equal 0.5.
    for (int t = 0; t + 1 < 7; ++t)
        CHECK(r(t + 1, 0) - r(t, 0) == doctest::Approx(0.5).epsilon(1e-12));

    // A straight segment resamples to the straight line.
    Eigen::MatrixXd seg(2, 2);
    seg << 0.0, 0.0, 1.0, 2.0;
    const Eigen::MatrixXd rs = resample_trajectory(seg, 5);
    for (int t = 0; t < 5; ++t) {
        CHECK(rs(t, 0) == doctest::Approx(t / 4.0).epsilon(1e-12));
        CHECK(rs(t, 1) == doctest::Approx(t / 2.0).epsilon(1e-12));
    }

    // Degenerate all-equal path stays put.
    Eigen::MatrixXd still(4, 2);
    still << 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0;
    const Eigen::MatrixXd rstill = resample_trajectory(still, 3);
    for (int t = 0; t < 3; ++t) {
        CHECK(rstill(t, 0) == doctest::Approx(1.0));
        CHECK(rstill(t, 1) == doctest::Approx(-1.0));
    }

    CHECK_THROWS(resample_trajectory(path, 1));
}

TEST_CASE("workspace path length") {
    const RobotModel robot = RobotModel::uniform(1);
    // End effector sweeps a quarter turn: chord length sqrt(2).
    Eigen::MatrixXd W(2, 1);
    W << 0.0, M_PI / 2.0;
    CHECK(path_length(W, robot) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    // Refinement: inserting waypoints never shortens the polyline and
    // converges to the arc length pi/2 from below.
    const Eigen::MatrixXd fine = resample_trajectory(W, 200);
    const double len = path_length(fine, robot);
    CHECK(len > std::sqrt(2.0));
    CHECK(len <= M_PI / 2.0 + 1e-9);
    CHECK(len == doctest::Approx(M_PI / 2.0).epsilon(1e-4));

    // Single waypoint has zero length.
    CHECK(path_length(W.topRows(1), robot) == 0.0);
}

TEST_CASE("constraint optimizer leaves a safe straight line alone and keeps contracts") {
    const Environment env = free_env(2);
    OracleEstimator oracle(env);

    OptimizeProblem prob;
    prob.env = &env;
    prob.estimator = &oracle;
    prob.start = Eigen::VectorXd::Zero(2);
    prob.goal = Eigen::VectorXd::Constant(2, 1.0);
    prob.params.T = 10;

    Eigen::MatrixXd seed(2, 2);
    seed.row(0) = prob.start.transpose();
    seed.row(1) = prob.goal.transpose();
    const Eigen::MatrixXd seed10 = resample_trajectory(seed, 10);

    const OptimizeResult res = optimize_constraint(prob, seed10);
    REQUIRE(res.waypoints.rows() == 10);

    // Endpoints pinned exactly.
    CHECK(res.waypoints.row(0) == seed10.row(0));
    CHECK(res.waypoints.row(9) == seed10.row(9));
    // Step limit respected.
    CHECK(max_step(res.waypoints) <= prob.params.dtheta_max + 1e-6);
    // The straight line is already optimal: length does not increase.
    CHECK(res.report.path_length <= path_length(seed10, env.robot) + 1e-6);
    // Far obstacle: clearance constraint trivially satisfied.
    CHECK(res.report.oracle_min_distance >= prob.params.d_min - 1e-6);
    CHECK(res.report.converged);
    CHECK(res.report.status == "converged");

    // Accepted-iterate merit history is monotone non-increasing.
    for (std::size_t i = 1; i < res.report.merit_history.size(); ++i)
        CHECK(res.report.merit_history[i] <= res.report.merit_history[i - 1] + 1e-9);
}

TEST_CASE("constraint optimizer shortens a detour while keeping clearance") {
    Environment env;
    env.robot = RobotModel::uniform(2);
    env.obstacles = {box(2.5, 0.0, 0.4, 0.4)};
    OracleEstimator oracle(env);

    Configuration s(2), g(2);
    s << 1.2, 0.3;
    g << 1.9, -0.4;

    OptimizeProblem prob;
    prob.env = &env;
    prob.estimator = &oracle;
    prob.start = s;
    prob.goal = g;
    prob.params.T = 15;
    prob.params.d_min = 0.2;

    // Deliberately wiggly seed between safe endpoints.
    Eigen::MatrixXd seed(15, 2);
    for (int t = 0; t < 15; ++t) {
        const double u = t / 14.0;
        seed.row(t) = ((1 - u) * s + u * g).transpose();
        seed(t, 1) += 0.25 * std::sin(3.0 * M_PI * u);
    }
    seed.row(0) = s.transpose();
    seed.row(14) = g.transpose();
    REQUIRE(distance_to_collision(env, s).value > prob.params.d_min);
    REQUIRE(distance_to_collision(env, g).value > prob.params.d_min);

    const OptimizeResult res = optimize_constraint(prob, seed);
    CHECK(res.report.path_length < path_length(seed, env.robot));
    CHECK(res.report.oracle_min_distance >= prob.params.d_min - 5e-3);
    CHECK(res.waypoints.row(0) == seed.row(0));
    CHECK(res.waypoints.row(14) == seed.row(14));
    CHECK(max_step(res.waypoints) <= prob.params.dtheta_max + 1e-6);

    // d_min = 0 with an already-feasible seed: pure descent on the length.
    OptimizeProblem relaxed = prob;
    relaxed.params.d_min = 0.0;
    const OptimizeResult res0 = optimize_constraint(relaxed, seed);
    CHECK(res0.report.path_length <= path_length(seed, env.robot) + 1e-9);
}

TEST_CASE("maximize mode with a distant obstacle acts like length minimization") {
    const Environment env = free_env(2);
    OracleEstimator oracle(env);

    OptimizeProblem prob;
    prob.env = &env;
    prob.estimator = &oracle;
    prob.start = Eigen::VectorXd::Zero(2);
    prob.goal = Eigen::VectorXd::Constant(2, 0.8);
    prob.params.mode = OptimizeMode::maximize;
    prob.params.T = 12;

    Eigen::MatrixXd seed(12, 2);
    for (int t = 0; t < 12; ++t) {
        const double u = t / 11.0;
        seed.row(t) = (u * prob.goal).transpose();
        seed(t, 0) += 0.2 * std::sin(2.0 * M_PI * u);
    }
    seed.row(0) = prob.start.transpose();
    seed.row(11) = prob.goal.transpose();

    const OptimizeResult res = optimize_maximize(prob, seed);
    // With a flat clearance weight the wiggle gets ironed out.
    CHECK(res.report.path_length < path_length(seed, env.robot) - 1e-3);
    CHECK(res.waypoints.row(0) == seed.row(0));
    CHECK(res.waypoints.row(11) == seed.row(11));
    CHECK(max_step(res.waypoints) <= prob.params.dtheta_max + 1e-6);
}

TEST_CASE("maximize mode lifts a penetrating seed on random scenes") {
    Rng scene_rng = make_rng(91, 0);
    std::uniform_real_distribution<double> angle(-1.2, 1.2);
    int improved = 0, total = 0;
    for (int scene = 0; scene < 20 && total < 12; ++scene) {
        Environment env;
        env.robot = RobotModel::uniform(2);
        Configuration s(2), g(2);
        s << angle(scene_rng), angle(scene_rng);
        g << angle(scene_rng), angle(scene_rng);
        if ((s - g).norm() < 0.5)
            continue;
        // Put a box on the end-effector position of the midpoint
        // configuration, so the straight-line seed penetrates.
        const Configuration mid = 0.5 * (s + g);
        const Vec2 hit = end_effector(env.robot, mid);
        env.obstacles = {box(hit.x(), hit.y(), 0.3, 0.3)};
        if (distance_to_collision(env, s).value < 0.05 ||
            distance_to_collision(env, g).value < 0.05)
            continue;

        OptimizeProblem prob;
        OracleEstimator oracle(env);
        prob.env = &env;
        prob.estimator = &oracle;
        prob.start = s;
        prob.goal = g;
        prob.params.mode = OptimizeMode::maximize;
        prob.params.T = 12;

        Eigen::MatrixXd line(2, 2);
        line.row(0) = s.transpose();
        line.row(1) = g.transpose();
        const Eigen::MatrixXd seed = resample_trajectory(line, 12);
        double seed_min = 1e300;
        for (int t = 0; t < 12; ++t)
            seed_min =
                std::min(seed_min, distance_to_collision(env, seed.row(t).transpose()).value);
        if (seed_min > -0.01)
            continue; // seed must genuinely penetrate

        ++total;
        const OptimizeResult res = optimize_maximize(prob, seed);
        CHECK(res.waypoints.row(0) == seed.row(0));
        CHECK(res.waypoints.row(11) == seed.row(11));
        CHECK(max_step(res.waypoints) <= prob.params.dtheta_max + 1e-6);
        // Descent contract on the reported objective.
        const double seed_obj = std::exp(-seed_min) * path_length(seed, env.robot);
        CHECK(res.report.objective <= seed_obj + 1e-6);
        if (res.report.oracle_min_distance > seed_min)
            ++improved;
    }
    REQUIRE(total >= 5);
    CHECK(improved == total);
}

TEST_CASE("optimizer input validation") {
    const Environment env = free_env(2);
    OracleEstimator oracle(env);
    OptimizeProblem prob;
    prob.env = &env;
    prob.estimator = &oracle;
    prob.start = Eigen::VectorXd::Zero(2);
    prob.goal = Eigen::VectorXd::Ones(2);
    prob.params.T = 10;

    Eigen::MatrixXd seed(2, 2);
    seed.row(0) = prob.start.transpose();
    seed.row(1) = prob.goal.transpose();

    // Seed whose endpoints disagree with the problem is rejected.
    Eigen::MatrixXd wrong = resample_trajectory(seed, 10);
    wrong.row(9).array() += 0.5;
    CHECK_THROWS(optimize_constraint(prob, wrong));

    // Mode mismatch is rejected.
    OptimizeProblem maxprob = prob;
    maxprob.params.mode = OptimizeMode::maximize;
    CHECK_THROWS(optimize_constraint(maxprob, resample_trajectory(seed, 10)));
    CHECK_THROWS(optimize_maximize(prob, resample_trajectory(seed, 10)));
}
