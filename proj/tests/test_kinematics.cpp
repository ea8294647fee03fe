#include <doctest.h>

#include <cmath>
#include <random>

#include "distgp/kinematics.hpp"
#include "support/reference.hpp"

using namespace distgp;

TEST_CASE("robot model validation") {
    CHECK_NOTHROW(RobotModel::uniform(3).validate());

    RobotModel bad = RobotModel::uniform(3);
    bad.link_lengths[1] = 0.0;
    CHECK_THROWS(bad.validate());

    bad = RobotModel::uniform(3);
    bad.link_width = -0.1;
    CHECK_THROWS(bad.validate());

    bad = RobotModel::uniform(3);
    bad.joint_limits[0] = {1.0, -1.0};
    CHECK_THROWS(bad.validate());

    bad = RobotModel::uniform(3);
    bad.joint_limits.pop_back();
    CHECK_THROWS(bad.validate());

    CHECK(RobotModel::uniform(4, 0.5).reach() == doctest::Approx(2.0));
}

TEST_CASE("forward kinematics, hand-worked cases") {
    const RobotModel r2 = RobotModel::uniform(2);

    Configuration zero = Eigen::VectorXd::Zero(2);
    Vec2 ee = end_effector(r2, zero);
    CHECK(ee.x() == doctest::Approx(2.0));
    CHECK(ee.y() == doctest::Approx(0.0));

    Configuration bent(2);
    bent << M_PI / 2.0, -M_PI / 2.0;
    ee = end_effector(r2, bent);
    CHECK(ee.x() == doctest::Approx(1.0));
    CHECK(ee.y() == doctest::Approx(1.0));

    const auto poses = link_poses(r2, bent);
    REQUIRE(poses.size() == 2);
    CHECK(poses[0].origin.norm() == doctest::Approx(0.0));
    CHECK(poses[0].angle == doctest::Approx(M_PI / 2.0));
    CHECK(poses[1].origin.x() == doctest::Approx(0.0));
    CHECK(poses[1].origin.y() == doctest::Approx(1.0));
    CHECK(poses[1].angle == doctest::Approx(0.0));

    const Eigen::MatrixXd cp = control_points(r2, bent);
    REQUIRE(cp.rows() == 2);
    CHECK(cp(0, 0) == doctest::Approx(0.0));
    CHECK(cp(0, 1) == doctest::Approx(1.0));
    CHECK(cp(1, 0) == doctest::Approx(1.0));
    CHECK(cp(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("forward kinematics matches homogeneous-transform reference") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    std::uniform_real_distribution<double> len(0.2, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const int dof = 1 + static_cast<int>(rng() % 9);
        RobotModel robot = RobotModel::uniform(dof);
        for (int i = 0; i < dof; ++i)
            robot.link_lengths[i] = len(rng);
        Configuration x(dof);
        for (int i = 0; i < dof; ++i)
            x[i] = angle(rng);

        const Eigen::MatrixXd expect = refimpl::fk_chain_reference(robot.link_lengths, x);
        const Eigen::MatrixXd got = control_points(robot, x);
        REQUIRE(got.rows() == dof);
        CHECK((got - expect).cwiseAbs().maxCoeff() < 1e-10);

        Eigen::VectorXd flat(2 * dof);
        control_points_flat(robot, x, flat);
        for (int m = 0; m < dof; ++m) {
            CHECK(flat[2 * m] == got(m, 0));
            CHECK(flat[2 * m + 1] == got(m, 1));
        }

        const Vec2 ee = end_effector(robot, x);
        CHECK(ee.x() == doctest::Approx(expect(dof - 1, 0)).epsilon(1e-12));
        CHECK(ee.y() == doctest::Approx(expect(dof - 1, 1)).epsilon(1e-12));
    }
}

TEST_CASE("chain structure invariants") {
    const RobotModel robot = RobotModel::uniform(6);
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        Configuration x(6);
        for (int i = 0; i < 6; ++i)
            x[i] = angle(rng);
        const auto poses = link_poses(robot, x);
        const Eigen::MatrixXd cp = control_points(robot, x);

        // Consecutive control points are exactly one link length apart, and
        // each link origin is the previous control point.
        Vec2 prev(0.0, 0.0);
        for (int m = 0; m < 6; ++m) {
            CHECK((poses[m].origin - prev).norm() < 1e-12);
            const Vec2 p = cp.row(m).transpose();
            CHECK((p - prev).norm() == doctest::Approx(robot.link_lengths[m]).epsilon(1e-12));
            prev = p;
        }

        // 2-pi periodicity in any single joint.
        Configuration shifted = x;
        shifted[2] += 2.0 * M_PI;
        CHECK((end_effector(robot, shifted) - end_effector(robot, x)).norm() < 1e-9);
    }
}

TEST_CASE("end-effector jacobian matches central differences") {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    const double h = 1e-6;
    for (int trial = 0; trial < 30; ++trial) {
        const int dof = 2 + static_cast<int>(rng() % 6);
        const RobotModel robot = RobotModel::uniform(dof);
        Configuration x(dof);
        for (int i = 0; i < dof; ++i)
            x[i] = angle(rng);

        const Eigen::MatrixXd J = ee_jacobian(robot, x);
        REQUIRE(J.rows() == 2);
        REQUIRE(J.cols() == dof);
        for (int j = 0; j < dof; ++j) {
            Configuration xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Vec2 fd = (end_effector(robot, xp) - end_effector(robot, xm)) / (2.0 * h);
            CHECK((J.col(j) - fd).norm() < 1e-6);
        }
    }
}
