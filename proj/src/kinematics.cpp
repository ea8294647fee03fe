#include "distgp/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace distgp {

void RobotModel::validate() const {
    if (dof < 1)
        throw std::invalid_argument("robot: dof must be >= 1");
    if (link_lengths.size() != dof || static_cast<int>(joint_limits.size()) != dof)
        throw std::invalid_argument("robot: dof, link_lengths and joint_limits must agree");
    if (link_width <= 0.0)
        throw std::invalid_argument("robot: link_width must be > 0");
    for (int i = 0; i < dof; ++i) {
        if (link_lengths[i] <= 0.0)
            throw std::invalid_argument("robot: link lengths must be > 0");
        if (joint_limits[i][0] > joint_limits[i][1])
            throw std::invalid_argument("robot: joint limit lo > hi");
    }
}

RobotModel RobotModel::uniform(int dof, double link_length, double link_width, double limit) {
    RobotModel r;
    r.dof = dof;
    r.link_lengths = Eigen::VectorXd::Constant(dof, link_length);
    r.link_width = link_width;
    r.joint_limits.assign(dof, {-limit, limit});
    r.validate();
    return r;
}

namespace {
void check_dims(const RobotModel& robot, const Configuration& x) {
    if (x.size() != robot.dof)
        throw std::invalid_argument("configuration dimension does not match robot dof");
}
} // namespace

std::vector<LinkPose> link_poses(const RobotModel& robot, const Configuration& x) {
    check_dims(robot, x);
    std::vector<LinkPose> poses(robot.dof);
    Vec2 p(0.0, 0.0);
    double angle = 0.0;
    for (int k = 0; k < robot.dof; ++k) {
        angle += x[k];
        poses[k] = {p, angle};
        p += robot.link_lengths[k] * Vec2(std::cos(angle), std::sin(angle));
    }
    return poses;
}

Eigen::MatrixXd control_points(const RobotModel& robot, const Configuration& x) {
    check_dims(robot, x);
    Eigen::MatrixXd pts(robot.dof, 2);
    Vec2 p(0.0, 0.0);
    double angle = 0.0;
    for (int k = 0; k < robot.dof; ++k) {
        angle += x[k];
        p += robot.link_lengths[k] * Vec2(std::cos(angle), std::sin(angle));
        pts(k, 0) = p.x();
        pts(k, 1) = p.y();
    }
    return pts;
}

void control_points_flat(const RobotModel& robot, const Configuration& x,
                         Eigen::Ref<Eigen::VectorXd> out) {
    double px = 0.0, py = 0.0, angle = 0.0;
    for (int k = 0; k < robot.dof; ++k) {
        angle += x[k];
        px += robot.link_lengths[k] * std::cos(angle);
        py += robot.link_lengths[k] * std::sin(angle);
        out[2 * k] = px;
        out[2 * k + 1] = py;
    }
}

Vec2 end_effector(const RobotModel& robot, const Configuration& x) {
    check_dims(robot, x);
    Vec2 p(0.0, 0.0);
    double angle = 0.0;
    for (int k = 0; k < robot.dof; ++k) {
        angle += x[k];
        p += robot.link_lengths[k] * Vec2(std::cos(angle), std::sin(angle));
    }
    return p;
}

Eigen::MatrixXd ee_jacobian(const RobotModel& robot, const Configuration& x) {
    check_dims(robot, x);
    const auto poses = link_poses(robot, x);
    const Vec2 ee = poses.back().origin +
                    robot.link_lengths[robot.dof - 1] *
                        Vec2(std::cos(poses.back().angle), std::sin(poses.back().angle));
    Eigen::MatrixXd jac(2, robot.dof);
    for (int j = 0; j < robot.dof; ++j) {
        const Vec2 r = ee - poses[j].origin;
        jac(0, j) = -r.y();
        jac(1, j) = r.x();
    }
    return jac;
}

} // namespace distgp
