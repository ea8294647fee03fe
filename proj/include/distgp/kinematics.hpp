#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

namespace distgp {

using Configuration = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;

/// Planar serial chain with rectangular link profiles. Base is fixed at the
/// workspace origin with zero base orientation.
struct RobotModel {
    int dof = 0;
    Eigen::VectorXd link_lengths;                 // one per link, > 0
    double link_width = 0.1;                      // > 0
    std::vector<std::array<double, 2>> joint_limits; // radians, [lo, hi]

    void validate() const;
    double reach() const { return link_lengths.sum(); }

    static RobotModel uniform(int dof, double link_length = 1.0,
                              double link_width = 0.1,
                              double limit = 3.14159265358979323846);
};

struct LinkPose {
    Vec2 origin;  // proximal end of the link
    double angle; // absolute orientation, radians
};

std::vector<LinkPose> link_poses(const RobotModel& robot, const Configuration& x);

/// Control point m is the distal endpoint of link m. Returned as a D x 2 matrix.
Eigen::MatrixXd control_points(const RobotModel& robot, const Configuration& x);

/// Control points flattened to a 2D-vector (x0,y0,x1,y1,...); kernel hot path.
void control_points_flat(const RobotModel& robot, const Configuration& x,
                         Eigen::Ref<Eigen::VectorXd> out);

Vec2 end_effector(const RobotModel& robot, const Configuration& x);

/// 2 x D Jacobian of the end-effector position; column j is the 90-degree
/// rotation of (end effector - joint j origin).
Eigen::MatrixXd ee_jacobian(const RobotModel& robot, const Configuration& x);

} // namespace distgp
