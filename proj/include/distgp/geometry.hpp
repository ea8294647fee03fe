#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "distgp/kinematics.hpp"
#include "distgp/rng.hpp"

namespace distgp {

/// Strictly convex polygon with counter-clockwise vertex order.
struct ConvexPolygon {
    std::vector<Vec2> vertices;

    void validate() const; // throws std::invalid_argument
    double signed_area() const;
    Vec2 centroid() const;

    static ConvexPolygon rectangle(const Vec2& origin, double angle,
                                   double length, double width);
};

struct Environment {
    RobotModel robot;
    std::vector<ConvexPolygon> obstacles;

    void validate() const;
};

/// Rectangles covering each link of the arm at configuration x.
std::vector<ConvexPolygon> link_bodies(const RobotModel& robot, const Configuration& x);

/// Vertex of the polygon maximizing the dot product with dir.
Vec2 support(const ConvexPolygon& poly, const Vec2& dir);

struct GjkResult {
    bool intersecting = false;
    double distance = 0.0;        // separation distance when disjoint
    Vec2 simplex[3];              // Minkowski-difference points; triangle
    int simplex_size = 0;         // encloses the origin when intersecting
};

GjkResult gjk_distance(const ConvexPolygon& a, const ConvexPolygon& b);

/// Penetration depth of two intersecting polygons, seeded with the GJK
/// terminal simplex. Throws if the bodies are disjoint.
double epa_penetration(const ConvexPolygon& a, const ConvexPolygon& b,
                       const GjkResult& gjk);

/// Separation distance when disjoint, negated penetration depth otherwise.
/// Touching contact is reported as 0.
double signed_distance(const ConvexPolygon& a, const ConvexPolygon& b);

struct DistanceResult {
    double value = 0.0;
    int link_index = -1;
    int obstacle_index = -1;
};

/// Minimum signed distance over all (link, obstacle) pairs.
DistanceResult distance_to_collision(const Environment& env, const Configuration& x);

/// True distance plus zero-mean Gaussian noise of standard deviation eta.
double noisy_distance(const Environment& env, const Configuration& x, double eta, Rng& rng);

} // namespace distgp
