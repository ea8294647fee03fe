#include "distgp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace distgp {

namespace {

constexpr int kGjkMaxIterations = 64;
constexpr int kEpaMaxIterations = 128;
constexpr double kGjkProgressTol = 1e-10;
constexpr double kEpaTol = 1e-9;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

} // namespace

void ConvexPolygon::validate() const {
    const int n = static_cast<int>(vertices.size());
    if (n < 3)
        throw std::invalid_argument("polygon: needs at least 3 vertices");
    if (signed_area() <= 0.0)
        throw std::invalid_argument("polygon: vertices must be counter-clockwise");
    for (int i = 0; i < n; ++i) {
        const Vec2 e0 = vertices[(i + 1) % n] - vertices[i];
        const Vec2 e1 = vertices[(i + 2) % n] - vertices[(i + 1) % n];
        if (cross2(e0, e1) <= -1e-9)
            throw std::invalid_argument("polygon: not convex");
    }
}

double ConvexPolygon::signed_area() const {
    const int n = static_cast<int>(vertices.size());
    double area = 0.0;
    for (int i = 0; i < n; ++i)
        area += cross2(vertices[i], vertices[(i + 1) % n]);
    return 0.5 * area;
}

Vec2 ConvexPolygon::centroid() const {
    Vec2 c(0.0, 0.0);
    for (const auto& v : vertices)
        c += v;
    return c / static_cast<double>(vertices.size());
}

ConvexPolygon ConvexPolygon::rectangle(const Vec2& origin, double angle,
                                       double length, double width) {
    const double h = 0.5 * width;
    const double ca = std::cos(angle), sa = std::sin(angle);
    const Vec2 ex(ca, sa), ey(-sa, ca);
    ConvexPolygon p;
    p.vertices = {origin - h * ey, origin + length * ex - h * ey,
                  origin + length * ex + h * ey, origin + h * ey};
    return p;
}

void Environment::validate() const {
    robot.validate();
    if (obstacles.empty())
        throw std::invalid_argument("environment: needs at least one obstacle");
    for (const auto& o : obstacles)
        o.validate();
}

std::vector<ConvexPolygon> link_bodies(const RobotModel& robot, const Configuration& x) {
    const auto poses = link_poses(robot, x);
    std::vector<ConvexPolygon> bodies;
    bodies.reserve(poses.size());
    for (int i = 0; i < robot.dof; ++i)
        bodies.push_back(ConvexPolygon::rectangle(poses[i].origin, poses[i].angle,
                                                  robot.link_lengths[i], robot.link_width));
    return bodies;
}

Vec2 support(const ConvexPolygon& poly, const Vec2& dir) {
    if (dir.x() == 0.0 && dir.y() == 0.0)
        throw std::invalid_argument("support: degenerate direction");
    const Vec2* best = &poly.vertices[0];
    double best_dot = best->dot(dir);
    for (std::size_t i = 1; i < poly.vertices.size(); ++i) {
        const double d = poly.vertices[i].dot(dir);
        if (d > best_dot) {
            best_dot = d;
            best = &poly.vertices[i];
        }
    }
    return *best;
}

namespace {

Vec2 support_diff(const ConvexPolygon& a, const ConvexPolygon& b, const Vec2& dir) {
    return support(a, dir) - support(b, -dir);
}

// Closest point to the origin on a segment [a, b], with the supporting
// vertex subset (1 = a, 2 = b, 3 = both).
Vec2 closest_on_segment(const Vec2& a, const Vec2& b, int& keep) {
    const Vec2 ab = b - a;
    const double denom = ab.squaredNorm();
    if (denom < 1e-300) {
        keep = 1;
        return a;
    }
    const double t = -a.dot(ab) / denom;
    if (t <= 0.0) {
        keep = 1;
        return a;
    }
    if (t >= 1.0) {
        keep = 2;
        return b;
    }
    keep = 3;
    return a + t * ab;
}

// Closest point to the origin on a triangle; reduces the simplex to the
// supporting feature. Returns true when the origin is inside.
bool closest_on_triangle(Vec2 simplex[3], int& size, Vec2& closest) {
    const Vec2 a = simplex[0], b = simplex[1], c = simplex[2];
    const Vec2 ab = b - a, ac = c - a;
    const double d1 = -ab.dot(a), d2 = -ac.dot(a);
    if (d1 <= 0.0 && d2 <= 0.0) {
        size = 1;
        simplex[0] = a;
        closest = a;
        return false;
    }
    const double d3 = -ab.dot(b), d4 = -ac.dot(b);
    if (d3 >= 0.0 && d4 <= d3) {
        size = 1;
        simplex[0] = b;
        closest = b;
        return false;
    }
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double t = d1 / (d1 - d3);
        size = 2;
        simplex[0] = a;
        simplex[1] = b;
        closest = a + t * ab;
        return false;
    }
    const double d5 = -ab.dot(c), d6 = -ac.dot(c);
    if (d6 >= 0.0 && d5 <= d6) {
        size = 1;
        simplex[0] = c;
        closest = c;
        return false;
    }
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double t = d2 / (d2 - d6);
        size = 2;
        simplex[0] = a;
        simplex[1] = c;
        closest = a + t * ac;
        return false;
    }
    const double va = d3 * d6 - d4 * d5;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        size = 2;
        simplex[0] = b;
        simplex[1] = c;
        closest = b + t * (c - b);
        return false;
    }
    closest = Vec2(0.0, 0.0);
    return true;
}

} // namespace

GjkResult gjk_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
    a.validate();
    b.validate();

    GjkResult res;
    Vec2 d0 = a.centroid() - b.centroid();
    if (d0.squaredNorm() < 1e-24)
        d0 = Vec2(1.0, 0.0);
    res.simplex[0] = support_diff(a, b, d0);
    res.simplex_size = 1;

    Vec2 closest = res.simplex[0];
    for (int iter = 0; iter < kGjkMaxIterations; ++iter) {
        if (res.simplex_size == 1) {
            closest = res.simplex[0];
        } else if (res.simplex_size == 2) {
            int keep = 0;
            closest = closest_on_segment(res.simplex[0], res.simplex[1], keep);
            if (keep == 1) {
                res.simplex_size = 1;
            } else if (keep == 2) {
                res.simplex[0] = res.simplex[1];
                res.simplex_size = 1;
            }
        } else {
            if (closest_on_triangle(res.simplex, res.simplex_size, closest)) {
                res.intersecting = true;
                return res;
            }
        }

        const double vnorm = closest.norm();
        if (vnorm < 1e-12) {
            // Origin lies on the current simplex; touching or penetrating.
            res.intersecting = true;
            return res;
        }
        const Vec2 w = support_diff(a, b, -closest);
        // No further progress toward the origin: closest is the separation.
        if (closest.squaredNorm() - closest.dot(w) <= kGjkProgressTol * vnorm) {
            res.distance = vnorm;
            return res;
        }
        bool duplicate = false;
        for (int i = 0; i < res.simplex_size; ++i)
            if ((res.simplex[i] - w).squaredNorm() < 1e-24)
                duplicate = true;
        if (duplicate) {
            res.distance = vnorm;
            return res;
        }
        res.simplex[res.simplex_size++] = w;
    }
    throw std::runtime_error("gjk: iteration cap exceeded");
}

namespace {

// Monotone-chain convex hull; used to seed EPA from a degenerate simplex.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](const Vec2& p, const Vec2& q) {
        return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](const Vec2& p, const Vec2& q) {
                              return (p - q).squaredNorm() < 1e-24;
                          }),
              pts.end());
    const int n = static_cast<int>(pts.size());
    if (n < 3)
        return pts;
    std::vector<Vec2> hull(2 * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
            --k;
        hull[k++] = pts[i];
    }
    const int lower = k + 1;
    for (int i = n - 2; i >= 0; --i) {
        while (k >= lower && cross2(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0)
            --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

} // namespace

double epa_penetration(const ConvexPolygon& a, const ConvexPolygon& b,
                       const GjkResult& gjk) {
    if (!gjk.intersecting)
        throw std::invalid_argument("epa: bodies are disjoint");

    // Seed polytope. A terminal simplex smaller than a triangle (origin on a
    // vertex or edge of the Minkowski difference) is expanded with compass
    // supports before hulling.
    std::vector<Vec2> pts(gjk.simplex, gjk.simplex + gjk.simplex_size);
    if (gjk.simplex_size < 3) {
        static const Vec2 dirs[] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1},
                                    {1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
        for (const auto& d : dirs)
            pts.push_back(support_diff(a, b, d));
    }
    std::vector<Vec2> poly = convex_hull(pts);
    if (poly.size() < 3)
        throw std::runtime_error("epa: degenerate Minkowski difference");

    for (int iter = 0; iter < kEpaMaxIterations; ++iter) {
        // Closest boundary point of the polytope to the origin.
        double best_dist = std::numeric_limits<double>::infinity();
        Vec2 best_point(0, 0);
        int best_edge = 0;
        const int n = static_cast<int>(poly.size());
        for (int i = 0; i < n; ++i) {
            int keep = 0;
            const Vec2 p = closest_on_segment(poly[i], poly[(i + 1) % n], keep);
            const double d = p.norm();
            if (d < best_dist) {
                best_dist = d;
                best_point = p;
                best_edge = i;
            }
        }
        if (best_dist < 1e-12)
            return 0.0; // touching contact

        Vec2 dir = best_point / best_dist;
        const Vec2 w = support_diff(a, b, dir);
        if (w.dot(dir) - best_dist < kEpaTol)
            return best_dist;
        const Vec2& p0 = poly[best_edge];
        const Vec2& p1 = poly[(best_edge + 1) % poly.size()];
        if ((w - p0).squaredNorm() < 1e-24 || (w - p1).squaredNorm() < 1e-24)
            return best_dist;
        poly.insert(poly.begin() + best_edge + 1, w);
    }
    throw std::runtime_error("epa: iteration cap exceeded");
}

double signed_distance(const ConvexPolygon& a, const ConvexPolygon& b) {
    const GjkResult res = gjk_distance(a, b);
    if (!res.intersecting)
        return res.distance;
    const double depth = epa_penetration(a, b, res);
    if (depth < 1e-12)
        return 0.0;
    return -depth;
}

DistanceResult distance_to_collision(const Environment& env, const Configuration& x) {
    if (x.size() != env.robot.dof)
        throw std::invalid_argument("distance_to_collision: configuration dimension mismatch");
    if (env.obstacles.empty())
        throw std::invalid_argument("distance_to_collision: no obstacles");
    const auto bodies = link_bodies(env.robot, x);
    DistanceResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(bodies.size()); ++i) {
        for (int j = 0; j < static_cast<int>(env.obstacles.size()); ++j) {
            const double d = signed_distance(bodies[i], env.obstacles[j]);
            if (d < best.value) {
                best.value = d;
                best.link_index = i;
                best.obstacle_index = j;
            }
        }
    }
    return best;
}

double noisy_distance(const Environment& env, const Configuration& x, double eta, Rng& rng) {
    if (eta < 0.0)
        throw std::invalid_argument("noisy_distance: eta must be >= 0");
    const double d = distance_to_collision(env, x).value;
    if (eta == 0.0)
        return d;
    std::normal_distribution<double> noise(0.0, eta);
    return d + noise(rng);
}

} // namespace distgp
