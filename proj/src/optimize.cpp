#include "distgp/optimize.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>

namespace distgp {

namespace {

bool edge_free(const Environment& env, const Configuration& a, const Configuration& b,
               double resolution) {
    const double span = (b - a).cwiseAbs().maxCoeff();
    const int steps = std::max(1, static_cast<int>(std::ceil(span / resolution)));
    for (int i = 1; i <= steps; ++i) {
        const Configuration q = a + (static_cast<double>(i) / steps) * (b - a);
        if (distance_to_collision(env, q).value <= 0.0)
            return false;
    }
    return true;
}

} // namespace

Eigen::MatrixXd rrt_plan(const Environment& env, const Configuration& start,
                         const Configuration& goal, Rng& rng, const RrtParams& params) {
    env.validate();
    const int dof = env.robot.dof;
    if (start.size() != dof || goal.size() != dof)
        throw std::invalid_argument("rrt_plan: configuration dimension mismatch");
    if (distance_to_collision(env, start).value <= 0.0)
        throw std::invalid_argument("rrt_plan: start configuration in collision");
    if (distance_to_collision(env, goal).value <= 0.0)
        throw std::invalid_argument("rrt_plan: goal configuration in collision");

    if ((goal - start).norm() < 1e-15) {
        Eigen::MatrixXd path(1, dof);
        path.row(0) = start.transpose();
        return path;
    }

    std::vector<Configuration> nodes{start};
    std::vector<int> parent{-1};
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    for (int iter = 0; iter < params.max_iterations; ++iter) {
        Configuration sample(dof);
        if (u01(rng) < params.goal_bias) {
            sample = goal;
        } else {
            for (int j = 0; j < dof; ++j) {
                std::uniform_real_distribution<double> u(env.robot.joint_limits[j][0],
                                                         env.robot.joint_limits[j][1]);
                sample[j] = u(rng);
            }
        }
        int nearest = 0;
        double best = (nodes[0] - sample).squaredNorm();
        for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
            const double d = (nodes[i] - sample).squaredNorm();
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        const Configuration delta = sample - nodes[nearest];
        const double span = delta.cwiseAbs().maxCoeff();
        if (span < 1e-12)
            continue;
        const Configuration q_new =
            span <= params.step ? sample
                                : Configuration(nodes[nearest] + (params.step / span) * delta);
        if (!edge_free(env, nodes[nearest], q_new, params.check_resolution))
            continue;
        nodes.push_back(q_new);
        parent.push_back(nearest);
        if ((goal - q_new).cwiseAbs().maxCoeff() <= params.step &&
            edge_free(env, q_new, goal, params.check_resolution)) {
            nodes.push_back(goal);
            parent.push_back(static_cast<int>(nodes.size()) - 2);
            std::vector<int> chain;
            for (int i = static_cast<int>(nodes.size()) - 1; i >= 0; i = parent[i])
                chain.push_back(i);
            Eigen::MatrixXd path(chain.size(), dof);
            for (std::size_t k = 0; k < chain.size(); ++k)
                path.row(static_cast<Eigen::Index>(k)) =
                    nodes[chain[chain.size() - 1 - k]].transpose();
            return path;
        }
    }
    throw std::runtime_error("rrt_plan: no plan found within iteration cap");
}

Eigen::MatrixXd resample_trajectory(const Eigen::MatrixXd& path, int T) {
    if (T < 2)
        throw std::invalid_argument("resample_trajectory: T must be >= 2");
    if (path.rows() < 1)
        throw std::invalid_argument("resample_trajectory: empty path");

    const Eigen::Index n = path.rows();
    std::vector<double> cum(n, 0.0);
    for (Eigen::Index i = 1; i < n; ++i)
        cum[i] = cum[i - 1] + (path.row(i) - path.row(i - 1)).norm();
    const double total = cum[n - 1];

    Eigen::MatrixXd out(T, path.cols());
    if (total < 1e-15) {
        for (int k = 0; k < T; ++k)
            out.row(k) = path.row(0);
        return out;
    }
    for (int k = 0; k < T; ++k) {
        const double s = total * k / (T - 1);
        Eigen::Index seg = 0;
        while (seg + 2 < n && cum[seg + 1] < s)
            ++seg;
        const double len = cum[seg + 1] - cum[seg];
        const double t = len > 0.0 ? (s - cum[seg]) / len : 0.0;
        out.row(k) = path.row(seg) + t * (path.row(seg + 1) - path.row(seg));
    }
    out.row(0) = path.row(0);
    out.row(T - 1) = path.row(n - 1);
    return out;
}

double path_length(const Eigen::MatrixXd& waypoints, const RobotModel& robot) {
    double total = 0.0;
    Vec2 prev = end_effector(robot, waypoints.row(0).transpose());
    for (Eigen::Index t = 1; t < waypoints.rows(); ++t) {
        const Vec2 p = end_effector(robot, waypoints.row(t).transpose());
        total += (p - prev).norm();
        prev = p;
    }
    return total;
}

namespace {

using ObjectiveFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

struct LbfgsOutcome {
    Eigen::VectorXd z;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking.
LbfgsOutcome lbfgs_minimize(const ObjectiveFn& fn, Eigen::VectorXd z0, int max_iters,
                            double grad_tol) {
    constexpr int kHistory = 8;
    constexpr double kArmijoC1 = 1e-4;

    LbfgsOutcome out;
    out.z = std::move(z0);
    Eigen::VectorXd grad(out.z.size());
    out.value = fn(out.z, &grad);
    if (!std::isfinite(out.value))
        throw std::runtime_error("optimizer: objective is not finite");

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < max_iters; ++iter) {
        const double gnorm = grad.norm();
        if (gnorm <= grad_tol) {
            out.converged = true;
            return out;
        }

        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = grad;
        std::vector<double> a(s_hist.size());
        for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
            a[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= a[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double b = rho_hist[i] * y_hist[i].dot(q);
            q += (a[i] - b) * s_hist[i];
        }
        Eigen::VectorXd dir = -q;
        double slope = grad.dot(dir);
        if (slope >= 0.0) { // fall back to steepest descent
            dir = -grad;
            slope = -gnorm * gnorm;
        }

        double step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
        double f_new = out.value;
        Eigen::VectorXd z_new;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            z_new = out.z + step * dir;
            f_new = fn(z_new, nullptr);
            if (std::isfinite(f_new) && f_new <= out.value + kArmijoC1 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        ++out.iterations;
        if (!accepted)
            return out; // stalled line search

        Eigen::VectorXd grad_new(out.z.size());
        const double f_check = fn(z_new, &grad_new);
        (void)f_check;
        const Eigen::VectorXd s = z_new - out.z;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kHistory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        out.z = std::move(z_new);
        out.value = f_new;
        grad = std::move(grad_new);
    }
    return out;
}

// Shared transcription: endpoints are eliminated, the decision vector is the
// (T-2) x D interior block.
struct Transcription {
    const OptimizeProblem* problem = nullptr;
    int T = 0;
    int dof = 0;

    Eigen::MatrixXd assemble(const Eigen::VectorXd& z) const {
        Eigen::MatrixXd theta(T, dof);
        theta.row(0) = problem->start.transpose();
        for (int t = 1; t < T - 1; ++t)
            theta.row(t) = z.segment((t - 1) * dof, dof).transpose();
        theta.row(T - 1) = problem->goal.transpose();
        return theta;
    }

    Eigen::VectorXd pack(const Eigen::MatrixXd& theta) const {
        Eigen::VectorXd z((T - 2) * dof);
        for (int t = 1; t < T - 1; ++t)
            z.segment((t - 1) * dof, dof) = theta.row(t).transpose();
        return z;
    }
};

// max(0, -c) summed; used by the exact-penalty merit.
double total_violation(const Eigen::VectorXd& c) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        v += std::max(0.0, -c[i]);
    return v;
}

double max_violation(const Eigen::VectorXd& c) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
        v = std::max(v, -c[i]);
    return v;
}

// Augmented-Lagrangian term for an inequality c >= 0.
inline double al_term(double c, double lambda, double rho) {
    const double m = std::max(0.0, lambda - rho * c);
    return (m * m - lambda * lambda) / (2.0 * rho);
}

inline double al_term_dc(double c, double lambda, double rho) {
    return -std::max(0.0, lambda - rho * c);
}

struct PathLengthGrad {
    double length = 0.0;
    Eigen::MatrixXd dtheta; // T x D
};

PathLengthGrad path_length_with_grad(const Eigen::MatrixXd& theta, const RobotModel& robot,
                                     bool need_grad) {
    const int T = static_cast<int>(theta.rows());
    PathLengthGrad out;
    if (need_grad)
        out.dtheta = Eigen::MatrixXd::Zero(T, robot.dof);
    std::vector<Vec2> p(T);
    for (int t = 0; t < T; ++t)
        p[t] = end_effector(robot, theta.row(t).transpose());
    for (int t = 0; t + 1 < T; ++t) {
        const Vec2 d = p[t + 1] - p[t];
        const double len = d.norm();
        out.length += len;
        if (need_grad && len > 1e-12) {
            const Vec2 u = d / len;
            const Eigen::MatrixXd jt = ee_jacobian(robot, theta.row(t).transpose());
            const Eigen::MatrixXd jt1 = ee_jacobian(robot, theta.row(t + 1).transpose());
            out.dtheta.row(t) -= (jt.transpose() * u).transpose();
            out.dtheta.row(t + 1) += (jt1.transpose() * u).transpose();
        }
    }
    return out;
}

class AlSolver {
public:
    AlSolver(const OptimizeProblem& problem, const Eigen::MatrixXd& seed)
        : problem_(problem), seed_(seed) {
        trans_.problem = &problem;
        trans_.T = static_cast<int>(seed.rows());
        trans_.dof = static_cast<int>(seed.cols());
        if (trans_.T < 2)
            throw std::invalid_argument("optimize: trajectory needs at least 2 waypoints");
        if ((seed.row(0).transpose() - problem.start).norm() > 1e-9 ||
            (seed.row(trans_.T - 1).transpose() - problem.goal).norm() > 1e-9)
            throw std::invalid_argument("optimize: seed endpoints do not match problem");
        if (problem.estimator == nullptr || problem.env == nullptr)
            throw std::invalid_argument("optimize: missing estimator or environment");
    }

    OptimizeResult run() {
        const auto t_begin = std::chrono::steady_clock::now();
        const int T = trans_.T;
        const int dof = trans_.dof;
        OptimizeResult result;
        result.report.estimator = std::string(problem_.estimator->name());

        if (T == 2) { // endpoints only; nothing to optimize
            result.waypoints = seed_;
            finalize(result, 0, 0, true);
            result.report.wall_time_s = elapsed_s(t_begin);
            return result;
        }

        const bool constraint_mode = problem_.params.mode == OptimizeMode::constraint;
        const int n_dist = constraint_mode ? T - 2 : 0;
        const int n_step = T - 1;
        lambda_ = Eigen::VectorXd::Zero(n_dist + n_step);
        rho_ = 10.0;

        Eigen::VectorXd z = trans_.pack(seed_);
        double best_merit = merit(z);
        Eigen::VectorXd best_z = z;
        result.report.merit_history.push_back(best_merit);

        int inner_total = 0;
        int outer = 0;
        bool converged = false;
        double prev_viol = std::numeric_limits<double>::infinity();
        for (outer = 1; outer <= problem_.params.outer_max; ++outer) {
            auto fn = [this](const Eigen::VectorXd& zz, Eigen::VectorXd* grad) {
                return augmented_lagrangian(zz, grad);
            };
            LbfgsOutcome inner =
                lbfgs_minimize(fn, z, problem_.params.inner_max, problem_.params.grad_tol);
            inner_total += inner.iterations;
            z = inner.z;

            const Eigen::VectorXd c = constraints(z);
            const double m = merit(z);
            if (m <= best_merit + 1e-12) {
                best_merit = m;
                best_z = z;
                result.report.merit_history.push_back(m);
            }

            const double viol = max_violation(c);
            if (viol <= problem_.params.constraint_tol && inner.converged) {
                converged = true;
                break;
            }
            for (Eigen::Index i = 0; i < c.size(); ++i)
                lambda_[i] = std::max(0.0, lambda_[i] - rho_ * c[i]);
            if (viol > 0.5 * prev_viol)
                rho_ = std::min(rho_ * 10.0, 1e8);
            prev_viol = viol;
            (void)dof;
        }

        result.waypoints = trans_.assemble(best_z);
        finalize(result, std::min(outer, problem_.params.outer_max), inner_total, converged);
        result.report.wall_time_s = elapsed_s(t_begin);
        return result;
    }

private:
    static double elapsed_s(std::chrono::steady_clock::time_point begin) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin)
            .count();
    }

    // Constraint vector c >= 0: clearance terms (constraint mode, interior
    // waypoints) followed by step-size terms.
    Eigen::VectorXd constraints(const Eigen::VectorXd& z) {
        const Eigen::MatrixXd theta = trans_.assemble(z);
        const int T = trans_.T;
        const bool constraint_mode = problem_.params.mode == OptimizeMode::constraint;
        const int n_dist = constraint_mode ? T - 2 : 0;
        Eigen::VectorXd c(n_dist + (T - 1));
        for (int t = 0; t < n_dist; ++t)
            c[t] = problem_.estimator->predict(theta.row(t + 1).transpose()) -
                   problem_.params.d_min;
        for (int t = 0; t + 1 < T; ++t)
            c[n_dist + t] =
                problem_.params.dtheta_max - (theta.row(t + 1) - theta.row(t)).norm();
        return c;
    }

    // Exact-penalty merit used only for accepting outer iterates; reported
    // objectives use the hard min.
    double merit(const Eigen::VectorXd& z) {
        constexpr double kPenalty = 1000.0;
        const Eigen::MatrixXd theta = trans_.assemble(z);
        const Eigen::VectorXd c = constraints(z);
        double f;
        if (problem_.params.mode == OptimizeMode::constraint) {
            f = path_length(theta, problem_.env->robot);
        } else {
            // log of exp(-min d) * L; same minimizers, no under/overflow.
            double dmin = std::numeric_limits<double>::infinity();
            for (int t = 0; t < trans_.T; ++t)
                dmin = std::min(dmin, problem_.estimator->predict(theta.row(t).transpose()));
            f = -dmin + std::log(std::max(path_length(theta, problem_.env->robot), 1e-12));
        }
        return f + kPenalty * total_violation(c);
    }

    double augmented_lagrangian(const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
        const Eigen::MatrixXd theta = trans_.assemble(z);
        const int T = trans_.T;
        const int dof = trans_.dof;
        const bool need_grad = grad != nullptr;
        const bool constraint_mode = problem_.params.mode == OptimizeMode::constraint;
        const RobotModel& robot = problem_.env->robot;

        Eigen::MatrixXd dtheta = Eigen::MatrixXd::Zero(T, dof); // accumulated d/dtheta
        const PathLengthGrad pl = path_length_with_grad(theta, robot, need_grad);

        double value;
        if (constraint_mode) {
            value = pl.length;
            if (need_grad)
                dtheta = pl.dtheta;
            // clearance constraints on interior waypoints
            for (int t = 1; t < T - 1; ++t) {
                const double d = problem_.estimator->predict(theta.row(t).transpose());
                const double c = d - problem_.params.d_min;
                const double lam = lambda_[t - 1];
                value += al_term(c, lam, rho_);
                if (need_grad) {
                    const double coeff = al_term_dc(c, lam, rho_);
                    if (coeff != 0.0)
                        dtheta.row(t) += coeff * fd_distance_grad(theta.row(t)).transpose();
                }
            }
        } else {
            // log(exp(-softmin d) * L) = -softmin + log L; the log form keeps
            // gradients usable when clearances are large (exp(-d) underflows).
            const double tau = problem_.params.softmin_temp;
            Eigen::VectorXd d(T);
            for (int t = 0; t < T; ++t)
                d[t] = problem_.estimator->predict(theta.row(t).transpose());
            const double m = d.minCoeff();
            const Eigen::ArrayXd e = (-(d.array() - m) / tau).exp();
            const double esum = e.sum();
            const double softmin = m - tau * std::log(esum);
            const double len = std::max(pl.length, 1e-12);
            value = -softmin + std::log(len);
            if (need_grad) {
                dtheta = pl.dtheta / len;
                for (int t = 1; t < T - 1; ++t) {
                    const double w = e[t] / esum;
                    if (w > 1e-12)
                        dtheta.row(t) -= w * fd_distance_grad(theta.row(t)).transpose();
                }
            }
        }

        // step-size constraints
        const int n_dist = constraint_mode ? T - 2 : 0;
        for (int t = 0; t + 1 < T; ++t) {
            const Eigen::VectorXd delta = (theta.row(t + 1) - theta.row(t)).transpose();
            const double norm = delta.norm();
            const double c = problem_.params.dtheta_max - norm;
            const double lam = lambda_[n_dist + t];
            value += al_term(c, lam, rho_);
            if (need_grad && norm > 1e-12) {
                const double coeff = al_term_dc(c, lam, rho_);
                if (coeff != 0.0) {
                    const Eigen::VectorXd u = delta / norm;
                    dtheta.row(t + 1) -= coeff * u.transpose();
                    dtheta.row(t) += coeff * u.transpose();
                }
            }
        }

        if (!std::isfinite(value))
            throw std::runtime_error("optimizer: objective diverged (NaN/inf)");
        if (need_grad) {
            grad->resize((T - 2) * dof);
            for (int t = 1; t < T - 1; ++t)
                grad->segment((t - 1) * dof, dof) = dtheta.row(t).transpose();
        }
        return value;
    }

    // Central finite differences of the estimator distance at one waypoint.
    Eigen::VectorXd fd_distance_grad(const Eigen::RowVectorXd& theta_t) {
        const int dof = trans_.dof;
        const double h = problem_.params.fd_step;
        Eigen::VectorXd g(dof);
        Eigen::VectorXd q = theta_t.transpose();
        for (int j = 0; j < dof; ++j) {
            const double saved = q[j];
            q[j] = saved + h;
            const double fp = problem_.estimator->predict(q);
            q[j] = saved - h;
            const double fm = problem_.estimator->predict(q);
            q[j] = saved;
            g[j] = (fp - fm) / (2.0 * h);
        }
        return g;
    }

    // Exact feasibility polish for the step bound: cyclic projection onto the
    // per-step ball constraints with the endpoints fixed. The augmented
    // Lagrangian only drives violations to its own tolerance; this removes
    // the residual so the returned trajectory honors the bound outright. The
    // feasible set is nonempty whenever the endpoint chord fits in T-1 steps.
    void project_step_bound(Eigen::MatrixXd& theta) const {
        const double bound = problem_.params.dtheta_max;
        const int T = static_cast<int>(theta.rows());
        for (int sweep = 0; sweep < 200; ++sweep) {
            double worst = 0.0;
            for (int t = 0; t + 1 < T; ++t) {
                const Eigen::VectorXd d = theta.row(t + 1) - theta.row(t);
                const double n = d.norm();
                if (n <= bound)
                    continue;
                worst = std::max(worst, n - bound);
                const Eigen::VectorXd shift = d * ((n - bound) / n);
                if (t == 0)
                    theta.row(t + 1) -= shift.transpose();
                else if (t + 1 == T - 1)
                    theta.row(t) += shift.transpose();
                else {
                    theta.row(t) += 0.5 * shift.transpose();
                    theta.row(t + 1) -= 0.5 * shift.transpose();
                }
            }
            if (worst < 1e-9)
                return;
        }
    }

    void finalize(OptimizeResult& result, int outer, int inner, bool converged) {
        project_step_bound(result.waypoints);
        const Eigen::MatrixXd& theta = result.waypoints;
        OptimizeReport& rep = result.report;
        rep.path_length = path_length(theta, problem_.env->robot);
        double est_min = std::numeric_limits<double>::infinity();
        double oracle_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < theta.rows(); ++t) {
            est_min = std::min(est_min, problem_.estimator->predict(theta.row(t).transpose()));
            oracle_min =
                std::min(oracle_min, distance_to_collision(*problem_.env,
                                                           theta.row(t).transpose())
                                         .value);
        }
        rep.estimator_min_distance = est_min;
        rep.oracle_min_distance = oracle_min;
        rep.objective = problem_.params.mode == OptimizeMode::constraint
                            ? rep.path_length
                            : std::exp(-est_min) * rep.path_length;
        rep.outer_iterations = outer;
        rep.inner_iterations = inner;
        rep.converged = converged;
        rep.status = converged ? "converged" : "max-iters";
    }

    const OptimizeProblem& problem_;
    Eigen::MatrixXd seed_;
    Transcription trans_;
    Eigen::VectorXd lambda_;
    double rho_ = 10.0;
};

} // namespace

OptimizeResult optimize_constraint(const OptimizeProblem& problem,
                                   const Eigen::MatrixXd& seed) {
    if (problem.params.mode != OptimizeMode::constraint)
        throw std::invalid_argument("optimize_constraint: problem mode mismatch");
    if (problem.params.d_min < 0.0)
        throw std::invalid_argument("optimize_constraint: d_min must be >= 0");
    return AlSolver(problem, seed).run();
}

OptimizeResult optimize_maximize(const OptimizeProblem& problem,
                                 const Eigen::MatrixXd& seed) {
    if (problem.params.mode != OptimizeMode::maximize)
        throw std::invalid_argument("optimize_maximize: problem mode mismatch");
    return AlSolver(problem, seed).run();
}

} // namespace distgp
