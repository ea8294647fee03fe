#include "distgp/io.hpp"

#include <Eigen/Cholesky>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace distgp {

using nlohmann::json;

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index expected_cols = -1) {
    if (!j.is_array() || j.empty())
        throw std::invalid_argument("model file: expected a non-empty array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    if (expected_cols >= 0 && cols != expected_cols)
        throw std::invalid_argument("model file: row width mismatch");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols)
            throw std::invalid_argument("model file: ragged rows");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(i, c) = j[i][c].get<double>();
    }
    return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(v[i]);
    return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    return v;
}

json robot_to_json(const RobotModel& robot) {
    json j;
    j["dof"] = robot.dof;
    j["link_lengths"] = vector_to_json(robot.link_lengths);
    j["link_width"] = robot.link_width;
    json limits = json::array();
    for (const auto& l : robot.joint_limits)
        limits.push_back({l[0], l[1]});
    j["joint_limits"] = std::move(limits);
    return j;
}

RobotModel robot_from_json(const json& j) {
    RobotModel r;
    r.dof = j.at("dof").get<int>();
    r.link_lengths = vector_from_json(j.at("link_lengths"));
    r.link_width = j.at("link_width").get<double>();
    for (const auto& l : j.at("joint_limits"))
        r.joint_limits.push_back({l.at(0).get<double>(), l.at(1).get<double>()});
    r.validate();
    return r;
}

json kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    j["gamma"] = spec.gamma;
    if (spec.kind == KernelKind::fk)
        j["robot"] = robot_to_json(spec.robot);
    return j;
}

KernelSpec kernel_spec_from_json(const json& j) {
    KernelSpec spec;
    spec.kind = kernel_kind_from_string(j.at("kind").get<std::string>());
    spec.gamma = j.at("gamma").get<double>();
    if (spec.kind == KernelKind::fk)
        spec.robot = robot_from_json(j.at("robot"));
    spec.validate();
    return spec;
}

json parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("parse error in " + path + ": " + e.what());
    }
    return j;
}

} // namespace

json environment_to_json(const Environment& env) {
    json j;
    j["robot"] = robot_to_json(env.robot);
    json obstacles = json::array();
    for (const auto& o : env.obstacles) {
        json verts = json::array();
        for (const auto& v : o.vertices)
            verts.push_back({v.x(), v.y()});
        obstacles.push_back({{"vertices", std::move(verts)}});
    }
    j["obstacles"] = std::move(obstacles);
    return j;
}

Environment environment_from_json(const json& j) {
    Environment env;
    env.robot = robot_from_json(j.at("robot"));
    for (const auto& jo : j.at("obstacles")) {
        ConvexPolygon poly;
        for (const auto& v : jo.at("vertices"))
            poly.vertices.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
        poly.validate(); // rejects clockwise or non-convex input
        env.obstacles.push_back(std::move(poly));
    }
    env.validate();
    return env;
}

void save_environment(const Environment& env, const std::string& path) {
    env.validate();
    write_text_file(path, environment_to_json(env).dump(2) + "\n");
}

Environment load_environment(const std::string& path) {
    return environment_from_json(parse_file(path));
}

void save_model(const GpModel& model, const std::string& path) {
    json j;
    j["format_version"] = 1;
    j["type"] = "gp";
    j["kernel"] = kernel_spec_to_json(model.spec);
    j["eta2"] = model.eta2;
    j["prior_mean"] = model.prior_mean;
    j["jitter"] = model.jitter;
    j["X"] = matrix_to_json(model.X);
    j["y"] = vector_to_json(model.y);
    j["alpha"] = vector_to_json(model.alpha);
    write_text_file(path, j.dump() + "\n");
}

void save_model(const KrModel& model, const std::string& path) {
    json j;
    j["format_version"] = 1;
    j["type"] = "kr";
    j["kernel"] = kernel_spec_to_json(model.spec);
    j["X"] = matrix_to_json(model.X);
    j["y"] = vector_to_json(model.y);
    write_text_file(path, j.dump() + "\n");
}

AnyModel load_model(const std::string& path) {
    const json j = parse_file(path);
    if (j.at("format_version").get<int>() != 1)
        throw std::runtime_error("model file: unsupported format version");
    const std::string type = j.at("type").get<std::string>();
    const KernelSpec spec = kernel_spec_from_json(j.at("kernel"));
    Eigen::MatrixXd X = matrix_from_json(j.at("X"));
    Eigen::VectorXd y = vector_from_json(j.at("y"));
    if (type == "kr")
        return kr_fit(X, y, spec);
    if (type != "gp")
        throw std::runtime_error("model file: unknown model type " + type);

    GpModel m;
    m.spec = spec;
    m.X = std::move(X);
    m.y = std::move(y);
    m.eta2 = j.at("eta2").get<double>();
    m.prior_mean = j.at("prior_mean").get<double>();
    m.jitter = j.at("jitter").get<double>();
    m.alpha = vector_from_json(j.at("alpha"));
    if (m.alpha.size() != m.y.size())
        throw std::runtime_error("model file: alpha size mismatch");
    if (spec.kind == KernelKind::fk)
        m.train_cp = control_point_rows(spec.robot, m.X);
    // Refactorize with the stored jitter (no escalation) so variance queries
    // reproduce the fitted model exactly.
    Eigen::MatrixXd K = gram_matrix(spec, m.X, m.X);
    K.diagonal().array() += m.eta2 + m.jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("model file: stored Gram matrix failed to factorize");
    m.chol_L = llt.matrixL();
    return m;
}

void save_trajectory(const Eigen::MatrixXd& waypoints, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "# trajectory v1\n";
    out << "# T " << waypoints.rows() << " dof " << waypoints.cols() << "\n";
    for (Eigen::Index i = 0; i < waypoints.rows(); ++i) {
        for (Eigen::Index j = 0; j < waypoints.cols(); ++j)
            out << (j ? " " : "") << waypoints(i, j);
        out << "\n";
    }
    write_text_file(path, out.str());
}

Eigen::MatrixXd load_trajectory(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::vector<std::vector<double>> rows;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v)
            row.push_back(v);
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("trajectory file: ragged row at line " +
                                     std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("trajectory file: no waypoints");
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open file for writing: " + path);
    out << content;
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace distgp
