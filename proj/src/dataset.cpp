#include "distgp/dataset.hpp"

#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "distgp/io.hpp"

namespace distgp {

std::uint64_t environment_hash(const Environment& env) {
    const std::string canonical = environment_to_json(env).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a 64
    for (const unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Eigen::MatrixXd sample_configs(const RobotModel& robot, int n, Rng& rng) {
    robot.validate();
    if (n < 1)
        throw std::invalid_argument("sample_configs: n must be >= 1");
    Eigen::MatrixXd X(n, robot.dof);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < robot.dof; ++j) {
            std::uniform_real_distribution<double> u(robot.joint_limits[j][0],
                                                     robot.joint_limits[j][1]);
            X(i, j) = u(rng);
        }
    return X;
}

Dataset label_dataset(const Eigen::MatrixXd& X, const Environment& env, double eta,
                      std::uint64_t seed, int jobs) {
    env.validate();
    if (eta < 0.0)
        throw std::invalid_argument("label_dataset: eta must be >= 0");
    if (X.cols() != env.robot.dof)
        throw std::invalid_argument("label_dataset: configuration dimension mismatch");

    Dataset ds;
    ds.X = X;
    ds.y.resize(X.rows());
    ds.meta = {environment_hash(env), eta, seed, eta == 0.0};

    const Eigen::Index n = X.rows();
    auto worker = [&](Eigen::Index begin, Eigen::Index end) {
        for (Eigen::Index i = begin; i < end; ++i) {
            Rng row_rng = make_rng(seed, static_cast<std::uint64_t>(i));
            ds.y[i] = noisy_distance(env, X.row(i).transpose(), eta, row_rng);
        }
    };
    if (jobs <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> threads;
        const Eigen::Index chunk = (n + jobs - 1) / jobs;
        for (int t = 0; t < jobs; ++t) {
            const Eigen::Index begin = t * chunk;
            if (begin >= n)
                break;
            threads.emplace_back(worker, begin, std::min(n, begin + chunk));
        }
        for (auto& th : threads)
            th.join();
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    out << "# dataset v1\n";
    out << "# env_hash " << ds.meta.env_hash << "\n";
    out << "# eta " << ds.meta.eta << "\n";
    out << "# seed " << ds.meta.seed << "\n";
    out << "# noise_free " << (ds.meta.noise_free ? 1 : 0) << "\n";
    out << "# dof " << ds.X.cols() << "\n";
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j)
        out << "theta" << j << " ";
    out << "distance\n";
    for (Eigen::Index i = 0; i < ds.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j)
            out << ds.X(i, j) << " ";
        out << ds.y[i] << "\n";
    }
    write_text_file(path, out.str());
}

Dataset load_dataset(const std::string& path) {
    std::istringstream in(read_text_file(path));
    Dataset ds;
    std::string line;
    int lineno = 0;
    int dof = -1;
    bool header_seen = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "env_hash")
                ls >> ds.meta.env_hash;
            else if (key == "eta")
                ls >> ds.meta.eta;
            else if (key == "seed")
                ls >> ds.meta.seed;
            else if (key == "noise_free") {
                int v = 0;
                ls >> v;
                ds.meta.noise_free = v != 0;
            } else if (key == "dof")
                ls >> dof;
            continue;
        }
        if (!header_seen) {
            header_seen = true; // column-name row
            continue;
        }
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v)
            row.push_back(v);
        if (dof < 0)
            throw std::runtime_error("dataset file: missing dof header before line " +
                                     std::to_string(lineno));
        if (static_cast<int>(row.size()) != dof + 1)
            throw std::runtime_error("dataset file: row width mismatch at line " +
                                     std::to_string(lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw std::runtime_error("dataset file: no data rows");
    ds.X.resize(rows.size(), dof);
    ds.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < dof; ++j)
            ds.X(static_cast<Eigen::Index>(i), j) = rows[i][j];
        ds.y[static_cast<Eigen::Index>(i)] = rows[i][dof];
    }
    return ds;
}

} // namespace distgp
