#include <doctest.h>

#include <nlohmann/json.hpp>

#include <filesystem>

#include "distgp/dataset.hpp"
#include "distgp/io.hpp"

using namespace distgp;

namespace {

Environment sample_env() {
    Environment env;
    env.robot = RobotModel::uniform(3, 0.9, 0.12);
    env.robot.joint_limits[2] = {-1.25, 2.5};
    ConvexPolygon a;
    a.vertices = {Vec2(1.0, 1.0), Vec2(2.0, 1.1), Vec2(1.6, 2.0)};
    ConvexPolygon b;
    b.vertices = {Vec2(-2.0, -0.5), Vec2(-1.2, -0.5), Vec2(-1.2, 0.4), Vec2(-2.0, 0.4)};
    env.obstacles = {a, b};
    return env;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("distgp-io-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("environment json round-trip is exact") {
    TempDir tmp;
    const Environment env = sample_env();
    // Perturb a coordinate to a value with no short decimal form.
    Environment noisy = env;
    noisy.obstacles[0].vertices[1].x() = 2.0 + 1e-13 + M_PI * 1e-5;

    const std::string path = tmp.file("env.json");
    save_environment(noisy, path);
    const Environment back = load_environment(path);

    CHECK(back.robot.dof == noisy.robot.dof);
    CHECK(back.robot.link_lengths == noisy.robot.link_lengths);
    CHECK(back.robot.link_width == noisy.robot.link_width);
    REQUIRE(back.robot.joint_limits.size() == 3);
    CHECK(back.robot.joint_limits[2][1] == 2.5);
    REQUIRE(back.obstacles.size() == 2);
    for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t i = 0; i < noisy.obstacles[k].vertices.size(); ++i)
            CHECK(back.obstacles[k].vertices[i] == noisy.obstacles[k].vertices[i]);

    CHECK(environment_hash(back) == environment_hash(noisy));
}

TEST_CASE("environment loader validates geometry") {
    TempDir tmp;
    const Environment env = sample_env();
    nlohmann::json j = environment_to_json(env);

    // Clockwise obstacle must be rejected.
    nlohmann::json bad = j;
    std::reverse(bad["obstacles"][0]["vertices"].begin(), bad["obstacles"][0]["vertices"].end());
    write_text_file(tmp.file("cw.json"), bad.dump());
    CHECK_THROWS(load_environment(tmp.file("cw.json")));

    // Concave obstacle must be rejected.
    bad = j;
    bad["obstacles"][1]["vertices"] = {{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {1.0, 0.5}, {0.0, 2.0}};
    write_text_file(tmp.file("concave.json"), bad.dump());
    CHECK_THROWS(load_environment(tmp.file("concave.json")));

    // Missing field.
    bad = j;
    bad.erase("robot");
    write_text_file(tmp.file("norobot.json"), bad.dump());
    CHECK_THROWS(load_environment(tmp.file("norobot.json")));

    write_text_file(tmp.file("garbage.json"), "not json at all {{{");
    CHECK_THROWS(load_environment(tmp.file("garbage.json")));
}

TEST_CASE("gp model round-trip reproduces predictions bit-for-bit") {
    TempDir tmp;
    const Environment env = sample_env();
    Rng rng = make_rng(77, 0);
    const Eigen::MatrixXd X = sample_configs(env.robot, 40, rng);
    const Dataset ds = label_dataset(X, env, 0.05, 5);

    for (KernelKind kind : {KernelKind::gaussian, KernelKind::fk}) {
        KernelSpec spec;
        spec.kind = kind;
        spec.gamma = kind == KernelKind::fk ? 1.0 : 0.6;
        spec.robot = env.robot;
        const GpModel gp = gp_fit(ds.X, ds.y, spec, 0.0025, 0.3);

        const std::string path = tmp.file("gp.json");
        save_model(gp, path);
        const AnyModel any = load_model(path);
        REQUIRE(std::holds_alternative<GpModel>(any));
        const GpModel& back = std::get<GpModel>(any);

        CHECK(back.eta2 == gp.eta2);
        CHECK(back.prior_mean == gp.prior_mean);
        CHECK(back.jitter == gp.jitter);
        CHECK(back.spec.gamma == gp.spec.gamma);
        CHECK(back.X == gp.X);
        CHECK(back.y == gp.y);
        CHECK(back.alpha == gp.alpha);

        Rng qrng = make_rng(77, 1);
        const Eigen::MatrixXd Q = sample_configs(env.robot, 25, qrng);
        for (int i = 0; i < 25; ++i) {
            const Configuration q = Q.row(i).transpose();
            CHECK(gp_mean(back, q) == gp_mean(gp, q));
            CHECK(gp_variance(back, q) == gp_variance(gp, q));
        }
    }
}

TEST_CASE("kr model round-trip") {
    TempDir tmp;
    const Environment env = sample_env();
    Rng rng = make_rng(78, 0);
    const Eigen::MatrixXd X = sample_configs(env.robot, 30, rng);
    const Dataset ds = label_dataset(X, env, 0.05, 6);

    KernelSpec spec;
    spec.gamma = 0.8;
    const KrModel kr = kr_fit(ds.X, ds.y, spec);
    const std::string path = tmp.file("kr.json");
    save_model(kr, path);
    const AnyModel any = load_model(path);
    REQUIRE(std::holds_alternative<KrModel>(any));
    const KrModel& back = std::get<KrModel>(any);

    Rng qrng = make_rng(78, 1);
    const Eigen::MatrixXd Q = sample_configs(env.robot, 20, qrng);
    for (int i = 0; i < 20; ++i)
        CHECK(kr_predict(back, Q.row(i).transpose()) == kr_predict(kr, Q.row(i).transpose()));
}

TEST_CASE("model loader rejects unknown content") {
    TempDir tmp;
    write_text_file(tmp.file("unknown.json"), R"({"format_version":1,"type":"svm"})");
    CHECK_THROWS(load_model(tmp.file("unknown.json")));
    write_text_file(tmp.file("vers.json"), R"({"format_version":99,"type":"gp"})");
    CHECK_THROWS(load_model(tmp.file("vers.json")));
    CHECK_THROWS(load_model(tmp.file("absent.json")));
}

TEST_CASE("trajectory round-trip is exact") {
    TempDir tmp;
    Eigen::MatrixXd W(4, 3);
    W << 0.0, 0.1, -0.2, M_PI, -M_PI, 0.5, 1e-17, 2.0 / 3.0, -0.123456789012345,
        0.0, 0.0, 0.0;
    const std::string path = tmp.file("traj.txt");
    save_trajectory(W, path);
    const Eigen::MatrixXd back = load_trajectory(path);
    REQUIRE(back.rows() == 4);
    REQUIRE(back.cols() == 3);
    CHECK(back == W);

    write_text_file(tmp.file("ragged.txt"), "0 0 0\n1 1\n");
    CHECK_THROWS(load_trajectory(tmp.file("ragged.txt")));
}
