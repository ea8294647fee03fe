// Command-line front end: environments, datasets, model fitting, evaluation,
// timing, trajectory optimization, and the canned experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

#include "distgp/bench.hpp"
#include "distgp/io.hpp"

using namespace distgp;

namespace {

Configuration parse_config_list(const std::string& s) {
    std::vector<double> vals;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        vals.push_back(std::stod(tok));
    Configuration x(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
        x[i] = vals[i];
    return x;
}

ConvexPolygon parse_polygon(const std::string& s) {
    // "x,y;x,y;..." vertex list, counter-clockwise.
    ConvexPolygon poly;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ';')) {
        const Configuration v = parse_config_list(tok);
        if (v.size() != 2)
            throw std::invalid_argument("obstacle vertex must be 'x,y'");
        poly.vertices.emplace_back(v[0], v[1]);
    }
    poly.validate();
    return poly;
}

void echo(const std::string& cmd, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::cout << "config " << cmd;
    for (const auto& [k, v] : kv)
        std::cout << " " << k << "=" << v;
    std::cout << "\n";
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

struct FitOptions {
    std::string dataset_path;
    std::string env_path;
    std::string out_path;
    std::string method = "gp";    // gp | kr
    std::string kernel = "fk";    // gaussian | fk
    double gamma = 0.0;           // 0 = select via grid search (gp) / median (kr)
    double eta2 = 0.0025;
    bool search_eta2 = false;
    double prior_mean = 0.0;
};

void run_fit(const FitOptions& opt) {
    const Dataset ds = load_dataset(opt.dataset_path);
    const Environment env = load_environment(opt.env_path);
    if (environment_hash(env) != ds.meta.env_hash)
        std::cerr << "warning: dataset was generated for a different environment\n";

    echo("fit", {{"dataset", opt.dataset_path},
                 {"env", opt.env_path},
                 {"method", opt.method},
                 {"kernel", opt.kernel},
                 {"gamma", opt.gamma > 0 ? fmt(opt.gamma) : "auto"},
                 {"eta2", opt.search_eta2 ? "search" : fmt(opt.eta2)},
                 {"prior-mean", fmt(opt.prior_mean)},
                 {"out", opt.out_path}});

    const KernelKind kind = kernel_kind_from_string(opt.kernel);
    if (opt.method == "kr") {
        KernelSpec spec;
        spec.kind = kind;
        spec.gamma = opt.gamma > 0 ? opt.gamma : default_gamma(kind, ds.X);
        const KrModel kr = kr_fit(ds.X, ds.y, spec);
        save_model(kr, opt.out_path);
        std::cout << "kr model written: gamma=" << spec.gamma << " n=" << ds.X.rows() << "\n";
        return;
    }
    if (opt.method != "gp")
        throw CLI::ValidationError("--method must be gp or kr");

    KernelSpec spec;
    double eta2 = opt.eta2;
    if (opt.gamma > 0 && !opt.search_eta2) {
        spec.kind = kind;
        spec.gamma = opt.gamma;
        spec.robot = env.robot;
    } else {
        const Eta2Mode mode =
            opt.search_eta2 ? Eta2Mode::searched() : Eta2Mode::fixed(opt.eta2);
        const HyperparamResult h =
            select_hyperparameters(ds.X, ds.y, kind, env.robot, mode);
        spec = h.spec;
        spec.robot = env.robot;
        eta2 = h.eta2;
        std::cout << "selected gamma=" << spec.gamma << " eta2=" << eta2
                  << " lml=" << h.log_marginal_likelihood << "\n";
    }
    const GpModel gp = gp_fit(ds.X, ds.y, spec, eta2, opt.prior_mean);
    save_model(gp, opt.out_path);
    std::cout << "gp model written: kernel=" << to_string(spec.kind)
              << " gamma=" << spec.gamma << " eta2=" << eta2 << " jitter=" << gp.jitter
              << " n=" << gp.size() << "\n";
}

std::unique_ptr<DistanceEstimator> estimator_from_args(
    const std::string& name, const Environment& env, const std::string& model_path,
    double eta, std::uint64_t seed, double z, int n_sensor, std::vector<AnyModel>& keep) {
    if (name == "oracle")
        return std::make_unique<OracleEstimator>(env);
    if (name == "noisy-oracle")
        return std::make_unique<NoisyOracleEstimator>(env, eta, seed);
    if (model_path.empty())
        throw CLI::ValidationError("estimator '" + name + "' requires --model");
    keep.push_back(load_model(model_path));
    AnyModel& m = keep.back();
    if (name == "kr") {
        if (!std::holds_alternative<KrModel>(m))
            throw CLI::ValidationError("--model does not hold a kr model");
        return std::make_unique<KrEstimator>(std::get<KrModel>(m));
    }
    if (name == "gp" || name == "gp-gaussian" || name == "gp-fk") {
        if (!std::holds_alternative<GpModel>(m))
            throw CLI::ValidationError("--model does not hold a gp model");
        return std::make_unique<GpEstimator>(std::get<GpModel>(m));
    }
    if (name == "hybrid") {
        if (!std::holds_alternative<GpModel>(m))
            throw CLI::ValidationError("hybrid estimator requires a gp model");
        return std::make_unique<HybridWrapper>(std::get<GpModel>(m), env, eta, seed, z,
                                               n_sensor);
    }
    throw CLI::ValidationError("unknown estimator '" + name + "'");
}

void print_metrics(const std::string& method, const MetricsReport& m) {
    std::cout << method << ": mse=" << m.mse;
    if (m.tpmse)
        std::cout << " tpmse=" << *m.tpmse;
    if (m.tnmse)
        std::cout << " tnmse=" << *m.tnmse;
    std::cout << " n=" << m.n_test << " n_pos=" << m.n_pos << " n_neg=" << m.n_neg
              << " mean_true_distance=" << m.mean_true_distance << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"distance-to-collision estimation toolkit"};
    app.require_subcommand(1);

    // ---- gen-env ----
    auto* env_cmd = app.add_subcommand("gen-env", "generate an environment file");
    int ge_dof = 7;
    double ge_len = 1.0, ge_width = 0.1;
    std::uint64_t ge_seed = 1;
    int ge_minv = 3, ge_maxv = 8;
    std::vector<std::string> ge_obstacles;
    bool ge_narrow = false;
    double ge_gap = 3.0;
    std::string ge_out = "env.json";
    env_cmd->add_option("--dof", ge_dof, "number of joints/links")->capture_default_str();
    env_cmd->add_option("--link-length", ge_len, "length of every link")->capture_default_str();
    env_cmd->add_option("--link-width", ge_width, "link rectangle width")->capture_default_str();
    env_cmd->add_option("--seed", ge_seed, "random obstacle seed")->capture_default_str();
    env_cmd->add_option("--min-vertices", ge_minv, "obstacle vertex minimum")->capture_default_str();
    env_cmd->add_option("--max-vertices", ge_maxv, "obstacle vertex maximum")->capture_default_str();
    env_cmd->add_option("--obstacle", ge_obstacles,
                        "explicit obstacle 'x,y;x,y;...' (repeatable; overrides --seed)");
    env_cmd->add_flag("--narrow-passage", ge_narrow, "two-box narrow passage scene");
    env_cmd->add_option("--gap-factor", ge_gap, "passage width in link widths")
        ->capture_default_str();
    env_cmd->add_option("-o,--out", ge_out, "output path")->capture_default_str();

    // ---- gen-dataset ----
    auto* ds_cmd = app.add_subcommand("gen-dataset", "sample and label configurations");
    std::string gd_env, gd_out = "dataset.txt";
    int gd_n = 500;
    double gd_eta = 0.05;
    std::uint64_t gd_seed = 1;
    int gd_jobs = 1;
    ds_cmd->add_option("--env", gd_env, "environment file")->required();
    ds_cmd->add_option("-n,--n", gd_n, "number of samples")->capture_default_str();
    ds_cmd->add_option("--eta", gd_eta, "label noise standard deviation")->capture_default_str();
    ds_cmd->add_option("--seed", gd_seed, "sampling/noise seed")->capture_default_str();
    ds_cmd->add_option("--jobs", gd_jobs, "labeling worker threads")->capture_default_str();
    ds_cmd->add_option("-o,--out", gd_out, "output path")->capture_default_str();

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "fit a gp or kr model to a dataset");
    FitOptions fit;
    fit_cmd->add_option("--dataset", fit.dataset_path, "training dataset")->required();
    fit_cmd->add_option("--env", fit.env_path, "environment file (robot definition)")->required();
    fit_cmd->add_option("--method", fit.method, "gp | kr")->capture_default_str();
    fit_cmd->add_option("--kernel", fit.kernel, "gaussian | fk")->capture_default_str();
    fit_cmd->add_option("--gamma", fit.gamma, "kernel width (0 = automatic)")
        ->capture_default_str();
    fit_cmd->add_option("--eta2", fit.eta2, "noise variance")->capture_default_str();
    fit_cmd->add_flag("--search-eta2", fit.search_eta2, "grid-search the noise variance");
    fit_cmd->add_option("--prior-mean", fit.prior_mean, "gp prior mean")->capture_default_str();
    fit_cmd->add_option("-o,--out", fit.out_path, "model output path")->required();

    // ---- eval ----
    auto* eval_cmd = app.add_subcommand("eval", "metrics against a noise-free test set");
    std::string ev_model, ev_env, ev_testset;
    int ev_n = 2000;
    std::uint64_t ev_seed = 2;
    eval_cmd->add_option("--model", ev_model, "model file")->required();
    eval_cmd->add_option("--env", ev_env, "environment file")->required();
    eval_cmd->add_option("--testset", ev_testset, "noise-free dataset (default: generated)");
    eval_cmd->add_option("-n,--n", ev_n, "generated test set size")->capture_default_str();
    eval_cmd->add_option("--seed", ev_seed, "generated test set seed")->capture_default_str();

    // ---- bench ----
    auto* bench_cmd = app.add_subcommand("bench", "per-query timing");
    std::string bn_env, bn_model, bn_estimator = "oracle";
    int bn_queries = 2000;
    std::uint64_t bn_seed = 3;
    double bn_eta = 0.05;
    bench_cmd->add_option("--env", bn_env, "environment file")->required();
    bench_cmd->add_option("--estimator", bn_estimator,
                          "oracle | noisy-oracle | kr | gp | hybrid")
        ->capture_default_str();
    bench_cmd->add_option("--model", bn_model, "model file for learned estimators");
    bench_cmd->add_option("-n,--n-queries", bn_queries, "query count (>= 1000)")
        ->capture_default_str();
    bench_cmd->add_option("--seed", bn_seed, "query sampling seed")->capture_default_str();
    bench_cmd->add_option("--eta", bn_eta, "sensor noise for noisy estimators")
        ->capture_default_str();

    // ---- optimize ----
    auto* opt_cmd = app.add_subcommand("optimize", "trajectory optimization");
    std::string op_env, op_model, op_estimator = "oracle", op_mode = "constraint";
    std::string op_start, op_goal, op_out = "trajectory.txt";
    std::uint64_t op_seed = 4;
    OptimizeParams op_params;
    double op_eta = 0.05, op_z = 1.64;
    int op_nsensor = 5;
    opt_cmd->add_option("--env", op_env, "environment file")->required();
    opt_cmd->add_option("--estimator", op_estimator,
                        "oracle | noisy-oracle | kr | gp | hybrid")
        ->capture_default_str();
    opt_cmd->add_option("--model", op_model, "model file for learned estimators");
    opt_cmd->add_option("--mode", op_mode, "constraint | maximize")->capture_default_str();
    opt_cmd->add_option("--start", op_start, "start configuration 'a,b,...'")->required();
    opt_cmd->add_option("--goal", op_goal, "goal configuration 'a,b,...'")->required();
    opt_cmd->add_option("--seed", op_seed, "rrt / estimator stream seed")->capture_default_str();
    opt_cmd->add_option("-T,--waypoints", op_params.T, "trajectory waypoint count")
        ->capture_default_str();
    opt_cmd->add_option("--dtheta-max", op_params.dtheta_max, "per-step joint bound")
        ->capture_default_str();
    opt_cmd->add_option("--d-min", op_params.d_min, "clearance bound (constraint mode)")
        ->capture_default_str();
    opt_cmd->add_option("--eta", op_eta, "sensor noise for noisy/hybrid estimators")
        ->capture_default_str();
    opt_cmd->add_option("-z", op_z, "hybrid confidence z")->capture_default_str();
    opt_cmd->add_option("--n-sensor", op_nsensor, "hybrid sensor draws per query")
        ->capture_default_str();
    opt_cmd->add_option("-o,--out", op_out, "trajectory output path")->capture_default_str();

    // ---- experiment ----
    auto* exp_cmd = app.add_subcommand("experiment", "canned experiment runners");
    std::string ex_kind;
    std::string ex_outdir = ".";
    std::uint64_t ex_seed = 1;
    int ex_scenes = 10, ex_trials = 20, ex_jobs = 1, ex_dof = 7;
    int ex_ntrain = 500;
    double ex_eta = 0.05, ex_gap = 3.0;
    exp_cmd->add_option("kind", ex_kind, "table1 | table2 | table3 | narrow-passage")
        ->required();
    exp_cmd->add_option("--seed", ex_seed, "master seed")->capture_default_str();
    exp_cmd->add_option("--scenes", ex_scenes, "scene count (table1)")->capture_default_str();
    exp_cmd->add_option("--trials", ex_trials, "trial count (table2/table3)")
        ->capture_default_str();
    exp_cmd->add_option("--dof", ex_dof, "robot joints")->capture_default_str();
    exp_cmd->add_option("--n-train", ex_ntrain, "training set size")->capture_default_str();
    exp_cmd->add_option("--eta", ex_eta, "label noise")->capture_default_str();
    exp_cmd->add_option("--gap-factor", ex_gap, "narrow-passage width in link widths")
        ->capture_default_str();
    exp_cmd->add_option("--jobs", ex_jobs, "worker threads")->capture_default_str();
    exp_cmd->add_option("-o,--out-dir", ex_outdir, "report output directory")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*env_cmd) {
            echo("gen-env", {{"dof", std::to_string(ge_dof)},
                             {"link-length", fmt(ge_len)},
                             {"link-width", fmt(ge_width)},
                             {"seed", std::to_string(ge_seed)},
                             {"narrow-passage", ge_narrow ? "true" : "false"},
                             {"out", ge_out}});
            SceneConfig cfg;
            cfg.dof = ge_dof;
            cfg.link_length = ge_len;
            cfg.link_width = ge_width;
            cfg.min_vertices = ge_minv;
            cfg.max_vertices = ge_maxv;
            Environment env;
            if (ge_narrow) {
                env = narrow_passage_environment(cfg, ge_gap);
            } else if (!ge_obstacles.empty()) {
                env.robot = RobotModel::uniform(ge_dof, ge_len, ge_width);
                for (const auto& s : ge_obstacles)
                    env.obstacles.push_back(parse_polygon(s));
                env.validate();
            } else {
                env = random_environment(cfg, ge_seed);
            }
            save_environment(env, ge_out);
            load_environment(ge_out).validate(); // re-parse check
            std::cout << "environment written: " << ge_out << " obstacles=" << env.obstacles.size()
                      << " hash=" << environment_hash(env) << "\n";
        } else if (*ds_cmd) {
            echo("gen-dataset", {{"env", gd_env},
                                 {"n", std::to_string(gd_n)},
                                 {"eta", fmt(gd_eta)},
                                 {"seed", std::to_string(gd_seed)},
                                 {"jobs", std::to_string(gd_jobs)},
                                 {"out", gd_out}});
            const Environment env = load_environment(gd_env);
            Rng rng = make_rng(gd_seed, 0);
            const Eigen::MatrixXd X = sample_configs(env.robot, gd_n, rng);
            Dataset ds = label_dataset(X, env, gd_eta, gd_seed, gd_jobs);
            save_dataset(ds, gd_out);
            std::cout << "dataset written: " << gd_out << " rows=" << ds.X.rows()
                      << (ds.meta.noise_free ? " noise-free" : "") << "\n";
        } else if (*fit_cmd) {
            run_fit(fit);
        } else if (*eval_cmd) {
            echo("eval", {{"model", ev_model},
                          {"env", ev_env},
                          {"testset", ev_testset.empty() ? "generated" : ev_testset},
                          {"n", std::to_string(ev_n)},
                          {"seed", std::to_string(ev_seed)}});
            const Environment env = load_environment(ev_env);
            Dataset testset;
            if (ev_testset.empty()) {
                Rng rng = make_rng(ev_seed, 0);
                testset = label_dataset(sample_configs(env.robot, ev_n, rng), env, 0.0, ev_seed);
            } else {
                testset = load_dataset(ev_testset);
            }
            const AnyModel any = load_model(ev_model);
            if (std::holds_alternative<GpModel>(any)) {
                GpEstimator est(std::get<GpModel>(any));
                print_metrics(est.name(), eval_metrics(est, testset));
            } else {
                KrEstimator est(std::get<KrModel>(any));
                print_metrics(est.name(), eval_metrics(est, testset));
            }
        } else if (*bench_cmd) {
            echo("bench", {{"env", bn_env},
                           {"estimator", bn_estimator},
                           {"model", bn_model.empty() ? "-" : bn_model},
                           {"n-queries", std::to_string(bn_queries)},
                           {"seed", std::to_string(bn_seed)}});
            const Environment env = load_environment(bn_env);
            std::vector<AnyModel> keep;
            auto est = estimator_from_args(bn_estimator, env, bn_model, bn_eta,
                                           mix_seed(bn_seed, 9), 1.64, 5, keep);
            Rng rng = make_rng(bn_seed, 0);
            const Eigen::MatrixXd Q = sample_configs(env.robot, bn_queries, rng);
            const TimingReport t = time_queries(*est, Q);
            std::cout << est->name() << ": mean=" << t.per_query_mean_us
                      << "us p50=" << t.per_query_p50_us << "us p95=" << t.per_query_p95_us
                      << "us n=" << t.n_queries << "\n";
        } else if (*opt_cmd) {
            echo("optimize", {{"env", op_env},
                              {"estimator", op_estimator},
                              {"mode", op_mode},
                              {"start", op_start},
                              {"goal", op_goal},
                              {"seed", std::to_string(op_seed)},
                              {"T", std::to_string(op_params.T)},
                              {"d-min", fmt(op_params.d_min)},
                              {"out", op_out}});
            const Environment env = load_environment(op_env);
            if (op_mode == "constraint")
                op_params.mode = OptimizeMode::constraint;
            else if (op_mode == "maximize")
                op_params.mode = OptimizeMode::maximize;
            else
                throw CLI::ValidationError("--mode must be constraint or maximize");
            std::vector<AnyModel> keep;
            auto est = estimator_from_args(op_estimator, env, op_model, op_eta,
                                           mix_seed(op_seed, 9), op_z, op_nsensor, keep);
            const Configuration start = parse_config_list(op_start);
            const Configuration goal = parse_config_list(op_goal);

            Rng rrt_rng = make_rng(op_seed, 1);
            const Eigen::MatrixXd plan = rrt_plan(env, start, goal, rrt_rng);
            const Eigen::MatrixXd seed_traj = resample_trajectory(plan, op_params.T);

            OptimizeProblem prob;
            prob.env = &env;
            prob.estimator = est.get();
            prob.start = start;
            prob.goal = goal;
            prob.params = op_params;
            const OptimizeResult res = op_params.mode == OptimizeMode::constraint
                                           ? optimize_constraint(prob, seed_traj)
                                           : optimize_maximize(prob, seed_traj);
            save_trajectory(res.waypoints, op_out);

            const OptimizeReport& r = res.report;
            std::ostringstream rep;
            rep << "estimator " << r.estimator << "\n"
                << "path_length " << r.path_length << "\n"
                << "estimator_min_distance " << r.estimator_min_distance << "\n"
                << "oracle_min_distance " << r.oracle_min_distance << "\n"
                << "objective " << r.objective << "\n"
                << "outer_iterations " << r.outer_iterations << "\n"
                << "inner_iterations " << r.inner_iterations << "\n"
                << "status " << r.status << "\n"
                << "wall_time_s " << r.wall_time_s << "\n"
                << "seed " << op_seed << "\n";
            if (auto* hyb = dynamic_cast<HybridWrapper*>(est.get()))
                rep << "branch_switches " << hyb->branch_switches() << "\n";
            write_text_file(op_out + ".report", rep.str());
            std::cout << rep.str();
        } else if (*exp_cmd) {
            echo("experiment", {{"kind", ex_kind},
                                {"seed", std::to_string(ex_seed)},
                                {"scenes", std::to_string(ex_scenes)},
                                {"trials", std::to_string(ex_trials)},
                                {"dof", std::to_string(ex_dof)},
                                {"jobs", std::to_string(ex_jobs)},
                                {"out-dir", ex_outdir}});
            std::filesystem::create_directories(ex_outdir);
            const auto out = [&](const std::string& name) {
                return (std::filesystem::path(ex_outdir) / name).string();
            };
            if (ex_kind == "table1") {
                AccuracyConfig cfg;
                cfg.master_seed = ex_seed;
                cfg.n_scenes = ex_scenes;
                cfg.n_train = ex_ntrain;
                cfg.eta = ex_eta;
                cfg.scene.dof = ex_dof;
                cfg.jobs = ex_jobs;
                const AccuracyExperimentResult r = run_accuracy_experiment(cfg);
                write_text_file(out("accuracy.csv"), accuracy_csv(r));
                const std::string table = accuracy_table(r);
                write_text_file(out("accuracy.txt"), table);
                std::cout << table;
            } else if (ex_kind == "table2" || ex_kind == "table3") {
                OptExperimentConfig cfg;
                cfg.mode = ex_kind == "table2" ? OptimizeMode::constraint
                                               : OptimizeMode::maximize;
                cfg.params.mode = cfg.mode;
                cfg.master_seed = ex_seed;
                cfg.n_trials = ex_trials;
                cfg.n_train = ex_ntrain;
                cfg.eta = ex_eta;
                cfg.scene.dof = ex_dof;
                cfg.jobs = ex_jobs;
                const OptExperimentResult r = run_optimization_experiment(cfg);
                const std::string base = ex_kind == "table2" ? "constraint" : "maximize";
                write_text_file(out(base + ".csv"), optimization_csv(r));
                const std::string table = optimization_table(r);
                write_text_file(out(base + ".txt"), table);
                std::cout << table;
            } else if (ex_kind == "narrow-passage") {
                NarrowPassageConfig cfg;
                cfg.master_seed = ex_seed;
                cfg.gap_factor = ex_gap;
                cfg.n_train = ex_ntrain;
                cfg.eta = ex_eta;
                cfg.scene.dof = ex_dof;
                const NarrowPassageResult r = run_narrow_passage(cfg);
                write_text_file(out("narrow_passage.csv"), narrow_passage_csv(r));
                save_trajectory(r.waypoints, out("narrow_passage_trajectory.txt"));
                std::cout << narrow_passage_csv(r);
            } else {
                throw CLI::ValidationError(
                    "experiment kind must be table1, table2, table3, or narrow-passage");
            }
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
