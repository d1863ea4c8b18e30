#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nbp/bench.hpp"
#include "nbp/config.hpp"
#include "nbp/labels.hpp"
#include "nbp/learner/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
    std::string config;
    uint64_t seed = 1;
    bool seed_set = false;
    std::string out = ".";
    int threads = 1;
};

void add_globals(CLI::App* cmd, GlobalOpts& g) {
    cmd->add_option("--config", g.config, "key=value config file");
    cmd->add_option("--seed", g.seed, "master seed")->each([&](const std::string&) {
        g.seed_set = true;
    });
    cmd->add_option("--out", g.out, "output directory");
    cmd->add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
}

nbp::ConfigMap maybe_config(const GlobalOpts& g) {
    return g.config.empty() ? nbp::ConfigMap{} : nbp::load_config(g.config);
}

int run_gen_scenes(const GlobalOpts& g, const std::string& difficulty_flag, int count_flag) {
    const auto cfg = maybe_config(g);
    const std::string difficulty =
        !difficulty_flag.empty() ? difficulty_flag : nbp::cfg_str(cfg, "difficulty", "normal");
    const int count = count_flag > 0 ? count_flag : nbp::cfg_int(cfg, "scene_count", 10);
    const uint64_t seed = g.seed_set ? g.seed : nbp::cfg_u64(cfg, "seed", 1);
    fs::create_directories(g.out);
    std::ofstream manifest(fs::path(g.out) / "scenes.jsonl");
    for (int i = 0; i < count; ++i) {
        nbp::DifficultyParams params = nbp::difficulty_preset(difficulty);
        params.seed = seed * 7919ull + static_cast<uint64_t>(i);
        const nbp::Scene scene = nbp::generate_scene(params);
        const std::string name = difficulty + "-" + std::to_string(i) + ".scene";
        nbp::save_scene(scene, (fs::path(g.out) / name).string());
        const double complexity = nbp::nav_complexity(scene, 0.05, params.seed);
        manifest << json{{"file", name},
                         {"difficulty", difficulty},
                         {"seed", params.seed},
                         {"width", scene.width()},
                         {"height", scene.height()},
                         {"nav_cells", scene.nav_cells().size()},
                         {"gt_surfels", nbp::gt_surface_points(scene).size()},
                         {"nav_complexity", complexity}}
                        .dump()
                 << '\n';
    }
    std::cout << "wrote " << count << " scenes to " << g.out << '\n';
    return 0;
}

int run_rollout(const GlobalOpts& g, const std::string& scene_path, const std::string& checkpoint,
                int length) {
    const auto cfgmap = maybe_config(g);
    const nbp::Scene scene = nbp::load_scene(scene_path);
    const auto gt = nbp::gt_surface_points(scene);
    nbp::RolloutConfig rc;
    rc.length = length > 0 ? length : nbp::cfg_int(cfgmap, "rollout_length", 60);
    rc.beta = nbp::cfg_double(cfgmap, "beta", rc.beta);
    nbp::NbpNet net = checkpoint.empty() ? nbp::NbpNet(nbp::NetConfig{}, g.seed)
                                         : nbp::NbpNet::load(checkpoint);
    nbp::Rng rng(g.seed);
    const auto cells = scene.nav_cells();
    std::uniform_int_distribution<size_t> cell_dist(0, cells.size() - 1);
    std::uniform_int_distribution<int> yaw_dist(0, nbp::kNumYaw - 1);
    const nbp::Pose start{cells[cell_dist(rng)], yaw_dist(rng)};
    const auto samples = nbp::rollout_collect(scene, gt, net, start, rc, rng);
    nbp::ReplayMemory mem;
    for (auto s : samples) mem.append(std::move(s));
    fs::create_directories(g.out);
    const std::string out_path = (fs::path(g.out) / "rollout.replay").string();
    mem.save(out_path);
    std::cout << "collected " << samples.size() << " samples -> " << out_path << '\n';
    return 0;
}

int run_train(const GlobalOpts& g, int scene_count_flag) {
    const auto cfgmap = maybe_config(g);
    nbp::TrainConfig tc = nbp::train_config_from(cfgmap);
    if (g.seed_set) tc.seed = g.seed;
    tc.threads = g.threads;
    const std::string difficulty = nbp::cfg_str(cfgmap, "difficulty", "normal");
    const int scene_count =
        scene_count_flag > 0 ? scene_count_flag : nbp::cfg_int(cfgmap, "train_scene_count", 10);

    std::vector<nbp::Scene> scenes;
    std::vector<std::vector<nbp::Vec3>> gts;
    for (int i = 0; i < scene_count; ++i) {
        nbp::DifficultyParams params = nbp::difficulty_preset(difficulty);
        params.seed = tc.seed * 6151ull + static_cast<uint64_t>(i);
        scenes.push_back(nbp::generate_scene(params));
        gts.push_back(nbp::gt_surface_points(scenes.back()));
    }
    std::vector<nbp::TrainRecord> log;
    const nbp::NbpNet net = nbp::train(scenes, gts, tc, &log);
    fs::create_directories(g.out);
    net.save((fs::path(g.out) / "model.ckpt").string());
    std::ofstream log_os(fs::path(g.out) / "training_log.jsonl");
    for (const nbp::TrainRecord& r : log)
        log_os << json{{"iteration", r.iteration},    {"epoch", r.epoch},
                       {"train_loss", r.train_loss},  {"holdout_loss", r.holdout_loss},
                       {"sigma1", r.sigma1},          {"sigma2", r.sigma2},
                       {"learning_rate", r.learning_rate}, {"batch_samples", r.batch_samples}}
                      .dump()
               << '\n';
    std::cout << "trained " << log.size() << " epochs -> " << g.out << "/model.ckpt\n";
    return 0;
}

int run_eval(const GlobalOpts& g, const std::string& planners_flag, bool traces) {
    const auto cfgmap = maybe_config(g);
    nbp::BenchConfig bc = nbp::bench_config_from(cfgmap);
    if (g.seed_set) bc.seed = g.seed;
    bc.threads = g.threads;
    if (!planners_flag.empty()) {
        bc.planners.clear();
        std::stringstream ss(planners_flag);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty()) bc.planners.push_back(part);
    }
    const nbp::Report report = nbp::evaluate(bc);
    nbp::write_report(report, g.out);
    if (traces) {
        fs::create_directories(fs::path(g.out) / "traces");
        for (const nbp::EpisodeLog& e : report.episodes)
            nbp::write_trace(e, (fs::path(g.out) / "traces" /
                                 (e.planner + "_" + e.scene_id + "_" + std::to_string(e.seed) +
                                  ".trace"))
                                    .string());
    }
    std::cout << "report written to " << g.out << "/report.csv\n";
    for (const nbp::PlannerStats& s : report.stats)
        std::cout << s.planner << ": cov " << s.mean_cov << " auc " << s.mean_auc << '\n';
    return 0;
}

int run_trace_export(const GlobalOpts& g, const std::string& trace) {
    fs::create_directories(g.out);
    const std::string prefix =
        (fs::path(g.out) / fs::path(trace).stem().string()).string();
    nbp::trace_export(trace, prefix);
    std::cout << "wrote " << prefix << "_coverage.csv and " << prefix << "_trajectory.pgm\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"active 3D mapping laboratory"};
    app.require_subcommand(1);

    GlobalOpts g_gen, g_roll, g_train, g_eval, g_trace;

    auto* gen = app.add_subcommand("gen-scenes", "generate procedural scenes");
    add_globals(gen, g_gen);
    std::string gen_difficulty;
    int gen_count = 0;
    gen->add_option("--difficulty", gen_difficulty, "simple|normal|hard|insane");
    gen->add_option("--count", gen_count, "number of scenes");

    auto* roll = app.add_subcommand("rollout", "collect one training rollout");
    add_globals(roll, g_roll);
    std::string roll_scene, roll_ckpt;
    int roll_length = 0;
    roll->add_option("--scene", roll_scene, "scene file")->required();
    roll->add_option("--checkpoint", roll_ckpt, "predictor weights (default: fresh net)");
    roll->add_option("--length", roll_length, "executed steps");

    auto* tr = app.add_subcommand("train", "run the online training loop");
    add_globals(tr, g_train);
    int train_scenes = 0;
    tr->add_option("--scenes", train_scenes, "number of training scenes");

    auto* ev = app.add_subcommand("eval", "benchmark planners");
    add_globals(ev, g_eval);
    std::string eval_planners;
    bool eval_traces = false;
    ev->add_option("--planners", eval_planners, "comma-separated planner list");
    ev->add_flag("--traces", eval_traces, "write per-episode trace files");

    auto* tx = app.add_subcommand("trace-export", "episode trace -> CSV + trajectory image");
    add_globals(tx, g_trace);
    std::string trace_path;
    tx->add_option("--trace", trace_path, "trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return run_gen_scenes(g_gen, gen_difficulty, gen_count);
        if (roll->parsed()) return run_rollout(g_roll, roll_scene, roll_ckpt, roll_length);
        if (tr->parsed()) return run_train(g_train, train_scenes);
        if (ev->parsed()) return run_eval(g_eval, eval_planners, eval_traces);
        if (tx->parsed()) return run_trace_export(g_trace, trace_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
