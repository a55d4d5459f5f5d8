// Command-line launcher: serve, pipeline, simulate, fixture.

#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "trajal/active_learning.hpp"
#include "trajal/decision_surface.hpp"
#include "trajal/embed.hpp"
#include "trajal/fixture.hpp"
#include "trajal/service.hpp"

using namespace trajal;

namespace {

Service* g_service = nullptr;

void on_signal(int) {
    if (g_service) g_service->stop();
}

void write_json(const std::filesystem::path& p, const nlohmann::ordered_json& j) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + p.string(), {{"path", p.string()}});
    out << j.dump(1) << '\n';
}

nlohmann::ordered_json rows_of(const Matrix& m) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) a.push_back({m(i, 0), m(i, 1)});
    return a;
}

int serve(const std::string& config_path, int port) {
    ServiceConfig cfg;
    if (!config_path.empty()) {
        cfg = load_service_config(config_path);
    } else {
        detail::apply_env(cfg);
    }
    if (port >= 0) cfg.port = port;
    Service service(cfg);
    const int bound = service.bind();
    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on http://" << cfg.host << ':' << bound << "/ (data " << cfg.data_dir.string() << ")\n";
    service.run();
    g_service = nullptr;
    return 0;
}

struct PipelineArgs {
    std::string dataset;
    std::string data_dir = "data";
    std::string out = "out";
    std::string colors;
    bool derive = false;
    double perplexity = 40.0;
    unsigned threads = 1;
};

int pipeline(const PipelineArgs& a) {
    const FeatureTable table = load_dataset(a.data_dir, a.dataset, a.derive);
    std::filesystem::create_directories(a.out);
    export_csv(table, std::filesystem::path(a.out) / (a.dataset + ".csv"));

    TsneConfig tc;
    tc.perplexity = a.perplexity;
    tc.threads = a.threads;
    const EmbedResult emb = embed_pipeline(table, tc);
    nlohmann::ordered_json ej;
    ej["tid"] = table.tids;
    ej["label"] = table.labels;
    ej["pca"] = rows_of(emb.pca2.coords);
    if (emb.tsne2) {
        ej["tsne"] = rows_of(emb.tsne2->coords);
        ej["perplexity"] = emb.perplexity;
    }
    write_json(std::filesystem::path(a.out) / "embedding.json", ej);

    const auto [codes, codec] = encode_labels(table.labels);
    ColorScale colors = default_color_scale(codec.labels());
    if (!a.colors.empty()) colors = nlohmann::json::parse(a.colors).get<ColorScale>();
    SurfaceOptions opt;
    opt.ground_truth = true;
    opt.threads = a.threads;
    const SurfaceResult res = surface_pipeline(table, colors, a.out, opt);

    std::cout << "rows " << table.size() << ", features " << table.columns.size() << ", t-SNE input width "
              << emb.cascade_width << '\n';
    for (std::size_t i = 0; i < res.surfaces.size(); ++i) {
        std::cout << res.paths[i].string() << "  " << surface_title(res.surfaces[i]) << '\n';
    }
    if (res.ground_truth_path) std::cout << res.ground_truth_path->string() << "  ground truth\n";
    return 0;
}

struct SimulateArgs {
    std::string dataset;
    std::string data_dir = "data";
    std::string strategy = "UNC";
    std::string classifier = "forest";
    std::string feature_space = "full";
    std::size_t budget = 10;
    std::size_t bag = 2;
    std::uint64_t seed = 34;
    double holdout = 0.2;
    double threshold = 0.9;
    bool derive = false;
    bool json = false;
};

int simulate(const SimulateArgs& a) {
    const FeatureTable table = load_dataset(a.data_dir, a.dataset, a.derive);
    ALConfig cfg;
    cfg.strategy = parse_strategy(a.strategy);
    cfg.classifier = parse_model_kind(a.classifier);
    cfg.feature_space = a.feature_space == "pca2" ? FeatureSpace::pca2 : FeatureSpace::full;
    if (a.feature_space != "full" && a.feature_space != "pca2") {
        fail(ErrorKind::config, "feature space must be full or pca2", {{"feature_space", a.feature_space}});
    }
    cfg.budget = a.budget;
    cfg.bag_size = a.bag;
    cfg.seed = a.seed;
    ALSession session = ALSession::create_simulated(table, cfg, a.holdout);
    run_simulation(session);

    const auto reached = labels_to_reach(session.history(), a.threshold);
    if (a.json) {
        nlohmann::ordered_json out;
        out["config"] = to_json(session.config());
        out["pool_size"] = session.initial_pool_size();
        out["holdout_size"] = session.holdout_tids().size();
        nlohmann::ordered_json hist = nlohmann::ordered_json::array();
        for (const auto& h : session.history()) {
            hist.push_back({{"round", h.round}, {"queried", h.queried}, {"labels", h.labels},
                            {"holdout_f1", h.holdout_f1 ? nlohmann::ordered_json(*h.holdout_f1) : nlohmann::ordered_json()}});
        }
        out["history"] = hist;
        out["labels_to_reach"] = reached ? nlohmann::ordered_json(*reached) : nlohmann::ordered_json();
        std::cout << out.dump(1) << '\n';
        return 0;
    }
    std::printf("strategy %s, classifier %s, budget %zu, bag %zu, pool %zu, holdout %zu\n",
                std::string(to_string(cfg.strategy)).c_str(), std::string(to_string(cfg.classifier)).c_str(), cfg.budget,
                cfg.bag_size, session.initial_pool_size(), session.holdout_tids().size());
    std::size_t used = 0;
    for (const auto& h : session.history()) {
        used += h.queried.size();
        std::printf("round %3zu  labels %4zu  F1 %s\n", h.round, used,
                    h.holdout_f1 ? std::to_string(*h.holdout_f1).c_str() : "n/a");
    }
    if (reached) {
        std::printf("F1 >= %.2f after %zu labels\n", a.threshold, *reached);
    } else {
        std::printf("F1 >= %.2f not reached within budget\n", a.threshold);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trajectory embedding, decision surfaces and active labeling"};
    app.require_subcommand(1);

    std::string config_path;
    int port = -1;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
    serve_cmd->add_option("--config", config_path, "JSON config file");
    serve_cmd->add_option("--port", port, "Override the configured port");

    PipelineArgs pa;
    auto* pipe_cmd = app.add_subcommand("pipeline", "Headless ingest, embed and decision-surface run");
    pipe_cmd->add_option("--dataset", pa.dataset, "Dataset key")->required();
    pipe_cmd->add_option("--data-dir", pa.data_dir, "Directory holding <key>.json and <key>_label.json");
    pipe_cmd->add_option("--out", pa.out, "Output directory");
    pipe_cmd->add_option("--colors", pa.colors, "JSON map of label to color");
    pipe_cmd->add_option("--perplexity", pa.perplexity, "t-SNE perplexity");
    pipe_cmd->add_option("--threads", pa.threads, "Worker threads");
    pipe_cmd->add_flag("--derive-features", pa.derive, "Derive motion features from geometry");

    SimulateArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "Active-learning run against the label file");
    sim_cmd->add_option("--dataset", sa.dataset, "Dataset key")->required();
    sim_cmd->add_option("--data-dir", sa.data_dir, "Directory holding <key>.json and <key>_label.json");
    sim_cmd->add_option("--strategy", sa.strategy, "RND, UNC or QBC");
    sim_cmd->add_option("--budget", sa.budget, "Total labels to query");
    sim_cmd->add_option("--bag", sa.bag, "Labels per round");
    sim_cmd->add_option("--classifier", sa.classifier, "forest, extra_trees or gradient_boosting");
    sim_cmd->add_option("--feature-space", sa.feature_space, "full or pca2");
    sim_cmd->add_option("--seed", sa.seed, "Session seed");
    sim_cmd->add_option("--holdout", sa.holdout, "Fraction held out for scoring");
    sim_cmd->add_option("--threshold", sa.threshold, "F1 target for the labels-to-reach summary");
    sim_cmd->add_flag("--json", sa.json, "Print the run as JSON");
    sim_cmd->add_flag("--derive-features", sa.derive, "Derive motion features from geometry");

    FixtureSpec fs;
    std::string fixture_dir = "data";
    std::string fixture_key = "demo";
    auto* fix_cmd = app.add_subcommand("fixture", "Write a synthetic two-class dataset");
    fix_cmd->add_option("--out", fixture_dir, "Output directory");
    fix_cmd->add_option("--key", fixture_key, "Dataset key");
    fix_cmd->add_option("--per-class", fs.per_class, "Records per class");
    fix_cmd->add_option("--separation", fs.separation, "Class mean gap in standard deviations");
    fix_cmd->add_option("--seed", fs.seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(config_path, port);
        if (*pipe_cmd) return pipeline(pa);
        if (*sim_cmd) return simulate(sa);
        if (*fix_cmd) {
            write_fixture(make_fixture(fs), fixture_dir, fixture_key);
            std::cout << "wrote " << (std::filesystem::path(fixture_dir) / (fixture_key + ".json")).string() << '\n';
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << ' ' << e.detail().dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
