// Command-line front end: graph construction, training, the one-class
// cross-validation protocol, rank statistics, and embedding/volume exports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "olga/config.hpp"
#include "olga/report_io.hpp"
#include "olga/svg.hpp"

namespace fs = std::filesystem;
using namespace olga;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    long long seed = -1;
    long long jobs = -1;

    RunConfig resolve() const {
        RunConfig cfg;
        if (!config_path.empty()) cfg = make_run_config(parse_config_file(config_path));
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (jobs >= 1) cfg.jobs = static_cast<std::size_t>(jobs);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        return cfg;
    }
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "key=value run configuration file");
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--jobs", flags.jobs, "parallel fold workers");
}

std::string num3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

void write_edge_list(const Matrix& adjacency, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write edge list: " + path);
    out << "src,dst\n";
    for (std::size_t i = 0; i < adjacency.rows(); ++i)
        for (std::size_t j = i + 1; j < adjacency.cols(); ++j)
            if (adjacency(i, j) != 0.0) out << i << ',' << j << '\n';
}

int cmd_build_graph(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const Dataset ds = cfg.load_dataset();
    const std::size_t k = cfg.grid.ks.front();
    const Matrix adjacency = knn_adjacency(ds.features, k);

    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "edges.csv").string();
    write_edge_list(adjacency, path);

    Graph g;
    g.adjacency = adjacency;
    std::cout << "dataset " << ds.name << ": " << ds.n() << " nodes, " << g.edge_count()
              << " edges (k=" << k << ")\n";
    std::cout << "edge list written to " << path << "\n";
    return 0;
}

int cmd_cv(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const Dataset ds = cfg.load_dataset();

    CvConfig cv;
    cv.n_folds = cfg.folds;
    cv.seed = cfg.seed;
    cv.jobs = cfg.jobs;
    cv.snapshot_every = cfg.snapshot_every;

    const EvalReport report = run_cv(ds, cfg.method, cfg.grid, cv);

    fs::create_directories(cfg.out_dir);
    write_json(to_json(report), (fs::path(cfg.out_dir) / "report.json").string());
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
        const auto& fold = report.folds[f];
        write_trace_csv(fold.trace,
                        (fs::path(cfg.out_dir) / ("trace_fold" + std::to_string(f) + ".csv"))
                            .string());
        if (cfg.snapshot_every > 0)
            write_snapshots_csv(
                fold.trace,
                (fs::path(cfg.out_dir) / ("snapshots_fold" + std::to_string(f) + ".csv"))
                    .string(),
                fold.selected.embedding_dim);
    }

    std::cout << report.method << " on " << report.dataset << ": f1-macro " << num3(report.mean)
              << " (" << num3(report.stddev) << ") over " << report.folds.size() << " folds\n";
    std::cout << "report written to " << (fs::path(cfg.out_dir) / "report.json").string() << "\n";
    return 0;
}

int cmd_train(const CommonFlags& flags, std::size_t fold_index) {
    const RunConfig cfg = flags.resolve();
    const Dataset ds = cfg.load_dataset();

    const auto folds = make_folds(ds, cfg.folds, cfg.seed);
    if (fold_index >= folds.size())
        throw ConfigError("--fold must be < " + std::to_string(folds.size()));
    const FoldSplit& fold = folds[fold_index];

    const auto cells = expand_grid(cfg.method, cfg.grid);
    const GridCell cell = cells.front();

    Graph graph = build_graph(ds, cell.k, fold.train_interest);
    EncoderConfig encoder;
    encoder.layer_dims = {ds.dim(), cfg.grid.hidden_dim, cell.embedding_dim};
    encoder.activation = cfg.method == Method::Olga ? Unary::Tanh : Unary::Relu;

    TrainConfig tc;
    tc.max_epochs = cfg.grid.max_epochs;
    tc.patience = cell.patience;
    tc.learning_rate = cell.learning_rate;
    tc.seed = Rng::derive(cfg.seed, fold_index * 7919);
    tc.snapshot_every = cfg.snapshot_every;

    std::pair<TrainedModel, TrainTrace> run;
    if (cfg.method == Method::Olga) {
        run = train_olga(graph, ds, fold, encoder,
                         HypersphereConfig::origin(cell.embedding_dim, cell.radius), tc);
    } else {
        HypersphereConfig sphere;
        sphere.nu = cell.nu;
        sphere.lambda = cell.lambda;
        run = train_ocgnn(graph, ds, fold, encoder, sphere, tc);
    }

    fs::create_directories(cfg.out_dir);
    write_trace_csv(run.second, (fs::path(cfg.out_dir) / "trace.csv").string());
    if (cfg.snapshot_every > 0)
        write_snapshots_csv(run.second, (fs::path(cfg.out_dir) / "snapshots.csv").string(),
                            cell.embedding_dim);
    save_checkpoint(Checkpoint{run.first.encoder, run.first.params, run.first.sphere},
                    (fs::path(cfg.out_dir) / "model.ckpt").string());

    std::cout << method_name(cfg.method) << " fold " << fold_index << ": best epoch "
              << run.second.best_epoch << ", validation f1-macro "
              << num3(run.second.best_val_f1) << "\n";
    std::cout << "artifacts written to " << cfg.out_dir << "\n";
    return 0;
}

int cmd_rank(const std::string& scores_path, const CommonFlags& flags) {
    const ScoreTable table = load_score_table(scores_path);
    const RankResult result = friedman_nemenyi(table.scores, table.methods);

    std::string out_dir = flags.out_dir.empty() ? "out" : flags.out_dir;
    if (!flags.config_path.empty()) out_dir = flags.resolve().out_dir;
    fs::create_directories(out_dir);
    write_json(to_json(result), (fs::path(out_dir) / "rank.json").string());

    std::vector<std::size_t> order(result.methods.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return result.average_ranks[a] < result.average_ranks[b];
    });

    std::cout << "average ranks (lower is better):\n";
    for (std::size_t i : order)
        std::cout << "  " << result.methods[i] << ": " << num3(result.average_ranks[i]) << "\n";
    std::cout << "critical difference (95%): " << num3(result.critical_difference) << "\n";
    if (result.significant_pairs.empty()) {
        std::cout << "no significant pairs\n";
    } else {
        std::cout << "significant pairs:\n";
        for (auto [a, b] : result.significant_pairs)
            std::cout << "  " << result.methods[static_cast<std::size_t>(a)] << " vs "
                      << result.methods[static_cast<std::size_t>(b)] << "\n";
    }
    return 0;
}

int cmd_volume(const std::string& radii_csv, std::size_t n_max, bool with_svg,
               const CommonFlags& flags) {
    const auto radii = detail::parse_list<double>(radii_csv, "radii");
    for (double r : radii)
        if (r <= 0.0 || r > 1.0) throw ConfigError("volume radii must lie in (0,1]");
    if (n_max < 1) throw ConfigError("--n-max must be >= 1");

    std::string out_dir = flags.out_dir.empty() ? "out" : flags.out_dir;
    fs::create_directories(out_dir);

    std::vector<std::vector<double>> curves;
    const std::string csv_path = (fs::path(out_dir) / "volume.csv").string();
    std::ofstream csv(csv_path);
    if (!csv) throw ParseError("cannot write: " + csv_path);
    csv << "n,r,volume\n";
    for (double r : radii) {
        auto& curve = curves.emplace_back();
        for (std::size_t n = 1; n <= n_max; ++n) {
            curve.push_back(hypersphere_volume(n, r));
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g\n", n, r, curve.back());
            csv << buf;
        }
    }
    csv.close();
    std::cout << "volume table written to " << csv_path << "\n";

    if (with_svg) {
        const std::string svg_path = (fs::path(out_dir) / "volume.svg").string();
        write_volume_svg(radii, n_max, curves, svg_path);
        std::cout << "volume chart written to " << svg_path << "\n";
    }
    return 0;
}

int cmd_export_embeddings(const std::string& trace_dir, double radius,
                          const CommonFlags& flags) {
    if (!fs::is_directory(trace_dir)) throw ConfigError("not a directory: " + trace_dir);
    std::string out_dir = flags.out_dir.empty() ? trace_dir : flags.out_dir;
    fs::create_directories(out_dir);

    std::vector<std::string> snapshot_files;
    for (const auto& entry : fs::directory_iterator(trace_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("snapshots", 0) == 0 && entry.path().extension() == ".csv")
            snapshot_files.push_back(entry.path().string());
    }
    std::sort(snapshot_files.begin(), snapshot_files.end());
    if (snapshot_files.empty()) {
        std::cout << "no snapshot CSVs in " << trace_dir << ", nothing to export\n";
        return 0;
    }

    std::size_t written = 0;
    for (const std::string& file : snapshot_files) {
        const auto rows = read_snapshots_csv(file);
        if (rows.empty()) {
            std::cout << file << ": no snapshot records\n";
            continue;
        }
        if (rows.front().coords.size() != 2) {
            std::cout << file << ": " << rows.front().coords.size()
                      << "-dimensional snapshots, keeping CSV only\n";
            continue;
        }
        std::vector<std::size_t> epochs;
        for (const SnapshotRow& r : rows)
            if (epochs.empty() || epochs.back() != r.epoch) epochs.push_back(r.epoch);

        const std::string stem = fs::path(file).stem().string();
        const auto sphere = HypersphereConfig::origin(2, radius);
        for (std::size_t epoch : epochs) {
            char name[128];
            std::snprintf(name, sizeof(name), "%s_epoch%06zu.svg", stem.c_str(), epoch);
            write_embedding_svg(rows, sphere, epoch, (fs::path(out_dir) / name).string());
            ++written;
        }
    }
    std::cout << written << " SVG file(s) written to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-class graph autoencoder toolkit"};
    app.require_subcommand(1);

    CommonFlags build_flags, cv_flags, train_flags, rank_flags, volume_flags, export_flags;

    auto* build = app.add_subcommand("build-graph", "construct the k-NN graph and export edges");
    add_common(build, build_flags);

    auto* cv = app.add_subcommand("cv", "run the 10-fold one-class evaluation protocol");
    add_common(cv, cv_flags);

    auto* train = app.add_subcommand("train", "train a single fold and save the checkpoint");
    add_common(train, train_flags);
    std::size_t fold_index = 0;
    train->add_option("--fold", fold_index, "fold index to train (default 0)");

    auto* rank = app.add_subcommand("rank", "Friedman + Nemenyi analysis of a score table");
    add_common(rank, rank_flags);
    std::string scores_path;
    rank->add_option("scores", scores_path, "CSV score table (rows=datasets, cols=methods)")
        ->required();

    auto* volume = app.add_subcommand("volume", "hypersphere volume vs dimension table");
    add_common(volume, volume_flags);
    std::string radii_csv = "0.3,0.45,0.5";
    std::size_t n_max = 40;
    bool with_svg = false;
    volume->add_option("--radii", radii_csv, "comma-separated radii in (0,1]");
    volume->add_option("--n-max", n_max, "largest dimension");
    volume->add_flag("--svg", with_svg, "also write a line chart");

    auto* exp = app.add_subcommand("export-embeddings", "render snapshot CSVs as scatter SVGs");
    add_common(exp, export_flags);
    std::string trace_dir;
    double circle_radius = 0.3;
    exp->add_option("trace_dir", trace_dir, "directory containing snapshot CSVs")->required();
    exp->add_option("--radius", circle_radius, "hypersphere radius to draw");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (build->parsed()) return cmd_build_graph(build_flags);
        if (cv->parsed()) return cmd_cv(cv_flags);
        if (train->parsed()) return cmd_train(train_flags, fold_index);
        if (rank->parsed()) return cmd_rank(scores_path, rank_flags);
        if (volume->parsed()) return cmd_volume(radii_csv, n_max, with_svg, volume_flags);
        if (exp->parsed()) return cmd_export_embeddings(trace_dir, circle_radius, export_flags);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
