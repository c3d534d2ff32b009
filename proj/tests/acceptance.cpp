// Acceptance suite: one line per criterion, run as
//   olga_acceptance <path-to-cli-binary> <path-to-data-dir>

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "olga/config.hpp"
#include "olga/evaluate.hpp"
#include "olga/report_io.hpp"

namespace fs = std::filesystem;
using namespace olga;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli_path;
std::string g_data_dir;

struct Criterion {
    std::string name;
    std::function<bool(std::string&)> run;
};

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_matrices(std::span<const Matrix* const> ms) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Matrix* m : ms) h = fnv1a(h, m->data(), m->size() * sizeof(double));
    return h;
}

// --- criterion 1: rank reproduction from the bundled benchmark table -------

bool criterion_rank(std::string& detail) {
    const auto t0 = Clock::now();
    const ScoreTable table = load_score_table(g_data_dir + "/ocl_benchmark_f1.csv");
    const RankResult result = friedman_nemenyi(table.scores, table.methods);

    std::size_t olga_idx = table.methods.size();
    for (std::size_t j = 0; j < result.methods.size(); ++j)
        if (result.methods[j] == "OLGA") olga_idx = j;
    if (olga_idx == table.methods.size()) {
        detail = "OLGA column missing";
        return false;
    }

    bool ok = true;
    for (std::size_t j = 0; j < result.methods.size(); ++j) {
        if (j == olga_idx) continue;
        if (result.average_ranks[j] <= result.average_ranks[olga_idx]) ok = false;
        const bool significant =
            result.is_significant(static_cast<int>(olga_idx), static_cast<int>(j));
        const bool expected = result.methods[j] != "Deepwalk";
        if (significant != expected) ok = false;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream msg;
    msg << "OLGA avg rank " << result.average_ranks[olga_idx] << ", CD "
        << result.critical_difference << ", " << result.significant_pairs.size()
        << " significant pairs, " << secs << "s";
    detail = msg.str();
    return ok && secs < 1.0;
}

// --- criterion 2: analytic gradients vs central finite differences ---------

bool criterion_gradients(std::string& detail) {
    const auto t0 = Clock::now();
    double worst = 0.0;

    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Dataset ds = synth_dataset(SynthKind::Blobs, 3, 3, seed);
        std::vector<int> interest{0, 1, 2};
        const Graph graph = build_graph(ds, 2, interest);

        EncoderConfig encoder;
        encoder.layer_dims = {ds.dim(), 4, 2};
        encoder.activation = Unary::Tanh;
        const ModelParams params = ModelParams::glorot(encoder, seed);
        const auto sphere = HypersphereConfig::origin(2, 0.3);

        LossGraph lg = build_olga_loss(graph, ds.features, encoder, params, sphere);
        const Var combo = lg.tape.add(lg.tape.add(lg.l1, lg.l2), lg.l3);
        auto values = lg.param_values();
        auto grads = lg.param_grads();
        for (Var head : {lg.l1, lg.l2, lg.l3, combo}) {
            lg.tape.forward();
            lg.tape.backward(head);
            worst = std::max(worst, finite_diff_check(values, grads, [&] {
                                 lg.tape.forward();
                                 return head.value()(0, 0);
                             }));
        }

        EncoderConfig relu_encoder = encoder;
        relu_encoder.activation = Unary::Relu;
        HypersphereConfig ocgnn_sphere = HypersphereConfig::origin(2, 0.4);
        ocgnn_sphere.nu = 0.2;
        ocgnn_sphere.lambda = 0.0005;
        LossGraph og = build_ocgnn_loss(graph, ds.features, relu_encoder,
                                        ModelParams::glorot(relu_encoder, seed + 100),
                                        ocgnn_sphere);
        auto ovalues = og.param_values();
        auto ogrids = og.param_grads();
        og.tape.forward();
        og.tape.backward(og.ocgnn_head);
        worst = std::max(worst, finite_diff_check(ovalues, ogrids, [&] {
                             og.tape.forward();
                             return og.ocgnn_head.value()(0, 0);
                         }));
    }

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream msg;
    msg << "max relative error " << worst << " over 20 seeds, " << secs << "s";
    detail = msg.str();
    return worst < 1e-4 && secs < 10.0;
}

// --- criterion 3: shape of the penalty function -----------------------------

bool criterion_penalty_shape(std::string& detail) {
    bool ok = hypersphere_penalty(0.0) == 1.0;
    ok = ok && hypersphere_penalty(1.0) == 2.0;
    // continuity and C1 smoothness at the branch point
    ok = ok && hypersphere_penalty_derivative(0.0) == 1.0;
    const double right_slope = (hypersphere_penalty(1e-9) - hypersphere_penalty(0.0)) / 1e-9;
    const double left_slope = (hypersphere_penalty(0.0) - hypersphere_penalty(-1e-9)) / 1e-9;
    ok = ok && std::abs(right_slope - 1.0) < 1e-6 && std::abs(left_slope - 1.0) < 1e-6;
    ok = ok && hypersphere_penalty_derivative(1e-300) == 1.0;

    std::size_t increasing = 0;
    double prev = hypersphere_penalty(-3.0);
    for (int i = 1; i <= 10000; ++i) {
        const double d = -3.0 + 6.0 * static_cast<double>(i) / 10000.0;
        const double v = hypersphere_penalty(d);
        increasing += v > prev;
        prev = v;
    }
    ok = ok && increasing == 10000;

    std::ostringstream msg;
    msg << "f(0)=1, f(1)=2 exact; slopes " << left_slope << "/" << right_slope << "; "
        << increasing << "/10000 grid steps increasing";
    detail = msg.str();
    return ok;
}

// --- criterion 4: desk-scale end-to-end on blobs ----------------------------

bool criterion_end_to_end(std::string& detail) {
    const auto t0 = Clock::now();
    const Dataset ds = synth_dataset(SynthKind::Blobs, 250, 250, 4242);

    GridSpec grid;
    grid.ks = {3};
    grid.radii = {0.3, 0.35, 0.4};
    grid.learning_rates = {5e-4};
    grid.patiences = {300};
    grid.embedding_dims = {2};
    grid.hidden_dim = 16;
    grid.max_epochs = 1500;

    CvConfig cv;
    cv.n_folds = 10;
    cv.seed = 4242;

    const EvalReport report = run_cv(ds, Method::Olga, grid, cv);
    double inside_interest = 0.0, inside_non = 0.0;
    for (const FoldOutcome& f : report.folds) {
        inside_interest += f.interest_inside_rate;
        inside_non += f.non_interest_inside_rate;
    }
    inside_interest /= static_cast<double>(report.folds.size());
    inside_non /= static_cast<double>(report.folds.size());

    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::ostringstream msg;
    msg << "mean f1 " << report.mean << " (std " << report.stddev << "), interest inside "
        << inside_interest << ", non-interest inside " << inside_non << ", " << secs << "s";
    detail = msg.str();
    return report.mean >= 0.95 && inside_interest >= 0.9 && inside_non <= 0.1 && secs < 300.0;
}

// --- criterion 5: two-phase schedule behavior -------------------------------

bool criterion_schedule(std::string& detail) {
    const Dataset ds = synth_dataset(SynthKind::Blobs, 30, 30, 77);
    const auto folds = make_folds(ds, 10, 77);
    const Graph graph = build_graph(ds, 3, folds[0].train_interest);

    EncoderConfig encoder;
    encoder.layer_dims = {ds.dim(), 8, 2};
    encoder.activation = Unary::Tanh;

    auto gradient_hashes = [&](double radius) {
        TrainConfig tc;
        tc.max_epochs = 320;
        tc.patience = 300;
        tc.learning_rate = 5e-4;
        tc.seed = 7;
        std::vector<std::uint64_t> hashes;
        const EpochObserver observer = [&](const EpochEvent& ev) {
            hashes.push_back(hash_matrices(ev.grads));
        };
        train_olga(graph, ds, folds[0], encoder, HypersphereConfig::origin(2, radius), tc,
                   nullptr, observer);
        return hashes;
    };

    // the radii are chosen so that the perturbation flips penalty branches
    // once the hypersphere task activates
    const auto a = gradient_hashes(0.3);
    const auto b = gradient_hashes(1.4);
    const std::size_t n = std::min(a.size(), b.size());
    std::size_t first_diff = n;
    for (std::size_t e = 0; e < n; ++e) {
        if (a[e] != b[e]) {
            first_diff = e;
            break;
        }
    }

    std::ostringstream msg;
    msg << "gradients identical for epochs [0," << first_diff << "), first difference at epoch "
        << first_diff << " (switch expected at 150)";
    detail = msg.str();
    return n > 150 && first_diff == 150;
}

// --- criterion 6: hypersphere volume analysis -------------------------------

bool criterion_volume(std::string& detail) {
    const double pi = 3.14159265358979323846;
    bool ok = std::abs(hypersphere_volume(2, 1.0) - pi) < 1e-12;
    ok = ok && std::abs(hypersphere_volume(3, 1.0) - 4.0 * pi / 3.0) < 1e-12;

    double worst_tail = 0.0;
    for (double r : {0.3, 0.45, 0.5}) {
        double prev = hypersphere_volume(2, r);
        for (std::size_t n = 3; n <= 40; ++n) {
            const double v = hypersphere_volume(n, r);
            if (v >= prev) ok = false;
            prev = v;
            if (n > 15) worst_tail = std::max(worst_tail, v);
        }
    }
    ok = ok && worst_tail < 1e-3;

    std::ostringstream msg;
    msg << "V_2(1)-pi = " << hypersphere_volume(2, 1.0) - pi << ", max volume beyond n=15 is "
        << worst_tail;
    detail = msg.str();
    return ok;
}

// --- criterion 7: published fold arithmetic ---------------------------------

bool criterion_folds(std::string& detail) {
    Dataset ds;
    ds.features = Matrix(1044 + 1020, 1, 1.0);
    ds.labels.assign(1044 + 1020, Label::NonInterest);
    for (std::size_t i = 0; i < 1044; ++i) ds.labels[i] = Label::Interest;

    const auto folds = make_folds(ds, 10, 7);
    bool ok = folds.size() == 10;
    std::size_t canonical = 0;
    for (const FoldSplit& f : folds) {
        if (f.test_non_interest.size() != 510 || f.val_non_interest.size() != 510) ok = false;
        if (f.test_interest.size() == 104 && f.train_pool_size() == 940) ++canonical;
    }
    ok = ok && canonical == 6;  // 1044 = 4*105 + 6*104

    std::ostringstream msg;
    msg << canonical << "/10 folds at 940 train / 104 test-interest, all folds at 510 "
        << "test-non-interest";
    detail = msg.str();
    return ok;
}

// --- criterion 8: CLI determinism -------------------------------------------

int run_cli(const std::string& args) {
    const std::string cmd = "\"" + g_cli_path + "\" " + args + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(entry.path(), dir).string()] = ss.str();
    }
    return files;
}

bool criterion_cli_determinism(std::string& detail) {
    const fs::path base = fs::temp_directory_path() / "olga_acceptance_cli";
    fs::remove_all(base);
    fs::create_directories(base);

    const std::string cfg_path = (base / "run.cfg").string();
    {
        std::ofstream cfg(cfg_path);
        cfg << "synth = blobs\nn_interest = 30\nn_non_interest = 30\nmethod = olga\n"
               "k = 2\nradius = 0.3\nlr = 0.0005\npatience = 25\nmax_epochs = 80\n"
               "folds = 5\nseed = 11\nsnapshot_every = 20\nhidden = 8\n";
    }

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"volume", "volume --radii 0.3,0.45,0.5 --n-max 40 --svg"},
        {"build-graph", "build-graph --config " + cfg_path},
        {"train", "train --config " + cfg_path},
        {"cv", "cv --config " + cfg_path},
        {"rank", "rank " + g_data_dir + "/ocl_benchmark_f1.csv"},
    };

    std::size_t files_compared = 0;
    for (const auto& [name, args] : commands) {
        for (const char* tag : {"a", "b"}) {
            const fs::path out = base / (name + "_" + tag);
            if (run_cli(args + " --out " + out.string()) != 0) {
                detail = name + ": nonzero exit";
                return false;
            }
        }
        const auto a = read_dir(base / (name + "_a"));
        const auto b = read_dir(base / (name + "_b"));
        if (a.empty() || a != b) {
            detail = name + ": artifacts differ between identical runs";
            return false;
        }
        files_compared += a.size();
    }

    // export-embeddings over the train run's snapshots, twice
    for (const char* tag : {"a", "b"}) {
        const fs::path out = base / (std::string("export_") + tag);
        if (run_cli("export-embeddings " + (base / "train_a").string() + " --radius 0.3 --out " +
                    out.string()) != 0) {
            detail = "export-embeddings: nonzero exit";
            return false;
        }
    }
    const auto ea = read_dir(base / "export_a");
    const auto eb = read_dir(base / "export_b");
    if (ea.empty() || ea != eb) {
        detail = "export-embeddings: artifacts differ";
        return false;
    }
    files_compared += ea.size();

    detail = std::to_string(files_compared) + " artifacts byte-identical across reruns";
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: olga_acceptance <cli-binary> <data-dir>\n";
        return 2;
    }
    g_cli_path = argv[1];
    g_data_dir = argv[2];

    const std::vector<Criterion> criteria = {
        {"rank reproduction from the benchmark table", criterion_rank},
        {"gradient correctness vs finite differences", criterion_gradients},
        {"penalty function shape", criterion_penalty_shape},
        {"desk-scale 10-fold CV on blobs", criterion_end_to_end},
        {"two-phase schedule behavior", criterion_schedule},
        {"hypersphere volume analysis", criterion_volume},
        {"fold protocol arithmetic", criterion_folds},
        {"CLI determinism", criterion_cli_determinism},
    };

    std::size_t passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = false;
        try {
            ok = criteria[i].run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("[%zu/%zu] %-45s %s  (%s)\n", i + 1, criteria.size(),
                    criteria[i].name.c_str(), ok ? "PASS" : "FAIL", detail.c_str());
        std::fflush(stdout);
        passed += ok;
    }

    std::printf("%zu/%zu criteria passed\n", passed, criteria.size());
    return passed == criteria.size() ? 0 : 1;
}
