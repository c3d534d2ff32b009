#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "olga/folds.hpp"
#include "olga/graph.hpp"
#include "olga/stats.hpp"
#include "olga/train.hpp"

namespace olga {

enum class Method { Olga, OcgnnGcn };

inline Method method_from_string(const std::string& s) {
    if (s == "olga") return Method::Olga;
    if (s == "ocgnn-gcn") return Method::OcgnnGcn;
    throw ConfigError("unknown method: " + s + " (expected olga or ocgnn-gcn)");
}

inline const char* method_name(Method m) { return m == Method::Olga ? "olga" : "ocgnn-gcn"; }

// Hyperparameter lists swept per fold; the cell that maximizes validation
// f1-macro is scored on the fold's test set. nu/lambda only apply to the
// OCGNN baseline.
struct GridSpec {
    std::vector<std::size_t> ks{3};
    std::vector<double> radii{0.3, 0.35, 0.4};
    std::vector<double> learning_rates{5e-4};
    std::vector<std::size_t> patiences{300};
    std::vector<std::size_t> embedding_dims{2};
    std::vector<double> nus{0.1};
    std::vector<double> lambdas{5e-4};
    std::size_t hidden_dim = 16;
    std::size_t max_epochs = 5000;
};

struct GridCell {
    std::size_t k = 3;
    double radius = 0.3;
    double learning_rate = 5e-4;
    std::size_t patience = 300;
    std::size_t embedding_dim = 2;
    double nu = 0.1;
    double lambda = 5e-4;
};

inline std::vector<GridCell> expand_grid(Method method, const GridSpec& grid) {
    for (const auto* v : {&grid.radii, &grid.learning_rates, &grid.nus, &grid.lambdas})
        if (v->empty()) throw ConfigError("grid lists must be non-empty");
    if (grid.ks.empty() || grid.patiences.empty() || grid.embedding_dims.empty())
        throw ConfigError("grid lists must be non-empty");

    const std::vector<double> one{0.0};
    const auto& nus = method == Method::OcgnnGcn ? grid.nus : one;
    const auto& lambdas = method == Method::OcgnnGcn ? grid.lambdas : one;
    const auto& radii = method == Method::Olga ? grid.radii : one;

    std::vector<GridCell> cells;
    for (std::size_t k : grid.ks)
        for (std::size_t dim : grid.embedding_dims)
            for (double r : radii)
                for (double lr : grid.learning_rates)
                    for (std::size_t patience : grid.patiences)
                        for (double nu : nus)
                            for (double lambda : lambdas)
                                cells.push_back({k, r, lr, patience, dim, nu, lambda});
    return cells;
}

struct FoldOutcome {
    double test_f1 = 0.0;
    double val_f1 = 0.0;
    double interest_inside_rate = 0.0;
    double non_interest_inside_rate = 0.0;
    GridCell selected;
    TrainedModel model;
    TrainTrace trace;
};

struct EvalReport {
    std::string method;
    std::string dataset;
    std::vector<FoldOutcome> folds;
    double mean = 0.0;
    double stddev = 0.0;
};

struct CvConfig {
    std::size_t n_folds = 10;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::size_t snapshot_every = 0;
};

// Fraction of the node set whose embedding falls inside (or on) the sphere.
inline double inside_rate(const Matrix& embeddings, const std::vector<int>& nodes,
                          const HypersphereConfig& sphere) {
    if (nodes.empty()) throw ConfigError("inside_rate: empty node set");
    std::size_t inside = 0;
    for (int i : nodes)
        if (distance(embeddings.row(static_cast<std::size_t>(i)), sphere) <= 0.0) ++inside;
    return static_cast<double>(inside) / static_cast<double>(nodes.size());
}

namespace detail {

struct KGraphCache {
    std::vector<std::size_t> ks;
    std::vector<Matrix> adjacency;
    std::vector<Matrix> norm_operator;

    std::size_t index_of(std::size_t k) const {
        for (std::size_t i = 0; i < ks.size(); ++i)
            if (ks[i] == k) return i;
        throw ConfigError("internal: k not cached");
    }
};

inline KGraphCache build_k_cache(const Dataset& ds, const std::vector<std::size_t>& ks) {
    KGraphCache cache;
    for (std::size_t k : ks) {
        if (std::find(cache.ks.begin(), cache.ks.end(), k) != cache.ks.end()) continue;
        cache.ks.push_back(k);
        cache.adjacency.push_back(knn_adjacency(ds.features, k));
        cache.norm_operator.push_back(normalize_adjacency(cache.adjacency.back()));
    }
    return cache;
}

inline Graph assemble_graph(const Dataset& ds, const KGraphCache& cache, std::size_t k,
                            const FoldSplit& fold) {
    const std::size_t idx = cache.index_of(k);
    Graph g;
    g.adjacency = cache.adjacency[idx];
    g.norm_operator = cache.norm_operator[idx];
    g.interest = fold.train_interest;
    std::vector<char> is_interest(ds.n(), 0);
    for (int i : g.interest) is_interest[static_cast<std::size_t>(i)] = 1;
    for (std::size_t i = 0; i < ds.n(); ++i)
        if (!is_interest[i]) g.unlabeled.push_back(static_cast<int>(i));
    return g;
}

inline double test_f1(const Matrix& embeddings, const FoldSplit& fold,
                      const HypersphereConfig& sphere) {
    std::vector<Label> truth, pred;
    for (int i : fold.test_interest) {
        truth.push_back(Label::Interest);
        pred.push_back(distance(embeddings.row(static_cast<std::size_t>(i)), sphere) <= 0.0
                           ? Label::Interest
                           : Label::NonInterest);
    }
    for (int i : fold.test_non_interest) {
        truth.push_back(Label::NonInterest);
        pred.push_back(distance(embeddings.row(static_cast<std::size_t>(i)), sphere) <= 0.0
                           ? Label::Interest
                           : Label::NonInterest);
    }
    return f1_macro(pred, truth);
}

}  // namespace detail

// 10-fold one-class protocol: only interest nodes fold; per fold, the grid
// cell with the best validation f1-macro is kept (ties: first cell) and
// scored once on the fold's test set.
inline EvalReport run_cv(const Dataset& ds, Method method, const GridSpec& grid,
                         const CvConfig& cv) {
    const auto folds = make_folds(ds, cv.n_folds, cv.seed);
    const auto cells = expand_grid(method, grid);
    const auto cache = detail::build_k_cache(ds, grid.ks);

    EvalReport report;
    report.method = method_name(method);
    report.dataset = ds.name;
    report.folds.resize(folds.size());

    auto run_fold = [&](std::size_t f) {
        const FoldSplit& fold = folds[f];
        bool have_best = false;
        FoldOutcome best;

        for (std::size_t c = 0; c < cells.size(); ++c) {
            const GridCell& cell = cells[c];
            const Graph graph = detail::assemble_graph(ds, cache, cell.k, fold);

            EncoderConfig encoder;
            encoder.layer_dims = {ds.dim(), grid.hidden_dim, cell.embedding_dim};
            encoder.activation = method == Method::Olga ? Unary::Tanh : Unary::Relu;

            TrainConfig tc;
            tc.max_epochs = grid.max_epochs;
            tc.patience = cell.patience;
            tc.learning_rate = cell.learning_rate;
            tc.seed = Rng::derive(cv.seed, f * 7919 + c);
            tc.snapshot_every = cv.snapshot_every;

            std::pair<TrainedModel, TrainTrace> run;
            try {
                if (method == Method::Olga) {
                    const auto sphere =
                        HypersphereConfig::origin(cell.embedding_dim, cell.radius);
                    run = train_olga(graph, ds, fold, encoder, sphere, tc);
                } else {
                    HypersphereConfig sphere;
                    sphere.nu = cell.nu;
                    sphere.lambda = cell.lambda;
                    run = train_ocgnn(graph, ds, fold, encoder, sphere, tc);
                }
            } catch (const TrainingError& e) {
                throw TrainingError("fold " + std::to_string(f) + ", grid cell " +
                                    std::to_string(c) + ": " + e.what());
            }

            if (!have_best || run.second.best_val_f1 > best.val_f1) {
                have_best = true;
                best.val_f1 = run.second.best_val_f1;
                best.selected = cell;
                best.model = std::move(run.first);
                best.trace = std::move(run.second);
            }
        }

        const std::size_t k_idx = cache.index_of(best.selected.k);
        const Matrix embeddings = encode(cache.norm_operator[k_idx], ds.features,
                                         best.model.params, best.model.encoder.activation);
        best.test_f1 = detail::test_f1(embeddings, fold, best.model.sphere);
        best.interest_inside_rate =
            inside_rate(embeddings, ds.indices_with(Label::Interest), best.model.sphere);
        best.non_interest_inside_rate =
            inside_rate(embeddings, ds.indices_with(Label::NonInterest), best.model.sphere);
        report.folds[f] = std::move(best);
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cv.jobs, folds.size()));
    if (jobs == 1) {
        for (std::size_t f = 0; f < folds.size(); ++f) run_fold(f);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(folds.size());
        std::vector<std::thread> workers;
        for (std::size_t w = 0; w < jobs; ++w)
            workers.emplace_back([&] {
                for (std::size_t f = next.fetch_add(1); f < folds.size();
                     f = next.fetch_add(1)) {
                    try {
                        run_fold(f);
                    } catch (...) {
                        errors[f] = std::current_exception();
                    }
                }
            });
        for (auto& t : workers) t.join();
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    double mean = 0.0;
    for (const FoldOutcome& f : report.folds) mean += f.test_f1;
    mean /= static_cast<double>(report.folds.size());
    double var = 0.0;
    for (const FoldOutcome& f : report.folds) var += (f.test_f1 - mean) * (f.test_f1 - mean);
    report.mean = mean;
    report.stddev = std::sqrt(var / static_cast<double>(report.folds.size()));
    return report;
}

}  // namespace olga
