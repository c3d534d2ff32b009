#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "olga/dataset.hpp"
#include "olga/error.hpp"
#include "olga/matrix.hpp"

namespace olga {

// Undirected graph over the full node set plus the node partition used for
// the one-class losses. interest holds the nodes whose labels are visible
// during training (V^in); unlabeled holds everything else (V^u).
struct Graph {
    Matrix adjacency;      // binary, symmetric, zero diagonal
    Matrix norm_operator;  // D^-1/2 (A + I) D^-1/2
    std::vector<int> interest;
    std::vector<int> unlabeled;

    std::size_t n() const { return adjacency.rows(); }

    std::size_t edge_count() const {
        std::size_t twice = 0;
        for (std::size_t i = 0; i < adjacency.size(); ++i)
            if (adjacency.data()[i] != 0.0) ++twice;
        return twice / 2;
    }
};

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// Each node points at its k most cosine-similar other nodes; the directed
// edges are then symmetrized by union, so every node keeps degree >= k >= 1.
// Ties break toward the lower node index for cross-platform determinism.
inline Matrix knn_adjacency(const Matrix& features, std::size_t k) {
    const std::size_t n = features.rows();
    if (n < 2) throw ConfigError("knn_adjacency: need at least 2 nodes");
    if (k < 1 || k >= n)
        throw ConfigError("knn_adjacency: k must satisfy 1 <= k < n, got k=" + std::to_string(k) +
                          ", n=" + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i)
        if (squared_norm(features.row(i)) == 0.0)
            throw ConfigError("knn_adjacency: node " + std::to_string(i) +
                              " has a zero feature vector");

    Matrix adj(n, n);
    std::vector<std::pair<double, int>> sims(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        sims.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            sims.emplace_back(cosine_similarity(features.row(i), features.row(j)),
                              static_cast<int>(j));
        }
        std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end(),
                          [](const auto& a, const auto& b) {
                              if (a.first != b.first) return a.first > b.first;
                              return a.second < b.second;
                          });
        for (std::size_t t = 0; t < k; ++t) {
            adj(i, static_cast<std::size_t>(sims[t].second)) = 1.0;
            adj(static_cast<std::size_t>(sims[t].second), i) = 1.0;
        }
    }
    return adj;
}

// Symmetric GCN propagation operator over the adjacency with self-loops.
inline Matrix normalize_adjacency(const Matrix& adj) {
    if (adj.rows() != adj.cols()) throw DimensionError("normalize_adjacency: matrix not square");
    const std::size_t n = adj.rows();
    std::vector<double> inv_sqrt_deg(n);
    for (std::size_t i = 0; i < n; ++i) {
        double deg = 1.0;  // self-loop
        for (std::size_t j = 0; j < n; ++j) deg += adj(i, j);
        inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
    }
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double a = i == j ? 1.0 : adj(i, j);
            if (a != 0.0) out(i, j) = a * inv_sqrt_deg[i] * inv_sqrt_deg[j];
        }
    return out;
}

// Assembles the training view of a dataset: graph over ALL nodes (the method
// is transductive), with only the given interest indices visible as labels.
inline Graph build_graph(const Dataset& ds, std::size_t k, std::vector<int> interest) {
    Graph g;
    g.adjacency = knn_adjacency(ds.features, k);
    g.norm_operator = normalize_adjacency(g.adjacency);
    std::sort(interest.begin(), interest.end());
    g.interest = std::move(interest);
    g.unlabeled.reserve(ds.n() - g.interest.size());
    std::size_t next = 0;
    for (int i = 0; i < static_cast<int>(ds.n()); ++i) {
        if (next < g.interest.size() && g.interest[next] == i) {
            ++next;
        } else {
            g.unlabeled.push_back(i);
        }
    }
    return g;
}

}  // namespace olga
