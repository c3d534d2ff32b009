#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <string>
#include <vector>

#include "olga/autodiff.hpp"
#include "olga/dataset.hpp"
#include "olga/error.hpp"
#include "olga/graph.hpp"
#include "olga/matrix.hpp"
#include "olga/rng.hpp"

namespace olga {

struct EncoderConfig {
    // layer_dims = input -> hidden... -> embedding; activation applies to
    // every layer, so a tanh encoder keeps embeddings inside (-1,1)^d
    std::vector<std::size_t> layer_dims;
    Unary activation = Unary::Tanh;

    std::size_t depth() const { return layer_dims.empty() ? 0 : layer_dims.size() - 1; }
    std::size_t embedding_dim() const { return layer_dims.back(); }

    void validate() const {
        if (layer_dims.size() < 2) throw ConfigError("encoder needs at least one layer");
        for (std::size_t d : layer_dims)
            if (d == 0) throw ConfigError("encoder layer dims must be positive");
    }
};

struct LayerParams {
    Matrix weight;  // in x out
    Matrix bias;    // 1 x out
};

// Encoder weights. The inner-product decoder is parameter-free, so the
// decoder "parameters" are these same tensors seen through the embeddings;
// encoder_view()/decoder_view() exist purely for bookkeeping symmetry.
struct ModelParams {
    std::vector<LayerParams> layers;

    static ModelParams glorot(const EncoderConfig& cfg, std::uint64_t seed) {
        cfg.validate();
        ModelParams p;
        Rng rng(Rng::derive(seed, 0x91011));
        for (std::size_t l = 0; l + 1 < cfg.layer_dims.size(); ++l) {
            const std::size_t fan_in = cfg.layer_dims[l];
            const std::size_t fan_out = cfg.layer_dims[l + 1];
            const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
            LayerParams lp{Matrix(fan_in, fan_out), Matrix(1, fan_out)};
            for (std::size_t i = 0; i < lp.weight.size(); ++i)
                lp.weight.data()[i] = rng.uniform(-limit, limit);
            p.layers.push_back(std::move(lp));
        }
        return p;
    }

    std::vector<LayerParams>& encoder_view() { return layers; }
    const std::vector<LayerParams>& decoder_view() const { return layers; }

    bool bitwise_equal(const ModelParams& o) const {
        if (layers.size() != o.layers.size()) return false;
        for (std::size_t l = 0; l < layers.size(); ++l)
            if (!layers[l].weight.bitwise_equal(o.layers[l].weight) ||
                !layers[l].bias.bitwise_equal(o.layers[l].bias))
                return false;
        return true;
    }
};

struct HypersphereConfig {
    std::vector<double> center;  // embedding-space coordinates
    double radius = 0.3;
    double nu = 0.0;      // OCGNN slack fraction, in [0,1)
    double lambda = 0.0;  // OCGNN weight decay

    static HypersphereConfig origin(std::size_t dim, double radius) {
        HypersphereConfig c;
        c.center.assign(dim, 0.0);
        c.radius = radius;
        return c;
    }

    void validate() const {
        if (radius <= 0.0) throw ConfigError("hypersphere radius must be positive");
        if (nu < 0.0 || nu >= 1.0) throw ConfigError("nu must lie in [0,1)");
        if (lambda < 0.0) throw ConfigError("weight decay must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Plain (non-differentiable) forward path, used for classification, metrics
// and as a value-level cross-check of the tape graphs.

inline Matrix encode(const Matrix& norm_operator, const Matrix& features, const ModelParams& params,
                     Unary activation) {
    Matrix h = features;
    for (const LayerParams& layer : params.layers) {
        Matrix z = matmul(matmul(norm_operator, h), layer.weight);
        for (std::size_t i = 0; i < z.rows(); ++i)
            for (std::size_t j = 0; j < z.cols(); ++j)
                z(i, j) = apply_unary(activation, z(i, j) + layer.bias(0, j));
        h = std::move(z);
    }
    return h;
}

inline Matrix decode(const Matrix& embeddings) {
    Matrix logits = matmul(embeddings, transpose(embeddings));
    return apply(Unary::Sigmoid, logits);
}

inline double distance(std::span<const double> embedding, const HypersphereConfig& sphere) {
    if (embedding.size() != sphere.center.size())
        throw DimensionError("distance: embedding dim " + std::to_string(embedding.size()) +
                             " vs center dim " + std::to_string(sphere.center.size()));
    double sq = 0.0;
    for (std::size_t i = 0; i < embedding.size(); ++i) {
        const double d = embedding[i] - sphere.center[i];
        sq += d * d;
    }
    return sq - sphere.radius * sphere.radius;
}

// The one-class penalty: linear outside the boundary, exponential (and still
// strictly increasing) inside, continuous with slope 1 at d = 0.
inline double hypersphere_penalty(double d) { return d > 0.0 ? d + 1.0 : std::exp(d); }

inline double hypersphere_penalty_derivative(double d) { return d > 0.0 ? 1.0 : std::exp(d); }

inline double loss_l1(const Matrix& embeddings, const std::vector<int>& interest,
                      const HypersphereConfig& sphere) {
    if (interest.empty()) throw ConfigError("loss_l1: empty interest set");
    double acc = 0.0;
    for (int i : interest)
        acc += hypersphere_penalty(distance(embeddings.row(static_cast<std::size_t>(i)), sphere));
    return acc / static_cast<double>(interest.size());
}

// Mean squared error between A and its reconstruction, restricted to the
// rows of the given node set (all columns).
inline double reconstruction_mse(const Matrix& adjacency, const Matrix& reconstructed,
                                 const std::vector<int>& rows) {
    check_same_shape(adjacency, reconstructed, "reconstruction_mse");
    if (rows.empty()) throw ConfigError("reconstruction_mse: empty node set");
    double acc = 0.0;
    for (int r : rows) {
        auto a = adjacency.row(static_cast<std::size_t>(r));
        auto b = reconstructed.row(static_cast<std::size_t>(r));
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = a[j] - b[j];
            acc += d * d;
        }
    }
    return acc / static_cast<double>(rows.size() * adjacency.cols());
}

inline double loss_l2(const Matrix& adjacency, const Matrix& reconstructed,
                      const std::vector<int>& interest) {
    return reconstruction_mse(adjacency, reconstructed, interest);
}

inline double loss_l3(const Matrix& adjacency, const Matrix& reconstructed,
                      const std::vector<int>& unlabeled) {
    return reconstruction_mse(adjacency, reconstructed, unlabeled);
}

// alpha, beta, delta are 0/1 enablers for the three tasks.
inline double loss_total(double l1, double l2, double l3, double alpha, double beta, double delta) {
    return l1 * alpha + l2 * beta + l3 * delta;
}

inline double ocgnn_loss(const Matrix& embeddings, const std::vector<int>& interest,
                         const HypersphereConfig& sphere, const ModelParams& params) {
    if (interest.empty()) throw ConfigError("ocgnn_loss: empty interest set");
    if (sphere.nu <= 0.0) throw ConfigError("ocgnn_loss: nu must be positive");
    double hinge = 0.0;
    for (int i : interest)
        hinge += std::max(0.0, distance(embeddings.row(static_cast<std::size_t>(i)), sphere));
    double weight_norm = 0.0;
    for (const LayerParams& layer : params.layers) weight_norm += frobenius_squared(layer.weight);
    const double r2 = sphere.radius * sphere.radius;
    return hinge / (sphere.nu * static_cast<double>(interest.size())) + r2 +
           0.5 * sphere.lambda * weight_norm;
}

inline std::vector<double> ocgnn_center(const Matrix& embeddings,
                                        const std::vector<int>& interest) {
    if (interest.empty()) throw ConfigError("ocgnn_center: empty interest set");
    std::vector<double> c(embeddings.cols(), 0.0);
    for (int i : interest) {
        auto row = embeddings.row(static_cast<std::size_t>(i));
        for (std::size_t j = 0; j < c.size(); ++j) c[j] += row[j];
    }
    for (double& v : c) v /= static_cast<double>(interest.size());
    return c;
}

// (1 - nu)-quantile of the interest distances to the center, nearest-rank:
// the ceil(q * n)-th order statistic.
inline double ocgnn_radius_update(const Matrix& embeddings, const std::vector<int>& interest,
                                  const std::vector<double>& center, double nu) {
    if (interest.empty()) throw ConfigError("ocgnn_radius_update: empty interest set");
    std::vector<double> dist;
    dist.reserve(interest.size());
    for (int i : interest) {
        auto row = embeddings.row(static_cast<std::size_t>(i));
        double sq = 0.0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = row[j] - center[j];
            sq += d * d;
        }
        dist.push_back(std::sqrt(sq));
    }
    std::sort(dist.begin(), dist.end());
    const double q = 1.0 - nu;
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(dist.size())));
    rank = std::clamp<std::size_t>(rank, 1, dist.size());
    return dist[rank - 1];
}

// Interest iff inside or on the hypersphere.
inline std::vector<Label> classify(const Matrix& embeddings, const HypersphereConfig& sphere) {
    std::vector<Label> out(embeddings.rows(), Label::NonInterest);
    for (std::size_t i = 0; i < embeddings.rows(); ++i)
        if (distance(embeddings.row(i), sphere) <= 0.0) out[i] = Label::Interest;
    return out;
}

// ---------------------------------------------------------------------------
// Differentiable loss graphs. A LossGraph is built once per training run;
// each epoch refreshes leaf values, calls forward(), and runs backward()
// from whichever head the schedule selects.

struct LossGraph {
    Tape tape;
    std::vector<Var> weights;
    std::vector<Var> biases;
    Var embedding;

    Var l1;            // hypersphere loss (OLGA) -- invalid for OCGNN graphs
    Var l2;            // labeled reconstruction
    Var l3;            // unlabeled reconstruction
    Var recon_head;    // L2 + L3   (alpha, beta, delta) = (0,1,1)
    Var sphere_head;   // L1 + L3   (alpha, beta, delta) = (1,0,1)
    Var ocgnn_head;    // Eq-style OCGNN objective -- invalid for OLGA graphs
    Var ocgnn_center_leaf;
    Var neg_r2_node;   // payload -r^2 inside the distance column
    Var plus_r2_node;  // payload +r^2 added to the OCGNN data term
    int ocgnn_refresh_from = 0;  // first node to re-evaluate after a center/radius update

    std::vector<Matrix*> param_values() {
        std::vector<Matrix*> out;
        for (Var v : weights) out.push_back(&tape.value_mut(v));
        for (Var v : biases) out.push_back(&tape.value_mut(v));
        return out;
    }

    std::vector<const Matrix*> param_grads() const {
        std::vector<const Matrix*> out;
        for (Var v : weights) out.push_back(&v.grad());
        for (Var v : biases) out.push_back(&v.grad());
        return out;
    }

    void load_params(const ModelParams& p) {
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            tape.set_leaf(weights[l], p.layers[l].weight);
            tape.set_leaf(biases[l], p.layers[l].bias);
        }
    }

    void store_params(ModelParams& p) const {
        for (std::size_t l = 0; l < p.layers.size(); ++l) {
            p.layers[l].weight = weights[l].value();
            p.layers[l].bias = biases[l].value();
        }
    }

    void set_radius(double r) {
        if (neg_r2_node.valid()) tape.set_scalar(neg_r2_node, -r * r);
        if (plus_r2_node.valid()) tape.set_scalar(plus_r2_node, r * r);
    }
};

namespace detail {

// Shared encoder + decoder + reconstruction subgraph.
struct GraphCore {
    Var embedding;
    Var l2;
    Var l3;
};

inline GraphCore build_core(LossGraph& lg, const Graph& graph, const Matrix& features,
                            const EncoderConfig& cfg, const ModelParams& init) {
    Tape& t = lg.tape;
    const Var prop = t.constant(graph.norm_operator);

    Var h = t.constant(features);
    for (std::size_t l = 0; l < init.layers.size(); ++l) {
        const Var w = t.leaf(init.layers[l].weight, /*trainable=*/true);
        const Var b = t.leaf(init.layers[l].bias, /*trainable=*/true);
        lg.weights.push_back(w);
        lg.biases.push_back(b);
        h = t.elementwise(cfg.activation, t.add_rowvec(t.matmul(t.matmul(prop, h), w), b));
    }

    const Var reconstructed = t.elementwise(Unary::Sigmoid, t.matmul(h, t.transpose(h)));

    auto mse_rows = [&](const std::vector<int>& rows) {
        Matrix target(rows.size(), graph.adjacency.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            auto src = graph.adjacency.row(static_cast<std::size_t>(rows[i]));
            std::copy(src.begin(), src.end(), target.row(i).begin());
        }
        const Var diff = t.sub(t.gather_rows(reconstructed, rows), t.constant(std::move(target)));
        return t.mean_all(t.square(diff));
    };

    GraphCore core;
    core.embedding = h;
    core.l2 = mse_rows(graph.interest);
    core.l3 = mse_rows(graph.unlabeled);
    return core;
}

}  // namespace detail

// Multi-task graph: L1 over the interest rows with a fixed center, plus the
// two reconstruction terms and the two schedule heads.
inline LossGraph build_olga_loss(const Graph& graph, const Matrix& features,
                                 const EncoderConfig& cfg, const ModelParams& init,
                                 const HypersphereConfig& sphere) {
    if (graph.interest.empty()) throw ConfigError("build_olga_loss: empty interest set");
    if (sphere.center.size() != cfg.embedding_dim())
        throw DimensionError("build_olga_loss: center dim vs embedding dim");

    LossGraph lg;
    Tape& t = lg.tape;
    const auto core = detail::build_core(lg, graph, features, cfg, init);
    lg.embedding = core.embedding;
    lg.l2 = core.l2;
    lg.l3 = core.l3;

    Matrix center(1, sphere.center.size());
    std::copy(sphere.center.begin(), sphere.center.end(), center.row(0).begin());
    const Var centered =
        t.sub_rowvec(t.gather_rows(core.embedding, graph.interest), t.constant(std::move(center)));
    lg.neg_r2_node = t.add_scalar(t.row_sum(t.square(centered)), -sphere.radius * sphere.radius);
    lg.l1 = t.mean_all(t.sphere_penalty(lg.neg_r2_node));

    lg.recon_head = t.add(lg.l2, lg.l3);
    lg.sphere_head = t.add(lg.l1, lg.l3);
    return lg;
}

// OCGNN objective: hinge of the distances over nu*|V^in|, plus r^2 and the
// weight-decay term. The radius enters as a mutable scalar payload so the
// alternating quantile update does not rebuild the tape.
inline LossGraph build_ocgnn_loss(const Graph& graph, const Matrix& features,
                                  const EncoderConfig& cfg, const ModelParams& init,
                                  const HypersphereConfig& sphere) {
    if (graph.interest.empty()) throw ConfigError("build_ocgnn_loss: empty interest set");
    if (sphere.nu <= 0.0) throw ConfigError("build_ocgnn_loss: nu must be positive");

    LossGraph lg;
    Tape& t = lg.tape;
    const auto core = detail::build_core(lg, graph, features, cfg, init);
    lg.embedding = core.embedding;
    lg.l2 = core.l2;
    lg.l3 = core.l3;
    lg.recon_head = t.add(lg.l2, lg.l3);

    Matrix center(1, sphere.center.size());
    std::copy(sphere.center.begin(), sphere.center.end(), center.row(0).begin());
    lg.ocgnn_center_leaf = t.constant(std::move(center));
    const Var centered =
        t.sub_rowvec(t.gather_rows(core.embedding, graph.interest), lg.ocgnn_center_leaf);
    lg.ocgnn_refresh_from = centered.id();
    lg.neg_r2_node = t.add_scalar(t.row_sum(t.square(centered)), -sphere.radius * sphere.radius);
    const double inv = 1.0 / (sphere.nu * static_cast<double>(graph.interest.size()));
    const Var data_term = t.scale(t.sum_all(t.elementwise(Unary::Relu, lg.neg_r2_node)), inv);
    lg.plus_r2_node = t.add_scalar(data_term, sphere.radius * sphere.radius);

    Var weight_norm = t.sum_all(t.square(lg.weights[0]));
    for (std::size_t l = 1; l < lg.weights.size(); ++l)
        weight_norm = t.add(weight_norm, t.sum_all(t.square(lg.weights[l])));
    lg.ocgnn_head = t.add(lg.plus_r2_node, t.scale(weight_norm, 0.5 * sphere.lambda));
    return lg;
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned text format, hexfloat values for bit-exact round
// trips.

struct Checkpoint {
    EncoderConfig encoder;
    ModelParams params;
    HypersphereConfig sphere;
};

namespace detail {

inline const char* unary_name(Unary u) {
    switch (u) {
        case Unary::Tanh: return "tanh";
        case Unary::Relu: return "relu";
        case Unary::Sigmoid: return "sigmoid";
        case Unary::Exp: return "exp";
    }
    return "?";
}

inline Unary unary_from_name(const std::string& s) {
    if (s == "tanh") return Unary::Tanh;
    if (s == "relu") return Unary::Relu;
    if (s == "sigmoid") return Unary::Sigmoid;
    if (s == "exp") return Unary::Exp;
    throw ParseError("unknown activation: " + s);
}

inline void write_values(std::ostream& out, const Matrix& m) {
    out << std::hexfloat;
    for (std::size_t i = 0; i < m.size(); ++i) out << ' ' << m.data()[i];
    out << std::defaultfloat << '\n';
}

inline void read_values(std::istream& in, Matrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::string token;
        if (!(in >> token)) throw ParseError("checkpoint: truncated value block");
        m.data()[i] = std::strtod(token.c_str(), nullptr);
    }
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write checkpoint: " + path);
    out << "olga-checkpoint 1\n";
    out << "dims";
    for (std::size_t d : ck.encoder.layer_dims) out << ' ' << d;
    out << "\nactivation " << detail::unary_name(ck.encoder.activation) << '\n';
    out << "radius";
    detail::write_values(out, Matrix{{ck.sphere.radius, ck.sphere.nu, ck.sphere.lambda}});
    out << "center";
    Matrix c(1, ck.sphere.center.size());
    std::copy(ck.sphere.center.begin(), ck.sphere.center.end(), c.row(0).begin());
    detail::write_values(out, c);
    for (const LayerParams& layer : ck.params.layers) {
        out << "weight " << layer.weight.rows() << ' ' << layer.weight.cols();
        detail::write_values(out, layer.weight);
        out << "bias " << layer.bias.cols();
        detail::write_values(out, layer.bias);
    }
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open checkpoint: " + path);
    std::string magic;
    int version = 0;
    in >> magic >> version;
    if (magic != "olga-checkpoint" || version != 1)
        throw ParseError(path + ": not a version-1 checkpoint");

    Checkpoint ck;
    std::string key;
    in >> key;
    if (key != "dims") throw ParseError("checkpoint: expected dims");
    std::string line;
    std::getline(in, line);
    std::istringstream dims(line);
    std::size_t d;
    while (dims >> d) ck.encoder.layer_dims.push_back(d);
    ck.encoder.validate();

    std::string act;
    in >> key >> act;
    if (key != "activation") throw ParseError("checkpoint: expected activation");
    ck.encoder.activation = detail::unary_from_name(act);

    in >> key;
    if (key != "radius") throw ParseError("checkpoint: expected radius");
    Matrix rnl(1, 3);
    detail::read_values(in, rnl);
    ck.sphere.radius = rnl(0, 0);
    ck.sphere.nu = rnl(0, 1);
    ck.sphere.lambda = rnl(0, 2);

    in >> key;
    if (key != "center") throw ParseError("checkpoint: expected center");
    Matrix c(1, ck.encoder.embedding_dim());
    detail::read_values(in, c);
    ck.sphere.center.assign(c.row(0).begin(), c.row(0).end());

    for (std::size_t l = 0; l + 1 < ck.encoder.layer_dims.size(); ++l) {
        std::size_t rows = 0, cols = 0;
        in >> key >> rows >> cols;
        if (key != "weight") throw ParseError("checkpoint: expected weight");
        LayerParams lp{Matrix(rows, cols), Matrix(1, 1)};
        detail::read_values(in, lp.weight);
        in >> key >> cols;
        if (key != "bias") throw ParseError("checkpoint: expected bias");
        lp.bias = Matrix(1, cols);
        detail::read_values(in, lp.bias);
        ck.params.layers.push_back(std::move(lp));
    }
    return ck;
}

}  // namespace olga
