#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "olga/folds.hpp"
#include "olga/metrics.hpp"
#include "olga/model.hpp"

namespace olga {

// (alpha, beta, delta) enablers for (L1, L2, L3). Phase 1 trains pure
// reconstruction; the hypersphere task switches on at floor(patience / 2).
struct ScheduleWeights {
    double alpha = 0.0;
    double beta = 1.0;
    double delta = 1.0;
};

inline ScheduleWeights schedule_at(std::size_t epoch, std::size_t patience) {
    if (epoch < patience / 2) return {0.0, 1.0, 1.0};
    return {1.0, 0.0, 1.0};
}

struct TrainConfig {
    std::size_t max_epochs = 5000;
    std::size_t patience = 300;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
    std::size_t snapshot_every = 0;  // 0 disables embedding snapshots

    void validate() const {
        if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
        if (patience == 0 || patience >= max_epochs)
            throw ConfigError("patience must satisfy 0 < patience < max_epochs");
        if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    }
};

struct EpochRecord {
    std::size_t epoch = 0;
    double total = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;
    double val_f1 = 0.0;
};

struct SnapshotRow {
    std::size_t epoch = 0;
    int node = 0;
    Label label = Label::NonInterest;
    std::vector<double> coords;
};

struct TrainTrace {
    std::vector<EpochRecord> records;
    std::vector<SnapshotRow> snapshots;
    std::size_t best_epoch = 0;
    double best_val_f1 = 0.0;
};

struct TrainedModel {
    EncoderConfig encoder;
    ModelParams params;
    HypersphereConfig sphere;
};

// Per-epoch observer hook; grads refer to tape storage and are only valid
// during the call.
struct EpochEvent {
    std::size_t epoch = 0;
    ScheduleWeights weights;
    EpochRecord record;
    std::span<const Matrix* const> grads;
};
using EpochObserver = std::function<void(const EpochEvent&)>;

// Adam with bias-corrected moments; beta1/beta2/eps are the usual defaults.
class Adam {
public:
    Adam(std::vector<Matrix*> params, double learning_rate)
        : params_(std::move(params)), lr_(learning_rate) {
        for (Matrix* p : params_) {
            m_.emplace_back(p->rows(), p->cols());
            v_.emplace_back(p->rows(), p->cols());
        }
    }

    void step(std::span<const Matrix* const> grads) {
        if (grads.size() != params_.size()) throw DimensionError("Adam: gradient count mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        for (std::size_t p = 0; p < params_.size(); ++p) {
            Matrix& x = *params_[p];
            const Matrix& g = *grads[p];
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double gi = g.data()[i];
                double& mi = m_[p].data()[i];
                double& vi = v_[p].data()[i];
                mi = beta1_ * mi + (1.0 - beta1_) * gi;
                vi = beta2_ * vi + (1.0 - beta2_) * gi * gi;
                x.data()[i] -= lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
            }
        }
    }

private:
    std::vector<Matrix*> params_;
    std::vector<Matrix> m_, v_;
    double lr_;
    std::size_t t_ = 0;
    static constexpr double beta1_ = 0.9;
    static constexpr double beta2_ = 0.999;
    static constexpr double eps_ = 1e-8;
};

namespace detail {

inline double validation_f1(const Matrix& embeddings, const FoldSplit& fold,
                            const HypersphereConfig& sphere) {
    std::vector<Label> truth, pred;
    truth.reserve(fold.val_interest.size() + fold.val_non_interest.size());
    for (int i : fold.val_interest) {
        truth.push_back(Label::Interest);
        pred.push_back(distance(embeddings.row(static_cast<std::size_t>(i)), sphere) <= 0.0
                           ? Label::Interest
                           : Label::NonInterest);
    }
    for (int i : fold.val_non_interest) {
        truth.push_back(Label::NonInterest);
        pred.push_back(distance(embeddings.row(static_cast<std::size_t>(i)), sphere) <= 0.0
                           ? Label::Interest
                           : Label::NonInterest);
    }
    return f1_macro(pred, truth);
}

inline void take_snapshot(TrainTrace& trace, const Matrix& embeddings, const Dataset& ds,
                          std::size_t epoch) {
    if (!trace.snapshots.empty() && trace.snapshots.back().epoch == epoch) return;
    for (std::size_t i = 0; i < embeddings.rows(); ++i) {
        SnapshotRow row;
        row.epoch = epoch;
        row.node = static_cast<int>(i);
        row.label = ds.labels[i];
        auto r = embeddings.row(i);
        row.coords.assign(r.begin(), r.end());
        trace.snapshots.push_back(std::move(row));
    }
}

}  // namespace detail

// Multi-task training with the two-phase schedule and early stopping on
// validation f1-macro (ties keep the earliest epoch). Returns the parameters
// of the best validation epoch.
inline std::pair<TrainedModel, TrainTrace> train_olga(const Graph& graph, const Dataset& ds,
                                                      const FoldSplit& fold,
                                                      const EncoderConfig& encoder,
                                                      const HypersphereConfig& sphere,
                                                      const TrainConfig& cfg,
                                                      const ModelParams* warm_start = nullptr,
                                                      const EpochObserver& observer = {}) {
    cfg.validate();
    encoder.validate();
    sphere.validate();

    ModelParams init = warm_start ? *warm_start : ModelParams::glorot(encoder, cfg.seed);
    LossGraph lg = build_olga_loss(graph, ds.features, encoder, init, sphere);
    Adam adam(lg.param_values(), cfg.learning_rate);
    const auto grads = lg.param_grads();

    TrainTrace trace;
    ModelParams best = init;
    double best_f1 = -1.0;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        lg.tape.forward();
        const double l1 = lg.l1.value()(0, 0);
        const double l2 = lg.l2.value()(0, 0);
        const double l3 = lg.l3.value()(0, 0);
        const ScheduleWeights w = schedule_at(epoch, cfg.patience);
        const double total = loss_total(l1, l2, l3, w.alpha, w.beta, w.delta);
        if (!std::isfinite(total))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch));

        const Matrix& embeddings = lg.embedding.value();
        const double val_f1 = detail::validation_f1(embeddings, fold, sphere);

        if (val_f1 > best_f1) {
            best_f1 = val_f1;
            trace.best_epoch = epoch;
            lg.store_params(best);
            since_best = 0;
        } else {
            ++since_best;
        }

        const EpochRecord record{epoch, total, l1, l2, l3, val_f1};
        trace.records.push_back(record);

        const bool stop = since_best >= cfg.patience || epoch + 1 == cfg.max_epochs;
        if (cfg.snapshot_every > 0 && (epoch % cfg.snapshot_every == 0 || stop))
            detail::take_snapshot(trace, embeddings, ds, epoch);
        if (stop) break;

        lg.tape.backward(w.alpha == 0.0 ? lg.recon_head : lg.sphere_head);
        if (observer) observer({epoch, w, record, grads});
        adam.step(grads);
    }

    trace.best_val_f1 = best_f1;
    return {TrainedModel{encoder, std::move(best), sphere}, std::move(trace)};
}

// OCGNN-GCN baseline: the center is frozen to the interest mean of the
// initial forward pass; the radius is re-fit by nearest-rank quantile every
// 5 epochs, alternating with the weight updates.
inline std::pair<TrainedModel, TrainTrace> train_ocgnn(const Graph& graph, const Dataset& ds,
                                                       const FoldSplit& fold,
                                                       const EncoderConfig& encoder,
                                                       const HypersphereConfig& sphere_cfg,
                                                       const TrainConfig& cfg,
                                                       const ModelParams* warm_start = nullptr,
                                                       const EpochObserver& observer = {}) {
    cfg.validate();
    encoder.validate();
    if (sphere_cfg.nu <= 0.0 || sphere_cfg.nu >= 1.0)
        throw ConfigError("train_ocgnn: nu must lie in (0,1)");

    ModelParams init = warm_start ? *warm_start : ModelParams::glorot(encoder, cfg.seed);
    HypersphereConfig sphere = sphere_cfg;
    sphere.center.assign(encoder.embedding_dim(), 0.0);
    sphere.radius = 1.0;  // placeholder until the first quantile fit
    LossGraph lg = build_ocgnn_loss(graph, ds.features, encoder, init, sphere);
    Adam adam(lg.param_values(), cfg.learning_rate);
    const auto grads = lg.param_grads();

    TrainTrace trace;
    ModelParams best = init;
    double best_f1 = -1.0;
    double best_radius = sphere.radius;
    std::size_t since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        lg.tape.forward();
        const Matrix& embeddings = lg.embedding.value();

        if (epoch == 0) {
            sphere.center = ocgnn_center(embeddings, graph.interest);
            Matrix c(1, sphere.center.size());
            std::copy(sphere.center.begin(), sphere.center.end(), c.row(0).begin());
            lg.tape.set_leaf(lg.ocgnn_center_leaf, c);
        }
        if (epoch % 5 == 0) {
            sphere.radius =
                ocgnn_radius_update(embeddings, graph.interest, sphere.center, sphere.nu);
            if (sphere.radius <= 0.0) sphere.radius = 1e-12;
            lg.set_radius(sphere.radius);
        }
        if (epoch == 0 || epoch % 5 == 0) lg.tape.forward_from(lg.ocgnn_refresh_from);

        const double total = lg.ocgnn_head.value()(0, 0);
        const double data_term = lg.plus_r2_node.value()(0, 0);
        const double l2 = lg.l2.value()(0, 0);
        const double l3 = lg.l3.value()(0, 0);
        if (!std::isfinite(total))
            throw TrainingError("training diverged at epoch " + std::to_string(epoch));

        const double val_f1 = detail::validation_f1(embeddings, fold, sphere);
        if (val_f1 > best_f1) {
            best_f1 = val_f1;
            trace.best_epoch = epoch;
            lg.store_params(best);
            best_radius = sphere.radius;
            since_best = 0;
        } else {
            ++since_best;
        }

        const EpochRecord record{epoch, total, data_term, l2, l3, val_f1};
        trace.records.push_back(record);

        const bool stop = since_best >= cfg.patience || epoch + 1 == cfg.max_epochs;
        if (cfg.snapshot_every > 0 && (epoch % cfg.snapshot_every == 0 || stop))
            detail::take_snapshot(trace, embeddings, ds, epoch);
        if (stop) break;

        lg.tape.backward(lg.ocgnn_head);
        if (observer) observer({epoch, ScheduleWeights{1.0, 0.0, 0.0}, record, grads});
        adam.step(grads);
    }

    trace.best_val_f1 = best_f1;
    sphere.radius = best_radius;
    return {TrainedModel{encoder, std::move(best), std::move(sphere)}, std::move(trace)};
}

// ---------------------------------------------------------------------------
// Trace exports.

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline void write_trace_csv(const TrainTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace: " + path);
    out << "epoch,loss_total,loss_l1,loss_l2,loss_l3,val_f1\n";
    for (const EpochRecord& r : trace.records)
        out << r.epoch << ',' << detail::fmt_double(r.total) << ',' << detail::fmt_double(r.l1)
            << ',' << detail::fmt_double(r.l2) << ',' << detail::fmt_double(r.l3) << ','
            << detail::fmt_double(r.val_f1) << '\n';
}

inline void write_snapshots_csv(const TrainTrace& trace, const std::string& path,
                                std::size_t dim) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write snapshots: " + path);
    out << "epoch,node_id,label,x,y";
    if (dim > 2) out << ",z";
    out << '\n';
    for (const SnapshotRow& row : trace.snapshots) {
        out << row.epoch << ',' << row.node << ','
            << (row.label == Label::Interest ? 1 : 0);
        for (double c : row.coords) out << ',' << detail::fmt_double(c);
        out << '\n';
    }
}

inline std::vector<SnapshotRow> read_snapshots_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open snapshots: " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty snapshot file");
    const auto header = olga::detail::split_csv_line(line);
    if (header.size() < 5 || header[0] != "epoch")
        throw ParseError(path + ": not a snapshot file");

    std::vector<SnapshotRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto fields = olga::detail::split_csv_line(line);
        if (fields.size() != header.size())
            throw ParseError(path + ": row " + std::to_string(lineno) + ": bad column count");
        SnapshotRow row;
        row.epoch = static_cast<std::size_t>(olga::detail::parse_number(fields[0], lineno, 0));
        row.node = static_cast<int>(olga::detail::parse_number(fields[1], lineno, 1));
        row.label = olga::detail::parse_number(fields[2], lineno, 2) == 1.0 ? Label::Interest
                                                                            : Label::NonInterest;
        for (std::size_t c = 3; c < fields.size(); ++c)
            row.coords.push_back(olga::detail::parse_number(fields[c], lineno, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace olga
