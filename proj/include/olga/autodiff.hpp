#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "olga/matrix.hpp"

namespace olga {

// Reverse-mode engine over an explicit tape of matrix-valued nodes. The op
// set is exactly what the encoder/decoder/loss stack needs; there is no
// general broadcasting. Creation order is a topological order, so the
// backward sweep is a single reverse pass that touches each node once.
//
// A tape is built once per training run; forward() re-evaluates every
// non-leaf value in place after leaf values change, without reallocating.
enum class Op {
    Leaf,
    MatMul,
    Transpose,
    Add,
    Sub,
    AddRowVec,
    SubRowVec,
    Elementwise,
    SpherePenalty,
    Square,
    GatherRows,
    RowSum,
    MeanAll,
    SumAll,
    Scale,
    AddScalar,
};

class Tape;

// Handle to a tape node.
class Var {
public:
    Var() = default;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}

    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }
    const Matrix& value() const;
    const Matrix& grad() const;

private:
    Tape* tape_ = nullptr;
    int id_ = -1;
};

class Tape {
    struct Node {
        Op op = Op::Leaf;
        Unary unary = Unary::Tanh;
        int a = -1;
        int b = -1;
        double scalar = 0.0;
        std::vector<int> rows;
        Matrix value;
        Matrix grad;
        bool needs_grad = false;
        bool trainable = false;
    };

public:
    Var leaf(Matrix value, bool trainable = false) {
        Node n;
        n.op = Op::Leaf;
        n.grad = Matrix(value.rows(), value.cols());
        n.value = std::move(value);
        n.needs_grad = trainable;
        n.trainable = trainable;
        nodes_.push_back(std::move(n));
        return {this, static_cast<int>(nodes_.size() - 1)};
    }

    Var constant(Matrix value) { return leaf(std::move(value), false); }

    Var matmul(Var a, Var b) {
        if (value(a).cols() != value(b).rows())
            throw DimensionError("tape matmul: inner dimensions disagree");
        return finish(push(Op::MatMul, a, b, value(a).rows(), value(b).cols()));
    }

    Var transpose(Var a) {
        return finish(push(Op::Transpose, a, {}, value(a).cols(), value(a).rows()));
    }

    Var add(Var a, Var b) {
        check_same_shape(value(a), value(b), "tape add");
        return finish(push(Op::Add, a, b, value(a).rows(), value(a).cols()));
    }

    Var sub(Var a, Var b) {
        check_same_shape(value(a), value(b), "tape sub");
        return finish(push(Op::Sub, a, b, value(a).rows(), value(a).cols()));
    }

    // a is n x m, v is 1 x m, broadcast over rows.
    Var add_rowvec(Var a, Var v) {
        if (value(v).rows() != 1 || value(v).cols() != value(a).cols())
            throw DimensionError("tape add_rowvec: expected 1 x cols(a)");
        return finish(push(Op::AddRowVec, a, v, value(a).rows(), value(a).cols()));
    }

    Var sub_rowvec(Var a, Var v) {
        if (value(v).rows() != 1 || value(v).cols() != value(a).cols())
            throw DimensionError("tape sub_rowvec: expected 1 x cols(a)");
        return finish(push(Op::SubRowVec, a, v, value(a).rows(), value(a).cols()));
    }

    Var elementwise(Unary op, Var a) {
        Var out = push(Op::Elementwise, a, {}, value(a).rows(), value(a).cols());
        nodes_[out.id()].unary = op;
        return finish(out);
    }

    // f(d) = d + 1 for d > 0, exp(d) otherwise; entrywise.
    Var sphere_penalty(Var a) {
        return finish(push(Op::SpherePenalty, a, {}, value(a).rows(), value(a).cols()));
    }

    Var square(Var a) { return finish(push(Op::Square, a, {}, value(a).rows(), value(a).cols())); }

    Var gather_rows(Var a, std::vector<int> idx) {
        for (int i : idx)
            if (i < 0 || static_cast<std::size_t>(i) >= value(a).rows())
                throw DimensionError("tape gather_rows: index out of range");
        Var out = push(Op::GatherRows, a, {}, idx.size(), value(a).cols());
        nodes_[out.id()].rows = std::move(idx);
        return finish(out);
    }

    Var row_sum(Var a) { return finish(push(Op::RowSum, a, {}, value(a).rows(), 1)); }
    Var mean_all(Var a) { return finish(push(Op::MeanAll, a, {}, 1, 1)); }
    Var sum_all(Var a) { return finish(push(Op::SumAll, a, {}, 1, 1)); }

    Var scale(Var a, double s) {
        Var out = push(Op::Scale, a, {}, value(a).rows(), value(a).cols());
        nodes_[out.id()].scalar = s;
        return finish(out);
    }

    Var add_scalar(Var a, double s) {
        Var out = push(Op::AddScalar, a, {}, value(a).rows(), value(a).cols());
        nodes_[out.id()].scalar = s;
        return finish(out);
    }

    // Mutable payloads, used for radius updates between epochs.
    void set_scalar(Var v, double s) { nodes_[v.id()].scalar = s; }
    double get_scalar(Var v) const { return nodes_[v.id()].scalar; }

    void set_leaf(Var v, const Matrix& m) {
        Node& n = nodes_[v.id()];
        check_same_shape(n.value, m, "tape set_leaf");
        n.value = m;
    }

    Matrix& value_mut(Var v) { return nodes_[v.id()].value; }
    const Matrix& value(Var v) const { return nodes_[v.id()].value; }
    const Matrix& grad(Var v) const { return nodes_[v.id()].grad; }

    // Recomputes every non-leaf value in creation (= topological) order.
    void forward() { forward_from(0); }

    // Re-evaluates the tape suffix starting at `first_id`; valid whenever no
    // node before it changed value.
    void forward_from(int first_id) {
        for (std::size_t i = static_cast<std::size_t>(first_id); i < nodes_.size(); ++i)
            if (nodes_[i].op != Op::Leaf) recompute(static_cast<int>(i));
    }

    // Accumulates d(loss)/d(node) into each node reachable from `loss`
    // through grad-requiring nodes. Nodes outside that ancestor set are left
    // untouched (their gradients stay zero), which keeps disabled loss
    // branches from perturbing shared gradients even at the bit level.
    void backward(Var loss) {
        const Node& ln = nodes_[loss.id()];
        if (ln.value.rows() != 1 || ln.value.cols() != 1)
            throw DimensionError("backward: loss node must be 1x1");

        std::vector<char> active(nodes_.size(), 0);
        mark_ancestors(loss.id(), active);

        for (Node& n : nodes_)
            n.grad.zero();
        nodes_[loss.id()].grad(0, 0) = 1.0;

        for (int id = loss.id(); id >= 0; --id) {
            if (!active[id]) continue;
            propagate(id);
        }
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    friend class Var;

    Var push(Op op, Var a, Var b, std::size_t r, std::size_t c) {
        Node n;
        n.op = op;
        n.a = a.id();
        n.b = b.valid() ? b.id() : -1;
        n.value = Matrix(r, c);
        n.grad = Matrix(r, c);
        n.needs_grad = (a.valid() && nodes_[a.id()].needs_grad) ||
                       (b.valid() && nodes_[b.id()].needs_grad);
        nodes_.push_back(std::move(n));
        return {this, static_cast<int>(nodes_.size() - 1)};
    }

    Var finish(Var v) {
        recompute(v.id());
        return v;
    }

    void mark_ancestors(int root, std::vector<char>& active) const {
        std::vector<int> stack{root};
        active[root] = 1;
        while (!stack.empty()) {
            const Node& n = nodes_[stack.back()];
            stack.pop_back();
            for (int p : {n.a, n.b}) {
                if (p >= 0 && !active[p] && nodes_[p].needs_grad) {
                    active[p] = 1;
                    stack.push_back(p);
                }
            }
        }
    }

    void recompute(int id) {
        Node& n = nodes_[id];
        Matrix& out = n.value;
        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul:
                matmul_into(out, nodes_[n.a].value, nodes_[n.b].value);
                break;
            case Op::Transpose: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < a.rows(); ++i)
                    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
                break;
            }
            case Op::Add: {
                const Matrix& a = nodes_[n.a].value;
                const Matrix& b = nodes_[n.b].value;
                for (std::size_t i = 0; i < out.size(); ++i)
                    out.data()[i] = a.data()[i] + b.data()[i];
                break;
            }
            case Op::Sub: {
                const Matrix& a = nodes_[n.a].value;
                const Matrix& b = nodes_[n.b].value;
                for (std::size_t i = 0; i < out.size(); ++i)
                    out.data()[i] = a.data()[i] - b.data()[i];
                break;
            }
            case Op::AddRowVec:
            case Op::SubRowVec: {
                const Matrix& a = nodes_[n.a].value;
                const Matrix& v = nodes_[n.b].value;
                const double sign = n.op == Op::AddRowVec ? 1.0 : -1.0;
                for (std::size_t i = 0; i < a.rows(); ++i)
                    for (std::size_t j = 0; j < a.cols(); ++j)
                        out(i, j) = a(i, j) + sign * v(0, j);
                break;
            }
            case Op::Elementwise: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < out.size(); ++i)
                    out.data()[i] = apply_unary(n.unary, a.data()[i]);
                break;
            }
            case Op::SpherePenalty: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < out.size(); ++i) {
                    const double d = a.data()[i];
                    out.data()[i] = d > 0.0 ? d + 1.0 : std::exp(d);
                }
                break;
            }
            case Op::Square: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < out.size(); ++i)
                    out.data()[i] = a.data()[i] * a.data()[i];
                break;
            }
            case Op::GatherRows: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < n.rows.size(); ++i) {
                    auto src = a.row(static_cast<std::size_t>(n.rows[i]));
                    std::copy(src.begin(), src.end(), out.row(i).begin());
                }
                break;
            }
            case Op::RowSum: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < a.rows(); ++i) {
                    double acc = 0.0;
                    for (double x : a.row(i)) acc += x;
                    out(i, 0) = acc;
                }
                break;
            }
            case Op::MeanAll:
            case Op::SumAll: {
                const Matrix& a = nodes_[n.a].value;
                double acc = 0.0;
                for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
                out(0, 0) = n.op == Op::MeanAll ? acc / static_cast<double>(a.size()) : acc;
                break;
            }
            case Op::Scale: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = n.scalar * a.data()[i];
                break;
            }
            case Op::AddScalar: {
                const Matrix& a = nodes_[n.a].value;
                for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = a.data()[i] + n.scalar;
                break;
            }
        }
    }

    void propagate(int id) {
        Node& n = nodes_[id];
        const Matrix& g = n.grad;
        Matrix* ga = n.a >= 0 && nodes_[n.a].needs_grad ? &nodes_[n.a].grad : nullptr;
        Matrix* gb = n.b >= 0 && nodes_[n.b].needs_grad ? &nodes_[n.b].grad : nullptr;

        switch (n.op) {
            case Op::Leaf:
                break;
            case Op::MatMul:
                if (ga) accumulate_matmul_bt(*ga, g, nodes_[n.b].value);
                if (gb) accumulate_at_matmul(*gb, nodes_[n.a].value, g);
                break;
            case Op::Transpose:
                if (ga)
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) (*ga)(j, i) += g(i, j);
                break;
            case Op::Add:
            case Op::Sub: {
                const double sign = n.op == Op::Add ? 1.0 : -1.0;
                if (ga)
                    for (std::size_t i = 0; i < g.size(); ++i) ga->data()[i] += g.data()[i];
                if (gb)
                    for (std::size_t i = 0; i < g.size(); ++i) gb->data()[i] += sign * g.data()[i];
                break;
            }
            case Op::AddRowVec:
            case Op::SubRowVec: {
                const double sign = n.op == Op::AddRowVec ? 1.0 : -1.0;
                if (ga)
                    for (std::size_t i = 0; i < g.size(); ++i) ga->data()[i] += g.data()[i];
                if (gb)
                    for (std::size_t i = 0; i < g.rows(); ++i)
                        for (std::size_t j = 0; j < g.cols(); ++j) (*gb)(0, j) += sign * g(i, j);
                break;
            }
            case Op::Elementwise: {
                if (!ga) break;
                const Matrix& x = nodes_[n.a].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga->data()[i] +=
                        g.data()[i] * unary_derivative(n.unary, x.data()[i], n.value.data()[i]);
                break;
            }
            case Op::SpherePenalty: {
                if (!ga) break;
                const Matrix& x = nodes_[n.a].value;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const double d = x.data()[i];
                    // both branches have slope 1 at d = 0
                    const double slope = d > 0.0 ? 1.0 : std::exp(d);
                    ga->data()[i] += g.data()[i] * slope;
                }
                break;
            }
            case Op::Square: {
                if (!ga) break;
                const Matrix& x = nodes_[n.a].value;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga->data()[i] += 2.0 * x.data()[i] * g.data()[i];
                break;
            }
            case Op::GatherRows: {
                if (!ga) break;
                for (std::size_t i = 0; i < n.rows.size(); ++i) {
                    auto dst = ga->row(static_cast<std::size_t>(n.rows[i]));
                    auto src = g.row(i);
                    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                }
                break;
            }
            case Op::RowSum: {
                if (!ga) break;
                for (std::size_t i = 0; i < ga->rows(); ++i) {
                    const double gi = g(i, 0);
                    for (double& x : ga->row(i)) x += gi;
                }
                break;
            }
            case Op::MeanAll: {
                if (!ga) break;
                const double gi = g(0, 0) / static_cast<double>(ga->size());
                for (std::size_t i = 0; i < ga->size(); ++i) ga->data()[i] += gi;
                break;
            }
            case Op::SumAll: {
                if (!ga) break;
                const double gi = g(0, 0);
                for (std::size_t i = 0; i < ga->size(); ++i) ga->data()[i] += gi;
                break;
            }
            case Op::Scale: {
                if (!ga) break;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga->data()[i] += n.scalar * g.data()[i];
                break;
            }
            case Op::AddScalar: {
                if (!ga) break;
                for (std::size_t i = 0; i < g.size(); ++i) ga->data()[i] += g.data()[i];
                break;
            }
        }
    }

    std::vector<Node> nodes_;
};

inline const Matrix& Var::value() const { return tape_->value(*this); }
inline const Matrix& Var::grad() const { return tape_->grad(*this); }

// Central finite differences against the analytic gradients for a scalar
// function of the given parameter matrices. `f` is evaluated at the current
// parameter values, which are perturbed one coordinate at a time and
// restored. Returns max over coordinates of |analytic - numeric| / max(1, |numeric|).
inline double finite_diff_check(std::span<Matrix* const> params,
                                std::span<const Matrix* const> analytic,
                                const std::function<double()>& f,
                                double step = 1e-5) {
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& m = *params[p];
        const Matrix& a = *analytic[p];
        for (std::size_t i = 0; i < m.size(); ++i) {
            const double saved = m.data()[i];
            m.data()[i] = saved + step;
            const double up = f();
            m.data()[i] = saved - step;
            const double down = f();
            m.data()[i] = saved;
            const double numeric = (up - down) / (2.0 * step);
            const double err = std::abs(a.data()[i] - numeric) / std::max(1.0, std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    f();  // leave any cached state consistent with the restored parameters
    return worst;
}

}  // namespace olga
