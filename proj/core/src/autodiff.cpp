#include "tiger/autodiff.hpp"

#include "tiger/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>

namespace tiger::ad {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

MutMap view(Tensor& t) {
    return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

constexpr double kLogFloor = 1e-12;

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError(op, "operand shapes differ: " + shape_string(a) + " vs " + shape_string(b));
    }
}

void accumulate(Tensor& dst, const Tensor& src) {
    auto d = dst.data();
    auto s = src.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

bool wants_grad(const NodePtr& n) { return n->requires_grad; }

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Tensor& Node::grad_buffer() {
    if (grad.empty() && !value.empty()) grad = Tensor(value.rows(), value.cols());
    return grad;
}

Var Var::constant(Tensor value) {
    auto node = std::make_shared<Node>();
    node->op = "constant";
    node->value = std::move(value);
    return Var(std::move(node));
}

Var Var::parameter(Tensor value) {
    auto node = std::make_shared<Node>();
    node->op = "parameter";
    node->value = std::move(value);
    node->requires_grad = true;
    return Var(std::move(node));
}

Tensor Var::grad() const {
    if (node_->grad.empty()) return Tensor(node_->value.rows(), node_->value.cols());
    return node_->grad;
}

Var make_op(const char* op, std::vector<Var> inputs, Tensor value, BackwardFn fn) {
    auto node = std::make_shared<Node>();
    node->op = op;
    node->value = std::move(value);
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) {
        node->requires_grad = node->requires_grad || in.requires_grad();
        node->inputs.push_back(in.node());
    }
    if (node->requires_grad) node->backward = std::move(fn);
    return Var(std::move(node));
}

void backward(const Var& loss) {
    if (!loss) throw ContractError("autodiff", "backward on an empty Var");
    if (loss.value().size() != 1) {
        throw ContractError("autodiff", "backward requires a scalar loss, got " +
                                            shape_string(loss.value()));
    }
    // Iterative post-order DFS; the graph is a DAG so each node is emitted once.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            Node* child = node->inputs[next++].get();
            if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    for (Node* n : order) {
        if (!n->inputs.empty()) n->grad = Tensor();
    }
    loss.node()->grad_buffer().fill(1.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backward && !n->grad.empty()) n->backward(*n);
    }
}

void zero_grad(std::span<Var> params) {
    for (auto& p : params) p.node()->grad = Tensor();
}

Var matmul(const Var& a, const Var& b) {
    Tensor out = tiger::matmul(a.value(), b.value());
    return make_op("matmul", {a, b}, std::move(out), [](Node& n) {
        const auto& A = n.inputs[0];
        const auto& B = n.inputs[1];
        if (wants_grad(A)) {
            if (A->value.cols() > 0)
                view(A->grad_buffer()).noalias() += view(n.grad) * view(B->value).transpose();
        }
        if (wants_grad(B)) {
            if (B->value.rows() > 0 && A->value.rows() > 0)
                view(B->grad_buffer()).noalias() += view(A->value).transpose() * view(n.grad);
        }
    });
}

Var transpose(const Var& a) {
    return make_op("transpose", {a}, a.value().transposed(), [](Node& n) {
        accumulate(n.inputs[0]->grad_buffer(), n.grad.transposed());
    });
}

Var add(const Var& a, const Var& b) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    Tensor out = x;
    if (x.same_shape(y)) {
        accumulate(out, y);
        return make_op("add", {a, b}, std::move(out), [](Node& n) {
            for (auto& in : n.inputs)
                if (wants_grad(in)) accumulate(in->grad_buffer(), n.grad);
        });
    }
    if (y.rows() == 1 && y.cols() == 1) {
        for (double& v : out.data()) v += y[0];
        return make_op("add_scalar", {a, b}, std::move(out), [](Node& n) {
            if (wants_grad(n.inputs[0])) accumulate(n.inputs[0]->grad_buffer(), n.grad);
            if (wants_grad(n.inputs[1])) {
                double total = 0.0;
                for (double g : n.grad.data()) total += g;
                n.inputs[1]->grad_buffer()[0] += total;
            }
        });
    }
    if (y.rows() == 1 && y.cols() == x.cols()) {
        for (std::size_t r = 0; r < out.rows(); ++r)
            for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += y(0, c);
        return make_op("add_row", {a, b}, std::move(out), [](Node& n) {
            if (wants_grad(n.inputs[0])) accumulate(n.inputs[0]->grad_buffer(), n.grad);
            if (wants_grad(n.inputs[1])) {
                Tensor& gb = n.inputs[1]->grad_buffer();
                for (std::size_t r = 0; r < n.grad.rows(); ++r)
                    for (std::size_t c = 0; c < n.grad.cols(); ++c) gb(0, c) += n.grad(r, c);
            }
        });
    }
    throw ShapeError("add", "cannot broadcast " + shape_string(y) + " onto " + shape_string(x));
}

Var sub(const Var& a, const Var& b) {
    require_same_shape("sub", a.value(), b.value());
    Tensor out = a.value();
    auto o = out.data();
    auto y = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= y[i];
    return make_op("sub", {a, b}, std::move(out), [](Node& n) {
        if (wants_grad(n.inputs[0])) accumulate(n.inputs[0]->grad_buffer(), n.grad);
        if (wants_grad(n.inputs[1])) {
            auto g = n.inputs[1]->grad_buffer().data();
            auto src = n.grad.data();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= src[i];
        }
    });
}

Var mul(const Var& a, const Var& b) {
    require_same_shape("mul", a.value(), b.value());
    Tensor out = a.value();
    auto o = out.data();
    auto y = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= y[i];
    return make_op("mul", {a, b}, std::move(out), [](Node& n) {
        const auto& A = n.inputs[0];
        const auto& B = n.inputs[1];
        auto g = n.grad.data();
        if (wants_grad(A)) {
            auto ga = A->grad_buffer().data();
            auto bv = B->value.data();
            for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (wants_grad(B)) {
            auto gb = B->grad_buffer().data();
            auto av = A->value.data();
            for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
    });
}

Var maximum(const Var& a, const Var& b) {
    require_same_shape("maximum", a.value(), b.value());
    Tensor out = a.value();
    auto o = out.data();
    auto y = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::max(o[i], y[i]);
    return make_op("maximum", {a, b}, std::move(out), [](Node& n) {
        const auto& A = n.inputs[0];
        const auto& B = n.inputs[1];
        auto g = n.grad.data();
        auto av = A->value.data();
        auto bv = B->value.data();
        // Ties route the gradient to the first operand.
        if (wants_grad(A)) {
            auto ga = A->grad_buffer().data();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (av[i] >= bv[i]) ga[i] += g[i];
        }
        if (wants_grad(B)) {
            auto gb = B->grad_buffer().data();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (av[i] < bv[i]) gb[i] += g[i];
        }
    });
}

Var scale(const Var& a, double factor) {
    Tensor out = a.value();
    for (double& v : out.data()) v *= factor;
    return make_op("scale", {a}, std::move(out), [factor](Node& n) {
        auto ga = n.inputs[0]->grad_buffer().data();
        auto g = n.grad.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += factor * g[i];
    });
}

Var relu(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return make_op("relu", {a}, std::move(out), [](Node& n) {
        auto ga = n.inputs[0]->grad_buffer().data();
        auto x = n.inputs[0]->value.data();
        auto g = n.grad.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > 0.0) ga[i] += g[i];
    });
}

Var sigmoid(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = stable_sigmoid(v);
    return make_op("sigmoid", {a}, std::move(out), [](Node& n) {
        auto ga = n.inputs[0]->grad_buffer().data();
        auto y = n.value.data();
        auto g = n.grad.data();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
    });
}

Var log(const Var& a) {
    Tensor out = a.value();
    for (double& v : out.data()) v = std::log(std::max(v, kLogFloor));
    return make_op("log", {a}, std::move(out), [](Node& n) {
        auto ga = n.inputs[0]->grad_buffer().data();
        auto x = n.inputs[0]->value.data();
        auto g = n.grad.data();
        for (std::size_t i = 0; i < g.size(); ++i)
            if (x[i] > kLogFloor) ga[i] += g[i] / x[i];
    });
}

Var sum(const Var& a) {
    double total = 0.0;
    for (double v : a.value().data()) total += v;
    return make_op("sum", {a}, Tensor::scalar(total), [](Node& n) {
        const double g = n.grad[0];
        for (double& v : n.inputs[0]->grad_buffer().data()) v += g;
    });
}

Var mean(const Var& a) {
    const std::size_t count = a.value().size();
    if (count == 0) throw ShapeError("mean", "empty input");
    return scale(sum(a), 1.0 / static_cast<double>(count));
}

Var row_sum(const Var& a) {
    const Tensor& x = a.value();
    Tensor out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double s = 0.0;
        for (double v : x.row_span(r)) s += v;
        out(r, 0) = s;
    }
    return make_op("row_sum", {a}, std::move(out), [](Node& n) {
        Tensor& ga = n.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < ga.rows(); ++r)
            for (double& v : ga.row_span(r)) v += n.grad(r, 0);
    });
}

Var rowwise_dot(const Var& a, const Var& b) {
    require_same_shape("rowwise_dot", a.value(), b.value());
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    Tensor out(x.rows(), 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto xr = x.row_span(r);
        auto yr = y.row_span(r);
        double s = 0.0;
        for (std::size_t c = 0; c < xr.size(); ++c) s += xr[c] * yr[c];
        out(r, 0) = s;
    }
    return make_op("rowwise_dot", {a, b}, std::move(out), [](Node& n) {
        const auto& A = n.inputs[0];
        const auto& B = n.inputs[1];
        const std::size_t rows = n.grad.rows();
        if (wants_grad(A)) {
            Tensor& ga = A->grad_buffer();
            for (std::size_t r = 0; r < rows; ++r) {
                const double g = n.grad(r, 0);
                auto dst = ga.row_span(r);
                auto src = B->value.row_span(r);
                for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += g * src[c];
            }
        }
        if (wants_grad(B)) {
            Tensor& gb = B->grad_buffer();
            for (std::size_t r = 0; r < rows; ++r) {
                const double g = n.grad(r, 0);
                auto dst = gb.row_span(r);
                auto src = A->value.row_span(r);
                for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += g * src[c];
            }
        }
    });
}

Var softmax(const Var& a) {
    Tensor out = tiger::softmax(a.value());
    return make_op("softmax", {a}, std::move(out), [](Node& n) {
        auto y = n.value.data();
        auto g = n.grad.data();
        double dot = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) dot += g[i] * y[i];
        auto ga = n.inputs[0]->grad_buffer().data();
        for (std::size_t i = 0; i < y.size(); ++i) ga[i] += y[i] * (g[i] - dot);
    });
}

Var softmax_rows(const Var& a) {
    const Tensor& x = a.value();
    if (x.cols() == 0) throw ShapeError("softmax_rows", "rows are empty");
    Tensor out(x.rows(), x.cols());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        auto src = x.row_span(r);
        auto dst = out.row_span(r);
        const double peak = *std::max_element(src.begin(), src.end());
        double total = 0.0;
        for (std::size_t c = 0; c < src.size(); ++c) {
            dst[c] = std::exp(src[c] - peak);
            total += dst[c];
        }
        for (double& v : dst) v /= total;
    }
    return make_op("softmax_rows", {a}, std::move(out), [](Node& n) {
        Tensor& ga = n.inputs[0]->grad_buffer();
        for (std::size_t r = 0; r < n.value.rows(); ++r) {
            auto y = n.value.row_span(r);
            auto g = n.grad.row_span(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < y.size(); ++c) dot += g[c] * y[c];
            auto dst = ga.row_span(r);
            for (std::size_t c = 0; c < y.size(); ++c) dst[c] += y[c] * (g[c] - dot);
        }
    });
}

Var gather_rows(const Var& a, std::span<const std::size_t> index) {
    const Tensor& x = a.value();
    Tensor out(index.size(), x.cols());
    for (std::size_t k = 0; k < index.size(); ++k) {
        if (index[k] >= x.rows()) {
            throw ShapeError("gather_rows", "row " + std::to_string(index[k]) + " out of range for " +
                                                shape_string(x));
        }
        auto src = x.row_span(index[k]);
        std::copy(src.begin(), src.end(), out.row_span(k).begin());
    }
    std::vector<std::size_t> idx(index.begin(), index.end());
    return make_op("gather_rows", {a}, std::move(out), [idx = std::move(idx)](Node& n) {
        Tensor& ga = n.inputs[0]->grad_buffer();
        for (std::size_t k = 0; k < idx.size(); ++k) {
            auto dst = ga.row_span(idx[k]);
            auto src = n.grad.row_span(k);
            for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
        }
    });
}

Var concat_rows(const Var& a, const Var& b) {
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (x.cols() != y.cols() && x.rows() > 0 && y.rows() > 0) {
        throw ShapeError("concat_rows", "column counts differ: " + shape_string(x) + " vs " +
                                            shape_string(y));
    }
    const std::size_t cols = x.rows() > 0 ? x.cols() : y.cols();
    std::vector<double> data;
    data.reserve((x.rows() + y.rows()) * cols);
    data.insert(data.end(), x.data().begin(), x.data().end());
    data.insert(data.end(), y.data().begin(), y.data().end());
    Tensor out(x.rows() + y.rows(), cols, std::move(data));
    return make_op("concat_rows", {a, b}, std::move(out), [](Node& n) {
        const auto& A = n.inputs[0];
        const auto& B = n.inputs[1];
        const std::size_t split = A->value.size();
        auto g = n.grad.data();
        if (wants_grad(A)) {
            auto ga = A->grad_buffer().data();
            for (std::size_t i = 0; i < split; ++i) ga[i] += g[i];
        }
        if (wants_grad(B)) {
            auto gb = B->grad_buffer().data();
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[split + i];
        }
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw ShapeError("concat_cols", "no operands");
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.rows() != rows) throw ShapeError("concat_cols", "row counts differ");
        cols += p.cols();
    }
    Tensor out(rows, cols);
    std::size_t offset = 0;
    for (const auto& p : parts) {
        const Tensor& v = p.value();
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < v.cols(); ++c) out(r, offset + c) = v(r, c);
        offset += v.cols();
    }
    std::vector<Var> inputs(parts.begin(), parts.end());
    return make_op("concat_cols", std::move(inputs), std::move(out), [](Node& n) {
        std::size_t off = 0;
        for (auto& in : n.inputs) {
            const std::size_t w = in->value.cols();
            if (wants_grad(in)) {
                Tensor& g = in->grad_buffer();
                for (std::size_t r = 0; r < g.rows(); ++r)
                    for (std::size_t c = 0; c < w; ++c) g(r, c) += n.grad(r, off + c);
            }
            off += w;
        }
    });
}

Var segment_softmax(const Var& logits, std::span<const std::size_t> owner,
                    std::size_t num_segments) {
    const Tensor& x = logits.value();
    if (x.cols() != 1 || x.rows() != owner.size()) {
        throw ShapeError("segment_softmax", "expected " + std::to_string(owner.size()) +
                                                "x1 logits, got " + shape_string(x));
    }
    std::vector<double> peak(num_segments, -std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < owner.size(); ++e) {
        if (owner[e] >= num_segments) throw ShapeError("segment_softmax", "owner out of range");
        peak[owner[e]] = std::max(peak[owner[e]], x[e]);
    }
    Tensor out(x.rows(), 1);
    std::vector<double> total(num_segments, 0.0);
    for (std::size_t e = 0; e < owner.size(); ++e) {
        out[e] = std::exp(x[e] - peak[owner[e]]);
        total[owner[e]] += out[e];
    }
    for (std::size_t e = 0; e < owner.size(); ++e) out[e] /= total[owner[e]];
    std::vector<std::size_t> own(owner.begin(), owner.end());
    return make_op("segment_softmax", {logits}, std::move(out),
                   [own = std::move(own), num_segments](Node& n) {
                       std::vector<double> dot(num_segments, 0.0);
                       for (std::size_t e = 0; e < own.size(); ++e)
                           dot[own[e]] += n.grad[e] * n.value[e];
                       Tensor& g = n.inputs[0]->grad_buffer();
                       for (std::size_t e = 0; e < own.size(); ++e)
                           g[e] += n.value[e] * (n.grad[e] - dot[own[e]]);
                   });
}

Var segment_weighted_sum(const Var& weight, const Var& values,
                         std::span<const std::size_t> owner, std::size_t num_segments) {
    const Tensor& w = weight.value();
    const Tensor& v = values.value();
    if (w.cols() != 1 || w.rows() != owner.size() || v.rows() != owner.size()) {
        throw ShapeError("segment_weighted_sum", "weights " + shape_string(w) + " and values " +
                                                     shape_string(v) + " disagree with " +
                                                     std::to_string(owner.size()) + " entries");
    }
    Tensor out(num_segments, v.cols());
    for (std::size_t e = 0; e < owner.size(); ++e) {
        if (owner[e] >= num_segments) throw ShapeError("segment_weighted_sum", "owner out of range");
        auto dst = out.row_span(owner[e]);
        auto src = v.row_span(e);
        for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += w[e] * src[c];
    }
    std::vector<std::size_t> own(owner.begin(), owner.end());
    return make_op("segment_weighted_sum", {weight, values}, std::move(out),
                   [own = std::move(own)](Node& n) {
                       const auto& W = n.inputs[0];
                       const auto& V = n.inputs[1];
                       if (wants_grad(W)) {
                           Tensor& gw = W->grad_buffer();
                           for (std::size_t e = 0; e < own.size(); ++e) {
                               auto g = n.grad.row_span(own[e]);
                               auto val = V->value.row_span(e);
                               double s = 0.0;
                               for (std::size_t c = 0; c < g.size(); ++c) s += g[c] * val[c];
                               gw[e] += s;
                           }
                       }
                       if (wants_grad(V)) {
                           Tensor& gv = V->grad_buffer();
                           for (std::size_t e = 0; e < own.size(); ++e) {
                               auto g = n.grad.row_span(own[e]);
                               auto dst = gv.row_span(e);
                               const double we = W->value[e];
                               for (std::size_t c = 0; c < g.size(); ++c) dst[c] += we * g[c];
                           }
                       }
                   });
}

Var bce_loss(const Var& pred, const Tensor& label) {
    require_same_shape("bce_loss", pred.value(), label);
    const std::size_t count = label.size();
    if (count == 0) throw ShapeError("bce_loss", "empty batch");
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double p = std::clamp(pred.value()[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
        const double y = label[i];
        total -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    }
    return make_op("bce_loss", {pred}, Tensor::scalar(total / static_cast<double>(count)),
                   [label](Node& n) {
                       const double g = n.grad[0] / static_cast<double>(label.size());
                       auto gp = n.inputs[0]->grad_buffer().data();
                       auto p = n.inputs[0]->value.data();
                       for (std::size_t i = 0; i < gp.size(); ++i) {
                           if (p[i] <= kProbabilityClamp || p[i] >= 1.0 - kProbabilityClamp) continue;
                           const double y = label[i];
                           gp[i] += g * (-y / p[i] + (1.0 - y) / (1.0 - p[i]));
                       }
                   });
}

Var softmax_cross_entropy(const Var& logits, std::span<const std::size_t> rows,
                          std::span<const std::size_t> targets) {
    const Tensor& x = logits.value();
    if (rows.size() != targets.size()) throw ShapeError("softmax_cross_entropy", "rows/targets differ");
    if (rows.empty()) throw ShapeError("softmax_cross_entropy", "empty batch");
    Tensor probs(rows.size(), x.cols());
    double total = 0.0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] >= x.rows() || targets[k] >= x.cols())
            throw ShapeError("softmax_cross_entropy", "row or target out of range");
        auto src = x.row_span(rows[k]);
        auto dst = probs.row_span(k);
        const double peak = *std::max_element(src.begin(), src.end());
        double z = 0.0;
        for (std::size_t c = 0; c < src.size(); ++c) {
            dst[c] = std::exp(src[c] - peak);
            z += dst[c];
        }
        for (double& v : dst) v /= z;
        total -= std::log(std::max(dst[targets[k]], kLogFloor));
    }
    std::vector<std::size_t> r(rows.begin(), rows.end());
    std::vector<std::size_t> t(targets.begin(), targets.end());
    return make_op("softmax_cross_entropy", {logits},
                   Tensor::scalar(total / static_cast<double>(rows.size())),
                   [probs = std::move(probs), r = std::move(r), t = std::move(t)](Node& n) {
                       const double g = n.grad[0] / static_cast<double>(r.size());
                       Tensor& gx = n.inputs[0]->grad_buffer();
                       for (std::size_t k = 0; k < r.size(); ++k) {
                           auto dst = gx.row_span(r[k]);
                           auto p = probs.row_span(k);
                           for (std::size_t c = 0; c < dst.size(); ++c)
                               dst[c] += g * (p[c] - (c == t[k] ? 1.0 : 0.0));
                       }
                   });
}

}  // namespace tiger::ad
