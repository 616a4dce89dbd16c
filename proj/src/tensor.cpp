#include "mxad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mxad/error.hpp"

namespace mxad {

namespace {

using detail::TensorNode;
using NodePtr = std::shared_ptr<TensorNode>;

std::string shape_str(const TensorNode& n) {
    std::ostringstream os;
    os << n.rows << "x" << n.cols;
    return os.str();
}

NodePtr make_node(std::size_t rows, std::size_t cols) {
    auto n = std::make_shared<TensorNode>();
    n->rows = rows;
    n->cols = cols;
    n->value.assign(rows * cols, 0.0);
    return n;
}

}  // namespace

Tensor::Tensor(std::size_t rows, std::size_t cols, bool requires_grad)
    : node_(make_node(rows, cols)) {
    node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols); }

Tensor Tensor::constant(std::size_t rows, std::size_t cols, double value) {
    Tensor t(rows, cols);
    std::fill(t.node_->value.begin(), t.node_->value.end(), value);
    return t;
}

Tensor Tensor::from(std::vector<double> data, std::size_t rows, std::size_t cols,
                    bool requires_grad) {
    if (data.size() != rows * cols) {
        throw DimensionError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
    Tensor t(rows, cols, requires_grad);
    t.node_->value = std::move(data);
    return t;
}

Tensor Tensor::uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng,
                       bool requires_grad) {
    Tensor t(rows, cols, requires_grad);
    for (double& v : t.node_->value) v = rng.uniform(-scale, scale);
    return t;
}

double Tensor::item() const {
    if (size() != 1) {
        throw DimensionError("item() on non-scalar tensor of shape " + shape_str(*node_));
    }
    return node_->value[0];
}

Tensor Tensor::detach() const {
    Tensor t(rows(), cols());
    t.node_->value = node_->value;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : node_->value)
        if (!std::isfinite(v)) return false;
    return true;
}

namespace {

// Attach tape bookkeeping to a freshly computed result. backfn reads
// out->grad and accumulates into the parents' grads.
void record(const NodePtr& out, std::vector<NodePtr> parents, std::function<void()> backfn) {
    bool rq = false;
    for (const auto& p : parents) rq = rq || p->requires_grad;
    if (!rq) return;
    out->requires_grad = true;
    out->parents = std::move(parents);
    out->backfn = std::move(backfn);
}

}  // namespace

void backward(const Tensor& loss) {
    if (loss.size() != 1) {
        throw Error("backward() requires a scalar loss, got " + std::to_string(loss.rows()) +
                    "x" + std::to_string(loss.cols()));
    }
    auto root = loss.node();
    if (!root->requires_grad) return;

    // Iterative post-order DFS; reversed finish order is a valid topological
    // order of the tape.
    std::vector<TensorNode*> order;
    std::unordered_set<TensorNode*> visited;
    struct Frame {
        TensorNode* node;
        std::size_t next_child;
    };
    std::vector<Frame> stack;
    stack.push_back({root.get(), 0});
    visited.insert(root.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_child < f.node->parents.size()) {
            TensorNode* child = f.node->parents[f.next_child++].get();
            if (child->requires_grad && visited.insert(child).second) {
                stack.push_back({child, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }

    for (TensorNode* n : order) n->ensure_grad();
    root->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if ((*it)->backfn) (*it)->backfn();
    }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw DimensionError("matmul shape mismatch: " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out(m, n);
    {
        const double* A = a.data().data();
        const double* B = b.data().data();
        double* C = out.data().data();
        for (std::size_t i = 0; i < m; ++i) {
            const double* Ai = A + i * k;
            double* Ci = C + i * n;
            for (std::size_t p = 0; p < k; ++p) {
                const double aip = Ai[p];
                if (aip == 0.0) continue;
                const double* Bp = B + p * n;
                for (std::size_t j = 0; j < n; ++j) Ci[j] += aip * Bp[j];
            }
        }
    }
    auto an = a.node(), bn = b.node(), on = out.node();
    record(on, {an, bn}, [an, bn, on, m, k, n]() {
        const double* G = on->grad.data();
        if (an->requires_grad) {
            an->ensure_grad();
            double* dA = an->grad.data();
            const double* B = bn->value.data();
            // dA = G * B^T
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t p = 0; p < k; ++p) {
                    double s = 0.0;
                    const double* Gi = G + i * n;
                    const double* Bp = B + p * n;
                    for (std::size_t j = 0; j < n; ++j) s += Gi[j] * Bp[j];
                    dA[i * k + p] += s;
                }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            double* dB = bn->grad.data();
            const double* A = an->value.data();
            // dB = A^T * G
            for (std::size_t i = 0; i < m; ++i) {
                const double* Ai = A + i * k;
                const double* Gi = G + i * n;
                for (std::size_t p = 0; p < k; ++p) {
                    const double aip = Ai[p];
                    if (aip == 0.0) continue;
                    double* dBp = dB + p * n;
                    for (std::size_t j = 0; j < n; ++j) dBp[j] += aip * Gi[j];
                }
            }
        }
    });
    return out;
}

Tensor transpose(const Tensor& x) {
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(c, r);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(j, i) = x.at(i, j);
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, r, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) xn->grad[i * c + j] += on->grad[j * r + i];
    });
    return out;
}

namespace {

enum class BinKind { Add, Sub, Mul, Div };

Tensor binary_op(const Tensor& a, const Tensor& b, BinKind kind) {
    const bool same = a.rows() == b.rows() && a.cols() == b.cols();
    const bool bcast = b.rows() == 1 && b.cols() == a.cols() && a.rows() >= 1;
    if (!same && !bcast) {
        throw DimensionError("elementwise shape mismatch: " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                             std::to_string(b.cols()));
    }
    const std::size_t r = a.rows(), c = a.cols();
    Tensor out(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const double av = a.at(i, j);
            const double bv = same ? b.at(i, j) : b.at(0, j);
            double v = 0.0;
            switch (kind) {
                case BinKind::Add: v = av + bv; break;
                case BinKind::Sub: v = av - bv; break;
                case BinKind::Mul: v = av * bv; break;
                case BinKind::Div: v = av / bv; break;
            }
            out.at(i, j) = v;
        }
    auto an = a.node(), bn = b.node(), on = out.node();
    record(on, {an, bn}, [an, bn, on, r, c, same, kind]() {
        const double* G = on->grad.data();
        if (an->requires_grad) {
            an->ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) {
                    double g = G[i * c + j];
                    const double bv = same ? bn->value[i * c + j] : bn->value[j];
                    if (kind == BinKind::Mul) g *= bv;
                    if (kind == BinKind::Div) g /= bv;
                    an->grad[i * c + j] += g;
                }
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) {
                    double g = G[i * c + j];
                    const double av = an->value[i * c + j];
                    const double bv = same ? bn->value[i * c + j] : bn->value[j];
                    if (kind == BinKind::Sub) g = -g;
                    if (kind == BinKind::Mul) g *= av;
                    if (kind == BinKind::Div) g *= -av / (bv * bv);
                    bn->grad[same ? i * c + j : j] += g;
                }
        }
    });
    return out;
}

enum class UnaryKind { Sigmoid, Tanh, Relu };

Tensor unary_op(const Tensor& x, UnaryKind kind) {
    const std::size_t n = x.size();
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x.data()[i];
        switch (kind) {
            case UnaryKind::Sigmoid: out.data()[i] = 1.0 / (1.0 + std::exp(-v)); break;
            case UnaryKind::Tanh: out.data()[i] = std::tanh(v); break;
            case UnaryKind::Relu: out.data()[i] = v > 0.0 ? v : 0.0; break;
        }
    }
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, n, kind]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < n; ++i) {
            const double y = on->value[i];
            double d = 0.0;
            switch (kind) {
                case UnaryKind::Sigmoid: d = y * (1.0 - y); break;
                case UnaryKind::Tanh: d = 1.0 - y * y; break;
                // Subgradient at 0 takes the 0 branch.
                case UnaryKind::Relu: d = xn->value[i] > 0.0 ? 1.0 : 0.0; break;
            }
            xn->grad[i] += d * on->grad[i];
        }
    });
    return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Add); }
Tensor sub(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Sub); }
Tensor hadamard(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Mul); }
Tensor div(const Tensor& a, const Tensor& b) { return binary_op(a, b, BinKind::Div); }

Tensor sqrt_eps(const Tensor& x, double eps) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = std::sqrt(x.data()[i] + eps);
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i)
            xn->grad[i] += on->grad[i] * 0.5 / on->value[i];
    });
    return out;
}

Tensor scale(const Tensor& x, double c) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = c * x.data()[i];
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += c * on->grad[i];
    });
    return out;
}

Tensor add_scalar(const Tensor& x, double c) {
    Tensor out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.size(); ++i) out.data()[i] = x.data()[i] + c;
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
    });
    return out;
}

Tensor sigmoid(const Tensor& x) { return unary_op(x, UnaryKind::Sigmoid); }
Tensor tanh(const Tensor& x) { return unary_op(x, UnaryKind::Tanh); }
Tensor relu(const Tensor& x) { return unary_op(x, UnaryKind::Relu); }

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat of zero parts");
    const std::size_t r = parts.front().rows();
    std::size_t total = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != r) {
            throw DimensionError("concat leading-dimension mismatch: " + std::to_string(r) +
                                 " vs " + std::to_string(p.rows()));
        }
        total += p.cols();
    }
    Tensor out(r, total);
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) out.at(i, off + j) = p.at(i, j);
        off += p.cols();
    }
    std::vector<NodePtr> pn;
    for (const Tensor& p : parts) pn.push_back(p.node());
    auto on = out.node();
    record(on, pn, [pn, on, r, total]() {
        std::size_t off = 0;
        for (const auto& p : pn) {
            const std::size_t c = p->cols;
            if (p->requires_grad) {
                p->ensure_grad();
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                        p->grad[i * c + j] += on->grad[i * total + off + j];
            }
            off += c;
        }
    });
    return out;
}

Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count) {
    if (start + count > x.cols()) {
        throw DimensionError("slice_cols [" + std::to_string(start) + ", " +
                             std::to_string(start + count) + ") out of " +
                             std::to_string(x.cols()) + " columns");
    }
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(r, count);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < count; ++j) out.at(i, j) = x.at(i, start + j);
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, r, c, start, count]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < count; ++j)
                xn->grad[i * c + start + j] += on->grad[i * count + j];
    });
    return out;
}

namespace {

Tensor reduce_op(const Tensor& x, int axis, bool mean) {
    // axis -1: all; 0: over rows -> 1 x c; 1: over cols -> r x 1.
    const std::size_t r = x.rows(), c = x.cols();
    std::size_t orows = 1, ocols = 1;
    if (axis == 0) ocols = c;
    else if (axis == 1) orows = r;
    else if (axis != -1) throw DimensionError("invalid reduction axis " + std::to_string(axis));
    Tensor out(orows, ocols);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            std::size_t oi = axis == 1 ? i : 0;
            std::size_t oj = axis == 0 ? j : 0;
            out.at(oi, oj) += x.at(i, j);
        }
    const double denom = mean ? (axis == 0 ? double(r) : axis == 1 ? double(c) : double(r * c))
                              : 1.0;
    if (mean)
        for (double& v : out.data()) v /= denom;
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, r, c, axis, denom]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) {
                std::size_t oi = axis == 1 ? i : 0;
                std::size_t oj = axis == 0 ? j : 0;
                xn->grad[i * c + j] += on->grad[oi * on->cols + oj] / denom;
            }
    });
    return out;
}

}  // namespace

Tensor sum_all(const Tensor& x) { return reduce_op(x, -1, false); }
Tensor mean_all(const Tensor& x) { return reduce_op(x, -1, true); }
Tensor col_sums(const Tensor& x) { return reduce_op(x, 0, false); }
Tensor row_sums(const Tensor& x) { return reduce_op(x, 1, false); }
Tensor col_means(const Tensor& x) { return reduce_op(x, 0, true); }
Tensor row_means(const Tensor& x) { return reduce_op(x, 1, true); }

Tensor squared_l2(const Tensor& x) {
    Tensor out(1, 1);
    double s = 0.0;
    for (double v : x.data()) s += v * v;
    out.data()[0] = s;
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        const double g = on->grad[0];
        for (std::size_t i = 0; i < xn->value.size(); ++i)
            xn->grad[i] += 2.0 * g * xn->value[i];
    });
    return out;
}

Tensor row_sumsq(const Tensor& x) {
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(r, 1);
    for (std::size_t i = 0; i < r; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c; ++j) s += x.at(i, j) * x.at(i, j);
        out.at(i, 0) = s;
    }
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, r, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
                xn->grad[i * c + j] += 2.0 * on->grad[i] * xn->value[i * c + j];
    });
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        double mx = x.at(i, 0);
        for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x.at(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) {
            out.at(i, j) = std::exp(x.at(i, j) - mx);
            z += out.at(i, j);
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) /= z;
    }
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, r, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < c; ++j)
                dot += on->grad[i * c + j] * on->value[i * c + j];
            for (std::size_t j = 0; j < c; ++j)
                xn->grad[i * c + j] +=
                    on->value[i * c + j] * (on->grad[i * c + j] - dot);
        }
    });
    return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx) {
    const std::size_t c = x.cols();
    Tensor out(idx.size(), c);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= x.rows()) {
            throw DimensionError("gather_rows index " + std::to_string(idx[i]) +
                                 " out of " + std::to_string(x.rows()) + " rows");
        }
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = x.at(idx[i], j);
    }
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, idx, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < c; ++j)
                xn->grad[idx[i] * c + j] += on->grad[i * c + j];
    });
    return out;
}

Tensor scatter_add_rows(const Tensor& x, const std::vector<std::size_t>& idx,
                        std::size_t out_rows) {
    if (idx.size() != x.rows()) {
        throw DimensionError("scatter_add_rows: " + std::to_string(idx.size()) +
                             " indices for " + std::to_string(x.rows()) + " rows");
    }
    const std::size_t c = x.cols();
    Tensor out(out_rows, c);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= out_rows) {
            throw DimensionError("scatter_add_rows index " + std::to_string(idx[i]) +
                                 " out of " + std::to_string(out_rows) + " rows");
        }
        for (std::size_t j = 0; j < c; ++j) out.at(idx[i], j) += x.at(i, j);
    }
    auto xn = x.node(), on = out.node();
    record(on, {xn}, [xn, on, idx, c]() {
        if (!xn->requires_grad) return;
        xn->ensure_grad();
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < c; ++j)
                xn->grad[i * c + j] += on->grad[idx[i] * c + j];
    });
    return out;
}

Tensor scale_rows(const Tensor& x, const Tensor& w) {
    if (w.rows() != x.rows() || w.cols() != 1) {
        throw DimensionError("scale_rows weights must be " + std::to_string(x.rows()) +
                             "x1, got " + std::to_string(w.rows()) + "x" +
                             std::to_string(w.cols()));
    }
    const std::size_t r = x.rows(), c = x.cols();
    Tensor out(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.at(i, j) = w.at(i, 0) * x.at(i, j);
    auto xn = x.node(), wn = w.node(), on = out.node();
    record(on, {xn, wn}, [xn, wn, on, r, c]() {
        if (xn->requires_grad) {
            xn->ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j)
                    xn->grad[i * c + j] += wn->value[i] * on->grad[i * c + j];
        }
        if (wn->requires_grad) {
            wn->ensure_grad();
            for (std::size_t i = 0; i < r; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < c; ++j)
                    s += on->grad[i * c + j] * xn->value[i * c + j];
                wn->grad[i] += s;
            }
        }
    });
    return out;
}

}  // namespace mxad
