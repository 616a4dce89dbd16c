#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "mxad/rng.hpp"

namespace mxad {

namespace detail {

// One value on the dynamic tape. Parents keep upstream nodes alive until
// backward() has run; leaf nodes (parameters) have no parents.
struct TensorNode {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorNode>> parents;
    std::function<void()> backfn;

    std::size_t size() const { return rows * cols; }
    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
};

}  // namespace detail

// Dense row-major matrix of 64-bit floats. Rank-2 throughout; vectors are
// n x 1 or 1 x n, scalars 1 x 1. Values are immutable once an op has consumed
// the tensor; gradients accumulate on requires_grad leaves after backward().
class Tensor {
   public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, bool requires_grad = false);

    static Tensor zeros(std::size_t rows, std::size_t cols);
    static Tensor constant(std::size_t rows, std::size_t cols, double value);
    static Tensor from(std::vector<double> data, std::size_t rows, std::size_t cols,
                       bool requires_grad = false);
    // Entries uniform in [-scale, scale].
    static Tensor uniform(std::size_t rows, std::size_t cols, double scale, Rng& rng,
                          bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    std::size_t rows() const { return node_->rows; }
    std::size_t cols() const { return node_->cols; }
    std::size_t size() const { return node_->size(); }

    double at(std::size_t i, std::size_t j) const { return node_->value[i * cols() + j]; }
    double& at(std::size_t i, std::size_t j) { return node_->value[i * cols() + j]; }
    double item() const;

    const std::vector<double>& data() const { return node_->value; }
    std::vector<double>& data() { return node_->value; }

    bool requires_grad() const { return node_->requires_grad; }
    void set_requires_grad(bool v) { node_->requires_grad = v; }
    const std::vector<double>& grad() const { return node_->grad; }
    void zero_grad() { node_->grad.assign(node_->value.size(), 0.0); }

    // Value copy with no tape history.
    Tensor detach() const;

    bool all_finite() const;

    std::shared_ptr<detail::TensorNode> node() const { return node_; }

   private:
    std::shared_ptr<detail::TensorNode> node_;
};

// Reverse accumulation from a 1x1 loss over the tape reachable from it.
void backward(const Tensor& loss);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& x);

// add/sub/hadamard accept equal shapes, or b as a 1 x c row vector broadcast
// over the rows of a.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

// sqrt(x + eps), elementwise; x + eps must be positive.
Tensor sqrt_eps(const Tensor& x, double eps);

Tensor scale(const Tensor& x, double c);
Tensor add_scalar(const Tensor& x, double c);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor relu(const Tensor& x);

// Column-wise concatenation; all parts share the leading dimension.
Tensor concat_cols(const std::vector<Tensor>& parts);
// Zero-based column slice [start, start + count).
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t count);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
Tensor col_sums(const Tensor& x);   // 1 x c, reduces over rows (axis 0)
Tensor row_sums(const Tensor& x);   // r x 1, reduces over cols (axis 1)
Tensor col_means(const Tensor& x);
Tensor row_means(const Tensor& x);

Tensor squared_l2(const Tensor& x);  // 1 x 1, sum of squares
Tensor row_sumsq(const Tensor& x);   // r x 1, per-row sum of squares

// Softmax over each row.
Tensor softmax_rows(const Tensor& x);

// Row gather/scatter with autograd. gather_rows picks value rows by index
// (indices may repeat); scatter_add_rows sums rows of x into an
// out_rows x cols result at the given destinations.
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& idx);
Tensor scatter_add_rows(const Tensor& x, const std::vector<std::size_t>& idx,
                        std::size_t out_rows);

// Multiply row i of x by w(i, 0); w is r x 1.
Tensor scale_rows(const Tensor& x, const Tensor& w);

}  // namespace mxad
