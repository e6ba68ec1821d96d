#ifndef CAMAC_NUMERICS_HPP
#define CAMAC_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "camac/errors.hpp"
#include "camac/rng.hpp"

namespace camac {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Deliberately minimal: the model is a
// fixed small composition of layers, so explicit loops beat a tensor
// framework here and keep every backward pass directly checkable.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    static Matrix identity(int n) {
        Matrix m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix from_rows(const std::vector<Vec>& rows_in) {
        if (rows_in.empty()) return Matrix();
        Matrix m(static_cast<int>(rows_in.size()), static_cast<int>(rows_in[0].size()));
        for (int r = 0; r < m.rows; ++r) {
            if (static_cast<int>(rows_in[r].size()) != m.cols)
                throw ShapeError("from_rows: ragged input");
            for (int c = 0; c < m.cols; ++c) m(r, c) = rows_in[r][c];
        }
        return m;
    }

    Vec row(int r) const { return Vec(data.begin() + static_cast<std::size_t>(r) * cols, data.begin() + static_cast<std::size_t>(r + 1) * cols); }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * " +
                         std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        double* orow = out.data.data() + static_cast<std::size_t>(i) * b.cols;
        for (int k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
            for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols, a.rows);
    for (int i = 0; i < a.rows; ++i)
        for (int j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    return out;
}

// y = A x
inline Vec matvec(const Matrix& a, const Vec& x) {
    if (a.cols != static_cast<int>(x.size()))
        throw ShapeError("matvec: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " * vec" +
                         std::to_string(x.size()));
    Vec y(a.rows, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        double acc = 0.0;
        for (int j = 0; j < a.cols; ++j) acc += arow[j] * x[j];
        y[i] = acc;
    }
    return y;
}

// y = A^T x
inline Vec matvec_transposed(const Matrix& a, const Vec& x) {
    if (a.rows != static_cast<int>(x.size()))
        throw ShapeError("matvec_transposed: rows " + std::to_string(a.rows) + " vs vec" + std::to_string(x.size()));
    Vec y(a.cols, 0.0);
    for (int i = 0; i < a.rows; ++i) {
        const double xi = x[i];
        const double* arow = a.data.data() + static_cast<std::size_t>(i) * a.cols;
        for (int j = 0; j < a.cols; ++j) y[j] += arow[j] * xi;
    }
    return y;
}

// grad += outer(u, v)
inline void add_outer(Matrix& grad, const Vec& u, const Vec& v, double scale = 1.0) {
    if (grad.rows != static_cast<int>(u.size()) || grad.cols != static_cast<int>(v.size()))
        throw ShapeError("add_outer: gradient shape mismatch");
    for (int i = 0; i < grad.rows; ++i) {
        double* grow = grad.data.data() + static_cast<std::size_t>(i) * grad.cols;
        const double ui = scale * u[i];
        for (int j = 0; j < grad.cols; ++j) grow[j] += ui * v[j];
    }
}

inline void axpy(Vec& y, double a, const Vec& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

// Numerically stable softmax (max subtraction); the denominator always has
// at least one unit term so division by zero cannot occur.
inline Vec softmax(const Vec& x) {
    if (x.empty()) throw ShapeError("softmax: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    Vec out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec relu(const Vec& x) {
    Vec out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
    return out;
}

// dx = dy elementwise-masked by the forward input's sign.
inline Vec relu_backward(const Vec& input, const Vec& upstream) {
    Vec out(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > 0.0 ? upstream[i] : 0.0;
    return out;
}

// Backward of p = softmax(x): dx_i = p_i (dy_i - sum_j p_j dy_j).
inline Vec softmax_backward(const Vec& probs, const Vec& upstream) {
    double inner = dot(probs, upstream);
    Vec out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (upstream[i] - inner);
    return out;
}

// Affine map y = W x + b with explicit analytic backward. forward() caches
// the input; backward() requires a prior forward on the same layer object.
struct AffineLayer {
    Matrix weight;  // out x in
    Vec bias;       // out
    Vec cached_input;
    bool has_cache = false;

    AffineLayer() = default;
    AffineLayer(Matrix w, Vec b) : weight(std::move(w)), bias(std::move(b)) {
        if (static_cast<int>(bias.size()) != weight.rows)
            throw ShapeError("affine: bias length " + std::to_string(bias.size()) + " != weight rows " +
                             std::to_string(weight.rows));
    }

    static AffineLayer xavier(int out_dim, int in_dim, Rng& rng) {
        Matrix w(out_dim, in_dim);
        const double bound = std::sqrt(6.0 / (out_dim + in_dim));
        for (double& v : w.data) v = rng.uniform(-bound, bound);
        return AffineLayer(std::move(w), Vec(out_dim, 0.0));
    }

    int in_dim() const { return weight.cols; }
    int out_dim() const { return weight.rows; }

    // Inference path: no cache mutation, safe to call concurrently.
    Vec apply(const Vec& x) const {
        Vec y = matvec(weight, x);
        for (int i = 0; i < weight.rows; ++i) y[i] += bias[i];
        return y;
    }

    Vec forward(const Vec& x) {
        cached_input = x;
        has_cache = true;
        return apply(x);
    }

    struct Grads {
        Vec input;
        Matrix weight;
        Vec bias;
    };

    Grads backward(const Vec& upstream) const {
        if (!has_cache) throw StateError("affine backward called before forward");
        if (static_cast<int>(upstream.size()) != weight.rows)
            throw ShapeError("affine backward: upstream length " + std::to_string(upstream.size()));
        Grads g;
        g.input = matvec_transposed(weight, upstream);
        g.weight = Matrix(weight.rows, weight.cols);
        add_outer(g.weight, upstream, cached_input);
        g.bias = upstream;
        return g;
    }

    // Accumulating variant used by the training loop.
    void backward_into(const Vec& upstream, Matrix& dweight, Vec& dbias, Vec& dinput) const {
        if (!has_cache) throw StateError("affine backward called before forward");
        add_outer(dweight, upstream, cached_input);
        axpy(dbias, 1.0, upstream);
        Vec di = matvec_transposed(weight, upstream);
        if (dinput.empty()) dinput.assign(di.size(), 0.0);
        axpy(dinput, 1.0, di);
    }
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    Vec per_param_errors;
};

// Central-difference gradient check: compares the supplied analytic gradient
// against (f(p+h) - f(p-h)) / 2h per coordinate. Relative error uses
// |a - n| / max(|a|, |n|, 1e-10) so exact zeros compare clean.
inline GradCheckReport grad_check(const std::function<double(const Vec&)>& f, const Vec& analytic_grad,
                                  Vec params, double step) {
    if (step <= 0.0) throw ArgumentError("grad_check: step must be > 0");
    if (analytic_grad.size() != params.size()) throw ShapeError("grad_check: gradient/param size mismatch");
    if (!std::isfinite(f(params))) throw EvalError("grad_check: f not finite at params");
    GradCheckReport report;
    report.per_param_errors.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double fp = f(params);
        params[i] = saved - step;
        const double fm = f(params);
        params[i] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm)) throw EvalError("grad_check: f not finite near params");
        const double numeric = (fp - fm) / (2.0 * step);
        const double analytic = analytic_grad[i];
        const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-10});
        const double err = std::fabs(analytic - numeric) / denom;
        report.per_param_errors[i] = err;
        report.max_rel_error = std::max(report.max_rel_error, err);
    }
    return report;
}

}  // namespace camac

#endif
