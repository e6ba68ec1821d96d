#ifndef CAMAC_CONTEXT_HPP
#define CAMAC_CONTEXT_HPP

#include <cmath>
#include <vector>

#include "camac/errors.hpp"
#include "camac/numerics.hpp"
#include "camac/rng.hpp"
#include "camac/state.hpp"

namespace camac {

// Scaled dot-product attention: softmax(Q K^T / sqrt(d_k)) V, softmax
// applied row-wise.
inline Matrix attention(const Matrix& Q, const Matrix& K, const Matrix& V) {
    if (Q.cols != K.cols) throw ShapeError("attention: Q/K width mismatch");
    if (K.rows != V.rows) throw ShapeError("attention: K/V row mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols));
    Matrix out(Q.rows, V.cols);
    for (int i = 0; i < Q.rows; ++i) {
        Vec logits(K.rows);
        for (int j = 0; j < K.rows; ++j) {
            double s = 0.0;
            for (int c = 0; c < Q.cols; ++c) s += Q(i, c) * K(j, c);
            logits[j] = s * scale;
        }
        const Vec weights = softmax(logits);
        for (int j = 0; j < K.rows; ++j)
            for (int c = 0; c < V.cols; ++c) out(i, c) += weights[j] * V(j, c);
    }
    return out;
}

// Multi-head attention over the context tokens. Per head i the projections
// are Q_i = X W_i^Q, K_i = X W_i^K, V_i = X W_i^V; head outputs are
// concatenated, projected by W^O, then mean-pooled over tokens to a single
// d_model vector.
struct AttentionParams {
    int heads = 2;
    int d_k = 4;
    int d_v = 4;
    int d_model = 16;
    std::vector<Matrix> Wq, Wk, Wv;  // token_width x d_k / d_v, one per head
    Matrix Wo;                       // (heads * d_v) x d_model

    static AttentionParams init(int token_width, int heads, int d_k, int d_v, int d_model, Rng& rng) {
        AttentionParams p;
        p.heads = heads;
        p.d_k = d_k;
        p.d_v = d_v;
        p.d_model = d_model;
        auto mat = [&](int r, int c) {
            Matrix m(r, c);
            const double bound = std::sqrt(6.0 / (r + c));
            for (double& v : m.data) v = rng.uniform(-bound, bound);
            return m;
        };
        for (int h = 0; h < heads; ++h) {
            p.Wq.push_back(mat(token_width, d_k));
            p.Wk.push_back(mat(token_width, d_k));
            p.Wv.push_back(mat(token_width, d_v));
        }
        p.Wo = mat(heads * d_v, d_model);
        return p;
    }

    void check(int token_width) const {
        if (static_cast<int>(Wq.size()) != heads || static_cast<int>(Wk.size()) != heads ||
            static_cast<int>(Wv.size()) != heads)
            throw ShapeError("attention params: per-head projection count != heads");
        for (int h = 0; h < heads; ++h)
            if (Wq[h].rows != token_width || Wk[h].rows != token_width || Wv[h].rows != token_width)
                throw ShapeError("attention params: projection width mismatch");
        if (Wo.rows != heads * d_v) throw ShapeError("attention params: W^O input width != heads*d_v");
    }
};

struct MultiHeadCache {
    Matrix tokens;
    std::vector<Matrix> Q, K, V;
    std::vector<Matrix> weights;  // per head, row-wise softmax output
    std::vector<Matrix> head_out;
    Matrix concat;  // n_tokens x heads*d_v
};

inline Vec multi_head_forward(const Matrix& tokens, const AttentionParams& p, MultiHeadCache* cache) {
    p.check(tokens.cols);
    const int n_tok = tokens.rows;
    Matrix concat_m(n_tok, p.heads * p.d_v);
    if (cache) {
        *cache = MultiHeadCache{};
        cache->tokens = tokens;
    }
    for (int h = 0; h < p.heads; ++h) {
        Matrix Q = matmul(tokens, p.Wq[h]);
        Matrix K = matmul(tokens, p.Wk[h]);
        Matrix V = matmul(tokens, p.Wv[h]);
        const double scale = 1.0 / std::sqrt(static_cast<double>(p.d_k));
        Matrix weights(n_tok, n_tok);
        for (int i = 0; i < n_tok; ++i) {
            Vec logits(n_tok);
            for (int j = 0; j < n_tok; ++j) {
                double s = 0.0;
                for (int c = 0; c < p.d_k; ++c) s += Q(i, c) * K(j, c);
                logits[j] = s * scale;
            }
            const Vec w = softmax(logits);
            for (int j = 0; j < n_tok; ++j) weights(i, j) = w[j];
        }
        Matrix head = matmul(weights, V);
        for (int i = 0; i < n_tok; ++i)
            for (int c = 0; c < p.d_v; ++c) concat_m(i, h * p.d_v + c) = head(i, c);
        if (cache) {
            cache->Q.push_back(std::move(Q));
            cache->K.push_back(std::move(K));
            cache->V.push_back(std::move(V));
            cache->weights.push_back(std::move(weights));
            cache->head_out.push_back(std::move(head));
        }
    }
    Matrix projected = matmul(concat_m, p.Wo);
    if (cache) cache->concat = std::move(concat_m);
    Vec pooled(p.d_model, 0.0);
    for (int i = 0; i < n_tok; ++i)
        for (int c = 0; c < p.d_model; ++c) pooled[c] += projected(i, c);
    const double inv = 1.0 / static_cast<double>(n_tok);
    for (double& v : pooled) v *= inv;
    return pooled;
}

inline Vec multi_head(const Matrix& tokens, const AttentionParams& p) {
    return multi_head_forward(tokens, p, nullptr);
}

struct AttentionGrads {
    std::vector<Matrix> dWq, dWk, dWv;
    Matrix dWo;

    static AttentionGrads zeros_like(const AttentionParams& p) {
        AttentionGrads g;
        for (int h = 0; h < p.heads; ++h) {
            g.dWq.emplace_back(p.Wq[h].rows, p.Wq[h].cols);
            g.dWk.emplace_back(p.Wk[h].rows, p.Wk[h].cols);
            g.dWv.emplace_back(p.Wv[h].rows, p.Wv[h].cols);
        }
        g.dWo = Matrix(p.Wo.rows, p.Wo.cols);
        return g;
    }
};

// Backward through the pooled multi-head output. Accumulates parameter
// gradients; token-input gradients are not needed (tokens are raw features).
inline void multi_head_backward(const AttentionParams& p, const MultiHeadCache& cache, const Vec& d_pooled,
                                AttentionGrads& grads) {
    const int n_tok = cache.tokens.rows;
    const double inv = 1.0 / static_cast<double>(n_tok);
    Matrix d_projected(n_tok, p.d_model);
    for (int i = 0; i < n_tok; ++i)
        for (int c = 0; c < p.d_model; ++c) d_projected(i, c) = d_pooled[c] * inv;

    // projected = concat * Wo
    Matrix d_concat = matmul(d_projected, transpose(p.Wo));
    Matrix dWo = matmul(transpose(cache.concat), d_projected);
    for (std::size_t i = 0; i < dWo.data.size(); ++i) grads.dWo.data[i] += dWo.data[i];

    const double scale = 1.0 / std::sqrt(static_cast<double>(p.d_k));
    for (int h = 0; h < p.heads; ++h) {
        Matrix d_head(n_tok, p.d_v);
        for (int i = 0; i < n_tok; ++i)
            for (int c = 0; c < p.d_v; ++c) d_head(i, c) = d_concat(i, h * p.d_v + c);

        const Matrix& A = cache.weights[h];
        const Matrix& V = cache.V[h];
        // head = A V
        Matrix dA = matmul(d_head, transpose(V));
        Matrix dV = matmul(transpose(A), d_head);
        // softmax rows
        Matrix dS(n_tok, n_tok);
        for (int i = 0; i < n_tok; ++i) {
            const Vec row_probs = A.row(i);
            const Vec row_up = dA.row(i);
            const Vec back = softmax_backward(row_probs, row_up);
            for (int j = 0; j < n_tok; ++j) dS(i, j) = back[j];
        }
        // S = scale * Q K^T
        Matrix dQ = matmul(dS, cache.K[h]);
        for (double& v : dQ.data) v *= scale;
        Matrix dK = matmul(transpose(dS), cache.Q[h]);
        for (double& v : dK.data) v *= scale;

        Matrix dWq = matmul(transpose(cache.tokens), dQ);
        Matrix dWk = matmul(transpose(cache.tokens), dK);
        Matrix dWv = matmul(transpose(cache.tokens), dV);
        for (std::size_t i = 0; i < dWq.data.size(); ++i) grads.dWq[h].data[i] += dWq.data[i];
        for (std::size_t i = 0; i < dWk.data.size(); ++i) grads.dWk[h].data[i] += dWk.data[i];
        for (std::size_t i = 0; i < dWv.data.size(); ++i) grads.dWv[h].data[i] += dWv.data[i];
    }
}

// alpha_adapt(s, t) = sigmoid(W_alpha . s + b_alpha + tau(t)) with
// tau(t) = amplitude * sin(2 pi t / period). The context encoding applied to
// the state is the identity on the normalized feature vector.
struct AdaptationParams {
    Vec W_alpha;  // 1 x n_ctx
    double b_alpha = 0.0;
    double tau_amplitude = 0.0;
    double tau_period = 96.0;

    static AdaptationParams neutral(int n_ctx) {
        AdaptationParams p;
        p.W_alpha = Vec(n_ctx, 0.0);
        return p;
    }
};

inline double adaptation_factor(const ContextState& state, int t, const AdaptationParams& p) {
    const Vec s = state.flat();
    if (s.size() != p.W_alpha.size()) throw ShapeError("adaptation_factor: W_alpha width != n_ctx");
    const double tau = p.tau_amplitude * std::sin(6.283185307179586 * static_cast<double>(t) / p.tau_period);
    return sigmoid(dot(p.W_alpha, s) + p.b_alpha + tau);
}

// Feed-forward autoencoder over the full context vector. Hidden layers are
// rectified; the latent and reconstruction layers stay linear.
struct ContextEncoderParams {
    std::vector<AffineLayer> encoder;  // n_ctx -> ... -> d_z
    std::vector<AffineLayer> decoder;  // d_z -> ... -> n_ctx
    int d_z = 8;

    static ContextEncoderParams init(int n_ctx, int hidden, int d_z, Rng& rng) {
        ContextEncoderParams p;
        p.d_z = d_z;
        p.encoder.push_back(AffineLayer::xavier(hidden, n_ctx, rng));
        p.encoder.push_back(AffineLayer::xavier(d_z, hidden, rng));
        p.decoder.push_back(AffineLayer::xavier(hidden, d_z, rng));
        p.decoder.push_back(AffineLayer::xavier(n_ctx, hidden, rng));
        return p;
    }

    int n_ctx() const { return encoder.front().in_dim(); }
};

namespace detail {
// Applies an affine chain with relu between layers, last layer linear.
inline Vec chain_apply(const std::vector<AffineLayer>& layers, const Vec& x) {
    Vec h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layers[i].apply(h);
        if (i + 1 < layers.size()) h = relu(h);
    }
    return h;
}
}  // namespace detail

inline Vec encode(const ContextState& state, const ContextEncoderParams& p) {
    const Vec s = state.flat();
    if (static_cast<int>(s.size()) != p.n_ctx()) throw ShapeError("encode: state width != encoder input");
    return detail::chain_apply(p.encoder, s);
}

inline Vec encode_vec(const Vec& s, const ContextEncoderParams& p) {
    if (static_cast<int>(s.size()) != p.n_ctx()) throw ShapeError("encode: state width != encoder input");
    return detail::chain_apply(p.encoder, s);
}

// One SGD step on the mean squared reconstruction error
// (1/B) sum_b ||decode(encode(s_b)) - s_b||^2. Returns the loss before the
// step.
inline double encoder_update(const std::vector<Vec>& batch, ContextEncoderParams& p, double learning_rate) {
    if (batch.empty()) throw ArgumentError("encoder_update: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());

    std::vector<Matrix> dW_enc, dW_dec;
    std::vector<Vec> db_enc, db_dec;
    for (const auto& l : p.encoder) {
        dW_enc.emplace_back(l.weight.rows, l.weight.cols);
        db_enc.emplace_back(l.bias.size(), 0.0);
    }
    for (const auto& l : p.decoder) {
        dW_dec.emplace_back(l.weight.rows, l.weight.cols);
        db_dec.emplace_back(l.bias.size(), 0.0);
    }

    double loss = 0.0;
    for (const Vec& s : batch) {
        // forward with caches (layer-internal)
        std::vector<Vec> enc_pre(p.encoder.size()), dec_pre(p.decoder.size());
        Vec h = s;
        for (std::size_t i = 0; i < p.encoder.size(); ++i) {
            h = p.encoder[i].forward(h);
            enc_pre[i] = h;
            if (i + 1 < p.encoder.size()) h = relu(h);
        }
        for (std::size_t i = 0; i < p.decoder.size(); ++i) {
            h = p.decoder[i].forward(h);
            dec_pre[i] = h;
            if (i + 1 < p.decoder.size()) h = relu(h);
        }
        Vec diff(h.size());
        for (std::size_t i = 0; i < h.size(); ++i) {
            diff[i] = h[i] - s[i];
            loss += diff[i] * diff[i] * inv_b;
        }
        // backward
        Vec up(diff.size());
        for (std::size_t i = 0; i < diff.size(); ++i) up[i] = 2.0 * diff[i] * inv_b;
        for (int i = static_cast<int>(p.decoder.size()) - 1; i >= 0; --i) {
            if (i + 1 < static_cast<int>(p.decoder.size())) up = relu_backward(dec_pre[i], up);
            Vec dinput;
            p.decoder[i].backward_into(up, dW_dec[i], db_dec[i], dinput);
            up = std::move(dinput);
        }
        for (int i = static_cast<int>(p.encoder.size()) - 1; i >= 0; --i) {
            if (i + 1 < static_cast<int>(p.encoder.size())) up = relu_backward(enc_pre[i], up);
            Vec dinput;
            p.encoder[i].backward_into(up, dW_enc[i], db_enc[i], dinput);
            up = std::move(dinput);
        }
    }

    for (std::size_t i = 0; i < p.encoder.size(); ++i) {
        for (std::size_t k = 0; k < dW_enc[i].data.size(); ++k)
            p.encoder[i].weight.data[k] -= learning_rate * dW_enc[i].data[k];
        for (std::size_t k = 0; k < db_enc[i].size(); ++k) p.encoder[i].bias[k] -= learning_rate * db_enc[i][k];
    }
    for (std::size_t i = 0; i < p.decoder.size(); ++i) {
        for (std::size_t k = 0; k < dW_dec[i].data.size(); ++k)
            p.decoder[i].weight.data[k] -= learning_rate * dW_dec[i].data[k];
        for (std::size_t k = 0; k < db_dec[i].size(); ++k) p.decoder[i].bias[k] -= learning_rate * db_dec[i][k];
    }
    return loss;
}

}  // namespace camac

#endif
