#pragma once

// Independent nested-loop re-implementation of the snapshot encoder and edge
// score, used only as a test oracle. Deliberately written with plain loops
// over std::vector<std::vector<double>>; shares no code with the tensor path.

#include <cmath>
#include <vector>

#include "mxad/encoder.hpp"
#include "mxad/graph.hpp"

namespace naive {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const mxad::Tensor& t) {
    Mat m(t.rows(), std::vector<double>(t.cols()));
    for (std::size_t i = 0; i < t.rows(); ++i)
        for (std::size_t j = 0; j < t.cols(); ++j) m[i][j] = t.at(i, j);
    return m;
}

inline std::vector<double> matvec_row(const std::vector<double>& x, const Mat& w) {
    std::vector<double> out(w[0].size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += x[i] * w[i][j];
    return out;
}

inline double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

struct Params {
    Mat input_proj;
    std::vector<std::vector<Mat>> gnn_w;  // [r][l]
    struct Gru {
        Mat Wz, Uz, Wr, Ur, Wc, Uc;
        std::vector<double> bz, br, bc;
    };
    std::vector<std::vector<Gru>> gru;  // [r][l]
    std::vector<Mat> attn_w;            // [r]
    std::vector<double> a, b;
    double eta = 1.0, mu = 0.3;

    static Params from(const mxad::EncoderParams& p) {
        Params out;
        out.input_proj = to_mat(p.input_proj);
        for (int r = 0; r < p.num_relations; ++r) {
            std::vector<Mat> ws;
            for (const auto& w : p.gnn_w[r]) ws.push_back(to_mat(w));
            out.gnn_w.push_back(ws);
            std::vector<Gru> cells;
            for (const auto& c : p.gru[r]) {
                Gru g;
                g.Wz = to_mat(c.Wz);
                g.Uz = to_mat(c.Uz);
                g.Wr = to_mat(c.Wr);
                g.Ur = to_mat(c.Ur);
                g.Wc = to_mat(c.Wc);
                g.Uc = to_mat(c.Uc);
                g.bz = to_mat(c.bz)[0];
                g.br = to_mat(c.br)[0];
                g.bc = to_mat(c.bc)[0];
                cells.push_back(g);
            }
            out.gru.push_back(cells);
            out.attn_w.push_back(to_mat(p.attn_w[r]));
        }
        out.a = to_mat(p.score_a)[0];
        out.b = to_mat(p.score_b)[0];
        out.eta = p.cfg.eta;
        out.mu = p.cfg.mu;
        return out;
    }
};

// One GNN layer by triple loop: for each node, sum transformed messages from
// its neighbors, then add the skip connection.
inline Mat gnn_layer(const mxad::Snapshot& s, int r, const Mat& h, const Mat& w) {
    const std::size_t n = h.size();
    const std::size_t d = h[0].size();
    Mat out(n, std::vector<double>(d, 0.0));
    for (std::size_t u = 0; u < n; ++u) {
        for (const auto& [v, tau] : s.neighbors(static_cast<int>(u), r)) {
            std::vector<double> cat;
            cat.insert(cat.end(), h[v].begin(), h[v].end());
            cat.insert(cat.end(), h[u].begin(), h[u].end());
            cat.push_back(tau);
            std::vector<double> msg = matvec_row(cat, w);
            for (std::size_t j = 0; j < d; ++j) out[u][j] += msg[j];
        }
        for (std::size_t j = 0; j < d; ++j) out[u][j] += h[u][j];
    }
    return out;
}

inline Mat gru(const Params::Gru& c, const Mat& x, const Mat& hprev) {
    const std::size_t n = x.size(), d = x[0].size();
    Mat out(n, std::vector<double>(d));
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<double> zx = matvec_row(x[u], c.Wz), zh = matvec_row(hprev[u], c.Uz);
        std::vector<double> rx = matvec_row(x[u], c.Wr), rh = matvec_row(hprev[u], c.Ur);
        std::vector<double> z(d), rho(d);
        for (std::size_t j = 0; j < d; ++j) {
            z[j] = sigmoid(zx[j] + zh[j] + c.bz[j]);
            rho[j] = sigmoid(rx[j] + rh[j] + c.br[j]);
        }
        std::vector<double> gated(d);
        for (std::size_t j = 0; j < d; ++j) gated[j] = rho[j] * hprev[u][j];
        std::vector<double> cx = matvec_row(x[u], c.Wc), ch = matvec_row(gated, c.Uc);
        for (std::size_t j = 0; j < d; ++j) {
            const double cand = std::tanh(cx[j] + ch[j] + c.bc[j]);
            out[u][j] = (1.0 - z[j]) * hprev[u][j] + z[j] * cand;
        }
    }
    return out;
}

// alpha[u][r], per-node softmax over relations of tanh(s_r^T W_r h_hat_{r,u}).
inline Mat attention(const std::vector<Mat>& hhat, const std::vector<Mat>& attn_w) {
    const std::size_t L = hhat.size();
    const std::size_t n = hhat[0].size();
    const std::size_t d = hhat[0][0].size();
    Mat alpha(n, std::vector<double>(L));
    std::vector<std::vector<double>> query(L);
    for (std::size_t r = 0; r < L; ++r) {
        std::vector<double> summary(d, 0.0);
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t j = 0; j < d; ++j) summary[j] += hhat[r][u][j];
        query[r] = matvec_row(summary, attn_w[r]);
    }
    for (std::size_t u = 0; u < n; ++u) {
        std::vector<double> logits(L);
        double mx = -1e300;
        for (std::size_t r = 0; r < L; ++r) {
            double dot = 0.0;
            for (std::size_t j = 0; j < d; ++j) dot += query[r][j] * hhat[r][u][j];
            logits[r] = std::tanh(dot);
            mx = std::max(mx, logits[r]);
        }
        double zsum = 0.0;
        for (std::size_t r = 0; r < L; ++r) zsum += std::exp(logits[r] - mx);
        for (std::size_t r = 0; r < L; ++r) alpha[u][r] = std::exp(logits[r] - mx) / zsum;
    }
    return alpha;
}

struct State {
    std::vector<std::vector<Mat>> h;  // [r][l]
};

inline State from_state(const mxad::HierarchicalState& st) {
    State out;
    for (const auto& rel : st.h) {
        std::vector<Mat> mats;
        for (const auto& t : rel) mats.push_back(to_mat(t));
        out.h.push_back(mats);
    }
    return out;
}

// Full-variant encoder pass; returns final-depth layer-aware embeddings per
// relation.
inline std::vector<Mat> encode(const mxad::Snapshot& s, const Mat& features, const State& state,
                               const Params& p, int depth) {
    const std::size_t L = p.gnn_w.size();
    const std::size_t n = features.size();
    const std::size_t d = p.input_proj[0].size();

    Mat x0(n);
    for (std::size_t u = 0; u < n; ++u) x0[u] = matvec_row(features[u], p.input_proj);
    std::vector<Mat> cur(L, x0);

    for (int l = 0; l < depth; ++l) {
        std::vector<Mat> hhat(L);
        for (std::size_t r = 0; r < L; ++r) {
            Mat tilde = gnn_layer(s, static_cast<int>(r), cur[r], p.gnn_w[r][l]);
            hhat[r] = gru(p.gru[r][l], tilde, state.h[r][l]);
        }
        Mat alpha = attention(hhat, p.attn_w);
        std::vector<Mat> next(L, Mat(n, std::vector<double>(d, 0.0)));
        for (std::size_t u = 0; u < n; ++u) {
            std::vector<double> zeta(d, 0.0);
            for (std::size_t r = 0; r < L; ++r)
                for (std::size_t j = 0; j < d; ++j) zeta[j] += alpha[u][r] * hhat[r][u][j];
            for (std::size_t r = 0; r < L; ++r)
                for (std::size_t j = 0; j < d; ++j) next[r][u][j] = hhat[r][u][j] + zeta[j];
        }
        cur = next;
    }
    return cur;
}

inline double edge_score(const Mat& h, int u, int v, const Params& p) {
    double sq = 0.0;
    for (std::size_t j = 0; j < p.a.size(); ++j) {
        const double m = p.a[j] * h[u][j] + p.b[j] * h[v][j];
        sq += m * m;
    }
    return sigmoid(p.eta * (sq - p.mu));
}

}  // namespace naive
