#include "mxad/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "mxad/error.hpp"

namespace mxad {

Variant parse_variant(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "mlp_update") return Variant::MlpUpdate;
    if (s == "no_attention") return Variant::NoAttention;
    if (s == "sum_attention") return Variant::SumAttention;
    throw ConfigError("unknown variant: " + s);
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::MlpUpdate: return "mlp_update";
        case Variant::NoAttention: return "no_attention";
        case Variant::SumAttention: return "sum_attention";
    }
    return "full";
}

namespace {

Tensor param(std::size_t rows, std::size_t cols, double scale, Rng& rng) {
    return Tensor::uniform(rows, cols, scale, rng, /*requires_grad=*/true);
}

}  // namespace

EncoderParams EncoderParams::init(const EncoderConfig& cfg, int num_relations, int feature_dim,
                                  Rng& rng) {
    if (cfg.hidden < 1 || cfg.depth < 1) throw ConfigError("hidden and depth must be >= 1");
    const int d = cfg.hidden;
    const double s = 1.0 / std::sqrt(static_cast<double>(d));

    EncoderParams p;
    p.cfg = cfg;
    p.num_relations = num_relations;
    p.feature_dim = feature_dim;
    p.input_proj = param(feature_dim, d, s, rng);

    const int cells_per_relation = cfg.share_gru_across_depths ? 1 : cfg.depth;
    for (int r = 0; r < num_relations; ++r) {
        std::vector<Tensor> ws;
        for (int l = 0; l < cfg.depth; ++l) ws.push_back(param(2 * d + 1, d, s, rng));
        p.gnn_w.push_back(std::move(ws));

        std::vector<GruCell> cells;
        for (int l = 0; l < cells_per_relation; ++l) {
            GruCell c;
            c.Wz = param(d, d, s, rng);
            c.Uz = param(d, d, s, rng);
            c.bz = param(1, d, s, rng);
            c.Wr = param(d, d, s, rng);
            c.Ur = param(d, d, s, rng);
            c.br = param(1, d, s, rng);
            c.Wc = param(d, d, s, rng);
            c.Uc = param(d, d, s, rng);
            c.bc = param(1, d, s, rng);
            cells.push_back(std::move(c));
        }
        p.gru.push_back(std::move(cells));

        if (cfg.variant == Variant::MlpUpdate) {
            std::vector<MlpCell> mcells;
            for (int l = 0; l < cells_per_relation; ++l) {
                MlpCell m;
                m.W1 = param(2 * d, d, s, rng);
                m.b1 = param(1, d, s, rng);
                m.W2 = param(d, d, s, rng);
                m.b2 = param(1, d, s, rng);
                mcells.push_back(std::move(m));
            }
            p.mlp.push_back(std::move(mcells));
        }

        p.attn_w.push_back(param(d, d, s, rng));
    }
    p.score_a = param(1, d, s, rng);
    p.score_b = param(1, d, s, rng);
    return p;
}

namespace {

void append_cell(std::vector<Tensor>& out, const GruCell& c) {
    for (const Tensor* t : {&c.Wz, &c.Uz, &c.bz, &c.Wr, &c.Ur, &c.br, &c.Wc, &c.Uc, &c.bc})
        out.push_back(*t);
}

void append_cell(std::vector<Tensor>& out, const MlpCell& c) {
    for (const Tensor* t : {&c.W1, &c.b1, &c.W2, &c.b2}) out.push_back(*t);
}

}  // namespace

std::vector<Tensor> EncoderParams::relation_params(int r) const {
    std::vector<Tensor> out;
    for (const Tensor& w : gnn_w[r]) out.push_back(w);
    const bool use_mlp = cfg.variant == Variant::MlpUpdate;
    if (use_mlp) {
        for (const MlpCell& c : mlp[r]) append_cell(out, c);
    } else {
        for (const GruCell& c : gru[r]) append_cell(out, c);
    }
    out.push_back(attn_w[r]);
    return out;
}

std::vector<Tensor> EncoderParams::shared_params() const {
    return {input_proj, score_a, score_b};
}

std::vector<Tensor> EncoderParams::all_params() const {
    std::vector<Tensor> out = shared_params();
    for (int r = 0; r < num_relations; ++r) {
        auto rp = relation_params(r);
        out.insert(out.end(), rp.begin(), rp.end());
    }
    return out;
}

void EncoderParams::zero_grads() const {
    for (Tensor t : all_params()) t.zero_grad();
}

std::uint64_t EncoderParams::checksum() const {
    // FNV-1a over the raw parameter bytes in canonical order.
    std::uint64_t h = 1469598103934665603ULL;
    for (const Tensor& t : all_params()) {
        for (double v : t.data()) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xff;
                h *= 1099511628211ULL;
            }
        }
    }
    return h;
}

HierarchicalState HierarchicalState::zeros(int num_relations, int depth, int num_nodes,
                                           int hidden) {
    HierarchicalState st;
    st.h.assign(num_relations, {});
    for (int r = 0; r < num_relations; ++r)
        for (int l = 0; l < depth; ++l) st.h[r].push_back(Tensor::zeros(num_nodes, hidden));
    return st;
}

HierarchicalState EncodeResult::detached_state() const {
    HierarchicalState st;
    const std::size_t L = per_depth.front().size();
    st.h.assign(L, {});
    for (std::size_t r = 0; r < L; ++r)
        for (const auto& depth_slice : per_depth) st.h[r].push_back(depth_slice[r].detach());
    return st;
}

Tensor gnn_layer(const Snapshot& s, int r, const Tensor& h_in, const Tensor& gnn_weight) {
    const std::size_t n = h_in.rows();
    const std::size_t d = h_in.cols();
    if (gnn_weight.rows() != 2 * d + 1 || gnn_weight.cols() != d) {
        throw DimensionError("gnn weight must be (2d+1) x d");
    }

    // Directed message list: each undirected edge contributes v->u and u->v.
    std::vector<std::size_t> src, dst;
    std::vector<double> taus;
    for (const SnapshotEdge& e : s.edges()) {
        if (e.relation != r) continue;
        src.push_back(e.v);
        dst.push_back(e.u);
        taus.push_back(e.norm_time);
        src.push_back(e.u);
        dst.push_back(e.v);
        taus.push_back(e.norm_time);
    }
    if (src.empty()) return h_in;  // empty sum, skip connection only

    Tensor h_src = gather_rows(h_in, src);
    Tensor h_dst = gather_rows(h_in, dst);
    Tensor tau = Tensor::from(std::move(taus), src.size(), 1);
    Tensor msgs = matmul(concat_cols({h_src, h_dst, tau}), gnn_weight);
    return add(scatter_add_rows(msgs, dst, n), h_in);
}

Tensor gru_update(const GruCell& cell, const Tensor& x, const Tensor& h_prev) {
    Tensor z = sigmoid(add(add(matmul(x, cell.Wz), matmul(h_prev, cell.Uz)), cell.bz));
    Tensor rho = sigmoid(add(add(matmul(x, cell.Wr), matmul(h_prev, cell.Ur)), cell.br));
    Tensor c =
        tanh(add(add(matmul(x, cell.Wc), matmul(hadamard(rho, h_prev), cell.Uc)), cell.bc));
    Tensor one_minus_z = add_scalar(scale(z, -1.0), 1.0);
    return add(hadamard(one_minus_z, h_prev), hadamard(z, c));
}

Tensor mlp_update(const MlpCell& cell, const Tensor& x, const Tensor& h_prev) {
    Tensor hidden = tanh(add(matmul(concat_cols({x, h_prev}), cell.W1), cell.b1));
    return add(matmul(hidden, cell.W2), cell.b2);
}

Tensor attention_weights(const std::vector<Tensor>& h_hat, const std::vector<Tensor>& attn_w) {
    if (h_hat.empty() || h_hat.size() != attn_w.size()) {
        throw DimensionError("attention: one embedding matrix per relation required");
    }
    std::vector<Tensor> logit_cols;
    for (std::size_t r = 0; r < h_hat.size(); ++r) {
        Tensor summary = col_sums(h_hat[r]);             // 1 x d
        Tensor query = matmul(summary, attn_w[r]);       // 1 x d
        Tensor logits = tanh(matmul(h_hat[r], transpose(query)));  // n x 1
        logit_cols.push_back(logits);
    }
    return softmax_rows(concat_cols(logit_cols));  // n x L
}

Tensor network_embedding(const std::vector<Tensor>& h_hat, const Tensor& alpha) {
    Tensor zeta;
    for (std::size_t r = 0; r < h_hat.size(); ++r) {
        Tensor term = scale_rows(h_hat[r], slice_cols(alpha, r, 1));
        zeta = zeta.defined() ? add(zeta, term) : term;
    }
    return zeta;
}

namespace {

// Normalize each column over nodes to zero mean, unit variance.
Tensor batch_norm_nodes(const Tensor& x) {
    Tensor mean = col_means(x);
    Tensor centered = sub(x, mean);
    Tensor var = col_means(hadamard(centered, centered));
    return div(centered, sqrt_eps(var, 1e-8));
}

}  // namespace

EncodeResult encode_snapshot(const Snapshot& s, const Tensor& features,
                             const HierarchicalState& state, const EncoderParams& params) {
    const int L = params.num_relations;
    const int depth = params.cfg.depth;
    const bool use_mlp = params.cfg.variant == Variant::MlpUpdate;

    Tensor x0 = matmul(features, params.input_proj);
    std::vector<Tensor> cur(L, x0);

    EncodeResult res;
    for (int l = 0; l < depth; ++l) {
        const int cell_idx = params.cfg.share_gru_across_depths ? 0 : l;
        std::vector<Tensor> h_hat(L);
        for (int r = 0; r < L; ++r) {
            Tensor tilde = gnn_layer(s, r, cur[r], params.gnn_w[r][l]);
            h_hat[r] = use_mlp ? mlp_update(params.mlp[r][cell_idx], tilde, state.h[r][l])
                               : gru_update(params.gru[r][cell_idx], tilde, state.h[r][l]);
        }

        std::vector<Tensor> out(L);
        switch (params.cfg.variant) {
            case Variant::NoAttention:
                out = h_hat;
                break;
            case Variant::SumAttention: {
                Tensor zeta;
                for (const Tensor& h : h_hat) zeta = zeta.defined() ? add(zeta, h) : h;
                for (int r = 0; r < L; ++r) out[r] = add(h_hat[r], zeta);
                break;
            }
            default: {
                Tensor alpha = attention_weights(h_hat, params.attn_w);
                Tensor zeta = network_embedding(h_hat, alpha);
                for (int r = 0; r < L; ++r) out[r] = add(h_hat[r], zeta);
            }
        }
        if (params.cfg.batch_norm)
            for (int r = 0; r < L; ++r) out[r] = batch_norm_nodes(out[r]);
        res.per_depth.push_back(out);
        cur = std::move(out);
    }
    return res;
}

namespace {

void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_i32(std::ostream& os, std::int32_t v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void write_f64(std::ostream& os, double v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
std::int32_t read_i32(std::istream& is) {
    std::int32_t v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
double read_f64(std::istream& is) {
    double v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

void write_tensor(std::ostream& os, const Tensor& t) {
    write_u64(os, t.rows());
    write_u64(os, t.cols());
    os.write(reinterpret_cast<const char*>(t.data().data()),
             static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_into_tensor(std::istream& is, Tensor& t) {
    const std::uint64_t rows = read_u64(is);
    const std::uint64_t cols = read_u64(is);
    if (rows != t.rows() || cols != t.cols()) {
        throw IoError("checkpoint tensor shape mismatch");
    }
    is.read(reinterpret_cast<char*>(t.data().data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

constexpr std::uint64_t kCheckpointMagic = 0x4d58414443503031ULL;  // "MXADCP01"

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& params,
                     const HierarchicalState& state, std::uint64_t config_hash) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write checkpoint: " + path);
    write_u64(os, kCheckpointMagic);
    write_u64(os, config_hash);
    write_i32(os, params.num_relations);
    write_i32(os, params.feature_dim);
    write_i32(os, params.cfg.hidden);
    write_i32(os, params.cfg.depth);
    write_i32(os, static_cast<std::int32_t>(params.cfg.variant));
    write_i32(os, params.cfg.share_gru_across_depths ? 1 : 0);
    write_i32(os, params.cfg.batch_norm ? 1 : 0);
    write_f64(os, params.cfg.eta);
    write_f64(os, params.cfg.mu);
    for (const Tensor& t : params.all_params()) write_tensor(os, t);
    write_i32(os, state.h.empty() ? 0 : static_cast<std::int32_t>(state.h[0][0].rows()));
    for (const auto& rel : state.h)
        for (const Tensor& t : rel) write_tensor(os, t);
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    if (read_u64(is) != kCheckpointMagic) throw IoError("not a checkpoint file: " + path);

    Checkpoint ck;
    ck.config_hash = read_u64(is);
    const int num_relations = read_i32(is);
    const int feature_dim = read_i32(is);
    EncoderConfig cfg;
    cfg.hidden = read_i32(is);
    cfg.depth = read_i32(is);
    cfg.variant = static_cast<Variant>(read_i32(is));
    cfg.share_gru_across_depths = read_i32(is) != 0;
    cfg.batch_norm = read_i32(is) != 0;
    cfg.eta = read_f64(is);
    cfg.mu = read_f64(is);

    Rng rng(0);
    ck.params = EncoderParams::init(cfg, num_relations, feature_dim, rng);
    for (Tensor t : ck.params.all_params()) read_into_tensor(is, t);

    const int num_nodes = read_i32(is);
    ck.state = HierarchicalState::zeros(num_relations, cfg.depth, num_nodes, cfg.hidden);
    for (auto& rel : ck.state.h)
        for (Tensor& t : rel) read_into_tensor(is, t);
    if (!is) throw IoError("truncated checkpoint: " + path);
    return ck;
}

}  // namespace mxad
