#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mxad/graph.hpp"
#include "mxad/rng.hpp"
#include "mxad/tensor.hpp"

namespace mxad {

enum class Variant { Full, MlpUpdate, NoAttention, SumAttention };

Variant parse_variant(const std::string& s);
std::string variant_name(Variant v);

struct EncoderConfig {
    int hidden = 200;
    int depth = 2;
    Variant variant = Variant::Full;
    double eta = 1.0;
    double mu = 0.3;
    bool share_gru_across_depths = false;
    bool batch_norm = false;  // per-depth normalization over nodes, off by default
};

struct GruCell {
    Tensor Wz, Uz, bz;  // update gate
    Tensor Wr, Ur, br;  // reset gate
    Tensor Wc, Uc, bc;  // candidate
};

struct MlpCell {
    Tensor W1, b1;  // 2d x d
    Tensor W2, b2;  // d x d
};

// All trainable parameters. One GNN weight and one recurrent cell per
// (relation, depth); one attention matrix per relation, shared across depths
// and time; shared input projection and score vectors.
struct EncoderParams {
    EncoderConfig cfg;
    int num_relations = 0;
    int feature_dim = 0;

    Tensor input_proj;                       // f x d
    std::vector<std::vector<Tensor>> gnn_w;  // [r][l], (2d+1) x d
    std::vector<std::vector<GruCell>> gru;   // [r][l] (single cell per r when shared)
    std::vector<std::vector<MlpCell>> mlp;   // [r][l], only for Variant::MlpUpdate
    std::vector<Tensor> attn_w;              // [r], d x d
    Tensor score_a, score_b;                 // 1 x d

    static EncoderParams init(const EncoderConfig& cfg, int num_relations, int feature_dim,
                              Rng& rng);

    // Flat views over the active parameters, in a fixed deterministic order.
    std::vector<Tensor> all_params() const;
    std::vector<Tensor> relation_params(int r) const;  // owned by relation r
    std::vector<Tensor> shared_params() const;         // input_proj, a, b

    void zero_grads() const;
    std::uint64_t checksum() const;
};

// Recurrent memory: H[r][l] (l = 0 .. depth-1 holding depths 1..depth), each
// num_nodes x hidden, carried across snapshots as plain values.
struct HierarchicalState {
    std::vector<std::vector<Tensor>> h;

    static HierarchicalState zeros(int num_relations, int depth, int num_nodes, int hidden);
};

// Tape-connected outputs of one snapshot encoding.
struct EncodeResult {
    // per_depth[l][r]: layer-aware embeddings at depth l+1.
    std::vector<std::vector<Tensor>> per_depth;
    // Final-depth embeddings per relation (what scoring consumes).
    const std::vector<Tensor>& final_h() const { return per_depth.back(); }

    HierarchicalState detached_state() const;
};

// One GNN layer for relation r: summed transformed neighbor messages plus a
// skip connection. h_in is this snapshot's depth-(l-1) embedding matrix.
Tensor gnn_layer(const Snapshot& s, int r, const Tensor& h_in, const Tensor& gnn_weight);

// Standard GRU cell applied row-wise; x is the GNN output, h_prev the state
// carried from the previous snapshot.
Tensor gru_update(const GruCell& cell, const Tensor& x, const Tensor& h_prev);

Tensor mlp_update(const MlpCell& cell, const Tensor& x, const Tensor& h_prev);

// Per-node softmax over relations: alpha is num_nodes x num_relations.
Tensor attention_weights(const std::vector<Tensor>& h_hat, const std::vector<Tensor>& attn_w);

// zeta_u = sum_r alpha(u, r) * h_hat_r(u).
Tensor network_embedding(const std::vector<Tensor>& h_hat, const Tensor& alpha);

// Full pass over one snapshot: per-relation GNN, recurrent update against the
// previous state, cross-relation attention, layer-aware aggregation.
EncodeResult encode_snapshot(const Snapshot& s, const Tensor& features,
                             const HierarchicalState& state, const EncoderParams& params);

// Checkpoint: versioned binary dump of params + state + config hash;
// round-trips bit-exactly.
struct Checkpoint {
    EncoderParams params;
    HierarchicalState state;
    std::uint64_t config_hash = 0;
};

void save_checkpoint(const std::string& path, const EncoderParams& params,
                     const HierarchicalState& state, std::uint64_t config_hash);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mxad
