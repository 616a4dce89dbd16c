#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mxad/bench.hpp"
#include "mxad/graph.hpp"
#include "mxad/rng.hpp"
#include "mxad/tensor.hpp"

namespace mxad {

// An edge with its layer-dependent anomaly probability and optional ground
// truth (-1 when unknown).
struct ScoredEdge {
    int t = 0;
    int relation = 0;
    int u = 0;
    int v = 0;
    double score = 0.0;
    int label = -1;
    AnomalyKind kind = AnomalyKind::None;
};

// phi = sigmoid(eta * (|| a (.) h_u + b (.) h_v ||^2 - mu)) for each (u, v)
// pair; h is the final-depth embedding matrix of one relation. Returns P x 1.
Tensor edge_score_batch(const Tensor& h, const std::vector<std::size_t>& us,
                        const std::vector<std::size_t>& vs, const Tensor& a, const Tensor& b,
                        double eta, double mu);

double edge_score(const Tensor& h, int u, int v, const Tensor& a, const Tensor& b, double eta,
                  double mu);

// Degree-weighted corruption: replace u w.p. deg_r(u) / (deg_r(u) + deg_r(v)),
// else v, by a uniform node; rejected until the pair is a non-edge in relation
// r of this snapshot and not a self-loop. Isolated pairs (both degrees zero)
// replace either side with probability 1/2.
std::pair<int, int> negative_sample(const Snapshot& s, int r, int u, int v, Rng& rng,
                                    int max_retries = 1000);

// Hinge sum over paired positive/corrupted scores:
// sum_i max{0, gamma + phi_pos_i - phi_neg_i}. Ties at the kink take the 0
// branch through relu's subgradient.
Tensor hinge_loss(const Tensor& phi_pos, const Tensor& phi_neg, double gamma);

// Score dump: "t r u v score [label]" per line, ordered by (t, r, u, v).
void write_scores(const std::string& path, std::vector<ScoredEdge> scores);
std::vector<ScoredEdge> load_scores(const std::string& path);

}  // namespace mxad
