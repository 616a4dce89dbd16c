#include "mxad/scoring.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "mxad/error.hpp"

namespace mxad {

Tensor edge_score_batch(const Tensor& h, const std::vector<std::size_t>& us,
                        const std::vector<std::size_t>& vs, const Tensor& a, const Tensor& b,
                        double eta, double mu) {
    if (us.size() != vs.size()) throw DimensionError("edge_score: unpaired endpoint lists");
    Tensor hu = gather_rows(h, us);
    Tensor hv = gather_rows(h, vs);
    Tensor mixed = add(hadamard(hu, a), hadamard(hv, b));
    return sigmoid(scale(add_scalar(row_sumsq(mixed), -mu), eta));
}

double edge_score(const Tensor& h, int u, int v, const Tensor& a, const Tensor& b, double eta,
                  double mu) {
    return edge_score_batch(h, {static_cast<std::size_t>(u)}, {static_cast<std::size_t>(v)}, a,
                            b, eta, mu)
        .item();
}

std::pair<int, int> negative_sample(const Snapshot& s, int r, int u, int v, Rng& rng,
                                    int max_retries) {
    const int du = s.degree(u, r);
    const int dv = s.degree(v, r);
    const double p_replace_u =
        (du + dv) > 0 ? static_cast<double>(du) / (du + dv) : 0.5;
    const int n = s.num_nodes();
    for (int i = 0; i < max_retries; ++i) {
        int uu = u, vv = v;
        if (rng.bernoulli(p_replace_u)) {
            uu = static_cast<int>(rng.below(n));
        } else {
            vv = static_cast<int>(rng.below(n));
        }
        if (uu == vv) continue;
        if (s.has_edge(uu, vv, r)) continue;
        return {uu, vv};
    }
    throw SamplingError("negative sampling: no non-edge found for (" + std::to_string(u) + ", " +
                        std::to_string(v) + ") in relation " + std::to_string(r));
}

Tensor hinge_loss(const Tensor& phi_pos, const Tensor& phi_neg, double gamma) {
    if (phi_pos.rows() != phi_neg.rows() || phi_pos.cols() != 1 || phi_neg.cols() != 1) {
        throw DimensionError("hinge_loss: positive/corrupted scores must be paired Px1");
    }
    return sum_all(relu(add_scalar(sub(phi_pos, phi_neg), gamma)));
}

void write_scores(const std::string& path, std::vector<ScoredEdge> scores) {
    std::sort(scores.begin(), scores.end(), [](const ScoredEdge& a, const ScoredEdge& b) {
        return std::tie(a.t, a.relation, a.u, a.v) < std::tie(b.t, b.relation, b.u, b.v);
    });
    std::ofstream out(path);
    if (!out) throw IoError("cannot write score dump: " + path);
    out << "# t r u v score label\n";
    out << std::setprecision(17);
    for (const ScoredEdge& e : scores) {
        out << e.t << " " << e.relation << " " << e.u << " " << e.v << " " << e.score;
        if (e.label >= 0) out << " " << e.label;
        out << "\n";
    }
    if (!out) throw IoError("failed writing score dump: " + path);
}

std::vector<ScoredEdge> load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open score dump: " + path);
    std::vector<ScoredEdge> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        ScoredEdge e;
        if (!(is >> e.t >> e.relation >> e.u >> e.v >> e.score)) {
            throw ValidationError("score line " + std::to_string(lineno) +
                                  ": expected \"t r u v score [label]\"");
        }
        int label;
        if (is >> label) e.label = label;
        out.push_back(e);
    }
    return out;
}

}  // namespace mxad
