#include "mxad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "mxad/error.hpp"
#include "mxad/evaluation.hpp"

namespace mxad {

EncoderConfig TrainConfig::encoder_config() const {
    EncoderConfig ec;
    ec.hidden = hidden;
    ec.depth = depth;
    ec.variant = variant;
    ec.eta = eta;
    ec.mu = mu;
    ec.share_gru_across_depths = share_gru_across_depths;
    ec.batch_norm = batch_norm;
    return ec;
}

std::string TrainConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "depth=" << depth << ";hidden=" << hidden << ";lr=" << learning_rate
       << ";gamma=" << gamma << ";eta=" << eta << ";mu=" << mu << ";lambda=" << lambda
       << ";max_epochs=" << max_epochs << ";tolerance=" << tolerance
       << ";patience=" << patience << ";seed=" << seed << ";variant=" << variant_name(variant)
       << ";train_fraction=" << train_fraction << ";optimizer=" << optimizer
       << ";share_gru=" << share_gru_across_depths << ";batch_norm=" << batch_norm;
    return os.str();
}

std::uint64_t TrainConfig::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

using nlohmann::json;

void apply_json(TrainConfig& cfg, const json& j) {
    if (j.contains("depth")) cfg.depth = j["depth"].get<int>();
    if (j.contains("hidden")) cfg.hidden = j["hidden"].get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("gamma")) cfg.gamma = j["gamma"].get<double>();
    if (j.contains("eta")) cfg.eta = j["eta"].get<double>();
    if (j.contains("mu")) cfg.mu = j["mu"].get<double>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("max_epochs")) cfg.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("tolerance")) cfg.tolerance = j["tolerance"].get<double>();
    if (j.contains("patience")) cfg.patience = j["patience"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("variant")) cfg.variant = parse_variant(j["variant"].get<std::string>());
    if (j.contains("train_fraction")) cfg.train_fraction = j["train_fraction"].get<double>();
    if (j.contains("optimizer")) cfg.optimizer = j["optimizer"].get<std::string>();
    if (j.contains("share_gru_across_depths"))
        cfg.share_gru_across_depths = j["share_gru_across_depths"].get<bool>();
    if (j.contains("batch_norm")) cfg.batch_norm = j["batch_norm"].get<bool>();
}

}  // namespace

TrainConfig load_train_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("config " + path + ": " + e.what());
    }
    if (j.contains("version") && j["version"].get<int>() != 1)
        throw ValidationError("config " + path + ": unsupported version");
    TrainConfig cfg;
    apply_json(cfg, j);
    if (cfg.depth < 1 || cfg.depth > 5) throw ConfigError("depth must be in 1..5");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction > 1.0)
        throw ConfigError("train_fraction must be in (0, 1]");
    if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
        throw ConfigError("optimizer must be adam or sgd");
    return cfg;
}

void save_train_config(const TrainConfig& cfg, const std::string& path) {
    json j;
    j["version"] = 1;
    j["depth"] = cfg.depth;
    j["hidden"] = cfg.hidden;
    j["learning_rate"] = cfg.learning_rate;
    j["gamma"] = cfg.gamma;
    j["eta"] = cfg.eta;
    j["mu"] = cfg.mu;
    j["lambda"] = cfg.lambda;
    j["max_epochs"] = cfg.max_epochs;
    j["tolerance"] = cfg.tolerance;
    j["patience"] = cfg.patience;
    j["seed"] = cfg.seed;
    j["variant"] = variant_name(cfg.variant);
    j["train_fraction"] = cfg.train_fraction;
    j["optimizer"] = cfg.optimizer;
    j["share_gru_across_depths"] = cfg.share_gru_across_depths;
    j["batch_norm"] = cfg.batch_norm;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config: " + path);
    out << j.dump(2) << "\n";
}

Optimizer::Optimizer(std::vector<Tensor> params, const std::string& kind, double lr)
    : params_(std::move(params)), adam_(kind == "adam"), lr_(lr) {
    if (kind != "adam" && kind != "sgd") throw ConfigError("unknown optimizer: " + kind);
    if (adam_) {
        for (const Tensor& p : params_) {
            m_.emplace_back(p.size(), 0.0);
            v_.emplace_back(p.size(), 0.0);
        }
    }
}

void Optimizer::step() {
    ++t_;
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        Tensor& p = params_[i];
        const std::vector<double>& g = p.grad();
        if (g.empty()) continue;
        if (adam_) {
            for (std::size_t k = 0; k < p.size(); ++k) {
                m_[i][k] = beta1 * m_[i][k] + (1.0 - beta1) * g[k];
                v_[i][k] = beta2 * v_[i][k] + (1.0 - beta2) * g[k] * g[k];
                const double mhat = m_[i][k] / bc1;
                const double vhat = v_[i][k] / bc2;
                p.data()[k] -= lr_ * mhat / (std::sqrt(vhat) + eps);
            }
        } else {
            for (std::size_t k = 0; k < p.size(); ++k) p.data()[k] -= lr_ * g[k];
        }
    }
}

namespace {

// Label lookup keyed by (snapshot, relation, u, v).
struct LabelMap {
    std::unordered_map<std::uint64_t, std::pair<int, AnomalyKind>> map;
    int num_nodes = 0, num_relations = 0;

    std::uint64_t key(int t, int r, int u, int v) const {
        return ((static_cast<std::uint64_t>(t) * num_relations + r) * num_nodes + u) *
                   num_nodes +
               v;
    }
};

LabelMap build_label_map(const LabeledDataset& d, int num_snapshots) {
    LabelMap lm;
    lm.num_nodes = d.graph.num_nodes;
    lm.num_relations = d.graph.num_relations;

    double tmin = 0.0, range = 0.0;
    if (!d.graph.edges.empty()) {
        double tmax;
        tmin = tmax = d.graph.edges.front().time;
        for (const TimedEdge& e : d.graph.edges) {
            tmin = std::min(tmin, e.time);
            tmax = std::max(tmax, e.time);
        }
        range = tmax - tmin;
    }
    for (std::size_t i = 0; i < d.graph.edges.size(); ++i) {
        const TimedEdge& e = d.graph.edges[i];
        int t = 0;
        if (range > 0.0)
            t = std::min(num_snapshots - 1,
                         static_cast<int>((e.time - tmin) / range * num_snapshots));
        lm.map.emplace(lm.key(t, e.relation, e.u, e.v),
                       std::make_pair(d.labels[i], d.kinds[i]));
    }
    return lm;
}

std::vector<ScoredEdge> score_snapshot(const Snapshot& s, const EncodeResult& enc,
                                       const EncoderParams& params, const LabelMap* labels) {
    std::vector<ScoredEdge> out;
    for (int r = 0; r < params.num_relations; ++r) {
        std::vector<std::size_t> us, vs;
        std::vector<SnapshotEdge> edges = s.relation_edges(r);
        for (const SnapshotEdge& e : edges) {
            us.push_back(e.u);
            vs.push_back(e.v);
        }
        if (us.empty()) continue;
        Tensor phi = edge_score_batch(enc.final_h()[r], us, vs, params.score_a, params.score_b,
                                      params.cfg.eta, params.cfg.mu);
        for (std::size_t i = 0; i < edges.size(); ++i) {
            ScoredEdge se;
            se.t = s.index();
            se.relation = r;
            se.u = edges[i].u;
            se.v = edges[i].v;
            se.score = phi.at(i, 0);
            if (labels) {
                auto it = labels->map.find(labels->key(se.t, r, se.u, se.v));
                if (it != labels->map.end()) {
                    se.label = it->second.first;
                    se.kind = it->second.second;
                }
            }
            out.push_back(se);
        }
    }
    return out;
}

struct NoGradGuard {
    std::vector<Tensor> params;
    explicit NoGradGuard(const EncoderParams& p) : params(p.all_params()) {
        for (Tensor& t : params) t.set_requires_grad(false);
    }
    ~NoGradGuard() {
        for (Tensor& t : params) t.set_requires_grad(true);
    }
};

Tensor regularizer(const EncoderParams& params, int r) {
    Tensor reg;
    for (const Tensor& t : params.relation_params(r)) {
        Tensor sq = squared_l2(t);
        reg = reg.defined() ? add(reg, sq) : sq;
    }
    // Shared parameters amortized equally across relations so the total
    // regularizer counts every parameter once.
    Tensor shared;
    for (const Tensor& t : params.shared_params()) {
        Tensor sq = squared_l2(t);
        shared = shared.defined() ? add(shared, sq) : sq;
    }
    return add(reg, scale(shared, 1.0 / params.num_relations));
}

Tensor snapshot_loss(const Snapshot& s, const EncodeResult& enc, const EncoderParams& params,
                     const TrainConfig& cfg, int epoch) {
    const int L = params.num_relations;
    Tensor total;
    for (int r = 0; r < L; ++r) {
        Tensor rel_loss = scale(regularizer(params, r), cfg.lambda);

        std::vector<SnapshotEdge> edges = s.relation_edges(r);
        if (!edges.empty()) {
            std::vector<std::size_t> pu, pv, nu, nv;
            for (std::size_t i = 0; i < edges.size(); ++i) {
                pu.push_back(edges[i].u);
                pv.push_back(edges[i].v);
                // One corrupted sample per positive, resampled every epoch;
                // each (snapshot, epoch, relation, edge) owns its stream.
                Rng rng = Rng(cfg.seed).fork(s.index(), epoch).fork(r, i);
                auto [cu, cv] = negative_sample(s, r, edges[i].u, edges[i].v, rng);
                nu.push_back(cu);
                nv.push_back(cv);
            }
            Tensor phi_pos = edge_score_batch(enc.final_h()[r], pu, pv, params.score_a,
                                              params.score_b, cfg.eta, cfg.mu);
            Tensor phi_neg = edge_score_batch(enc.final_h()[r], nu, nv, params.score_a,
                                              params.score_b, cfg.eta, cfg.mu);
            rel_loss = add(rel_loss, hinge_loss(phi_pos, phi_neg, cfg.gamma));
        }
        total = total.defined() ? add(total, rel_loss) : rel_loss;
    }
    return scale(total, 1.0 / L);
}

}  // namespace

SnapshotTrainResult train_snapshot(const Snapshot& s, const Tensor& features,
                                   const HierarchicalState& state, EncoderParams& params,
                                   Optimizer& opt, const TrainConfig& cfg) {
    SnapshotTrainResult res;
    double prev_loss = 0.0;
    int converged_streak = 0;
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        params.zero_grads();
        EncodeResult enc = encode_snapshot(s, features, state, params);
        Tensor loss = snapshot_loss(s, enc, params, cfg, epoch);
        const double lv = loss.item();
        if (!std::isfinite(lv)) {
            throw TrainingError("non-finite loss at snapshot " + std::to_string(s.index()) +
                                ", epoch " + std::to_string(epoch) + " (trace length " +
                                std::to_string(res.loss_trace.size()) + ")");
        }
        res.loss_trace.push_back(lv);
        backward(loss);
        opt.step();

        if (epoch > 0) {
            const double rel = std::abs(prev_loss - lv) / std::max(std::abs(prev_loss), 1e-12);
            converged_streak = rel < cfg.tolerance ? converged_streak + 1 : 0;
            if (converged_streak >= cfg.patience) break;
        }
        prev_loss = lv;
    }

    // Hand-off state from a forward pass with the trained parameters.
    NoGradGuard guard(params);
    res.new_state = encode_snapshot(s, features, state, params).detached_state();
    return res;
}

StreamResult train_stream(const std::vector<Snapshot>& snapshots, const Tensor& features,
                          const TrainConfig& cfg, const LabeledDataset* labels,
                          std::ostream* metrics_log) {
    if (snapshots.empty()) throw ConfigError("train_stream: no snapshots");
    const int T = static_cast<int>(snapshots.size());
    const int n_train =
        std::min(T, std::max(1, static_cast<int>(std::ceil(cfg.train_fraction * T))));
    const int num_relations = snapshots.front().num_relations();
    const int num_nodes = snapshots.front().num_nodes();

    LabelMap lm;
    if (labels) lm = build_label_map(*labels, T);
    const LabelMap* lmp = labels ? &lm : nullptr;

    Rng init_rng(cfg.seed);
    StreamResult out;
    out.params = EncoderParams::init(cfg.encoder_config(), num_relations,
                                     static_cast<int>(features.cols()), init_rng);
    out.train_snapshots = n_train;
    HierarchicalState state =
        HierarchicalState::zeros(num_relations, cfg.depth, num_nodes, cfg.hidden);
    Optimizer opt(out.params.all_params(), cfg.optimizer, cfg.learning_rate);

    for (int t = 0; t < T; ++t) {
        const Snapshot& s = snapshots[t];
        if (t < n_train) {
            SnapshotTrainResult r = train_snapshot(s, features, state, out.params, opt, cfg);
            if (metrics_log) {
                for (std::size_t e = 0; e < r.loss_trace.size(); ++e)
                    *metrics_log << "epoch " << e << " snapshot " << t << " loss "
                                 << r.loss_trace[e] << "\n";
            }
            out.loss_traces.push_back(std::move(r.loss_trace));
            NoGradGuard guard(out.params);
            EncodeResult enc = encode_snapshot(s, features, state, out.params);
            auto scores = score_snapshot(s, enc, out.params, lmp);
            out.all_scores.insert(out.all_scores.end(), scores.begin(), scores.end());
            state = std::move(r.new_state);
        } else {
            NoGradGuard guard(out.params);
            EncodeResult enc = encode_snapshot(s, features, state, out.params);
            auto scores = score_snapshot(s, enc, out.params, lmp);
            out.all_scores.insert(out.all_scores.end(), scores.begin(), scores.end());
            out.eval_scores.insert(out.eval_scores.end(), scores.begin(), scores.end());
            state = enc.detached_state();
        }
    }
    out.final_state = std::move(state);
    return out;
}

std::vector<ScoredEdge> score_stream(const std::vector<Snapshot>& snapshots,
                                     const Tensor& features, const EncoderParams& params,
                                     const HierarchicalState& initial_state,
                                     const LabeledDataset* labels) {
    LabelMap lm;
    if (labels) lm = build_label_map(*labels, static_cast<int>(snapshots.size()));
    const LabelMap* lmp = labels ? &lm : nullptr;

    NoGradGuard guard(params);
    HierarchicalState state = initial_state;
    std::vector<ScoredEdge> out;
    for (const Snapshot& s : snapshots) {
        EncodeResult enc = encode_snapshot(s, features, state, params);
        auto scores = score_snapshot(s, enc, params, lmp);
        out.insert(out.end(), scores.begin(), scores.end());
        state = enc.detached_state();
    }
    return out;
}

TrainConfig grid_search(const std::vector<GridPoint>& grid, const std::vector<Snapshot>& snapshots,
                        const Tensor& features, const TrainConfig& base,
                        const LabeledDataset& labels) {
    if (grid.empty()) throw ConfigError("grid_search: empty grid");
    std::vector<GridPoint> points = grid;
    std::sort(points.begin(), points.end());

    TrainConfig best = base;
    double best_auc = -1.0;
    for (const GridPoint& p : points) {
        TrainConfig cfg = base;
        cfg.depth = p.depth;
        cfg.learning_rate = p.learning_rate;
        cfg.gamma = p.gamma;
        StreamResult r = train_stream(snapshots, features, cfg, &labels);
        double a;
        try {
            a = auc(r.eval_scores);
        } catch (const MetricError&) {
            continue;  // single-class validation slice
        }
        if (a > best_auc) {
            best_auc = a;
            best = cfg;
        }
    }
    if (best_auc < 0.0) throw MetricError("grid_search: no grid point produced a valid AUC");
    return best;
}

Tensor feature_tensor(const MultiplexDynamicGraph& g, const std::vector<Snapshot>& snapshots) {
    const std::vector<std::vector<double>>& rows =
        g.features.empty() ? degree_features(g, snapshots) : g.features;
    const std::size_t n = rows.size();
    const std::size_t f = rows.front().size();
    std::vector<double> data;
    data.reserve(n * f);
    for (const auto& row : rows) data.insert(data.end(), row.begin(), row.end());
    return Tensor::from(std::move(data), n, f);
}

}  // namespace mxad
