#include "mxad/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include "mxad/error.hpp"
#include "mxad/rng.hpp"

namespace mxad {

namespace {

int community_of(int u, int n, int k) { return static_cast<int>(static_cast<long long>(u) * k / n); }

std::pair<int, int> canonical(int u, int v) { return u < v ? std::make_pair(u, v) : std::make_pair(v, u); }

struct TimeWindow {
    double tmin = 0.0;
    double range = 0.0;
    int num_snapshots = 1;

    int bucket(double tau) const {
        if (range <= 0.0) return 0;
        return std::min(num_snapshots - 1,
                        static_cast<int>((tau - tmin) / range * num_snapshots));
    }
    double sample_in(int t, Rng& rng) const {
        if (range <= 0.0) return tmin;
        const double w = range / num_snapshots;
        return tmin + t * w + rng.uniform() * w * 0.999;
    }
};

TimeWindow window_of(const MultiplexDynamicGraph& g, int num_snapshots) {
    TimeWindow w;
    w.num_snapshots = num_snapshots;
    if (g.edges.empty()) return w;
    double tmin = g.edges.front().time, tmax = tmin;
    for (const TimedEdge& e : g.edges) {
        tmin = std::min(tmin, e.time);
        tmax = std::max(tmax, e.time);
    }
    w.tmin = tmin;
    w.range = tmax - tmin;
    return w;
}

}  // namespace

MultiplexDynamicGraph synth_generate(const SynthConfig& cfg) {
    if (cfg.num_nodes < 1 || cfg.num_relations < 1 || cfg.num_snapshots < 1 ||
        cfg.num_communities < 1) {
        throw ConfigError("synth: counts must be >= 1");
    }
    if (!(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0)) {
        throw ConfigError("synth: require 0 <= p_out < p_in <= 1");
    }
    if (cfg.layer_corr < 0.0 || cfg.layer_corr > 1.0) {
        throw ConfigError("synth: layer_corr must be in [0, 1]");
    }
    if (cfg.num_communities > cfg.num_nodes) {
        throw ConfigError("synth: more communities than nodes");
    }

    const int n = cfg.num_nodes, k = cfg.num_communities;
    Rng rng(cfg.seed);
    MultiplexDynamicGraph g;
    g.num_nodes = n;
    g.num_relations = cfg.num_relations;

    for (int t = 0; t < cfg.num_snapshots; ++t) {
        std::vector<std::pair<int, int>> base;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v) {
                const bool intra = community_of(u, n, k) == community_of(v, n, k);
                if (rng.bernoulli(intra ? cfg.p_in : cfg.p_out)) base.emplace_back(u, v);
            }
        for (const auto& [u, v] : base) g.edges.push_back({u, v, 0, double(t)});

        for (int r = 1; r < cfg.num_relations; ++r) {
            std::set<std::pair<int, int>> used;
            for (const auto& [u, v] : base) {
                std::pair<int, int> e{u, v};
                if (!rng.bernoulli(cfg.layer_corr)) {
                    // Redraw a pair of the same intra/inter type.
                    const bool intra = community_of(u, n, k) == community_of(v, n, k);
                    for (int tries = 0; tries < 1000; ++tries) {
                        int a = static_cast<int>(rng.below(n));
                        int b = static_cast<int>(rng.below(n));
                        if (a == b) continue;
                        auto cand = canonical(a, b);
                        const bool cintra =
                            community_of(cand.first, n, k) == community_of(cand.second, n, k);
                        if (cintra == intra && !used.count(cand)) {
                            e = cand;
                            break;
                        }
                    }
                }
                if (used.insert(e).second)
                    g.edges.push_back({e.first, e.second, r, double(t)});
            }
        }
    }
    return g;
}

namespace {

LabeledDataset make_labeled(const MultiplexDynamicGraph& g) {
    LabeledDataset d;
    d.graph = g;
    d.labels.assign(g.edges.size(), 0);
    d.kinds.assign(g.edges.size(), AnomalyKind::None);
    return d;
}

}  // namespace

LabeledDataset inject_anomalies(const MultiplexDynamicGraph& g, double ratio, int num_snapshots,
                                std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio <= 0.5)) throw ConfigError("injection ratio must be in (0, 0.5]");
    const long long total = std::llround(ratio * static_cast<double>(g.edges.size()));
    const long long n_dep = total / 2;
    const long long n_ind = total - n_dep;

    const TimeWindow win = window_of(g, num_snapshots);

    // Per (relation, snapshot) pair sets and the global pre-injection pair set.
    std::vector<std::vector<std::set<std::pair<int, int>>>> layer_edges(
        g.num_relations, std::vector<std::set<std::pair<int, int>>>(num_snapshots));
    std::set<std::pair<int, int>> any_relation;
    for (const TimedEdge& e : g.edges) {
        layer_edges[e.relation][win.bucket(e.time)].insert({e.u, e.v});
        any_relation.insert({e.u, e.v});
    }

    LabeledDataset d = make_labeled(g);
    d.injection_ratio = ratio;
    Rng draw = Rng(seed).fork(0x1a6e);

    auto add = [&](int u, int v, int r, int t, AnomalyKind kind) {
        const double tau = win.sample_in(t, draw);
        d.graph.edges.push_back({u, v, r, tau});
        d.labels.push_back(1);
        d.kinds.push_back(kind);
        layer_edges[r][t].insert({u, v});
    };

    long long budget = 100 * std::max<long long>(total, 1);

    // Group 1: uniform random non-edge within one chosen relation-snapshot.
    for (long long i = 0; i < n_ind;) {
        if (--budget < 0) throw GenerationError("injection: retry bound exceeded");
        int u = static_cast<int>(draw.below(g.num_nodes));
        int v = static_cast<int>(draw.below(g.num_nodes));
        if (u == v) continue;
        auto [a, b] = canonical(u, v);
        int r = static_cast<int>(draw.below(g.num_relations));
        int t = static_cast<int>(draw.below(num_snapshots));
        if (layer_edges[r][t].count({a, b})) continue;
        add(a, b, r, t, AnomalyKind::LayerIndependent);
        ++i;
    }

    // Group 2: pair absent from every relation of the pre-injection graph.
    std::set<std::pair<int, int>> dep_used;
    for (long long i = 0; i < n_dep;) {
        if (--budget < 0) throw GenerationError("injection: retry bound exceeded");
        int u = static_cast<int>(draw.below(g.num_nodes));
        int v = static_cast<int>(draw.below(g.num_nodes));
        if (u == v) continue;
        auto pair = canonical(u, v);
        if (any_relation.count(pair) || dep_used.count(pair)) continue;
        int r = static_cast<int>(draw.below(g.num_relations));
        int t = static_cast<int>(draw.below(num_snapshots));
        dep_used.insert(pair);
        add(pair.first, pair.second, r, t, AnomalyKind::LayerDependent);
        ++i;
    }
    return d;
}

LabeledDataset inject_burst(const MultiplexDynamicGraph& g, int t_star, int burst_size,
                            int num_snapshots, std::uint64_t seed) {
    if (t_star < 0 || t_star >= num_snapshots) throw ConfigError("burst snapshot out of range");
    if (burst_size < 0) throw ConfigError("burst size must be >= 0");

    const TimeWindow win = window_of(g, num_snapshots);
    std::vector<std::set<std::pair<int, int>>> at_tstar(g.num_relations);
    for (const TimedEdge& e : g.edges)
        if (win.bucket(e.time) == t_star) at_tstar[e.relation].insert({e.u, e.v});

    LabeledDataset d = make_labeled(g);
    Rng draw = Rng(seed).fork(0xb4a5);
    long long budget = 100 * std::max(burst_size, 1);
    for (int i = 0; i < burst_size;) {
        if (--budget < 0) throw GenerationError("burst injection: retry bound exceeded");
        int u = static_cast<int>(draw.below(g.num_nodes));
        int v = static_cast<int>(draw.below(g.num_nodes));
        if (u == v) continue;
        auto [a, b] = canonical(u, v);
        int r = static_cast<int>(draw.below(g.num_relations));
        if (at_tstar[r].count({a, b})) continue;
        at_tstar[r].insert({a, b});
        d.graph.edges.push_back({a, b, r, win.sample_in(t_star, draw)});
        d.labels.push_back(1);
        d.kinds.push_back(AnomalyKind::LayerIndependent);
        ++i;
    }
    return d;
}

namespace {

const char* kind_str(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::LayerIndependent: return "indep";
        case AnomalyKind::LayerDependent: return "dep";
        default: return "-";
    }
}

AnomalyKind parse_kind(const std::string& s) {
    if (s == "indep") return AnomalyKind::LayerIndependent;
    if (s == "dep") return AnomalyKind::LayerDependent;
    if (s == "-") return AnomalyKind::None;
    throw ValidationError("unknown anomaly kind: " + s);
}

}  // namespace

void write_label_file(const LabeledDataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write label file: " + path);
    out << "# u v r tau label kind\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < d.graph.edges.size(); ++i) {
        const TimedEdge& e = d.graph.edges[i];
        out << e.u << " " << e.v << " " << e.relation << " " << e.time << " " << d.labels[i]
            << " " << kind_str(d.kinds[i]) << "\n";
    }
    if (!out) throw IoError("failed writing label file: " + path);
}

LabeledDataset load_labeled_dataset(const std::string& edge_path, const std::string& label_path,
                                    int num_nodes, int num_relations) {
    LabeledDataset d;
    d.graph = load_edge_stream_file(edge_path, num_nodes, num_relations);
    std::ifstream in(label_path);
    if (!in) throw IoError("cannot open label file: " + label_path);
    std::string line;
    int lineno = 0;
    std::size_t i = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        int u, v, r, label;
        double tau;
        std::string kind;
        if (!(is >> u >> v >> r >> tau >> label >> kind)) {
            throw ValidationError("label line " + std::to_string(lineno) + ": expected 6 fields");
        }
        if (i >= d.graph.edges.size()) {
            throw ValidationError("label file has more records than the edge list");
        }
        const TimedEdge& e = d.graph.edges[i];
        if (std::min(u, v) != e.u || std::max(u, v) != e.v || r != e.relation) {
            throw ValidationError("label line " + std::to_string(lineno) +
                                  " does not match edge list order");
        }
        d.labels.push_back(label);
        d.kinds.push_back(parse_kind(kind));
        ++i;
    }
    if (i != d.graph.edges.size()) {
        throw ValidationError("label file has fewer records than the edge list");
    }
    return d;
}

}  // namespace mxad
