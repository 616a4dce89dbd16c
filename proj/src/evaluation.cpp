#include "mxad/evaluation.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "mxad/error.hpp"

namespace mxad {

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw MetricError("auc: score/label length mismatch");
    std::size_t pos = 0, neg = 0;
    for (int l : labels) (l > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw MetricError("auc: need at least one of each class");

    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tie groups, 1-based.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] > 0) rank_sum_pos += avg_rank;
        i = j;
    }
    const double p = static_cast<double>(pos);
    return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

double auc(const std::vector<ScoredEdge>& scored) {
    std::vector<double> s;
    std::vector<int> l;
    for (const ScoredEdge& e : scored) {
        if (e.label < 0) continue;
        s.push_back(e.score);
        l.push_back(e.label);
    }
    return auc(s, l);
}

std::vector<double> event_scan(const std::vector<ScoredEdge>& scored, int num_snapshots,
                               int k) {
    if (k < 1) throw ConfigError("event scan: k must be >= 1");
    std::vector<std::vector<double>> per_snapshot(num_snapshots);
    for (const ScoredEdge& e : scored) {
        if (e.t < 0 || e.t >= num_snapshots) throw MetricError("event scan: snapshot out of range");
        per_snapshot[e.t].push_back(e.score);
    }
    std::vector<double> out(num_snapshots, 0.0);
    for (int t = 0; t < num_snapshots; ++t) {
        auto& s = per_snapshot[t];
        if (s.empty()) continue;
        const std::size_t take = std::min<std::size_t>(k, s.size());
        std::partial_sort(s.begin(), s.begin() + take, s.end(), std::greater<>());
        out[t] = std::accumulate(s.begin(), s.begin() + take, 0.0) / static_cast<double>(take);
    }
    return out;
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
    std::size_t pos = 0, neg = 0;
    for (int l : labels) (l > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0) throw MetricError("roc: need at least one of each class");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<RocPoint> pts;
    pts.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    const std::size_t n = order.size();
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] > 0 ? tp : fp)++;
            ++j;
        }
        pts.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
        i = j;
    }
    return pts;
}

void write_report(const std::vector<ScoredEdge>& scored, int num_snapshots, int top_k,
                  const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::vector<double> all_scores;
    std::vector<int> all_labels;
    for (const ScoredEdge& e : scored) {
        if (e.label < 0) continue;
        all_scores.push_back(e.score);
        all_labels.push_back(e.label);
    }

    {
        std::ofstream out(fs::path(out_dir) / "auc.tsv");
        if (!out) throw IoError("cannot write auc.tsv in " + out_dir);
        out << std::setprecision(10);
        out << "slice\tauc\tpositives\tnegatives\n";
        std::size_t pos = std::count(all_labels.begin(), all_labels.end(), 1);
        out << "pooled\t" << auc(all_scores, all_labels) << "\t" << pos << "\t"
            << all_labels.size() - pos << "\n";

        int max_rel = 0;
        for (const ScoredEdge& e : scored) max_rel = std::max(max_rel, e.relation);
        for (int r = 0; r <= max_rel; ++r) {
            std::vector<double> s;
            std::vector<int> l;
            for (const ScoredEdge& e : scored)
                if (e.relation == r && e.label >= 0) {
                    s.push_back(e.score);
                    l.push_back(e.label);
                }
            const std::size_t p = std::count(l.begin(), l.end(), 1);
            if (p == 0 || p == l.size()) continue;  // single-class slice, skip
            out << "relation_" << r << "\t" << auc(s, l) << "\t" << p << "\t" << l.size() - p
                << "\n";
        }

        for (AnomalyKind kind : {AnomalyKind::LayerIndependent, AnomalyKind::LayerDependent}) {
            // Anomalies of one kind against all normal edges.
            std::vector<double> s;
            std::vector<int> l;
            for (const ScoredEdge& e : scored) {
                if (e.label == 0) {
                    s.push_back(e.score);
                    l.push_back(0);
                } else if (e.label == 1 && e.kind == kind) {
                    s.push_back(e.score);
                    l.push_back(1);
                }
            }
            const std::size_t p = std::count(l.begin(), l.end(), 1);
            if (p == 0 || p == l.size()) continue;
            out << (kind == AnomalyKind::LayerIndependent ? "kind_layer_independent"
                                                          : "kind_layer_dependent")
                << "\t" << auc(s, l) << "\t" << p << "\t" << l.size() - p << "\n";
        }
    }

    {
        std::ofstream out(fs::path(out_dir) / "roc.tsv");
        if (!out) throw IoError("cannot write roc.tsv in " + out_dir);
        out << std::setprecision(10);
        out << "fpr\ttpr\n";
        for (const RocPoint& p : roc_points(all_scores, all_labels))
            out << p.fpr << "\t" << p.tpr << "\n";
    }

    {
        std::ofstream out(fs::path(out_dir) / "events.tsv");
        if (!out) throw IoError("cannot write events.tsv in " + out_dir);
        out << std::setprecision(10);
        out << "snapshot\tevent_score\n";
        auto events = event_scan(scored, num_snapshots, top_k);
        for (int t = 0; t < num_snapshots; ++t) out << t << "\t" << events[t] << "\n";
    }
}

}  // namespace mxad
