#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mxad {

struct TimedEdge {
    int u = 0;
    int v = 0;  // canonical u < v
    int relation = 0;
    double time = 0.0;
};

// Timestamped, typed, undirected edge stream over a fixed node set with one
// subgraph per relation and optional node features.
struct MultiplexDynamicGraph {
    int num_nodes = 0;
    int num_relations = 0;
    std::vector<TimedEdge> edges;
    // num_nodes x feature_dim, row i = node i. Empty when no features given.
    std::vector<std::vector<double>> features;

    std::size_t feature_dim() const { return features.empty() ? 0 : features.front().size(); }
};

struct SnapshotEdge {
    int u = 0;
    int v = 0;
    int relation = 0;
    double norm_time = 0.0;  // (tau - tau_min) / (tau_max - tau_min), 0 on zero range
};

// Static multiplex graph of all edges whose timestamp falls in bucket t.
class Snapshot {
   public:
    Snapshot(int index, int num_nodes, int num_relations);

    void add_edge(int u, int v, int relation, double norm_time);

    int index() const { return index_; }
    int num_nodes() const { return num_nodes_; }
    int num_relations() const { return num_relations_; }

    const std::vector<SnapshotEdge>& edges() const { return edges_; }
    std::vector<SnapshotEdge> relation_edges(int r) const;

    // Neighbor list of u in relation r with the edge's normalized time.
    const std::vector<std::pair<int, double>>& neighbors(int u, int r) const;
    int degree(int u, int r) const;
    bool has_edge(int u, int v, int r) const;

   private:
    int index_;
    int num_nodes_;
    int num_relations_;
    std::vector<SnapshotEdge> edges_;
    // adj_[r][u] -> list of (neighbor, norm_time)
    std::vector<std::vector<std::vector<std::pair<int, double>>>> adj_;
};

// Parse the edge-list format: one "u v r tau" record per line, whitespace or
// comma separated, lines starting with '#' skipped. Duplicate records collapse
// to one; self-loops and out-of-range ids are rejected with the line number.
MultiplexDynamicGraph load_edge_stream(std::istream& in, int num_nodes, int num_relations);
MultiplexDynamicGraph load_edge_stream_file(const std::string& path, int num_nodes,
                                            int num_relations);

// Optional feature file: num_nodes rows of feature_dim decimals.
void load_features_file(MultiplexDynamicGraph& g, const std::string& path);

void write_edge_stream_file(const MultiplexDynamicGraph& g, const std::string& path);

// Bucket timestamps into num_snapshots equal-width windows over
// [tau_min, tau_max]; each edge lands in exactly one snapshot and keeps its
// normalized time for the GNN message concat.
std::vector<Snapshot> partition_snapshots(const MultiplexDynamicGraph& g, int num_snapshots);

// Structural fallback when no feature file is given:
// x_u = [1, deg_total(u)/max_deg, deg_0(u)/max_deg, ..., deg_{L-1}(u)/max_deg]
// with degrees taken from the first snapshot.
std::vector<std::vector<double>> degree_features(const MultiplexDynamicGraph& g,
                                                 const std::vector<Snapshot>& snapshots);

}  // namespace mxad
