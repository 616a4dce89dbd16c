#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mxad/graph.hpp"

namespace mxad {

enum class AnomalyKind { None, LayerIndependent, LayerDependent };

// Graph plus ground-truth injection labels; labels[i] and kinds[i] describe
// graph.edges[i]. Original edges are never removed or relabeled.
struct LabeledDataset {
    MultiplexDynamicGraph graph;
    std::vector<int> labels;          // 0 normal, 1 injected
    std::vector<AnomalyKind> kinds;   // None for normal edges
    double injection_ratio = 0.0;
};

struct SynthConfig {
    int num_nodes = 200;
    int num_relations = 3;
    int num_snapshots = 20;
    int num_communities = 4;
    double p_in = 0.1;
    double p_out = 0.005;
    double layer_corr = 0.8;  // probability a relation > 0 copies a relation-0 edge
    std::uint64_t seed = 0;
};

// Planted k-community multiplex stream. Relation 0 samples intra-community
// pairs w.p. p_in and inter w.p. p_out per snapshot; each other relation
// copies each relation-0 edge w.p. layer_corr and otherwise redraws a random
// pair of the same intra/inter type, so pairs recur across layers.
MultiplexDynamicGraph synth_generate(const SynthConfig& cfg);

// Two-group injection: half the injected edges are uniform random non-edges
// within one relation-snapshot, half are pairs absent from every relation of
// the whole pre-injection graph, placed into a random relation. Timestamps
// are uniform within the target snapshot window.
LabeledDataset inject_anomalies(const MultiplexDynamicGraph& g, double ratio,
                                int num_snapshots, std::uint64_t seed);

// burst_size random non-edges added to snapshot t_star only.
LabeledDataset inject_burst(const MultiplexDynamicGraph& g, int t_star, int burst_size,
                            int num_snapshots, std::uint64_t seed);

// Companion label file: "u v r tau label kind", one line per edge.
void write_label_file(const LabeledDataset& d, const std::string& path);
LabeledDataset load_labeled_dataset(const std::string& edge_path, const std::string& label_path,
                                    int num_nodes, int num_relations);

}  // namespace mxad
