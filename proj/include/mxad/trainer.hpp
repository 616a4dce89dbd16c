#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mxad/bench.hpp"
#include "mxad/encoder.hpp"
#include "mxad/graph.hpp"
#include "mxad/scoring.hpp"
#include "mxad/tensor.hpp"

namespace mxad {

struct TrainConfig {
    int depth = 2;           // GNN layers, 1..5
    int hidden = 200;
    double learning_rate = 0.01;
    double gamma = 0.5;      // margin
    double eta = 1.0;
    double mu = 0.3;
    double lambda = 5e-7;    // L2 regularization weight
    int max_epochs = 100;
    double tolerance = 1e-4; // relative loss improvement
    int patience = 3;        // consecutive converged epochs required
    std::uint64_t seed = 0;
    Variant variant = Variant::Full;
    double train_fraction = 0.5;
    std::string optimizer = "adam";  // or "sgd"
    bool share_gru_across_depths = false;
    bool batch_norm = false;

    EncoderConfig encoder_config() const;
    // Canonical key=value serialization; stable field order.
    std::string canonical() const;
    std::uint64_t hash() const;
};

TrainConfig load_train_config(const std::string& path);
void save_train_config(const TrainConfig& cfg, const std::string& path);

// Adam (default) or plain gradient descent over the flat parameter list.
class Optimizer {
   public:
    Optimizer(std::vector<Tensor> params, const std::string& kind, double lr);
    void step();

   private:
    std::vector<Tensor> params_;
    bool adam_;
    double lr_;
    long long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

struct SnapshotTrainResult {
    HierarchicalState new_state;
    std::vector<double> loss_trace;
};

// Repeats encode -> score -> margin loss -> backward -> optimizer step until
// the relative loss improvement stays under tolerance for `patience` epochs or
// the epoch cap. Updates params in place; returns the post-training state.
SnapshotTrainResult train_snapshot(const Snapshot& s, const Tensor& features,
                                   const HierarchicalState& state, EncoderParams& params,
                                   Optimizer& opt, const TrainConfig& cfg);

struct StreamResult {
    EncoderParams params;
    HierarchicalState final_state;
    std::vector<std::vector<double>> loss_traces;  // one per training snapshot
    std::vector<ScoredEdge> eval_scores;           // evaluation snapshots only
    std::vector<ScoredEdge> all_scores;            // every snapshot
    int train_snapshots = 0;
};

// Trains on the first ceil(train_fraction * T) snapshots in order; the rest
// are forward-only (states evolve, parameters frozen) and get scored. When a
// labeled dataset is given its labels are attached to the scored edges.
StreamResult train_stream(const std::vector<Snapshot>& snapshots, const Tensor& features,
                          const TrainConfig& cfg, const LabeledDataset* labels = nullptr,
                          std::ostream* metrics_log = nullptr);

// Forward-only scoring of every snapshot with fixed parameters, starting from
// the given state. Used by the score subcommand after loading a checkpoint.
std::vector<ScoredEdge> score_stream(const std::vector<Snapshot>& snapshots,
                                     const Tensor& features, const EncoderParams& params,
                                     const HierarchicalState& initial_state,
                                     const LabeledDataset* labels = nullptr);

struct GridPoint {
    int depth;
    double learning_rate;
    double gamma;

    auto operator<=>(const GridPoint&) const = default;
};

// Evaluates each grid point by validation AUC on the held-out snapshots;
// returns the argmax, ties broken by lexicographically smallest point.
TrainConfig grid_search(const std::vector<GridPoint>& grid, const std::vector<Snapshot>& snapshots,
                        const Tensor& features, const TrainConfig& base,
                        const LabeledDataset& labels);

// Node feature matrix for a dataset: loaded features or the degree fallback.
Tensor feature_tensor(const MultiplexDynamicGraph& g, const std::vector<Snapshot>& snapshots);

}  // namespace mxad
