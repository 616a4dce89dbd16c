#pragma once

#include <string>
#include <vector>

#include "mxad/scoring.hpp"

namespace mxad {

// Probability a uniformly random (anomalous, normal) pair is ordered
// correctly, ties counted one half. Sort-and-rank implementation.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);
double auc(const std::vector<ScoredEdge>& scored);

// Per-snapshot mean of the k largest scores across all relations; mean of all
// when a snapshot has fewer than k edges, 0 when it has none.
std::vector<double> event_scan(const std::vector<ScoredEdge>& scored, int num_snapshots,
                               int k = 15);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

// Writes auc.tsv (pooled + per-relation + per-kind), roc.tsv and events.tsv
// under out_dir.
void write_report(const std::vector<ScoredEdge>& scored, int num_snapshots, int top_k,
                  const std::string& out_dir);

}  // namespace mxad
