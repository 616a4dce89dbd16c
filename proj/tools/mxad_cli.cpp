// Command-line pipeline: synth -> inject -> train -> score -> eval -> event.
// Each subcommand is a deterministic, file-mediated wrapper over the library.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mxad/bench.hpp"
#include "mxad/encoder.hpp"
#include "mxad/error.hpp"
#include "mxad/evaluation.hpp"
#include "mxad/graph.hpp"
#include "mxad/scoring.hpp"
#include "mxad/trainer.hpp"

namespace fs = std::filesystem;
using namespace mxad;

namespace {

struct DatasetArgs {
    std::string edges;
    std::string labels;
    std::string features;
    int num_nodes = 0;
    int num_relations = 0;
    int num_snapshots = 0;

    void attach(CLI::App* cmd, bool need_labels) {
        cmd->add_option("--edges", edges, "edge-list file")->required();
        if (need_labels) cmd->add_option("--labels", labels, "label file");
        cmd->add_option("--features", features, "optional node feature file");
        cmd->add_option("--nodes", num_nodes, "number of nodes")->required();
        cmd->add_option("--relations", num_relations, "number of relations")->required();
        cmd->add_option("--snapshots", num_snapshots, "number of snapshots")->required();
    }
};

int run(int argc, char** argv) {
    CLI::App app{"edge anomaly detection for multiplex dynamic networks"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a planted-community multiplex stream");
    SynthConfig scfg;
    std::string out_path = "edges.tsv";
    synth->add_option("--nodes", scfg.num_nodes, "number of nodes");
    synth->add_option("--relations", scfg.num_relations, "number of relations");
    synth->add_option("--snapshots", scfg.num_snapshots, "number of snapshots");
    synth->add_option("--communities", scfg.num_communities, "number of planted communities");
    synth->add_option("--p-in", scfg.p_in, "intra-community edge probability");
    synth->add_option("--p-out", scfg.p_out, "inter-community edge probability");
    synth->add_option("--rho", scfg.layer_corr, "cross-layer edge copy probability");
    synth->add_option("--seed", scfg.seed, "random seed");
    synth->add_option("--out", out_path, "output edge-list path");

    // inject
    auto* inject = app.add_subcommand("inject", "inject labeled anomalous edges");
    std::string in_edges, inj_edges_out = "injected_edges.tsv", inj_labels_out = "labels.tsv";
    int inj_nodes = 0, inj_relations = 0, inj_snapshots = 0;
    double ratio = 0.05;
    std::uint64_t inj_seed = 0;
    int burst_at = -1, burst_size = 0;
    inject->add_option("--edges", in_edges, "input edge-list")->required();
    inject->add_option("--nodes", inj_nodes, "number of nodes")->required();
    inject->add_option("--relations", inj_relations, "number of relations")->required();
    inject->add_option("--snapshots", inj_snapshots, "number of snapshots")->required();
    inject->add_option("--ratio", ratio, "injected fraction of |E|");
    inject->add_option("--seed", inj_seed, "random seed");
    inject->add_option("--burst-at", burst_at, "burst mode: target snapshot");
    inject->add_option("--burst-size", burst_size, "burst mode: number of injected edges");
    inject->add_option("--out-edges", inj_edges_out, "output edge-list path");
    inject->add_option("--out-labels", inj_labels_out, "output label file path");

    // train
    auto* train = app.add_subcommand("train", "train and write a checkpoint");
    DatasetArgs train_ds;
    train_ds.attach(train, true);
    std::string config_path, ckpt_out = "model.ckpt", metrics_out;
    TrainConfig tcfg;
    train->add_option("--config", config_path, "JSON config file");
    train->add_option("--seed", tcfg.seed, "random seed (overrides config)");
    train->add_option("--checkpoint", ckpt_out, "output checkpoint path");
    train->add_option("--metrics", metrics_out, "metrics log path");
    double cli_lr = -1, cli_gamma = -1, cli_frac = -1;
    int cli_depth = -1, cli_hidden = -1;
    std::string cli_variant;
    train->add_option("--lr", cli_lr, "learning rate");
    train->add_option("--gamma", cli_gamma, "margin");
    train->add_option("--depth", cli_depth, "GNN depth");
    train->add_option("--hidden", cli_hidden, "hidden dimension");
    train->add_option("--train-fraction", cli_frac, "fraction of snapshots used for training");
    train->add_option("--variant", cli_variant, "full|mlp_update|no_attention|sum_attention");

    // score
    auto* score = app.add_subcommand("score", "score a dataset with a trained checkpoint");
    DatasetArgs score_ds;
    score_ds.attach(score, true);
    std::string score_ckpt, scores_out = "scores.tsv";
    score->add_option("--checkpoint", score_ckpt, "trained checkpoint")->required();
    score->add_option("--out", scores_out, "output score dump path");

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a score dump against labels");
    std::string eval_scores, eval_dir = "eval";
    int eval_snapshots = 0, eval_topk = 15;
    eval->add_option("--scores", eval_scores, "score dump")->required();
    eval->add_option("--snapshots", eval_snapshots, "number of snapshots")->required();
    eval->add_option("--top-k", eval_topk, "event-scan top-k");
    eval->add_option("--out", eval_dir, "output directory");

    // event
    auto* event = app.add_subcommand("event", "per-snapshot event scores from a score dump");
    std::string event_scores, event_out = "events.tsv";
    int event_snapshots = 0, event_topk = 15;
    event->add_option("--scores", event_scores, "score dump")->required();
    event->add_option("--snapshots", event_snapshots, "number of snapshots")->required();
    event->add_option("--k", event_topk, "top-k");
    event->add_option("--out", event_out, "output path");

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        write_edge_stream_file(synth_generate(scfg), out_path);
        return 0;
    }

    if (inject->parsed()) {
        MultiplexDynamicGraph g = load_edge_stream_file(in_edges, inj_nodes, inj_relations);
        LabeledDataset d = burst_at >= 0
                               ? inject_burst(g, burst_at, burst_size, inj_snapshots, inj_seed)
                               : inject_anomalies(g, ratio, inj_snapshots, inj_seed);
        write_edge_stream_file(d.graph, inj_edges_out);
        write_label_file(d, inj_labels_out);
        return 0;
    }

    if (train->parsed()) {
        TrainConfig cfg = config_path.empty() ? TrainConfig{} : load_train_config(config_path);
        if (train->count("--seed")) cfg.seed = tcfg.seed;
        if (cli_lr > 0) cfg.learning_rate = cli_lr;
        if (cli_gamma >= 0) cfg.gamma = cli_gamma;
        if (cli_depth > 0) cfg.depth = cli_depth;
        if (cli_hidden > 0) cfg.hidden = cli_hidden;
        if (cli_frac > 0) cfg.train_fraction = cli_frac;
        if (!cli_variant.empty()) cfg.variant = parse_variant(cli_variant);

        LabeledDataset labeled;
        MultiplexDynamicGraph* gp;
        const LabeledDataset* lp = nullptr;
        MultiplexDynamicGraph plain;
        if (!train_ds.labels.empty()) {
            labeled = load_labeled_dataset(train_ds.edges, train_ds.labels, train_ds.num_nodes,
                                           train_ds.num_relations);
            gp = &labeled.graph;
            lp = &labeled;
        } else {
            plain = load_edge_stream_file(train_ds.edges, train_ds.num_nodes,
                                          train_ds.num_relations);
            gp = &plain;
        }
        if (!train_ds.features.empty()) load_features_file(*gp, train_ds.features);
        auto snapshots = partition_snapshots(*gp, train_ds.num_snapshots);
        Tensor feats = feature_tensor(*gp, snapshots);

        std::ofstream metrics;
        std::ostream* mlog = nullptr;
        if (!metrics_out.empty()) {
            metrics.open(metrics_out);
            if (!metrics) throw IoError("cannot write metrics log: " + metrics_out);
            metrics << "# epoch t loss auc\n";
            mlog = &metrics;
        }
        StreamResult r = train_stream(snapshots, feats, cfg, lp, mlog);
        if (mlog && lp && !r.eval_scores.empty()) {
            try {
                *mlog << "- - - " << auc(r.eval_scores) << "\n";
            } catch (const MetricError&) {
            }
        }
        save_checkpoint(ckpt_out, r.params, r.final_state, cfg.hash());
        return 0;
    }

    if (score->parsed()) {
        Checkpoint ck = load_checkpoint(score_ckpt);
        LabeledDataset labeled;
        const LabeledDataset* lp = nullptr;
        MultiplexDynamicGraph g;
        if (!score_ds.labels.empty()) {
            labeled = load_labeled_dataset(score_ds.edges, score_ds.labels, score_ds.num_nodes,
                                           score_ds.num_relations);
            g = labeled.graph;
            lp = &labeled;
        } else {
            g = load_edge_stream_file(score_ds.edges, score_ds.num_nodes,
                                      score_ds.num_relations);
        }
        if (!score_ds.features.empty()) load_features_file(g, score_ds.features);
        auto snapshots = partition_snapshots(g, score_ds.num_snapshots);
        Tensor feats = feature_tensor(g, snapshots);
        // Fresh zero state: scoring replays the whole stream from t = 0.
        HierarchicalState state = HierarchicalState::zeros(
            ck.params.num_relations, ck.params.cfg.depth, g.num_nodes, ck.params.cfg.hidden);
        write_scores(scores_out, score_stream(snapshots, feats, ck.params, state, lp));
        return 0;
    }

    if (eval->parsed()) {
        write_report(load_scores(eval_scores), eval_snapshots, eval_topk, eval_dir);
        return 0;
    }

    if (event->parsed()) {
        auto events = event_scan(load_scores(event_scores), event_snapshots, event_topk);
        std::ofstream out(event_out);
        if (!out) throw IoError("cannot write events file: " + event_out);
        out << "snapshot\tevent_score\n";
        out.precision(10);
        for (std::size_t t = 0; t < events.size(); ++t) out << t << "\t" << events[t] << "\n";
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const mxad::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
