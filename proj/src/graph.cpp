#include "mxad/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "mxad/error.hpp"

namespace mxad {

Snapshot::Snapshot(int index, int num_nodes, int num_relations)
    : index_(index), num_nodes_(num_nodes), num_relations_(num_relations) {
    adj_.assign(num_relations, std::vector<std::vector<std::pair<int, double>>>(num_nodes));
}

void Snapshot::add_edge(int u, int v, int relation, double norm_time) {
    edges_.push_back({u, v, relation, norm_time});
    adj_[relation][u].emplace_back(v, norm_time);
    adj_[relation][v].emplace_back(u, norm_time);
}

std::vector<SnapshotEdge> Snapshot::relation_edges(int r) const {
    std::vector<SnapshotEdge> out;
    for (const SnapshotEdge& e : edges_)
        if (e.relation == r) out.push_back(e);
    return out;
}

const std::vector<std::pair<int, double>>& Snapshot::neighbors(int u, int r) const {
    if (u < 0 || u >= num_nodes_ || r < 0 || r >= num_relations_) {
        throw Error("neighbors(" + std::to_string(u) + ", " + std::to_string(r) +
                    ") out of range");
    }
    return adj_[r][u];
}

int Snapshot::degree(int u, int r) const { return static_cast<int>(neighbors(u, r).size()); }

bool Snapshot::has_edge(int u, int v, int r) const {
    const auto& nb = neighbors(u, r);
    for (const auto& [w, t] : nb)
        if (w == v) return true;
    return false;
}

namespace {

std::vector<std::string> split_fields(std::string line) {
    for (char& c : line)
        if (c == ',') c = ' ';
    std::istringstream is(line);
    std::vector<std::string> out;
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace

MultiplexDynamicGraph load_edge_stream(std::istream& in, int num_nodes, int num_relations) {
    MultiplexDynamicGraph g;
    g.num_nodes = num_nodes;
    g.num_relations = num_relations;
    std::set<std::tuple<int, int, int, double>> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (fields.size() != 4) {
            throw ValidationError("line " + std::to_string(lineno) + ": expected 4 fields, got " +
                                  std::to_string(fields.size()));
        }
        int u, v, r;
        double tau;
        try {
            u = std::stoi(fields[0]);
            v = std::stoi(fields[1]);
            r = std::stoi(fields[2]);
            tau = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw ValidationError("line " + std::to_string(lineno) + ": unparsable record");
        }
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
            throw ValidationError("line " + std::to_string(lineno) + ": node id out of range");
        }
        if (r < 0 || r >= num_relations) {
            throw ValidationError("line " + std::to_string(lineno) +
                                  ": relation id out of range");
        }
        if (u == v) {
            throw ValidationError("line " + std::to_string(lineno) + ": self-loop rejected");
        }
        if (u > v) std::swap(u, v);
        if (seen.insert({u, v, r, tau}).second) g.edges.push_back({u, v, r, tau});
    }
    return g;
}

MultiplexDynamicGraph load_edge_stream_file(const std::string& path, int num_nodes,
                                            int num_relations) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open edge list: " + path);
    return load_edge_stream(in, num_nodes, num_relations);
}

void load_features_file(MultiplexDynamicGraph& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open feature file: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        std::vector<double> row;
        for (const auto& f : fields) {
            try {
                row.push_back(std::stod(f));
            } catch (const std::exception&) {
                throw ValidationError("feature line " + std::to_string(lineno) +
                                      ": unparsable value");
            }
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw ValidationError("feature line " + std::to_string(lineno) +
                                  ": inconsistent column count");
        }
        rows.push_back(std::move(row));
    }
    if (static_cast<int>(rows.size()) != g.num_nodes) {
        throw ValidationError("feature file has " + std::to_string(rows.size()) +
                              " rows for " + std::to_string(g.num_nodes) + " nodes");
    }
    g.features = std::move(rows);
}

void write_edge_stream_file(const MultiplexDynamicGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write edge list: " + path);
    out << "# u v r tau\n";
    out << std::setprecision(17);
    for (const TimedEdge& e : g.edges)
        out << e.u << " " << e.v << " " << e.relation << " " << e.time << "\n";
    if (!out) throw IoError("failed writing edge list: " + path);
}

std::vector<Snapshot> partition_snapshots(const MultiplexDynamicGraph& g, int num_snapshots) {
    if (num_snapshots < 1) throw ConfigError("num_snapshots must be >= 1");
    double tmin = 0.0, tmax = 0.0;
    if (!g.edges.empty()) {
        tmin = tmax = g.edges.front().time;
        for (const TimedEdge& e : g.edges) {
            tmin = std::min(tmin, e.time);
            tmax = std::max(tmax, e.time);
        }
    }
    const double range = tmax - tmin;
    std::vector<Snapshot> out;
    out.reserve(num_snapshots);
    for (int t = 0; t < num_snapshots; ++t)
        out.emplace_back(t, g.num_nodes, g.num_relations);
    for (const TimedEdge& e : g.edges) {
        int bucket = 0;
        double norm = 0.0;
        if (range > 0.0) {
            norm = (e.time - tmin) / range;
            bucket = std::min(num_snapshots - 1,
                              static_cast<int>(norm * num_snapshots));
        }
        out[bucket].add_edge(e.u, e.v, e.relation, norm);
    }
    return out;
}

std::vector<std::vector<double>> degree_features(const MultiplexDynamicGraph& g,
                                                 const std::vector<Snapshot>& snapshots) {
    const int n = g.num_nodes;
    const int L = g.num_relations;
    std::vector<std::vector<double>> feats(n, std::vector<double>(2 + L, 0.0));
    if (snapshots.empty()) {
        for (auto& row : feats) row[0] = 1.0;
        return feats;
    }
    const Snapshot& s0 = snapshots.front();
    int max_deg = 1;
    std::vector<int> total(n, 0);
    for (int u = 0; u < n; ++u) {
        for (int r = 0; r < L; ++r) total[u] += s0.degree(u, r);
        max_deg = std::max(max_deg, total[u]);
    }
    for (int u = 0; u < n; ++u) {
        feats[u][0] = 1.0;
        feats[u][1] = static_cast<double>(total[u]) / max_deg;
        for (int r = 0; r < L; ++r)
            feats[u][2 + r] = static_cast<double>(s0.degree(u, r)) / max_deg;
    }
    return feats;
}

}  // namespace mxad
