// SPDX-License-Identifier: Apache-2.0
//
// Undirected simple graphs: edge-list parsing, standard generators
// (path / cycle / complete / star / Erdos-Renyi / two-block SBM), and the
// degree bookkeeping every spectral routine downstream relies on.
//
// Node ids are dense 0..n-1. No self-loops, no multi-edges, no weights.

#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wavegc {

struct Graph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;  // each (u,v) with u < v, sorted, unique
    std::vector<int> degrees;
    int components = 0;

    int edge_count() const { return static_cast<int>(edges.size()); }
    bool connected() const { return components == 1; }
    int min_degree() const {
        int m = n > 0 ? degrees[0] : 0;
        for (int d : degrees) m = std::min(m, d);
        return m;
    }
    int max_degree() const {
        int m = 0;
        for (int d : degrees) m = std::max(m, d);
        return m;
    }
};

/// Builds a Graph from an edge set. Validates endpoints, rejects self-loops,
/// collapses duplicates, computes degrees and connected-component count.
inline Graph make_graph(int n, const std::vector<std::pair<int, int>>& raw_edges) {
    if (n < 1) throw std::invalid_argument("graph: node count must be >= 1");
    std::set<std::pair<int, int>> dedup;
    for (auto [u, v] : raw_edges) {
        if (u == v) throw std::invalid_argument("graph: self-loop at node " + std::to_string(u));
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw std::invalid_argument("graph: endpoint out of range: (" + std::to_string(u) +
                                        "," + std::to_string(v) + ") with n=" + std::to_string(n));
        dedup.emplace(std::min(u, v), std::max(u, v));
    }
    Graph g;
    g.n = n;
    g.edges.assign(dedup.begin(), dedup.end());
    g.degrees.assign(static_cast<std::size_t>(n), 0);
    for (auto [u, v] : g.edges) {
        ++g.degrees[static_cast<std::size_t>(u)];
        ++g.degrees[static_cast<std::size_t>(v)];
    }
    // component count via BFS
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (auto [u, v] : g.edges) {
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int s = 0; s < n; ++s) {
        if (seen[static_cast<std::size_t>(s)]) continue;
        ++g.components;
        std::queue<int> q;
        q.push(s);
        seen[static_cast<std::size_t>(s)] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)])
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = 1;
                    q.push(v);
                }
        }
    }
    return g;
}

/// Parses line-oriented edge text: `u v` per line, `#` comments, optional
/// first non-comment line `n=<int>`. Without the header, n = 1 + max id and
/// every id in 0..n-1 must appear (gaps are rejected, not compacted).
inline Graph load_edge_list(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int declared_n = -1;
    bool first_content = true;
    std::vector<std::pair<int, int>> edges;
    int max_id = -1;
    auto parse_int = [&](const std::string& tok) {
        std::size_t pos = 0;
        int v;
        try {
            v = std::stoi(tok, &pos);
        } catch (const std::exception&) {
            throw std::runtime_error("edge list: non-integer token '" + tok + "' at line " +
                                     std::to_string(lineno));
        }
        if (pos != tok.size())
            throw std::runtime_error("edge list: non-integer token '" + tok + "' at line " +
                                     std::to_string(lineno));
        return v;
    };
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!(ls >> a)) continue;  // blank
        if (first_content && a.rfind("n=", 0) == 0) {
            declared_n = parse_int(a.substr(2));
            if (declared_n < 1)
                throw std::runtime_error("edge list: header n must be >= 1 at line " +
                                         std::to_string(lineno));
            first_content = false;
            if (ls >> extra)
                throw std::runtime_error("edge list: trailing token after header at line " +
                                         std::to_string(lineno));
            continue;
        }
        first_content = false;
        if (!(ls >> b))
            throw std::runtime_error("edge list: expected two integers at line " +
                                     std::to_string(lineno));
        if (ls >> extra)
            throw std::runtime_error("edge list: trailing token at line " + std::to_string(lineno));
        int u = parse_int(a), v = parse_int(b);
        if (u < 0 || v < 0)
            throw std::runtime_error("edge list: negative node id at line " + std::to_string(lineno));
        if (u == v)
            throw std::runtime_error("edge list: self-loop at line " + std::to_string(lineno));
        edges.emplace_back(u, v);
        max_id = std::max(max_id, std::max(u, v));
    }
    if (edges.empty() && declared_n < 0) throw std::runtime_error("edge list: no edges");
    int n = declared_n >= 0 ? declared_n : max_id + 1;
    if (declared_n < 0) {
        // dense-id check: every id below the max must occur somewhere
        std::vector<char> present(static_cast<std::size_t>(n), 0);
        for (auto [u, v] : edges) {
            present[static_cast<std::size_t>(u)] = 1;
            present[static_cast<std::size_t>(v)] = 1;
        }
        for (int i = 0; i < n; ++i)
            if (!present[static_cast<std::size_t>(i)])
                throw std::runtime_error("edge list: node id " + std::to_string(i) +
                                         " missing (sparse ids are rejected; add an n= header "
                                         "to declare isolated nodes)");
    }
    return make_graph(n, edges);
}

enum class GraphKind { path, cycle, complete, star, erdos_renyi, sbm2 };

inline GraphKind graph_kind_from_string(const std::string& s) {
    if (s == "path") return GraphKind::path;
    if (s == "cycle") return GraphKind::cycle;
    if (s == "complete") return GraphKind::complete;
    if (s == "star") return GraphKind::star;
    if (s == "erdos_renyi" || s == "er") return GraphKind::erdos_renyi;
    if (s == "sbm2") return GraphKind::sbm2;
    throw std::invalid_argument("unknown graph kind: " + s);
}

struct GraphParams {
    int n = 0;
    double p = 0.0;  // erdos_renyi edge prob / sbm2 intra-block prob
    double q = 0.0;  // sbm2 inter-block prob
};

/// Deterministic graph generator. Same (kind, params, seed) always yields the
/// same edge set. erdos_renyi and sbm2 may come out disconnected; that is
/// left visible through Graph::connected() rather than silently fixed.
inline Graph generate_graph(GraphKind kind, const GraphParams& params, std::uint64_t seed = 0) {
    const int n = params.n;
    if (n < 1) throw std::invalid_argument("generate_graph: n must be >= 1");
    std::vector<std::pair<int, int>> edges;
    switch (kind) {
        case GraphKind::path:
            for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            break;
        case GraphKind::cycle:
            if (n < 3) throw std::invalid_argument("generate_graph: cycle needs n >= 3");
            for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            edges.emplace_back(0, n - 1);
            break;
        case GraphKind::complete:
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
            break;
        case GraphKind::star:
            if (n < 2) throw std::invalid_argument("generate_graph: star needs n >= 2");
            for (int i = 1; i < n; ++i) edges.emplace_back(0, i);
            break;
        case GraphKind::erdos_renyi: {
            if (params.p < 0.0 || params.p > 1.0)
                throw std::invalid_argument("generate_graph: p must be in [0,1]");
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (unif(rng) < params.p) edges.emplace_back(i, j);
            break;
        }
        case GraphKind::sbm2: {
            if (params.p < 0.0 || params.p > 1.0 || params.q < 0.0 || params.q > 1.0)
                throw std::invalid_argument("generate_graph: probabilities must be in [0,1]");
            if (n % 2 != 0) throw std::invalid_argument("generate_graph: sbm2 needs even n");
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            const int half = n / 2;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    bool same = (i < half) == (j < half);
                    if (unif(rng) < (same ? params.p : params.q)) edges.emplace_back(i, j);
                }
            break;
        }
    }
    return make_graph(n, edges);
}

/// Ground-truth block labels for sbm2: first half 0, second half 1.
inline std::vector<int> sbm2_labels(int n) {
    if (n % 2 != 0) throw std::invalid_argument("sbm2_labels: n must be even");
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i < n / 2 ? 0 : 1;
    return labels;
}

}  // namespace wavegc
