#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "udemd/error.hpp"

namespace udemd {

struct Edge {
    std::size_t src = 0;
    std::size_t dst = 0;
    double weight = 1.0;
};

/// Non-fatal observations collected while building a graph.
struct LoadReport {
    std::size_t self_loops = 0;
    std::size_t mirrored = 0;       // edges given in one direction only
    std::size_t duplicates = 0;     // repeated records with identical weight
    std::size_t zero_weight = 0;    // records dropped because weight == 0
};

/// Immutable weighted undirected graph in compressed-row form. Every
/// undirected edge {i, j} is stored in both rows; a self-loop once.
class Graph {
public:
    Graph() = default;

    /// Builds the symmetric adjacency from edge records. A record given in
    /// one direction is mirrored; both directions with different weights
    /// are rejected. The graph must be connected.
    static Graph from_edges(std::size_t node_count, std::span<const Edge> edges, LoadReport* report = nullptr) {
        require(node_count > 0, ErrorCode::InvalidArgument, "graph needs at least one node");
        LoadReport local;
        std::map<std::pair<std::size_t, std::size_t>, double> directed;
        for (const Edge& e : edges) {
            require(e.src < node_count && e.dst < node_count, ErrorCode::InvalidIndex,
                    "edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ") outside 0.." +
                        std::to_string(node_count - 1));
            require(std::isfinite(e.weight), ErrorCode::ParseError, "edge weight is not finite");
            require(e.weight >= 0.0, ErrorCode::NegativeWeight,
                    "edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) + ") has negative weight");
            auto [it, inserted] = directed.emplace(std::make_pair(e.src, e.dst), e.weight);
            if (!inserted) {
                require(it->second == e.weight, ErrorCode::AsymmetricWeights,
                        "edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                            ") repeated with a different weight");
                ++local.duplicates;
            }
        }

        std::map<std::pair<std::size_t, std::size_t>, double> undirected;
        for (const auto& [key, w] : directed) {
            const auto [a, b] = key;
            if (a == b) {
                if (w > 0.0) {
                    ++local.self_loops;
                    undirected[key] = w;
                } else {
                    ++local.zero_weight;
                }
                continue;
            }
            auto rev = directed.find({b, a});
            if (rev == directed.end()) {
                ++local.mirrored;
            } else {
                require(rev->second == w, ErrorCode::AsymmetricWeights,
                        "edge (" + std::to_string(a) + ", " + std::to_string(b) + ") has weight " +
                            std::to_string(w) + " but the reverse has " + std::to_string(rev->second));
            }
            const auto lo = std::min(a, b), hi = std::max(a, b);
            if (w > 0.0) {
                undirected[{lo, hi}] = w;
            } else {
                ++local.zero_weight;
            }
        }

        Graph g;
        g.n_ = node_count;
        std::vector<std::size_t> counts(node_count, 0);
        for (const auto& [key, w] : undirected) {
            ++counts[key.first];
            if (key.first != key.second) ++counts[key.second];
        }
        g.row_ptr_.assign(node_count + 1, 0);
        for (std::size_t i = 0; i < node_count; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + counts[i];
        g.cols_.resize(g.row_ptr_.back());
        g.weights_.resize(g.row_ptr_.back());
        std::vector<std::size_t> cursor(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
        std::vector<std::vector<std::pair<std::size_t, double>>> rows(node_count);
        for (const auto& [key, w] : undirected) {
            rows[key.first].emplace_back(key.second, w);
            if (key.first != key.second) rows[key.second].emplace_back(key.first, w);
        }
        for (std::size_t i = 0; i < node_count; ++i) {
            std::sort(rows[i].begin(), rows[i].end());
            for (const auto& [j, w] : rows[i]) {
                g.cols_[cursor[i]] = j;
                g.weights_[cursor[i]] = w;
                ++cursor[i];
            }
        }
        g.edge_count_ = undirected.size();
        g.degree_.assign(node_count, 0.0);
        for (std::size_t i = 0; i < node_count; ++i)
            for (std::size_t p = g.row_ptr_[i]; p < g.row_ptr_[i + 1]; ++p) g.degree_[i] += g.weights_[p];

        require(g.connected(), ErrorCode::DisconnectedGraph,
                "graph with " + std::to_string(node_count) + " nodes is not connected");
        if (report) *report = local;
        return g;
    }

    std::size_t node_count() const noexcept { return n_; }
    /// Undirected edges, self-loops counted once.
    std::size_t edge_count() const noexcept { return edge_count_; }
    std::size_t nnz() const noexcept { return cols_.size(); }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> neighbor_weights(std::size_t i) const {
        return {weights_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    double weight(std::size_t i, std::size_t j) const {
        auto nb = neighbors(i);
        auto it = std::lower_bound(nb.begin(), nb.end(), j);
        if (it == nb.end() || *it != j) return 0.0;
        return neighbor_weights(i)[static_cast<std::size_t>(it - nb.begin())];
    }

    double degree(std::size_t i) const { return degree_[i]; }
    const std::vector<double>& degrees() const noexcept { return degree_; }

    const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
    const std::vector<std::size_t>& col_indices() const noexcept { return cols_; }
    const std::vector<double>& values() const noexcept { return weights_; }

    bool unit_weights() const {
        return std::all_of(weights_.begin(), weights_.end(), [](double w) { return w == 1.0; });
    }

    bool has_self_loops() const {
        for (std::size_t i = 0; i < n_; ++i)
            if (weight(i, i) > 0.0) return true;
        return false;
    }

    /// Undirected edge list with src <= dst.
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(edge_count_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
                if (cols_[p] >= i) out.push_back({i, cols_[p], weights_[p]});
        return out;
    }

    /// FNV-1a over the adjacency arrays; identifies the ground space an
    /// embedding was computed on.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t v) {
            for (int b = 0; b < 8; ++b) {
                h ^= (v >> (8 * b)) & 0xffU;
                h *= 1099511628211ULL;
            }
        };
        mix(n_);
        for (auto p : row_ptr_) mix(p);
        for (auto c : cols_) mix(c);
        for (double w : weights_) {
            std::uint64_t bits;
            static_assert(sizeof bits == sizeof w);
            std::memcpy(&bits, &w, sizeof bits);
            mix(bits);
        }
        return h;
    }

private:
    bool connected() const {
        if (n_ == 0) return false;
        std::vector<char> seen(n_, 0);
        std::vector<std::size_t> stack{0};
        seen[0] = 1;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (auto v : neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++reached;
                    stack.push_back(v);
                }
            }
        }
        return reached == n_;
    }

    std::size_t n_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::size_t> cols_;
    std::vector<double> weights_;
    std::vector<double> degree_;
};

/// Parsed contents of an edge-list file before graph construction.
struct EdgeList {
    std::optional<std::size_t> declared_nodes;
    std::vector<Edge> edges;

    std::size_t inferred_nodes() const {
        std::size_t n = 0;
        for (const auto& e : edges) n = std::max({n, e.src + 1, e.dst + 1});
        return n;
    }
};

/// Reads `src<TAB>dst[<TAB>weight]` records. Lines starting with `#` are
/// comments; an optional `%nodes <n>` line declares the node count.
inline EdgeList read_edge_list(std::istream& in) {
    EdgeList out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line.substr(first));
        if (line[first] == '%') {
            std::string key;
            long long n = -1;
            fields >> key >> n;
            require(key == "%nodes" && fields && n > 0, ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": expected '%nodes <n>'");
            out.declared_nodes = static_cast<std::size_t>(n);
            continue;
        }
        long long src = -1, dst = -1;
        double w = 1.0;
        fields >> src >> dst;
        require(static_cast<bool>(fields), ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": expected 'src dst [weight]'");
        if (!(fields >> w)) {
            require(fields.eof(), ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad weight");
            w = 1.0;
        }
        std::string rest;
        require(!(fields >> rest), ErrorCode::ParseError,
                "line " + std::to_string(line_no) + ": trailing fields");
        require(src >= 0 && dst >= 0, ErrorCode::InvalidIndex,
                "line " + std::to_string(line_no) + ": negative node index");
        out.edges.push_back({static_cast<std::size_t>(src), static_cast<std::size_t>(dst), w});
    }
    return out;
}

inline Graph load_graph(std::istream& in, LoadReport* report = nullptr) {
    const EdgeList list = read_edge_list(in);
    const std::size_t n = list.declared_nodes.value_or(list.inferred_nodes());
    return Graph::from_edges(n, list.edges, report);
}

inline Graph load_graph_file(const std::string& path, LoadReport* report = nullptr) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::IoError, "cannot open graph file '" + path + "'");
    return load_graph(in, report);
}

inline void write_edge_list(std::ostream& out, const Graph& g) {
    out << "%nodes " << g.node_count() << '\n';
    out << std::setprecision(17);
    for (const auto& e : g.edges()) out << e.src << '\t' << e.dst << '\t' << e.weight << '\n';
}

/// Shortest-path distances from a set of sources; row s holds d(sources[s], .).
class GeodesicTable {
public:
    GeodesicTable(std::vector<std::size_t> sources, std::size_t nodes)
        : sources_(std::move(sources)), nodes_(nodes), dist_(sources_.size() * nodes, 0.0) {}

    std::size_t source_count() const noexcept { return sources_.size(); }
    std::size_t node_count() const noexcept { return nodes_; }
    const std::vector<std::size_t>& sources() const noexcept { return sources_; }

    std::span<const double> row(std::size_t s) const { return {dist_.data() + s * nodes_, nodes_}; }
    std::span<double> row(std::size_t s) { return {dist_.data() + s * nodes_, nodes_}; }
    double operator()(std::size_t s, std::size_t v) const { return dist_[s * nodes_ + v]; }

    double max_distance() const { return dist_.empty() ? 0.0 : *std::max_element(dist_.begin(), dist_.end()); }

private:
    std::vector<std::size_t> sources_;
    std::size_t nodes_;
    std::vector<double> dist_;
};

/// Exact shortest paths: breadth-first search on unit-weight graphs,
/// binary-heap Dijkstra otherwise.
inline GeodesicTable geodesic_distances(const Graph& g, std::vector<std::size_t> sources) {
    const std::size_t n = g.node_count();
    for (auto s : sources) require(s < n, ErrorCode::IndexOutOfRange, "geodesic source out of range");
    GeodesicTable table(std::move(sources), n);
    const bool unit = g.unit_weights();
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < table.source_count(); ++s) {
        auto dist = table.row(s);
        std::fill(dist.begin(), dist.end(), inf);
        const auto src = table.sources()[s];
        dist[src] = 0.0;
        if (unit) {
            std::vector<std::size_t> frontier{src}, next;
            while (!frontier.empty()) {
                next.clear();
                for (auto u : frontier)
                    for (auto v : g.neighbors(u))
                        if (dist[v] == inf) {
                            dist[v] = dist[u] + 1.0;
                            next.push_back(v);
                        }
                frontier.swap(next);
            }
        } else {
            using Item = std::pair<double, std::size_t>;
            std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
            heap.emplace(0.0, src);
            while (!heap.empty()) {
                const auto [d, u] = heap.top();
                heap.pop();
                if (d > dist[u]) continue;
                auto nb = g.neighbors(u);
                auto wt = g.neighbor_weights(u);
                for (std::size_t p = 0; p < nb.size(); ++p) {
                    const double cand = d + wt[p];
                    if (cand < dist[nb[p]]) {
                        dist[nb[p]] = cand;
                        heap.emplace(cand, nb[p]);
                    }
                }
            }
        }
    }
    return table;
}

inline GeodesicTable all_pairs_geodesics(const Graph& g) {
    std::vector<std::size_t> all(g.node_count());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return geodesic_distances(g, std::move(all));
}

} // namespace udemd
