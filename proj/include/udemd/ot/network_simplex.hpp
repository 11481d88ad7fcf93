#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "udemd/error.hpp"

namespace udemd::ot {

/// Primal network simplex for uncapacitated minimum-cost flow:
///
///   min sum_a cost_a x_a   s.t.  out(v) - in(v) = supply_v,  x >= 0.
///
/// The spanning-tree basis is rooted at an artificial node joined to every
/// real node by a big-M arc. Entering arcs are chosen by block pricing and
/// the leaving arc by the strongly-feasible rule (last blocking arc on the
/// cycle orientation), which prevents cycling under degeneracy.
class NetworkSimplex {
public:
    struct Arc {
        std::size_t src;
        std::size_t dst;
        double cost;
    };

    enum class Status { Optimal, Infeasible, IterationLimit };

    NetworkSimplex(std::size_t nodes, std::vector<Arc> arcs, std::vector<double> supply)
        : n_(nodes), arcs_(std::move(arcs)), supply_(std::move(supply)) {
        require(supply_.size() == n_, ErrorCode::DimensionMismatch, "supply vector size mismatch");
        for (const auto& a : arcs_)
            require(a.src < n_ && a.dst < n_ && std::isfinite(a.cost), ErrorCode::InvalidArgument, "invalid arc");
    }

    Status run(std::size_t max_iterations = 0) {
        init();
        if (max_iterations == 0) max_iterations = 50 * (arcs_.size() + n_) + 1000;
        const std::size_t total = all_arcs();
        const std::size_t block = std::max<std::size_t>(
            std::min<std::size_t>(total, 10), static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
        std::size_t next = 0;
        iterations_ = 0;
        for (;;) {
            // Block pricing: scan blocks until one contains an improving arc.
            std::size_t best = npos;
            double best_rc = -epsilon_;
            std::size_t scanned = 0, in_block = 0;
            while (scanned < total) {
                const std::size_t a = next;
                next = next + 1 == total ? 0 : next + 1;
                ++scanned;
                ++in_block;
                if (!in_tree_[a]) {
                    const double rc = reduced_cost(a);
                    if (rc < best_rc) {
                        best_rc = rc;
                        best = a;
                    }
                }
                if (in_block == block) {
                    if (best != npos) break;
                    in_block = 0;
                }
            }
            if (best == npos) break;
            if (iterations_ >= max_iterations) return status_ = Status::IterationLimit;
            pivot(best);
            ++iterations_;
        }
        const double tol = feasibility_tolerance();
        for (std::size_t v = 0; v < n_; ++v)
            if (flow_[arcs_.size() + v] > tol) return status_ = Status::Infeasible;
        return status_ = Status::Optimal;
    }

    Status status() const noexcept { return status_; }
    std::size_t iterations() const noexcept { return iterations_; }

    double flow(std::size_t arc) const { return flow_[arc]; }

    /// Flow left on the artificial arc of node v (zero at a feasible optimum
    /// up to the imbalance of the supplies).
    double artificial_flow(std::size_t v) const { return flow_[arcs_.size() + v]; }

    double total_cost() const {
        double c = 0.0;
        for (std::size_t a = 0; a < arcs_.size(); ++a) c += flow_[a] * arcs_[a].cost;
        return c;
    }

    /// Node potentials y with reduced costs cost_a + y_src - y_dst >= 0 at
    /// optimality. The dual objective is -sum_v supply_v y_v.
    double potential(std::size_t v) const { return pot_[v]; }

    double dual_objective() const {
        double d = 0.0;
        for (std::size_t v = 0; v < n_; ++v) d -= supply_[v] * pot_[v];
        return d;
    }

    double min_reduced_cost() const {
        double worst = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < arcs_.size(); ++a) worst = std::min(worst, reduced_cost(a));
        return worst;
    }

private:
    static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

    std::size_t all_arcs() const noexcept { return arcs_.size() + n_; }
    std::size_t root() const noexcept { return n_; }

    std::size_t src(std::size_t a) const {
        if (a < arcs_.size()) return arcs_[a].src;
        const std::size_t v = a - arcs_.size();
        return art_up_[v] ? v : root();
    }
    std::size_t dst(std::size_t a) const {
        if (a < arcs_.size()) return arcs_[a].dst;
        const std::size_t v = a - arcs_.size();
        return art_up_[v] ? root() : v;
    }
    double cost(std::size_t a) const { return a < arcs_.size() ? arcs_[a].cost : big_m_; }
    double reduced_cost(std::size_t a) const { return cost(a) + pot_[src(a)] - pot_[dst(a)]; }

    double feasibility_tolerance() const {
        double scale = 0.0;
        for (double s : supply_) scale += std::abs(s);
        return 1e-12 * std::max(1.0, scale) + imbalance_;
    }

    void init() {
        const std::size_t nodes = n_ + 1;
        double max_cost = 0.0;
        for (const auto& a : arcs_) max_cost = std::max(max_cost, std::abs(a.cost));
        big_m_ = (max_cost + 1.0) * static_cast<double>(nodes);
        epsilon_ = 1e-12 * std::max(1.0, max_cost);
        double net = 0.0;
        for (double s : supply_) net += s;
        imbalance_ = std::abs(net);

        flow_.assign(all_arcs(), 0.0);
        in_tree_.assign(all_arcs(), 0);
        art_up_.assign(n_, 0);
        parent_.assign(nodes, npos);
        pred_.assign(nodes, npos);
        depth_.assign(nodes, 0);
        pot_.assign(nodes, 0.0);
        tree_adj_.assign(nodes, {});
        for (std::size_t v = 0; v < n_; ++v) {
            const std::size_t a = arcs_.size() + v;
            art_up_[v] = supply_[v] >= 0.0;
            flow_[a] = std::abs(supply_[v]);
            in_tree_[a] = 1;
            parent_[v] = root();
            pred_[v] = a;
            depth_[v] = 1;
            // Tree arcs have zero reduced cost.
            pot_[v] = art_up_[v] ? -big_m_ : big_m_;
            tree_adj_[v].push_back(a);
            tree_adj_[root()].push_back(a);
        }
    }

    bool pred_up(std::size_t u) const { return src(pred_[u]) == u; }

    void pivot(std::size_t in_arc) {
        // Flow goes along in_arc from `first` to `second`, then back to
        // `first` through the tree.
        const std::size_t first = src(in_arc), second = dst(in_arc);
        std::size_t a = first, b = second;
        while (a != b) {
            if (depth_[a] >= depth_[b])
                a = parent_[a];
            else
                b = parent_[b];
        }
        const std::size_t join = a;

        constexpr double inf = std::numeric_limits<double>::infinity();
        double delta = inf;
        std::size_t u_out = npos;
        int side = 0;
        for (std::size_t u = first; u != join; u = parent_[u]) {
            // Cycle traverses parent -> u; an up arc loses flow.
            const double d = pred_up(u) ? flow_[pred_[u]] : inf;
            if (d < delta) {
                delta = d;
                u_out = u;
                side = 1;
            }
        }
        for (std::size_t u = second; u != join; u = parent_[u]) {
            // Cycle traverses u -> parent; a down arc loses flow.
            const double d = pred_up(u) ? inf : flow_[pred_[u]];
            if (d <= delta) {
                delta = d;
                u_out = u;
                side = 2;
            }
        }
        require(u_out != npos && std::isfinite(delta), ErrorCode::SolverFailure, "unbounded pivot");

        flow_[in_arc] += delta;
        for (std::size_t u = first; u != join; u = parent_[u]) flow_[pred_[u]] += pred_up(u) ? -delta : delta;
        for (std::size_t u = second; u != join; u = parent_[u]) flow_[pred_[u]] += pred_up(u) ? delta : -delta;
        const std::size_t out_arc = pred_[u_out];
        flow_[out_arc] = 0.0;

        // Swap arcs in the tree and hang the detached subtree (rooted at
        // u_out) from the entering arc.
        remove_tree_arc(u_out, out_arc);
        remove_tree_arc(parent_[u_out], out_arc);
        in_tree_[out_arc] = 0;
        in_tree_[in_arc] = 1;
        tree_adj_[first].push_back(in_arc);
        tree_adj_[second].push_back(in_arc);

        const std::size_t u_in = side == 1 ? first : second;
        const std::size_t v_in = side == 1 ? second : first;
        reroot(u_in, v_in, in_arc);
    }

    void remove_tree_arc(std::size_t node, std::size_t arc) {
        auto& adj = tree_adj_[node];
        auto it = std::find(adj.begin(), adj.end(), arc);
        if (it != adj.end()) {
            *it = adj.back();
            adj.pop_back();
        }
    }

    void reroot(std::size_t top, std::size_t new_parent, std::size_t via) {
        std::vector<std::size_t> stack{top};
        parent_[top] = new_parent;
        pred_[top] = via;
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            const std::size_t p = parent_[u];
            const std::size_t e = pred_[u];
            depth_[u] = depth_[p] + 1;
            // cost + pot[src] - pot[dst] = 0 on tree arcs.
            if (src(e) == u)
                pot_[u] = pot_[p] - cost(e);
            else
                pot_[u] = pot_[p] + cost(e);
            for (std::size_t arc : tree_adj_[u]) {
                if (arc == e) continue;
                const std::size_t w = src(arc) == u ? dst(arc) : src(arc);
                parent_[w] = u;
                pred_[w] = arc;
                stack.push_back(w);
            }
        }
    }

    std::size_t n_;
    std::vector<Arc> arcs_;
    std::vector<double> supply_;
    double big_m_ = 0.0;
    double epsilon_ = 0.0;
    double imbalance_ = 0.0;
    Status status_ = Status::IterationLimit;
    std::size_t iterations_ = 0;

    std::vector<double> flow_;
    std::vector<char> in_tree_;
    std::vector<char> art_up_;
    std::vector<std::size_t> parent_, pred_, depth_;
    std::vector<double> pot_;
    std::vector<std::vector<std::size_t>> tree_adj_;
};

} // namespace udemd::ot
