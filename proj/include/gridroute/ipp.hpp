#pragma once

// Online integral path packing: primal-dual state with multiplicative edge
// weights, a hop-bounded lightest-path oracle over DAGs, and the
// self-certification API for the (2, log2(1+3*p_max)) guarantee.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "gridroute/core.hpp"

namespace gridroute {

// Edge-list DAG.  Edge order is fixed at insertion and doubles as the
// lexicographic tie-break order of the path oracle.
struct Dag {
    struct Edge {
        int from = 0;
        int to = 0;
        double cap = 1.0;  // may be +inf (sink edges)
    };

    int num_nodes = 0;
    std::vector<Edge> edges;

    int add_node() { return num_nodes++; }

    int add_edge(int from, int to, double cap) {
        GR_CHECK(from >= 0 && from < num_nodes && to >= 0 && to < num_nodes,
                 "Dag::add_edge: node out of range");
        edges.push_back(Edge{from, to, cap});
        return static_cast<int>(edges.size()) - 1;
    }

    // Length (in edges) of the longest path; also validates acyclicity.
    int64_t longest_path_len() const {
        std::vector<int> indeg(num_nodes, 0);
        std::vector<std::vector<int>> out(num_nodes);
        for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
            indeg[edges[i].to]++;
            out[edges[i].from].push_back(i);
        }
        std::vector<int> stack;
        std::vector<int64_t> depth(num_nodes, 0);
        for (int v = 0; v < num_nodes; ++v)
            if (indeg[v] == 0) stack.push_back(v);
        int seen = 0;
        int64_t best = 0;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            ++seen;
            best = std::max(best, depth[v]);
            for (int ei : out[v]) {
                int w = edges[ei].to;
                depth[w] = std::max(depth[w], depth[v] + 1);
                if (--indeg[w] == 0) stack.push_back(w);
            }
        }
        GR_CHECK(seen == num_nodes, "Dag: graph has a cycle");
        return best;
    }
};

struct PathQuery {
    int source = 0;
    std::vector<int> dests;
    int64_t hop_bound = 0;
};

// Minimum-weight path with at most hop_bound edges from source to any
// destination; ties broken by fewer hops, then by edge insertion order.
// Returns the edge-id sequence, or nullopt if no destination is reachable
// within the bound.
inline std::optional<std::vector<int>> lightest_bounded_path(
    const Dag& dag, const std::vector<double>& weights, const PathQuery& q) {
    GR_CHECK(weights.size() == dag.edges.size(),
             "lightest_bounded_path: weight vector size mismatch");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // A lightest walk may be taken simple (weights are nonnegative), so the
    // effective hop bound never exceeds the longest path length.
    int64_t H = std::min(q.hop_bound, dag.longest_path_len());
    int N = dag.num_nodes;

    // dist[h][v]: lightest weight over walks with exactly h edges.
    std::vector<std::vector<double>> dist(H + 1, std::vector<double>(N, kInf));
    std::vector<std::vector<int>> parent(H + 1, std::vector<int>(N, -1));
    dist[0][q.source] = 0.0;
    for (int64_t h = 1; h <= H; ++h) {
        for (int ei = 0; ei < static_cast<int>(dag.edges.size()); ++ei) {
            const auto& e = dag.edges[ei];
            double base = dist[h - 1][e.from];
            if (base == kInf) continue;
            double cand = base + weights[ei];
            if (cand < dist[h][e.to]) {
                dist[h][e.to] = cand;
                parent[h][e.to] = ei;
            }
        }
    }

    // Min weight, then fewest hops; at equal (weight, hops) the first listed
    // destination and the first-improving edge (insertion order) win.
    int best_dest = -1;
    int64_t best_h = -1;
    double best_w = kInf;
    for (int64_t h = 0; h <= H; ++h)
        for (int dst : q.dests)
            if (dist[h][dst] < best_w) {
                best_w = dist[h][dst];
                best_h = h;
                best_dest = dst;
            }
    if (best_dest == -1) return std::nullopt;

    std::vector<int> path;
    int v = best_dest;
    for (int64_t h = best_h; h > 0; --h) {
        int ei = parent[h][v];
        GR_CHECK(ei >= 0, "lightest_bounded_path: reconstruction failed");
        path.push_back(ei);
        v = dag.edges[ei].from;
    }
    GR_CHECK(v == q.source, "lightest_bounded_path: reconstruction failed");
    std::reverse(path.begin(), path.end());
    return path;
}

// ---------------------------------------------------------------------------
// Primal-dual state (Appendix-style multiplicative update).

struct AcceptedPath {
    int64_t req_id = 0;
    std::vector<int> edges;
    double z = 0.0;
};

struct Certificate {
    double primal_cost = 0.0;
    int64_t throughput = 0;
    double max_relative_load = 0.0;
    bool closed_form_ok = true;
    bool duality_ok = true;
    bool load_bound_ok = true;
};

class PrimalDualState {
  public:
    PrimalDualState(std::vector<double> capacities, int64_t p_max)
        : caps_(std::move(capacities)),
          p_max_(p_max),
          x_(caps_.size(), 0.0),
          flow_(caps_.size(), 0) {
        GR_CHECK(p_max_ >= 1, "PrimalDualState: p_max >= 1 required");
        for (double c : caps_)
            GR_CHECK(c >= 1.0, "PrimalDualState: min capacity >= 1 required");
    }

    const std::vector<double>& weights() const { return x_; }
    int64_t p_max() const { return p_max_; }
    double capacity(int e) const { return caps_[e]; }
    int64_t flow(int e) const { return flow_[e]; }
    const std::vector<AcceptedPath>& accepted() const { return accepted_; }

    double alpha(const std::vector<int>& path) const {
        double a = 0.0;
        for (int e : path) a += x_[e];
        return a;
    }

    // The accept/reject rule on an already-chosen lightest path.  Accepts
    // iff alpha < 1 strictly; at alpha == 1 the request is rejected.
    bool decide(int64_t req_id, const std::vector<int>& path) {
        double a = alpha(path);
        if (!(a < 1.0)) return false;
        for (int e : path) {
            flow_[e] += 1;
            if (std::isinf(caps_[e])) continue;  // x pinned at 0 for sinks
            double g = std::exp2(1.0 / caps_[e]);
            x_[e] = x_[e] * g + (g - 1.0) / static_cast<double>(p_max_);
        }
        accepted_.push_back(AcceptedPath{req_id, path, 1.0 - a});
        return true;
    }

    // Oracle + decide in one step.
    std::optional<std::vector<int>> process(const Dag& dag, const PathQuery& q,
                                            int64_t req_id) {
        auto path = lightest_bounded_path(dag, x_, q);
        if (!path) return std::nullopt;
        if (!decide(req_id, *path)) return std::nullopt;
        return path;
    }

    // Candidate-list variant: lightest among explicit candidates (ties by
    // fewer hops, then list order), then the usual rule.
    std::optional<size_t> decide_among(
        int64_t req_id, const std::vector<std::vector<int>>& candidates) {
        int best = -1;
        double best_a = 0.0;
        for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
            if (static_cast<int64_t>(candidates[i].size()) > p_max_) continue;
            double a = alpha(candidates[i]);
            if (best == -1 || a < best_a ||
                (a == best_a && candidates[i].size() < candidates[best].size())) {
                best = i;
                best_a = a;
            }
        }
        if (best == -1) return std::nullopt;
        if (!decide(req_id, candidates[best])) return std::nullopt;
        return static_cast<size_t>(best);
    }

    Certificate certify(double tol = 1e-9) const {
        Certificate c;
        for (size_t e = 0; e < caps_.size(); ++e) {
            if (std::isinf(caps_[e])) {
                if (x_[e] != 0.0) c.closed_form_ok = false;
                continue;
            }
            double rel = static_cast<double>(flow_[e]) / caps_[e];
            c.max_relative_load = std::max(c.max_relative_load, rel);
            c.primal_cost += x_[e] * caps_[e];
            double closed =
                (std::exp2(static_cast<double>(flow_[e]) / caps_[e]) - 1.0) /
                static_cast<double>(p_max_);
            if (std::abs(x_[e] - closed) > tol) c.closed_form_ok = false;
            if (!(x_[e] < 3.0 + tol)) c.closed_form_ok = false;
        }
        for (const auto& ap : accepted_) c.primal_cost += ap.z;
        c.throughput = static_cast<int64_t>(accepted_.size());
        c.duality_ok =
            c.primal_cost <= 2.0 * static_cast<double>(c.throughput) + tol;
        double bound = std::log2(1.0 + 3.0 * static_cast<double>(p_max_));
        c.load_bound_ok = c.max_relative_load <= bound + tol;
        return c;
    }

    // Hard-failure form of certify(): any violated certificate is a bug.
    Certificate certify_or_die(double tol = 1e-9) const {
        Certificate c = certify(tol);
        GR_CHECK(c.closed_form_ok, "IPP certificate: closed form violated");
        GR_CHECK(c.duality_ok, "IPP certificate: weak duality violated");
        GR_CHECK(c.load_bound_ok, "IPP certificate: load bound violated");
        return c;
    }

  private:
    std::vector<double> caps_;
    int64_t p_max_;
    std::vector<double> x_;
    std::vector<int64_t> flow_;
    std::vector<AcceptedPath> accepted_;
};

}  // namespace gridroute
