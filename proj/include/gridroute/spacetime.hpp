#pragma once

// Space-time transformation of the grid, the untilting automorphism, sink
// windows for deadlines, and the p_max path-length constants.

#include <cmath>
#include <cstdint>
#include <vector>

#include "gridroute/core.hpp"

namespace gridroute {

struct STVertex {
    Coord v;
    int64_t t = 0;

    bool operator==(const STVertex& o) const { return v == o.v && t == o.t; }
};

enum class STEdgeKind { E0, E1, SinkEdge };

struct STEdge {
    STVertex from;
    STVertex to;
    STEdgeKind kind = STEdgeKind::E1;
    int axis = -1;  // which grid axis an E0 edge moves along
};

// Successors of (v,t): one E1 buffering edge plus one E0 edge per grid
// out-neighbor.  The space-time graph is infinite in t, so it is only ever
// materialized through this function.
inline std::vector<STEdge> st_successors(const STVertex& x, const GridSpec& grid) {
    std::vector<STEdge> out;
    STVertex stay{x.v, x.t + 1};
    out.push_back(STEdge{x, stay, STEdgeKind::E1, -1});
    for (int i = 0; i < grid.dim(); ++i) {
        if (x.v[i] + 1 <= grid.dims[i]) {
            STVertex nxt{x.v, x.t + 1};
            nxt.v[i] += 1;
            out.push_back(STEdge{x, nxt, STEdgeKind::E0, i});
        }
    }
    return out;
}

inline int64_t st_edge_capacity(const STEdge& e, const GridSpec& grid) {
    switch (e.kind) {
        case STEdgeKind::E0: return grid.c;
        case STEdgeKind::E1: return grid.B;
        case STEdgeKind::SinkEdge: return kInfTime;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// Untilting: q(x_1,...,x_d,t) = (x_1,...,x_d, t - sum x_i).  A point in
// Z^{d+1} is stored spatial-coordinates-first, time last.

inline std::vector<int64_t> untilt(std::vector<int64_t> p) {
    int64_t s = 0;
    for (size_t i = 0; i + 1 < p.size(); ++i) s += p[i];
    p.back() -= s;
    return p;
}

inline std::vector<int64_t> untilt_inverse(std::vector<int64_t> p) {
    int64_t s = 0;
    for (size_t i = 0; i + 1 < p.size(); ++i) s += p[i];
    p.back() += s;
    return p;
}

// ---------------------------------------------------------------------------
// p_max constants.  B/c is kept exact by integer ceiling arithmetic.

inline int64_t ceil_div(int64_t a, int64_t b) { return (a + b - 1) / b; }

// Line: p_max = 2n(1 + n(B/c + 1)).
inline int64_t pmax_line(int64_t n, int64_t B, int64_t c) {
    // 2n + 2n^2 (B+c)/c, rounded up.
    return 2 * n + ceil_div(2 * n * n * (B + c), c);
}

// d-dimensional grid: p_max = 2*diam(G)*(1 + n(B/c + d)).
inline int64_t pmax_grid(int64_t n, int64_t d, int64_t B, int64_t c, int64_t diam) {
    return 2 * diam + ceil_div(2 * diam * n * (B + d * c), c);
}

// Space-time line bound (Lemma used by the randomized algorithm):
// p_max^st = 2(n-1)(1 + B/c).
inline int64_t pmax_st_line(int64_t n, int64_t B, int64_t c) {
    return ceil_div(2 * (n - 1) * (B + c), c);
}

// ---------------------------------------------------------------------------
// Deadline sinks: the per-request sink is connected from every space-time
// copy (b, t') with t <= t' <= deadline; an infinite deadline is clamped to
// the given horizon.

inline std::vector<STVertex> deadline_sink_targets(const PacketRequest& req,
                                                   int64_t horizon) {
    int64_t hi = req.has_deadline() ? req.deadline : horizon;
    std::vector<STVertex> out;
    for (int64_t t = req.t; t <= hi; ++t) out.push_back(STVertex{req.b, t});
    return out;
}

}  // namespace gridroute
