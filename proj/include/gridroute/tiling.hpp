#pragma once

// Tiling of the untilted space-time plane, phase shifts, sketch-graph
// capacities, the {1,2,inf} downscaling, quadrants and near/far
// classification.
//
// Untilted coordinates for d=1 are written (v, u): v is the space row
// (1..n) and u = t - v is the time-offset column.  E1 (buffer) edges move
// east (+u), E0 (link) edges move north (+v).

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/spacetime.hpp"

namespace gridroute {

// Generic axis-wise tiling of Z^m: axis i has side length sides[i] and phase
// shift shifts[i] in [0, sides[i]).
struct TilingParams {
    std::vector<int64_t> sides;
    std::vector<int64_t> shifts;

    static TilingParams square(int dim_plus_1, int64_t k) {
        TilingParams p;
        p.sides.assign(dim_plus_1, k);
        p.shifts.assign(dim_plus_1, 0);
        return p;
    }
};

inline int64_t floor_div(int64_t a, int64_t b) {
    int64_t q = a / b, r = a % b;
    return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// Lower corner of the tile containing an (already untilted) point.
inline std::vector<int64_t> tile_of(const std::vector<int64_t>& q,
                                    const TilingParams& params) {
    GR_CHECK(q.size() == params.sides.size(), "tile_of: dimension mismatch");
    std::vector<int64_t> corner(q.size());
    for (size_t i = 0; i < q.size(); ++i) {
        int64_t s = params.sides[i], phi = params.shifts[i];
        corner[i] = floor_div(q[i] - phi, s) * s + phi;
    }
    return corner;
}

// k = ceil(log2(1 + 3*p_max)).
inline int64_t tile_side_k(int64_t p_max) {
    GR_CHECK(p_max >= 1, "tile_side_k: p_max must be >= 1");
    int64_t target = 1 + 3 * p_max;
    int64_t k = 0;
    while ((int64_t{1} << k) < target) ++k;
    return k;
}

// ---------------------------------------------------------------------------
// d=1 sketch graph.  Tiles are Q rows by tau columns; the sketch coalesces
// each tile into a node.  Horizontal (east) sketch edges are crossed by B*Q
// buffer edges, vertical (north) edges by c*tau link edges.

enum class SinkMode { PerVertex, PerRequest };

struct SketchGraph {
    GridSpec grid;
    int64_t tau = 0, Q = 0;          // column / row side lengths
    int64_t phi_tau = 0, phi_Q = 0;  // shifts on the u / v axes
    int64_t hcap = 0;                // horizontal inter-tile capacity
    int64_t vcap = 0;                // vertical inter-tile capacity
    int64_t node_cap = 0;            // tile node capacity (d=1: 2k^2(B+c))
    SinkMode sink_mode = SinkMode::PerVertex;

    // Lower corner of the tile holding untilted point (v,u).
    std::pair<int64_t, int64_t> corner_of(int64_t v, int64_t u) const {
        int64_t v0 = floor_div(v - phi_Q, Q) * Q + phi_Q;
        int64_t u0 = floor_div(u - phi_tau, tau) * tau + phi_tau;
        return {v0, u0};
    }

    // Does the tile with lower corner (v0,u0) contain any real space-time
    // node?  Real means 1 <= v <= n and t = u + v >= 0.
    bool tile_has_real(int64_t v0, int64_t u0) const {
        int64_t n = grid.n();
        int64_t vlo = std::max(v0, int64_t{1});
        int64_t vhi = std::min(v0 + Q - 1, n);
        if (vlo > vhi) return false;
        // t = u + v is maximized at (vhi, u0+tau-1)
        return (u0 + tau - 1) + vhi >= 0;
    }

    // Does the tile contain a real copy (b, t'>=0) of destination row b?
    bool tile_has_copy(int64_t v0, int64_t u0, int64_t b) const {
        if (b < v0 || b >= v0 + Q) return false;
        if (b < 1 || b > grid.n()) return false;
        return (u0 + tau - 1) + b >= 0;  // some column yields t' >= 0
    }
};

// Square mode (deterministic algorithm): tau = Q = k, zero shifts.
inline SketchGraph build_sketch(const GridSpec& grid, int64_t tau, int64_t Q,
                                int64_t phi_tau, int64_t phi_Q,
                                SinkMode sink_mode) {
    GR_CHECK(grid.dim() == 1, "build_sketch: d=1 only");
    SketchGraph s;
    s.grid = grid;
    s.tau = tau;
    s.Q = Q;
    s.phi_tau = phi_tau;
    s.phi_Q = phi_Q;
    s.hcap = grid.B * Q;
    s.vcap = grid.c * tau;
    if (tau == Q)  // square tiling: 2k^2(B+c)
        s.node_cap = 2 * tau * tau * (grid.B + grid.c);
    s.sink_mode = sink_mode;
    return s;
}

// General-d node capacity (d+1) * k^{d+1} * (B + d*c); exposed for tests.
inline int64_t sketch_node_capacity(int64_t d, int64_t k, int64_t B, int64_t c) {
    int64_t kd = 1;
    for (int64_t i = 0; i < d + 1; ++i) kd *= k;
    return (d + 1) * kd * (B + d * c);
}

// The {1,2,inf}-sketch ({1,d+1,inf} in d dimensions) replaces every tile
// node by an in/out pair joined by an interior edge of capacity d+1;
// inter-tile edges get capacity 1, sink edges stay infinite.  The path
// length bound grows to 2*p_max + 1.
struct DownscaleResult {
    int64_t interior_cap = 2;
    int64_t intertile_cap = 1;
    int64_t new_p_max = 0;
};

inline DownscaleResult downscale_12inf(int64_t d, int64_t p_max) {
    DownscaleResult r;
    r.interior_cap = d + 1;
    r.intertile_cap = 1;
    r.new_p_max = 2 * p_max + 1;
    return r;
}

// ---------------------------------------------------------------------------
// Randomized tiling parameters (Definition 2).

struct RandTilingParams {
    int64_t tau = 0, Q = 0;
};

inline int64_t log2_ceil_of(int64_t n) {
    int64_t k = 0;
    while ((int64_t{1} << k) < n) ++k;
    return k;
}

inline double log2_exact(int64_t n) { return std::log2(static_cast<double>(n)); }

inline RandTilingParams tiling_params_rand(int64_t n, int64_t B, int64_t c) {
    double logn = log2_exact(n);
    GR_CHECK(B >= 1 && c >= 1, "tiling_params_rand: B,c >= 1 required");
    GR_CHECK(static_cast<double>(B) <= logn && static_cast<double>(c) <= logn,
             "tiling_params_rand: B,c <= log2 n required");
    RandTilingParams p;
    if (static_cast<double>(B) * static_cast<double>(c) < logn) {
        p.tau = 2 * static_cast<int64_t>(std::ceil(logn / static_cast<double>(c)));
        p.Q = 2 * static_cast<int64_t>(std::ceil(logn / static_cast<double>(B)));
    } else {
        p.tau = 2 * B;
        p.Q = 2 * c;
    }
    return p;
}

// Equalize inter-tile capacities to c^S = min(B*Q, c*tau); the tiling
// parameters guarantee the ratio is at most 2.
inline SketchGraph equalize_capacities(SketchGraph s) {
    int64_t lo = std::min(s.hcap, s.vcap), hi = std::max(s.hcap, s.vcap);
    GR_CHECK(hi <= 2 * lo, "equalize_capacities: capacity ratio exceeds 2");
    s.hcap = s.vcap = lo;
    return s;
}

// ---------------------------------------------------------------------------
// Near/Far classification and the SW quadrant (d=1).

enum class NearFar { Near, Far };

inline NearFar classify(const PacketRequest& req, const SketchGraph& s) {
    GR_CHECK(req.a.size() == 1, "classify: d=1 only");
    int64_t v = req.a[0], u = req.t - v;
    auto [v0, u0] = s.corner_of(v, u);
    return s.tile_has_copy(v0, u0, req.b[0]) ? NearFar::Near : NearFar::Far;
}

enum class Quadrant { SW, NW, SE, NE };

inline Quadrant quadrant_of(int64_t v_off, int64_t u_off, int64_t Q, int64_t tau) {
    bool south = v_off < Q / 2;
    bool west = u_off < tau / 2;
    if (south && west) return Quadrant::SW;
    if (south) return Quadrant::SE;
    if (west) return Quadrant::NW;
    return Quadrant::NE;
}

inline bool in_R_plus(const PacketRequest& req, const SketchGraph& s) {
    GR_CHECK(req.a.size() == 1, "in_R_plus: d=1 only");
    int64_t v = req.a[0], u = req.t - v;
    auto [v0, u0] = s.corner_of(v, u);
    return quadrant_of(v - v0, u - u0, s.Q, s.tau) == Quadrant::SW;
}

}  // namespace gridroute
