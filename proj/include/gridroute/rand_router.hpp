#pragma once

// Randomized online router for the line with small buffers
// (1 <= B, c <= log2 n): random phase shifts, a fair class coin, online
// path packing on the equalized sketch, Bernoulli sparsification, a 1/4
// relative-load cap, I-routing injection planes, and quadrant-disciplined
// (T/X) detailed routing.  Non-preemptive: every admitted packet is
// delivered.
//
// Randomness draw order (fixed; tests rely on it):
//   1. phi_tau uniform in [0, tau)
//   2. phi_Q   uniform in [0, Q)
//   3. class coin b in {0, 1}  (1 -> far requests, 0 -> near requests)
//   4. one Bernoulli(lambda) coin per far+ request that passed path
//      packing, in processing order.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/ipp.hpp"
#include "gridroute/sim.hpp"
#include "gridroute/spacetime.hpp"
#include "gridroute/tiling.hpp"

namespace gridroute {

struct RandConfig {
    int64_t gamma = 200;  // lambda = 1 / (gamma * k)
};

struct RandResult {
    std::map<int64_t, Outcome> outcomes;
    RunMetrics metrics;
    std::vector<DetailedPathPlan> paths;
    Certificate ipp_cert;

    // Drawn parameters.
    int64_t tau = 0, Q = 0, phi_tau = 0, phi_Q = 0;
    int coin_b = 0;
    int64_t k = 0, cS = 0, p_max = 0;
    double lambda = 0.0;

    // Pipeline counters.
    int64_t near_count = 0, far_count = 0, far_plus_count = 0;
    int64_t ipp_accepted = 0;          // far+ past path packing
    int64_t south_entry_rejected = 0;  // sketch path would enter the last tile from the west
    int64_t coin_flips = 0, coin_kept = 0;
    int64_t cap_rejected = 0;   // 1/4 relative-load cap
    int64_t iroute_failed = 0;  // no free plane slot / side budget
    int64_t injected = 0;
    int64_t shadow_iroutable = 0;  // I-routable when the 1/4 cap is ignored
    double max_sketch_load = 0.0;
};

namespace detail {

using RTile = std::pair<int64_t, int64_t>;

struct RandSketchDag {
    SketchGraph geom;
    Dag dag;
    std::map<RTile, int> node_of;
    enum EKind { East, North, Sink };
    struct EMeta {
        EKind kind;
        RTile from{};
        RTile to{};
    };
    std::vector<EMeta> meta;
    std::map<int64_t, int> sink_of_dest;  // destination row -> sink node
};

inline RandSketchDag build_rand_sketch_dag(const SketchGraph& geom,
                                           int64_t u_lo, int64_t u_hi,
                                           const std::vector<int64_t>& dests) {
    RandSketchDag s;
    s.geom = geom;
    int64_t n = geom.grid.n();
    int64_t r_lo = floor_div(1 - geom.phi_Q, geom.Q);
    int64_t r_hi = floor_div(n - geom.phi_Q, geom.Q);
    int64_t c_lo = floor_div(u_lo - geom.phi_tau, geom.tau);
    int64_t c_hi = floor_div(u_hi - geom.phi_tau, geom.tau);
    for (int64_t cu = c_lo; cu <= c_hi; ++cu)
        for (int64_t rv = r_lo; rv <= r_hi; ++rv) {
            int64_t v0 = rv * geom.Q + geom.phi_Q;
            int64_t u0 = cu * geom.tau + geom.phi_tau;
            if (!geom.tile_has_real(v0, u0)) continue;
            s.node_of[{v0, u0}] = s.dag.add_node();
        }
    double cap = static_cast<double>(geom.hcap);  // equalized: hcap == vcap
    for (const auto& [corner, node] : s.node_of) {
        auto [v0, u0] = corner;
        RTile east{v0, u0 + geom.tau}, north{v0 + geom.Q, u0};
        if (auto it = s.node_of.find(east); it != s.node_of.end()) {
            s.dag.add_edge(node, it->second, cap);
            s.meta.push_back({RandSketchDag::East, corner, east});
        }
        if (auto it = s.node_of.find(north); it != s.node_of.end()) {
            s.dag.add_edge(node, it->second, cap);
            s.meta.push_back({RandSketchDag::North, corner, north});
        }
    }
    std::set<int64_t> uniq(dests.begin(), dests.end());
    for (int64_t b : uniq) {
        int sink = s.dag.add_node();
        s.sink_of_dest[b] = sink;
        for (const auto& [corner, node] : s.node_of)
            if (geom.tile_has_copy(corner.first, corner.second, b)) {
                s.dag.add_edge(node, sink, std::numeric_limits<double>::infinity());
                s.meta.push_back({RandSketchDag::Sink, corner, corner});
            }
    }
    return s;
}

// ---------------------------------------------------------------------------
// I-routing cube: horizontal planes 1..B (one row claim each), vertical
// planes B+1..B+c (one column claim each), with a per-side exit budget of
// floor(cS/4) per tile.

struct IRouteCube {
    int64_t B = 0, c = 0, budget = 0;
    std::set<std::tuple<RTile, int64_t, int64_t>> claims;  // (tile, plane, offset)
    std::map<RTile, int64_t> east_used, north_used;

    // rank is 1-based among path-packed far+ requests at one (node, time).
    // Returns the assigned direction ('E' or 'N'), or 0 on failure.
    char try_claim(const RTile& tile, int64_t rank, int64_t ro, int64_t co) {
        GR_CHECK(rank >= 1 && rank <= B + c, "IRouteCube: rank out of range");
        if (rank <= B) {
            if (east_used[tile] >= budget) return 0;
            if (!claims.insert({tile, rank, ro}).second) return 0;
            ++east_used[tile];
            return 'E';
        }
        if (north_used[tile] >= budget) return 0;
        if (!claims.insert({tile, rank, co}).second) return 0;
        ++north_used[tile];
        return 'N';
    }
};

// ---------------------------------------------------------------------------
// Quadrant-disciplined detailed sweep for far+ packets.

struct RPkt {
    int64_t id = 0, b = 0;
    std::vector<RTile> tiles;
    std::vector<char> moves;
    size_t tile_idx = 0;
    char dir = 'E';
    int64_t v = 0, u = 0;
    std::vector<STVertex> nodes;
};

class RandSweep {
  public:
    RandSweep(const GridSpec& grid, const SketchGraph& geom, RandResult& out)
        : grid_(grid), geom_(geom), out_(out) {}

    void inject(const PacketRequest& req, std::vector<RTile> tiles,
                std::vector<char> moves, char idir) {
        RPkt p;
        p.id = req.id;
        p.b = req.b[0];
        p.tiles = std::move(tiles);
        p.moves = std::move(moves);
        p.dir = idir;
        p.v = req.a[0];
        p.u = req.t - req.a[0];
        p.nodes.push_back(STVertex{{p.v}, req.t});
        agenda_[req.t].push_back(p.id);
        pkts_[p.id] = std::move(p);
        ++out_.injected;
    }

    void run() {
        while (!agenda_.empty()) {
            auto it = agenda_.begin();
            int64_t t = it->first;
            std::vector<int64_t> ids = std::move(it->second);
            agenda_.erase(it);
            std::map<std::pair<int64_t, int64_t>, std::vector<int64_t>> by_node;
            for (int64_t id : ids) {
                const RPkt& p = pkts_.at(id);
                by_node[{p.v, p.u}].push_back(id);
            }
            for (auto& [node, group] : by_node) process_node(t, group);
        }
    }

  private:
    const GridSpec& grid_;
    const SketchGraph& geom_;
    RandResult& out_;
    std::map<int64_t, RPkt> pkts_;
    std::map<int64_t, std::vector<int64_t>> agenda_;

    bool in_last_tile(const RPkt& p) const {
        return p.tile_idx + 1 == p.tiles.size();
    }

    Quadrant quad(const RPkt& p) const {
        const RTile& tc = p.tiles[p.tile_idx];
        return quadrant_of(p.v - tc.first, p.u - tc.second, geom_.Q, geom_.tau);
    }

    // Desired bend direction under the quadrant discipline, or 0 for
    // straight.
    char bend_wish(const RPkt& p) const {
        if (in_last_tile(p)) return 0;  // entered from the south, runs north
        switch (quad(p)) {
            case Quadrant::SW: return 0;  // I-segment
            case Quadrant::SE: return p.dir == 'E' ? 'N' : char{0};
            case Quadrant::NW: return p.dir == 'N' ? 'E' : char{0};
            case Quadrant::NE: {
                char exit = p.moves[p.tile_idx];
                return p.dir == exit ? char{0} : exit;
            }
        }
        return 0;
    }

    void deliver(RPkt& p, int64_t t) {
        out_.outcomes[p.id] = Outcome::delivered(t);
        DetailedPathPlan plan;
        plan.id = p.id;
        plan.nodes = std::move(p.nodes);
        plan.delivered = true;
        out_.paths.push_back(std::move(plan));
        pkts_.erase(p.id);
    }

    void move(RPkt& p, int64_t t) {
        RTile before = p.tiles[p.tile_idx];
        if (p.dir == 'E')
            p.u += 1;
        else
            p.v += 1;
        GR_CHECK(p.v >= 1 && p.v <= grid_.n(), "rand_router: moved off grid");
        GR_CHECK(p.v + p.u >= 0, "rand_router: negative time");
        p.nodes.push_back(STVertex{{p.v}, t + 1});
        auto after = geom_.corner_of(p.v, p.u);
        if (after != before) {
            GR_CHECK(!in_last_tile(p), "rand_router: ran out of the last tile");
            GR_CHECK(p.dir == p.moves[p.tile_idx],
                     "rand_router: left tile off the sketch path");
            ++p.tile_idx;
            GR_CHECK(p.tiles[p.tile_idx] == RTile(after),
                     "rand_router: tile sequence mismatch");
            if (p.dir == 'E')
                GR_CHECK(p.v - after.first >= geom_.Q / 2,
                         "rand_router: east crossing outside the upper half");
            else
                GR_CHECK(p.u - after.second >= geom_.tau / 2,
                         "rand_router: north crossing outside the right half");
            if (in_last_tile(p))
                GR_CHECK(p.dir == 'N',
                         "rand_router: last tile entered from the west");
        }
        agenda_[t + 1].push_back(p.id);
    }

    void process_node(int64_t t, const std::vector<int64_t>& group) {
        std::vector<RPkt*> ps;
        for (int64_t id : group) ps.push_back(&pkts_.at(id));
        // Deliveries first: a packet on its destination copy leaves the net.
        std::vector<RPkt*> movers;
        for (RPkt* p : ps) {
            if (in_last_tile(*p) && p->v == p->b)
                deliver(*p, t);
            else
                movers.push_back(p);
        }
        // Straight-traffic counts; both are within the physical capacities
        // by induction on the in-edges.
        int64_t curN = 0, curE = 0;
        for (RPkt* p : movers) (p->dir == 'N' ? curN : curE) += 1;
        GR_CHECK(curN <= grid_.c, "rand_router: link over-subscribed");
        GR_CHECK(curE <= grid_.B, "rand_router: buffer over-subscribed");
        // Grant bends in id order while the target side has residual
        // capacity; a denied bender continues straight (already counted).
        for (RPkt* p : movers) {
            char w = bend_wish(*p);
            if (w == 'N' && curN + 1 <= grid_.c) {
                curN += 1;
                curE -= 1;
                p->dir = 'N';
            } else if (w == 'E' && curE + 1 <= grid_.B) {
                curE += 1;
                curN -= 1;
                p->dir = 'E';
            }
        }
        for (RPkt* p : movers) move(*p, t);
    }
};

// ---------------------------------------------------------------------------
// Near requests: greedy vertical-first walk inside the source tile with an
// eastward slide on saturation.  Untilted edges are space-time edges, so
// per-edge load counting is exact and reserved paths are conflict-free.

inline bool route_near(const PacketRequest& r, const GridSpec& grid,
                       const SketchGraph& geom,
                       std::map<std::pair<int64_t, int64_t>, int64_t>& e0_load,
                       std::map<std::pair<int64_t, int64_t>, int64_t>& e1_load,
                       RandResult& out) {
    int64_t a = r.a[0], b = r.b[0];
    int64_t u = r.t - a;
    auto corner = geom.corner_of(a, u);
    GR_CHECK(geom.tile_has_copy(corner.first, corner.second, b),
             "route_near: request is not near");
    std::vector<STVertex> nodes{STVertex{{a}, r.t}};
    while (true) {
        bool vertical_free = true;
        for (int64_t v = a; v < b; ++v)
            if (e0_load[{v, u}] >= grid.c) vertical_free = false;
        if (vertical_free) {
            for (int64_t v = a; v < b; ++v) {
                ++e0_load[{v, u}];
                nodes.push_back(STVertex{{v + 1}, u + v + 1});
            }
            int64_t arrival = u + b;
            out.outcomes[r.id] = Outcome::delivered(arrival);
            DetailedPathPlan plan;
            plan.id = r.id;
            plan.nodes = std::move(nodes);
            plan.delivered = true;
            out.paths.push_back(std::move(plan));
            return true;
        }
        // Slide east one buffering step, if legal.
        if (u + 1 >= corner.second + geom.tau || e1_load[{a, u}] >= grid.B) {
            out.outcomes[r.id] = Outcome::rejected();
            return false;
        }
        ++e1_load[{a, u}];
        ++u;
        nodes.push_back(STVertex{{a}, u + a});
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Probabilistic-analysis utilities.

// I(X): keep only the first one in every row.
inline std::vector<std::vector<int>> matrix_I(std::vector<std::vector<int>> X) {
    for (auto& row : X) {
        bool seen = false;
        for (auto& x : row) {
            if (x != 0) {
                x = seen ? 0 : 1;
                seen = true;
            }
        }
    }
    return X;
}

inline int64_t matrix_weight(const std::vector<std::vector<int>>& X) {
    int64_t w = 0;
    for (const auto& row : X)
        for (int x : row) w += (x != 0);
    return w;
}

// Domination: w(I(L)) >= w(I(B)) - w(B and not L), for L obtained from B by
// clearing entries.
inline bool check_matrix_domination(const std::vector<std::vector<int>>& L,
                                    const std::vector<std::vector<int>>& B) {
    GR_CHECK(L.size() == B.size(), "check_matrix_domination: shape mismatch");
    int64_t cleared = 0;
    for (size_t i = 0; i < L.size(); ++i) {
        GR_CHECK(L[i].size() == B[i].size(),
                 "check_matrix_domination: shape mismatch");
        for (size_t j = 0; j < L[i].size(); ++j) {
            GR_CHECK(!(L[i][j] != 0 && B[i][j] == 0),
                     "check_matrix_domination: L must be a sub-matrix of B");
            if (B[i][j] != 0 && L[i][j] == 0) ++cleared;
        }
    }
    return matrix_weight(matrix_I(L)) >= matrix_weight(matrix_I(B)) - cleared;
}

// Reverse Markov: for a random variable in [d, a] with the given mean,
// Pr[X >= d'] >= (mean - d') / (a - d') for d <= d' < a.
inline double reverse_markov_bound(double mean, double dprime, double a) {
    GR_CHECK(a > dprime, "reverse_markov_bound: a > d' required");
    return (mean - dprime) / (a - dprime);
}

// ---------------------------------------------------------------------------
// The randomized pipeline.

inline RandResult run_randomized(const std::vector<PacketRequest>& trace,
                                 const GridSpec& grid, uint64_t seed,
                                 const RandConfig& cfg = {}) {
    GR_CHECK(grid.dim() == 1, "run_randomized: d=1 only");
    int64_t n = grid.n();
    RandResult out;
    out.metrics.algo = "rand";
    out.metrics.seed = seed;

    RandTilingParams tp = tiling_params_rand(n, grid.B, grid.c);
    out.tau = tp.tau;
    out.Q = tp.Q;
    std::mt19937_64 rng(seed);
    out.phi_tau = static_cast<int64_t>(rng() % static_cast<uint64_t>(tp.tau));
    out.phi_Q = static_cast<int64_t>(rng() % static_cast<uint64_t>(tp.Q));
    out.coin_b = static_cast<int>(rng() % 2);
    out.p_max = 4 * n;
    out.k = tile_side_k(out.p_max);
    out.lambda = 1.0 / (static_cast<double>(cfg.gamma) * static_cast<double>(out.k));
    std::bernoulli_distribution sparsify(out.lambda);

    SketchGraph geom = equalize_capacities(
        build_sketch(grid, tp.tau, tp.Q, out.phi_tau, out.phi_Q, SinkMode::PerVertex));
    out.cS = geom.hcap;
    int64_t side_budget = out.cS / 4;

    // Validate; collect the working set in time order.
    std::vector<PacketRequest> valid;
    for (const auto& r : trace) {
        if (validate_request(r, grid))
            out.outcomes[r.id] = Outcome::rejected();
        else
            valid.push_back(r);
    }
    std::stable_sort(valid.begin(), valid.end(),
                     [](const PacketRequest& x, const PacketRequest& y) {
                         if (x.t != y.t) return x.t < y.t;
                         return x.id < y.id;
                     });

    int64_t u_lo = kInfTime, u_hi = -kInfTime;
    int64_t slack = pmax_st_line(n, grid.B, grid.c) + 2 * (tp.tau + tp.Q);
    std::vector<int64_t> dests;
    for (const auto& r : valid) {
        u_lo = std::min(u_lo, r.t - r.a[0]);
        u_hi = std::max(u_hi, r.t - r.a[0] + slack);
        dests.push_back(r.b[0]);
    }
    detail::RandSketchDag sk =
        valid.empty() ? detail::RandSketchDag{}
                      : detail::build_rand_sketch_dag(geom, u_lo, u_hi, dests);
    std::vector<double> caps;
    for (const auto& e : sk.dag.edges) caps.push_back(e.cap);
    std::optional<PrimalDualState> ipp;
    if (!valid.empty()) ipp.emplace(caps, out.p_max);

    // Relative-load bookkeeping for the 1/4 cap (east/north edges only).
    std::map<int, int64_t> edge_load;
    detail::IRouteCube cube{grid.B, grid.c, side_budget, {}, {}, {}};
    detail::IRouteCube shadow{grid.B, grid.c, side_budget, {}, {}, {}};
    std::map<std::pair<std::pair<int64_t, int64_t>, int64_t>, int64_t> rank_at;

    detail::RandSweep sweep(grid, geom, out);

    // Near-request load bookkeeping: untilted edges are space-time edges,
    // so per-edge counting is exact.
    std::map<std::pair<int64_t, int64_t>, int64_t> near_e0;  // (v,u): (v,u)->(v+1,u)
    std::map<std::pair<int64_t, int64_t>, int64_t> near_e1;  // (v,u): (v,u)->(v,u+1)

    std::map<int64_t, std::vector<PacketRequest>> by_time;
    for (const auto& r : valid) by_time[r.t].push_back(r);
    int64_t near_delivered = 0;

    for (auto& [t, reqs] : by_time) {
        std::map<Coord, std::vector<PacketRequest>> by_node;
        for (const auto& r : reqs) by_node[r.a].push_back(r);
        std::vector<PacketRequest> kept;
        for (auto& [node, rs] : by_node) {
            FilterResult f = filter_simultaneous(rs, grid);
            for (const auto& r : f.rejected) out.outcomes[r.id] = Outcome::rejected();
            for (const auto& r : f.kept) kept.push_back(r);
        }
        std::sort(kept.begin(), kept.end(),
                  [](const PacketRequest& x, const PacketRequest& y) {
                      return x.id < y.id;
                  });
        for (const auto& r : kept) {
            NearFar nf = classify(r, geom);
            bool rplus = in_R_plus(r, geom);
            if (nf == NearFar::Near)
                ++out.near_count;
            else
                ++out.far_count;
            if (nf == NearFar::Far && rplus) ++out.far_plus_count;

            if (out.coin_b == 0) {  // near round
                if (nf != NearFar::Near) {
                    out.outcomes[r.id] = Outcome::rejected();
                    continue;
                }
                if (detail::route_near(r, grid, geom, near_e0, near_e1, out))
                    ++near_delivered;
                continue;
            }
            // Far round: only far+ requests are considered.
            if (nf != NearFar::Far || !rplus) {
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            // Step 1: online path packing on the equalized sketch.
            int64_t v = r.a[0], u = r.t - v;
            auto corner = geom.corner_of(v, u);
            PathQuery q;
            q.source = sk.node_of.at(corner);
            q.dests = {sk.sink_of_dest.at(r.b[0])};
            q.hop_bound = out.p_max;
            auto path = ipp->process(sk.dag, q, r.id);
            if (!path) {
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            ++out.ipp_accepted;
            int64_t rank = ++rank_at[{{v, u}, t}];
            // Sketch tile sequence.
            std::vector<detail::RTile> tiles{sk.meta[(*path)[0]].from};
            std::vector<char> moves;
            for (int ei : *path) {
                const auto& m = sk.meta[ei];
                if (m.kind == detail::RandSketchDag::Sink) continue;
                tiles.push_back(m.to);
                moves.push_back(m.kind == detail::RandSketchDag::East ? 'E' : 'N');
            }
            GR_CHECK(!moves.empty(), "run_randomized: far request with a one-tile path");
            // Step 1.5: the detailed discipline needs a south entry into the
            // destination tile.
            if (moves.back() == 'E') {
                ++out.south_entry_rejected;
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            // Step 2: sparsification coin.
            ++out.coin_flips;
            if (!sparsify(rng)) {
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            ++out.coin_kept;
            // Shadow I-routing (the 1/4 cap ignored) for the admission bound.
            int64_t ro = v - corner.first, co = u - corner.second;
            if (shadow.try_claim(corner, rank, ro, co)) ++out.shadow_iroutable;
            // Step 3: the 1/4 relative-load cap.
            bool capped = false;
            for (int ei : *path) {
                if (sk.meta[ei].kind == detail::RandSketchDag::Sink) continue;
                if ((edge_load[ei] + 1) * 4 >= out.cS) capped = true;
            }
            if (capped) {
                ++out.cap_rejected;
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            for (int ei : *path) {
                if (sk.meta[ei].kind == detail::RandSketchDag::Sink) continue;
                ++edge_load[ei];
                out.max_sketch_load =
                    std::max(out.max_sketch_load,
                             static_cast<double>(edge_load[ei]) /
                                 static_cast<double>(out.cS));
            }
            // Step 4: I-routing injection.
            char idir = cube.try_claim(corner, rank, ro, co);
            if (!idir) {
                ++out.iroute_failed;
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            sweep.inject(r, std::move(tiles), std::move(moves), idir);
        }
    }
    sweep.run();

    if (ipp) out.ipp_cert = ipp->certify_or_die();
    for (const auto& r : trace)
        if (!out.outcomes.count(r.id)) out.outcomes[r.id] = Outcome::rejected();
    for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
    GR_CHECK(out.metrics.preempted == 0, "run_randomized: preemption-free");
    GR_CHECK(out.metrics.throughput == out.injected + near_delivered,
             "run_randomized: every injected packet must be delivered");
    GR_CHECK(out.injected >= out.shadow_iroutable - out.cap_rejected,
             "run_randomized: admission bound violated");
    GR_CHECK(out.max_sketch_load < 0.25 + 1e-12,
             "run_randomized: 1/4 load cap violated");
    return out;
}

}  // namespace gridroute
