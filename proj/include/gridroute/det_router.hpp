#pragma once

// Deterministic online router for the uni-directional line (d=1): reduction
// of each request to a path request on the {1,2,inf}-sketch graph, online
// path packing, and three-track detailed routing:
//   track 1: special (first and last) segments, governed by per-line
//            interval packing,
//   track 2: internal segments, governed by the knock-knee node rules,
//   track 3: the final vertical run inside the last tile, governed by
//            nearest-destination preemption.
// Also contains the d-dimensional node rules, and the bufferless and
// large-capacity variants.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/interval_pack.hpp"
#include "gridroute/ipp.hpp"
#include "gridroute/ntg.hpp"
#include "gridroute/sim.hpp"
#include "gridroute/spacetime.hpp"
#include "gridroute/tiling.hpp"

namespace gridroute {

struct DetConfig {
    int64_t horizon = -1;  // max extra time per request; default p_max
};

using TileCorner = std::pair<int64_t, int64_t>;  // (v0, u0)

struct RouterResult {
    std::map<int64_t, Outcome> outcomes;
    RunMetrics metrics;
    std::vector<DetailedPathPlan> paths;  // physical plans of injected packets
    Certificate ipp_cert;

    // Diagnostics for the analysis invariants.
    int64_t k = 0;
    int64_t p_max = 0;        // pre-split
    int64_t p_max_split = 0;  // hop bound used on the split sketch
    int64_t injected = 0;     // IPP-accepted
    int64_t reached_last_tile = 0;
    std::map<TileCorner, std::pair<int64_t, int64_t>> tile_stats;  // reached, delivered
    std::map<int64_t, std::vector<TileCorner>> sketch_tiles;
    std::map<int64_t, std::vector<TileCorner>> detail_tiles;
};

// ---------------------------------------------------------------------------
// Split {1,2,inf}-sketch DAG shared by all requests of one run.

namespace detail {

struct SplitSketch {
    SketchGraph geom;
    int64_t k = 0;
    std::map<TileCorner, std::pair<int, int>> tile_nodes;  // corner -> (in, out)
    Dag dag;
    enum EdgeKind { Interior, East, North, Sink };
    struct EMeta {
        EdgeKind kind;
        TileCorner from{};
        TileCorner to{};
    };
    std::vector<EMeta> meta;
    std::vector<double> caps;
    std::map<int64_t, int> sink_of_req;

    TileCorner corner(int64_t v, int64_t u) const {
        auto [v0, u0] = geom.corner_of(v, u);
        return {v0, u0};
    }
};

inline SplitSketch build_split_sketch(const GridSpec& grid, int64_t k,
                                      int64_t u_lo, int64_t u_hi, int64_t d) {
    SplitSketch s;
    s.geom = build_sketch(grid, k, k, 0, 0, SinkMode::PerRequest);
    s.k = k;
    int64_t n = grid.n();
    int64_t r_lo = floor_div(1, k), r_hi = floor_div(n, k);
    int64_t c_lo = floor_div(u_lo, k), c_hi = floor_div(u_hi, k);
    DownscaleResult ds = downscale_12inf(d, 1);  // capacities only; p_max set by caller
    for (int64_t cu = c_lo; cu <= c_hi; ++cu) {
        for (int64_t rv = r_lo; rv <= r_hi; ++rv) {
            int64_t v0 = rv * k, u0 = cu * k;
            if (!s.geom.tile_has_real(v0, u0)) continue;
            int in = s.dag.add_node();
            int out = s.dag.add_node();
            s.tile_nodes[{v0, u0}] = {in, out};
            s.dag.add_edge(in, out, static_cast<double>(ds.interior_cap));
            s.meta.push_back({SplitSketch::Interior, {v0, u0}, {v0, u0}});
        }
    }
    for (const auto& [corner, nodes] : s.tile_nodes) {
        auto [v0, u0] = corner;
        TileCorner east{v0, u0 + k}, north{v0 + k, u0};
        if (auto it = s.tile_nodes.find(east); it != s.tile_nodes.end()) {
            s.dag.add_edge(nodes.second, it->second.first,
                           static_cast<double>(ds.intertile_cap));
            s.meta.push_back({SplitSketch::East, corner, east});
        }
        if (auto it = s.tile_nodes.find(north); it != s.tile_nodes.end()) {
            s.dag.add_edge(nodes.second, it->second.first,
                           static_cast<double>(ds.intertile_cap));
            s.meta.push_back({SplitSketch::North, corner, north});
        }
    }
    return s;
}

// Adds the per-request sink: edges from every tile containing a copy
// (b, t') with t in [t_lo, t_hi].
inline void add_request_sink(SplitSketch& s, const PacketRequest& req,
                             int64_t t_lo, int64_t t_hi) {
    int64_t b = req.b[0];
    int sink = s.dag.add_node();
    s.sink_of_req[req.id] = sink;
    int64_t k = s.k;
    int64_t v0 = floor_div(b, k) * k;
    int64_t cu_lo = floor_div(t_lo - b, k), cu_hi = floor_div(t_hi - b, k);
    for (int64_t cu = cu_lo; cu <= cu_hi; ++cu) {
        TileCorner corner{v0, cu * k};
        auto it = s.tile_nodes.find(corner);
        if (it == s.tile_nodes.end()) continue;
        // The tile must contain a copy inside the window.
        int64_t u_first = std::max(corner.second, t_lo - b);
        int64_t u_last = std::min(corner.second + k - 1, t_hi - b);
        if (u_first > u_last) continue;
        if (u_last + b < 0) continue;  // all copies before time 0
        s.dag.add_edge(it->second.second, sink,
                       std::numeric_limits<double>::infinity());
        s.meta.push_back({SplitSketch::Sink, corner, corner});
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Deterministic detailed-routing sweep.

namespace detail {

enum class Phase {
    FirstStraight,
    FirstBending,
    InternalStraight,
    InternalBending,
    LastSegment,
    LastTile,
    Done
};

struct Run {
    char dir = 'E';  // 'E' (buffer, +u) or 'N' (link, +v)
    int first_move = 0;
    int last_move = 0;
};

struct DPkt {
    int64_t id = 0;
    int64_t b = 0;
    int64_t deadline = kInfTime;
    std::vector<TileCorner> tiles;
    std::vector<char> moves;
    std::vector<Run> runs;
    Phase phase = Phase::FirstStraight;
    char dir = 'E';
    int run_idx = 0;
    int64_t v = 0, u = 0;
    bool alive = true;
    std::vector<STVertex> nodes;           // physical path (v, t)
    std::vector<TileCorner> proj;          // visited tiles
};

using LineKey = std::pair<int, int64_t>;  // (0, row v) or (1, column u)

class DetSweep {
  public:
    DetSweep(const GridSpec& grid, const SplitSketch& sketch, RouterResult& out)
        : grid_(grid), sketch_(sketch), out_(out), k_(sketch.k) {}

    // Injects an IPP-accepted request with its sketch tile sequence.
    // Returns false if the first interval offer already preempts the packet.
    void inject(const PacketRequest& req, std::vector<TileCorner> tiles,
                std::vector<char> moves) {
        DPkt p;
        p.id = req.id;
        p.b = req.b[0];
        p.deadline = req.deadline;
        p.tiles = std::move(tiles);
        p.moves = std::move(moves);
        for (size_t m = 0; m < p.moves.size(); ++m) {
            if (p.runs.empty() || p.runs.back().dir != p.moves[m])
                p.runs.push_back(Run{p.moves[m], static_cast<int>(m),
                                     static_cast<int>(m)});
            else
                p.runs.back().last_move = static_cast<int>(m);
        }
        p.v = req.a[0];
        p.u = req.t - req.a[0];
        p.nodes.push_back(STVertex{{p.v}, p.v + p.u});
        p.proj.push_back(tile_of_pos(p));
        ++out_.injected;

        int64_t id = p.id;
        pkts_[id] = std::move(p);
        DPkt& q = pkts_[id];

        if (q.runs.empty()) {
            enter_last_tile(q);
            if (q.alive && q.phase != Phase::Done) schedule(q);
            return;
        }
        q.dir = q.runs[0].dir;
        q.phase = Phase::FirstStraight;
        Interval iv = first_interval(q);
        if (!offer_special(q, iv)) return;  // preempted on arrival
        schedule(q);
    }

    // Runs the sweep for one time step (all packets positioned at time t).
    void step(int64_t t) {
        auto it = agenda_.find(t);
        if (it == agenda_.end()) return;
        std::vector<int64_t> ids = std::move(it->second);
        agenda_.erase(it);
        std::map<std::pair<int64_t, int64_t>, std::vector<int64_t>> by_node;
        for (int64_t id : ids) {
            auto pit = pkts_.find(id);
            if (pit == pkts_.end() || !pit->second.alive) continue;
            by_node[{pit->second.v, pit->second.u}].push_back(id);
        }
        for (auto& [node, group] : by_node) process_node(t, group);
    }

    bool idle() const { return agenda_.empty(); }
    std::optional<int64_t> next_time() const {
        if (agenda_.empty()) return std::nullopt;
        return agenda_.begin()->first;
    }

    void finalize() {
        for (auto& [id, p] : pkts_) {
            GR_CHECK(!p.alive, "DetSweep: packet still alive at finalize");
        }
    }

  private:
    const GridSpec& grid_;
    const SplitSketch& sketch_;
    RouterResult& out_;
    int64_t k_;
    std::map<int64_t, DPkt> pkts_;
    std::map<int64_t, std::vector<int64_t>> agenda_;  // time -> ids
    std::map<LineKey, PackState> lines_;
    std::map<LineKey, int64_t> line_owner_;  // owner id by active interval
    // Track ledgers: edge key (v, u, dir) per track.
    std::map<std::tuple<int64_t, int64_t, char>, int64_t> track_[3];

    TileCorner tile_of_pos(const DPkt& p) const {
        return sketch_.corner(p.v, p.u);
    }

    LineKey line_of(const DPkt& p) const {
        return p.dir == 'E' ? LineKey{0, p.v} : LineKey{1, p.u};
    }

    int64_t coord_of(const DPkt& p) const { return p.dir == 'E' ? p.u : p.v; }

    void schedule(DPkt& p) { agenda_[p.v + p.u].push_back(p.id); }

    // Interval of the first segment; see the segment geometry notes.
    Interval first_interval(const DPkt& p) const {
        char dir = p.runs[0].dir;
        int64_t start = dir == 'E' ? p.u : p.v;
        int64_t end;
        if (p.runs.size() == 1) {
            const TileCorner& last = p.tiles.back();
            end = dir == 'E' ? last.second : last.first;
        } else {
            const TileCorner& b1 = p.tiles[p.runs[1].first_move];
            if (p.runs.size() == 2)
                end = dir == 'E' ? b1.second : b1.first;  // forced bend at entry
            else
                end = (dir == 'E' ? b1.second : b1.first) + k_ - 1;  // adaptive
        }
        return Interval{start, end, p.id};
    }

    Interval last_interval(const DPkt& p) const {
        char dir = p.runs.back().dir;
        int64_t start = dir == 'E' ? p.u : p.v;
        const TileCorner& last = p.tiles.back();
        int64_t end = dir == 'E' ? last.second : last.first;
        return Interval{start, end, p.id};
    }

    // Offers a special-segment interval; handles preemption fallout.
    // Returns false if the offering packet itself lost.
    bool offer_special(DPkt& p, const Interval& iv) {
        LineKey key = line_of(p);
        OfferResult r = lines_[key].offer(iv);
        if (!r.accepted) {
            kill(p, p.v + p.u);
            return false;
        }
        if (r.preempted) {
            auto vit = pkts_.find(*r.preempted);
            GR_CHECK(vit != pkts_.end(), "offer_special: unknown victim");
            kill(vit->second, p.v + p.u);
        }
        return true;
    }

    void kill(DPkt& p, int64_t t) {
        if (!p.alive) return;
        p.alive = false;
        out_.outcomes[p.id] = Outcome::preempted(t);
        record_path(p, false);
        // Drop any active interval of the victim.
        if (p.phase == Phase::FirstStraight || p.phase == Phase::FirstBending ||
            p.phase == Phase::LastSegment)
            lines_[line_of(p)].retire(p.id);
        p.phase = Phase::Done;
    }

    void deliver(DPkt& p, int64_t t) {
        // The sink window is tile-grained: the detailed route may reach the
        // destination row in a column whose copy is already past the
        // deadline.  Such a packet is dropped at the destination, never
        // delivered late.
        if (t > p.deadline) {
            kill(p, t);
            return;
        }
        p.alive = false;
        p.phase = Phase::Done;
        out_.outcomes[p.id] = Outcome::delivered(t);
        record_path(p, true);
        auto& stats = out_.tile_stats[p.tiles.back()];
        ++stats.second;
    }

    void record_path(DPkt& p, bool delivered) {
        DetailedPathPlan plan;
        plan.id = p.id;
        plan.nodes = p.nodes;
        plan.delivered = delivered;
        out_.paths.push_back(std::move(plan));
        out_.detail_tiles[p.id] = p.proj;
    }

    void enter_last_tile(DPkt& p) {
        ++out_.reached_last_tile;
        ++out_.tile_stats[p.tiles.back()].first;
        p.phase = Phase::LastTile;
        p.dir = 'N';
        if (p.v == p.b) deliver(p, p.v + p.u);
    }

    // Entry transitions fired when a packet sits at the entry coordinate of
    // its next target tile.
    void handle_entry(DPkt& p) {
        if (p.phase == Phase::FirstStraight) {
            int target_idx;
            if (p.runs.size() == 1)
                target_idx = static_cast<int>(p.tiles.size()) - 1;
            else
                target_idx = p.runs[1].first_move;
            const TileCorner& tgt = p.tiles[target_idx];
            int64_t entry = p.dir == 'E' ? tgt.second : tgt.first;
            if (coord_of(p) != entry) return;
            if (p.runs.size() == 1) {
                lines_[line_of(p)].retire(p.id);
                enter_last_tile(p);
            } else if (p.runs.size() == 2) {
                lines_[line_of(p)].retire(p.id);
                start_last_segment(p);
            } else {
                p.phase = Phase::FirstBending;
                lines_[line_of(p)].mark_protected(p.id);
            }
        } else if (p.phase == Phase::InternalStraight) {
            int next_run = p.run_idx + 1;
            const TileCorner& tgt = p.tiles[p.runs[next_run].first_move];
            int64_t entry = p.dir == 'E' ? tgt.second : tgt.first;
            if (coord_of(p) != entry) return;
            if (next_run == static_cast<int>(p.runs.size()) - 1)
                start_last_segment(p);
            else
                p.phase = Phase::InternalBending;
        } else if (p.phase == Phase::LastSegment) {
            const TileCorner& tgt = p.tiles.back();
            int64_t entry = p.dir == 'E' ? tgt.second : tgt.first;
            if (coord_of(p) != entry) return;
            lines_[line_of(p)].retire(p.id);
            enter_last_tile(p);
        }
    }

    // The forced perpendicular turn at the entry of the last bend tile.
    void start_last_segment(DPkt& p) {
        p.run_idx = static_cast<int>(p.runs.size()) - 1;
        p.dir = p.runs.back().dir;
        p.phase = Phase::LastSegment;
        Interval iv = last_interval(p);
        offer_special(p, iv);
        // Entry into the last tile may already be here when the last
        // segment has length... it cannot: the interval is nonempty.
    }

    void claim_edge(int track, DPkt& p, char dir) {
        auto res = track_[track - 1].emplace(std::make_tuple(p.v, p.u, dir), p.id);
        GR_CHECK(res.second, "det_router: track edge double-claimed");
    }

    void do_move(DPkt& p, char dir, int track) {
        claim_edge(track, p, dir);
        if (dir == 'E')
            p.u += 1;
        else
            p.v += 1;
        GR_CHECK(p.v >= 1 && p.v <= grid_.n(), "det_router: moved off grid");
        GR_CHECK(p.v + p.u >= 0, "det_router: negative time");
        p.nodes.push_back(STVertex{{p.v}, p.v + p.u});
        TileCorner tc = tile_of_pos(p);
        if (p.proj.empty() || p.proj.back() != tc) p.proj.push_back(tc);
        schedule(p);
    }

    void process_node(int64_t t, const std::vector<int64_t>& group) {
        // 1. Entry transitions (may offer/preempt; victims are co-located).
        for (int64_t id : group) {
            DPkt& p = pkts_[id];
            if (!p.alive) continue;
            handle_entry(p);
        }
        // 2. Last-tile contention: all co-located track-3 runs collide;
        //    the nearest destination (then lowest id) survives.
        {
            std::vector<DPkt*> lt;
            for (int64_t id : group) {
                DPkt& p = pkts_[id];
                if (p.alive && p.phase == Phase::LastTile) lt.push_back(&p);
            }
            if (lt.size() > 1) {
                std::sort(lt.begin(), lt.end(), [](DPkt* x, DPkt* y) {
                    if (x->b != y->b) return x->b < y->b;
                    return x->id < y->id;
                });
                for (size_t i = 1; i < lt.size(); ++i) kill(*lt[i], t);
            }
        }
        // 3. Internal-track rules.
        DPkt* horz = nullptr;
        DPkt* vert = nullptr;
        for (int64_t id : group) {
            DPkt& p = pkts_[id];
            if (!p.alive) continue;
            if (p.phase != Phase::InternalStraight && p.phase != Phase::InternalBending)
                continue;
            if (p.dir == 'E') {
                GR_CHECK(!horz, "det_router: two internal packets on one in-edge");
                horz = &p;
            } else {
                GR_CHECK(!vert, "det_router: two internal packets on one in-edge");
                vert = &p;
            }
        }
        bool internal_out_taken[2] = {false, false};  // [0]='E', [1]='N'
        auto take = [&](char d) { internal_out_taken[d == 'N'] = true; };
        auto internal_bend = [&](DPkt& p) {
            p.run_idx += 1;
            p.dir = bend_target_of(p);
            p.phase = Phase::InternalStraight;
            take(p.dir);
            do_move(p, p.dir, 2);
        };
        auto internal_straight = [&](DPkt& p) {
            take(p.dir);
            do_move(p, p.dir, 2);
        };
        if (horz && vert) {
            bool hb = horz->phase == Phase::InternalBending;
            bool vb = vert->phase == Phase::InternalBending;
            if (hb && vb) {  // knock-knee swap
                internal_bend(*horz);
                internal_bend(*vert);
            } else {  // precedence to straight traffic; benders try later
                check_can_continue(*horz);
                check_can_continue(*vert);
                internal_straight(*horz);
                internal_straight(*vert);
            }
        } else if (horz || vert) {
            DPkt& p = horz ? *horz : *vert;
            if (p.phase == Phase::InternalBending)
                internal_bend(p);  // crossing input is null
            else
                internal_straight(p);
        }
        // 4. First-segment bends onto the internal track.
        for (int64_t id : group) {
            DPkt& p = pkts_[id];
            if (!p.alive || p.phase != Phase::FirstBending) continue;
            char want = p.runs[1].dir;
            if (!internal_out_taken[want == 'N']) {
                lines_[line_of(p)].retire(p.id);
                p.run_idx = 1;
                p.dir = want;
                p.phase = Phase::InternalStraight;
                take(want);
                do_move(p, want, 2);
            } else {
                check_can_continue(p);
                do_move(p, p.dir, 1);
            }
        }
        // 5. Remaining straight movers.
        for (int64_t id : group) {
            DPkt& p = pkts_[id];
            if (!p.alive) continue;
            switch (p.phase) {
                case Phase::FirstStraight:
                case Phase::LastSegment:
                    do_move(p, p.dir, 1);
                    break;
                case Phase::LastTile:
                    if (p.v == p.b) {
                        deliver(p, t);
                    } else {
                        do_move(p, 'N', 3);
                        if (p.v == p.b) deliver(p, p.v + p.u);
                    }
                    break;
                default:
                    break;  // handled above or done
            }
        }
    }

    char bend_target_of(const DPkt& p) const { return p.runs[p.run_idx].dir; }

    // A bender that is about to leave its bend tile without having bent is
    // a contract violation (internal routing "always succeeds").
    void check_can_continue(const DPkt& p) {
        bool bender = p.phase == Phase::InternalBending || p.phase == Phase::FirstBending;
        if (!bender) return;
        TileCorner tc = sketch_.corner(p.v, p.u);
        int64_t off = p.dir == 'E' ? p.u - tc.second : p.v - tc.first;
        GR_CHECK(off + 1 < k_,
                 "det_router: bend failed inside tile (internal-segment totality)");
    }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// d-dimensional internal node rules (micro-level; used by tests and by the
// d>=2 machinery).  Axes are 0..d; in_exit[j] is the desired exit axis of
// the path arriving on axis j, or nullopt when the in-edge is empty.

struct DdimNodeState {
    std::vector<std::optional<int>> in_exit;
};

// out[j] = axis of the input routed to out-edge j, or -1.
inline std::vector<int> route_internal_ddim(const DdimNodeState& st) {
    int m = static_cast<int>(st.in_exit.size());
    std::vector<int> out(m, -1);
    std::vector<bool> done(m, false);
    for (int j = 0; j < m; ++j) {
        if (done[j] || !st.in_exit[j]) continue;
        int lj = *st.in_exit[j];
        GR_CHECK(lj >= 0 && lj < m, "route_internal_ddim: bad exit axis");
        if (lj == j) {  // (a) straight
            out[j] = j;
            done[j] = true;
            continue;
        }
        if (st.in_exit[lj]) {
            if (*st.in_exit[lj] == j && !done[lj]) {  // (c) knock-knee swap
                out[lj] = j;
                out[j] = lj;
                done[j] = done[lj] = true;
            } else {  // (b)/(d) continue straight, try next crossing
                out[j] = j;
                done[j] = true;
            }
        } else {
            // (c) crossing input is null: the smallest-index bender targeting
            // lj gets to bend; others continue straight.
            bool smallest = true;
            for (int j2 = 0; j2 < j; ++j2)
                if (st.in_exit[j2] && *st.in_exit[j2] == lj && j2 != lj) smallest = false;
            if (smallest && out[lj] == -1) {
                out[lj] = j;
                done[j] = true;
            } else {
                out[j] = j;
                done[j] = true;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// The full deterministic pipeline (Algorithm 1 shape).

inline RouterResult run_deterministic(const std::vector<PacketRequest>& trace,
                                      const GridSpec& grid,
                                      const DetConfig& cfg = {}) {
    GR_CHECK(grid.dim() == 1, "run_deterministic: d=1 only");
    int64_t n = grid.n();
    GR_CHECK(grid.B >= 3 && grid.c >= 3, "run_deterministic: B,c >= 3 required");
    GR_CHECK(static_cast<double>(grid.B) <= log2_exact(n) + 1e-9 &&
                 static_cast<double>(grid.c) <= log2_exact(n) + 1e-9,
             "run_deterministic: B,c <= log2 n required");

    RouterResult out;
    out.metrics.algo = "det";
    out.p_max = pmax_line(n, grid.B, grid.c);
    out.k = tile_side_k(out.p_max);
    out.p_max_split = 2 * out.p_max + 1;
    int64_t horizon = cfg.horizon > 0 ? cfg.horizon : out.p_max;

    // Validate everything up front; invalid requests are Rejected.
    std::vector<PacketRequest> valid;
    for (const auto& r : trace) {
        if (validate_request(r, grid)) {
            out.outcomes[r.id] = Outcome::rejected();
        } else {
            valid.push_back(r);
        }
    }

    if (valid.empty()) {
        for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
        return out;
    }

    int64_t u_lo = kInfTime, u_hi = -kInfTime;
    for (const auto& r : valid) {
        u_lo = std::min(u_lo, r.t - r.a[0]);
        int64_t t_hi = std::min(r.deadline, r.t + horizon);
        u_hi = std::max(u_hi, t_hi - r.b[0] + 1);
    }
    detail::SplitSketch sk = detail::build_split_sketch(grid, out.k, u_lo, u_hi, 1);
    for (const auto& r : valid) {
        int64_t t_hi = std::min(r.deadline, r.t + horizon);
        detail::add_request_sink(sk, r, r.t, t_hi);
    }
    std::vector<double> caps;
    for (const auto& e : sk.dag.edges) caps.push_back(e.cap);
    PrimalDualState ipp(caps, out.p_max_split);

    // Group arrivals by time, then by node; Prop. 7 filter upstream.
    std::map<int64_t, std::vector<PacketRequest>> arrivals;
    for (const auto& r : valid) arrivals[r.t].push_back(r);

    detail::DetSweep sweep(grid, sk, out);

    auto process_arrivals = [&](int64_t t) {
        auto it = arrivals.find(t);
        if (it == arrivals.end()) return;
        std::map<Coord, std::vector<PacketRequest>> by_node;
        for (const auto& r : it->second) by_node[r.a].push_back(r);
        std::vector<PacketRequest> kept_all;
        for (auto& [node, rs] : by_node) {
            FilterResult f = filter_simultaneous(rs, grid);
            for (const auto& r : f.rejected) out.outcomes[r.id] = Outcome::rejected();
            for (const auto& r : f.kept) kept_all.push_back(r);
        }
        std::sort(kept_all.begin(), kept_all.end(),
                  [](const PacketRequest& x, const PacketRequest& y) {
                      return x.id < y.id;
                  });
        for (const auto& r : kept_all) {
            auto src_it = sk.tile_nodes.find(sk.corner(r.a[0], r.t - r.a[0]));
            GR_CHECK(src_it != sk.tile_nodes.end(),
                     "run_deterministic: source tile missing");
            PathQuery q;
            q.source = src_it->second.first;
            q.dests = {sk.sink_of_req.at(r.id)};
            q.hop_bound = out.p_max_split;
            auto path = ipp.process(sk.dag, q, r.id);
            if (!path) {
                out.outcomes[r.id] = Outcome::rejected();
                continue;
            }
            // Extract tile sequence and moves.
            std::vector<TileCorner> tiles;
            std::vector<char> moves;
            tiles.push_back(sk.meta[(*path)[0]].from);
            for (int ei : *path) {
                const auto& m = sk.meta[ei];
                if (m.kind == detail::SplitSketch::East) {
                    tiles.push_back(m.to);
                    moves.push_back('E');
                } else if (m.kind == detail::SplitSketch::North) {
                    tiles.push_back(m.to);
                    moves.push_back('N');
                }
            }
            out.sketch_tiles[r.id] = tiles;
            sweep.inject(r, std::move(tiles), std::move(moves));
        }
        arrivals.erase(it);
    };

    // Interleave arrivals and the movement sweep in time order.
    while (!arrivals.empty() || !sweep.idle()) {
        int64_t t;
        auto nt = sweep.next_time();
        if (!arrivals.empty() && (!nt || arrivals.begin()->first <= *nt))
            t = arrivals.begin()->first;
        else
            t = *nt;
        process_arrivals(t);
        sweep.step(t);
    }
    sweep.finalize();

    out.ipp_cert = ipp.certify_or_die();
    for (const auto& r : trace)
        if (!out.outcomes.count(r.id))
            out.outcomes[r.id] = Outcome::rejected();
    for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
    GR_CHECK(out.metrics.total() == static_cast<int64_t>(trace.size()),
             "run_deterministic: outcome conservation violated");

    // Analysis throughput bounds.  Finite deadlines can force drops at the
    // destination itself, so the bounds are only enforced for unconstrained
    // traces.
    bool all_unconstrained = std::none_of(
        valid.begin(), valid.end(),
        [](const PacketRequest& r) { return r.has_deadline(); });
    if (all_unconstrained) {
        GR_CHECK(out.reached_last_tile * 2 * out.k >= out.injected,
                 "run_deterministic: admission-to-last-tile bound violated");
        for (const auto& [tc, st] : out.tile_stats)
            GR_CHECK(st.second * 2 * out.k >= st.first,
                     "run_deterministic: per-tile delivery bound violated");
    }

    // Projection invariant for delivered packets.
    for (const auto& [id, o] : out.outcomes) {
        if (o.kind != OutcomeKind::Delivered) continue;
        GR_CHECK(out.detail_tiles.at(id) == out.sketch_tiles.at(id),
                 "run_deterministic: projection invariant violated");
    }
    return out;
}

// Deadline pipeline: identical reduction; run_deterministic already routes
// every request toward its per-request deadline-window sink.
inline RouterResult route_with_deadlines(const std::vector<PacketRequest>& trace,
                                         const GridSpec& grid,
                                         const DetConfig& cfg = {}) {
    RouterResult r = run_deterministic(trace, grid, cfg);
    r.metrics.algo = "det-deadline";
    return r;
}

// ---------------------------------------------------------------------------
// Bufferless variant.  d=1 degenerates to nearest-to-go (an optimal
// policy).  For d >= 2 the untilted space-time graph splits into
// unconnected d-dimensional grids (one per value of t - sum x_i); each
// component is packed online with hard residual-capacity admission and the
// destination is the single node (b, t + L1(a,b)).
inline RouterResult run_bufferless(const std::vector<PacketRequest>& trace,
                                   const GridSpec& grid) {
    GR_CHECK(grid.B == 0, "run_bufferless: B=0 required");
    if (grid.dim() == 1) {
        RouterResult out;
        NtgResult r = nearest_to_go(trace, grid);
        out.outcomes = std::move(r.outcomes);
        out.paths = std::move(r.paths);
        out.metrics = r.metrics;
        out.metrics.algo = "bufferless";
        return out;
    }

    // d >= 2: per-component online path packing on the d-grid.
    RouterResult out;
    out.metrics.algo = "bufferless";
    int d = grid.dim();
    int64_t diam = grid.diam();
    out.p_max = diam;  // every monotone source->destination path is shortest

    // Component id of a request: t - sum a_i.  Each component is the d-grid
    // itself; edges are (axis, position) with capacity c.
    struct Component {
        Dag dag;
        std::map<Coord, int> node_of;
        std::vector<std::pair<Coord, int>> edge_meta;  // (from, axis)
        std::optional<PrimalDualState> ipp;
    };
    std::map<int64_t, Component> comps;

    auto build_component = [&]() {
        Component comp;
        // Enumerate all grid vertices in lexicographic order.
        std::vector<Coord> verts;
        Coord cur(d, 1);
        while (true) {
            verts.push_back(cur);
            int ax = d - 1;
            while (ax >= 0) {
                if (++cur[ax] <= grid.dims[ax]) break;
                cur[ax] = 1;
                --ax;
            }
            if (ax < 0) break;
        }
        for (const auto& v : verts) comp.node_of[v] = comp.dag.add_node();
        for (const auto& v : verts)
            for (int ax = 0; ax < d; ++ax)
                if (v[ax] + 1 <= grid.dims[ax]) {
                    Coord w = v;
                    w[ax] += 1;
                    comp.dag.add_edge(comp.node_of[v], comp.node_of[w],
                                      static_cast<double>(grid.c));
                    comp.edge_meta.push_back({v, ax});
                }
        comp.ipp.emplace(
            [&] {
                std::vector<double> caps;
                for (const auto& e : comp.dag.edges) caps.push_back(e.cap);
                return caps;
            }(),
            std::max<int64_t>(diam, 1));
        return comp;
    };

    std::vector<PacketRequest> sorted = trace;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PacketRequest& x, const PacketRequest& y) {
                         if (x.t != y.t) return x.t < y.t;
                         return x.id < y.id;
                     });
    for (const auto& r : sorted) {
        if (validate_request(r, grid)) {
            out.outcomes[r.id] = Outcome::rejected();
            continue;
        }
        int64_t key = r.t;
        for (int ax = 0; ax < d; ++ax) key -= r.a[ax];
        auto [cit, fresh] = comps.try_emplace(key);
        if (fresh) cit->second = build_component();
        Component& comp = cit->second;
        PathQuery q;
        q.source = comp.node_of.at(r.a);
        q.dests = {comp.node_of.at(r.b)};
        q.hop_bound = std::max<int64_t>(diam, 1);
        auto path = lightest_bounded_path(comp.dag, comp.ipp->weights(), q);
        bool ok = path.has_value();
        if (ok)  // hard residual check keeps true capacities intact
            for (int ei : *path)
                if (comp.ipp->flow(ei) + 1 > grid.c) ok = false;
        if (ok) ok = comp.ipp->decide(r.id, *path);
        if (!ok) {
            out.outcomes[r.id] = Outcome::rejected();
            continue;
        }
        // Materialize the space-time path (every edge advances t by 1).
        DetailedPathPlan plan;
        plan.id = r.id;
        Coord pos = r.a;
        int64_t t = r.t;
        plan.nodes.push_back(STVertex{pos, t});
        for (int ei : *path) {
            pos[comp.edge_meta[ei].second] += 1;
            ++t;
            plan.nodes.push_back(STVertex{pos, t});
        }
        plan.delivered = true;
        out.outcomes[r.id] = Outcome::delivered(t);
        out.paths.push_back(std::move(plan));
    }
    for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
    return out;
}

// ---------------------------------------------------------------------------
// Large-capacity variant (B, c >= k): online path packing directly on the
// space-time graph with scaled capacities B' = floor(B/k), c' = floor(c/k);
// accepted paths are used verbatim and never preempted.
inline RouterResult run_large_capacity(const std::vector<PacketRequest>& trace,
                                       const GridSpec& grid,
                                       const DetConfig& cfg = {}) {
    GR_CHECK(grid.dim() == 1, "run_large_capacity: d=1 only");
    int64_t n = grid.n();
    RouterResult out;
    out.metrics.algo = "large-capacity";
    out.p_max = pmax_st_line(n, grid.B, grid.c);
    int64_t k = tile_side_k(pmax_line(n, grid.B, grid.c));
    out.k = k;
    GR_CHECK(grid.B >= k && grid.c >= k, "run_large_capacity: B,c >= k required");
    int64_t Bs = grid.B / k, cs = grid.c / k;

    std::vector<PacketRequest> valid;
    int64_t t_lo = kInfTime, t_hi = -kInfTime;
    for (const auto& r : trace) {
        if (validate_request(r, grid)) {
            out.outcomes[r.id] = Outcome::rejected();
            continue;
        }
        valid.push_back(r);
        t_lo = std::min(t_lo, r.t);
        t_hi = std::max(t_hi, std::min(r.deadline,
                                       r.t + (cfg.horizon > 0 ? cfg.horizon
                                                              : out.p_max)));
    }
    if (valid.empty()) {
        for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
        return out;
    }

    // Space-time DAG over the window [t_lo, t_hi].
    Dag dag;
    auto node_id = [&](int64_t v, int64_t t) {
        return static_cast<int>((t - t_lo) * n + (v - 1));
    };
    int64_t T = t_hi - t_lo;
    for (int64_t i = 0; i < (T + 1) * n; ++i) dag.add_node();
    std::vector<std::pair<int64_t, int64_t>> edge_from;  // (v, t)
    std::vector<bool> edge_is_move;
    for (int64_t t = t_lo; t < t_hi; ++t)
        for (int64_t v = 1; v <= n; ++v) {
            dag.add_edge(node_id(v, t), node_id(v, t + 1), static_cast<double>(Bs));
            edge_from.push_back({v, t});
            edge_is_move.push_back(false);
            if (v < n) {
                dag.add_edge(node_id(v, t), node_id(v + 1, t + 1),
                             static_cast<double>(cs));
                edge_from.push_back({v, t});
                edge_is_move.push_back(true);
            }
        }
    std::vector<double> caps;
    for (const auto& e : dag.edges) caps.push_back(e.cap);
    PrimalDualState ipp(caps, out.p_max);

    std::vector<PacketRequest> sorted = valid;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PacketRequest& x, const PacketRequest& y) {
                         if (x.t != y.t) return x.t < y.t;
                         return x.id < y.id;
                     });
    for (const auto& r : sorted) {
        PathQuery q;
        q.source = node_id(r.a[0], r.t);
        int64_t dl = std::min(r.deadline, t_hi);
        for (int64_t t = r.t + l1_dist(r.a, r.b); t <= dl; ++t)
            q.dests.push_back(node_id(r.b[0], t));
        q.hop_bound = out.p_max;
        std::optional<std::vector<int>> path;
        if (!q.dests.empty()) path = ipp.process(dag, q, r.id);
        if (!path) {
            out.outcomes[r.id] = Outcome::rejected();
            continue;
        }
        DetailedPathPlan plan;
        plan.id = r.id;
        int64_t v = r.a[0], t = r.t;
        plan.nodes.push_back(STVertex{{v}, t});
        for (int ei : *path) {
            if (edge_is_move[ei]) ++v;
            ++t;
            plan.nodes.push_back(STVertex{{v}, t});
        }
        GR_CHECK(v == r.b[0], "run_large_capacity: path misses destination");
        plan.delivered = true;
        out.outcomes[r.id] = Outcome::delivered(t);
        out.paths.push_back(std::move(plan));
    }
    out.ipp_cert = ipp.certify_or_die();
    for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
    GR_CHECK(out.metrics.preempted == 0, "run_large_capacity: preemption-free");
    return out;
}

}  // namespace gridroute
