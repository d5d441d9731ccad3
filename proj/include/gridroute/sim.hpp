#pragma once

// Synchronous store-and-forward simulator (single-phase node semantics):
// in one step a node receives up to c packets per in-link plus its buffer
// contents plus local injections, and emits up to B packets to its buffer
// and up to c per out-link.  The simulator executes decisions and verifies;
// it never chooses routes.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/spacetime.hpp"

namespace gridroute {

enum class ActionKind { Forward, Store, Drop, Deliver };

struct Decision {
    int64_t packet_id = 0;
    ActionKind action = ActionKind::Store;
    int axis = -1;  // forwarding axis for Forward
};

struct Violation {
    int64_t t = 0;
    std::string what;
};

struct StepReport {
    int64_t t = 0;
    int64_t forwards = 0;
    int64_t stores = 0;
    int64_t deliveries = 0;
    int64_t drops = 0;
    std::vector<Violation> violations;
};

struct SimPacket {
    int64_t id = 0;
    Coord pos;
    Coord dest;
    int64_t deadline = kInfTime;
};

class SimEngine {
  public:
    explicit SimEngine(GridSpec grid) : grid_(std::move(grid)) {}

    // Injects a packet at its source at the current step.
    void inject(const SimPacket& p) {
        GR_CHECK(!live_.count(p.id), "SimEngine: duplicate packet id");
        live_[p.id] = p;
    }

    // Applies one synchronous step.  Every live packet must receive exactly
    // one decision; capacity and buffer overruns are recorded as violations
    // (the packets still move: the verifier reports, it does not police).
    StepReport step(int64_t t, const std::vector<Decision>& decisions) {
        StepReport rep;
        rep.t = t;
        std::map<std::pair<Coord, int>, int64_t> link_use;  // (from,axis) -> count
        std::map<Coord, int64_t> buffer_use;
        std::map<int64_t, bool> decided;
        for (const auto& d : decisions) {
            auto it = live_.find(d.packet_id);
            if (it == live_.end()) {
                rep.violations.push_back(
                    {t, "decision for unknown packet " + std::to_string(d.packet_id)});
                continue;
            }
            GR_CHECK(!decided[d.packet_id], "SimEngine: duplicate decision");
            decided[d.packet_id] = true;
            SimPacket& p = it->second;
            switch (d.action) {
                case ActionKind::Forward: {
                    if (d.axis < 0 || d.axis >= grid_.dim() ||
                        p.pos[d.axis] + 1 > grid_.dims[d.axis]) {
                        rep.violations.push_back(
                            {t, "forward off-grid for packet " +
                                    std::to_string(d.packet_id)});
                        break;
                    }
                    int64_t used = ++link_use[{p.pos, d.axis}];
                    if (used > grid_.c)
                        rep.violations.push_back(
                            {t, "link capacity exceeded at " +
                                    coord_to_string(p.pos) + " axis " +
                                    std::to_string(d.axis)});
                    p.pos[d.axis] += 1;
                    ++rep.forwards;
                    break;
                }
                case ActionKind::Store: {
                    int64_t used = ++buffer_use[p.pos];
                    if (used > grid_.B)
                        rep.violations.push_back(
                            {t, "buffer overflow at " + coord_to_string(p.pos)});
                    ++rep.stores;
                    break;
                }
                case ActionKind::Drop:
                    dropped_[p.id] = t;
                    live_.erase(it);
                    ++rep.drops;
                    break;
                case ActionKind::Deliver: {
                    if (p.pos != p.dest)
                        rep.violations.push_back(
                            {t, "delivery away from destination, packet " +
                                    std::to_string(d.packet_id)});
                    int64_t arrival = t;
                    if (arrival > p.deadline)
                        rep.violations.push_back(
                            {t, "late delivery, packet " +
                                    std::to_string(d.packet_id)});
                    delivered_[p.id] = arrival;
                    live_.erase(it);
                    ++rep.deliveries;
                    break;
                }
            }
        }
        for (const auto& [id, p] : live_)
            if (!decided.count(id))
                rep.violations.push_back(
                    {t, "live packet without decision: " + std::to_string(id)});
        return rep;
    }

    const std::map<int64_t, int64_t>& delivered() const { return delivered_; }
    const std::map<int64_t, int64_t>& dropped() const { return dropped_; }
    size_t live_count() const { return live_.size(); }

  private:
    GridSpec grid_;
    std::map<int64_t, SimPacket> live_;
    std::map<int64_t, int64_t> delivered_;
    std::map<int64_t, int64_t> dropped_;
};

// ---------------------------------------------------------------------------
// Replay: turn planned space-time paths into per-step decisions and verify.

struct DetailedPathPlan {
    int64_t id = 0;
    std::vector<STVertex> nodes;  // consecutive times, E0/E1 steps
    bool delivered = false;       // router's claim: last node is a delivery
};

struct ReplayResult {
    RunMetrics metrics;
    std::vector<Violation> violations;
    std::map<int64_t, int64_t> arrivals;
    int64_t e1_steps = 0;  // buffering steps used (for bufferless checks)
};

inline ReplayResult replay(const std::vector<DetailedPathPlan>& paths,
                           const std::vector<PacketRequest>& trace,
                           const GridSpec& grid) {
    ReplayResult out;
    out.metrics.algo = "replay";
    std::map<int64_t, const PacketRequest*> req_by_id;
    for (const auto& r : trace) req_by_id[r.id] = &r;

    // Validate path shape and find the time window.
    int64_t t_lo = kInfTime, t_hi = -kInfTime;
    for (const auto& p : paths) {
        GR_CHECK(!p.nodes.empty(), "replay: empty path");
        for (size_t i = 0; i + 1 < p.nodes.size(); ++i) {
            const auto& x = p.nodes[i];
            const auto& y = p.nodes[i + 1];
            GR_CHECK(y.t == x.t + 1, "replay: non-unit time step in path");
            int64_t moved = l1_dist(x.v, y.v);
            GR_CHECK(moved == 0 || moved == 1, "replay: non-adjacent hop");
            if (moved == 0) ++out.e1_steps;
        }
        t_lo = std::min(t_lo, p.nodes.front().t);
        t_hi = std::max(t_hi, p.nodes.back().t);
    }
    if (paths.empty()) return out;

    SimEngine sim(grid);
    std::map<int64_t, size_t> cursor;  // packet id -> index into its path
    std::map<int64_t, const DetailedPathPlan*> plan_by_id;
    for (const auto& p : paths) plan_by_id[p.id] = &p;

    for (int64_t t = t_lo; t <= t_hi; ++t) {
        for (const auto& p : paths)
            if (p.nodes.front().t == t) {
                const PacketRequest* rq = req_by_id.count(p.id) ? req_by_id[p.id] : nullptr;
                SimPacket sp;
                sp.id = p.id;
                sp.pos = p.nodes.front().v;
                sp.dest = rq ? rq->b : p.nodes.back().v;
                sp.deadline = rq ? rq->deadline : kInfTime;
                sim.inject(sp);
                cursor[p.id] = 0;
            }
        std::vector<Decision> ds;
        for (auto& [id, idx] : cursor) {
            if (idx == SIZE_MAX) continue;  // finished
            const DetailedPathPlan* plan = plan_by_id[id];
            if (idx + 1 < plan->nodes.size()) {
                const auto& x = plan->nodes[idx];
                const auto& y = plan->nodes[idx + 1];
                Decision d;
                d.packet_id = id;
                if (x.v == y.v) {
                    d.action = ActionKind::Store;
                } else {
                    d.action = ActionKind::Forward;
                    for (int ax = 0; ax < grid.dim(); ++ax)
                        if (y.v[ax] == x.v[ax] + 1) d.axis = ax;
                }
                ds.push_back(d);
                ++idx;
            } else {
                Decision d;
                d.packet_id = id;
                d.action = plan->delivered ? ActionKind::Deliver : ActionKind::Drop;
                ds.push_back(d);
                idx = SIZE_MAX;
            }
        }
        StepReport rep = sim.step(t, ds);
        for (auto& v : rep.violations) out.violations.push_back(std::move(v));
    }

    out.arrivals = sim.delivered();
    out.metrics.throughput = static_cast<int64_t>(sim.delivered().size());
    out.metrics.preempted = static_cast<int64_t>(sim.dropped().size());
    out.metrics.in_flight = static_cast<int64_t>(sim.live_count());
    return out;
}

}  // namespace gridroute
