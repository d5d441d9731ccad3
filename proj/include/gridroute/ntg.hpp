#pragma once

// Nearest-to-go policy on the uni-directional line: at every node and step,
// the c packets with the least remaining distance are forwarded, the next B
// are buffered, and the rest are dropped.  With B = 0 this is the
// bufferless algorithm (an optimal policy on the line).

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/sim.hpp"

namespace gridroute {

struct NtgResult {
    std::map<int64_t, Outcome> outcomes;
    RunMetrics metrics;
    std::vector<DetailedPathPlan> paths;
};

inline NtgResult nearest_to_go(const std::vector<PacketRequest>& trace,
                               const GridSpec& grid) {
    GR_CHECK(grid.dim() == 1, "nearest_to_go: d=1 only");
    NtgResult out;
    out.metrics.algo = "ntg";

    struct Live {
        int64_t id, v, b;
        std::vector<STVertex> nodes;
    };
    std::map<int64_t, std::vector<PacketRequest>> arrivals;
    for (const auto& r : trace) {
        if (validate_request(r, grid))
            out.outcomes[r.id] = Outcome::rejected();
        else
            arrivals[r.t].push_back(r);
    }

    std::vector<Live> live;
    auto flush = [&](Live& p, bool delivered, int64_t t) {
        out.outcomes[p.id] =
            delivered ? Outcome::delivered(t) : Outcome::preempted(t);
        DetailedPathPlan plan;
        plan.id = p.id;
        plan.nodes = std::move(p.nodes);
        plan.delivered = delivered;
        out.paths.push_back(std::move(plan));
    };

    int64_t t = arrivals.empty() ? 0 : arrivals.begin()->first;
    while (!arrivals.empty() || !live.empty()) {
        if (live.empty() && !arrivals.empty()) t = arrivals.begin()->first;
        if (auto it = arrivals.find(t); it != arrivals.end()) {
            for (const auto& r : it->second) {
                Live p{r.id, r.a[0], r.b[0], {STVertex{{r.a[0]}, t}}};
                live.push_back(std::move(p));
            }
            arrivals.erase(it);
        }
        // Deliveries happen on arrival and never contend.
        std::vector<Live> rest;
        for (auto& p : live) {
            if (p.v == p.b)
                flush(p, true, t);
            else
                rest.push_back(std::move(p));
        }
        live = std::move(rest);
        // Per-node contention, nearest remaining destination first.
        std::map<int64_t, std::vector<Live*>> by_node;
        for (auto& p : live) by_node[p.v].push_back(&p);
        std::vector<int64_t> dropped_ids;
        for (auto& [v, ps] : by_node) {
            std::sort(ps.begin(), ps.end(), [](const Live* x, const Live* y) {
                int64_t dx = x->b - x->v, dy = y->b - y->v;
                if (dx != dy) return dx < dy;
                return x->id < y->id;
            });
            for (size_t i = 0; i < ps.size(); ++i) {
                if (i < static_cast<size_t>(grid.c)) {
                    ps[i]->v += 1;
                    ps[i]->nodes.push_back(STVertex{{ps[i]->v}, t + 1});
                } else if (i < static_cast<size_t>(grid.c + grid.B)) {
                    ps[i]->nodes.push_back(STVertex{{ps[i]->v}, t + 1});
                } else {
                    dropped_ids.push_back(ps[i]->id);
                }
            }
        }
        if (!dropped_ids.empty()) {
            std::vector<Live> keep;
            for (auto& p : live) {
                if (std::find(dropped_ids.begin(), dropped_ids.end(), p.id) !=
                    dropped_ids.end()) {
                    p.nodes.resize(p.nodes.size());  // path ends here, at time t
                    flush(p, false, t);
                } else {
                    keep.push_back(std::move(p));
                }
            }
            live = std::move(keep);
        }
        ++t;
    }
    for (const auto& [id, o] : out.outcomes) out.metrics.count(o);
    return out;
}

}  // namespace gridroute
