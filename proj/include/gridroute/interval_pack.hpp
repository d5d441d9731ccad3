#pragma once

// Online packing of open intervals on a line with preemption, the
// preemption-forest bookkeeping, and a brute-force maximum-disjoint-set
// oracle.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "gridroute/core.hpp"

namespace gridroute {

struct Interval {
    int64_t a = 0;  // left endpoint (open)
    int64_t b = 0;  // right endpoint (open)
    int64_t owner = 0;
};

// Open-interval intersection: endpoints may touch.
inline bool intervals_intersect(const Interval& x, const Interval& y) {
    return x.a < y.b && y.a < x.b;
}

struct OfferResult {
    bool accepted = false;
    std::optional<int64_t> preempted;    // id evicted by this acceptance
    std::optional<int64_t> rejected_by;  // incumbent that beat this offer
};

// One PackState per line (row or column).  Arrivals must come sorted by
// left endpoint; this is asserted, not handled.
class PackState {
  public:
    // Offers follow the listing: disjoint -> accept; intersecting incumbent
    // p_j: b_i > b_j -> reject, b_i <= b_j -> accept and preempt p_j.
    // Incumbents marked protected reject any intersecting newcomer (a
    // request that reached its bend tile is never preempted afterwards).
    OfferResult offer(const Interval& p) {
        GR_CHECK(p.a < p.b, "PackState::offer: empty interval");
        GR_CHECK(p.a >= last_a_, "PackState::offer: unsorted arrival");
        last_a_ = p.a;

        std::vector<int64_t> hits;
        for (const auto& [id, q] : active_)
            if (intervals_intersect(p, q)) hits.push_back(id);
        GR_CHECK(hits.size() <= 1,
                 "PackState::offer: multiple intersecting intervals");

        OfferResult r;
        if (hits.empty()) {
            active_[p.owner] = p;
            intervals_[p.owner] = p;
            r.accepted = true;
            return r;
        }
        int64_t jid = hits[0];
        const Interval& pj = active_[jid];
        if (protected_.count(jid) || p.b > pj.b) {
            r.accepted = false;
            r.rejected_by = jid;
            forest_[p.owner] = jid;  // counts as preempted-on-arrival
            intervals_[p.owner] = p;
            return r;
        }
        // p preempts pj.
        active_.erase(jid);
        forest_[jid] = p.owner;
        active_[p.owner] = p;
        intervals_[p.owner] = p;
        r.accepted = true;
        r.preempted = jid;
        return r;
    }

    // A run that entered its target tile can no longer be preempted.
    void mark_protected(int64_t id) {
        if (active_.count(id)) protected_.insert(id);
    }

    // Remove a completed run from the packing (its edges are in the past).
    void retire(int64_t id) {
        active_.erase(id);
        protected_.erase(id);
    }

    size_t active_count() const { return active_.size(); }
    const std::map<int64_t, Interval>& active() const { return active_; }
    const std::map<int64_t, int64_t>& forest() const { return forest_; }
    const std::map<int64_t, Interval>& all_intervals() const { return intervals_; }

    // Prop. 4 forest property: for every ancestor i and descendant j, the
    // unit edge (b_i - 1, b_i) lies inside I_j.
    bool check_forest_property() const {
        for (const auto& [j, _] : forest_) {
            int64_t anc = j;
            while (forest_.count(anc)) {
                anc = forest_.at(anc);
                const Interval& Ii = intervals_.at(anc);
                const Interval& Ij = intervals_.at(j);
                if (!(Ij.a <= Ii.b - 1 && Ii.b <= Ij.b)) return false;
            }
        }
        return true;
    }

  private:
    int64_t last_a_ = INT64_MIN;
    std::map<int64_t, Interval> active_;     // I'
    std::map<int64_t, Interval> intervals_;  // every interval ever offered
    std::map<int64_t, int64_t> forest_;      // preempted id -> preemptor id
    std::set<int64_t> protected_;
};

// Exact maximum number of pairwise-disjoint open intervals: greedy by right
// endpoint (optimal for interval graphs).
inline int64_t brute_force_mis(std::vector<Interval> xs) {
    std::sort(xs.begin(), xs.end(), [](const Interval& x, const Interval& y) {
        return x.b < y.b;
    });
    int64_t count = 0, frontier = INT64_MIN;
    for (const auto& x : xs) {
        if (x.a >= frontier) {  // open intervals: touching endpoints are fine
            ++count;
            frontier = x.b;
        }
    }
    return count;
}

// Exhaustive cross-check for small inputs.
inline int64_t brute_force_mis_exhaustive(const std::vector<Interval>& xs) {
    GR_CHECK(xs.size() <= 20, "brute_force_mis_exhaustive: too many intervals");
    int64_t best = 0;
    for (uint32_t mask = 0; mask < (1u << xs.size()); ++mask) {
        bool ok = true;
        for (size_t i = 0; ok && i < xs.size(); ++i)
            for (size_t j = i + 1; ok && j < xs.size(); ++j)
                if ((mask >> i & 1) && (mask >> j & 1) &&
                    intervals_intersect(xs[i], xs[j]))
                    ok = false;
        if (ok) best = std::max<int64_t>(best, __builtin_popcount(mask));
    }
    return best;
}

}  // namespace gridroute
