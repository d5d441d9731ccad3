#pragma once

// Benchmarking: an exact offline schedule oracle for tiny line instances
// (memoized search over per-step decision vectors, with witness
// reconstruction), an exact candidate-path packing oracle, trace
// generators, and a CSV experiment harness.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gridroute/core.hpp"
#include "gridroute/det_router.hpp"
#include "gridroute/ntg.hpp"
#include "gridroute/rand_router.hpp"
#include "gridroute/sim.hpp"

namespace gridroute {

// ---------------------------------------------------------------------------
// Exact schedule oracle (d=1).

struct BfLimits {
    int64_t max_n = 8;
    int64_t max_requests = 10;
    int64_t horizon = 12;  // steps past the last arrival
};

struct BfResult {
    int64_t opt = 0;
    std::vector<DetailedPathPlan> witness;
};

namespace detail {

struct BfPkt {
    int64_t id, v, b, dl;
};

class BruteForceOpt {
  public:
    BruteForceOpt(const std::vector<PacketRequest>& trace, const GridSpec& grid,
                  const BfLimits& lim)
        : grid_(grid), lim_(lim) {
        GR_CHECK(grid.dim() == 1, "brute_force_opt: d=1 only");
        GR_CHECK(grid.n() <= lim.max_n, "brute_force_opt: n limit exceeded");
        GR_CHECK(static_cast<int64_t>(trace.size()) <= lim.max_requests,
                 "brute_force_opt: request limit exceeded");
        int64_t t_max = 0;
        for (const auto& r : trace) {
            if (validate_request(r, grid)) continue;
            arrivals_[r.t].push_back(BfPkt{r.id, r.a[0], r.b[0], r.deadline});
            t_max = std::max(t_max, r.t);
        }
        t_limit_ = t_max + lim.horizon;
    }

    BfResult run() {
        BfResult res;
        if (arrivals_.empty()) return res;
        int64_t t0 = arrivals_.begin()->first;
        res.opt = solve(t0, {});
        reconstruct(t0, res);
        return res;
    }

  private:
    GridSpec grid_;
    BfLimits lim_;
    std::map<int64_t, std::vector<BfPkt>> arrivals_;
    int64_t t_limit_ = 0;
    std::map<std::vector<int64_t>, int64_t> memo_;

    std::vector<int64_t> key_of(int64_t t, const std::vector<BfPkt>& live) {
        std::vector<std::vector<int64_t>> rows;
        for (const auto& p : live) rows.push_back({p.v, p.b, p.dl});
        std::sort(rows.begin(), rows.end());
        std::vector<int64_t> key{t};
        for (const auto& r : rows) key.insert(key.end(), r.begin(), r.end());
        return key;
    }

    // Enumerate one synchronous step: arrivals merge in, on-destination
    // packets deliver, then per node up to c forward, up to B buffer, the
    // rest drop.  Calls fn(gained, next_live) for every decision vector.
    template <typename Fn>
    void enumerate(int64_t t, std::vector<BfPkt> live, Fn&& fn) {
        if (auto it = arrivals_.find(t); it != arrivals_.end())
            for (const auto& p : it->second) live.push_back(p);
        int64_t gained = 0;
        std::vector<BfPkt> moving;
        for (const auto& p : live) {
            if (p.v == p.b) {
                if (t <= p.dl) ++gained;
            } else {
                moving.push_back(p);
            }
        }
        std::map<int64_t, std::vector<BfPkt>> by_node;
        for (const auto& p : moving) by_node[p.v].push_back(p);
        std::vector<std::vector<BfPkt>> nodes;
        for (auto& [v, ps] : by_node) nodes.push_back(ps);
        std::vector<BfPkt> next;
        expand_nodes(0, nodes, next, gained, fn);
    }

    template <typename Fn>
    void expand_nodes(size_t i, const std::vector<std::vector<BfPkt>>& nodes,
                      std::vector<BfPkt>& acc, int64_t gained, Fn&& fn) {
        if (i == nodes.size()) {
            fn(gained, acc);
            return;
        }
        const auto& ps = nodes[i];
        int m = static_cast<int>(ps.size());
        for (uint32_t fwd = 0; fwd < (1u << m); ++fwd) {
            if (__builtin_popcount(fwd) > grid_.c) continue;
            uint32_t rest = ((1u << m) - 1) & ~fwd;
            // Enumerate buffer subsets of the rest.
            for (uint32_t buf = rest;; buf = (buf - 1) & rest) {
                if (__builtin_popcount(buf) <= grid_.B) {
                    size_t mark = acc.size();
                    for (int j = 0; j < m; ++j) {
                        if (fwd >> j & 1) {
                            BfPkt q = ps[j];
                            q.v += 1;
                            acc.push_back(q);
                        } else if (buf >> j & 1) {
                            acc.push_back(ps[j]);
                        }
                    }
                    expand_nodes(i + 1, nodes, acc, gained, fn);
                    acc.resize(mark);
                }
                if (buf == 0) break;
            }
        }
    }

    int64_t solve(int64_t t, const std::vector<BfPkt>& live) {
        bool more_arrivals = !arrivals_.empty() && arrivals_.rbegin()->first >= t;
        if (live.empty() && !more_arrivals) return 0;
        if (t > t_limit_) return 0;
        auto key = key_of(t, live);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        int64_t best = 0;
        std::set<std::vector<int64_t>> seen;
        enumerate(t, live, [&](int64_t gained, const std::vector<BfPkt>& next) {
            auto nkey = key_of(t + 1, next);
            if (!seen.insert(nkey).second) return;
            best = std::max(best, gained + solve(t + 1, next));
        });
        memo_[key] = best;
        return best;
    }

    void reconstruct(int64_t t0, BfResult& res) {
        std::map<int64_t, std::vector<STVertex>> nodes_of;
        std::map<int64_t, bool> delivered;
        std::vector<BfPkt> live;
        int64_t t = t0;
        while (true) {
            bool more_arrivals = !arrivals_.empty() && arrivals_.rbegin()->first >= t;
            if (live.empty() && !more_arrivals) break;
            if (t > t_limit_) break;
            int64_t want = memo_.at(key_of(t, live));
            // Record arrivals' start nodes; find which ids deliver now.
            std::vector<BfPkt> merged = live;
            if (auto it = arrivals_.find(t); it != arrivals_.end())
                for (const auto& p : it->second) {
                    merged.push_back(p);
                    nodes_of[p.id].push_back(STVertex{{p.v}, t});
                }
            std::set<int64_t> present;
            for (const auto& p : merged) present.insert(p.id);
            for (const auto& p : merged)
                if (p.v == p.b) delivered[p.id] = (t <= p.dl);
            bool chosen = false;
            enumerate(t, live, [&](int64_t gained, const std::vector<BfPkt>& next) {
                if (chosen) return;
                if (gained + solve(t + 1, next) != want) return;
                chosen = true;
                std::set<int64_t> kept;
                for (const auto& p : next) kept.insert(p.id);
                for (const auto& p : next) nodes_of[p.id].push_back(STVertex{{p.v}, t + 1});
                for (const auto& p : merged)
                    if (p.v != p.b && !kept.count(p.id)) delivered[p.id] = false;
                live = next;
            });
            GR_CHECK(chosen, "brute_force_opt: witness reconstruction failed");
            ++t;
        }
        for (auto& [id, nodes] : nodes_of) {
            DetailedPathPlan plan;
            plan.id = id;
            plan.nodes = std::move(nodes);
            plan.delivered = delivered.count(id) && delivered[id];
            res.witness.push_back(std::move(plan));
        }
    }
};

}  // namespace detail

inline BfResult brute_force_opt(const std::vector<PacketRequest>& trace,
                                const GridSpec& grid, const BfLimits& lim = {}) {
    return detail::BruteForceOpt(trace, grid, lim).run();
}

// ---------------------------------------------------------------------------
// Exact candidate-path packing: the maximum number of requests that can be
// granted one of their candidate paths simultaneously within the edge
// capacities.  Exponential search with simple pruning; inputs are tiny.

inline int64_t exact_candidate_packing(
    const std::vector<int64_t>& caps,
    const std::vector<std::vector<std::vector<int>>>& candidates) {
    std::vector<int64_t> load(caps.size(), 0);
    int64_t best = 0;
    auto rec = [&](auto&& self, size_t i, int64_t taken) -> void {
        if (taken + static_cast<int64_t>(candidates.size() - i) <= best) return;
        if (i == candidates.size()) {
            best = std::max(best, taken);
            return;
        }
        for (const auto& path : candidates[i]) {
            bool ok = true;
            for (int e : path)
                if (load[e] + 1 > caps[e]) ok = false;
            if (!ok) continue;
            for (int e : path) ++load[e];
            self(self, i + 1, taken + 1);
            for (int e : path) --load[e];
        }
        self(self, i + 1, taken);  // skip this request
    };
    rec(rec, 0, 0);
    return best;
}

// ---------------------------------------------------------------------------
// Trace generators.

struct GenParams {
    std::string kind = "uniform";  // uniform|bursty|dense-source|greedy-adversarial
    int64_t requests = 20;
    int64_t t_max = 32;
    uint64_t seed = 1;
};

inline std::vector<PacketRequest> gen_trace(const GridSpec& grid,
                                            const GenParams& gp) {
    GR_CHECK(grid.dim() == 1, "gen_trace: d=1 only");
    int64_t n = grid.n();
    std::mt19937_64 rng(gp.seed);
    auto uni = [&](int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(rng() % static_cast<uint64_t>(hi - lo + 1));
    };
    std::vector<PacketRequest> out;
    int64_t id = 1;
    if (gp.kind == "uniform") {
        for (int64_t i = 0; i < gp.requests; ++i) {
            int64_t a = uni(1, n), b = uni(a, n);
            out.push_back({id++, {a}, {b}, uni(0, gp.t_max), kInfTime});
        }
    } else if (gp.kind == "bursty") {
        int64_t bursts = std::max<int64_t>(1, gp.requests / 5);
        for (int64_t bi = 0; bi < bursts; ++bi) {
            int64_t t = uni(0, gp.t_max), a = uni(1, n);
            int64_t sz = std::min<int64_t>(5, gp.requests - (bi * 5));
            for (int64_t j = 0; j < sz; ++j) {
                int64_t b = uni(a, n);
                out.push_back({id++, {a}, {b}, t, kInfTime});
            }
        }
    } else if (gp.kind == "dense-source") {
        int64_t a = uni(1, std::max<int64_t>(1, n / 4));
        for (int64_t i = 0; i < gp.requests; ++i) {
            int64_t b = uni(a, n);
            out.push_back({id++, {a}, {b}, uni(0, gp.t_max), kInfTime});
        }
    } else if (gp.kind == "greedy-adversarial") {
        // Long-haul packets first, then a rolling wave of short hops that
        // starves greedy nearest-to-go of the long-haul deliveries.
        int64_t waves = std::max<int64_t>(1, gp.requests / (n > 1 ? n : 1));
        for (int64_t w = 0; w < waves && id <= gp.requests; ++w) {
            int64_t t = w * 2;
            out.push_back({id++, {1}, {n}, t, kInfTime});
            for (int64_t v = 1; v < n && id <= gp.requests; ++v)
                out.push_back({id++, {v}, {std::min(v + 1, n)}, t + v, kInfTime});
        }
    } else {
        GR_CHECK(false, "gen_trace: unknown generator kind");
    }
    std::sort(out.begin(), out.end(),
              [](const PacketRequest& x, const PacketRequest& y) {
                  if (x.t != y.t) return x.t < y.t;
                  return x.id < y.id;
              });
    return out;
}

// ---------------------------------------------------------------------------
// Flat `key = value` config files.

inline std::map<std::string, std::string> parse_config(std::istream& in) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto notspace = [](unsigned char ch) { return !std::isspace(ch); };
        line.erase(line.begin(), std::find_if(line.begin(), line.end(), notspace));
        line.erase(std::find_if(line.rbegin(), line.rend(), notspace).base(), line.end());
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config parse error at line " +
                                     std::to_string(lineno) + ": expected key = value");
        auto trim = [&](std::string s) {
            s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
            s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
            return s;
        };
        std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::runtime_error("config parse error at line " +
                                     std::to_string(lineno) + ": empty key or value");
        out[key] = val;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment harness: runs an algorithm over generated traces and reports
// one CSV row per trial (replay-verified).

struct ExperimentRow {
    std::string algo, generator;
    int64_t n, B, c;
    uint64_t seed;
    int64_t requests, throughput, rejected, preempted, violations;
};

inline std::string experiment_csv_header() {
    return "algo,generator,n,B,c,seed,requests,throughput,rejected,preempted,violations";
}

inline std::string to_csv(const ExperimentRow& r) {
    std::ostringstream os;
    os << r.algo << ',' << r.generator << ',' << r.n << ',' << r.B << ',' << r.c
       << ',' << r.seed << ',' << r.requests << ',' << r.throughput << ','
       << r.rejected << ',' << r.preempted << ',' << r.violations;
    return os.str();
}

struct AlgoOutput {
    RunMetrics metrics;
    std::vector<DetailedPathPlan> paths;
};

inline AlgoOutput run_algo(const std::string& algo,
                           const std::vector<PacketRequest>& trace,
                           const GridSpec& grid, uint64_t seed) {
    AlgoOutput out;
    if (algo == "det" || algo == "det-deadline") {
        RouterResult r = algo == "det" ? run_deterministic(trace, grid)
                                       : route_with_deadlines(trace, grid);
        out.metrics = r.metrics;
        out.paths = std::move(r.paths);
    } else if (algo == "bufferless") {
        RouterResult r = run_bufferless(trace, grid);
        out.metrics = r.metrics;
        out.paths = std::move(r.paths);
    } else if (algo == "large-capacity") {
        RouterResult r = run_large_capacity(trace, grid);
        out.metrics = r.metrics;
        out.paths = std::move(r.paths);
    } else if (algo == "rand") {
        RandResult r = run_randomized(trace, grid, seed);
        out.metrics = r.metrics;
        out.paths = std::move(r.paths);
    } else if (algo == "ntg") {
        NtgResult r = nearest_to_go(trace, grid);
        out.metrics = r.metrics;
        out.paths = std::move(r.paths);
    } else {
        GR_CHECK(false, "run_algo: unknown algorithm '" + algo + "'");
    }
    return out;
}

inline std::vector<ExperimentRow> run_experiment(
    const std::map<std::string, std::string>& cfg) {
    static const std::set<std::string> known = {
        "n", "d", "B", "c", "generator", "requests",
        "t_max", "algo", "trials", "seed"};
    for (const auto& [key, val] : cfg)
        if (!known.count(key))
            throw std::runtime_error("unknown config key: " + key);
    auto get = [&](const std::string& key, const std::string& dflt) {
        auto it = cfg.find(key);
        return it == cfg.end() ? dflt : it->second;
    };
    GridSpec grid;
    grid.dims.assign(std::stoll(get("d", "1")), std::stoll(get("n", "16")));
    grid.B = std::stoll(get("B", "3"));
    grid.c = std::stoll(get("c", "3"));
    GenParams gp;
    gp.kind = get("generator", "uniform");
    gp.requests = std::stoll(get("requests", "20"));
    gp.t_max = std::stoll(get("t_max", "32"));
    std::string algo = get("algo", "det");
    int64_t trials = std::stoll(get("trials", "5"));
    uint64_t seed0 = std::stoull(get("seed", "1"));

    std::vector<ExperimentRow> rows;
    for (int64_t tr = 0; tr < trials; ++tr) {
        gp.seed = seed0 + static_cast<uint64_t>(tr);
        auto trace = gen_trace(grid, gp);
        AlgoOutput out = run_algo(algo, trace, grid, gp.seed);
        ReplayResult rep = replay(out.paths, trace, grid);
        ExperimentRow row;
        row.algo = algo;
        row.generator = gp.kind;
        row.n = grid.n();
        row.B = grid.B;
        row.c = grid.c;
        row.seed = gp.seed;
        row.requests = static_cast<int64_t>(trace.size());
        row.throughput = out.metrics.throughput;
        row.rejected = out.metrics.rejected;
        row.preempted = out.metrics.preempted;
        row.violations = static_cast<int64_t>(rep.violations.size());
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace gridroute
