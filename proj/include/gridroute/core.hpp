#pragma once

// Grid network description, packet requests, trace I/O, validation and
// shared metric types.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gridroute {

// Thrown when a hard internal contract is violated.  Any escape of this
// exception signals an implementation bug, never a bad input.
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

#define GR_CHECK(cond, msg)                                                  \
    do {                                                                     \
        if (!(cond)) throw ::gridroute::contract_error(msg);                 \
    } while (0)

using Coord = std::vector<int64_t>;

constexpr int64_t kInfTime = INT64_MAX / 4;

// Uni-directional d-dimensional grid with uniform buffer size B and uniform
// link capacity c.
struct GridSpec {
    std::vector<int64_t> dims;  // side lengths l_1..l_d
    int64_t B = 0;              // buffer size per node
    int64_t c = 1;              // link capacity

    int dim() const { return static_cast<int>(dims.size()); }

    int64_t n() const {
        int64_t p = 1;
        for (int64_t l : dims) p *= l;
        return p;
    }

    // Directed diameter: number of edges of the longest monotone path.
    int64_t diam() const {
        int64_t s = 0;
        for (int64_t l : dims) s += l - 1;
        return s;
    }

    bool contains(const Coord& v) const {
        if (v.size() != dims.size()) return false;
        for (size_t i = 0; i < v.size(); ++i)
            if (v[i] < 1 || v[i] > dims[i]) return false;
        return true;
    }
};

struct PacketRequest {
    int64_t id = 0;
    Coord a;                     // source vertex
    Coord b;                     // destination vertex
    int64_t t = 0;               // injection time
    int64_t deadline = kInfTime; // kInfTime means unconstrained

    bool has_deadline() const { return deadline < kInfTime; }
};

inline int64_t l1_dist(const Coord& a, const Coord& b) {
    GR_CHECK(a.size() == b.size(), "l1_dist: dimension mismatch");
    int64_t s = 0;
    for (size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

enum class OutcomeKind { Rejected, Preempted, Delivered, InFlight };

struct Outcome {
    OutcomeKind kind = OutcomeKind::Rejected;
    int64_t time = 0;  // preemption time or arrival time

    static Outcome rejected() { return {OutcomeKind::Rejected, 0}; }
    static Outcome preempted(int64_t t) { return {OutcomeKind::Preempted, t}; }
    static Outcome delivered(int64_t t) { return {OutcomeKind::Delivered, t}; }
    static Outcome in_flight() { return {OutcomeKind::InFlight, 0}; }
};

struct RunMetrics {
    std::string algo;
    uint64_t seed = 0;
    int64_t throughput = 0;
    int64_t rejected = 0;
    int64_t preempted = 0;
    int64_t in_flight = 0;

    int64_t total() const { return throughput + rejected + preempted + in_flight; }

    void count(const Outcome& o) {
        switch (o.kind) {
            case OutcomeKind::Delivered: ++throughput; break;
            case OutcomeKind::Rejected: ++rejected; break;
            case OutcomeKind::Preempted: ++preempted; break;
            case OutcomeKind::InFlight: ++in_flight; break;
        }
    }
};

// ---------------------------------------------------------------------------
// Validation

struct Invalid {
    std::string reason;
};

// Returns nullopt when valid, otherwise the reason.
inline std::optional<Invalid> validate_request(const PacketRequest& req,
                                               const GridSpec& grid) {
    if (!grid.contains(req.a)) return Invalid{"source outside grid"};
    if (!grid.contains(req.b)) return Invalid{"destination outside grid"};
    for (size_t i = 0; i < req.a.size(); ++i)
        if (req.a[i] > req.b[i]) return Invalid{"monotonicity: a must be <= b componentwise"};
    if (req.t < 0) return Invalid{"negative injection time"};
    if (req.deadline < req.t + l1_dist(req.a, req.b))
        return Invalid{"infeasible deadline"};
    return std::nullopt;
}

// Keeps the B+c requests with the smallest L1 distance (ties by lower id).
// All inputs must share (node, time).
struct FilterResult {
    std::vector<PacketRequest> kept;
    std::vector<PacketRequest> rejected;
};

inline FilterResult filter_simultaneous(std::vector<PacketRequest> reqs,
                                        const GridSpec& grid) {
    std::stable_sort(reqs.begin(), reqs.end(),
                     [](const PacketRequest& x, const PacketRequest& y) {
                         int64_t dx = l1_dist(x.a, x.b), dy = l1_dist(y.a, y.b);
                         if (dx != dy) return dx < dy;
                         return x.id < y.id;
                     });
    FilterResult r;
    size_t cap = static_cast<size_t>(grid.B + grid.c);
    for (size_t i = 0; i < reqs.size(); ++i)
        (i < cap ? r.kept : r.rejected).push_back(reqs[i]);
    return r;
}

// ---------------------------------------------------------------------------
// Trace I/O
//
// One request per line: `id src dst t deadline`, src/dst comma-separated
// coordinates, deadline an integer or `inf`.

inline Coord parse_coord(const std::string& s, int lineno) {
    Coord c;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            size_t pos = 0;
            c.push_back(std::stoll(part, &pos));
            if (pos != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw std::runtime_error("trace parse error at line " +
                                     std::to_string(lineno) +
                                     ": bad coordinate '" + part + "'");
        }
    }
    if (c.empty())
        throw std::runtime_error("trace parse error at line " +
                                 std::to_string(lineno) + ": empty coordinate");
    return c;
}

inline std::vector<PacketRequest> parse_trace(std::istream& in) {
    std::vector<PacketRequest> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string id_s, src_s, dst_s, t_s, dl_s;
        if (!(ss >> id_s >> src_s >> dst_s >> t_s >> dl_s))
            throw std::runtime_error("trace parse error at line " +
                                     std::to_string(lineno) +
                                     ": expected 5 fields");
        std::string extra;
        if (ss >> extra)
            throw std::runtime_error("trace parse error at line " +
                                     std::to_string(lineno) + ": trailing data");
        PacketRequest r;
        try {
            r.id = std::stoll(id_s);
            r.t = std::stoll(t_s);
        } catch (const std::exception&) {
            throw std::runtime_error("trace parse error at line " +
                                     std::to_string(lineno) + ": bad integer");
        }
        r.a = parse_coord(src_s, lineno);
        r.b = parse_coord(dst_s, lineno);
        if (dl_s == "inf") {
            r.deadline = kInfTime;
        } else {
            try {
                r.deadline = std::stoll(dl_s);
            } catch (const std::exception&) {
                throw std::runtime_error("trace parse error at line " +
                                         std::to_string(lineno) +
                                         ": bad deadline");
            }
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::string coord_to_string(const Coord& c) {
    std::string s;
    for (size_t i = 0; i < c.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(c[i]);
    }
    return s;
}

inline void emit_trace(const std::vector<PacketRequest>& reqs, std::ostream& out) {
    for (const auto& r : reqs) {
        out << r.id << ' ' << coord_to_string(r.a) << ' ' << coord_to_string(r.b)
            << ' ' << r.t << ' ';
        if (r.has_deadline())
            out << r.deadline;
        else
            out << "inf";
        out << '\n';
    }
}

}  // namespace gridroute
