#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "gridroute/ipp.hpp"

using namespace gridroute;

namespace {

// A diamond: s -> {m1, m2} -> t, all caps 1.
Dag diamond() {
    Dag d;
    int s = d.add_node(), m1 = d.add_node(), m2 = d.add_node(), t = d.add_node();
    d.add_edge(s, m1, 1);  // 0
    d.add_edge(s, m2, 1);  // 1
    d.add_edge(m1, t, 1);  // 2
    d.add_edge(m2, t, 1);  // 3
    return d;
}

}  // namespace

TEST_CASE("lightest bounded path prefers light edges and breaks ties by order") {
    Dag d = diamond();
    std::vector<double> w = {0.0, 0.0, 0.0, 0.0};
    PathQuery q{0, {3}, 10};
    auto p = lightest_bounded_path(d, w, q);
    REQUIRE(p);
    CHECK(*p == std::vector<int>{0, 2});  // insertion order wins ties
    w = {0.5, 0.0, 0.5, 0.0};
    p = lightest_bounded_path(d, w, q);
    REQUIRE(p);
    CHECK(*p == std::vector<int>{1, 3});
}

TEST_CASE("lightest bounded path honors the hop bound") {
    // s -> a -> b -> t (free) versus a heavy direct edge s -> t.
    Dag d;
    int s = d.add_node(), a = d.add_node(), b = d.add_node(), t = d.add_node();
    d.add_edge(s, a, 1);
    d.add_edge(a, b, 1);
    d.add_edge(b, t, 1);
    d.add_edge(s, t, 1);
    std::vector<double> w = {0.0, 0.0, 0.0, 0.9};
    auto p3 = lightest_bounded_path(d, w, {s, {t}, 3});
    REQUIRE(p3);
    CHECK(p3->size() == 3);
    auto p1 = lightest_bounded_path(d, w, {s, {t}, 1});
    REQUIRE(p1);
    CHECK(*p1 == std::vector<int>{3});
    CHECK(!lightest_bounded_path(d, w, {3, {0}, 5}));  // unreachable
}

TEST_CASE("equal weight prefers fewer hops") {
    Dag d;
    int s = d.add_node(), a = d.add_node(), t = d.add_node();
    d.add_edge(s, a, 1);
    d.add_edge(a, t, 1);
    d.add_edge(s, t, 1);
    std::vector<double> w = {0.1, 0.1, 0.2};
    auto p = lightest_bounded_path(d, w, {s, {t}, 5});
    REQUIRE(p);
    CHECK(*p == std::vector<int>{2});
}

TEST_CASE("weight update closed form: x_e = (2^{f/c} - 1) / p_max") {
    // Single edge of capacity 1, p_max = 10: after one acceptance the weight
    // is exactly (2 - 1)/10 = 1/10.
    Dag d;
    int s = d.add_node(), t = d.add_node();
    d.add_edge(s, t, 1);
    PrimalDualState st({1.0}, 10);
    REQUIRE(st.process(d, {s, {t}, 1}, 1));
    CHECK(st.weights()[0] == Catch::Approx(0.1).epsilon(1e-12));
    // Second acceptance: (2^2 - 1)/10 = 0.3.
    REQUIRE(st.process(d, {s, {t}, 1}, 2));
    CHECK(st.weights()[0] == Catch::Approx(0.3).epsilon(1e-12));
    auto cert = st.certify_or_die();
    CHECK(cert.throughput == 2);
}

TEST_CASE("saturation: alpha reaching 1 rejects") {
    // Capacity 1, p_max = 3: weights run 1/3, 1, ... so the third request
    // sees alpha = 1 and is rejected.
    Dag d;
    int s = d.add_node(), t = d.add_node();
    d.add_edge(s, t, 1);
    PrimalDualState st({1.0}, 3);
    CHECK(st.process(d, {s, {t}, 1}, 1));
    CHECK(st.weights()[0] == Catch::Approx(1.0 / 3.0));
    CHECK(st.process(d, {s, {t}, 1}, 2));
    CHECK(st.weights()[0] == Catch::Approx(1.0));
    CHECK(!st.process(d, {s, {t}, 1}, 3));
    auto cert = st.certify_or_die();
    CHECK(cert.throughput == 2);
    CHECK(cert.max_relative_load <= std::log2(1.0 + 3.0 * 3.0));
}

TEST_CASE("infinite-capacity sink edges stay weightless") {
    Dag d;
    int s = d.add_node(), m = d.add_node(), t = d.add_node();
    d.add_edge(s, m, 1);
    d.add_edge(m, t, std::numeric_limits<double>::infinity());
    PrimalDualState st({1.0, std::numeric_limits<double>::infinity()}, 5);
    REQUIRE(st.process(d, {s, {t}, 5}, 1));
    CHECK(st.weights()[1] == 0.0);
    CHECK(st.weights()[0] > 0.0);
    st.certify_or_die();
}

TEST_CASE("decide_among picks the lightest candidate within p_max") {
    Dag d = diamond();
    PrimalDualState st({1, 1, 1, 1}, 2);
    // Load the top branch so the bottom is lighter.
    REQUIRE(st.decide(1, {0, 2}));
    auto pick = st.decide_among(2, {{0, 2}, {1, 3}});
    REQUIRE(pick);
    CHECK(*pick == 1);
    // Candidates longer than p_max are ignored.
    PrimalDualState st2({1, 1, 1, 1}, 1);
    CHECK(!st2.decide_among(3, {{0, 2}}));
}

TEST_CASE("self-certification over random accept/reject streams") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        // Random layered DAG: 3 layers, random caps in {1,2,3}.
        Dag d;
        std::vector<std::vector<int>> layers(4);
        for (auto& l : layers)
            for (int i = 0; i < 3; ++i) l.push_back(d.add_node());
        std::vector<double> caps;
        for (int l = 0; l < 3; ++l)
            for (int x : layers[l])
                for (int y : layers[l + 1]) {
                    double cap = 1.0 + static_cast<double>(rng() % 3);
                    d.add_edge(x, y, cap);
                    caps.push_back(cap);
                }
        int64_t p_max = 3;
        PrimalDualState st(caps, p_max);
        int64_t accepted = 0;
        for (int r = 0; r < 40; ++r) {
            PathQuery q;
            q.source = layers[0][rng() % 3];
            q.dests = {layers[3][rng() % 3]};
            q.hop_bound = p_max;
            if (st.process(d, q, r)) ++accepted;
        }
        Certificate cert = st.certify_or_die();
        CHECK(cert.throughput == accepted);
        CHECK(cert.primal_cost <= 2.0 * static_cast<double>(accepted) + 1e-9);
    }
}

TEST_CASE("longest_path_len rejects cyclic graphs") {
    Dag d;
    int a = d.add_node(), b = d.add_node();
    d.add_edge(a, b, 1);
    d.add_edge(b, a, 1);
    CHECK_THROWS_AS(d.longest_path_len(), contract_error);
}
