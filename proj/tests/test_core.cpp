#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "gridroute/core.hpp"

using namespace gridroute;

namespace {

GridSpec line(int64_t n, int64_t B, int64_t c) {
    GridSpec g;
    g.dims = {n};
    g.B = B;
    g.c = c;
    return g;
}

}  // namespace

TEST_CASE("validate_request accepts a well-formed line request") {
    GridSpec g = line(8, 3, 3);
    PacketRequest r{1, {2}, {7}, 5, kInfTime};
    CHECK(!validate_request(r, g));
}

TEST_CASE("validate_request rejects malformed requests") {
    GridSpec g = line(8, 3, 3);
    CHECK(validate_request({1, {0}, {5}, 0, kInfTime}, g));   // source off grid
    CHECK(validate_request({2, {1}, {9}, 0, kInfTime}, g));   // dest off grid
    CHECK(validate_request({3, {5}, {2}, 0, kInfTime}, g));   // monotonicity
    CHECK(validate_request({4, {1}, {5}, -1, kInfTime}, g));  // negative time
    CHECK(validate_request({5, {1}, {5}, 0, 3}, g));          // infeasible deadline
    CHECK(!validate_request({6, {1}, {5}, 0, 4}, g));         // exactly feasible
}

TEST_CASE("validate_request on a 2-d grid") {
    GridSpec g;
    g.dims = {4, 4};
    g.B = 2;
    g.c = 2;
    CHECK(!validate_request({1, {1, 2}, {3, 4}, 0, kInfTime}, g));
    CHECK(validate_request({2, {2, 3}, {3, 2}, 0, kInfTime}, g));  // axis 2 shrinks
}

TEST_CASE("filter_simultaneous keeps the B+c nearest requests") {
    GridSpec g = line(16, 2, 1);  // keeps 3
    std::vector<PacketRequest> reqs;
    for (int64_t i = 1; i <= 5; ++i)
        reqs.push_back({i, {1}, {1 + i}, 0, kInfTime});  // distance i
    FilterResult f = filter_simultaneous(reqs, g);
    REQUIRE(f.kept.size() == 3);
    REQUIRE(f.rejected.size() == 2);
    CHECK(f.kept[0].id == 1);
    CHECK(f.kept[1].id == 2);
    CHECK(f.kept[2].id == 3);
}

TEST_CASE("filter_simultaneous breaks distance ties by id") {
    GridSpec g = line(16, 1, 1);  // keeps 2
    std::vector<PacketRequest> reqs = {
        {7, {4}, {9}, 2, kInfTime},
        {3, {4}, {9}, 2, kInfTime},
        {5, {4}, {9}, 2, kInfTime},
    };
    FilterResult f = filter_simultaneous(reqs, g);
    REQUIRE(f.kept.size() == 2);
    CHECK(f.kept[0].id == 3);
    CHECK(f.kept[1].id == 5);
    CHECK(f.rejected[0].id == 7);
}

TEST_CASE("trace round trip") {
    std::vector<PacketRequest> reqs = {
        {1, {2}, {7}, 0, kInfTime},
        {2, {1}, {8}, 3, 15},
    };
    std::stringstream ss;
    emit_trace(reqs, ss);
    auto back = parse_trace(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == 1);
    CHECK(back[0].a == Coord{2});
    CHECK(back[0].deadline == kInfTime);
    CHECK(back[1].deadline == 15);
}

TEST_CASE("trace parser diagnoses malformed lines with line numbers") {
    std::stringstream ss("1 2 7 0 inf\nbogus line here\n");
    CHECK_THROWS_WITH(parse_trace(ss),
                      Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("trace parser accepts comments, blanks and 2-d coordinates") {
    std::stringstream ss("# header\n\n4 1,2 3,4 5 9\n");
    auto reqs = parse_trace(ss);
    REQUIRE(reqs.size() == 1);
    CHECK(reqs[0].a == Coord{1, 2});
    CHECK(reqs[0].b == Coord{3, 4});
    CHECK(reqs[0].t == 5);
    CHECK(reqs[0].deadline == 9);
}
