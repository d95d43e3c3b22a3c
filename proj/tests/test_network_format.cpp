#include <sstream>

#include "doctest.h"
#include "netcode/network_format.hpp"

using namespace netcode;

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "."
#endif

namespace {
std::string fixture(const std::string& name) { return std::string(FIXTURE_DIR) + "/" + name; }
}

TEST_CASE("butterfly fixture round trips against the builder") {
    Network parsed = parse_network_file(fixture("butterfly.net"));
    Network built = make_butterfly_network(FieldSpec::make_order(2));
    REQUIRE(!has_errors(parsed.validate()));
    CHECK(parsed.sources().size() == built.sources().size());
    REQUIRE(parsed.links().size() == built.links().size());
    for (const auto& l : built.links()) {
        REQUIRE(parsed.has_link(l.id));
        CHECK(parsed.link(l.id).tail == l.tail);
        CHECK(parsed.link(l.id).head == l.head);
        auto pin = parsed.inc(l.id), bin = built.inc(l.id);
        CHECK(pin == bin);
        for (const auto& e : bin) CHECK(parsed.coef(l.id, e) == built.coef(l.id, e));
    }
    REQUIRE(parsed.sinks().size() == 2);
    CHECK(parsed.sinks()[0].observed == std::vector<std::string>{"l5", "l8"});
    CHECK(parsed.global_transfer_matrix({"l5", "l8"}) == built.global_transfer_matrix({"l5", "l8"}));
}

TEST_CASE("parser accepts the full directive set") {
    std::istringstream in(
        "# comment\n"
        "field GF(4)\n"
        "dim 2\n"
        "node a b t\n"
        "source s1 @ a\n"
        "link l1 a b\n"
        "link l2 b t\n"
        "link l3 a t\n"
        "coef l1 s1 3\n"
        "coef l2 l1 2\n"
        "zero l3\n"
        "sink t observes l2 l3\n");
    Network net = parse_network(in);
    CHECK(net.field()->q() == 4);
    CHECK(net.dim() == 2);
    CHECK(net.coef("l1", "s1") == 3);
    CHECK(net.is_zero_link("l3"));
    CHECK(!has_errors(net.validate()));
}

TEST_CASE("channel directive builds a symmetric table") {
    std::istringstream in(
        "field GF(2)\n"
        "dim 1\n"
        "node a t\n"
        "source s1 @ a\n"
        "link l1 a t\n"
        "coef l1 s1 1\n"
        "channel l1 symmetric 0.25\n"
        "sink t observes l1\n");
    Network net = parse_network(in);
    REQUIRE(net.is_stochastic());
    const auto& t = net.channels().at("l1");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == doctest::Approx(0.75));
    CHECK(t.rows[0][1] == doctest::Approx(0.25));
    CHECK(!has_errors(net.validate()));
}

TEST_CASE("parse errors carry line numbers") {
    auto expect_line = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            parse_network(in);
            FAIL_CHECK("expected ParseError for: " << text);
        } catch (const ParseError& e) {
            CHECK(e.line() == line);
        }
    };
    // Unknown directive.
    expect_line("field GF(2)\ndim 1\nnode a\nbogus x\n", 4);
    // Section order violation: node after link.
    expect_line("field GF(2)\ndim 1\nnode a b\nsource s1 @ a\nlink l1 a b\nnode c\n", 6);
    // Malformed integers and missing tokens.
    expect_line("field GF(2)\ndim one\n", 2);
    expect_line("field GF(2)\ndim 1\nnode a b\nsource s1 a\n", 4); // missing '@'
    expect_line("field GF(2)\ndim 1\nnode a b\nsource s1 @ a\nlink l1 a b\ncoef l1 s1 x\n", 6);
    // Duplicate field directive.
    expect_line("field GF(2)\nfield GF(3)\n", 2);
}

TEST_CASE("observation and source files") {
    Network net = parse_network_file(fixture("butterfly.net"));
    Observation obs = parse_observations_file(fixture("butterfly_t1.obs"), net);
    CHECK(obs.sink == "t1");
    REQUIRE(obs.values.size() == 2);
    CHECK(obs.values[0] == std::pair<std::string, FVector>("l5", FVector(net.field(), {1})));
    CHECK(obs.values[1] == std::pair<std::string, FVector>("l8", FVector(net.field(), {1})));

    std::istringstream src_in("# truth\nsrc s1 = 1\nsrc s2 = 0\n");
    auto src = parse_sources(src_in, net);
    CHECK(src.at("s1") == FVector(net.field(), {1}));
    CHECK(src.at("s2") == FVector(net.field(), {0}));

    // Observing links of two different sinks is rejected.
    std::istringstream mixed("obs l5 = 1\nobs l4 = 0\n");
    CHECK_THROWS_AS(parse_observations(mixed, net), ParseError);
    // Unknown link.
    std::istringstream unknown("obs nope = 1\n");
    CHECK_THROWS_AS(parse_observations(unknown, net), ParseError);
}
