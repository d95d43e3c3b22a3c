#include <random>

#include "doctest.h"
#include "netcode/network.hpp"
#include "oracles.hpp"
#include "random_nets.hpp"

using namespace netcode;

TEST_CASE("butterfly transfer matrices") {
    Field f = FieldSpec::make_order(2);
    Network net = make_butterfly_network(f);
    REQUIRE(!has_errors(net.validate()));

    FMatrix a1 = net.global_transfer_matrix({"l5", "l8"});
    CHECK(a1 == FMatrix::from_rows(f, {{1, 0}, {1, 1}})); // y_l5 = x1, y_l8 = x1 + x2
    FMatrix a2 = net.global_transfer_matrix({"l4", "l7"});
    CHECK(a2 == FMatrix::from_rows(f, {{0, 1}, {1, 1}}));
    CHECK(rref(a1).rank == 2); // both sinks can decode both sources
    CHECK(rref(a2).rank == 2);
}

TEST_CASE("encode agrees with the transfer matrix route") {
    testutil::InstanceGen gen(31);
    for (int trial = 0; trial < 25; ++trial) {
        auto inst = gen.deterministic(trial % 2 == 0);
        const Network& net = inst.net;
        SymbolAssignment links = net.encode(inst.truth);
        std::vector<std::string> all_links;
        for (const auto& l : net.links()) all_links.push_back(l.id);
        FMatrix A = net.global_transfer_matrix(all_links);
        // Per coordinate: y_d = A x_d.
        for (std::size_t d = 0; d < net.dim(); ++d) {
            FVector x = FVector::zeros(net.field(), net.sources().size());
            for (std::size_t s = 0; s < net.sources().size(); ++s) x[s] = inst.truth.at(net.sources()[s].id)[d];
            FVector y = A * x;
            for (std::size_t r = 0; r < all_links.size(); ++r) CHECK(y[r] == links.at(all_links[r])[d]);
        }
    }
}

TEST_CASE("encoding is linear in the sources") {
    testutil::InstanceGen gen(32);
    auto inst = gen.deterministic(true);
    const Network& net = inst.net;
    const std::uint64_t M = Alphabet{net.field(), net.dim()}.size();
    std::mt19937_64 rng(5);
    SymbolAssignment x, y;
    for (const auto& s : net.sources()) {
        x.emplace(s.id, vec_from_index(net.field(), net.dim(), rng() % M));
        y.emplace(s.id, vec_from_index(net.field(), net.dim(), rng() % M));
    }
    SymbolAssignment sum_xy;
    for (const auto& [id, v] : x) sum_xy.emplace(id, v + y.at(id));
    auto ex = net.encode(x), ey = net.encode(y), es = net.encode(sum_xy);
    for (const auto& [l, v] : es) CHECK(v == ex.at(l) + ey.at(l));
}

TEST_CASE("chain topology shape") {
    Field f = FieldSpec::make_order(16);
    for (std::size_t K : {2, 5, 8}) {
        Network net = make_chain_network(K, f);
        CHECK(net.sources().size() == K);
        CHECK(net.links().size() == 2 * K - 2);
        REQUIRE(net.sinks().size() == 1);
        CHECK(net.sinks()[0].observed.size() == K);
        CHECK(!has_errors(net.validate()));
    }
}

TEST_CASE("topological link order respects dependencies") {
    testutil::InstanceGen gen(33);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = gen.deterministic(trial % 2 == 0);
        auto order = inst.net.topo_links();
        REQUIRE(order.size() == inst.net.links().size());
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos.emplace(order[i], i);
        for (const auto& l : inst.net.links())
            for (const auto& e : inst.net.inc(l.id))
                if (inst.net.has_link(e)) CHECK(pos.at(e) < pos.at(l.id));
    }
}

TEST_CASE("validate reports cycles with a witness") {
    Field f = FieldSpec::make_order(2);
    Network net(f, 1);
    net.add_node("a");
    net.add_node("b");
    net.add_source("s1", "a");
    net.add_link("l1", "a", "b");
    net.add_link("l2", "b", "a");
    net.set_coef("l1", "s1", 1);
    net.set_coef("l1", "l2", 1);
    net.set_coef("l2", "l1", 1);
    auto diags = net.validate();
    REQUIRE(has_errors(diags));
    bool cycle = false;
    for (const auto& d : diags)
        if (d.message.find("cycle") != std::string::npos) {
            cycle = true;
            CHECK(d.message.find("l1") != std::string::npos);
            CHECK(d.message.find("l2") != std::string::npos);
        }
    CHECK(cycle);
}

TEST_CASE("validate rejects malformed coefficients and dead links") {
    Field f = FieldSpec::make_order(3);
    Network net(f, 1);
    net.add_node("a");
    net.add_node("b");
    net.add_node("c");
    net.add_source("s1", "a");
    net.add_link("l1", "a", "b");
    net.add_link("l2", "b", "c");
    net.set_coef("l1", "s1", 1);
    net.add_sink("c", {"l2"});

    SUBCASE("all-zero link must be marked") {
        auto diags = net.validate();
        REQUIRE(has_errors(diags));
        CHECK(format_diagnostics(diags).find("l2") != std::string::npos);
        net.mark_zero("l2");
        CHECK(!has_errors(net.validate()));
        SymbolAssignment enc = net.encode({{"s1", FVector(f, {2})}});
        CHECK(enc.at("l2").is_zero());
    }
    SUBCASE("coefficient outside inc") {
        net.set_coef("l2", "l1", 1);
        net.set_coef("l2", "s1", 2); // s1 is not an input of l2
        auto diags = net.validate();
        REQUIRE(has_errors(diags));
        CHECK(format_diagnostics(diags).find("inc(l2)") != std::string::npos);
    }
    SUBCASE("coefficient out of field range") {
        net.set_coef("l2", "l1", 5);
        CHECK(has_errors(net.validate()));
    }
    SUBCASE("sink observing a link that ends elsewhere") {
        net.set_coef("l2", "l1", 1);
        net.add_sink("b", {"l2"});
        CHECK(has_errors(net.validate()));
    }
}

TEST_CASE("random_code keeps topology, is seeded and nonzero") {
    Field f = FieldSpec::make_order(16);
    Network topo = make_chain_network(4, f);
    Network a = random_code(topo, f, 7), b = random_code(topo, f, 7), c = random_code(topo, f, 8);
    CHECK(a.links().size() == topo.links().size());
    bool same = true, all_nonzero = true;
    for (const auto& l : a.links())
        for (const auto& e : a.inc(l.id)) {
            if (a.coef(l.id, e) != b.coef(l.id, e)) same = false;
            if (a.coef(l.id, e) == 0) all_nonzero = false;
        }
    CHECK(same);
    CHECK(all_nonzero);
    bool differs = false;
    for (const auto& l : a.links())
        for (const auto& e : a.inc(l.id))
            if (a.coef(l.id, e) != c.coef(l.id, e)) differs = true;
    CHECK(differs); // different seed, different code
}

TEST_CASE("symmetric channel tables are stochastic and hit the flip rate") {
    Field f = FieldSpec::make_order(2);
    Network net(f, 1);
    net.add_node("a");
    net.add_node("b");
    net.add_source("s1", "a");
    net.add_link("l1", "a", "b");
    net.set_coef("l1", "s1", 1);
    net.add_sink("b", {"l1"});
    const double eps = 0.2;
    ChannelTable t = symmetric_channel(net, "l1", eps);
    net.set_channel(t);
    REQUIRE(!has_errors(net.validate()));
    REQUIRE(t.rows.size() == 2);
    for (const auto& row : t.rows) {
        double s = 0;
        for (double p : row) s += p;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(t.rows[0][1] == doctest::Approx(eps));
    CHECK(t.rows[1][1] == doctest::Approx(1.0 - eps));

    // Monte Carlo against the sampler.
    const int N = 20000;
    int flips = 0;
    SymbolAssignment src{{"s1", FVector(f, {1})}};
    for (int i = 0; i < N; ++i) {
        auto out = net.encode_stochastic(src, 1000 + i);
        if (out.at("l1")[0] != 1) ++flips;
    }
    CHECK(std::abs(double(flips) / N - eps) < 0.02);

    // Degenerate channel is the deterministic point mass.
    ChannelTable d = degenerate_channel(net, "l1");
    CHECK(d.rows[1][1] == 1.0);
    CHECK(d.rows[1][0] == 0.0);
}

TEST_CASE("make_observation picks the sink's observed links in order") {
    Field f = FieldSpec::make_order(2);
    Network net = make_butterfly_network(f);
    SymbolAssignment enc = net.encode({{"s1", FVector(f, {1})}, {"s2", FVector(f, {0})}});
    Observation obs = net.make_observation("t1", enc);
    CHECK(obs.sink == "t1");
    REQUIRE(obs.values.size() == 2);
    CHECK(obs.values[0].first == "l5");
    CHECK(obs.values[1].first == "l8");
    CHECK(obs.values[0].second == FVector(f, {1}));
    CHECK(obs.values[1].second == FVector(f, {1}));
}
