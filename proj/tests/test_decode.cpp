#include <set>

#include "doctest.h"
#include "netcode/decode.hpp"
#include "oracles.hpp"
#include "random_nets.hpp"

using namespace netcode;

namespace {

std::size_t transfer_rank(const testutil::Instance& inst) {
    std::vector<std::string> obs_links;
    for (const auto& [l, v] : inst.obs.values) obs_links.push_back(l);
    return rref(inst.net.global_transfer_matrix(obs_links)).rank;
}

void check_same_decode(const std::map<std::string, TargetDecode>& a, const std::map<std::string, TargetDecode>& b) {
    REQUIRE(a.size() == b.size());
    for (const auto& [id, da] : a) {
        REQUIRE(b.count(id));
        const TargetDecode& db = b.at(id);
        CAPTURE(id);
        REQUIRE(da.status == db.status);
        if (da.status == TargetDecode::Status::Decoded) CHECK(da.value == db.value);
        if (da.status == TargetDecode::Status::Ambiguous) {
            CHECK(da.ambiguity_dim == db.ambiguity_dim);
            CHECK(da.ambiguity == db.ambiguity);
        }
    }
}

} // namespace

TEST_CASE("invertible instances decode to the truth by both routes") {
    testutil::InstanceGen gen(71);
    int checked = 0;
    while (checked < 15) {
        auto inst = gen.deterministic(true);
        if (transfer_rank(inst) < inst.net.sources().size()) continue;
        ++checked;
        DecodeResult mp = decode_mp(inst.net, inst.obs, {});
        DecodeResult ge = decode_gaussian(inst.net, inst.obs, {});
        CHECK(!mp.contradiction);
        CHECK(!mp.superset_possible);
        for (const auto& s : inst.net.sources()) {
            CAPTURE(s.id);
            REQUIRE(mp.targets.at(s.id).status == TargetDecode::Status::Decoded);
            CHECK(mp.targets.at(s.id).value == inst.truth.at(s.id));
            REQUIRE(ge.targets.at(s.id).status == TargetDecode::Status::Decoded);
            CHECK(ge.targets.at(s.id).value == inst.truth.at(s.id));
        }
    }
}

TEST_CASE("message passing and elimination agree on forest instances, including singular ones") {
    testutil::InstanceGen gen(72);
    for (int trial = 0; trial < 25; ++trial) {
        auto inst = trial % 2 == 0 ? gen.deterministic(true) : gen.singular();
        DecodeResult mp = decode_mp(inst.net, inst.obs, {});
        DecodeResult ge = decode_gaussian(inst.net, inst.obs, {});
        CHECK(!mp.superset_possible);
        check_same_decode(mp.targets, ge.targets);
    }
}

TEST_CASE("singular instances leave 0-or-full ambiguity on each source") {
    testutil::InstanceGen gen(73);
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = gen.singular();
        const std::size_t n = inst.net.dim();
        DecodeResult mp = decode_mp(inst.net, inst.obs, {});
        std::size_t ambiguous = 0;
        for (const auto& [id, d] : mp.targets) {
            CHECK(d.status != TargetDecode::Status::Contradiction);
            if (d.status == TargetDecode::Status::Ambiguous) {
                ++ambiguous;
                CHECK(d.ambiguity_dim == n);         // block projection is a point or everything
                CHECK(d.ambiguity.contains(inst.truth.at(id)));
            } else {
                CHECK(d.value == inst.truth.at(id));
            }
        }
        CHECK(ambiguous >= 1); // rank deficit must show up somewhere
    }
}

TEST_CASE("chain decodes exactly after automatic clustering") {
    Field f = FieldSpec::make_order(16);
    const std::size_t K = 8;
    Network topo = make_chain_network(K, f);
    Network net = topo;
    for (std::uint64_t seed = 1;; ++seed) { // first invertible code
        net = random_code(topo, f, seed);
        std::vector<std::string> obs_links = net.sinks()[0].observed;
        if (rref(net.global_transfer_matrix(obs_links)).rank == K) break;
    }
    SymbolAssignment truth;
    std::mt19937_64 rng(9);
    for (const auto& s : net.sources()) truth.emplace(s.id, vec_from_index(f, 1, rng() % 16));
    Observation obs = net.make_observation(net.sinks()[0].id, net.encode(truth));

    DecodeResult mp = decode_mp(net, obs, {});
    CHECK(mp.clustered);
    CHECK(!mp.superset_possible);
    CHECK(mp.run.converged);
    for (const auto& s : net.sources()) {
        REQUIRE(mp.targets.at(s.id).status == TargetDecode::Status::Decoded);
        CHECK(mp.targets.at(s.id).value == truth.at(s.id));
    }
    check_same_decode(mp.targets, decode_gaussian(net, obs, {}).targets);

    // Clustering off: the loopy run stays sound (truth inside every support).
    DecodeOptions loopy;
    loopy.cluster = DecodeOptions::ClusterMode::Off;
    DecodeResult lp = decode_mp(net, obs, {}, loopy);
    CHECK(lp.superset_possible);
    for (const auto& s : net.sources()) {
        const TargetDecode& d = lp.targets.at(s.id);
        REQUIRE(d.status != TargetDecode::Status::Contradiction);
        if (d.status == TargetDecode::Status::Decoded)
            CHECK(d.value == truth.at(s.id));
        else
            CHECK(d.ambiguity.contains(truth.at(s.id)));
    }
}

TEST_CASE("loopy supports on random cyclic instances stay sound") {
    testutil::InstanceGen gen(74);
    DecodeOptions loopy;
    loopy.cluster = DecodeOptions::ClusterMode::Off;
    loopy.prune = false; // keep the cycles the generator selected for
    for (int trial = 0; trial < 10; ++trial) {
        auto inst = gen.deterministic(false);
        DecodeResult mp = decode_mp(inst.net, inst.obs, {}, loopy);
        CHECK(mp.superset_possible);
        CHECK(!mp.contradiction); // the observation is consistent by construction
        for (const auto& [id, d] : mp.targets) {
            CAPTURE(id);
            REQUIRE(d.status != TargetDecode::Status::Contradiction);
            if (d.status == TargetDecode::Status::Decoded)
                CHECK(d.value == inst.truth.at(id));
            else
                CHECK(d.ambiguity.contains(inst.truth.at(id)));
        }
    }
}

TEST_CASE("target subsets restrict the report without changing the answers") {
    testutil::InstanceGen gen(75);
    auto inst = gen.deterministic(true);
    std::vector<std::string> all;
    for (const auto& s : inst.net.sources()) all.push_back(s.id);
    DecodeResult full = decode_mp(inst.net, inst.obs, all);
    std::vector<std::string> one{all.front()};
    DecodeResult sub = decode_mp(inst.net, inst.obs, one);
    REQUIRE(sub.targets.size() == 1);
    CHECK(sub.targets.count(all.front()));
    const TargetDecode& a = full.targets.at(all.front());
    const TargetDecode& b = sub.targets.at(all.front());
    CHECK(a.status == b.status);
    if (a.status == TargetDecode::Status::Decoded) CHECK(a.value == b.value);
    if (a.status == TargetDecode::Status::Ambiguous) CHECK(a.ambiguity == b.ambiguity);
}

TEST_CASE("counters are deterministic across repeated runs") {
    testutil::InstanceGen gen(76);
    auto inst = gen.deterministic(true);
    DecodeResult a = decode_mp(inst.net, inst.obs, {});
    DecodeResult b = decode_mp(inst.net, inst.obs, {});
    CHECK(a.counters.mul == b.counters.mul);
    CHECK(a.counters.add == b.counters.add);
    CHECK(a.counters.messages == b.counters.messages);
    CHECK(a.counters.iterations == b.counters.iterations);
    CHECK(a.counters.messages > 0);
    DecodeResult ga = decode_gaussian(inst.net, inst.obs, {});
    DecodeResult gb = decode_gaussian(inst.net, inst.obs, {});
    CHECK(ga.counters.mul == gb.counters.mul);
    CHECK(ga.counters.add == gb.counters.add);
}

TEST_CASE("inconsistent observations surface as contradictions in both decoders") {
    // Deterministic case: two parallel copies of s1 observed with different
    // values can never be explained.
    Field f = FieldSpec::make_order(2);
    Network net(f, 1);
    net.add_node("a");
    net.add_node("t");
    net.add_source("s1", "a");
    net.add_link("l1", "a", "t");
    net.add_link("l2", "a", "t");
    net.set_coef("l1", "s1", 1);
    net.set_coef("l2", "s1", 1);
    net.add_sink("t", {"l1", "l2"});
    Observation obs;
    obs.sink = "t";
    obs.values = {{"l1", FVector(f, {0})}, {"l2", FVector(f, {1})}};
    DecodeResult mp = decode_mp(net, obs, {});
    DecodeResult ge = decode_gaussian(net, obs, {});
    CHECK(mp.contradiction);
    CHECK(ge.contradiction);
    CHECK(mp.targets.at("s1").status == TargetDecode::Status::Contradiction);
    CHECK(ge.targets.at("s1").status == TargetDecode::Status::Contradiction);

    // Random case: tamper one observed symbol and keep only instances the
    // brute-force oracle certifies as inconsistent.
    testutil::InstanceGen gen(77);
    int checked = 0;
    std::mt19937_64 rng(78);
    while (checked < 5) {
        auto inst = gen.deterministic(true);
        const std::uint64_t M = Alphabet{inst.net.field(), inst.net.dim()}.size();
        auto& val = inst.obs.values[rng() % inst.obs.values.size()].second;
        val = vec_from_index(inst.net.field(), inst.net.dim(), (vec_index(val) + 1 + rng() % (M - 1)) % M);
        if (!testutil::enumerate_posterior(inst.net, inst.obs).empty()) continue; // still satisfiable
        ++checked;
        DecodeResult tmp = decode_mp(inst.net, inst.obs, {});
        DecodeResult tge = decode_gaussian(inst.net, inst.obs, {});
        CHECK(tmp.contradiction);
        CHECK(tge.contradiction);
    }
}

TEST_CASE("the production oracle agrees with the independent test enumeration") {
    testutil::InstanceGen gen(79);
    for (int trial = 0; trial < 8; ++trial) {
        auto inst = trial % 4 == 3 ? gen.stochastic() : gen.deterministic(trial % 2 == 0);
        std::vector<std::string> targets;
        for (const auto& s : inst.net.sources()) targets.push_back(s.id);
        targets.push_back(inst.net.links().front().id); // link targets work too
        auto got = oracle_marginal_support(inst.net, inst.obs, targets);
        auto expect = testutil::oracle_supports(inst.net, inst.obs);
        for (const auto& t : targets) {
            std::set<std::uint64_t> gs;
            for (const auto& v : got.at(t)) gs.insert(vec_index(v));
            CHECK(gs == expect.at(t));
        }
    }
}

TEST_CASE("bench rows are seeded, shaped and nonzero") {
    Field f = FieldSpec::make_order(4);
    auto rows = bench_chain({4, 8}, f, 5, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].K == 4);
    CHECK(rows[1].K == 8);
    for (const auto& r : rows) {
        CHECK(r.mp.mul > 0);
        CHECK(r.mp.messages > 0);
        CHECK(r.ge.mul > 0);
    }
    auto again = bench_chain({4, 8}, f, 5, 2);
    CHECK(rows[0].mp.mul == again[0].mp.mul);
    CHECK(rows[1].ge.add == again[1].ge.add);

    std::string csv = bench_csv(rows);
    CHECK(csv.rfind("K,mp_mul,mp_add,mp_msgs,ge_mul,ge_add\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.find("\n4,") != std::string::npos);
    CHECK(csv.find("\n8,") != std::string::npos);

    CHECK_THROWS_AS(bench_chain({4}, FieldSpec::make_order(2), 1), UsageError); // GF(2) chains are singular
    CHECK_THROWS_AS(bench_chain({1}, f, 1), UsageError);
}

TEST_CASE("stochastic decode reports set supports") {
    testutil::InstanceGen gen(80);
    for (int trial = 0; trial < 6; ++trial) {
        auto inst = gen.stochastic();
        DecodeResult mp = decode_mp(inst.net, inst.obs, {});
        CHECK(mp.stochastic);
        CHECK(mp.mode == RepMode::Sets);
        CHECK(!mp.contradiction); // sampled observations are always explainable
        auto expect = testutil::oracle_supports(inst.net, inst.obs);
        for (const auto& [id, d] : mp.targets) {
            const auto& o = expect.at(id);
            if (d.status == TargetDecode::Status::Decoded) {
                REQUIRE(o.size() == 1);
                CHECK(vec_index(d.value) == *o.begin());
            } else {
                REQUIRE(d.status == TargetDecode::Status::Ambiguous);
                for (std::uint64_t i : o)
                    CHECK(d.ambiguity.contains(vec_from_index(inst.net.field(), inst.net.dim(), i)));
            }
        }
    }
}
