// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit when
// anything fails. Every numeric bound is pinned here, not configurable.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "netcode/decode.hpp"
#include "netcode/network_format.hpp"
#include "oracles.hpp"
#include "random_nets.hpp"

using namespace netcode;
using testutil::Instance;
using testutil::InstanceGen;

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "tests/fixtures"
#endif

namespace {

struct Criterion {
    int id;
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<Criterion> g_results;

template <class Fn>
void criterion(int id, const std::string& name, Fn&& fn) {
    Criterion c{id, name, false, ""};
    try {
        c.pass = fn(c.detail);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    g_results.push_back(std::move(c));
}

// Shared evidence for criterion 4 gathered during criteria 1-3.
struct CosetClosure {
    std::size_t runs = 0;
    std::size_t fallbacks = 0;
    std::size_t non_coset_runs = 0;
} g_closure;

std::set<std::uint64_t> support_set(const SupportMessage& m, std::uint64_t alphabet) {
    auto idx = testutil::support_indices(m, alphabet);
    return {idx.begin(), idx.end()};
}

std::set<std::uint64_t> index_set(const std::vector<FVector>& vs) {
    std::set<std::uint64_t> s;
    for (const auto& v : vs) s.insert(vec_index(v));
    return s;
}

std::vector<std::string> all_variable_targets(const Network& net) {
    std::vector<std::string> t;
    for (const auto& s : net.sources()) t.push_back(s.id);
    for (const auto& l : net.links()) t.push_back(l.id);
    return t;
}

double loglog_slope(const std::vector<std::size_t>& xs, const std::vector<std::uint64_t>& ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(double(xs[i]));
        my += std::log(double(ys[i]));
    }
    mx /= double(n);
    my /= double(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = std::log(double(xs[i])) - mx;
        num += dx * (std::log(double(ys[i])) - my);
        den += dx * dx;
    }
    return num / den;
}

bool same_decode(const std::map<std::string, TargetDecode>& a, const std::map<std::string, TargetDecode>& b,
                 std::string& why) {
    if (a.size() != b.size()) {
        why = "target sets differ";
        return false;
    }
    for (const auto& [id, da] : a) {
        auto it = b.find(id);
        if (it == b.end()) {
            why = "missing target " + id;
            return false;
        }
        const TargetDecode& db = it->second;
        if (da.status != db.status) {
            why = "status mismatch on " + id;
            return false;
        }
        if (da.status == TargetDecode::Status::Decoded && da.value != db.value) {
            why = "value mismatch on " + id;
            return false;
        }
        if (da.status == TargetDecode::Status::Ambiguous &&
            (da.ambiguity != db.ambiguity || da.ambiguity_dim != db.ambiguity_dim)) {
            why = "ambiguity coset mismatch on " + id;
            return false;
        }
    }
    return true;
}

// Criterion 1: tree exactness on >= 200 random acyclic deterministic nets.
bool tree_exactness(std::string& detail) {
    const int kInstances = 200;
    InstanceGen gen(1001);
    Schedule two_pass;
    for (int i = 0; i < kInstances; ++i) {
        Instance inst = gen.deterministic(true);
        FactorGraph g = simplify(build_ncfg(inst.net, inst.obs));
        auto [supports, report] = run_support(g, two_pass);
        ++g_closure.runs;
        g_closure.fallbacks += report.stats.representation_fallbacks;
        if (report.mode != RepMode::Cosets) ++g_closure.non_coset_runs;
        if (!report.run.converged) {
            detail = "instance " + std::to_string(i) + ": did not converge";
            return false;
        }
        auto oracle = oracle_marginal_support(inst.net, inst.obs, all_variable_targets(inst.net));
        const std::uint64_t M = Alphabet{inst.net.field(), inst.net.dim()}.size();
        for (const auto& [id, vs] : oracle) {
            if (support_set(supports.at(id), M) != index_set(vs)) {
                detail = "instance " + std::to_string(i) + ": support of " + id + " differs from the oracle";
                return false;
            }
        }
    }
    detail = std::to_string(kInstances) + "/" + std::to_string(kInstances) +
             " instances: supports equal the oracle exactly";
    return true;
}

// Criterion 2: monotone convergence to sound fixpoints on cyclic NCFGs.
bool cyclic_soundness(std::string& detail) {
    const int kInstances = 100;
    InstanceGen gen(1002);
    Schedule flood;
    flood.mode = Schedule::Mode::Flooding;
    flood.max_iterations = 500;
    SupportOptions opts;
    opts.check_monotone = true; // any support growth throws
    std::size_t max_shrinks = 0;
    for (int i = 0; i < kInstances; ++i) {
        Instance inst = gen.deterministic(false);
        FactorGraph g = simplify(build_ncfg(inst.net, inst.obs));
        std::pair<std::map<std::string, SupportMessage>, SupportReport> run;
        try {
            run = run_support(g, flood, opts);
        } catch (const std::exception& e) {
            detail = "instance " + std::to_string(i) + ": monotonicity violated (" + e.what() + ")";
            return false;
        }
        auto& [supports, report] = run;
        ++g_closure.runs;
        g_closure.fallbacks += report.stats.representation_fallbacks;
        if (report.mode != RepMode::Cosets) ++g_closure.non_coset_runs;
        if (!report.run.converged) {
            detail = "instance " + std::to_string(i) + ": no fixpoint within the iteration budget";
            return false;
        }
        const std::size_t bound = inst.net.dim() * 2 * g.edge_count();
        if (report.stats.strict_shrinks > bound) {
            detail = "instance " + std::to_string(i) + ": " + std::to_string(report.stats.strict_shrinks) +
                     " strict shrinks exceed n x |directed edges| = " + std::to_string(bound);
            return false;
        }
        max_shrinks = std::max(max_shrinks, report.stats.strict_shrinks);
        auto oracle = oracle_marginal_support(inst.net, inst.obs, all_variable_targets(inst.net));
        const std::uint64_t M = Alphabet{inst.net.field(), inst.net.dim()}.size();
        for (const auto& [id, vs] : oracle) {
            auto got = support_set(supports.at(id), M);
            for (std::uint64_t v : index_set(vs)) {
                if (!got.count(v)) {
                    detail = "instance " + std::to_string(i) + ": fixpoint support of " + id + " misses oracle symbol";
                    return false;
                }
            }
        }
    }
    detail = std::to_string(kInstances) + "/" + std::to_string(kInstances) +
             " cyclic instances: monotone, within the shrink bound (max " + std::to_string(max_shrinks) +
             "), sound supersets";
    return true;
}

// Criterion 3: lockstep sum-product vs support passing.
bool equivalence(std::string& detail) {
    const int kInstances = 100;
    InstanceGen gen(1003);
    Schedule flood;
    flood.mode = Schedule::Mode::Flooding;
    flood.max_iterations = 8;
    Schedule fix;
    fix.mode = Schedule::Mode::Flooding;
    fix.max_iterations = 100;
    for (int i = 0; i < kInstances; ++i) {
        Instance inst = gen.deterministic(i % 2 == 0);
        FactorGraph g = simplify(build_ncfg(inst.net, inst.obs));
        EquivalenceReport rep = equivalence_check(g, flood, 5000 + i);
        if (!rep.pass) {
            detail = "instance " + std::to_string(i) + ": " + rep.divergence;
            return false;
        }
        auto [supports, report] = run_support(g, fix); // closure evidence for criterion 4
        (void)supports;
        ++g_closure.runs;
        g_closure.fallbacks += report.stats.representation_fallbacks;
        if (report.mode != RepMode::Cosets) ++g_closure.non_coset_runs;
    }
    detail = std::to_string(kInstances) + "/" + std::to_string(kInstances) +
             " instances: table supports equal coset messages at every step";
    return true;
}

// Criterion 4: no message left the coset representation in criteria 1-3.
bool coset_closure(std::string& detail) {
    std::ostringstream os;
    os << g_closure.runs << " support runs: " << g_closure.fallbacks << " representation fallbacks, "
       << g_closure.non_coset_runs << " non-coset runs";
    detail = os.str();
    return g_closure.runs >= 400 && g_closure.fallbacks == 0 && g_closure.non_coset_runs == 0;
}

// Criterion 5: butterfly golden behavior.
bool butterfly_golden(std::string& detail) {
    Field f = FieldSpec::make_order(2);
    Network net = make_butterfly_network(f);

    for (const auto& sink : {std::string("t1"), std::string("t2")}) {
        for (std::uint32_t a = 0; a < 2; ++a)
            for (std::uint32_t b = 0; b < 2; ++b) {
                SymbolAssignment truth{{"s1", FVector(f, {a})}, {"s2", FVector(f, {b})}};
                Observation obs = net.make_observation(sink, net.encode(truth));
                if (!find_cycles(build_ncfg(net, obs)).is_forest) {
                    detail = "NCFG for " + sink + " is not cycle-free";
                    return false;
                }
                DecodeResult r = decode_mp(net, obs, {});
                for (const auto& [id, d] : r.targets) {
                    if (d.status != TargetDecode::Status::Decoded || d.value != truth.at(id)) {
                        detail = sink + " failed to decode pattern " + std::to_string(a) + std::to_string(b);
                        return false;
                    }
                }
            }
    }

    Observation obs_t1 = net.make_observation("t1", net.encode({{"s1", FVector(f, {1})}, {"s2", FVector(f, {0})}}));
    FactorGraph pruned = prune(simplify(build_ncfg(net, obs_t1)), {"s1", "s2"});
    std::ifstream in(std::string(FIXTURE_DIR) + "/golden/butterfly_t1_pruned.txt", std::ios::binary);
    if (!in.good()) {
        detail = "golden export fixture missing";
        return false;
    }
    std::ostringstream golden;
    golden << in.rdbuf();
    if (export_text(pruned) != golden.str()) {
        detail = "pruned t1 export differs from the stored golden file";
        return false;
    }
    detail = "NCFG cycle-free; 4 patterns x 2 sinks decoded; pruned export matches the golden file";
    return true;
}

// Criterion 6: clustering correctness on the chain.
bool clustering(std::string& detail) {
    Field f5 = FieldSpec::make_order(5);
    Network demo = make_chain_network(5, f5);
    SymbolAssignment ones;
    for (const auto& s : demo.sources()) ones.emplace(s.id, FVector(f5, {1}));
    Observation demo_obs = demo.make_observation(demo.sinks()[0].id, demo.encode(ones));
    FactorGraph raw = simplify(build_ncfg(demo, demo_obs));
    if (find_cycles(raw).is_forest) {
        detail = "chain NCFG unexpectedly acyclic";
        return false;
    }
    std::set<std::string> protect;
    for (const auto& s : demo.sources()) protect.insert(s.id);
    if (!find_cycles(cluster(raw, default_clustering(demo, raw), protect)).is_forest) {
        detail = "default clustering left a cycle";
        return false;
    }

    const int kCodes = 50;
    Field f = FieldSpec::make_order(16);
    std::mt19937_64 rng(1006);
    int done = 0;
    for (std::uint64_t seed = 1; done < kCodes; ++seed) {
        std::size_t K = 2 + (done % 15); // K <= 16
        Network topo = make_chain_network(K, f);
        Network net = random_code(topo, f, seed);
        if (rref(net.global_transfer_matrix(net.sinks()[0].observed)).rank < K) continue;
        SymbolAssignment truth;
        for (const auto& s : net.sources()) truth.emplace(s.id, vec_from_index(f, 1, rng() % 16));
        Observation obs = net.make_observation(net.sinks()[0].id, net.encode(truth));
        DecodeResult mp = decode_mp(net, obs, {});
        DecodeResult ge = decode_gaussian(net, obs, {});
        std::string why;
        if (!same_decode(mp.targets, ge.targets, why)) {
            detail = "K=" + std::to_string(K) + " seed " + std::to_string(seed) + ": " + why;
            return false;
        }
        for (const auto& s : net.sources()) {
            if (mp.targets.at(s.id).status != TargetDecode::Status::Decoded ||
                mp.targets.at(s.id).value != truth.at(s.id)) {
                detail = "K=" + std::to_string(K) + " seed " + std::to_string(seed) + ": wrong decode of " + s.id;
                return false;
            }
        }
        if (mp.superset_possible) {
            detail = "K=" + std::to_string(K) + ": clustering left residual cycles";
            return false;
        }
        ++done;
    }
    detail = "chain NCFG cyclic, clustered acyclic; 50/50 invertible codes (K in [2,16]): decode equals elimination";
    return true;
}

// Criterion 7: complexity separation on the relay chain.
bool complexity(std::string& detail) {
    const std::vector<std::size_t> Ks{4, 8, 16, 32};
    auto rows = bench_chain(Ks, FieldSpec::make_order(16), 3);
    std::vector<std::uint64_t> mp_ops, ge_ops;
    for (const auto& r : rows) {
        mp_ops.push_back(r.mp.field_ops());
        ge_ops.push_back(r.ge.field_ops());
    }
    double mp_slope = loglog_slope(Ks, mp_ops);
    double ge_slope = loglog_slope(Ks, ge_ops);
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << "mp slope " << mp_slope << " in [0.8,1.3]; ge slope " << ge_slope << " in [2.5,3.3]; "
       << "at K=32 mp " << mp_ops.back() << " < ge " << ge_ops.back();
    detail = os.str();
    return mp_slope >= 0.8 && mp_slope <= 1.3 && ge_slope >= 2.5 && ge_slope <= 3.3 &&
           mp_ops.back() < ge_ops.back();
}

// Criterion 8: stochastic posterior exactness on trees.
bool stochastic_posteriors(std::string& detail) {
    const int kInstances = 50;
    const double kTol = 1e-9;
    InstanceGen gen(1008);
    Schedule two_pass;
    for (int i = 0; i < kInstances; ++i) {
        Instance inst = gen.stochastic();
        FactorGraph g = simplify(build_ncfg(inst.net, inst.obs));
        auto [beliefs, report] = run_sum_product(g, two_pass);
        if (!report.converged || report.contradiction) {
            detail = "instance " + std::to_string(i) + ": run failed";
            return false;
        }
        auto post = testutil::oracle_posteriors(inst.net, inst.obs);
        for (const auto& [id, p] : post) {
            const auto& values = beliefs.at(id).values;
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (std::abs(values[k] - p[k]) > kTol) {
                    detail = "instance " + std::to_string(i) + ": belief of " + id + " off by " +
                             std::to_string(std::abs(values[k] - p[k]));
                    return false;
                }
            }
        }
    }
    detail = std::to_string(kInstances) + "/" + std::to_string(kInstances) +
             " stochastic trees: beliefs match brute-force posteriors within 1e-9";
    return true;
}

// Criterion 9: exact coset agreement with the baseline on singular codes.
bool singular_agreement(std::string& detail) {
    const int kInstances = 50;
    InstanceGen gen(1009);
    std::size_t ambiguous_targets = 0;
    for (int i = 0; i < kInstances; ++i) {
        Instance inst = gen.singular();
        DecodeResult mp = decode_mp(inst.net, inst.obs, {});
        DecodeResult ge = decode_gaussian(inst.net, inst.obs, {});
        std::string why;
        if (!same_decode(mp.targets, ge.targets, why)) {
            detail = "instance " + std::to_string(i) + ": " + why;
            return false;
        }
        for (const auto& [id, d] : mp.targets)
            if (d.status == TargetDecode::Status::Ambiguous) ++ambiguous_targets;
    }
    detail = std::to_string(kInstances) + "/" + std::to_string(kInstances) + " singular instances (" +
             std::to_string(ambiguous_targets) + " ambiguous targets): cosets equal exactly";
    return true;
}

} // namespace

int main() {
    criterion(1, "tree exactness", tree_exactness);
    criterion(2, "cyclic convergence and soundness", cyclic_soundness);
    criterion(3, "sum-product/support equivalence", equivalence);
    criterion(4, "coset closure", coset_closure);
    criterion(5, "butterfly golden", butterfly_golden);
    criterion(6, "chain clustering vs elimination", clustering);
    criterion(7, "complexity separation", complexity);
    criterion(8, "stochastic posterior exactness", stochastic_posteriors);
    criterion(9, "singular baseline agreement", singular_agreement);

    bool all = true;
    for (const auto& c : g_results) {
        all = all && c.pass;
        std::printf("[%s] criterion %d: %s — %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    c.detail.c_str());
    }
    return all ? 0 : 1;
}
