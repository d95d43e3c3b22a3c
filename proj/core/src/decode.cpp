#include "netcode/decode.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace netcode {

namespace {

std::vector<std::string> resolve_targets(const Network& net, std::vector<std::string> targets) {
    if (targets.empty())
        for (const auto& s : net.sources()) targets.push_back(s.id);
    return targets;
}

void require_valid(const Network& net) {
    auto diags = net.validate();
    if (has_errors(diags)) throw UsageError("invalid network:\n" + format_diagnostics(diags));
}

std::string graph_summary(const char* stage, const FactorGraph& g) {
    std::ostringstream os;
    os << stage << ": " << g.variables().size() << " vars, " << g.factors().size() << " factors, " << g.edge_count()
       << " edges";
    return os.str();
}

bool has_table_factor(const FactorGraph& g) {
    for (const auto& f : g.factors())
        if (std::holds_alternative<TablePayload>(f.payload)) return true;
    return false;
}

// Textbook structure-oblivious elimination for the baseline: a nonzero
// multiplier triggers a full-width row operation, so the cost profile is the
// generic O(rows^2 * cols) of direct inversion. The shared
// rref() skips zero entries and would quietly exploit the chain's staircase
// sparsity, understating the baseline.
RrefResult dense_rref(FMatrix A) {
    const Field& f = A.field();
    RrefResult out;
    std::size_t r = 0;
    for (std::size_t col = 0; col < A.cols() && r < A.rows(); ++col) {
        std::size_t piv = r;
        while (piv < A.rows() && A.at(piv, col) == 0) ++piv;
        if (piv == A.rows()) continue;
        A.swap_rows(r, piv);

        std::uint32_t inv = f->inv(A.at(r, col));
        A.at(r, col) = 1;
        for (std::size_t c = col + 1; c < A.cols(); ++c)
            if (A.at(r, c)) A.at(r, c) = f->mul(inv, A.at(r, c));

        for (std::size_t i = 0; i < A.rows(); ++i) {
            if (i == r) continue;
            std::uint32_t factor = A.at(i, col);
            if (factor == 0) continue;
            A.at(i, col) = 0;
            for (std::size_t c = col + 1; c < A.cols(); ++c)
                A.at(i, c) = f->sub(A.at(i, c), f->mul(factor, A.at(r, c)));
        }
        out.pivots.push_back(col);
        ++r;
    }
    out.rank = r;
    out.R = std::move(A);
    return out;
}

TargetDecode decode_from_coset(const Coset& c) {
    TargetDecode d;
    if (c.dim() == 0) {
        d.status = TargetDecode::Status::Decoded;
        d.value = c.rep();
    } else {
        d.status = TargetDecode::Status::Ambiguous;
        d.ambiguity = c;
        d.ambiguity_dim = c.dim();
    }
    return d;
}

} // namespace

DecodeResult decode_mp(const Network& net, const Observation& obs, std::vector<std::string> targets,
                       const DecodeOptions& opts) {
    require_valid(net);
    targets = resolve_targets(net, targets);

    DecodeResult res;
    FactorGraph g = build_ncfg(net, obs);
    for (const auto& t : targets)
        if (!g.has_variable(t)) throw UsageError("unknown decode target: " + t);
    res.transform_log.push_back(graph_summary("ncfg", g));

    if (opts.simplify) {
        g = simplify(g);
        res.transform_log.push_back(graph_summary("simplify", g));
    }
    if (opts.prune) {
        std::vector<Diagnostic> diags;
        g = prune(g, targets, &diags);
        res.transform_log.push_back(graph_summary("prune", g));
        for (const auto& d : diags) res.transform_log.push_back("prune diagnostic: " + d.message);
    }

    CycleReport cycles = find_cycles(g);
    const bool want_cluster = opts.cluster == DecodeOptions::ClusterMode::Explicit ||
                              (opts.cluster == DecodeOptions::ClusterMode::Auto && !cycles.is_forest);
    if (want_cluster) {
        std::vector<std::vector<std::string>> partition =
            opts.cluster == DecodeOptions::ClusterMode::Explicit ? opts.partition : default_clustering(net, g);
        std::set<std::string> protect(targets.begin(), targets.end());
        g = cluster(g, partition, protect);
        res.clustered = true;
        std::ostringstream os;
        os << "cluster: " << partition.size() << " groups";
        res.transform_log.push_back(os.str());
        res.transform_log.push_back(graph_summary("clustered", g));
        cycles = find_cycles(g);
    }
    res.superset_possible = !cycles.is_forest;
    if (!cycles.is_forest)
        res.transform_log.push_back("residual cycles: proceeding with loopy schedule (supports may be supersets)");

    Schedule schedule;
    schedule.mode = cycles.is_forest ? Schedule::Mode::TwoPassTree : Schedule::Mode::Flooding;
    schedule.max_iterations = opts.max_iterations;

    res.stochastic = has_table_factor(g);
    std::map<std::string, SupportMessage> supports;
    {
        counters::Scope scope(res.counters);
        if (res.stochastic) {
            auto [beliefs, run] = run_sum_product(g, schedule);
            res.run = run;
            res.mode = RepMode::Sets;
            for (const auto& [id, belief] : beliefs) {
                std::vector<std::uint64_t> idx;
                for (std::uint64_t i = 0; i < belief.values.size(); ++i)
                    if (belief.values[i] > 0.0) idx.push_back(i);
                if (idx.empty())
                    supports.emplace(id, EmptySupport{});
                else
                    supports.emplace(id, SetSupport{std::move(idx)});
            }
        } else {
            SupportOptions sopts = opts.support;
            auto [beliefs, report] = run_support(g, schedule, sopts);
            res.run = report.run;
            res.mode = report.mode;
            res.over_approximated = report.stats.over_approximated;
            supports = std::move(beliefs);
        }
    }
    res.contradiction = res.run.contradiction;
    res.targets = extract_decode(supports, targets, g);
    for (const auto& [id, d] : res.targets)
        res.contradiction = res.contradiction || d.status == TargetDecode::Status::Contradiction;
    res.graph = std::move(g);
    return res;
}

DecodeResult decode_gaussian(const Network& net, const Observation& obs, std::vector<std::string> targets) {
    require_valid(net);
    if (net.is_stochastic()) throw UsageError("gaussian baseline requires a deterministic code");
    targets = resolve_targets(net, targets);

    DecodeResult res;
    res.mode = RepMode::Cosets;

    std::vector<std::string> obs_links;
    obs_links.reserve(obs.values.size());
    for (const auto& [l, v] : obs.values) obs_links.push_back(l);
    const FMatrix A = net.global_transfer_matrix(obs_links);
    const std::size_t K = A.cols();
    const std::size_t J = A.rows();
    const std::size_t n = net.dim();
    const Field& f = net.field();
    {
        std::ostringstream os;
        os << "transfer: " << J << " x " << K;
        res.transform_log.push_back(os.str());
    }

    std::map<std::string, std::size_t> source_col;
    for (std::size_t i = 0; i < net.sources().size(); ++i) source_col.emplace(net.sources()[i].id, i);
    for (const auto& t : targets)
        if (!source_col.count(t)) throw UsageError("unknown decode target: " + t);

    // One elimination of [A | y*_1 ... y*_n]: the n symbol coordinates share
    // the pivot pattern, so back-substitution reads all of them at once.
    RrefResult R;
    {
        counters::Scope scope(res.counters);
        FMatrix aug(f, J, K + n);
        for (std::size_t r = 0; r < J; ++r) {
            for (std::size_t c = 0; c < K; ++c) aug.at(r, c) = A.at(r, c);
            for (std::size_t d = 0; d < n; ++d) aug.at(r, K + d) = obs.values[r].second[d];
        }
        R = dense_rref(std::move(aug));
    }
    {
        std::ostringstream os;
        os << "rref: rank " << R.rank;
        res.transform_log.push_back(os.str());
    }

    bool feasible = true;
    for (std::size_t i = 0; i < R.pivots.size(); ++i)
        if (R.pivots[i] >= K) feasible = false;
    res.contradiction = !feasible;

    std::vector<bool> is_pivot(K, false);
    std::vector<std::size_t> pivot_row(K, 0);
    for (std::size_t i = 0; i < R.pivots.size(); ++i)
        if (R.pivots[i] < K) {
            is_pivot[R.pivots[i]] = true;
            pivot_row[R.pivots[i]] = i;
        }

    for (const auto& t : targets) {
        if (!feasible) {
            TargetDecode d;
            d.status = TargetDecode::Status::Contradiction;
            res.targets.emplace(t, std::move(d));
            continue;
        }
        const std::size_t col = source_col.at(t);
        // Source col is free, or some free column feeds its pivot row: the
        // coordinate-wise system then leaves this symbol fully undetermined.
        bool determined = is_pivot[col];
        FVector value = FVector::zeros(f, n);
        if (determined) {
            const std::size_t r = pivot_row[col];
            for (std::size_t c = 0; c < K; ++c)
                if (!is_pivot[c] && R.R.at(r, c) != 0) determined = false;
            for (std::size_t d = 0; d < n; ++d) value[d] = R.R.at(r, K + d);
        }
        res.targets.emplace(t, decode_from_coset(determined ? Coset::point(value)
                                                            : Coset(value, Subspace::full(f, n))));
    }
    return res;
}

std::map<std::string, std::vector<FVector>> oracle_marginal_support(const Network& net, const Observation& obs,
                                                                    const std::vector<std::string>& targets,
                                                                    std::uint64_t guard) {
    require_valid(net);
    auto resolved = resolve_targets(net, targets);
    const Field& f = net.field();
    const std::size_t n = net.dim();
    const std::uint64_t alpha = Alphabet{f, n}.size();

    std::map<std::string, std::set<std::uint64_t>> hits;
    for (const auto& t : resolved) hits[t];

    if (!net.is_stochastic()) {
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < net.sources().size(); ++i) {
            total *= alpha;
            if (total > guard) throw CapacityError("oracle enumeration exceeds the guard");
        }
        for (std::uint64_t code = 0; code < total; ++code) {
            SymbolAssignment src;
            std::uint64_t rem = code;
            for (const auto& s : net.sources()) {
                src.emplace(s.id, vec_from_index(f, n, rem % alpha));
                rem /= alpha;
            }
            SymbolAssignment out = net.encode(src);
            bool match = true;
            for (const auto& [l, y] : obs.values)
                if (out.at(l) != y) {
                    match = false;
                    break;
                }
            if (!match) continue;
            for (const auto& t : resolved) {
                auto it = src.find(t);
                hits[t].insert(vec_index(it != src.end() ? it->second : out.at(t)));
            }
        }
    } else {
        // Posterior support: assignments of every variable with positive product
        // of channel probabilities, consistent with the observations.
        FactorGraph g = build_ncfg(net, obs);
        std::uint64_t total = 1;
        for (std::size_t i = 0; i < g.variables().size(); ++i) {
            total *= alpha;
            if (total > guard) throw CapacityError("oracle enumeration exceeds the guard");
        }
        for (std::uint64_t code = 0; code < total; ++code) {
            SymbolAssignment a;
            std::uint64_t rem = code;
            for (const auto& v : g.variables()) {
                a.emplace(v.id, vec_from_index(f, n, rem % alpha));
                rem /= alpha;
            }
            if (graph_value(g, a) <= 0.0) continue;
            for (const auto& t : resolved) hits[t].insert(vec_index(a.at(t)));
        }
    }

    std::map<std::string, std::vector<FVector>> out;
    for (const auto& [t, idx] : hits) {
        auto& vs = out[t];
        vs.reserve(idx.size());
        for (auto i : idx) vs.push_back(vec_from_index(f, n, i));
    }
    return out;
}

std::vector<BenchRow> bench_chain(const std::vector<std::size_t>& Ks, const Field& field, std::uint64_t seed,
                                  std::size_t reps) {
    if (field->q() < 3) throw UsageError("chain benchmarks need q >= 3 for an invertible code");
    std::vector<BenchRow> rows;
    for (std::size_t K : Ks) {
        if (K < 2) throw UsageError("chain networks need K >= 2");
        BenchRow row;
        row.K = K;
        const Network topology = make_chain_network(K, field);
        for (std::size_t rep = 0; rep < reps; ++rep) {
            std::uint64_t attempt = seed + 1315423911u * K + 2654435761u * rep;
            Network net = random_code(topology, field, attempt);
            std::vector<std::string> all_obs = topology.sinks().front().observed;
            while (true) {
                RrefResult r;
                {
                    counters::Pause pause;
                    r = rref(net.global_transfer_matrix(all_obs));
                }
                if (r.rank == net.sources().size()) break;
                attempt += 0x9e3779b97f4a7c15ull;
                net = random_code(topology, field, attempt);
            }

            std::mt19937_64 rng(attempt ^ 0xda3e39cb94b95bdbull);
            SymbolAssignment src;
            for (const auto& s : net.sources()) {
                FVector v = FVector::zeros(field, net.dim());
                for (std::size_t d = 0; d < net.dim(); ++d)
                    v[d] = static_cast<std::uint32_t>(rng() % field->q());
                src.emplace(s.id, v);
            }
            const Observation obs = net.make_observation(net.sinks().front().id, net.encode(src));

            DecodeResult mp = decode_mp(net, obs, {});
            DecodeResult ge = decode_gaussian(net, obs, {});
            for (const auto& s : net.sources()) {
                const TargetDecode& d = mp.targets.at(s.id);
                const TargetDecode& b = ge.targets.at(s.id);
                if (d.status != TargetDecode::Status::Decoded || d.value != src.at(s.id))
                    throw std::logic_error("benchmark decode mismatch (message passing)");
                if (b.status != TargetDecode::Status::Decoded || b.value != src.at(s.id))
                    throw std::logic_error("benchmark decode mismatch (gaussian)");
            }
            row.mp += mp.counters;
            row.ge += ge.counters;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream os;
    os << "K,mp_mul,mp_add,mp_msgs,ge_mul,ge_add\n";
    for (const auto& r : rows)
        os << r.K << ',' << r.mp.mul << ',' << r.mp.add << ',' << r.mp.messages << ',' << r.ge.mul << ',' << r.ge.add
           << '\n';
    return os.str();
}

} // namespace netcode
