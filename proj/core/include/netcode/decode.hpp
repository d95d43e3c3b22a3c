#pragma once

#include "netcode/support.hpp"

namespace netcode {

struct DecodeOptions {
    bool simplify = true;
    bool prune = true;
    enum class ClusterMode { Auto, Off, Explicit };
    ClusterMode cluster = ClusterMode::Auto; // Auto clusters only when cyclic
    std::vector<std::vector<std::string>> partition; // used when Explicit
    std::size_t max_iterations = 100;
    SupportOptions support;
    std::uint64_t table_guard = 1000000;
};

struct DecodeResult {
    std::map<std::string, TargetDecode> targets;
    OpCounters counters;                    // message passing / elimination only
    std::vector<std::string> transform_log; // one line per pipeline stage
    FactorGraph graph;                      // the graph messages actually ran on
    RunReport run;
    RepMode mode = RepMode::Cosets;
    bool stochastic = false;
    bool clustered = false;
    bool superset_possible = false; // ran loopy on residual cycles; supports may be supersets
    bool over_approximated = false;
    bool contradiction = false;
};

// build_ncfg -> simplify -> prune -> cluster (when cyclic) -> support passing
// (sum-product for stochastic codes) -> extract. Targets default to all
// sources when empty.
DecodeResult decode_mp(const Network& net, const Observation& obs, std::vector<std::string> targets,
                       const DecodeOptions& opts = {});

// Baseline: global transfer matrix restricted to the observed links, one
// Gaussian elimination with the n right-hand-side columns, per-target cosets
// by projecting the solution set. Counters cover the elimination.
DecodeResult decode_gaussian(const Network& net, const Observation& obs, std::vector<std::string> targets);

// Brute force: enumerate source tuples (deterministic) or full assignments
// weighted by the factorization (stochastic) and project the consistent ones.
std::map<std::string, std::vector<FVector>> oracle_marginal_support(const Network& net, const Observation& obs,
                                                                    const std::vector<std::string>& targets,
                                                                    std::uint64_t guard = 1u << 20);

struct BenchRow {
    std::size_t K = 0;
    OpCounters mp;
    OpCounters ge;
};

// Relay chain with a seed-deterministic random invertible code per
// repetition; counters are summed over repetitions.
std::vector<BenchRow> bench_chain(const std::vector<std::size_t>& Ks, const Field& field, std::uint64_t seed,
                                  std::size_t reps = 1);

std::string bench_csv(const std::vector<BenchRow>& rows);

} // namespace netcode
