#pragma once

#include <memory>

#include "netcode/subspace.hpp"
#include "netcode/sum_product.hpp"

namespace netcode {

// Support of a message: explicit symbol-index set (sorted, distinct,
// nonempty), a coset of F^n, or the contradiction state.
struct SetSupport {
    std::vector<std::uint64_t> indices;
    friend bool operator==(const SetSupport&, const SetSupport&) = default;
};
struct EmptySupport {
    friend bool operator==(const EmptySupport&, const EmptySupport&) { return true; }
};

using SupportMessage = std::variant<Coset, SetSupport, EmptySupport>;

enum class RepMode { Cosets, Sets };

// Cosets are possible exactly when every factor is linear, an observation,
// or a cluster of those.
RepMode choose_rep_mode(const FactorGraph& g);

struct SupportOptions {
    std::uint64_t set_guard = 4096;      // coset -> explicit set enumeration limit
    std::uint64_t enum_guard = 1000000;  // factor-image configuration enumeration limit
    bool check_monotone = false;         // assert supports never grow on any update
};

struct SupportStats {
    std::size_t strict_shrinks = 0;
    std::size_t representation_fallbacks = 0; // coset/set coercions performed
    bool over_approximated = false;           // a set was widened to its affine hull
};

bool support_is_empty(const SupportMessage& m);
bool support_equal(const SupportMessage& a, const SupportMessage& b);
bool support_contains(const SupportMessage& a, const SupportMessage& b); // b subseteq a
std::uint64_t support_count(const SupportMessage& m);
SupportMessage full_support(const Alphabet& alpha, RepMode mode, std::uint64_t guard = 1000000);

// Variable update: intersection of the incoming supports; empty result ->
// EmptySupport.
SupportMessage support_var_update(const Alphabet& alpha, const std::vector<const SupportMessage*>& incoming,
                                  RepMode mode, const SupportOptions& opts, SupportStats* stats);

// Factor update: closed form for linear constraints and an affine
// solve for clusters of them; explicit enumeration otherwise.
SupportMessage support_factor_update(const Factor& f, const Variable& out,
                                     const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming,
                                     RepMode mode, const SupportOptions& opts, SupportStats* stats);

struct SupportPolicy {
    RepMode mode = RepMode::Cosets;
    SupportOptions opts;
    std::shared_ptr<SupportStats> stats = std::make_shared<SupportStats>();

    using Message = SupportMessage;
    Message initial(const Variable& v) const { return full_support(v.alphabet, mode); }
    Message var_update(const Variable& v, const std::vector<const Message*>& incoming) const {
        return support_var_update(v.alphabet, incoming, mode, opts, stats.get());
    }
    Message factor_update(const Factor& f, const Variable& out,
                          const std::vector<std::pair<const Variable*, const Message*>>& incoming) const {
        return support_factor_update(f, out, incoming, mode, opts, stats.get());
    }
    double residual(const Message& before, const Message& after) const {
        return support_equal(before, after) ? 0.0 : 1.0;
    }
    bool is_contradiction(const Message& m) const { return support_is_empty(m); }
    void on_update(const EdgeKey& e, const Message& before, const Message& after) const;
};

struct SupportReport {
    RunReport run;
    RepMode mode = RepMode::Cosets;
    SupportStats stats;
};

// Fixpoint iteration: full-alphabet init, updates until the messages stop
// changing; beliefs are the per-variable incoming intersections.
std::pair<std::map<std::string, SupportMessage>, SupportReport>
run_support(const FactorGraph& g, const Schedule& schedule, const SupportOptions& opts = {});

struct EquivalenceReport {
    bool pass = true;
    std::size_t iterations = 0;
    std::string divergence; // first mismatch, empty when pass
};

// Lockstep flooding of the table and support engines:
// at every step each table message must be constant over its support and
// that support must equal the support-engine message. The seed shuffles the
// edge processing order.
EquivalenceReport equivalence_check(const FactorGraph& g, const Schedule& schedule, std::uint64_t seed);

struct TargetDecode {
    enum class Status { Decoded, Ambiguous, Contradiction };
    Status status = Status::Ambiguous;
    FVector value;             // meaningful when decoded
    Coset ambiguity;           // meaningful when ambiguous (affine hull for set supports)
    std::size_t ambiguity_dim = 0;
};

std::map<std::string, TargetDecode> extract_decode(const std::map<std::string, SupportMessage>& supports,
                                                   const std::vector<std::string>& targets, const FactorGraph& g);

} // namespace netcode
