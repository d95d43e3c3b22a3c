#pragma once

#include <variant>

#include "netcode/network.hpp"

namespace netcode {

// Variable alphabet F^n. Cluster-internal variables keep their own alphabet;
// we never merge variables into tuples, we eliminate them inside cluster
// payloads instead.
struct Alphabet {
    Field field;
    std::size_t n = 1;

    std::uint64_t size() const;
    std::string to_string() const;
    friend bool operator==(const Alphabet& a, const Alphabet& b) {
        return a.n == b.n && ((a.field.get() == b.field.get()) || *a.field == *b.field);
    }
    friend bool operator!=(const Alphabet& a, const Alphabet& b) { return !(a == b); }
};

struct Variable {
    std::string id;
    Alphabet alphabet;
    friend bool operator==(const Variable& a, const Variable& b) {
        return a.id == b.id && a.alphabet == b.alphabet;
    }
};

// delta(y_out - sum_i terms[i] * y_i); terms hold only nonzero coefficients.
// The incidence list may still contain zero-coefficient variables until
// simplify() drops those edges.
struct LinearConstraint {
    std::string output;
    std::map<std::string, std::uint32_t> terms;
    friend bool operator==(const LinearConstraint&, const LinearConstraint&) = default;
};

// C(y_out | y_inputs): output is the factor's first incident variable, rows
// are indexed by the mixed-radix input tuple (remaining incident variables in
// order, first least significant).
struct TablePayload {
    std::vector<std::vector<double>> rows;
    friend bool operator==(const TablePayload&, const TablePayload&) = default;
};

struct ObservationDelta {
    FVector value;
    friend bool operator==(const ObservationDelta&, const ObservationDelta&) = default;
};

struct Factor;

// Product of the constituents with the internal variables summed out.
struct ClusterOf {
    std::vector<Factor> constituents;
    std::vector<std::string> internal;
    friend bool operator==(const ClusterOf&, const ClusterOf&);
};

using FactorPayload = std::variant<LinearConstraint, TablePayload, ObservationDelta, ClusterOf>;

struct Factor {
    std::string id;
    FactorPayload payload;
    std::vector<std::string> vars; // ordered incidence
    friend bool operator==(const Factor&, const Factor&);
};

const char* payload_kind(const FactorPayload& p); // linear|table|observation|cluster

class FactorGraph {
public:
    void add_variable(const std::string& id, Alphabet alphabet);
    void add_factor(const std::string& id, FactorPayload payload, std::vector<std::string> vars);

    const std::vector<Variable>& variables() const { return vars_; }
    const std::vector<Factor>& factors() const { return factors_; }
    bool has_variable(const std::string& id) const { return var_index_.count(id) != 0; }
    bool has_factor(const std::string& id) const { return factor_index_.count(id) != 0; }
    const Variable& variable(const std::string& id) const;
    const Factor& factor(const std::string& id) const;

    // Factors incident to a variable, in factor insertion order.
    const std::vector<std::string>& factors_of(const std::string& var) const;

    std::size_t edge_count() const;

    friend bool operator==(const FactorGraph& a, const FactorGraph& b) {
        return a.vars_ == b.vars_ && a.factors_ == b.factors_;
    }
    friend bool operator!=(const FactorGraph& a, const FactorGraph& b) { return !(a == b); }

private:
    std::vector<Variable> vars_;
    std::vector<Factor> factors_;
    std::map<std::string, std::size_t> var_index_;
    std::map<std::string, std::size_t> factor_index_;
    std::map<std::string, std::vector<std::string>> adjacency_;
    static const std::vector<std::string> kNoFactors;
};

// Definition 3: one variable per source and link, factor phi_<l> per link
// (incident to Y_l then inc(l)), degree-1 factor psi_<j> per observed link.
FactorGraph build_ncfg(const Network& net, const Observation& obs);

struct SimplifyOptions {
    bool merge_identities = false; // collapse y_l = 1*y_e chains
};

// Drops zero-coefficient edges from linear factors (Example 2's rule);
// optionally merges identity constraints. Idempotent.
FactorGraph simplify(const FactorGraph& g, const SimplifyOptions& opts = {});

// Keeps what can influence the targets: repeatedly strips non-terminal leaf
// variables whose attached factor marginalizes to a constant without them
// (always true for linear constraints and for table outputs), then drops
// isolated non-target variables. Observation factors are never stripped.
FactorGraph prune(const FactorGraph& g, const std::vector<std::string>& targets,
                  std::vector<Diagnostic>* diags = nullptr);

struct CycleReport {
    bool is_forest = true;
    std::vector<std::string> witness; // alternating variable/factor ids
};

CycleReport find_cycles(const FactorGraph& g);

// Each group of factor ids becomes one ClusterOf factor placed at the first
// constituent's position. A variable becomes internal to the cluster when all
// its factors lie in the group and it is not protected.
FactorGraph cluster(const FactorGraph& g, const std::vector<std::vector<std::string>>& partition,
                    const std::set<std::string>& protected_vars = {});

// Groups link factors by the tail node of their link, one group per node.
std::vector<std::vector<std::string>> default_clustering(const Network& net, const FactorGraph& g);

// var/factor/edge adjacency listing, insertion order, one line each.
std::string export_text(const FactorGraph& g);

} // namespace netcode
