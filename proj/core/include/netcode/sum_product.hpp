#pragma once

#include "netcode/engine.hpp"

namespace netcode {

// Dense nonnegative message over a variable's alphabet, indexed by
// vec_index. Normalized to sum 1 after every update; an all-zero message
// (inconsistent evidence) is kept as-is and flagged, never renormalized.
struct TableMessage {
    Alphabet alphabet;
    std::vector<double> values;

    static TableMessage uniform(const Alphabet& a);
    static TableMessage point(const Alphabet& a, const FVector& v);
    bool is_zero() const;
    void normalize();
};

// Variable update: pointwise product of the incoming messages (empty product is
// uniform), normalized.
TableMessage table_var_update(const Alphabet& alphabet, const std::vector<const TableMessage*>& incoming);

// Factor update: sum over the other neighbors' configurations. Linear constraints
// use a convolution closed form; tables and clusters enumerate under the
// guard.
TableMessage table_factor_update(const Factor& f, const Variable& out,
                                 const std::vector<std::pair<const Variable*, const TableMessage*>>& incoming,
                                 std::uint64_t table_guard = 1000000);

// phi(assignment): assignment must bind every incident variable (cluster
// internals are summed inside).
double payload_value(const FactorPayload& payload, const std::vector<std::string>& vars,
                     const std::map<std::string, FVector>& assignment);

// Product of all factors at a full variable assignment (unnormalized joint).
double graph_value(const FactorGraph& g, const std::map<std::string, FVector>& assignment);

struct TablePolicy {
    std::uint64_t table_guard = 1000000;

    using Message = TableMessage;
    Message initial(const Variable& v) const { return TableMessage::uniform(v.alphabet); }
    Message var_update(const Variable& v, const std::vector<const Message*>& incoming) const {
        return table_var_update(v.alphabet, incoming);
    }
    Message factor_update(const Factor& f, const Variable& out,
                          const std::vector<std::pair<const Variable*, const Message*>>& incoming) const {
        return table_factor_update(f, out, incoming, table_guard);
    }
    double residual(const Message& before, const Message& after) const;
    bool is_contradiction(const Message& m) const { return m.is_zero(); }
    void on_update(const EdgeKey&, const Message&, const Message&) const {}
};

// Beliefs for every variable plus the convergence report.
std::pair<std::map<std::string, TableMessage>, RunReport> run_sum_product(const FactorGraph& g,
                                                                          const Schedule& schedule);

} // namespace netcode
