#include "netcode/sum_product.hpp"

#include <algorithm>
#include <cmath>

namespace netcode {

TableMessage TableMessage::uniform(const Alphabet& a) {
    std::uint64_t size = a.size();
    if (size > 1000000) throw CapacityError("alphabet too large for table messages");
    return {a, std::vector<double>(size, 1.0 / double(size))};
}

TableMessage TableMessage::point(const Alphabet& a, const FVector& v) {
    std::uint64_t size = a.size();
    if (size > 1000000) throw CapacityError("alphabet too large for table messages");
    std::vector<double> vals(size, 0.0);
    vals[vec_index(v)] = 1.0;
    return {a, std::move(vals)};
}

bool TableMessage::is_zero() const {
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

void TableMessage::normalize() {
    double sum = 0;
    for (double v : values) sum += v;
    if (sum <= 0) return; // contradiction stays all-zero
    for (double& v : values) v /= sum;
}

TableMessage table_var_update(const Alphabet& alphabet, const std::vector<const TableMessage*>& incoming) {
    TableMessage out = TableMessage::uniform(alphabet);
    for (const auto* m : incoming) {
        if (m->alphabet != alphabet) throw UsageError("message alphabet mismatch at variable update");
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= m->values[i];
    }
    out.normalize();
    return out;
}

namespace {

// D'(w) = sum_v mu(v) D(w - c v): distribution of (prev + c*y), y ~ mu.
std::vector<double> fold(const std::vector<double>& D, const std::vector<double>& mu, std::uint32_t c,
                         const Alphabet& a) {
    const std::uint64_t size = D.size();
    std::vector<double> out(size, 0.0);
    for (std::uint64_t v = 0; v < size; ++v) {
        if (mu[v] == 0.0) continue;
        FVector cv = vec_from_index(a.field, a.n, v).scaled(c);
        for (std::uint64_t w = 0; w < size; ++w) {
            if (D[w] == 0.0) continue;
            std::uint64_t target = vec_index(vec_from_index(a.field, a.n, w) + cv);
            out[target] += mu[v] * D[w];
        }
    }
    return out;
}

TableMessage linear_factor_update(const LinearConstraint& lc, const Variable& out,
                                  const std::vector<std::pair<const Variable*, const TableMessage*>>& incoming) {
    const Alphabet& a = out.alphabet;
    const std::uint64_t size = a.size();
    auto find = [&](const std::string& id) -> const TableMessage* {
        for (const auto& [var, msg] : incoming)
            if (var->id == id) return msg;
        throw std::logic_error("missing incoming message for '" + id + "'");
    };
    for (const auto& [var, msg] : incoming)
        if (msg->is_zero()) return {a, std::vector<double>(size, 0.0)};

    std::vector<double> D(size, 0.0);
    D[0] = 1.0;
    TableMessage result{a, std::vector<double>(size, 0.0)};

    if (out.id == lc.output) {
        for (const auto& [in_id, c] : lc.terms) D = fold(D, find(in_id)->values, c, a);
        result.values = std::move(D);
    } else if (auto it = lc.terms.find(out.id); it != lc.terms.end()) {
        // nu(v) = D(c_a v) where D is the distribution of
        // y_out - sum_{i != a} c_i y_i.
        D = fold(D, find(lc.output)->values, 1, a);
        for (const auto& [in_id, c] : lc.terms) {
            if (in_id == out.id) continue;
            D = fold(D, find(in_id)->values, a.field->neg(c), a);
        }
        for (std::uint64_t v = 0; v < size; ++v) {
            FVector cv = vec_from_index(a.field, a.n, v).scaled(it->second);
            result.values[v] = D[vec_index(cv)];
        }
    } else {
        // Zero-coefficient recipient: the factor is constant in it; the
        // outgoing mass is the total feasibility weight.
        for (const auto& [in_id, c] : lc.terms) D = fold(D, find(in_id)->values, c, a);
        const auto& mu_out = find(lc.output)->values;
        double mass = 0;
        for (std::uint64_t w = 0; w < size; ++w) mass += mu_out[w] * D[w];
        result.values.assign(size, mass);
    }
    result.normalize();
    return result;
}

TableMessage table_payload_update(const TablePayload& tp, const Factor& f, const Variable& out,
                                  const std::vector<std::pair<const Variable*, const TableMessage*>>& incoming) {
    const Alphabet& a = out.alphabet;
    const std::uint64_t size = a.size();
    auto find = [&](const std::string& id) -> const TableMessage* {
        for (const auto& [var, msg] : incoming)
            if (var->id == id) return msg;
        throw std::logic_error("missing incoming message for '" + id + "'");
    };
    const std::size_t nin = f.vars.size() - 1;
    TableMessage result{a, std::vector<double>(size, 0.0)};
    for (std::uint64_t r = 0; r < tp.rows.size(); ++r) {
        double weight = 1.0;
        std::uint64_t out_digit = 0;
        std::uint64_t rem = r;
        for (std::size_t i = 0; i < nin; ++i) {
            std::uint64_t digit = rem % size;
            rem /= size;
            const std::string& vid = f.vars[i + 1];
            if (vid == out.id)
                out_digit = digit;
            else
                weight *= find(vid)->values[digit];
        }
        if (weight == 0.0) continue;
        if (out.id == f.vars[0]) {
            for (std::uint64_t y = 0; y < size; ++y) result.values[y] += weight * tp.rows[r][y];
        } else {
            double obs = 0.0;
            const auto& mu_out = find(f.vars[0])->values;
            for (std::uint64_t y = 0; y < size; ++y) obs += tp.rows[r][y] * mu_out[y];
            result.values[out_digit] += weight * obs;
        }
    }
    result.normalize();
    return result;
}

TableMessage cluster_factor_update(const ClusterOf& cl, const Factor& f, const Variable& out,
                                   const std::vector<std::pair<const Variable*, const TableMessage*>>& incoming,
                                   std::uint64_t guard) {
    const Alphabet& a = out.alphabet;
    // Joint enumeration over incident + internal variables.
    std::vector<std::string> all_vars = f.vars;
    std::map<std::string, Alphabet> alphabets;
    alphabets[out.id] = out.alphabet;
    for (const auto& [var, msg] : incoming) alphabets[var->id] = var->alphabet;
    for (const auto& c : cl.constituents)
        for (const auto& v : c.vars)
            if (!alphabets.count(v)) alphabets[v] = a; // internals share the link alphabet
    for (const auto& v : cl.internal)
        if (std::find(all_vars.begin(), all_vars.end(), v) == all_vars.end()) all_vars.push_back(v);

    std::uint64_t total = 1;
    for (const auto& v : all_vars) {
        std::uint64_t s = alphabets.at(v).size();
        if (total > guard / s) throw CapacityError("cluster factor enumeration exceeds the table guard");
        total *= s;
    }

    auto find = [&](const std::string& id) -> const TableMessage* {
        for (const auto& [var, msg] : incoming)
            if (var->id == id) return msg;
        return nullptr;
    };

    TableMessage result{a, std::vector<double>(a.size(), 0.0)};
    std::map<std::string, FVector> assignment;
    for (std::uint64_t t = 0; t < total; ++t) {
        std::uint64_t rem = t;
        double weight = 1.0;
        std::uint64_t out_idx = 0;
        for (const auto& v : all_vars) {
            const Alphabet& va = alphabets.at(v);
            std::uint64_t digit = rem % va.size();
            rem /= va.size();
            assignment.insert_or_assign(v, vec_from_index(va.field, va.n, digit));
            if (v == out.id) {
                out_idx = digit;
            } else if (const auto* m = find(v)) {
                weight *= m->values[digit];
            }
        }
        if (weight == 0.0) continue;
        double value = 1.0;
        for (const auto& c : cl.constituents) {
            value *= payload_value(c.payload, c.vars, assignment);
            if (value == 0.0) break;
        }
        result.values[out_idx] += weight * value;
    }
    result.normalize();
    return result;
}

} // namespace

TableMessage table_factor_update(const Factor& f, const Variable& out,
                                 const std::vector<std::pair<const Variable*, const TableMessage*>>& incoming,
                                 std::uint64_t table_guard) {
    if (const auto* od = std::get_if<ObservationDelta>(&f.payload)) return TableMessage::point(out.alphabet, od->value);
    if (const auto* lc = std::get_if<LinearConstraint>(&f.payload)) return linear_factor_update(*lc, out, incoming);
    if (const auto* tp = std::get_if<TablePayload>(&f.payload)) return table_payload_update(*tp, f, out, incoming);
    return cluster_factor_update(std::get<ClusterOf>(f.payload), f, out, incoming, table_guard);
}

double payload_value(const FactorPayload& payload, const std::vector<std::string>& vars,
                     const std::map<std::string, FVector>& assignment) {
    if (const auto* od = std::get_if<ObservationDelta>(&payload))
        return assignment.at(vars.at(0)) == od->value ? 1.0 : 0.0;
    if (const auto* lc = std::get_if<LinearConstraint>(&payload)) {
        const FVector& out = assignment.at(lc->output);
        FVector sum = FVector::zeros(out.field(), out.size());
        for (const auto& [in_id, c] : lc->terms) sum.axpy(c, assignment.at(in_id));
        return sum == out ? 1.0 : 0.0;
    }
    if (const auto* tp = std::get_if<TablePayload>(&payload)) {
        const FVector& out = assignment.at(vars.at(0));
        const std::uint64_t size = Alphabet{out.field(), out.size()}.size();
        std::uint64_t r = 0, mult = 1;
        for (std::size_t i = 1; i < vars.size(); ++i) {
            r += vec_index(assignment.at(vars[i])) * mult;
            mult *= size;
        }
        return tp->rows.at(r).at(vec_index(out));
    }
    const auto& cl = std::get<ClusterOf>(payload);
    // Sum the internals out, recursively evaluating constituents.
    for (const auto& c : cl.constituents)
        for (const auto& v : c.vars)
            if (!assignment.count(v) && std::find(cl.internal.begin(), cl.internal.end(), v) == cl.internal.end())
                throw UsageError("cluster evaluation missing binding for '" + v + "'");
    if (cl.internal.empty()) {
        double value = 1.0;
        for (const auto& c : cl.constituents) value *= payload_value(c.payload, c.vars, assignment);
        return value;
    }
    // All NCFG variables share one alphabet; take it from any bound vector.
    if (assignment.empty()) throw UsageError("cluster evaluation requires at least one bound variable");
    const FVector& probe = assignment.begin()->second;
    Alphabet a{probe.field(), probe.size()};
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < cl.internal.size(); ++i) {
        if (total > 1000000 / a.size()) throw CapacityError("cluster internal enumeration exceeds the guard");
        total *= a.size();
    }
    double sum = 0.0;
    for (std::uint64_t t = 0; t < total; ++t) {
        std::map<std::string, FVector> ext = assignment;
        std::uint64_t rem = t;
        for (const auto& v : cl.internal) {
            ext.insert_or_assign(v, vec_from_index(a.field, a.n, rem % a.size()));
            rem /= a.size();
        }
        double value = 1.0;
        for (const auto& c : cl.constituents) {
            value *= payload_value(c.payload, c.vars, ext);
            if (value == 0.0) break;
        }
        sum += value;
    }
    return sum;
}

double graph_value(const FactorGraph& g, const std::map<std::string, FVector>& assignment) {
    double value = 1.0;
    for (const auto& f : g.factors()) {
        value *= payload_value(f.payload, f.vars, assignment);
        if (value == 0.0) break;
    }
    return value;
}

double TablePolicy::residual(const Message& before, const Message& after) const {
    double r = 0;
    for (std::size_t i = 0; i < before.values.size(); ++i)
        r = std::max(r, std::abs(before.values[i] - after.values[i]));
    return r;
}

std::pair<std::map<std::string, TableMessage>, RunReport> run_sum_product(const FactorGraph& g,
                                                                          const Schedule& schedule) {
    Engine<TablePolicy> engine(g, TablePolicy{});
    auto [msgs, report] = engine.run(schedule);
    auto beliefs = engine.beliefs(msgs);
    for (const auto& [id, b] : beliefs) report.contradiction |= b.is_zero();
    return {std::move(beliefs), report};
}

} // namespace netcode
