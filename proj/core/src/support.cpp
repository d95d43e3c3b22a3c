#include "netcode/support.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>

namespace netcode {

namespace {

bool coset_capable(const Factor& f) {
    if (std::holds_alternative<LinearConstraint>(f.payload)) return true;
    if (std::holds_alternative<ObservationDelta>(f.payload)) return true;
    if (const auto* c = std::get_if<ClusterOf>(&f.payload))
        return std::all_of(c->constituents.begin(), c->constituents.end(), coset_capable);
    return false;
}

std::vector<std::uint64_t> coset_indices(const Coset& c, std::uint64_t guard) {
    std::vector<std::uint64_t> out;
    for (const auto& v : c.enumerate(guard)) out.push_back(vec_index(v));
    std::sort(out.begin(), out.end());
    return out;
}

Coset hull_of_indices(const Alphabet& a, const std::vector<std::uint64_t>& idx) {
    std::vector<FVector> pts;
    pts.reserve(idx.size());
    for (auto i : idx) pts.push_back(vec_from_index(a.field, a.n, i));
    return affine_hull(a.field, a.n, pts);
}

SupportMessage from_index_set(std::vector<std::uint64_t> idx) {
    if (idx.empty()) return EmptySupport{};
    return SetSupport{std::move(idx)};
}

// Pairwise intersection; the representation-mixing policy lives here.
SupportMessage intersect_pair(const SupportMessage& a, const SupportMessage& b, const Alphabet& alpha,
                              const SupportOptions& opts, SupportStats* stats) {
    if (support_is_empty(a) || support_is_empty(b)) return EmptySupport{};
    const Coset* ca = std::get_if<Coset>(&a);
    const Coset* cb = std::get_if<Coset>(&b);
    if (ca && cb) {
        auto r = coset_intersect(*ca, *cb);
        if (!r) return EmptySupport{};
        return *r;
    }
    const SetSupport* sa = std::get_if<SetSupport>(&a);
    const SetSupport* sb = std::get_if<SetSupport>(&b);
    if (sa && sb) {
        std::vector<std::uint64_t> out;
        std::set_intersection(sa->indices.begin(), sa->indices.end(), sb->indices.begin(), sb->indices.end(),
                              std::back_inserter(out));
        return from_index_set(std::move(out));
    }
    // Coset x set. Enumerate the coset when small enough (exact); otherwise
    // widen the set to its affine hull, which over-approximates but never
    // drops a feasible symbol.
    const Coset& cs = ca ? *ca : *cb;
    const SetSupport& st = sa ? *sa : *sb;
    if (stats) ++stats->representation_fallbacks;
    if (cs.count() <= opts.set_guard) {
        auto ci = coset_indices(cs, opts.set_guard);
        std::vector<std::uint64_t> out;
        std::set_intersection(ci.begin(), ci.end(), st.indices.begin(), st.indices.end(), std::back_inserter(out));
        return from_index_set(std::move(out));
    }
    if (stats) stats->over_approximated = true;
    auto r = coset_intersect(cs, hull_of_indices(alpha, st.indices));
    if (!r) return EmptySupport{};
    return *r;
}

struct GatheredLinear {
    const SupportMessage* out_msg = nullptr; // toward-input only
    std::vector<const Variable*> in_vars;    // term variables, constraint order
    std::vector<std::uint32_t> coefs;
    std::vector<const SupportMessage*> in_msgs;
};

// Splits the incoming list of a linear factor into the output message and the
// nonzero-coefficient inputs; zero-coefficient neighbors only matter through
// the emptiness scan done by the caller.
GatheredLinear gather_linear(const LinearConstraint& lin,
                             const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming) {
    GatheredLinear g;
    for (const auto& [v, m] : incoming) {
        if (v->id == lin.output) {
            g.out_msg = m;
            continue;
        }
        auto it = lin.terms.find(v->id);
        if (it == lin.terms.end()) continue;
        g.in_vars.push_back(v);
        g.coefs.push_back(it->second);
        g.in_msgs.push_back(m);
    }
    return g;
}

const Coset& as_coset(const SupportMessage& m) {
    const Coset* c = std::get_if<Coset>(&m);
    if (!c) throw std::logic_error("coset-mode message is not a coset");
    return *c;
}

SupportMessage linear_coset_update(const LinearConstraint& lin, const Variable& out,
                                   const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming) {
    const Field& f = out.alphabet.field;
    const std::size_t n = out.alphabet.n;
    GatheredLinear g = gather_linear(lin, incoming);

    if (out.id == lin.output) {
        // Image of the incoming cosets: representative solved at the
        // incoming representatives, subspace the sum of the incoming subspaces.
        FVector rep = FVector::zeros(f, n);
        Subspace space(f, n);
        for (std::size_t i = 0; i < g.in_vars.size(); ++i) {
            const Coset& c = as_coset(*g.in_msgs[i]);
            rep.axpy(g.coefs[i], c.rep());
            space = sum(space, c.space());
        }
        return Coset(std::move(rep), std::move(space));
    }

    auto it = lin.terms.find(out.id);
    if (it == lin.terms.end())
        throw std::logic_error("support update toward zero-coefficient edge " + lin.output + " / " + out.id +
                               "; run simplify first");
    const std::uint32_t ca = it->second;
    if (!g.out_msg) throw std::logic_error("linear factor is missing its output message");
    const Coset& co = as_coset(*g.out_msg);
    // Solve for the recipient: c_a y_a = y_out - sum_i c_i y_i; scalar
    // scaling keeps subspaces.
    FVector rep = co.rep();
    Subspace space = co.space();
    for (std::size_t i = 0; i < g.in_vars.size(); ++i) {
        if (g.in_vars[i]->id == out.id) continue;
        const Coset& c = as_coset(*g.in_msgs[i]);
        rep.axpy(f->neg(g.coefs[i]), c.rep());
        space = sum(space, c.space());
    }
    return Coset(rep.scaled(f->inv(ca)), std::move(space));
}

// Equation rows of a cluster's constituents: gamma-weighted variable blocks
// summing to a constant. Nested clusters flatten recursively.
struct ClusterEq {
    std::map<std::string, std::uint32_t> gamma;
    FVector rhs;
};

void collect_equations(const Factor& f, const Field& field, std::size_t n, std::vector<ClusterEq>& eqs) {
    if (const auto* lin = std::get_if<LinearConstraint>(&f.payload)) {
        ClusterEq e;
        e.rhs = FVector::zeros(field, n);
        std::uint32_t& go = e.gamma[lin->output];
        go = field->add(go, 1);
        for (const auto& [v, c] : lin->terms) {
            std::uint32_t& gv = e.gamma[v];
            gv = field->add(gv, field->neg(c));
        }
        eqs.push_back(std::move(e));
        return;
    }
    if (const auto* obs = std::get_if<ObservationDelta>(&f.payload)) {
        ClusterEq e;
        e.gamma[f.vars.at(0)] = 1;
        e.rhs = obs->value;
        eqs.push_back(std::move(e));
        return;
    }
    if (const auto* c = std::get_if<ClusterOf>(&f.payload)) {
        for (const auto& sub : c->constituents) collect_equations(sub, field, n, eqs);
        return;
    }
    throw std::logic_error("cluster constituent is not linear in coset mode");
}

// Outgoing support of a cluster factor in coset mode: one affine solve whose
// unknowns are the recipient, every constituent-only (internal) variable and
// one coefficient per incoming basis vector; the answer is the projection of
// the solution set onto the recipient block.
SupportMessage cluster_coset_update(const Factor& f, const Variable& out,
                                    const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming) {
    const Field& field = out.alphabet.field;
    const std::size_t n = out.alphabet.n;

    std::vector<ClusterEq> eqs;
    collect_equations(f, field, n, eqs);

    std::map<std::string, const Coset*> external;
    for (const auto& [v, m] : incoming) external.emplace(v->id, &as_coset(*m));

    // Column layout: recipient block first, then blocks discovered in
    // equation order (n columns per free variable, dim(W) per external).
    std::map<std::string, std::size_t> col_of;
    std::size_t cols = n;
    col_of[out.id] = 0;
    for (const auto& e : eqs)
        for (const auto& [v, c] : e.gamma) {
            if (c == 0 || col_of.count(v)) continue;
            auto ext = external.find(v);
            col_of[v] = cols;
            cols += ext == external.end() ? n : ext->second->dim();
        }

    FMatrix M(field, eqs.size() * n, cols);
    FVector b = FVector::zeros(field, eqs.size() * n);
    for (std::size_t r = 0; r < eqs.size(); ++r) {
        const ClusterEq& e = eqs[r];
        for (std::size_t d = 0; d < n; ++d) b[r * n + d] = e.rhs[d];
        for (const auto& [v, c] : e.gamma) {
            if (c == 0) continue;
            const std::size_t base = col_of.at(v);
            auto ext = external.find(v);
            if (ext == external.end()) {
                for (std::size_t d = 0; d < n; ++d) M.at(r * n + d, base + d) = c;
                continue;
            }
            // Substitute y_v = rep_v + B_v t_v and move the constant part to
            // the right-hand side.
            const Coset& cs = *ext->second;
            for (std::size_t d = 0; d < n; ++d) {
                b[r * n + d] = field->sub(b[r * n + d], field->mul(c, cs.rep()[d]));
                for (std::size_t j = 0; j < cs.dim(); ++j)
                    M.at(r * n + d, base + j) = field->mul(c, cs.space().basis()[j][d]);
            }
        }
    }

    SolveResult s = solve(M, b);
    if (!s.feasible) return EmptySupport{};
    auto head = [&](const FVector& v) {
        FVector h = FVector::zeros(field, n);
        for (std::size_t d = 0; d < n; ++d) h[d] = v[d];
        return h;
    };
    std::vector<FVector> gens;
    gens.reserve(s.kernel.size());
    for (const auto& k : s.kernel) gens.push_back(head(k));
    return Coset(head(s.particular), Subspace::span(field, n, gens));
}

// Mixed-radix walk over the incoming index sets; calls fn with a full
// vector-valued assignment per configuration.
template <class Fn>
void for_each_config(const std::vector<const Variable*>& vars, const std::vector<const SetSupport*>& supports,
                     Fn&& fn) {
    std::map<std::string, FVector> assignment;
    std::vector<std::size_t> digit(vars.size(), 0);
    for (;;) {
        for (std::size_t i = 0; i < vars.size(); ++i)
            assignment.insert_or_assign(vars[i]->id,
                                        vec_from_index(vars[i]->alphabet.field, vars[i]->alphabet.n,
                                                       supports[i]->indices[digit[i]]));
        fn(assignment);
        std::size_t i = 0;
        while (i < vars.size() && ++digit[i] == supports[i]->indices.size()) digit[i++] = 0;
        if (i == vars.size()) break;
    }
}

const SetSupport& as_set(const SupportMessage& m) {
    const SetSupport* s = std::get_if<SetSupport>(&m);
    if (!s) throw std::logic_error("set-mode message is not an explicit set");
    return *s;
}

// Factor image by enumeration over the incoming supports (set mode). Linear
// constraints solve for the recipient, everything else scans its alphabet.
SupportMessage set_factor_update(const Factor& f, const Variable& out,
                                 const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming,
                                 const SupportOptions& opts) {
    const Field& field = out.alphabet.field;
    const std::size_t n = out.alphabet.n;

    if (const auto* lin = std::get_if<LinearConstraint>(&f.payload)) {
        GatheredLinear g = gather_linear(*lin, incoming);
        const bool toward_output = out.id == lin->output;
        std::uint32_t ca = 1;
        if (!toward_output) {
            auto it = lin->terms.find(out.id);
            if (it == lin->terms.end())
                throw std::logic_error("support update toward zero-coefficient edge " + lin->output + " / " + out.id +
                                       "; run simplify first");
            ca = it->second;
        }
        std::vector<const Variable*> vars;
        std::vector<const SetSupport*> supports;
        std::uint64_t combos = 1;
        for (std::size_t i = 0; i < g.in_vars.size(); ++i) {
            if (g.in_vars[i]->id == out.id) continue;
            vars.push_back(g.in_vars[i]);
            supports.push_back(&as_set(*g.in_msgs[i]));
            combos *= supports.back()->indices.size();
            if (combos > opts.enum_guard) throw CapacityError("support enumeration exceeds the guard");
        }
        std::vector<std::uint64_t> idx;
        if (toward_output) {
            for_each_config(vars, supports, [&](const std::map<std::string, FVector>& a) {
                FVector y = FVector::zeros(field, n);
                for (std::size_t i = 0; i < vars.size(); ++i) {
                    auto it = lin->terms.find(vars[i]->id);
                    y.axpy(it->second, a.at(vars[i]->id));
                }
                idx.push_back(vec_index(y));
            });
        } else {
            if (!g.out_msg) throw std::logic_error("linear factor is missing its output message");
            const SetSupport& outs = as_set(*g.out_msg);
            combos *= outs.indices.size();
            if (combos > opts.enum_guard) throw CapacityError("support enumeration exceeds the guard");
            const std::uint32_t cinv = field->inv(ca);
            for (auto oi : outs.indices) {
                FVector yo = vec_from_index(field, n, oi);
                for_each_config(vars, supports, [&](const std::map<std::string, FVector>& a) {
                    FVector y = yo;
                    for (std::size_t i = 0; i < vars.size(); ++i) {
                        auto it = lin->terms.find(vars[i]->id);
                        y.axpy(field->neg(it->second), a.at(vars[i]->id));
                    }
                    idx.push_back(vec_index(y.scaled(cinv)));
                });
            }
        }
        std::sort(idx.begin(), idx.end());
        idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
        return from_index_set(std::move(idx));
    }

    // Tables and clusters: scan the recipient's alphabet against every
    // configuration of the other neighbors and keep values with positive
    // local function. Exact zeros in the tables make this exact.
    std::vector<const Variable*> vars;
    std::vector<const SetSupport*> supports;
    std::uint64_t combos = out.alphabet.size();
    for (const auto& [v, m] : incoming) {
        vars.push_back(v);
        supports.push_back(&as_set(*m));
        combos *= supports.back()->indices.size();
        if (combos > opts.enum_guard) throw CapacityError("support enumeration exceeds the guard");
    }
    std::vector<std::uint64_t> idx;
    for_each_config(vars, supports, [&](std::map<std::string, FVector>& a) {
        for (std::uint64_t yi = 0; yi < out.alphabet.size(); ++yi) {
            a.insert_or_assign(out.id, vec_from_index(field, n, yi));
            if (payload_value(f.payload, f.vars, a) > 0.0) idx.push_back(yi);
        }
    });
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return from_index_set(std::move(idx));
}

} // namespace

RepMode choose_rep_mode(const FactorGraph& g) {
    for (const auto& f : g.factors())
        if (!coset_capable(f)) return RepMode::Sets;
    return RepMode::Cosets;
}

bool support_is_empty(const SupportMessage& m) { return std::holds_alternative<EmptySupport>(m); }

bool support_equal(const SupportMessage& a, const SupportMessage& b) { return a == b; }

bool support_contains(const SupportMessage& a, const SupportMessage& b) {
    if (support_is_empty(b)) return true;
    if (support_is_empty(a)) return false;
    if (const auto* ca = std::get_if<Coset>(&a)) {
        if (const auto* cb = std::get_if<Coset>(&b)) {
            if (!ca->contains(cb->rep())) return false;
            for (const auto& v : cb->space().basis())
                if (!ca->space().contains(v)) return false;
            return true;
        }
        const auto& sb = std::get<SetSupport>(b);
        for (auto i : sb.indices)
            if (!ca->contains(vec_from_index(ca->field(), ca->ambient_dim(), i))) return false;
        return true;
    }
    const auto& sa = std::get<SetSupport>(a);
    if (const auto* cb = std::get_if<Coset>(&b)) {
        if (cb->count() > sa.indices.size()) return false;
        for (const auto& v : cb->enumerate(sa.indices.size()))
            if (!std::binary_search(sa.indices.begin(), sa.indices.end(), vec_index(v))) return false;
        return true;
    }
    const auto& sb = std::get<SetSupport>(b);
    return std::includes(sa.indices.begin(), sa.indices.end(), sb.indices.begin(), sb.indices.end());
}

std::uint64_t support_count(const SupportMessage& m) {
    if (support_is_empty(m)) return 0;
    if (const auto* c = std::get_if<Coset>(&m)) return c->count();
    return std::get<SetSupport>(m).indices.size();
}

SupportMessage full_support(const Alphabet& alpha, RepMode mode, std::uint64_t guard) {
    if (mode == RepMode::Cosets) return Coset::full(alpha.field, alpha.n);
    if (alpha.size() > guard) throw CapacityError("alphabet too large for explicit set supports");
    std::vector<std::uint64_t> all(alpha.size());
    std::iota(all.begin(), all.end(), 0);
    return SetSupport{std::move(all)};
}

SupportMessage support_var_update(const Alphabet& alpha, const std::vector<const SupportMessage*>& incoming,
                                  RepMode mode, const SupportOptions& opts, SupportStats* stats) {
    SupportMessage acc = full_support(alpha, mode, opts.enum_guard);
    for (const auto* m : incoming) {
        acc = intersect_pair(acc, *m, alpha, opts, stats);
        if (support_is_empty(acc)) break;
    }
    return acc;
}

SupportMessage support_factor_update(const Factor& f, const Variable& out,
                                     const std::vector<std::pair<const Variable*, const SupportMessage*>>& incoming,
                                     RepMode mode, const SupportOptions& opts, SupportStats* stats) {
    (void)stats;
    for (const auto& [v, m] : incoming)
        if (support_is_empty(*m)) return EmptySupport{};

    if (const auto* obs = std::get_if<ObservationDelta>(&f.payload)) {
        if (mode == RepMode::Cosets) return Coset::point(obs->value);
        return SetSupport{{vec_index(obs->value)}};
    }
    if (mode == RepMode::Sets) return set_factor_update(f, out, incoming, opts);
    if (const auto* lin = std::get_if<LinearConstraint>(&f.payload)) return linear_coset_update(*lin, out, incoming);
    if (std::holds_alternative<ClusterOf>(f.payload)) return cluster_coset_update(f, out, incoming);
    throw std::logic_error("coset mode cannot update a table factor");
}

void SupportPolicy::on_update(const EdgeKey& e, const Message& before, const Message& after) const {
    if (!support_equal(before, after)) ++stats->strict_shrinks;
    if (!opts.check_monotone) return;
    counters::Pause pause;
    if (!support_contains(before, after))
        throw std::logic_error("support grew on edge " + e.factor + (e.to_var ? " -> " : " <- ") + e.var);
}

std::pair<std::map<std::string, SupportMessage>, SupportReport>
run_support(const FactorGraph& g, const Schedule& schedule, const SupportOptions& opts) {
    SupportPolicy policy;
    policy.mode = choose_rep_mode(g);
    policy.opts = opts;
    Schedule exact = schedule;
    exact.tolerance = 0.0; // canonical forms compare exactly
    Engine<SupportPolicy> engine(g, policy);
    auto [msgs, run] = engine.run(exact);
    auto beliefs = engine.beliefs(msgs);
    for (const auto& [id, b] : beliefs) run.contradiction = run.contradiction || support_is_empty(b);
    SupportReport report;
    report.run = run;
    report.mode = policy.mode;
    report.stats = *policy.stats;
    return {std::move(beliefs), report};
}

EquivalenceReport equivalence_check(const FactorGraph& g, const Schedule& schedule, std::uint64_t seed) {
    Engine<TablePolicy> table_engine(g, TablePolicy{});
    SupportPolicy spol;
    spol.mode = choose_rep_mode(g);
    Engine<SupportPolicy> support_engine(g, spol);

    // Constancy over the support is a property of delta-only graphs; with
    // channel tables in play only the supports themselves must agree.
    std::function<bool(const FactorPayload&)> has_table = [&](const FactorPayload& p) {
        if (std::holds_alternative<TablePayload>(p)) return true;
        if (const auto* c = std::get_if<ClusterOf>(&p))
            for (const auto& part : c->constituents)
                if (has_table(part.payload)) return true;
        return false;
    };
    bool deterministic = true;
    for (const auto& f : g.factors())
        if (has_table(f.payload)) deterministic = false;

    auto tmsgs = table_engine.initial_messages();
    auto smsgs = support_engine.initial_messages();
    std::vector<EdgeKey> order = table_engine.edges();
    std::mt19937_64 rng(seed);

    EquivalenceReport report;
    auto compare = [&](std::size_t iter) {
        for (const auto& e : order) {
            const TableMessage& tm = tmsgs.at(e);
            const SupportMessage& sm = smsgs.at(e);
            std::vector<std::uint64_t> table_sup;
            double lo = 0.0, hi = 0.0;
            for (std::uint64_t i = 0; i < tm.values.size(); ++i) {
                if (tm.values[i] <= 0.0) continue;
                if (table_sup.empty()) lo = hi = tm.values[i];
                lo = std::min(lo, tm.values[i]);
                hi = std::max(hi, tm.values[i]);
                table_sup.push_back(i);
            }
            std::vector<std::uint64_t> sup;
            if (const auto* c = std::get_if<Coset>(&sm))
                sup = coset_indices(*c, tm.values.size());
            else if (const auto* s = std::get_if<SetSupport>(&sm))
                sup = s->indices;
            std::string where = "iteration " + std::to_string(iter) + ", edge " + e.factor +
                                (e.to_var ? " -> " : " <- ") + e.var;
            if (sup != table_sup) {
                report.pass = false;
                report.divergence = where + ": supports differ";
                return;
            }
            if (deterministic && hi - lo > 1e-9) {
                report.pass = false;
                report.divergence = where + ": table message not constant over its support";
                return;
            }
        }
    };

    compare(0);
    for (std::size_t it = 0; report.pass && it < schedule.max_iterations; ++it) {
        std::shuffle(order.begin(), order.end(), rng);
        auto tnext = tmsgs;
        double tres = table_engine.flood_step(tmsgs, tnext, order);
        tmsgs = std::move(tnext);
        auto snext = smsgs;
        double sres = support_engine.flood_step(smsgs, snext, order);
        smsgs = std::move(snext);
        ++report.iterations;
        compare(report.iterations);
        if (tres <= schedule.tolerance && sres == 0.0) break;
    }
    return report;
}

std::map<std::string, TargetDecode> extract_decode(const std::map<std::string, SupportMessage>& supports,
                                                   const std::vector<std::string>& targets, const FactorGraph& g) {
    std::map<std::string, TargetDecode> out;
    for (const auto& t : targets) {
        auto it = supports.find(t);
        if (it == supports.end() || !g.has_variable(t)) throw UsageError("unknown decode target: " + t);
        const Alphabet& alpha = g.variable(t).alphabet;
        TargetDecode d;
        if (support_is_empty(it->second)) {
            d.status = TargetDecode::Status::Contradiction;
        } else if (const auto* c = std::get_if<Coset>(&it->second)) {
            if (c->dim() == 0) {
                d.status = TargetDecode::Status::Decoded;
                d.value = c->rep();
            } else {
                d.status = TargetDecode::Status::Ambiguous;
                d.ambiguity = *c;
                d.ambiguity_dim = c->dim();
            }
        } else {
            const auto& s = std::get<SetSupport>(it->second);
            if (s.indices.size() == 1) {
                d.status = TargetDecode::Status::Decoded;
                d.value = vec_from_index(alpha.field, alpha.n, s.indices[0]);
            } else {
                d.status = TargetDecode::Status::Ambiguous;
                d.ambiguity = hull_of_indices(alpha, s.indices);
                d.ambiguity_dim = d.ambiguity.dim();
            }
        }
        out.emplace(t, std::move(d));
    }
    return out;
}

} // namespace netcode
