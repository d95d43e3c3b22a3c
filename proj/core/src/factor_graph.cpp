#include "netcode/factor_graph.hpp"

#include <algorithm>
#include <sstream>

namespace netcode {

std::uint64_t Alphabet::size() const {
    std::uint64_t s = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (s > UINT64_MAX / field->q()) return UINT64_MAX;
        s *= field->q();
    }
    return s;
}

std::string Alphabet::to_string() const {
    return field->to_string() + "^" + std::to_string(n);
}

bool operator==(const ClusterOf& a, const ClusterOf& b) {
    return a.constituents == b.constituents && a.internal == b.internal;
}

bool operator==(const Factor& a, const Factor& b) {
    return a.id == b.id && a.vars == b.vars && a.payload == b.payload;
}

const char* payload_kind(const FactorPayload& p) {
    switch (p.index()) {
    case 0: return "linear";
    case 1: return "table";
    case 2: return "observation";
    default: return "cluster";
    }
}

const std::vector<std::string> FactorGraph::kNoFactors;

void FactorGraph::add_variable(const std::string& id, Alphabet alphabet) {
    if (!var_index_.emplace(id, vars_.size()).second)
        throw UsageError("duplicate variable '" + id + "'");
    vars_.push_back({id, std::move(alphabet)});
}

void FactorGraph::add_factor(const std::string& id, FactorPayload payload, std::vector<std::string> vars) {
    if (!factor_index_.emplace(id, factors_.size()).second)
        throw UsageError("duplicate factor '" + id + "'");
    std::set<std::string> seen;
    for (const auto& v : vars) {
        if (!has_variable(v)) throw UsageError("factor '" + id + "' references unknown variable '" + v + "'");
        if (!seen.insert(v).second) throw UsageError("factor '" + id + "' has duplicate incidence on '" + v + "'");
        adjacency_[v].push_back(id);
    }
    factors_.push_back({id, std::move(payload), std::move(vars)});
}

const Variable& FactorGraph::variable(const std::string& id) const {
    auto it = var_index_.find(id);
    if (it == var_index_.end()) throw UsageError("unknown variable '" + id + "'");
    return vars_[it->second];
}

const Factor& FactorGraph::factor(const std::string& id) const {
    auto it = factor_index_.find(id);
    if (it == factor_index_.end()) throw UsageError("unknown factor '" + id + "'");
    return factors_[it->second];
}

const std::vector<std::string>& FactorGraph::factors_of(const std::string& var) const {
    auto it = adjacency_.find(var);
    return it == adjacency_.end() ? kNoFactors : it->second;
}

std::size_t FactorGraph::edge_count() const {
    std::size_t n = 0;
    for (const auto& f : factors_) n += f.vars.size();
    return n;
}

FactorGraph build_ncfg(const Network& net, const Observation& obs) {
    FactorGraph g;
    Alphabet alpha{net.field(), net.dim()};
    for (const auto& s : net.sources()) g.add_variable(s.id, alpha);
    for (const auto& l : net.links()) g.add_variable(l.id, alpha);

    for (const auto& l : net.links()) {
        std::vector<std::string> vars{l.id};
        auto in = net.inc(l.id);
        vars.insert(vars.end(), in.begin(), in.end());
        auto ch = net.channels().find(l.id);
        if (ch != net.channels().end()) {
            g.add_factor("phi_" + l.id, TablePayload{ch->second.rows}, std::move(vars));
        } else {
            LinearConstraint lc;
            lc.output = l.id;
            for (const auto& e : in)
                if (auto c = net.coef(l.id, e); c != 0) lc.terms[e] = c;
            g.add_factor("phi_" + l.id, std::move(lc), std::move(vars));
        }
    }
    for (const auto& [lid, value] : obs.values) {
        if (!net.has_link(lid)) throw UsageError("observation on unknown link '" + lid + "'");
        if (value.size() != net.dim()) throw UsageError("observation for '" + lid + "' has wrong dimension");
        g.add_factor("psi_" + lid, ObservationDelta{value}, {lid});
    }
    return g;
}

namespace {

// Rebuild a graph from surviving variable/factor ids, preserving insertion
// order and (possibly trimmed) incidences.
FactorGraph rebuild(const FactorGraph& g, const std::set<std::string>& dead_vars,
                    const std::set<std::string>& dead_factors,
                    const std::map<std::string, std::vector<std::string>>& new_incidence) {
    FactorGraph out;
    for (const auto& v : g.variables())
        if (!dead_vars.count(v.id)) out.add_variable(v.id, v.alphabet);
    for (const auto& f : g.factors()) {
        if (dead_factors.count(f.id)) continue;
        auto it = new_incidence.find(f.id);
        out.add_factor(f.id, f.payload, it == new_incidence.end() ? f.vars : it->second);
    }
    return out;
}

} // namespace

FactorGraph simplify(const FactorGraph& g, const SimplifyOptions& opts) {
    FactorGraph out;
    for (const auto& v : g.variables()) out.add_variable(v.id, v.alphabet);
    for (const auto& f : g.factors()) {
        if (const auto* lc = std::get_if<LinearConstraint>(&f.payload)) {
            std::vector<std::string> vars;
            for (const auto& v : f.vars)
                if (v == lc->output || lc->terms.count(v)) vars.push_back(v);
            out.add_factor(f.id, f.payload, std::move(vars));
        } else {
            out.add_factor(f.id, f.payload, f.vars);
        }
    }
    if (!opts.merge_identities) return out;

    // Collapse delta(y_out - y_e): rewrite every other factor's reference to
    // y_out into y_e and drop the pair. Only linear neighborhoods are safe to
    // rewrite; anything else blocks the merge.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& f : out.factors()) {
            const auto* lc = std::get_if<LinearConstraint>(&f.payload);
            if (!lc || lc->terms.size() != 1) continue;
            const auto& [input, coef] = *lc->terms.begin();
            if (coef != 1 || input == lc->output) continue;
            const std::string& victim = lc->output;

            bool blocked = false;
            for (const auto& fid : out.factors_of(victim)) {
                if (fid == f.id) continue;
                const Factor& other = out.factor(fid);
                if (!std::holds_alternative<LinearConstraint>(other.payload)) blocked = true;
                if (std::get_if<LinearConstraint>(&other.payload) &&
                    std::get<LinearConstraint>(other.payload).output == victim)
                    blocked = true;
            }
            if (blocked) continue;

            FactorGraph next;
            for (const auto& v : out.variables())
                if (v.id != victim) next.add_variable(v.id, v.alphabet);
            const Field& field = out.variable(victim).alphabet.field;
            for (const auto& other : out.factors()) {
                if (other.id == f.id) continue;
                auto payload = other.payload;
                auto vars = other.vars;
                if (auto* olc = std::get_if<LinearConstraint>(&payload); olc && olc->terms.count(victim)) {
                    std::uint32_t c = olc->terms[victim];
                    olc->terms.erase(victim);
                    std::uint32_t merged = field->add(olc->terms.count(input) ? olc->terms[input] : 0, c);
                    if (merged)
                        olc->terms[input] = merged;
                    else
                        olc->terms.erase(input);
                    std::vector<std::string> trimmed;
                    for (const auto& v : vars) {
                        if (v == victim) {
                            if (std::find(vars.begin(), vars.end(), input) == vars.end() && merged)
                                trimmed.push_back(input);
                            continue;
                        }
                        if (v == input && !merged && olc->output != input) continue;
                        trimmed.push_back(v);
                    }
                    vars = std::move(trimmed);
                }
                next.add_factor(other.id, std::move(payload), std::move(vars));
            }
            out = std::move(next);
            changed = true;
            break;
        }
    }
    return out;
}

FactorGraph prune(const FactorGraph& g, const std::vector<std::string>& targets,
                  std::vector<Diagnostic>* diags) {
    for (const auto& t : targets)
        if (!g.has_variable(t)) throw UsageError("unknown target variable '" + t + "'");
    std::set<std::string> target_set(targets.begin(), targets.end());

    std::set<std::string> dead_vars, dead_factors;
    std::map<std::string, std::vector<std::string>> incidence;
    for (const auto& f : g.factors()) incidence[f.id] = f.vars;

    auto alive_factors_of = [&](const std::string& v) {
        std::vector<std::string> out;
        for (const auto& fid : g.factors_of(v)) {
            if (dead_factors.count(fid)) continue;
            const auto& vars = incidence[fid];
            if (std::find(vars.begin(), vars.end(), v) != vars.end()) out.push_back(fid);
        }
        return out;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& v : g.variables()) {
            if (dead_vars.count(v.id) || target_set.count(v.id)) continue;
            auto inc = alive_factors_of(v.id);
            if (inc.size() > 1) continue;
            if (inc.empty()) {
                dead_vars.insert(v.id);
                changed = true;
                continue;
            }
            const Factor& f = g.factor(inc[0]);
            if (const auto* lc = std::get_if<LinearConstraint>(&f.payload)) {
                if (v.id == lc->output || lc->terms.count(v.id)) {
                    // Summing the leaf out makes the delta integrate to 1 for
                    // any other inputs; the factor dissolves with it.
                    dead_vars.insert(v.id);
                    dead_factors.insert(f.id);
                } else {
                    // Zero-coefficient edge: the factor never reads v.
                    auto& vars = incidence[f.id];
                    vars.erase(std::remove(vars.begin(), vars.end(), v.id), vars.end());
                    dead_vars.insert(v.id);
                }
                changed = true;
            } else if (std::holds_alternative<TablePayload>(f.payload)) {
                if (!incidence[f.id].empty() && incidence[f.id][0] == v.id) {
                    // Rows sum to 1, so summing over the output kills the factor.
                    dead_vars.insert(v.id);
                    dead_factors.insert(f.id);
                    changed = true;
                }
            }
            // ObservationDelta / ClusterOf leaves stay.
        }
    }

    // Warn about targets that no observation can reach.
    if (diags) {
        std::map<std::string, int> comp;
        int next_comp = 0;
        for (const auto& v : g.variables()) {
            if (dead_vars.count(v.id) || comp.count(v.id)) continue;
            int c = next_comp++;
            std::vector<std::string> frontier{v.id};
            comp[v.id] = c;
            while (!frontier.empty()) {
                auto cur = frontier.back();
                frontier.pop_back();
                for (const auto& fid : alive_factors_of(cur))
                    for (const auto& w : incidence[fid])
                        if (!dead_vars.count(w) && !comp.count(w)) {
                            comp[w] = c;
                            frontier.push_back(w);
                        }
            }
        }
        std::set<int> observed_comps;
        for (const auto& f : g.factors())
            if (!dead_factors.count(f.id) && std::holds_alternative<ObservationDelta>(f.payload))
                for (const auto& v : incidence[f.id]) observed_comps.insert(comp[v]);
        for (const auto& t : targets)
            if (!observed_comps.count(comp[t]))
                diags->push_back({false, "target '" + t + "' is disconnected from all observations; decoding will be ambiguous"});
    }

    return rebuild(g, dead_vars, dead_factors, incidence);
}

CycleReport find_cycles(const FactorGraph& g) {
    CycleReport report;
    // Undirected DFS over the bipartite graph; vertices keyed "v:" / "f:".
    std::map<std::string, std::string> parent;
    std::set<std::string> visited;

    auto neighbors = [&](const std::string& key) {
        std::vector<std::string> out;
        if (key[0] == 'v') {
            for (const auto& fid : g.factors_of(key.substr(2))) out.push_back("f:" + fid);
        } else {
            for (const auto& vid : g.factor(key.substr(2)).vars) out.push_back("v:" + vid);
        }
        return out;
    };

    for (const auto& root : g.variables()) {
        std::string rk = "v:" + root.id;
        if (visited.count(rk)) continue;
        parent[rk] = "";
        std::vector<std::string> stack{rk};
        visited.insert(rk);
        while (!stack.empty() && report.is_forest) {
            auto u = stack.back();
            stack.pop_back();
            for (const auto& w : neighbors(u)) {
                if (w == parent[u]) continue;
                if (visited.count(w)) {
                    // Found a cycle: join the two tree paths at their meet.
                    std::vector<std::string> pu, pw;
                    for (std::string x = u; !x.empty(); x = parent[x]) pu.push_back(x);
                    for (std::string x = w; !x.empty(); x = parent[x]) pw.push_back(x);
                    std::set<std::string> on_pu(pu.begin(), pu.end());
                    std::string meet;
                    for (const auto& x : pw)
                        if (on_pu.count(x)) {
                            meet = x;
                            break;
                        }
                    std::vector<std::string> cyc;
                    for (const auto& x : pu) {
                        cyc.push_back(x);
                        if (x == meet) break;
                    }
                    std::vector<std::string> back;
                    for (const auto& x : pw) {
                        if (x == meet) break;
                        back.push_back(x);
                    }
                    std::reverse(back.begin(), back.end());
                    cyc.insert(cyc.end(), back.begin(), back.end());
                    report.is_forest = false;
                    for (const auto& x : cyc) report.witness.push_back(x.substr(2));
                    break;
                }
                visited.insert(w);
                parent[w] = u;
                stack.push_back(w);
            }
        }
        if (!report.is_forest) break;
    }
    return report;
}

FactorGraph cluster(const FactorGraph& g, const std::vector<std::vector<std::string>>& partition,
                    const std::set<std::string>& protected_vars) {
    std::map<std::string, std::size_t> group_of;
    for (std::size_t gi = 0; gi < partition.size(); ++gi) {
        if (partition[gi].empty()) throw UsageError("empty cluster group");
        for (const auto& fid : partition[gi]) {
            if (!g.has_factor(fid)) throw UsageError("cluster group references unknown factor '" + fid + "'");
            if (!group_of.emplace(fid, gi).second)
                throw UsageError("factor '" + fid + "' appears in overlapping cluster groups");
        }
    }

    // A variable is internal to a group when every incident factor is inside.
    std::map<std::string, std::size_t> internal_to;
    for (const auto& v : g.variables()) {
        if (protected_vars.count(v.id)) continue;
        const auto& inc = g.factors_of(v.id);
        if (inc.empty()) continue;
        auto it = group_of.find(inc.front());
        if (it == group_of.end()) continue;
        bool all = std::all_of(inc.begin(), inc.end(), [&](const std::string& fid) {
            auto jt = group_of.find(fid);
            return jt != group_of.end() && jt->second == it->second;
        });
        if (all) internal_to[v.id] = it->second;
    }

    FactorGraph out;
    for (const auto& v : g.variables())
        if (!internal_to.count(v.id)) out.add_variable(v.id, v.alphabet);

    std::set<std::size_t> emitted;
    for (const auto& f : g.factors()) {
        auto it = group_of.find(f.id);
        if (it == group_of.end()) {
            out.add_factor(f.id, f.payload, f.vars);
            continue;
        }
        if (!emitted.insert(it->second).second) continue;
        const auto& group = partition[it->second];
        ClusterOf payload;
        std::vector<std::string> vars;
        for (const auto& fid : group) {
            const Factor& cf = g.factor(fid);
            payload.constituents.push_back(cf);
            for (const auto& v : cf.vars) {
                if (internal_to.count(v)) continue;
                if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
            }
        }
        for (const auto& [v, gi] : internal_to)
            if (gi == it->second) payload.internal.push_back(v);
        out.add_factor("cluster_" + std::to_string(it->second), std::move(payload), std::move(vars));
    }
    return out;
}

std::vector<std::vector<std::string>> default_clustering(const Network& net, const FactorGraph& g) {
    std::vector<std::vector<std::string>> partition;
    for (const auto& node : net.nodes()) {
        std::vector<std::string> group;
        for (const auto& l : net.links()) {
            if (l.tail != node) continue;
            std::string fid = "phi_" + l.id;
            if (g.has_factor(fid)) group.push_back(fid);
        }
        if (!group.empty()) partition.push_back(std::move(group));
    }
    return partition;
}

std::string export_text(const FactorGraph& g) {
    std::ostringstream os;
    for (const auto& v : g.variables()) os << "var " << v.id << ' ' << v.alphabet.to_string() << '\n';
    for (const auto& f : g.factors()) os << "factor " << f.id << ' ' << payload_kind(f.payload) << '\n';
    for (const auto& f : g.factors())
        for (const auto& v : f.vars) os << "edge " << f.id << ' ' << v << '\n';
    return os.str();
}

} // namespace netcode
