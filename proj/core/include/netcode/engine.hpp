#pragma once

#include "netcode/counters.hpp"
#include "netcode/factor_graph.hpp"

namespace netcode {

struct Schedule {
    enum class Mode { TwoPassTree, Flooding };
    Mode mode = Mode::TwoPassTree;
    std::size_t max_iterations = 100;
    double tolerance = 1e-12; // table-message fixpoint; support messages compare exactly
};

struct RunReport {
    std::size_t iterations = 0;
    bool converged = false;
    double max_residual = 0.0;
    bool contradiction = false;
};

// Directed edge of the bipartite graph. to_var == true: factor -> variable.
struct EdgeKey {
    std::string factor;
    std::string var;
    bool to_var;
    friend bool operator<(const EdgeKey& a, const EdgeKey& b) {
        return std::tie(a.factor, a.var, a.to_var) < std::tie(b.factor, b.var, b.to_var);
    }
};

// Generic two-pass / flooding message passing. The Policy supplies the
// message semiring:
//   using Message = ...;
//   Message initial(const Variable&);
//   Message var_update(const Variable&, const std::vector<const Message*>& incoming);
//   Message factor_update(const Factor&, const Variable& out,
//                         const std::vector<std::pair<const Variable*, const Message*>>& incoming);
//   double residual(const Message& before, const Message& after);
//   bool is_contradiction(const Message&);
//   void on_update(const EdgeKey&, const Message& before, const Message& after);  // monotonicity hooks
template <class Policy>
class Engine {
public:
    using Message = typename Policy::Message;
    using MessageMap = std::map<EdgeKey, Message>;

    Engine(const FactorGraph& g, Policy policy) : g_(g), policy_(std::move(policy)) {
        for (const auto& f : g_.factors())
            for (const auto& v : f.vars) {
                edges_.push_back({f.id, v, true});
                edges_.push_back({f.id, v, false});
            }
    }

    const FactorGraph& graph() const { return g_; }
    Policy& policy() { return policy_; }
    const std::vector<EdgeKey>& edges() const { return edges_; }

    MessageMap initial_messages() const {
        MessageMap m;
        for (const auto& e : edges_) m.emplace(e, policy_.initial(g_.variable(e.var)));
        return m;
    }

    Message compute(const EdgeKey& e, const MessageMap& prev) const {
        counters::count_message();
        if (e.to_var) {
            const Factor& f = g_.factor(e.factor);
            const Variable& out = g_.variable(e.var);
            std::vector<std::pair<const Variable*, const Message*>> incoming;
            for (const auto& v : f.vars) {
                if (v == e.var) continue;
                incoming.emplace_back(&g_.variable(v), &prev.at({f.id, v, false}));
            }
            return policy_.factor_update(f, out, incoming);
        }
        const Variable& var = g_.variable(e.var);
        std::vector<const Message*> incoming;
        for (const auto& fid : g_.factors_of(e.var)) {
            if (fid == e.factor) continue;
            incoming.push_back(&prev.at({fid, e.var, true}));
        }
        return policy_.var_update(var, incoming);
    }

    // One Jacobi round: every directed edge from the previous round's
    // messages. Returns the max residual. `order` may shuffle edge
    // processing; the result must not depend on it.
    double flood_step(const MessageMap& prev, MessageMap& next, const std::vector<EdgeKey>& order) const {
        double max_res = 0.0;
        for (const auto& e : order) {
            Message m = compute(e, prev);
            const Message& before = prev.at(e);
            max_res = std::max(max_res, policy_.residual(before, m));
            policy_.on_update(e, before, m);
            next.insert_or_assign(e, std::move(m));
        }
        return max_res;
    }

    std::pair<MessageMap, RunReport> run(const Schedule& schedule) {
        if (schedule.mode == Schedule::Mode::TwoPassTree) return run_two_pass();
        return run_flooding(schedule);
    }

    // Beliefs: per-variable combination of all incoming factor messages.
    std::map<std::string, Message> beliefs(const MessageMap& msgs) const {
        std::map<std::string, Message> out;
        for (const auto& v : g_.variables()) {
            std::vector<const Message*> incoming;
            for (const auto& fid : g_.factors_of(v.id)) incoming.push_back(&msgs.at({fid, v.id, true}));
            out.emplace(v.id, policy_.var_update(v, incoming));
        }
        return out;
    }

private:
    std::pair<MessageMap, RunReport> run_two_pass() {
        MessageMap msgs = initial_messages();
        RunReport report;

        // Root every component at its first variable; order vertices by BFS
        // depth. Vertex keys: "v:<id>" / "f:<id>".
        std::map<std::string, std::string> parent;
        std::map<std::string, std::size_t> depth;
        std::vector<std::string> bfs;
        auto neighbors = [&](const std::string& key) {
            std::vector<std::string> out;
            if (key[0] == 'v')
                for (const auto& fid : g_.factors_of(key.substr(2))) out.push_back("f:" + fid);
            else
                for (const auto& vid : g_.factor(key.substr(2)).vars) out.push_back("v:" + vid);
            return out;
        };
        for (const auto& root : g_.variables()) {
            std::string rk = "v:" + root.id;
            if (depth.count(rk)) continue;
            depth[rk] = 0;
            parent[rk] = "";
            std::size_t head = bfs.size();
            bfs.push_back(rk);
            while (head < bfs.size()) {
                std::string u = bfs[head++];
                for (const auto& w : neighbors(u)) {
                    if (depth.count(w)) {
                        if (w != parent[u]) throw UsageError("two-pass schedule requires a tree");
                        continue;
                    }
                    depth[w] = depth[u] + 1;
                    parent[w] = u;
                    bfs.push_back(w);
                }
            }
        }

        auto edge_between = [&](const std::string& child, const std::string& par, bool upward) {
            // Message flows child->parent on the upward pass.
            const std::string& from = upward ? child : par;
            const std::string& to = upward ? par : child;
            bool to_var = to[0] == 'v';
            const std::string& fid = to_var ? from : to;
            const std::string& vid = to_var ? to : from;
            return EdgeKey{fid.substr(2), vid.substr(2), to_var};
        };

        std::set<EdgeKey> computed;
        // Upward: deepest first.
        std::vector<std::string> order = bfs;
        std::stable_sort(order.begin(), order.end(),
                         [&](const std::string& a, const std::string& b) { return depth[a] > depth[b]; });
        for (const auto& u : order) {
            if (parent[u].empty()) continue;
            EdgeKey e = edge_between(u, parent[u], true);
            if (!computed.insert(e).second) throw std::logic_error("two-pass computed an edge twice");
            msgs.insert_or_assign(e, compute(e, msgs));
        }
        // Downward: shallowest first.
        for (const auto& u : bfs) {
            if (parent[u].empty()) continue;
            EdgeKey e = edge_between(u, parent[u], false);
            if (!computed.insert(e).second) throw std::logic_error("two-pass computed an edge twice");
            msgs.insert_or_assign(e, compute(e, msgs));
        }
        if (computed.size() != edges_.size()) throw std::logic_error("two-pass missed an edge");

        report.iterations = 2;
        report.converged = true;
        counters::count_iteration(2);
        for (const auto& [e, m] : msgs) report.contradiction |= policy_.is_contradiction(m);
        return {std::move(msgs), report};
    }

    std::pair<MessageMap, RunReport> run_flooding(const Schedule& schedule) {
        MessageMap msgs = initial_messages();
        RunReport report;
        for (std::size_t it = 0; it < schedule.max_iterations; ++it) {
            counters::count_iteration();
            MessageMap next = msgs;
            double res = flood_step(msgs, next, edges_);
            msgs = std::move(next);
            ++report.iterations;
            report.max_residual = res;
            if (res <= schedule.tolerance) {
                report.converged = true;
                break;
            }
        }
        for (const auto& [e, m] : msgs) report.contradiction |= policy_.is_contradiction(m);
        return {std::move(msgs), report};
    }

    const FactorGraph& g_;
    Policy policy_;
    std::vector<EdgeKey> edges_;
};

} // namespace netcode
