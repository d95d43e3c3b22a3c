#include "netcode/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

namespace netcode {

namespace {
constexpr std::size_t kTableEntryGuard = 1000000;

// Uniform double in [0,1) from the raw engine; avoids the
// implementation-defined std::uniform_real_distribution.
double next_unit(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

std::uint64_t pow_u64(std::uint64_t base, std::uint64_t e) {
    std::uint64_t r = 1;
    while (e--) {
        if (r > UINT64_MAX / base) throw CapacityError("alphabet size overflow");
        r *= base;
    }
    return r;
}
} // namespace

bool has_errors(const std::vector<Diagnostic>& diags) {
    return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.error; });
}

std::string format_diagnostics(const std::vector<Diagnostic>& diags) {
    std::ostringstream os;
    for (const auto& d : diags) os << (d.error ? "error: " : "warning: ") << d.message << '\n';
    return os.str();
}

Network::Network(Field field, std::size_t dim) : field_(std::move(field)), dim_(dim) {
    if (!field_) throw UsageError("network requires a field");
    if (dim_ < 1) throw UsageError("network dim must be >= 1");
}

void Network::add_node(const std::string& id) {
    if (!node_set_.insert(id).second) throw UsageError("duplicate node '" + id + "'");
    nodes_.push_back(id);
}

void Network::add_source(const std::string& id, const std::string& node) {
    if (has_source(id) || has_link(id)) throw UsageError("duplicate id '" + id + "'");
    if (!has_node(node)) throw UsageError("source '" + id + "' at unknown node '" + node + "'");
    source_index_[id] = sources_.size();
    sources_.push_back({id, node});
}

void Network::add_link(const std::string& id, const std::string& tail, const std::string& head) {
    if (has_source(id) || has_link(id)) throw UsageError("duplicate id '" + id + "'");
    if (!has_node(tail)) throw UsageError("link '" + id + "' from unknown node '" + tail + "'");
    if (!has_node(head)) throw UsageError("link '" + id + "' to unknown node '" + head + "'");
    link_index_[id] = links_.size();
    links_.push_back({id, tail, head});
}

void Network::set_coef(const std::string& link, const std::string& input, std::uint32_t repr) {
    coefs_[{link, input}] = repr; // domain checked by validate()
}

void Network::mark_zero(const std::string& link) {
    if (!has_link(link)) throw UsageError("zero mark on unknown link '" + link + "'");
    zero_links_.insert(link);
}

void Network::set_channel(ChannelTable table) {
    if (!has_link(table.link)) throw UsageError("channel on unknown link '" + table.link + "'");
    channels_[table.link] = std::move(table);
}

void Network::add_sink(const std::string& id, std::vector<std::string> observed) {
    if (!has_node(id)) throw UsageError("sink '" + id + "' is not a declared node");
    for (const auto& l : observed)
        if (!has_link(l)) throw UsageError("sink '" + id + "' observes unknown link '" + l + "'");
    sinks_.push_back({id, std::move(observed)});
}

bool Network::has_source(const std::string& id) const { return source_index_.count(id) != 0; }
bool Network::has_link(const std::string& id) const { return link_index_.count(id) != 0; }

const Link& Network::link(const std::string& id) const {
    auto it = link_index_.find(id);
    if (it == link_index_.end()) throw UsageError("unknown link '" + id + "'");
    return links_[it->second];
}

const Sink& Network::sink(const std::string& id) const {
    for (const auto& s : sinks_)
        if (s.id == id) return s;
    throw UsageError("unknown sink '" + id + "'");
}

std::vector<std::string> Network::inc(const std::string& link_id) const {
    const Link& l = link(link_id);
    std::vector<std::string> in;
    for (const auto& e : links_)
        if (e.head == l.tail) in.push_back(e.id);
    for (const auto& s : sources_)
        if (s.node == l.tail) in.push_back(s.id);
    return in;
}

std::uint32_t Network::coef(const std::string& link, const std::string& input) const {
    auto it = coefs_.find({link, input});
    return it == coefs_.end() ? 0 : it->second;
}

std::vector<Diagnostic> Network::validate() const {
    std::vector<Diagnostic> out;

    // Acyclicity via node-graph DFS; report the links of one cycle.
    std::map<std::string, int> color; // 0 white, 1 gray, 2 black
    std::vector<std::pair<std::string, std::string>> stack; // (node, entering link)
    std::vector<std::string> cycle;
    std::function<bool(const std::string&)> dfs = [&](const std::string& node) {
        color[node] = 1;
        for (const auto& l : links_) {
            if (l.tail != node) continue;
            if (color[l.head] == 1) {
                cycle.push_back(l.id);
                for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                    cycle.push_back(it->second);
                    if (it->first == l.head) break;
                }
                std::reverse(cycle.begin(), cycle.end());
                return true;
            }
            if (color[l.head] == 0) {
                stack.push_back({l.head, l.id});
                if (dfs(l.head)) return true;
                stack.pop_back();
            }
        }
        color[node] = 2;
        return false;
    };
    for (const auto& n : nodes_) {
        if (color[n] == 0) {
            stack.clear();
            stack.push_back({n, ""});
            if (dfs(n)) break;
        }
    }
    if (!cycle.empty()) {
        std::string msg = "cycle through links:";
        for (const auto& lid : cycle)
            if (!lid.empty()) msg += " " + lid;
        out.push_back({true, msg});
    }

    // Coefficient domain.
    for (const auto& [key, value] : coefs_) {
        const auto& [l, e] = key;
        if (!has_link(l)) {
            out.push_back({true, "coefficient on unknown link '" + l + "'"});
            continue;
        }
        auto in = inc(l);
        if (std::find(in.begin(), in.end(), e) == in.end())
            out.push_back({true, "coefficient (" + l + ", " + e + "): '" + e + "' is not in inc(" + l + ")"});
        if (value >= field_->q())
            out.push_back({true, "coefficient (" + l + ", " + e + ") out of field range"});
    }

    // Every link needs inputs and either a nonzero coefficient, a zero mark,
    // or a channel table.
    for (const auto& l : links_) {
        auto in = inc(l.id);
        if (in.empty()) {
            out.push_back({true, "link '" + l.id + "' has no inputs (inc is empty)"});
            continue;
        }
        if (channels_.count(l.id)) continue;
        bool nonzero = false;
        for (const auto& e : in)
            if (coef(l.id, e) != 0) nonzero = true;
        if (!nonzero && !zero_links_.count(l.id))
            out.push_back({true, "link '" + l.id + "' has no nonzero coefficient and is not marked zero"});
        if (nonzero && zero_links_.count(l.id))
            out.push_back({true, "link '" + l.id + "' is marked zero but has nonzero coefficients"});
    }

    for (const auto& [id, table] : channels_) {
        auto diags = validate_channel(*this, table);
        out.insert(out.end(), diags.begin(), diags.end());
    }

    // Sink sanity: observed links end at the sink node and trace back to at
    // least one source.
    for (const auto& s : sinks_) {
        for (const auto& lid : s.observed) {
            const Link& l = link(lid);
            if (l.head != s.id)
                out.push_back({true, "sink '" + s.id + "' observes link '" + lid + "' ending at '" + l.head + "'"});
            std::set<std::string> seen;
            std::vector<std::string> frontier{lid};
            bool found = false;
            while (!frontier.empty() && !found) {
                auto cur = frontier.back();
                frontier.pop_back();
                if (!seen.insert(cur).second) continue;
                if (has_source(cur)) {
                    found = true;
                    break;
                }
                if (has_link(cur))
                    for (const auto& e : inc(cur)) frontier.push_back(e);
            }
            if (!found)
                out.push_back({false, "observed link '" + lid + "' is not connected to any source"});
        }
    }
    return out;
}

std::vector<std::string> Network::topo_links() const {
    std::vector<std::string> order;
    std::set<std::string> placed;
    bool progress = true;
    while (order.size() < links_.size() && progress) {
        progress = false;
        for (const auto& l : links_) {
            if (placed.count(l.id)) continue;
            bool ready = true;
            for (const auto& e : inc(l.id))
                if (has_link(e) && !placed.count(e)) ready = false;
            if (ready) {
                order.push_back(l.id);
                placed.insert(l.id);
                progress = true;
            }
        }
    }
    if (order.size() < links_.size()) throw UsageError("network contains a cycle; no topological order");
    return order;
}

SymbolAssignment Network::encode(const std::map<std::string, FVector>& src) const {
    SymbolAssignment sym;
    for (const auto& s : sources_) {
        auto it = src.find(s.id);
        if (it == src.end()) throw UsageError("missing value for source '" + s.id + "'");
        if (it->second.size() != dim_) throw UsageError("source '" + s.id + "' value has wrong dimension");
        sym.emplace(s.id, it->second);
    }
    for (const auto& lid : topo_links()) {
        FVector y = FVector::zeros(field_, dim_);
        for (const auto& e : inc(lid)) {
            auto c = coef(lid, e);
            if (c == 0) continue;
            auto it = sym.find(e);
            if (it == sym.end()) throw std::logic_error("topological order read unassigned symbol");
            y.axpy(c, it->second);
        }
        sym.emplace(lid, std::move(y));
    }
    return sym;
}

SymbolAssignment Network::encode_stochastic(const std::map<std::string, FVector>& src,
                                            const std::map<std::string, ChannelTable>& channels,
                                            std::uint64_t seed) const {
    for (const auto& [id, table] : channels) {
        auto diags = validate_channel(*this, table);
        if (has_errors(diags))
            throw UsageError("channel for link '" + id + "': " + format_diagnostics(diags));
    }
    std::mt19937_64 rng(seed);
    SymbolAssignment sym;
    for (const auto& s : sources_) {
        auto it = src.find(s.id);
        if (it == src.end()) throw UsageError("missing value for source '" + s.id + "'");
        sym.emplace(s.id, it->second);
    }
    const std::uint64_t alpha = pow_u64(field_->q(), dim_);
    for (const auto& lid : topo_links()) {
        auto ch = channels.find(lid);
        if (ch == channels.end()) {
            FVector y = FVector::zeros(field_, dim_);
            for (const auto& e : inc(lid)) {
                auto c = coef(lid, e);
                if (c == 0) continue;
                y.axpy(c, sym.at(e));
            }
            sym.emplace(lid, std::move(y));
            continue;
        }
        std::uint64_t row_idx = 0, mult = 1;
        for (const auto& e : inc(lid)) {
            row_idx += vec_index(sym.at(e)) * mult;
            mult *= alpha;
        }
        const auto& row = ch->second.rows.at(row_idx);
        double u = next_unit(rng);
        std::uint64_t pick = alpha - 1;
        double acc = 0;
        for (std::uint64_t v = 0; v < alpha; ++v) {
            acc += row[v];
            if (u < acc) {
                pick = v;
                break;
            }
        }
        sym.emplace(lid, vec_from_index(field_, dim_, pick));
    }
    return sym;
}

FMatrix Network::global_transfer_matrix(const std::vector<std::string>& obs_links) const {
    if (is_stochastic())
        throw UsageError("transfer matrix is unsupported for stochastic codes");
    const std::size_t K = sources_.size();
    std::map<std::string, FVector> vec; // id -> coefficient row over sources
    for (std::size_t i = 0; i < K; ++i) {
        FVector e = FVector::zeros(field_, K);
        e[i] = 1;
        vec.emplace(sources_[i].id, std::move(e));
    }
    for (const auto& lid : topo_links()) {
        FVector v = FVector::zeros(field_, K);
        for (const auto& e : inc(lid)) {
            auto c = coef(lid, e);
            if (c == 0) continue;
            v.axpy(c, vec.at(e));
        }
        vec.emplace(lid, std::move(v));
    }
    FMatrix A(field_, obs_links.size(), K);
    for (std::size_t r = 0; r < obs_links.size(); ++r) {
        auto it = vec.find(obs_links[r]);
        if (it == vec.end()) throw UsageError("unknown observed link '" + obs_links[r] + "'");
        A.set_row(r, it->second);
    }
    return A;
}

Observation Network::make_observation(const std::string& sink_id, const SymbolAssignment& symbols) const {
    const Sink& s = sink(sink_id);
    Observation obs;
    obs.sink = s.id;
    for (const auto& lid : s.observed) obs.values.emplace_back(lid, symbols.at(lid));
    return obs;
}

Network random_code(const Network& topology, Field field, std::uint64_t seed) {
    Network net(field, topology.dim());
    for (const auto& n : topology.nodes()) net.add_node(n);
    for (const auto& s : topology.sources()) net.add_source(s.id, s.node);
    for (const auto& l : topology.links()) net.add_link(l.id, l.tail, l.head);
    std::mt19937_64 rng(seed);
    for (const auto& l : topology.links())
        for (const auto& e : topology.inc(l.id))
            net.set_coef(l.id, e, 1 + static_cast<std::uint32_t>(rng() % (field->q() - 1)));
    for (const auto& s : topology.sinks()) net.add_sink(s.id, s.observed);
    return net;
}

Network make_chain_network(std::size_t K, Field field) {
    if (K < 2) throw UsageError("chain network needs K >= 2");
    Network net(field, 1);
    auto stage = [](std::size_t i) { return "M" + std::to_string(i); };
    for (std::size_t i = 1; i <= K - 1; ++i) net.add_node(stage(i));
    net.add_node("t");
    // Two sources feed the head of the chain, one more joins at each later
    // relay node.
    net.add_source("s1", "M1");
    net.add_source("s2", "M1");
    for (std::size_t i = 3; i <= K; ++i) net.add_source("s" + std::to_string(i), stage(i - 1));

    for (std::size_t i = 1; i + 1 <= K - 1; ++i) {
        net.add_link("d" + std::to_string(i), stage(i), "t");
        net.add_link("c" + std::to_string(i), stage(i), stage(i + 1));
    }
    net.add_link("d" + std::to_string(K - 1), stage(K - 1), "t");
    net.add_link("d" + std::to_string(K), stage(K - 1), "t");
    for (const auto& l : net.links())
        for (const auto& e : net.inc(l.id)) net.set_coef(l.id, e, 1);
    std::vector<std::string> observed;
    for (std::size_t i = 1; i <= K; ++i) observed.push_back("d" + std::to_string(i));
    net.add_sink("t", observed);
    return net;
}

Network make_butterfly_network(Field field) {
    Network net(field, 1);
    for (const char* n : {"a", "b", "c", "e", "d", "t1", "t2"}) net.add_node(n);
    net.add_source("s1", "a");
    net.add_source("s2", "b");
    net.add_link("l1", "a", "c");
    net.add_link("l2", "b", "c");
    net.add_link("l3", "c", "e");
    net.add_link("l4", "b", "t2");
    net.add_link("l5", "a", "t1");
    net.add_link("l6", "e", "d");
    net.add_link("l7", "d", "t2");
    net.add_link("l8", "d", "t1");
    for (const auto& l : net.links())
        for (const auto& e : net.inc(l.id)) net.set_coef(l.id, e, 1);
    net.add_sink("t1", {"l5", "l8"});
    net.add_sink("t2", {"l4", "l7"});
    return net;
}

namespace {
ChannelTable make_channel(const Network& net, const std::string& link, double eps) {
    const Field& f = net.field();
    const std::size_t n = net.dim();
    const std::uint64_t alpha = pow_u64(f->q(), n);
    auto in = net.inc(link);
    std::uint64_t rows = 1;
    for (std::size_t i = 0; i < in.size(); ++i) {
        rows *= alpha;
        if (rows * alpha > kTableEntryGuard)
            throw CapacityError("channel table for '" + link + "' exceeds the entry guard");
    }
    ChannelTable t;
    t.link = link;
    t.rows.resize(rows);
    const double off = eps > 0 ? eps / double(alpha - 1) : 0.0;
    for (std::uint64_t r = 0; r < rows; ++r) {
        FVector combo = FVector::zeros(f, n);
        std::uint64_t idx = r;
        for (const auto& e : in) {
            auto y = vec_from_index(f, n, idx % alpha);
            idx /= alpha;
            combo.axpy(net.coef(link, e), y);
        }
        auto& row = t.rows[r];
        row.assign(alpha, off);
        row[vec_index(combo)] = 1.0 - eps;
    }
    return t;
}
} // namespace

ChannelTable degenerate_channel(const Network& net, const std::string& link) {
    return make_channel(net, link, 0.0);
}

ChannelTable symmetric_channel(const Network& net, const std::string& link, double eps) {
    if (eps < 0 || eps > 1) throw UsageError("channel eps must be in [0,1]");
    return make_channel(net, link, eps);
}

std::vector<Diagnostic> validate_channel(const Network& net, const ChannelTable& table) {
    std::vector<Diagnostic> out;
    if (!net.has_link(table.link)) {
        out.push_back({true, "channel on unknown link '" + table.link + "'"});
        return out;
    }
    const std::uint64_t alpha = pow_u64(net.field()->q(), net.dim());
    std::uint64_t rows = 1;
    for (std::size_t i = 0; i < net.inc(table.link).size(); ++i) rows *= alpha;
    if (rows * alpha > kTableEntryGuard) {
        out.push_back({true, "channel table for '" + table.link + "' exceeds the entry guard"});
        return out;
    }
    if (table.rows.size() != rows) {
        out.push_back({true, "channel table for '" + table.link + "' has " + std::to_string(table.rows.size()) +
                                 " rows, expected " + std::to_string(rows)});
        return out;
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        if (table.rows[r].size() != alpha) {
            out.push_back({true, "channel row " + std::to_string(r) + " has wrong width"});
            continue;
        }
        double sum = 0;
        bool nonneg = true;
        for (double v : table.rows[r]) {
            sum += v;
            if (v < 0) nonneg = false;
        }
        if (!nonneg) out.push_back({true, "channel row " + std::to_string(r) + " has negative entries"});
        if (std::abs(sum - 1.0) > 1e-9)
            out.push_back({true, "channel row " + std::to_string(r) + " sums to " + std::to_string(sum)});
    }
    return out;
}

} // namespace netcode
