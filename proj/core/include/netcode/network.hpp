#pragma once

#include <map>
#include <set>

#include "netcode/linalg.hpp"

namespace netcode {

struct Source {
    std::string id;
    std::string node; // a(s)
};

struct Link {
    std::string id;
    std::string tail;
    std::string head;
};

struct Sink {
    std::string id;
    std::vector<std::string> observed; // link ids, head must equal the sink node
};

// Conditional distribution C_l(y_l | y_inc(l)). Rows are indexed by the
// mixed-radix index of the input tuple (inc(l) order, first input least
// significant); each row is a dense distribution over the q^n output symbols.
struct ChannelTable {
    std::string link;
    std::vector<std::vector<double>> rows;
};

struct Diagnostic {
    bool error = true; // false = warning
    std::string message;
};

bool has_errors(const std::vector<Diagnostic>& diags);
std::string format_diagnostics(const std::vector<Diagnostic>& diags);

using SymbolAssignment = std::map<std::string, FVector>;

struct Observation {
    std::string sink;
    std::vector<std::pair<std::string, FVector>> values; // (link id, y*)
};

// Directed acyclic network with scalar local encoding coefficients acting on
// F^n symbols: y_l = sum_{e in inc(l)} c_{l,e} y_e.
class Network {
public:
    Network() = default;
    Network(Field field, std::size_t dim);

    void add_node(const std::string& id);
    void add_source(const std::string& id, const std::string& node);
    void add_link(const std::string& id, const std::string& tail, const std::string& head);
    void set_coef(const std::string& link, const std::string& input, std::uint32_t repr);
    void mark_zero(const std::string& link); // explicitly constant-zero link
    void set_channel(ChannelTable table);
    void add_sink(const std::string& id, std::vector<std::string> observed);

    const Field& field() const { return field_; }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& nodes() const { return nodes_; }
    const std::vector<Source>& sources() const { return sources_; }
    const std::vector<Link>& links() const { return links_; }
    const std::vector<Sink>& sinks() const { return sinks_; }
    const std::map<std::string, ChannelTable>& channels() const { return channels_; }
    bool is_zero_link(const std::string& link) const { return zero_links_.count(link) != 0; }

    bool has_node(const std::string& id) const { return node_set_.count(id) != 0; }
    bool has_source(const std::string& id) const;
    bool has_link(const std::string& id) const;
    const Link& link(const std::string& id) const;
    const Sink& sink(const std::string& id) const;

    // Inputs of link l: links e with head(e) = tail(l) in declaration order,
    // then sources s with a(s) = tail(l) in declaration order.
    std::vector<std::string> inc(const std::string& link) const;
    std::uint32_t coef(const std::string& link, const std::string& input) const; // 0 when absent
    bool is_stochastic() const { return !channels_.empty(); }

    std::vector<Diagnostic> validate() const;

    // Link ids in a topological order (declaration order among ready links).
    std::vector<std::string> topo_links() const;

    SymbolAssignment encode(const std::map<std::string, FVector>& src) const;
    SymbolAssignment encode_stochastic(const std::map<std::string, FVector>& src,
                                       const std::map<std::string, ChannelTable>& channels,
                                       std::uint64_t seed) const;
    SymbolAssignment encode_stochastic(const std::map<std::string, FVector>& src, std::uint64_t seed) const {
        return encode_stochastic(src, channels_, seed);
    }

    // Rows indexed by obs_links (given order), columns by sources
    // (declaration order): observed = A * source.
    FMatrix global_transfer_matrix(const std::vector<std::string>& obs_links) const;

    Observation make_observation(const std::string& sink_id, const SymbolAssignment& symbols) const;

private:
    Field field_;
    std::size_t dim_ = 1;
    std::vector<std::string> nodes_;
    std::set<std::string> node_set_;
    std::vector<Source> sources_;
    std::vector<Link> links_;
    std::map<std::string, std::size_t> link_index_;
    std::map<std::string, std::size_t> source_index_;
    std::map<std::pair<std::string, std::string>, std::uint32_t> coefs_;
    std::set<std::string> zero_links_;
    std::map<std::string, ChannelTable> channels_;
    std::vector<Sink> sinks_;
};

// Same topology (nodes, sources, links, sinks), fresh uniformly random
// nonzero coefficient for every (l, e in inc(l)); channels dropped.
Network random_code(const Network& topology, Field field, std::uint64_t seed);

// Chain topology: K sources fed into a chain of relay nodes M_1..M_{K-1},
// each with one link down to the terminal and one link along the chain; the
// terminal observes all K downlinks. 2K-2 links total.
Network make_chain_network(std::size_t K, Field field);

// The classic two-source butterfly with sinks t1 (observes l5, l8) and
// t2 (observes l4, l7); all coefficients 1.
Network make_butterfly_network(Field field);

// Point mass on the deterministic linear combination of link `link`.
ChannelTable degenerate_channel(const Network& net, const std::string& link);
// With probability 1-eps the linear combination, else uniform over the
// remaining q^n - 1 symbols (q=2, n=1: flip probability eps).
ChannelTable symmetric_channel(const Network& net, const std::string& link, double eps);

// Row count/width, row sums within 1e-9 of 1, total entry guard (<= 1e6).
std::vector<Diagnostic> validate_channel(const Network& net, const ChannelTable& table);

} // namespace netcode
