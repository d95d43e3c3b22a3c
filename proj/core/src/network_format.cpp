#include "netcode/network_format.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace netcode {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::string clean = line.substr(0, line.find('#'));
    std::istringstream is(clean);
    std::vector<std::string> toks;
    std::string t;
    while (is >> t) toks.push_back(t);
    return toks;
}

std::uint64_t parse_uint(const std::string& tok, std::size_t line) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw ParseError(line, "expected an integer, got '" + tok + "'");
    return v;
}

double parse_double(const std::string& tok, std::size_t line) {
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected a number, got '" + tok + "'");
    }
}

struct ChannelRequest {
    std::string link;
    double eps;
    std::size_t line;
};

} // namespace

Network parse_network(std::istream& in) {
    std::optional<Network> net;
    Field field;
    std::optional<std::size_t> dim;
    std::vector<ChannelRequest> channel_requests;

    // Section ranks; directives must appear in non-decreasing rank order.
    auto rank_of = [](const std::string& d) -> int {
        if (d == "field") return 0;
        if (d == "dim") return 1;
        if (d == "node") return 2;
        if (d == "source") return 3;
        if (d == "link") return 4;
        if (d == "coef" || d == "zero" || d == "channel") return 5;
        if (d == "sink") return 6;
        return -1;
    };

    int current_rank = 0;
    std::size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& d = toks[0];
        int rank = rank_of(d);
        if (rank < 0) throw ParseError(lineno, "unknown directive '" + d + "'");
        if (rank < current_rank)
            throw ParseError(lineno, "directive '" + d + "' out of order (sections: field, dim, node, source, link, coef, sink)");
        current_rank = rank;

        try {
            if (d == "field") {
                if (field) throw ParseError(lineno, "duplicate field directive");
                if (toks.size() != 2) throw ParseError(lineno, "usage: field GF(...)");
                field = FieldSpec::parse(toks[1]);
            } else if (d == "dim") {
                if (dim) throw ParseError(lineno, "duplicate dim directive");
                if (toks.size() != 2) throw ParseError(lineno, "usage: dim <n>");
                dim = parse_uint(toks[1], lineno);
                if (*dim < 1) throw ParseError(lineno, "dim must be >= 1");
            } else {
                if (!field || !dim)
                    throw ParseError(lineno, "field and dim must come before '" + d + "'");
                if (!net) net.emplace(field, *dim);

                if (d == "node") {
                    if (toks.size() < 2) throw ParseError(lineno, "usage: node <id>...");
                    for (std::size_t i = 1; i < toks.size(); ++i) net->add_node(toks[i]);
                } else if (d == "source") {
                    if (toks.size() != 4 || toks[2] != "@")
                        throw ParseError(lineno, "usage: source <id> @ <node>");
                    net->add_source(toks[1], toks[3]);
                } else if (d == "link") {
                    if (toks.size() != 4) throw ParseError(lineno, "usage: link <id> <tail> <head>");
                    net->add_link(toks[1], toks[2], toks[3]);
                } else if (d == "coef") {
                    if (toks.size() != 4) throw ParseError(lineno, "usage: coef <link> <input> <value>");
                    auto v = parse_uint(toks[3], lineno);
                    if (v >= field->q()) throw ParseError(lineno, "coefficient out of field range");
                    if (!net->has_link(toks[1]))
                        throw ParseError(lineno, "coef on unknown link '" + toks[1] + "'");
                    if (!net->has_link(toks[2]) && !net->has_source(toks[2]))
                        throw ParseError(lineno, "coef references unknown input '" + toks[2] + "'");
                    net->set_coef(toks[1], toks[2], static_cast<std::uint32_t>(v));
                } else if (d == "zero") {
                    if (toks.size() != 2) throw ParseError(lineno, "usage: zero <link>");
                    net->mark_zero(toks[1]);
                } else if (d == "channel") {
                    if (toks.size() != 4 || toks[2] != "symmetric")
                        throw ParseError(lineno, "usage: channel <link> symmetric <eps>");
                    if (!net->has_link(toks[1]))
                        throw ParseError(lineno, "channel on unknown link '" + toks[1] + "'");
                    channel_requests.push_back({toks[1], parse_double(toks[3], lineno), lineno});
                } else { // sink
                    if (toks.size() < 4 || toks[2] != "observes")
                        throw ParseError(lineno, "usage: sink <node> observes <link>...");
                    net->add_sink(toks[1], {toks.begin() + 3, toks.end()});
                }
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!net) {
        if (!field || !dim) throw ParseError(lineno, "file ends before field/dim");
        net.emplace(field, *dim);
    }
    // Channel tables need the final coefficients, so they materialize last.
    for (const auto& req : channel_requests) {
        try {
            net->set_channel(symmetric_channel(*net, req.link, req.eps));
        } catch (const std::exception& e) {
            throw ParseError(req.line, e.what());
        }
    }
    return std::move(*net);
}

Network parse_network_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open network file '" + path + "'");
    return parse_network(in);
}

namespace {
std::pair<std::string, FVector> parse_binding(const std::vector<std::string>& toks, std::size_t lineno,
                                              const Network& net) {
    if (toks.size() != 4 || toks[2] != "=")
        throw ParseError(lineno, "usage: " + toks[0] + " <id> = <vector>");
    FVector v;
    try {
        v = FVector::parse(net.field(), toks[3]);
    } catch (const std::exception& e) {
        throw ParseError(lineno, e.what());
    }
    if (v.size() != net.dim())
        throw ParseError(lineno, "value has " + std::to_string(v.size()) + " entries, dim is " +
                                     std::to_string(net.dim()));
    return {toks[1], std::move(v)};
}
} // namespace

Observation parse_observations(std::istream& in, const Network& net) {
    Observation obs;
    std::size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] != "obs") throw ParseError(lineno, "unknown directive '" + toks[0] + "'");
        auto [id, v] = parse_binding(toks, lineno, net);
        if (!net.has_link(id)) throw ParseError(lineno, "observation on unknown link '" + id + "'");
        const std::string& head = net.link(id).head;
        if (obs.sink.empty())
            obs.sink = head;
        else if (obs.sink != head)
            throw ParseError(lineno, "observed links end at different nodes ('" + obs.sink + "' vs '" + head + "')");
        obs.values.emplace_back(id, std::move(v));
    }
    return obs;
}

Observation parse_observations_file(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open observation file '" + path + "'");
    return parse_observations(in, net);
}

std::map<std::string, FVector> parse_sources(std::istream& in, const Network& net) {
    std::map<std::string, FVector> out;
    std::size_t lineno = 0;
    std::string line;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks[0] != "src") throw ParseError(lineno, "unknown directive '" + toks[0] + "'");
        auto [id, v] = parse_binding(toks, lineno, net);
        if (!net.has_source(id)) throw ParseError(lineno, "value for unknown source '" + id + "'");
        if (!out.emplace(id, std::move(v)).second)
            throw ParseError(lineno, "duplicate value for source '" + id + "'");
    }
    return out;
}

std::map<std::string, FVector> parse_sources_file(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open source file '" + path + "'");
    return parse_sources(in, net);
}

} // namespace netcode
