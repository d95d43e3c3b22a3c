#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "netcode/decode.hpp"
#include "netcode/network_format.hpp"

namespace nc = netcode;

namespace {

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(csv);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

// All subcommands write their report to --out or stdout.
class Output {
  public:
    void open(const std::string& path) {
        if (path.empty()) return;
        file_.open(path);
        if (!file_) throw nc::UsageError("cannot open output file: " + path);
    }
    std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

  private:
    std::ofstream file_;
};

std::vector<std::vector<std::string>> parse_partition_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw nc::UsageError("cannot open cluster file: " + path);
    std::vector<std::vector<std::string>> partition;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> group;
        std::string id;
        while (ls >> id) group.push_back(id);
        if (!group.empty()) partition.push_back(std::move(group));
    }
    return partition;
}

struct Config {
    std::string net_path;
    std::string obs_path;
    std::string out_path;
    std::string targets_csv;
    std::string cluster = "auto";
    std::string stage = "raw";
    std::string field = "GF(16)";
    std::string src_path;
    std::vector<std::string> assignments; // encode: id=vector
    std::string k_csv = "4,8,16,32";
    std::uint64_t seed = 0;
    bool no_prune = false;
    bool no_simplify = false;
    bool baseline = false;
    bool oracle = false;
};

nc::DecodeOptions decode_options(const Config& cfg) {
    nc::DecodeOptions opts;
    opts.prune = !cfg.no_prune;
    opts.simplify = !cfg.no_simplify;
    if (cfg.cluster == "auto") {
        opts.cluster = nc::DecodeOptions::ClusterMode::Auto;
    } else if (cfg.cluster == "off") {
        opts.cluster = nc::DecodeOptions::ClusterMode::Off;
    } else {
        opts.cluster = nc::DecodeOptions::ClusterMode::Explicit;
        opts.partition = parse_partition_file(cfg.cluster);
    }
    return opts;
}

int cmd_validate(const Config& cfg, std::ostream& os) {
    nc::Network net = nc::parse_network_file(cfg.net_path);
    auto diags = net.validate();
    if (!diags.empty()) os << nc::format_diagnostics(diags);
    if (nc::has_errors(diags)) return 1;
    os << "ok\n";
    return 0;
}

int cmd_encode(const Config& cfg, std::ostream& os) {
    nc::Network net = nc::parse_network_file(cfg.net_path);
    std::map<std::string, nc::FVector> src;
    if (!cfg.src_path.empty()) src = nc::parse_sources_file(cfg.src_path, net);
    for (const auto& a : cfg.assignments) {
        auto eq = a.find('=');
        if (eq == std::string::npos) throw nc::UsageError("source assignment must look like s1=1,0: " + a);
        const std::string id = a.substr(0, eq);
        if (!net.has_source(id)) throw nc::UsageError("unknown source: " + id);
        src.insert_or_assign(id, nc::FVector::parse(net.field(), a.substr(eq + 1)));
    }
    nc::SymbolAssignment symbols =
        net.is_stochastic() ? net.encode_stochastic(src, cfg.seed) : net.encode(src);
    for (const auto& l : net.links()) os << "link=" << l.id << " value=" << symbols.at(l.id).to_string() << "\n";
    return 0;
}

const char* status_name(nc::TargetDecode::Status s) {
    switch (s) {
        case nc::TargetDecode::Status::Decoded: return "decoded";
        case nc::TargetDecode::Status::Ambiguous: return "ambiguous";
        default: return "contradiction";
    }
}

void print_targets(const nc::DecodeResult& res, std::ostream& os) {
    for (const auto& [id, d] : res.targets) {
        os << "target=" << id << " status=" << status_name(d.status) << " value=";
        if (d.status == nc::TargetDecode::Status::Decoded)
            os << d.value.to_string();
        else if (d.status == nc::TargetDecode::Status::Ambiguous)
            os << d.ambiguity.rep().to_string();
        else
            os << "-";
        os << " ambiguity_dim=" << d.ambiguity_dim << "\n";
    }
}

// One solution-set description per target, comparable across decoders.
bool targets_agree(const nc::DecodeResult& a, const nc::DecodeResult& b) {
    if (a.targets.size() != b.targets.size()) return false;
    for (const auto& [id, da] : a.targets) {
        auto it = b.targets.find(id);
        if (it == b.targets.end()) return false;
        const nc::TargetDecode& db = it->second;
        if (da.status != db.status) return false;
        if (da.status == nc::TargetDecode::Status::Decoded && da.value != db.value) return false;
        if (da.status == nc::TargetDecode::Status::Ambiguous && da.ambiguity != db.ambiguity) return false;
    }
    return true;
}

int cmd_decode(const Config& cfg, std::ostream& os) {
    nc::Network net = nc::parse_network_file(cfg.net_path);
    if (cfg.obs_path.empty()) throw nc::UsageError("decode requires --obs");
    nc::Observation obs = nc::parse_observations_file(cfg.obs_path, net);
    std::vector<std::string> targets = split_list(cfg.targets_csv);

    nc::DecodeResult res = nc::decode_mp(net, obs, targets, decode_options(cfg));
    for (const auto& line : res.transform_log) os << "# " << line << "\n";
    if (res.superset_possible) os << "# warning: residual cycles; reported supports may be supersets\n";
    if (res.over_approximated) os << "# warning: mixed-representation over-approximation applied\n";
    print_targets(res, os);
    os << "messages=" << res.counters.messages << " iterations=" << res.counters.iterations
       << " mul=" << res.counters.mul << " add=" << res.counters.add << "\n";

    int rc = res.contradiction ? 1 : 0;
    if (cfg.baseline) {
        nc::DecodeResult ge = nc::decode_gaussian(net, obs, targets);
        os << "baseline_mul=" << ge.counters.mul << " baseline_add=" << ge.counters.add << "\n";
        const bool agree = targets_agree(res, ge);
        os << "baseline=" << (agree ? "agree" : "disagree") << "\n";
        if (!agree) rc = 1;
    }
    if (cfg.oracle) {
        auto oracle = nc::oracle_marginal_support(net, obs, targets);
        // Sound means every oracle value lies in the reported support; exact
        // means the counts also match.
        bool sound = true, exact = true;
        for (const auto& [id, vals] : oracle) {
            const nc::TargetDecode& d = res.targets.at(id);
            std::uint64_t reported;
            if (d.status == nc::TargetDecode::Status::Contradiction) {
                reported = 0;
            } else if (d.status == nc::TargetDecode::Status::Decoded) {
                reported = 1;
                sound = sound && vals.size() == 1 && vals.front() == d.value;
            } else {
                reported = d.ambiguity.count();
                for (const auto& v : vals) sound = sound && d.ambiguity.contains(v);
            }
            exact = exact && reported == vals.size();
        }
        os << "oracle=" << (!sound ? "disagree" : exact ? "agree" : "superset") << "\n";
        if (!sound) rc = 1;
    }
    return rc;
}

int cmd_graph(const Config& cfg, std::ostream& os) {
    nc::Network net = nc::parse_network_file(cfg.net_path);
    nc::Observation obs;
    if (!cfg.obs_path.empty()) obs = nc::parse_observations_file(cfg.obs_path, net);

    const std::vector<std::string> stages = {"raw", "simplified", "pruned", "clustered"};
    auto pos = std::find(stages.begin(), stages.end(), cfg.stage);
    if (pos == stages.end()) throw nc::UsageError("unknown stage: " + cfg.stage + " (raw|simplified|pruned|clustered)");
    const int stage = static_cast<int>(pos - stages.begin());

    std::vector<std::string> targets = split_list(cfg.targets_csv);
    if (targets.empty())
        for (const auto& s : net.sources()) targets.push_back(s.id);

    nc::FactorGraph g = nc::build_ncfg(net, obs);
    if (stage >= 1 && !cfg.no_simplify) g = nc::simplify(g);
    if (stage >= 2 && !cfg.no_prune) g = nc::prune(g, targets);
    if (stage >= 3) {
        std::vector<std::vector<std::string>> partition =
            cfg.cluster != "auto" && cfg.cluster != "off" ? parse_partition_file(cfg.cluster)
                                                          : nc::default_clustering(net, g);
        g = nc::cluster(g, partition, std::set<std::string>(targets.begin(), targets.end()));
    }
    os << nc::export_text(g);
    return 0;
}

int cmd_bench(const Config& cfg, std::ostream& os) {
    std::vector<std::size_t> Ks;
    for (const auto& k : split_list(cfg.k_csv)) Ks.push_back(static_cast<std::size_t>(std::stoull(k)));
    if (Ks.empty()) throw nc::UsageError("--K must list at least one size");
    nc::Field field = nc::FieldSpec::parse(cfg.field);
    os << nc::bench_csv(nc::bench_chain(Ks, field, cfg.seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Config cfg;
    CLI::App app{"message passing decoder for linear network codes on factor graphs"};
    app.require_subcommand(1);

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a network file");
    CLI::App* encode = app.add_subcommand("encode", "encode source symbols through the network");
    CLI::App* decode = app.add_subcommand("decode", "decode observed symbols by message passing");
    CLI::App* graph = app.add_subcommand("graph", "export the factor graph at a pipeline stage");
    CLI::App* bench = app.add_subcommand("bench", "chain-topology complexity benchmark (CSV)");

    for (CLI::App* sub : {validate, encode, decode, graph})
        sub->add_option("--net", cfg.net_path, "network description file")->required();
    for (CLI::App* sub : {decode, graph}) sub->add_option("--obs", cfg.obs_path, "observation file");
    for (CLI::App* sub : {decode, graph})
        sub->add_option("--targets", cfg.targets_csv, "comma-separated decode targets (default: all sources)");
    for (CLI::App* sub : {decode, graph})
        sub->add_option("--cluster", cfg.cluster, "auto|off|FILE with one factor group per line");
    for (CLI::App* sub : {decode, graph}) sub->add_flag("--no-prune", cfg.no_prune, "skip the pruning stage");
    for (CLI::App* sub : {decode, graph}) sub->add_flag("--no-simplify", cfg.no_simplify, "skip the simplify stage");
    for (CLI::App* sub : {encode, bench}) sub->add_option("--seed", cfg.seed, "seed for stochastic links / codes");
    for (CLI::App* sub : {validate, encode, decode, graph, bench})
        sub->add_option("--out", cfg.out_path, "write the report to a file instead of stdout");

    encode->add_option("--src", cfg.src_path, "file of `src <id> = <vector>` lines");
    encode->add_option("assignments", cfg.assignments, "inline source values, e.g. s1=1,0");
    decode->add_flag("--baseline", cfg.baseline, "also run the Gaussian-elimination baseline and compare");
    decode->add_flag("--oracle", cfg.oracle, "cross-check against the brute-force marginal supports");
    graph->add_option("--stage", cfg.stage, "raw|simplified|pruned|clustered");
    bench->add_option("--K", cfg.k_csv, "comma-separated chain sizes");
    bench->add_option("--field", cfg.field, "field for random codes, e.g. GF(16) or GF(2^4:1,1,0,0,1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        Output out;
        out.open(cfg.out_path);
        if (validate->parsed()) return cmd_validate(cfg, out.os());
        if (encode->parsed()) return cmd_encode(cfg, out.os());
        if (decode->parsed()) return cmd_decode(cfg, out.os());
        if (graph->parsed()) return cmd_graph(cfg, out.os());
        return cmd_bench(cfg, out.os());
    } catch (const nc::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
