// gtdb: command-line entry point for the graph store, query engine, sampler,
// GraphSAGE trainer, sampling server and benchmarks.

#include <csignal>
#include <pthread.h>

#include <CLI11.hpp>
#include <charconv>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <sstream>

#include "gtdb/bench/bench.hpp"
#include "gtdb/dist/distributed.hpp"
#include "gtdb/ingest/ingest.hpp"
#include "gtdb/query/binder.hpp"
#include "gtdb/query/errors.hpp"
#include "gtdb/query/executor.hpp"
#include "gtdb/query/parser.hpp"

using namespace gtdb;

namespace {

/// Bad input from the user: reported on stderr, exit code 1.
class UsageError : public Error {
public:
    using Error::Error;
};

struct Global {
    std::string store;
    std::size_t cache_mb = 64;
    std::uint64_t seed = 0;
    std::string log_level = "info";

    StoreOptions options(bool read_only) const { return StoreOptions{cache_mb << 20, read_only}; }

    std::unique_ptr<GraphStore> open(bool read_only = true) const {
        if (store.empty()) throw UsageError("--store is required");
        if (read_only && !std::filesystem::exists(std::filesystem::path(store) / "meta.json")) {
            throw UsageError("no store at '" + store + "'");
        }
        return GraphStore::open(store, options(read_only));
    }
};

std::vector<std::size_t> parse_sizes(const std::string& s, const char* what) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ',');) {
        std::size_t v = 0;
        const auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (ec != std::errc() || p != part.data() + part.size() || part.empty()) {
            throw UsageError(std::string("bad ") + what + " '" + s + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw UsageError(std::string("empty ") + what);
    return out;
}

// Integer when the text is a canonical integer, otherwise a string.
ExternalId parse_id(const std::string& s) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size() && std::to_string(v) == s) return v;
    return s;
}

std::vector<ExternalId> read_ids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::vector<ExternalId> ids;
    for (std::string line; std::getline(in, line);) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) ids.push_back(parse_id(line));
    }
    return ids;
}

query::Value json_value(const nlohmann::json& j) {
    if (j.is_null()) return {};
    if (j.is_boolean()) return query::Value(j.get<bool>());
    if (j.is_number_integer()) return query::Value(j.get<std::int64_t>());
    if (j.is_number()) return query::Value(j.get<double>());
    if (j.is_string()) return query::Value(j.get<std::string>());
    if (j.is_array()) {
        query::List l;
        for (const auto& x : j) l.push_back(json_value(x));
        return query::Value(std::move(l));
    }
    throw UsageError("unsupported parameter value " + j.dump());
}

// k=v; v is read as JSON when it parses (numbers, "strings", [lists]),
// otherwise taken as a bare string.
query::Params parse_params(const std::vector<std::string>& kvs) {
    query::Params out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--param expects k=v, got '" + kv + "'");
        const auto text = kv.substr(eq + 1);
        const auto j = nlohmann::json::parse(text, nullptr, false);
        out[kv.substr(0, eq)] = j.is_discarded() ? query::Value(text) : json_value(j);
    }
    return out;
}

std::string read_query(const std::string& arg) {
    std::ostringstream ss;
    if (arg == "-") {
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::error_code ec;
    if (std::filesystem::is_regular_file(arg, ec)) {
        std::ifstream in(arg);
        ss << in.rdbuf();
        return ss.str();
    }
    return arg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot write '" + path + "'");
    return out;
}

sampler::Strategy parse_strategy(const std::string& s) {
    if (s == "global") return sampler::Strategy::GlobalLimit;
    if (s == "chained") return sampler::Strategy::PerHopChained;
    throw UsageError("--strategy is global or chained");
}

struct TrainFlags {
    std::size_t epochs = 1;
    std::size_t batch_size = 512;
    std::string fanouts = "12,12";
    std::size_t hidden = 16;
    std::size_t layers = 2;
    double lr = 0.1;
    std::string strategy = "global";
    std::string node_type = "PAPER";
    std::string rel_type = "CITES";
    double test_fraction = 0.2;
    std::size_t max_batches = 0;

    void add(CLI::App* app) {
        app->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
        app->add_option("--batch-size", batch_size)->check(CLI::PositiveNumber);
        app->add_option("--fanouts", fanouts, "comma-separated, e.g. 12,12");
        app->add_option("--hidden", hidden)->check(CLI::PositiveNumber);
        app->add_option("--layers", layers)->check(CLI::PositiveNumber);
        app->add_option("--lr", lr);
        app->add_option("--strategy", strategy, "global | chained");
        app->add_option("--node-type", node_type);
        app->add_option("--rel-type", rel_type);
        app->add_option("--test-fraction", test_fraction, "held-out share of the ids")->check(CLI::Range(0.0, 1.0));
        app->add_option("--max-batches", max_batches, "cap per epoch; 0 = whole epoch");
    }

    gnn::TrainConfig config(std::uint64_t seed) const {
        gnn::TrainConfig c;
        c.batch_size = batch_size;
        c.learning_rate = lr;
        c.seed = seed;
        c.max_batches = max_batches;
        c.sampling.fanouts = parse_sizes(fanouts, "--fanouts");
        c.sampling.strategy = parse_strategy(strategy);
        c.sampling.node_type = node_type;
        c.sampling.rel_type = rel_type;
        c.sampling.seed = seed;
        sampler::validate(c.sampling);
        return c;
    }
};

int cmd_ingest(const Global& g, const std::vector<std::string>& nodes, const std::vector<std::string>& edges,
               std::size_t dim) {
    ingest::IngestSpec spec;
    spec.feature_dim = dim;
    // path:LABEL, split at the last colon
    auto split = [](const std::string& s, const char* flag) {
        const auto c = s.rfind(':');
        if (c == std::string::npos || c == 0 || c + 1 == s.size()) {
            throw UsageError(std::string(flag) + " expects <path>:<NAME>, got '" + s + "'");
        }
        return std::pair{s.substr(0, c), s.substr(c + 1)};
    };
    for (const auto& n : nodes) {
        auto [path, label] = split(n, "--nodes");
        spec.node_files.push_back({path, label});
    }
    for (const auto& e : edges) {
        auto [path, rel] = split(e, "--edges");
        ingest::EdgeFile f;
        f.path = path;
        f.rel_type = rel;
        spec.edge_files.push_back(f);
    }
    auto store = g.open(false);
    const auto counts = ingest::load_csv(spec, *store);
    std::cout << "nodes_loaded=" << counts.nodes_loaded << " edges_loaded=" << counts.edges_loaded << '\n';
    return 0;
}

int cmd_query(const Global& g, const std::string& arg, const std::vector<std::string>& kvs, bool profile) {
    auto store = g.open();
    const auto params = parse_params(kvs);
    const auto plan = query::plan(query::bind(query::parse(read_query(arg)), params), *store);
    auto txn = store->begin_read();
    query::ExecOptions opts;
    opts.seed = g.seed;
    const auto res = query::run(plan, txn, opts);
    for (std::size_t i = 0; i < res.columns.size(); ++i) std::cout << (i ? "\t" : "") << res.columns[i];
    std::cout << '\n';
    for (const auto& row : res.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "\t" : "") << row[i].to_string();
        std::cout << '\n';
    }
    if (profile) std::cout << '\n' << res.profile.render();
    return 0;
}

int cmd_train(const Global& g, const TrainFlags& f, const std::string& report, const std::string& model_out) {
    auto store = g.open();
    const auto cfg = f.config(g.seed);
    auto [train_ids, test_ids] = gnn::split_ids(gnn::node_ids(*store, f.node_type), f.test_fraction, g.seed);
    auto model = gnn::init_model(sampler::fetch_metadata(*store), f.hidden, f.layers, g.seed, f.node_type);
    spdlog::info("training on {} ids ({} held out), {} parameters", train_ids.size(), test_ids.size(),
                 model.parameter_count());
    std::ofstream csv;
    if (!report.empty()) {
        csv = open_out(report);
        csv << "epoch,batch,batch_time_ms,sampled_nodes,sampled_edges,loss\n";
    }
    for (std::size_t e = 0; e < f.epochs; ++e) {
        const auto rep = gnn::train_epoch(*store, model, train_ids, cfg, e);
        for (const auto& b : rep.batches) {
            if (csv.is_open()) {
                csv << b.epoch << ',' << b.batch << ',' << b.batch_time_ms << ',' << b.sampled_nodes << ','
                    << b.sampled_edges << ',' << b.loss << '\n';
            }
        }
        std::cout << "epoch=" << e << " loss=" << rep.loss << " batches=" << rep.batches.size()
                  << " avg_batch_time=" << rep.avg_batch_time << " sampled_nodes=" << rep.sampled_nodes
                  << " sampled_edges=" << rep.sampled_edges << " peak_tracked_bytes=" << rep.peak_tracked_bytes
                  << '\n';
    }
    if (!model_out.empty()) gnn::save_model(model, model_out);
    return 0;
}

int cmd_evaluate(const Global& g, const TrainFlags& f, const std::string& model_path, bool all) {
    auto store = g.open();
    const auto model = gnn::load_model(model_path);
    auto ids = gnn::node_ids(*store, f.node_type);
    if (!all) ids = gnn::split_ids(std::move(ids), f.test_fraction, g.seed).second;
    const double acc = gnn::evaluate(*store, model, ids, f.config(g.seed));
    std::cout << "accuracy=" << acc << " evaluated=" << ids.size() << '\n';
    return 0;
}

int cmd_train_dist(const Global& g, const TrainFlags& f, std::size_t workers, const std::string& transport,
                   const std::string& endpoint, const std::string& report, const std::string& model_out) {
    auto store = g.open();
    dist::ClusterConfig cc;
    cc.num_workers = workers;
    cc.train = f.config(g.seed);
    if (transport == "socket") {
        cc.transport = dist::Transport::Socket;
    } else if (transport != "in-process") {
        throw UsageError("--transport is in-process or socket");
    }
    if (!endpoint.empty()) cc.endpoint = dist::Endpoint::parse(endpoint);
    const auto train_ids = gnn::split_ids(gnn::node_ids(*store, f.node_type), f.test_fraction, g.seed).first;
    auto model = gnn::init_model(sampler::fetch_metadata(*store), f.hidden, f.layers, g.seed, f.node_type);
    std::ofstream csv;
    if (!report.empty()) {
        csv = open_out(report);
        csv << "epoch,worker,epoch_time,batches,sampled_nodes,sampled_edges,final_loss\n";
    }
    for (std::size_t e = 0; e < f.epochs; ++e) {
        auto res = dist::run_distributed(*store, model, train_ids, cc, e);
        for (const auto& w : res.workers) {
            if (csv.is_open()) {
                csv << e << ',' << w.worker << ',' << w.epoch_time << ',' << w.batches << ',' << w.sampled_nodes << ','
                    << w.sampled_edges << ',' << w.final_loss << '\n';
            }
        }
        std::cout << "epoch=" << e << " workers=" << workers << " epoch_time=" << res.epoch_time << '\n';
        model = std::move(res.model);
    }
    if (!model_out.empty()) gnn::save_model(model, model_out);
    return 0;
}

int cmd_serve(const Global& g, const std::string& listen) {
    // handled by sigwait below, in this thread only
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    auto store = g.open();
    dist::SamplingServer server(*store, dist::Endpoint::parse(listen));
    std::cout << "listening on " << server.endpoint().to_string() << std::endl;
    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {}: stopping after {} requests", sig, server.requests_served());
    server.stop();
    return 0;
}

int cmd_sample_dist(const Global& g, std::vector<ExternalId> seeds, std::size_t num_seeds, std::int64_t max,
                    std::size_t runs, const std::string& node_type, const std::string& rel_type,
                    const std::string& out) {
    auto store = g.open();
    if (seeds.empty()) {
        seeds = gnn::node_ids(*store, node_type);
        if (seeds.size() > num_seeds) seeds.resize(num_seeds);
    }
    sampler::SamplingConfig cfg;
    cfg.seed = g.seed;
    cfg.node_type = node_type;
    cfg.rel_type = rel_type;
    const auto rows = bench::bench_sample_distribution(*store, seeds, runs, max, cfg);
    auto csv = open_out(out);
    bench::write_distribution_csv(csv, rows);
    std::vector<double> freq, paths;
    for (const auto& r : rows) {
        freq.push_back(static_cast<double>(r.times_sampled));
        paths.push_back(static_cast<double>(r.path_count));
    }
    std::cout << "nodes=" << rows.size() << " rank_correlation=" << bench::rank_correlation(freq, paths) << '\n';
    return 0;
}

spdlog::level::level_enum parse_level(const std::string& s) {
    const auto l = spdlog::level::from_str(s);
    if (l == spdlog::level::off && s != "off") throw UsageError("unknown --log-level '" + s + "'");
    return l;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gtdb: disk-backed property graph store and query-driven GraphSAGE trainer", "gtdb"};
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--store", g.store, "store directory");
    app.add_option("--cache-mb", g.cache_mb, "page-cache size in MiB")->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "global PRNG seed")->envname("GTDB_SEED");
    app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "load node and edge CSV files");
    std::vector<std::string> node_files, edge_files;
    std::size_t feature_dim = 0;
    ingest_cmd->add_option("--nodes", node_files, "<path>:<LABEL>")->required();
    ingest_cmd->add_option("--edges", edge_files, "<path>:<REL>");
    ingest_cmd->add_option("--feature-dim", feature_dim);

    // gen-sbm
    auto* sbm_cmd = app.add_subcommand("gen-sbm", "generate a stochastic block model graph");
    ingest::SbmSpec sbm;
    sbm_cmd->add_option("--communities", sbm.communities);
    sbm_cmd->add_option("--per-community", sbm.nodes_per_community);
    sbm_cmd->add_option("--p-in", sbm.p_in);
    sbm_cmd->add_option("--p-out", sbm.p_out);
    sbm_cmd->add_option("--dim", sbm.feature_dim);
    sbm_cmd->add_option("--classes", sbm.classes, "0 = one class per community");
    sbm_cmd->add_option("--noise", sbm.feature_noise);
    sbm_cmd->add_option("--centroid-scale", sbm.centroid_scale);

    // query
    auto* query_cmd = app.add_subcommand("query", "run a query; rows are tab-separated");
    std::string query_arg;
    std::vector<std::string> params;
    bool profile = false;
    query_cmd->add_option("query", query_arg, "query file, - for stdin, or query text")->required();
    query_cmd->add_option("--param", params, "k=v")->allow_extra_args(false);
    query_cmd->add_flag("--profile", profile, "print the operator profile");

    // sample-dist
    auto* dist_cmd = app.add_subcommand("sample-dist", "sampled frequency vs two-hop path count CSV");
    std::string seeds_file, dist_out = "hist.csv", node_type = "PAPER", rel_type = "CITES";
    std::size_t num_seeds = 100, runs = 100;
    std::int64_t max_neighbours = 1000;
    dist_cmd->add_option("--seeds", seeds_file, "file with one id per line");
    dist_cmd->add_option("--num-seeds", num_seeds, "without --seeds: the first N ids");
    dist_cmd->add_option("--max", max_neighbours);
    dist_cmd->add_option("--runs", runs);
    dist_cmd->add_option("--out", dist_out);
    dist_cmd->add_option("--node-type", node_type);
    dist_cmd->add_option("--rel-type", rel_type);

    // train / evaluate / train-dist
    auto* train_cmd = app.add_subcommand("train", "train GraphSAGE for some epochs");
    TrainFlags train_flags;
    std::string report, model_out, model_in;
    train_flags.add(train_cmd);
    train_cmd->add_option("--report", report, "per-batch metrics CSV");
    train_cmd->add_option("--model-out", model_out);

    auto* eval_cmd = app.add_subcommand("evaluate", "accuracy of a saved model on the held-out ids");
    TrainFlags eval_flags;
    bool eval_all = false;
    eval_flags.add(eval_cmd);
    eval_cmd->add_option("--model", model_in)->required();
    eval_cmd->add_flag("--all", eval_all, "evaluate every id, not only the held-out split");

    auto* tdist_cmd = app.add_subcommand("train-dist", "synchronous data-parallel training");
    TrainFlags tdist_flags;
    std::size_t workers = 2;
    std::string transport = "in-process", endpoint, tdist_report, tdist_model_out;
    tdist_flags.add(tdist_cmd);
    tdist_cmd->add_option("--workers", workers)->check(CLI::PositiveNumber);
    tdist_cmd->add_option("--transport", transport, "in-process | socket");
    tdist_cmd->add_option("--endpoint", endpoint, "sampling server host:port for socket transport");
    tdist_cmd->add_option("--report", tdist_report, "per-worker CSV");
    tdist_cmd->add_option("--model-out", tdist_model_out);

    // serve
    auto* serve_cmd = app.add_subcommand("serve", "sampling server over TCP");
    std::string listen = "127.0.0.1:7687";
    serve_cmd->add_option("--listen", listen, "host:port");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "benchmarks; CSV output");
    bench_cmd->require_subcommand(1);
    std::string bench_out = "results.csv";
    auto* mem_cmd = bench_cmd->add_subcommand("mem", "batch time and tracked memory per page-cache size");
    auto* workers_cmd = bench_cmd->add_subcommand("workers", "epoch time per worker count");
    auto* bdist_cmd = bench_cmd->add_subcommand("dist", "sampled-node distribution");
    std::string cache_list = "4,256", batch_list = "512", worker_list = "1,2,4";
    TrainFlags mem_flags, workers_flags;
    mem_flags.max_batches = 8;
    mem_flags.add(mem_cmd);
    mem_cmd->add_option("--cache-mb-list", cache_list);
    mem_cmd->add_option("--batch-sizes", batch_list);
    workers_flags.add(workers_cmd);
    workers_cmd->add_option("--workers", worker_list);
    workers_cmd->add_option("--transport", transport, "in-process | socket");
    for (auto* c : {mem_cmd, workers_cmd, bdist_cmd}) c->add_option("--out", bench_out);
    bdist_cmd->add_option("--seeds", seeds_file);
    bdist_cmd->add_option("--num-seeds", num_seeds);
    bdist_cmd->add_option("--max", max_neighbours);
    bdist_cmd->add_option("--runs", runs);

    if (argc <= 1) {
        std::cerr << app.help();
        return 1;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    auto logger = spdlog::stderr_color_mt("gtdb");
    spdlog::set_default_logger(logger);
    try {
        spdlog::set_level(parse_level(g.log_level));
        if (*ingest_cmd) return cmd_ingest(g, node_files, edge_files, feature_dim);
        if (*sbm_cmd) {
            sbm.seed = g.seed;
            auto store = g.open(false);
            const auto counts = ingest::generate_sbm(sbm, *store);
            std::cout << "nodes_loaded=" << counts.nodes_loaded << " edges_loaded=" << counts.edges_loaded << '\n';
            return 0;
        }
        if (*query_cmd) return cmd_query(g, query_arg, params, profile);
        if (*dist_cmd || *bdist_cmd) {
            return cmd_sample_dist(g, seeds_file.empty() ? std::vector<ExternalId>{} : read_ids(seeds_file), num_seeds,
                                   max_neighbours, runs, node_type, rel_type, *dist_cmd ? dist_out : bench_out);
        }
        if (*train_cmd) return cmd_train(g, train_flags, report, model_out);
        if (*eval_cmd) return cmd_evaluate(g, eval_flags, model_in, eval_all);
        if (*tdist_cmd) return cmd_train_dist(g, tdist_flags, workers, transport, endpoint, tdist_report, tdist_model_out);
        if (*serve_cmd) return cmd_serve(g, listen);
        if (*mem_cmd) {
            if (g.store.empty()) throw UsageError("--store is required");
            bench::MemorySweepConfig cfg;
            cfg.cache_sizes.clear();
            for (auto mb : parse_sizes(cache_list, "--cache-mb-list")) cfg.cache_sizes.push_back(mb << 20);
            cfg.batch_sizes = parse_sizes(batch_list, "--batch-sizes");
            cfg.train = mem_flags.config(g.seed);
            cfg.model = {mem_flags.hidden, mem_flags.layers};
            const auto rows = bench::bench_memory_sweep(g.store, cfg);
            auto csv = open_out(bench_out);
            bench::write_csv(csv, rows);
            bench::write_csv(std::cout, rows);
            return 0;
        }
        if (*workers_cmd) {
            auto store = g.open();
            bench::WorkerSweepConfig cfg;
            cfg.workers = parse_sizes(worker_list, "--workers");
            cfg.train = workers_flags.config(g.seed);
            cfg.model = {workers_flags.hidden, workers_flags.layers};
            if (transport == "socket") {
                cfg.transport = dist::Transport::Socket;
            } else if (transport != "in-process") {
                throw UsageError("--transport is in-process or socket");
            }
            const auto ids = gnn::node_ids(*store, workers_flags.node_type);
            const auto rows = bench::bench_worker_sweep(*store, ids, cfg);
            auto csv = open_out(bench_out);
            bench::write_csv(csv, rows);
            bench::write_csv(std::cout, rows);
            return 0;
        }
    } catch (const StoreError& e) {
        const bool internal = e.code() == StoreErrc::Corrupt || e.code() == StoreErrc::Io;
        spdlog::error("{}", e.what());
        return internal ? 2 : 1;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::critical("internal error: {}", e.what());
        return 2;
    }
    std::cerr << app.help();
    return 1;
}
