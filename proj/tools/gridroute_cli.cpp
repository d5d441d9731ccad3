// Command-line front end: trace generation, simulation with any of the
// routing algorithms (replay-verified), the exact oracle for tiny
// instances, and the CSV benchmark harness.
//
// Exit codes: 0 success, 1 usage / input error, 2 invariant violation.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gridroute/bench.hpp"

namespace {

gridroute::GridSpec make_grid(int64_t n, int64_t d, int64_t B, int64_t c) {
    gridroute::GridSpec g;
    g.dims.assign(static_cast<size_t>(d), n);
    g.B = B;
    g.c = c;
    return g;
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
    if (path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
}

std::vector<gridroute::PacketRequest> load_trace(const std::string& path) {
    if (path == "-") return gridroute::parse_trace(std::cin);
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return gridroute::parse_trace(in);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online packet routing on uni-directional lines"};
    app.require_subcommand(1);

    int64_t n = 16, d = 1, B = 3, c = 3;
    uint64_t seed = 1;

    auto add_grid_opts = [&](CLI::App* cmd) {
        cmd->add_option("--n", n, "side length");
        cmd->add_option("--d", d, "grid dimension");
        cmd->add_option("--B", B, "buffer size");
        cmd->add_option("--c", c, "link capacity");
    };

    // gen-trace
    auto* gen = app.add_subcommand("gen-trace", "generate a request trace");
    add_grid_opts(gen);
    gridroute::GenParams gp;
    gen->add_option("--kind", gp.kind,
                    "uniform|bursty|dense-source|greedy-adversarial");
    gen->add_option("--count,--requests", gp.requests, "number of requests");
    gen->add_option("--t-max", gp.t_max, "latest injection time");
    gen->add_option("--seed", gp.seed, "generator seed");
    std::string out_path = "-";
    gen->add_option("--out", out_path, "output file (- for stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "route a trace and verify by replay");
    add_grid_opts(sim);
    std::string algo = "det", trace_path = "-";
    sim->add_option("--algo", algo, "det|det-deadline|bufferless|large-capacity|rand|ntg")
        ->check(CLI::IsMember(
            {"det", "det-deadline", "bufferless", "large-capacity", "rand", "ntg"}));
    sim->add_option("--trace", trace_path, "trace file (- for stdin)");
    sim->add_option("--seed", seed, "seed for the randomized algorithm");
    std::string sim_out = "-", events_path;
    sim->add_option("--out", sim_out, "summary output file (- for stdout)");
    sim->add_option("--events", events_path, "per-packet route dump file");

    // oracle
    auto* orc = app.add_subcommand("oracle", "exact optimum for tiny instances");
    add_grid_opts(orc);
    std::string orc_trace = "-", orc_out = "-";
    orc->add_option("--trace", orc_trace, "trace file (- for stdin)");
    orc->add_option("--out", orc_out, "output file (- for stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark config, print CSV");
    std::string config_path, bench_out = "-";
    bench->add_option("--config", config_path, "flat key = value config file")
        ->required();
    bench->add_option("--out", bench_out, "CSV output file (- for stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            auto trace = gridroute::gen_trace(make_grid(n, d, B, c), gp);
            if (out_path == "-") {
                gridroute::emit_trace(trace, std::cout);
            } else {
                std::ofstream out(out_path);
                if (!out) throw std::runtime_error("cannot open output file: " + out_path);
                gridroute::emit_trace(trace, out);
            }
            return 0;
        }
        if (sim->parsed()) {
            auto trace = load_trace(trace_path);
            auto grid = make_grid(n, d, B, c);
            gridroute::AlgoOutput out = gridroute::run_algo(algo, trace, grid, seed);
            gridroute::ReplayResult rep = gridroute::replay(out.paths, trace, grid);
            std::ofstream sink_file;
            std::ostream& os = open_sink(sim_out, sink_file);
            os << "algo=" << out.metrics.algo
               << " requests=" << trace.size()
               << " delivered=" << out.metrics.throughput
               << " rejected=" << out.metrics.rejected
               << " preempted=" << out.metrics.preempted
               << " replay_violations=" << rep.violations.size() << "\n";
            if (!events_path.empty()) {
                std::ofstream ev(events_path);
                if (!ev) throw std::runtime_error("cannot open events file: " + events_path);
                for (const auto& plan : out.paths) {
                    ev << plan.id << (plan.delivered ? " delivered" : " dropped");
                    for (const auto& node : plan.nodes) {
                        ev << " t=" << node.t << ":(";
                        for (size_t i = 0; i < node.v.size(); ++i)
                            ev << (i ? "," : "") << node.v[i];
                        ev << ")";
                    }
                    ev << "\n";
                }
            }
            for (const auto& v : rep.violations)
                std::cerr << "violation t=" << v.t << ": " << v.what << "\n";
            return rep.violations.empty() ? 0 : 2;
        }
        if (orc->parsed()) {
            auto trace = load_trace(orc_trace);
            auto grid = make_grid(n, d, B, c);
            gridroute::BfResult r = gridroute::brute_force_opt(trace, grid);
            gridroute::ReplayResult rep = gridroute::replay(r.witness, trace, grid);
            std::ofstream sink_file;
            std::ostream& os = open_sink(orc_out, sink_file);
            os << "opt=" << r.opt
               << " replay_violations=" << rep.violations.size() << "\n";
            return rep.violations.empty() ? 0 : 2;
        }
        if (bench->parsed()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config file: " + config_path);
            auto cfg = gridroute::parse_config(in);
            auto rows = gridroute::run_experiment(cfg);
            std::ofstream sink_file;
            std::ostream& os = open_sink(bench_out, sink_file);
            os << gridroute::experiment_csv_header() << "\n";
            bool bad = false;
            for (const auto& row : rows) {
                os << gridroute::to_csv(row) << "\n";
                if (row.violations > 0) bad = true;
            }
            return bad ? 2 : 0;
        }
    } catch (const gridroute::contract_error& e) {
        std::cerr << "invariant violation: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
