#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "blendcube/bench.hpp"
#include "blendcube/errors.hpp"
#include "blendcube/ingest.hpp"
#include "blendcube/service.hpp"
#include "blendcube/session.hpp"
#include "blendcube/sqlgen.hpp"

using namespace blendcube;

namespace {

int run_script(const std::string& script, const std::string& emit_sql, const std::string& golden) {
    std::ifstream in(script);
    if (!in) {
        std::cerr << "error: cannot open script '" << script << "'\n";
        return kExitIoError;
    }
    RunOptions options;
    options.base_dir = std::filesystem::path(script).parent_path();
    options.emit_sql = emit_sql;
    options.golden = golden;
    return run_session(in, std::cout, std::cerr, options);
}

int serve(const std::string& host, int port, const std::string& data_dir) {
    ServiceOptions options = service_options_from_env();
    if (!data_dir.empty()) options.data_dir = data_dir;
    Service service(options);
    HttpServer server(service);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return kExitIoError;
    }
    std::cerr << "blendcube service listening on http://" << host << ":" << bound << "\n";
    return server.listen() ? kExitOk : kExitIoError;
}

int default_port() {
    if (const char* p = std::getenv("BLENDCUBE_PORT")) {
        try {
            return std::stoi(p);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring invalid BLENDCUBE_PORT '" << p << "'\n";
        }
    }
    return 8075;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"blendcube: multidimensional tables with the BLEND operator"};
    app.require_subcommand(1);

    std::string script, emit_sql, golden;
    auto* run = app.add_subcommand("run", "Run a command script");
    run->add_option("script", script, "Script file")->required();
    run->add_option("--emit-sql", emit_sql, "Write the SQL of the final table to this file");
    run->add_option("--golden", golden, "Compare the final grid with this CSV file");

    auto* repl = app.add_subcommand("repl", "Read commands from standard input");

    std::string sample_dir;
    auto* gen_sample = app.add_subcommand("gen-sample", "Write the sample dataset");
    gen_sample->add_option("dir", sample_dir, "Output directory")->required();

    std::string bench_dir, skew = "homogeneous";
    std::size_t n_geo = 10, organisms = 250;
    std::uint64_t seed = 42;
    bool any_size = false;
    auto* gen_bench = app.add_subcommand("gen-bench", "Write a benchmark dataset");
    gen_bench->add_option("dir", bench_dir, "Output directory")->required();
    gen_bench->add_option("--geo", n_geo, "Number of GEOGRAPHIES rows");
    gen_bench->add_option("--seed", seed, "Random seed");
    gen_bench->add_option("--organisms", organisms, "Number of ORGANISMES rows");
    gen_bench->add_option("--skew", skew, "homogeneous, large-sup, small-sup, empty-sup or empty-inf");
    gen_bench->add_flag("--allow-any-size", any_size, "Accept sizes outside 10..100");

    std::string sizes = "10:100:10", out_csv;
    std::size_t reps = 5;
    double min_sample = 0.02;
    auto* bench = app.add_subcommand("bench", "Time dynamic BLEND against a stored blended attribute");
    bench->add_option("--sizes", sizes, "first:last:step or a comma list of GEOGRAPHIES sizes");
    bench->add_option("--seed", seed, "Random seed");
    bench->add_option("--reps", reps, "Repetitions per size (median reported)");
    bench->add_option("--organisms", organisms, "Number of ORGANISMES rows");
    bench->add_option("--skew", skew, "homogeneous, large-sup, small-sup, empty-sup or empty-inf");
    bench->add_option("--min-sample", min_sample, "Minimum seconds per timed sample");
    bench->add_option("--out", out_csv, "CSV report path");
    bench->add_flag("--allow-any-size", any_size, "Accept sizes outside 10..100");

    std::string dataset = "sample";
    auto* ddl = app.add_subcommand("ddl", "Print CREATE TABLE statements for a dataset");
    ddl->add_option("--dataset", dataset, "Dataset directory or 'sample'");

    std::string host = "127.0.0.1", data_dir;
    int port = default_port();
    auto* srv = app.add_subcommand("serve", "Start the HTTP service");
    srv->add_option("--host", host, "Listen address");
    srv->add_option("--port", port, "Listen port (BLENDCUBE_PORT)");
    srv->add_option("--data-dir", data_dir, "Dataset directory (BLENDCUBE_DATA_DIR)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitCommandError;
    }

    try {
        if (*run) return run_script(script, emit_sql, golden);
        if (*repl) {
            RunOptions options;
            options.prompt = isatty(STDIN_FILENO) != 0;
            return run_session(std::cin, std::cout, std::cerr, options);
        }
        if (*gen_sample) {
            generate_sample_dataset(sample_dir);
            return kExitOk;
        }
        if (*gen_bench) {
            BenchOptions options;
            options.n_geo = n_geo;
            options.seed = seed;
            options.organisms = organisms;
            options.skew = parse_skew(skew);
            options.allow_any_size = any_size;
            const BenchDataset data = generate_bench_dataset(options);
            write_dataset(*data.constellation, bench_dir);
            std::cout << fmt::format("predicate: {}\ne_sup: {}\ne_inf: {}\n", data.predicate, data.e_sup_size,
                                     data.e_inf_size);
            return kExitOk;
        }
        if (*bench) {
            BenchConfig config;
            config.sizes = parse_sizes(sizes);
            config.seed = seed;
            config.reps = reps;
            config.organisms = organisms;
            config.skew = parse_skew(skew);
            config.allow_any_size = any_size;
            config.min_sample_seconds = min_sample;
            if (const char* url = std::getenv("BLENDCUBE_DB_URL")) config.db_url = url;
            const BenchReport report = run_bench(config, &std::cerr);
            const std::string csv = bench_report_csv(report);
            if (out_csv.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(out_csv);
                if (!out || !(out << csv)) {
                    std::cerr << "error: cannot write '" << out_csv << "'\n";
                    return kExitIoError;
                }
            }
            bool equal = true;
            for (const auto& r : report.results) equal = equal && r.grids_equal;
            std::cerr << fmt::format("grids equal at every size: {}\nspearman(n_geo, overhead_pct) = {:.3f}\n",
                                     equal ? "yes" : "no", report.spearman);
            return equal ? kExitOk : kExitCommandError;
        }
        if (*ddl) {
            auto c = dataset == "sample" ? sample_constellation() : load_dataset(dataset);
            std::cout << generate_star_ddl(*c).text();
            return kExitOk;
        }
        if (*srv) return serve(host, port, data_dir);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        for (const auto& p : e.problems()) std::cerr << "  " << p << "\n";
        return kExitIoError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCommandError;
    }
    return kExitOk;
}
