#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "blendcube/algebra.hpp"
#include "blendcube/ingest.hpp"
#include "blendcube/mtable.hpp"

namespace blendcube {

struct BenchConfig {
    std::vector<std::size_t> sizes;
    std::uint64_t seed = 42;
    std::size_t reps = 5;
    std::size_t organisms = 250;
    Skew skew = Skew::Homogeneous;
    bool allow_any_size = false;
    double min_sample_seconds = 0.02;  // each timed sample repeats the work at least this long
    std::string db_url;                // when set, also times the generated SQL on this engine
};

struct BenchResult {
    std::size_t n_geo = 0;
    std::size_t n_repartition = 0;
    std::size_t e_sup = 0;
    std::size_t e_inf = 0;
    double t_dynamic = 0;       // seconds, median
    double t_materialized = 0;  // seconds, median
    double overhead_pct = 0;
    bool grids_equal = false;
    std::optional<double> sql_dynamic;
    std::optional<double> sql_materialized;
};

struct BenchReport {
    BenchConfig config;
    std::vector<BenchResult> results;
    double spearman = 0;  // overhead_pct against n_geo
};

// "10:100:10" (first:last:step) or "10,20,50".
std::vector<std::size_t> parse_sizes(const std::string& text);

// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// The two tables of one bench point: the drilled table before BLEND(Pays, Etat) over the
// generated dataset, and its stored-attribute counterpart.
struct BenchTables {
    BenchDataset data;
    MTable drilled;
    BlendRequest request;
    std::shared_ptr<const Constellation> materialized;
    MTable stored;
};

BenchTables prepare_bench(std::size_t n_geo, const BenchConfig& config);

BenchReport run_bench(const BenchConfig& config, std::ostream* progress = nullptr);

std::string bench_report_csv(const BenchReport& report);

}  // namespace blendcube
