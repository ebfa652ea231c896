#include <gtest/gtest.h>

#include <cmath>

#include "blendcube/bench.hpp"
#include "blendcube/errors.hpp"

using namespace blendcube;

TEST(Bench, ParseSizes) {
    EXPECT_EQ(parse_sizes("10:100:10"), (std::vector<std::size_t>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100}));
    EXPECT_EQ(parse_sizes("10:12"), (std::vector<std::size_t>{10, 11, 12}));
    EXPECT_EQ(parse_sizes("10,20,50"), (std::vector<std::size_t>{10, 20, 50}));
    EXPECT_EQ(parse_sizes("7"), (std::vector<std::size_t>{7}));
    EXPECT_THROW(parse_sizes("10:5"), OperatorError);
    EXPECT_THROW(parse_sizes("a,b"), OperatorError);
    EXPECT_THROW(parse_sizes("10,,20"), OperatorError);
    EXPECT_THROW(parse_sizes("0"), OperatorError);
}

TEST(Bench, Spearman) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {9, 7, 5, 1}), -1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3}, {5, 5, 5}), 0.0);
    // Monotone transforms leave ranks unchanged.
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4, 5}, {1, 4, 9, 16, 25}), 1.0);
    // Ties take average ranks: x ranks 1..4, y ranks 1, 2.5, 2.5, 4.
    EXPECT_NEAR(spearman({1, 2, 3, 4}, {1, 2, 2, 3}), 0.9486832980505138, 1e-12);
    EXPECT_THROW(spearman({1, 2}, {1}), OperatorError);
}

TEST(Bench, SinglePointRun) {
    BenchConfig config;
    config.sizes = {10};
    config.reps = 1;
    config.min_sample_seconds = 0;
    const BenchReport report = run_bench(config);
    ASSERT_EQ(report.results.size(), 1u);
    const BenchResult& r = report.results[0];
    EXPECT_EQ(r.n_repartition, 250u * 10u);
    EXPECT_TRUE(r.grids_equal);
    EXPECT_TRUE(std::isfinite(r.overhead_pct));
    EXPECT_GT(r.t_dynamic, 0);
    EXPECT_GT(r.t_materialized, 0);
    EXPECT_EQ(r.e_sup + r.e_inf > 0, true);
    const std::string csv = bench_report_csv(report);
    EXPECT_EQ(csv.rfind("n_geo,n_repartition,", 0), 0u);
}

TEST(Bench, SqlSeries) {
    BenchConfig config;
    config.sizes = {10};
    config.reps = 1;
    config.organisms = 20;
    config.min_sample_seconds = 0;
    config.db_url = "sqlite::memory:";
    const BenchResult r = run_bench(config).results.at(0);
    ASSERT_TRUE(r.sql_dynamic && r.sql_materialized);
    EXPECT_GT(*r.sql_dynamic, 0);
    config.db_url = "postgres://nowhere";
    EXPECT_THROW(run_bench(config), Error);
}

TEST(Bench, StoredTableMatchesBlendAcrossSkews) {
    for (Skew skew : {Skew::Homogeneous, Skew::LargeSup, Skew::SmallSup, Skew::EmptySup, Skew::EmptyInf}) {
        BenchConfig config;
        config.organisms = 30;
        config.skew = skew;
        for (std::size_t n : {10u, 37u, 100u}) {
            const BenchTables b = prepare_bench(n, config);
            const Constellation& c = *b.data.constellation;
            EXPECT_EQ(evaluate(blend(b.drilled, b.request, c), c), evaluate(b.stored, *b.materialized)) << to_string(skew) << n;
        }
    }
}

TEST(Bench, RejectsEmptyConfig) {
    BenchConfig config;
    EXPECT_THROW(run_bench(config), OperatorError);
    config.sizes = {10};
    config.reps = 0;
    EXPECT_THROW(run_bench(config), OperatorError);
}
