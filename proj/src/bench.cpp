#include "blendcube/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "blendcube/algebra.hpp"
#include "blendcube/errors.hpp"
#include "blendcube/sql_engine.hpp"
#include "blendcube/sqlgen.hpp"

namespace blendcube {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2 + 1;
        for (std::size_t k = i; k <= j; ++k) out[order[k]] = rank;
        i = j + 1;
    }
    return out;
}

template <class F>
double seconds_per_call(F&& f, std::size_t iterations) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < iterations; ++i) f();
    return std::chrono::duration<double>(Clock::now() - start).count() / static_cast<double>(iterations);
}

// Smallest power-of-two iteration count whose run lasts at least min_seconds.
template <class F>
std::size_t calibrate(F&& f, double min_seconds) {
    std::size_t n = 1;
    while (n < (1u << 20) && seconds_per_call(f, n) * static_cast<double>(n) < min_seconds) n *= 2;
    return n;
}

}  // namespace

std::vector<std::size_t> parse_sizes(const std::string& text) {
    std::vector<std::size_t> out;
    auto number = [&](const std::string& s) -> std::size_t {
        std::size_t used = 0;
        long long v = -1;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
        }
        if (used != s.size() || v <= 0) throw OperatorError("invalid size '" + s + "' in '" + text + "'");
        return static_cast<std::size_t>(v);
    };
    if (text.find(':') != std::string::npos) {
        const auto a = text.find(':');
        const auto b = text.find(':', a + 1);
        const std::size_t first = number(text.substr(0, a));
        const std::size_t last = number(b == std::string::npos ? text.substr(a + 1) : text.substr(a + 1, b - a - 1));
        const std::size_t step = b == std::string::npos ? 1 : number(text.substr(b + 1));
        if (last < first) throw OperatorError("size range '" + text + "' is empty");
        for (std::size_t n = first; n <= last; n += step) out.push_back(n);
    } else {
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto comma = text.find(',', start);
            out.push_back(number(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw OperatorError("spearman: series lengths differ");
    const std::size_t n = x.size();
    if (n < 2) return 0;
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) return 0;
    return sxy / std::sqrt(sxx * syy);
}

BenchTables prepare_bench(std::size_t n_geo, const BenchConfig& config) {
    BenchOptions options;
    options.n_geo = n_geo;
    options.seed = config.seed + n_geo;
    options.organisms = config.organisms;
    options.skew = config.skew;
    options.allow_any_size = config.allow_any_size;

    BenchTables b{generate_bench_dataset(options), {}, {}, {}, {}};
    const Constellation& c = *b.data.constellation;
    const std::vector<MeasureRef> measures = {{Aggregation::Sum, "Superficie"}};
    MTable t = display(c, "Repartition", measures, {"Organismes", ""}, {"Geographies", ""});
    t = drilldown(t, c, "Organismes", "Variete");
    t = drilldown(t, c, "Geographies", "Pays");
    t = drilldown(t, c, "Geographies", "Etat");
    b.drilled = t;
    b.request = {"Geographies", "Pays", Stamp::Drop, "Etat", Stamp::Drop, parse_predicate(b.data.predicate)};

    const MTable blended = blend(t, b.request, c);
    b.materialized = materialize_axis(c, blended.columns, "HBLEND");
    MTable s = display(*b.materialized, "Repartition", measures, {"Organismes", ""}, {"Geographies", "HBLEND"});
    s = drilldown(s, *b.materialized, "Organismes", "Variete");
    for (std::size_t i = 1; i < blended.columns.displayed.size(); ++i) {
        s = drilldown(s, *b.materialized, "Geographies", blended.columns.displayed[i]);
    }
    b.stored = s;
    return b;
}

BenchReport run_bench(const BenchConfig& config, std::ostream* progress) {
    if (config.reps == 0) throw OperatorError("reps must be at least 1");
    if (config.sizes.empty()) throw OperatorError("no sizes to run");
    BenchReport report;
    report.config = config;
    for (std::size_t n_geo : config.sizes) {
        const BenchTables b = prepare_bench(n_geo, config);
        const Constellation& c = *b.data.constellation;
        const Constellation& cm = *b.materialized;

        BenchResult r;
        r.n_geo = n_geo;
        r.n_repartition = c.facts.front().instances.size();
        r.e_sup = b.data.e_sup_size;
        r.e_inf = b.data.e_inf_size;

        auto dynamic = [&] { return evaluate(blend(b.drilled, b.request, c), c); };
        auto stored = [&] { return evaluate(b.stored, cm); };
        r.grids_equal = dynamic() == stored();

        const std::size_t iterations = calibrate(stored, config.min_sample_seconds);
        std::vector<double> td, tm;
        for (std::size_t rep = 0; rep < config.reps; ++rep) {
            // Alternate the order so drift affects both series alike.
            if (rep % 2 == 0) {
                td.push_back(seconds_per_call(dynamic, iterations));
                tm.push_back(seconds_per_call(stored, iterations));
            } else {
                tm.push_back(seconds_per_call(stored, iterations));
                td.push_back(seconds_per_call(dynamic, iterations));
            }
        }
        r.t_dynamic = median(td);
        r.t_materialized = median(tm);
        r.overhead_pct = 100 * (r.t_dynamic - r.t_materialized) / r.t_materialized;

        if (!config.db_url.empty()) {
            const MTable blended = blend(b.drilled, b.request, c);
            const std::string q1 = generate_query(blended, c).text();
            const std::string q2 = generate_query(b.stored, cm).text();
            // Each series gets its own in-memory copy so both run under the same conditions.
            if (config.db_url.rfind("sqlite:", 0) != 0) throw Error("unsupported database url '" + config.db_url + "'");
            SqlEngine e1("sqlite::memory:");
            SqlEngine e2("sqlite::memory:");
            e1.load(c);
            e2.load(cm);
            std::vector<double> s1, s2;
            for (std::size_t rep = 0; rep < config.reps; ++rep) {
                s1.push_back(seconds_per_call([&] { e1.query(q1); }, 1));
                s2.push_back(seconds_per_call([&] { e2.query(q2); }, 1));
            }
            r.sql_dynamic = median(s1);
            r.sql_materialized = median(s2);
        }

        if (progress) {
            *progress << fmt::format("n_geo={:>3} facts={:>6} e_sup={:>2} e_inf={:>2} dynamic={:.3f}ms stored={:.3f}ms "
                                     "overhead={:.2f}% grids_equal={}\n",
                                     r.n_geo, r.n_repartition, r.e_sup, r.e_inf, r.t_dynamic * 1e3,
                                     r.t_materialized * 1e3, r.overhead_pct, r.grids_equal ? "yes" : "no")
                      << std::flush;
        }
        report.results.push_back(r);
    }
    std::vector<double> x, y;
    for (const auto& r : report.results) {
        x.push_back(static_cast<double>(r.n_geo));
        y.push_back(r.overhead_pct);
    }
    report.spearman = spearman(x, y);
    return report;
}

std::string bench_report_csv(const BenchReport& report) {
    const bool sql = !report.config.db_url.empty();
    std::string out = "n_geo,n_repartition,e_sup,e_inf,t_dynamic_ms,t_materialized_ms,overhead_pct,grids_equal";
    if (sql) out += ",sql_dynamic_ms,sql_materialized_ms";
    out += ",seed,reps,skew\n";
    for (const auto& r : report.results) {
        out += fmt::format("{},{},{},{},{:.6f},{:.6f},{:.4f},{}", r.n_geo, r.n_repartition, r.e_sup, r.e_inf,
                           r.t_dynamic * 1e3, r.t_materialized * 1e3, r.overhead_pct, r.grids_equal ? "true" : "false");
        if (sql) out += fmt::format(",{:.6f},{:.6f}", r.sql_dynamic.value_or(0) * 1e3, r.sql_materialized.value_or(0) * 1e3);
        out += fmt::format(",{},{},{}\n", report.config.seed, report.config.reps, to_string(report.config.skew));
    }
    return out;
}

}  // namespace blendcube
