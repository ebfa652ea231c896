// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>

#include <fmt/core.h>

#include "blendcube/bench.hpp"
#include "blendcube/errors.hpp"
#include "blendcube/session.hpp"
#include "blendcube/sql_engine.hpp"
#include "blendcube/sqlgen.hpp"
#include "support.hpp"

using namespace blendcube;
using namespace blendcube::test;

namespace {

const Stamp D = Stamp::Drop;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::shared_ptr<const Constellation>> generated() {
    std::vector<std::shared_ptr<const Constellation>> out{sample_constellation()};
    const Skew skews[] = {Skew::Homogeneous, Skew::LargeSup, Skew::SmallSup, Skew::EmptySup, Skew::EmptyInf};
    for (std::uint64_t seed = 101; seed <= 110; ++seed) out.push_back(small_dataset(seed, 8 + seed % 20, skews[seed % 5]));
    return out;
}

MTable random_table(const Constellation& c, std::mt19937_64& rng) {
    MTable t = display(c, "Repartition", {{Aggregation::Sum, "Superficie"}}, {"Organismes", ""}, {"Geographies", ""});
    for (const std::string dim : {"Organismes", "Geographies"}) {
        const int drills = static_cast<int>(rng() % 4);
        for (int i = 0; i < drills; ++i) {
            const AxisSpec& axis = t.axis(dim);
            const std::size_t finest = *axis.path_index(axis.displayed.back());
            if (finest <= 1) break;
            t = drilldown(t, c, dim, axis.path[1 + rng() % (finest - 1)]);
        }
    }
    return t;
}

bool axis_is_strict(const MTable& t, const Constellation& c, const std::string& dim) {
    const AxisSpec& axis = t.axis(dim);
    const Dimension& d = c.dimension(dim);
    for (std::size_t i = 0; i + 1 < axis.displayed.size(); ++i) {
        const auto coarse = level_column(d, &axis, axis.displayed[i]);
        const auto fine = level_column(d, &axis, axis.displayed[i + 1]);
        if (find_strictness_breach(d.size(), fine, coarse)) return false;
    }
    return true;
}

std::vector<std::string> leaves(const Grid& g) {
    std::vector<std::string> out;
    for (const auto& h : g.column_headers) out.push_back(h.back().str());
    return out;
}

Outcome golden_t2() {
    Outcome o;
    const auto start = Clock::now();
    const Grid g = evaluate(t2_table(), sample());
    int checked = 0;
    for (const auto& cell : t2_cells()) {
        if (cell.variete != "GTS-Soja" && cell.variete != "MaisBT176" && cell.variete != "Soja#8") continue;
        const auto v = g.at_leaf(Value(cell.variete), Value(cell.etat));
        o.require(v && *v == cell.superficie, cell.variete + "/" + cell.etat);
        ++checked;
    }
    o.require(g.at_leaf(Value("GTS-Soja"), Value("Iowa")) == 1500.0, "GTS-Soja/Iowa");
    const double s = seconds_since(start);
    o.require(s < 1, "slower than 1 s");
    o.detail = o.pass ? fmt::format("{} reference cells equal ({:.3f} s)", checked, s) : o.detail;
    return o;
}

Outcome golden_t3() {
    Outcome o;
    const auto start = Clock::now();
    const Grid g = evaluate(t3_table(), sample());
    o.require(leaves(g) == std::vector<std::string>{"Asie", "Bresil", "Iowa", "Minnesota"}, "column leaves");
    const std::map<std::string, std::vector<std::optional<double>>> expected = {
        {"GTS-Soja", {500, 400, 1500, 2500}},
        {"MaisBT176", {1700, 200, std::nullopt, 1500}},
        {"Soja#8", {1800, 500, 200, 250}},
    };
    const std::vector<std::string> cols = {"Asie", "Bresil", "Iowa", "Minnesota"};
    for (const auto& [row, cells] : expected) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            o.require(g.at_leaf(Value(row), Value(cols[i])) == cells[i], row + "/" + cols[i]);
        }
    }
    // The bundled script leaves out the Mais Doux and MCN810 rows.
    std::istringstream script(read_text(source_dir() / "data" / "scripts" / "t2-to-t3.blend"));
    std::ostringstream out, err;
    const int status = run_session(script, out, err);
    o.require(status == 0, "script status");
    o.require(out.str() == read_text(golden_dir() / "t2.txt") + read_text(golden_dir() / "t3.txt"), "script output");
    o.require(out.str().find("Mais Doux", out.str().find("Continent_Pays_Etat")) == std::string::npos, "Mais Doux excluded");
    const double s = seconds_since(start);
    o.require(s < 1, "slower than 1 s");
    if (o.pass) o.detail = fmt::format("leaves Asie/Bresil/Iowa/Minnesota, 12 cells equal ({:.3f} s)", s);
    return o;
}

Outcome e_sets() {
    Outcome o;
    const Constellation& c = sample();
    const Partition density = compute_partition(t2_table(), request("Geographies", "Pays", D, "Etat", D, "Densité > 20"), c);
    o.require(density.e_inf.empty(), "Densité>20 E_inf");
    o.require(density.e_sup == std::set<Value>{"Bresil", "Etats-Unis", "Inde"}, "Densité>20 E_sup");

    const MTable parcels = drilldown(t2_table(), c, "Geographies", "Parcelle");
    const auto r = request("Geographies", "Etat", D, "Parcelle", D, "Pays = 'Etats-Unis'");
    const Partition root = compute_partition(parcels, r, c);
    o.require(root.e_sup == std::set<Value>{"Iowa", "Minnesota"}, "root E_sup");
    o.require(root.e_inf == std::set<Value>{"P3", "P4", "P5", "P6"}, "root E_inf");
    const Grid g = evaluate(blend(parcels, r, c), c);
    const Grid before = evaluate(parcels, c);
    for (const auto& row : g.row_headers) {
        const Value& v = row.back();
        const auto p1 = before.at_leaf(v, Value("P1"));
        std::optional<double> mn;
        for (const char* p : {"P2", "P7"}) {
            if (auto x = before.at_leaf(v, Value(p))) mn = mn.value_or(0) + *x;
        }
        o.require(g.at_leaf(v, Value("Iowa")) == p1, "Iowa = P1 for " + v.str());
        o.require(g.at_leaf(v, Value("Minnesota")) == mn, "Minnesota = P2+P7 for " + v.str());
    }
    if (o.pass) o.detail = "Densité>20 and root-level partitions equal, US parcels summed";
    return o;
}

Outcome validity_constraint() {
    Outcome o;
    try {
        blend(t2_table(), request("Geographies", "Pays", D, "Etat", D, "Etat = 'Iowa'"), sample());
        o.require(false, "Etat = 'Iowa' accepted");
    } catch (const ConstraintViolation& e) {
        o.require(e.offending_values() == std::vector<std::string>{"Etats-Unis"}, "offending values");
    }
    std::mt19937_64 rng(77);
    const auto sets = generated();
    int requests = 0, accepted = 0;
    for (int i = 0; requests < 600 && i < 5000; ++i) {
        const Constellation& c = *sets[i % sets.size()];
        const MTable t = random_table(c, rng);
        const std::string dim = rng() % 4 ? "Geographies" : "Organismes";
        const auto r = random_blend(t, c, dim, rng);
        if (!r) continue;
        ++requests;
        try {
            const MTable out = blend(t, *r, c);
            ++accepted;
            o.require(axis_is_strict(out, c, dim), "non-strict accepted blend: " + to_string(r->pred));
        } catch (const ConstraintViolation&) {
        }
    }
    o.require(requests >= 500, "fewer than 500 requests");
    if (o.pass) o.detail = fmt::format("'Etats-Unis' offending; {} requests, {} accepted, all strict", requests, accepted);
    return o;
}

Outcome conservation() {
    Outcome o;
    std::mt19937_64 rng(31);
    const auto sets = generated();
    int chains = 0;
    for (int i = 0; i < 520; ++i) {
        const Constellation& c = *sets[i % sets.size()];
        const double total = fact_total(c, "Repartition");
        MTable t = random_table(c, rng);
        const int length = 1 + static_cast<int>(rng() % 3);
        for (int step = 0; step < length; ++step) {
            const std::string dim = rng() % 3 ? "Geographies" : "Organismes";
            const AxisSpec& axis = t.axis(dim);
            try {
                switch (rng() % 3) {
                case 0: {
                    const std::size_t finest = *axis.path_index(axis.displayed.back());
                    if (finest > 1) t = drilldown(t, c, dim, axis.path[1 + rng() % (finest - 1)]);
                    break;
                }
                case 1: t = rollup(t, c, dim, axis.displayed[rng() % axis.displayed.size()]); break;
                default:
                    if (auto r = random_blend(t, c, dim, rng)) t = blend(t, *r, c);
                }
            } catch (const ConstraintViolation&) {
            }
            o.require(grand_total(evaluate(t, c)) == total, "total changed");
        }
        ++chains;
    }
    if (o.pass) o.detail = fmt::format("{} chains, grand totals exact", chains);
    return o;
}

Outcome closure() {
    Outcome o;
    std::mt19937_64 rng(8);
    const auto sets = generated();
    int chains = 0;
    for (int i = 0; i < 300; ++i) {
        const Constellation& c = *sets[i % sets.size()];
        MTable t = random_table(c, rng);
        for (int step = 0; step < 3; ++step) {
            const std::string dim = rng() % 4 ? "Geographies" : "Organismes";
            const auto r = random_blend(t, c, dim, rng);
            if (!r) continue;
            try {
                t = blend(t, *r, c);
            } catch (const ConstraintViolation&) {
                continue;
            }
            o.require(validate_mtable(t, c).empty() && axis_is_strict(t, c, dim), "invalid table");
            evaluate(t, c);
        }
        ++chains;
    }
    const Constellation& c = sample();
    MTable a = blend(t2_table(), request("Geographies", "Pays", D, "Etat", D, "Pays = 'Bresil'"), c);
    a = blend(a, request("Geographies", "Continent", D, "Pays_Etat", D, "Continent = 'Asie'"), c);
    MTable b = blend(t2_table(), request("Geographies", "Continent", D, "Pays", D, "Continent = 'Asie'"), c);
    b = blend(b, request("Geographies", "Continent_Pays", D, "Etat", D, "Pays = 'Bresil'"), c);
    o.require(evaluate(a, c) != evaluate(b, c), "swapped order gave equal grids");
    if (o.pass) o.detail = fmt::format("{} chains valid; swapped-order witness differs", chains);
    return o;
}

Outcome stamp_cardinality() {
    Outcome o;
    std::mt19937_64 rng(12);
    const auto sets = generated();
    std::map<std::pair<Stamp, Stamp>, int> seen;
    for (int i = 0; i < 400; ++i) {
        const Constellation& c = *sets[i % sets.size()];
        const MTable t = random_table(c, rng);
        const auto r = random_blend(t, c, "Geographies", rng);
        if (!r) continue;
        MTable out;
        try {
            out = blend(t, *r, c);
        } catch (const ConstraintViolation&) {
            continue;
        }
        const long delta = static_cast<long>(out.columns.displayed.size()) - static_cast<long>(t.columns.displayed.size());
        const long expected = r->s_sup == D && r->s_inf == D ? -1 : r->s_sup == Stamp::Keep && r->s_inf == Stamp::Keep ? 1 : 0;
        o.require(delta == expected, "wrong delta");
        ++seen[{r->s_sup, r->s_inf}];
    }
    o.require(seen.size() == 4, "not every scenario exercised");
    if (o.pass) {
        o.detail = fmt::format("a={} b={} c={} d={} requests with deltas -1/0/0/+1", seen[{D, D}], seen[{Stamp::Keep, D}],
                               seen[{D, Stamp::Keep}], seen[{Stamp::Keep, Stamp::Keep}]);
    }
    return o;
}

Outcome sql_structure() {
    Outcome o;
    const Constellation& c = sample();
    const MTable first = blend(t2_table(), request("Geographies", "Pays", D, "Etat", D, "Pays <> 'Etats-Unis'"), c);
    const std::string q1 = generate_blend_query(first, c, {"T2"}).text();
    const std::string q2 = generate_blend_query(t3_table(), c, {"T2"}).text();
    o.require(q1 == read_text(golden_dir() / "blend_pays_etat.sql"), "first blend golden");
    o.require(q2 == read_text(golden_dir() / "blend_continent_pays_etat.sql"), "second blend golden");
    o.require(q1.find("UNION ALL") != std::string::npos && q1.find("WHERE NOT (pays <> 'Etats-Unis')") != std::string::npos,
              "complementary branch");
    o.require(q2.find("AS continent_pays_etat") != std::string::npos && q1.find("AS pays_etat") != std::string::npos, "aliases");
    std::string engine = "skipped (BLENDCUBE_DB_URL unset)";
    if (const char* url = std::getenv("BLENDCUBE_DB_URL")) {
        SqlEngine db(url);
        db.load(c);
        for (const MTable* t : {&first, static_cast<const MTable*>(nullptr)}) {
            const MTable table = t ? *t : t3_table();
            const Grid g = evaluate(table, c);
            o.require(grid_from_rows(g, db.query(generate_query(table, c).text())) == g, "engine result differs");
        }
        engine = "engine results equal";
    }
    if (o.pass) o.detail = "goldens equal; " + engine;
    return o;
}

Outcome bench() {
    Outcome o;
    BenchConfig config;
    config.sizes = parse_sizes("10:100:10");
    config.organisms = 250;
    config.reps = 5;
    const auto start = Clock::now();
    const BenchReport report = run_bench(config);
    const double s = seconds_since(start);
    bool equal = true;
    std::string trend;
    for (const auto& r : report.results) {
        equal = equal && r.grids_equal;
        trend += fmt::format("{}{}:{:.1f}%", trend.empty() ? "" : " ", r.n_geo, r.overhead_pct);
    }
    o.require(s < 300, "sweep slower than 5 min");
    o.require(equal, "grids differ");
    o.require(report.spearman <= 0, fmt::format("overhead trend not non-increasing (Spearman {:.2f})", report.spearman));
    o.detail = fmt::format("{}{}{:.1f} s, grids {}, Spearman {:.2f}, overhead {}", o.detail, o.detail.empty() ? "" : "; ", s,
                           equal ? "equal" : "differ", report.spearman, trend);
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"golden-t2", golden_t2},
        {"golden-t3", golden_t3},
        {"e-set-fixtures", e_sets},
        {"validity-constraint", validity_constraint},
        {"conservation", conservation},
        {"closure-non-commutativity", closure},
        {"stamp-cardinality", stamp_cardinality},
        {"sql-structure", sql_structure},
        {"bench", bench},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failures;
}
