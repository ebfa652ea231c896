#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "blendcube/algebra.hpp"
#include "blendcube/ingest.hpp"
#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"

namespace blendcube::test {

inline std::filesystem::path source_dir() { return BLENDCUBE_SOURCE_DIR; }
inline std::filesystem::path golden_dir() { return source_dir() / "tests" / "golden"; }

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline const Constellation& sample() {
    static const auto c = sample_constellation();
    return *c;
}

inline BlendRequest request(std::string dim, std::string p_sup, Stamp s_sup, std::string p_inf, Stamp s_inf,
                            const std::string& pred) {
    return BlendRequest{std::move(dim), std::move(p_sup), s_sup, std::move(p_inf), s_inf, parse_predicate(pred)};
}

// DISPLAY then drill Organismes to Variete and Geographies to Pays, Etat.
inline MTable t2_table(const Constellation& c = sample()) {
    MTable t = display(c, "Repartition", {{Aggregation::Sum, "Superficie"}}, {"Organismes", ""}, {"Geographies", ""});
    t = drilldown(t, c, "Organismes", "Variete");
    t = drilldown(t, c, "Geographies", "Pays");
    return drilldown(t, c, "Geographies", "Etat");
}

inline MTable t3_table(const Constellation& c = sample()) {
    MTable t = blend(t2_table(c), request("Geographies", "Pays", Stamp::Drop, "Etat", Stamp::Drop, "Pays <> 'Etats-Unis'"), c);
    return blend(t, request("Geographies", "Continent", Stamp::Drop, "Pays_Etat", Stamp::Drop, "Continent = 'Asie'"), c);
}

// Independent oracle: SUM of the first measure over fact rows whose linked instances satisfy
// every (dimension, attribute, value) condition.
struct Condition {
    std::string dimension;
    std::string attribute;
    Value value;
};

inline std::optional<double> brute_sum(const Constellation& c, const std::string& fact,
                                       const std::vector<Condition>& conditions) {
    const Fact& f = c.fact(fact);
    std::optional<double> total;
    for (const auto& inst : f.instances) {
        bool ok = true;
        for (const auto& cond : conditions) {
            const Dimension& d = c.dimension(cond.dimension);
            const std::size_t link = *f.find_link(cond.dimension);
            const std::size_t attr = d.attribute_index(cond.attribute);
            const auto& row = *std::find_if(d.instances.begin(), d.instances.end(),
                                            [&](const auto& r) { return r[0].str() == inst.refs[link]; });
            if (row[attr] != cond.value) ok = false;
        }
        if (ok) total = total.value_or(0) + inst.measures[0];
    }
    return total;
}

inline double grand_total(const Grid& g, std::size_t measure = 0) {
    double sum = 0;
    for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t col = 0; col < g.cols(); ++col) {
            if (auto v = g.cell(r, col, measure)) sum += *v;
        }
    }
    return sum;
}

inline double fact_total(const Constellation& c, const std::string& fact) {
    double sum = 0;
    for (const auto& inst : c.fact(fact).instances) sum += inst.measures[0];
    return sum;
}

// Small generated star with the same shape as the benchmark data.
inline std::shared_ptr<const Constellation> small_dataset(std::uint64_t seed, std::size_t n_geo,
                                                          Skew skew = Skew::Homogeneous) {
    BenchOptions o;
    o.n_geo = n_geo;
    o.seed = seed;
    o.organisms = 6;
    o.skew = skew;
    o.allow_any_size = true;
    return generate_bench_dataset(o).constellation;
}

// A random comparison over a random attribute of d, literal drawn from its domain.
inline std::string random_predicate(const Dimension& d, std::mt19937_64& rng) {
    static const char* ops[] = {"=", "<>", "<", ">", "<=", ">="};
    auto one = [&] {
        std::uniform_int_distribution<std::size_t> pick_attr(1, d.attributes.size() - 2);
        const Attribute& a = d.attributes[pick_attr(rng)];
        std::uniform_int_distribution<std::size_t> pick_row(0, d.size() - 1);
        const Value& v = d.instances[pick_row(rng)][d.attribute_index(a.name)];
        std::uniform_int_distribution<int> pick_op(0, 5);
        const std::string lit = v.is_text() ? "'" + v.text() + "'" : v.str();
        return a.name + " " + ops[pick_op(rng)] + " " + lit;
    };
    std::uniform_int_distribution<int> shape(0, 5);
    switch (shape(rng)) {
    case 0: return one() + " AND " + one();
    case 1: return one() + " OR " + one();
    case 2: return "NOT (" + one() + ")";
    default: return one();
    }
}

// A random request over an adjacent displayed pair of the axis, or nullopt if none exists.
inline std::optional<BlendRequest> random_blend(const MTable& t, const Constellation& c, const std::string& dim,
                                                std::mt19937_64& rng) {
    const AxisSpec& axis = t.axis(dim);
    if (axis.displayed.size() < 2) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, axis.displayed.size() - 2);
    const std::size_t i = pick(rng);
    std::bernoulli_distribution coin(0.5);
    BlendRequest r;
    r.dimension = dim;
    r.p_sup = axis.displayed[i];
    r.p_inf = axis.displayed[i + 1];
    r.s_sup = coin(rng) ? Stamp::Keep : Stamp::Drop;
    r.s_inf = coin(rng) ? Stamp::Keep : Stamp::Drop;
    r.pred = parse_predicate(random_predicate(c.dimension(dim), rng));
    return r;
}

}  // namespace blendcube::test
