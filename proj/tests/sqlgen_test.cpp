#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

#include "blendcube/errors.hpp"
#include "blendcube/sql_engine.hpp"
#include "blendcube/sqlgen.hpp"
#include "support.hpp"

using namespace blendcube;
using namespace blendcube::test;

namespace {

const Stamp D = Stamp::Drop;

MTable first_blend() {
    return blend(t2_table(), request("Geographies", "Pays", D, "Etat", D, "Pays <> 'Etats-Unis'"), sample());
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

const char* db_url() { return std::getenv("BLENDCUBE_DB_URL"); }

// The detail relation a stored T2 would hold: one row per fact with both axis dimensions' columns.
const char* kT2View =
    "CREATE VIEW T2 AS SELECT REPARTITION.superficie, GEOGRAPHIES.id_geographies, GEOGRAPHIES.parcelle, "
    "GEOGRAPHIES.etat, GEOGRAPHIES.region, GEOGRAPHIES.pays, GEOGRAPHIES.densite, GEOGRAPHIES.continent, "
    "ORGANISMES.id_organismes, ORGANISMES.variete, ORGANISMES.categorie, ORGANISMES.typeorganisme "
    "FROM REPARTITION JOIN GEOGRAPHIES ON REPARTITION.id_geographies = GEOGRAPHIES.id_geographies "
    "JOIN ORGANISMES ON REPARTITION.id_organismes = ORGANISMES.id_organismes";

}  // namespace

TEST(Ddl, StarSchemaGolden) {
    const SqlArtifact ddl = generate_star_ddl(sample());
    EXPECT_EQ(ddl.kind, SqlKind::Ddl);
    EXPECT_EQ(ddl.statements.size(), 4u);
    EXPECT_EQ(ddl.text(), read_text(golden_dir() / "ddl.sql"));
    const std::string geo = ddl.statements[2];
    std::vector<std::string> columns;
    const std::regex col(R"(\n  (\w+) )");
    for (std::sregex_iterator it(geo.begin(), geo.end(), col), end; it != end; ++it) columns.push_back((*it)[1]);
    EXPECT_EQ(columns, (std::vector<std::string>{"id_geographies", "parcelle", "etat", "region", "pays", "densite", "continent"}));
}

TEST(Ddl, OneFactOneDimension) {
    const char* schema = R"({"name": "S", "dimensions": [{"name": "D", "table": "D", "attributes": [{"name": "A"}],
        "hierarchies": [{"name": "H", "params": ["A"]}]}],
        "facts": [{"name": "F", "table": "F", "measures": [{"name": "M"}], "links": [{"dimension": "D", "foreign_key": "id_d"}]}]})";
    const Constellation c = parse_schema(schema);
    EXPECT_EQ(generate_star_ddl(c).statements.size(), 2u);
}

TEST(TmQuery, T2Golden) {
    const SqlArtifact q = generate_tm_query(t2_table(), sample());
    EXPECT_EQ(q.kind, SqlKind::TmQuery);
    EXPECT_EQ(q.text(), read_text(golden_dir() / "tm_t2.sql"));
    EXPECT_NE(q.text().find("GROUP BY GEOGRAPHIES.continent, GEOGRAPHIES.pays, GEOGRAPHIES.etat"), std::string::npos);
    EXPECT_NE(q.text().find("ORGANISMES.variete;"), std::string::npos);
}

TEST(TmQuery, SingleParamAxes) {
    const Constellation& c = sample();
    const MTable t1 = display(c, "Repartition", {{Aggregation::Sum, "Superficie"}}, {"Organismes", ""}, {"Geographies", ""});
    const std::string text = generate_tm_query(t1, c).text();
    EXPECT_NE(text.find("GROUP BY GEOGRAPHIES.continent, ORGANISMES.typeorganisme;"), std::string::npos);
    EXPECT_THROW(generate_tm_query(first_blend(), c), OperatorError);
}

TEST(TmQuery, RestrictionAndAggregates) {
    const Constellation& c = sample();
    MTable t = display(c, "Repartition", {{Aggregation::Avg, "Superficie"}, {Aggregation::Count, "Superficie"}},
                       {"Organismes", ""}, {"Geographies", ""});
    t = restrict_table(t, c, "Geographies", parse_predicate("Densité > 25 AND NOT (Pays = 'Inde')"));
    const std::string text = generate_tm_query(t, c).text();
    EXPECT_NE(text.find("AVG(REPARTITION.superficie) AS avg_superficie"), std::string::npos);
    EXPECT_NE(text.find("COUNT(REPARTITION.superficie) AS count_superficie"), std::string::npos);
    EXPECT_NE(text.find("WHERE GEOGRAPHIES.densite > 25 AND NOT (GEOGRAPHIES.pays = 'Inde')"), std::string::npos);
}

TEST(BlendQuery, PaysEtatBlendGolden) {
    const SqlArtifact q = generate_blend_query(first_blend(), sample(), {"T2"});
    EXPECT_EQ(q.kind, SqlKind::BlendQuery);
    const std::string text = q.text();
    EXPECT_EQ(text, read_text(golden_dir() / "blend_pays_etat.sql"));
    EXPECT_EQ(count(text, "UNION ALL"), 1u);
    EXPECT_NE(text.find("pays AS pays_etat\n  FROM T2\n  WHERE pays <> 'Etats-Unis'"), std::string::npos);
    EXPECT_NE(text.find("etat AS pays_etat\n  FROM T2\n  WHERE NOT (pays <> 'Etats-Unis')"), std::string::npos);
    EXPECT_NE(text.find("SELECT SUM(superficie) AS superficie, continent, pays_etat, typeorganisme, variete"), std::string::npos);
    EXPECT_NE(text.find("GROUP BY continent, pays_etat, typeorganisme, variete;"), std::string::npos);
}

TEST(BlendQuery, ContinentPaysEtatBlendGolden) {
    const std::string text = generate_blend_query(t3_table(), sample(), {"T2"}).text();
    EXPECT_EQ(text, read_text(golden_dir() / "blend_continent_pays_etat.sql"));
    EXPECT_EQ(count(text, "UNION ALL"), 2u);
    EXPECT_NE(text.find("continent AS continent_pays_etat\n  FROM blend_1\n  WHERE continent = 'Asie'"), std::string::npos);
    EXPECT_NE(text.find("pays_etat AS continent_pays_etat\n  FROM blend_1\n  WHERE NOT (continent = 'Asie')"), std::string::npos);
    EXPECT_NE(text.find("GROUP BY continent_pays_etat, typeorganisme, variete;"), std::string::npos);
    EXPECT_EQ(text, generate_blend_query(t3_table(), sample(), {"T2"}).text());
}

TEST(BlendQuery, TruePredicateBranch) {
    const MTable t = blend(t2_table(), request("Geographies", "Pays", D, "Etat", D, "TRUE"), sample());
    const std::string text = generate_query(t, sample()).text();
    EXPECT_NE(text.find("WHERE 1 = 1\n"), std::string::npos);
    EXPECT_NE(text.find("WHERE NOT (1 = 1)\n"), std::string::npos);
}

TEST(BlendQuery, BranchesAreComplementaryForRandomRequests) {
    std::mt19937_64 rng(3);
    const Constellation& c = sample();
    const std::regex where(R"(\n  WHERE (.*)\n  UNION ALL\n[^\n]*\n[^\n]*\n  WHERE (.*)\n)");
    int checked = 0;
    for (int i = 0; i < 200; ++i) {
        const auto r = random_blend(t2_table(), c, "Geographies", rng);
        MTable t;
        try {
            t = blend(t2_table(), *r, c);
        } catch (const ConstraintViolation&) {
            continue;
        }
        const std::string text = generate_query(t, c).text();
        std::smatch m;
        ASSERT_TRUE(std::regex_search(text, m, where)) << text;
        EXPECT_EQ(m[2].str(), "NOT (" + m[1].str() + ")");
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Quoting, IdentifiersAndLiterals) {
    EXPECT_EQ(quote_identifier("pays_etat"), "pays_etat");
    EXPECT_EQ(quote_identifier("group"), "\"group\"");
    EXPECT_EQ(quote_identifier("a b"), "\"a b\"");
    EXPECT_EQ(quote_literal(Value("O'Hare")), "'O''Hare'");
    EXPECT_EQ(quote_literal(Value(21.6)), "21.6");
    EXPECT_EQ(to_string(SqlKind::BlendQuery), "blend-query");
}

// External-engine harness: runs only when BLENDCUBE_DB_URL is set.
class Engine : public ::testing::Test {
protected:
    void SetUp() override {
        if (!db_url()) GTEST_SKIP() << "BLENDCUBE_DB_URL not set";
    }

    static void expect_same(SqlEngine& db, const MTable& t, const Constellation& c, const SqlSource& source = {}) {
        const Grid expected = evaluate(t, c);
        const auto rows = db.query(generate_query(t, c, source).text());
        EXPECT_EQ(grid_from_rows(expected, rows), expected);
    }
};

TEST_F(Engine, DdlAcceptsSampleRows) {
    SqlEngine db(db_url());
    db.load(sample());
    const auto n = db.query("SELECT COUNT(*) FROM REPARTITION;");
    EXPECT_EQ(n.at(0).at(0), Value(static_cast<double>(sample().facts[0].instances.size())));
    const auto g = db.query("SELECT COUNT(*) FROM GEOGRAPHIES WHERE densite > 300;");
    EXPECT_EQ(g.at(0).at(0), Value(3.0));
}

TEST_F(Engine, TmAndBlendChainQueriesMatchEvaluate) {
    SqlEngine db(db_url());
    db.load(sample());
    db.execute(kT2View);
    expect_same(db, t2_table(), sample());
    expect_same(db, first_blend(), sample());
    expect_same(db, t3_table(), sample());
    expect_same(db, first_blend(), sample(), {"T2"});
    expect_same(db, t3_table(), sample(), {"T2"});
    const auto rows = db.query(read_text(golden_dir() / "blend_continent_pays_etat.sql"));
    const Grid t3 = evaluate(t3_table(), sample());
    EXPECT_EQ(grid_from_rows(t3, rows), t3);
}

TEST_F(Engine, RandomBlendChainsMatchEvaluate) {
    std::mt19937_64 rng(17);
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto c = small_dataset(seed, 12);
        SqlEngine db(db_url());
        db.load(*c);
        for (int i = 0; i < 25; ++i) {
            MTable t = t2_table(*c);
            if (rng() % 2) t = drilldown(t, *c, "Geographies", "Parcelle");
            if (rng() % 3 == 0) t = restrict_table(t, *c, "Geographies", parse_predicate(random_predicate(c->dimension("Geographies"), rng)));
            if (rng() % 3 == 0) t = restrict_table(t, *c, "Dates", parse_predicate("Id <> 'zzz'"));
            for (int step = 0; step < 1 + static_cast<int>(rng() % 3); ++step) {
                const std::string dim = rng() % 3 ? "Geographies" : "Organismes";
                auto r = random_blend(t, *c, dim, rng);
                if (!r) continue;
                try {
                    t = blend(t, *r, *c);
                } catch (const ConstraintViolation&) {
                }
            }
            expect_same(db, t, *c);
            ++checked;
        }
    }
    EXPECT_EQ(checked, 100);
}
