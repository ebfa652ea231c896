#include <gtest/gtest.h>

#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "blendcube/errors.hpp"
#include "blendcube/service.hpp"
#include "support.hpp"

using namespace blendcube;
using namespace blendcube::test;
using json = nlohmann::json;

namespace {

const json kDisplay = {{"op", "display"},
                       {"fact", "Repartition"},
                       {"measures", {{{"function", "SUM"}, {"measure", "Superficie"}}}},
                       {"lines", "Organismes"},
                       {"columns", "Geographies"}};

json drill(const std::string& dim, const std::string& param) {
    return {{"op", "drilldown"}, {"dimension", dim}, {"param", param}};
}

json blend_op(const std::string& sup, const std::string& inf, const std::string& pred) {
    return {{"op", "blend"}, {"dimension", "Geographies"}, {"p_sup", sup}, {"s_sup", "-"},
            {"p_inf", inf},  {"s_inf", "-"},               {"pred", pred}};
}

struct Client {
    Service& service;
    std::string id;

    explicit Client(Service& s, const std::string& body = "{}") : service(s) {
        const HttpResponse r = service.handle("POST", "/sessions", body);
        EXPECT_EQ(r.status, 201) << r.body;
        if (r.status == 201) id = json::parse(r.body).at("session_id");
    }

    HttpResponse op(const json& descriptor) { return service.handle("POST", "/sessions/" + id + "/ops", descriptor.dump()); }
    HttpResponse get(const std::string& tail) { return service.handle("GET", "/sessions/" + id + "/" + tail, ""); }

    void t2() {
        for (const json& d : {kDisplay, drill("Organismes", "Variete"), drill("Geographies", "Pays"), drill("Geographies", "Etat")}) {
            ASSERT_EQ(op(d).status, 200);
        }
    }
};

std::vector<std::string> keys(const json& axis) {
    std::vector<std::string> out;
    for (const auto& k : axis.at("keys")) out.push_back(k.back().get<std::string>());
    return out;
}

}  // namespace

TEST(Service, SessionLifecycle) {
    Service s;
    Client c(s);
    EXPECT_EQ(s.session_count(), 1u);
    EXPECT_EQ(c.get("table").status, 400);
    c.t2();
    const json doc = json::parse(c.get("table").body);
    EXPECT_EQ(doc.at("version"), kGridDocumentVersion);
    EXPECT_EQ(doc.at("columns").at("displayed"), json({"Continent", "Pays", "Etat"}));
    EXPECT_EQ(keys(doc.at("columns")), (std::vector<std::string>{"Golap", "Iowa", "Minnesota", "Maharashtra", "Penjnb", "Rajasthan"}));
    EXPECT_EQ(s.handle("DELETE", "/sessions/" + c.id, "").status, 200);
    EXPECT_EQ(c.get("table").status, 404);
    EXPECT_EQ(s.session_count(), 0u);
}

TEST(Service, ErrorStatuses) {
    Service s;
    EXPECT_EQ(s.handle("GET", "/nowhere", "").status, 404);
    EXPECT_EQ(s.handle("GET", "/sessions/feed/table", "").status, 404);
    EXPECT_EQ(s.handle("GET", "/sessions", "").status, 405);
    EXPECT_EQ(s.handle("POST", "/sessions", "{").status, 400);
    EXPECT_EQ(s.handle("POST", "/sessions", R"({"dataset": "missing"})").status, 400);
    Client c(s);
    EXPECT_EQ(c.get("bogus").status, 404);
    EXPECT_EQ(c.op({{"op", "undo"}}).status, 400);
    EXPECT_EQ(json::parse(c.op({{"op", "undo"}}).body).at("error"), "nothing to undo");
    EXPECT_EQ(c.op({{"op", "frobnicate"}}).status, 400);
    EXPECT_EQ(c.op(drill("Geographies", "Pays")).status, 400);
    c.t2();

    const HttpResponse parse = c.op(blend_op("Pays", "Etat", "Pays <> "));
    EXPECT_EQ(parse.status, 400);
    EXPECT_EQ(json::parse(parse.body).at("column"), 9);

    const HttpResponse violation = c.op(blend_op("Pays", "Etat", "Etat = 'Iowa'"));
    EXPECT_EQ(violation.status, 422);
    EXPECT_EQ(json::parse(violation.body).at("offending_values"), json({"Etats-Unis"}));

    const HttpResponse unknown = c.op(blend_op("Pays", "Etat", "Variete = 'x'"));
    EXPECT_EQ(unknown.status, 400);
    EXPECT_EQ(json::parse(c.get("log").body).at("log").size(), 4u);
}

TEST(Service, NonStrictBlendLevelIsConflict) {
    Constellation c = sample();
    Dimension& g = *c.find_dimension("Geographies");
    const std::size_t etat = g.attribute_index("Etat");
    for (auto& row : g.instances) {
        if (row[0].str() == "g3") row[etat] = Value("Inde");
    }
    const auto dir = std::filesystem::temp_directory_path() / "blendcube-service-nonstrict";
    std::filesystem::remove_all(dir);
    write_dataset(*seal(c), dir);

    ServiceOptions o;
    o.data_dir = dir.parent_path();
    Service s(o);
    Client client(s, json{{"dataset", dir.filename().string()}}.dump());
    client.t2();
    ASSERT_EQ(client.op(blend_op("Pays", "Etat", "Pays = 'Inde'")).status, 200);
    const HttpResponse r = client.op(blend_op("Continent", "Pays_Etat", "Continent = 'Asie'"));
    EXPECT_EQ(r.status, 409) << r.body;
    const json body = json::parse(r.body);
    EXPECT_EQ(body.at("from"), "Pays_Etat");
    EXPECT_EQ(body.at("to"), "Continent");
    EXPECT_EQ(body.at("value"), "Inde");
}

TEST(Service, BlendChainDocument) {
    Service s;
    Client c(s);
    c.t2();
    ASSERT_EQ(c.op(blend_op("Pays", "Etat", "Pays <> 'Etats-Unis'")).status, 200);
    ASSERT_EQ(c.op(blend_op("Continent", "Pays_Etat", "Continent = 'Asie'")).status, 200);
    // Same restriction as the bundled script.
    const HttpResponse r = c.op({{"op", "restrict"},
                                 {"dimension", "Organismes"},
                                 {"pred", "Variete <> 'Mais Doux' AND Variete <> 'MCN810'"}});
    ASSERT_EQ(r.status, 200) << r.body;
    const json doc = json::parse(r.body);
    EXPECT_EQ(doc.at("columns").at("displayed"), json({"Continent_Pays_Etat"}));
    EXPECT_EQ(doc.at("cells"), json::parse("[[[1800.0],[500.0],[200.0],[250.0]],[[500.0],[400.0],[1500.0],[2500.0]],"
                                           "[[1700.0],[200.0],[null],[1500.0]]]"));
    EXPECT_EQ(keys(doc.at("columns")), (std::vector<std::string>{"Asie", "Bresil", "Iowa", "Minnesota"}));
    const json& b = doc.at("columns").at("blends").back();
    EXPECT_EQ(b.at("e_sup"), json({"Asie"}));
    EXPECT_EQ(b.at("e_inf"), json({"Bresil", "Iowa", "Minnesota"}));

    const auto golden = golden_dir() / "t3.json";
    if (std::getenv("BLENDCUBE_UPDATE_GOLDEN")) std::ofstream(golden) << doc.dump(2) << "\n";
    EXPECT_EQ(doc, json::parse(read_text(golden)));

    const json sql = json::parse(c.get("sql").body);
    EXPECT_EQ(sql.at("kind"), "blend-query");
    EXPECT_EQ(json::parse(c.get("schema").body).at("name"), sample().name);
}

TEST(Service, UndoAndReplay) {
    Service s;
    Client c(s);
    c.t2();
    const std::string t2 = c.get("table").body;
    ASSERT_EQ(c.op(blend_op("Pays", "Etat", "Pays <> 'Etats-Unis'")).status, 200);
    ASSERT_EQ(c.op({{"op", "restrict"}, {"dimension", "Organismes"}, {"pred", "Variete <> 'MCN810'"}}).status, 200);
    ASSERT_EQ(c.op({{"op", "rotate"}, {"dimension", "Organismes"}, {"new_dimension", "Dates"}}).status, 200);

    const json log = json::parse(c.get("log").body).at("log");
    std::vector<Command> commands;
    for (const auto& d : log) {
        commands.push_back(command_from_descriptor(d));
        EXPECT_EQ(descriptor_from_command(commands.back()), d);
    }
    const MTable replayed = replay(commands, sample());
    EXPECT_EQ(grid_document(evaluate(replayed, sample()), replayed), json::parse(c.get("table").body));

    for (int i = 0; i < 3; ++i) ASSERT_EQ(c.op({{"op", "undo"}}).status, 200);
    EXPECT_EQ(c.get("table").body, t2);
    for (int i = 0; i < 4; ++i) ASSERT_EQ(c.op({{"op", "undo"}}).status, 200);
    EXPECT_EQ(c.op({{"op", "undo"}}).status, 400);
}

TEST(Service, IdleSessionsExpire) {
    ServiceOptions o;
    o.session_ttl = std::chrono::seconds(10);
    Service s(o);
    Client a(s), b(s);
    EXPECT_NE(a.id, b.id);
    EXPECT_EQ(s.expire_idle(std::chrono::steady_clock::now()), 0u);
    EXPECT_EQ(s.expire_idle(std::chrono::steady_clock::now() + std::chrono::seconds(11)), 2u);
    EXPECT_EQ(s.session_count(), 0u);
}

TEST(Service, DescriptorValidation) {
    EXPECT_THROW(command_from_descriptor(json::array()), OperatorError);
    EXPECT_THROW(command_from_descriptor({{"op", "blend"}, {"dimension", "Geographies"}}), OperatorError);
    json bad = blend_op("Pays", "Etat", "TRUE");
    bad["s_sup"] = "*";
    EXPECT_THROW(command_from_descriptor(bad), OperatorError);
    EXPECT_THROW(command_from_descriptor({{"op", "display"}, {"fact", "Repartition"}, {"measures", json::array()}}), OperatorError);
    const Command c = command_from_descriptor(blend_op("Pays", "Etat", "Pays <> 'Etats-Unis'"));
    EXPECT_EQ(c.blend, request("Geographies", "Pays", Stamp::Drop, "Etat", Stamp::Drop, "Pays <> 'Etats-Unis'"));
}

TEST(HttpServer, ServesJsonOverLoopback) {
    Service s;
    HttpServer server(s);
    const int port = server.bind("127.0.0.1", 0);
    ASSERT_GT(port, 0);
    std::thread thread([&] { server.listen(); });
    httplib::Client client("127.0.0.1", port);
    auto created = client.Post("/sessions", "{}", "application/json");
    ASSERT_TRUE(created);
    EXPECT_EQ(created->status, 201);
    const std::string id = json::parse(created->body).at("session_id");
    auto shown = client.Post("/sessions/" + id + "/ops", kDisplay.dump(), "application/json");
    ASSERT_TRUE(shown);
    EXPECT_EQ(shown->status, 200);
    EXPECT_EQ(shown->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_EQ(json::parse(shown->body).at("fact"), "Repartition");
    auto missing = client.Get("/sessions/none/table");
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    server.stop();
    thread.join();
}
