#include "blendcube/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "blendcube/algebra.hpp"
#include "blendcube/errors.hpp"

namespace blendcube {

using nlohmann::json;

std::vector<std::vector<std::string>> parse_csv(std::string_view text, const std::string& source) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t i = 0;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // UTF-8 BOM
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        const bool blank = row.empty() && field.empty() && !field_started;
        end_field();
        if (!blank) rows.push_back(std::move(row));
        row.clear();
    };
    for (; i < text.size(); ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (field_started) throw IoError(source + ":" + std::to_string(line) + ": stray quote inside field");
            quoted = true;
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            ++line;
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (quoted) throw IoError(source + ": unterminated quoted field");
    if (!field.empty() || !row.empty()) end_row();
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string upper(std::string_view s) {
    std::string out(s);
    for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

struct SchemaReader {
    std::vector<std::string> problems;

    const json* member(const json& j, const char* key, const std::string& at, bool required = true) {
        if (!j.is_object()) {
            problems.push_back(at + ": expected an object");
            return nullptr;
        }
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) problems.push_back(at + "." + key + ": missing");
            return nullptr;
        }
        return &*it;
    }

    std::string text(const json& j, const char* key, const std::string& at, bool required = true) {
        const json* v = member(j, key, at, required);
        if (!v) return {};
        if (!v->is_string() || v->get<std::string>().empty()) {
            problems.push_back(at + "." + key + ": expected a non-empty string");
            return {};
        }
        return v->get<std::string>();
    }

    const json* array(const json& j, const char* key, const std::string& at, bool required = true) {
        const json* v = member(j, key, at, required);
        if (v && !v->is_array()) {
            problems.push_back(at + "." + key + ": expected a list");
            return nullptr;
        }
        return v;
    }
};

}  // namespace

Constellation parse_schema(std::string_view json_text, const std::string& source) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, column = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                column = 1;
            } else {
                ++column;
            }
        }
        throw ValidationError({source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + e.what()},
                              "schema parse error in " + source + " at line " + std::to_string(line) + ", column " +
                                  std::to_string(column));
    }

    SchemaReader rd;
    Constellation c;
    c.name = rd.text(root, "name", "schema");

    if (const json* dims = rd.array(root, "dimensions", "schema")) {
        for (std::size_t di = 0; di < dims->size(); ++di) {
            const json& jd = (*dims)[di];
            const std::string at = "dimensions[" + std::to_string(di) + "]";
            Dimension d = Dimension::make(rd.text(jd, "name", at), rd.text(jd, "table", at, false));
            if (const json* attrs = rd.array(jd, "attributes", at)) {
                for (std::size_t ai = 0; ai < attrs->size(); ++ai) {
                    const json& ja = (*attrs)[ai];
                    const std::string aat = at + ".attributes[" + std::to_string(ai) + "]";
                    Attribute a;
                    a.name = rd.text(ja, "name", aat);
                    a.column = rd.text(ja, "column", aat, false);
                    const std::string type = rd.text(ja, "type", aat, false);
                    if (type == "decimal") {
                        a.type = ValueType::Decimal;
                    } else if (!type.empty() && type != "text") {
                        rd.problems.push_back(aat + ".type: expected 'text' or 'decimal'");
                    }
                    if (a.name == kIdAttribute || a.name == kAllAttribute) {
                        rd.problems.push_back(aat + ".name: '" + a.name + "' is implicit");
                    } else if (!a.name.empty()) {
                        if (d.find_attribute(a.name)) rd.problems.push_back(aat + ".name: duplicate '" + a.name + "'");
                        d.add_attribute(std::move(a));
                    }
                }
            }
            if (const json* hs = rd.array(jd, "hierarchies", at)) {
                for (std::size_t hi = 0; hi < hs->size(); ++hi) {
                    const json& jh = (*hs)[hi];
                    const std::string hat = at + ".hierarchies[" + std::to_string(hi) + "]";
                    Hierarchy h;
                    h.name = rd.text(jh, "name", hat);
                    if (const json* params = rd.array(jh, "params", hat)) {
                        for (std::size_t pi = 0; pi < params->size(); ++pi) {
                            const json& jp = (*params)[pi];
                            const std::string pat = hat + ".params[" + std::to_string(pi) + "]";
                            if (!jp.is_string()) {
                                rd.problems.push_back(pat + ": expected a string");
                                continue;
                            }
                            const auto name = jp.get<std::string>();
                            if (!d.find_attribute(name)) {
                                rd.problems.push_back(pat + ": unknown attribute '" + name + "'");
                            }
                            h.params.push_back(name);
                        }
                    }
                    if (h.params.empty() || h.params.front() != kIdAttribute) {
                        h.params.insert(h.params.begin(), std::string(kIdAttribute));
                    }
                    if (h.params.back() != kAllAttribute) h.params.emplace_back(kAllAttribute);
                    if (const json* weak = rd.member(jh, "weak", hat, false)) {
                        if (!weak->is_object()) {
                            rd.problems.push_back(hat + ".weak: expected an object");
                        } else {
                            for (const auto& [param, list] : weak->items()) {
                                const std::string wat = hat + ".weak." + param;
                                if (!list.is_array()) {
                                    rd.problems.push_back(wat + ": expected a list");
                                    continue;
                                }
                                for (const auto& w : list) {
                                    if (!w.is_string() || !d.find_attribute(w.get<std::string>())) {
                                        rd.problems.push_back(wat + ": unknown attribute " + w.dump());
                                        continue;
                                    }
                                    h.weak[param].push_back(w.get<std::string>());
                                }
                            }
                        }
                    }
                    d.hierarchies.push_back(std::move(h));
                }
            }
            c.dimensions.push_back(std::move(d));
        }
    }

    if (const json* facts = rd.array(root, "facts", "schema")) {
        for (std::size_t fi = 0; fi < facts->size(); ++fi) {
            const json& jf = (*facts)[fi];
            const std::string at = "facts[" + std::to_string(fi) + "]";
            Fact f;
            f.name = rd.text(jf, "name", at);
            f.table = rd.text(jf, "table", at, false);
            if (f.table.empty()) f.table = f.name;
            if (const json* ms = rd.array(jf, "measures", at)) {
                for (std::size_t mi = 0; mi < ms->size(); ++mi) {
                    const std::string mat = at + ".measures[" + std::to_string(mi) + "]";
                    Measure m;
                    m.name = rd.text((*ms)[mi], "name", mat);
                    m.column = rd.text((*ms)[mi], "column", mat, false);
                    if (m.column.empty()) m.column = fold_identifier(m.name);
                    const std::string agg = rd.text((*ms)[mi], "aggregation", mat, false);
                    if (!agg.empty()) {
                        if (auto a = parse_aggregation(agg)) {
                            m.function = *a;
                        } else {
                            rd.problems.push_back(mat + ".aggregation: unknown function '" + agg + "'");
                        }
                    }
                    if (f.find_measure(m.name)) rd.problems.push_back(mat + ".name: duplicate '" + m.name + "'");
                    f.measures.push_back(std::move(m));
                }
            }
            if (const json* ls = rd.array(jf, "links", at)) {
                for (std::size_t li = 0; li < ls->size(); ++li) {
                    const std::string lat = at + ".links[" + std::to_string(li) + "]";
                    FactLink link;
                    link.dimension = rd.text((*ls)[li], "dimension", lat);
                    const std::size_t before = rd.problems.size();
                    link.foreign_key = rd.text((*ls)[li], "foreign_key", lat);
                    if (rd.problems.size() != before) {
                        rd.problems.back() = lat + ".foreign_key: dangling link to '" + link.dimension +
                                             "' (no foreign-key column)";
                    }
                    if (!link.dimension.empty() && !c.find_dimension(link.dimension)) {
                        rd.problems.push_back(lat + ".dimension: unknown dimension '" + link.dimension + "'");
                    }
                    c.star[f.name].insert(link.dimension);
                    f.links.push_back(std::move(link));
                }
            }
            if (f.links.empty()) rd.problems.push_back(at + ".links: a fact needs at least one dimension");
            if (c.find_fact(f.name)) rd.problems.push_back(at + ".name: duplicate fact '" + f.name + "'");
            c.facts.push_back(std::move(f));
        }
    }

    if (rd.problems.empty()) {
        for (const auto& v : validate_constellation(c)) {
            if (v.message.find("star must link") == std::string::npos) rd.problems.push_back(to_string(v));
        }
    }
    if (!rd.problems.empty()) {
        std::string message = "invalid schema " + source + ": " + rd.problems.front();
        if (rd.problems.size() > 1) message += " (and " + std::to_string(rd.problems.size() - 1) + " more)";
        throw ValidationError(rd.problems, message);
    }
    return c;
}

Constellation load_schema(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ValidationError({path.string() + ": empty file"}, "schema parse error: '" + path.string() + "' is empty");
    }
    return parse_schema(text, path.string());
}

std::string schema_to_json(const Constellation& c) {
    json root;
    root["name"] = c.name;
    root["dimensions"] = json::array();
    for (const auto& d : c.dimensions) {
        json jd;
        jd["name"] = d.name;
        jd["table"] = d.table;
        jd["attributes"] = json::array();
        for (std::size_t a = 1; a + 1 < d.attributes.size(); ++a) {
            const auto& attr = d.attributes[a];
            json ja;
            ja["name"] = attr.name;
            ja["type"] = std::string(to_string(attr.type));
            ja["column"] = attr.column;
            jd["attributes"].push_back(ja);
        }
        jd["hierarchies"] = json::array();
        for (const auto& h : d.hierarchies) {
            json jh;
            jh["name"] = h.name;
            jh["params"] = std::vector<std::string>(h.params.begin() + 1, h.params.end() - 1);
            if (!h.weak.empty()) jh["weak"] = h.weak;
            jd["hierarchies"].push_back(jh);
        }
        root["dimensions"].push_back(jd);
    }
    root["facts"] = json::array();
    for (const auto& f : c.facts) {
        json jf;
        jf["name"] = f.name;
        jf["table"] = f.table;
        jf["measures"] = json::array();
        for (const auto& m : f.measures) {
            jf["measures"].push_back({{"name", m.name}, {"column", m.column},
                                      {"aggregation", std::string(to_string(m.function))}});
        }
        jf["links"] = json::array();
        for (const auto& l : f.links) jf["links"].push_back({{"dimension", l.dimension}, {"foreign_key", l.foreign_key}});
        root["facts"].push_back(jf);
    }
    return root.dump(2) + "\n";
}

Loader::Loader(Constellation schema) : data_(std::move(schema)) {}

std::size_t Loader::load_csv(const std::string& table, const std::filesystem::path& path) {
    return load_csv_text(table, read_file(path), path.string());
}

std::size_t Loader::load_csv_text(const std::string& table, std::string_view text, const std::string& source) {
    if (sealed_) throw Error("constellation already sealed; no more data can be loaded");
    auto rows = parse_csv(text, source);
    if (rows.empty()) throw IoError(source + ": missing header row");
    const auto& header = rows.front();
    auto column_of = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw IoError(source + ": missing column '" + name + "'");
    };
    auto check_extra = [&](const std::set<std::string>& expected) {
        for (const auto& h : header) {
            if (!expected.count(h)) throw IoError(source + ": unexpected column '" + h + "'");
        }
    };
    auto where = [&](std::size_t r) { return source + ":" + std::to_string(r + 1); };

    const std::string key = upper(table);
    for (auto& d : data_.dimensions) {
        if (upper(d.table) != key && upper(d.name) != key) continue;
        std::vector<std::size_t> index(d.attributes.size() - 1);
        std::set<std::string> expected;
        for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) {
            index[a] = column_of(d.attributes[a].column);
            expected.insert(d.attributes[a].column);
        }
        check_extra(expected);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != header.size()) {
                throw IoError(where(r) + ": expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(row.size()));
            }
            std::vector<Value> values;
            values.reserve(d.attributes.size());
            for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) {
                const std::string& raw = row[index[a]];
                if (raw.empty()) {
                    throw IoError(where(r) + ": null value for attribute '" + d.attributes[a].name + "'");
                }
                if (d.attributes[a].type == ValueType::Decimal) {
                    try {
                        values.emplace_back(parse_decimal(raw));
                    } catch (const TypeMismatchError&) {
                        throw TypeMismatchError(where(r) + ": attribute '" + d.attributes[a].name +
                                                "' expects a decimal, found '" + raw + "'");
                    }
                } else {
                    values.emplace_back(raw);
                }
            }
            values.emplace_back(std::string(kAllValue));
            d.instances.push_back(std::move(values));
        }
        return rows.size() - 1;
    }
    for (auto& f : data_.facts) {
        if (upper(f.table) != key && upper(f.name) != key) continue;
        std::set<std::string> expected;
        const std::size_t id = column_of(f.key_column());
        expected.insert(f.key_column());
        std::vector<std::size_t> fk, ms;
        for (const auto& l : f.links) {
            fk.push_back(column_of(l.foreign_key));
            expected.insert(l.foreign_key);
        }
        for (const auto& m : f.measures) {
            ms.push_back(column_of(m.column));
            expected.insert(m.column);
        }
        check_extra(expected);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            if (row.size() != header.size()) {
                throw IoError(where(r) + ": expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(row.size()));
            }
            FactInstance inst;
            inst.id = row[id];
            if (inst.id.empty()) throw IoError(where(r) + ": null fact Id");
            for (std::size_t l = 0; l < fk.size(); ++l) {
                if (row[fk[l]].empty()) throw IoError(where(r) + ": null reference to " + f.links[l].dimension);
                inst.refs.push_back(row[fk[l]]);
            }
            for (std::size_t m = 0; m < ms.size(); ++m) {
                try {
                    inst.measures.push_back(parse_decimal(row[ms[m]]));
                } catch (const TypeMismatchError&) {
                    throw TypeMismatchError(where(r) + ": measure '" + f.measures[m].name +
                                            "' expects a decimal, found '" + row[ms[m]] + "'");
                }
            }
            f.instances.push_back(std::move(inst));
        }
        return rows.size() - 1;
    }
    throw UnknownNameError("no table named '" + table + "' in schema " + data_.name);
}

std::shared_ptr<const Constellation> Loader::seal() {
    if (sealed_) throw Error("constellation already sealed");
    sealed_ = true;
    return blendcube::seal(std::move(data_));
}

std::shared_ptr<const Constellation> load_dataset(const std::filesystem::path& dir) {
    Loader loader(load_schema(dir / "schema.json"));
    const Constellation& schema = loader.pending();
    std::vector<std::string> tables;
    for (const auto& d : schema.dimensions) tables.push_back(d.table);
    for (const auto& f : schema.facts) tables.push_back(f.table);
    for (const auto& t : tables) loader.load_csv(t, dir / (t + ".csv"));
    return loader.seal();
}

void write_dataset(const Constellation& c, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file(dir / "schema.json", schema_to_json(c));
    nlohmann::ordered_json manifest;
    for (const auto& d : c.dimensions) manifest["rows"][d.table] = d.instances.size();
    for (const auto& f : c.facts) manifest["rows"][f.table] = f.instances.size();
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    for (const auto& d : c.dimensions) {
        std::string out;
        for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) {
            out += (a ? "," : "") + csv_escape(d.attributes[a].column);
        }
        out += "\n";
        for (const auto& row : d.instances) {
            for (std::size_t a = 0; a + 1 < d.attributes.size(); ++a) out += (a ? "," : "") + csv_escape(row[a].str());
            out += "\n";
        }
        write_file(dir / (d.table + ".csv"), out);
    }
    for (const auto& f : c.facts) {
        std::string out = csv_escape(f.key_column());
        for (const auto& l : f.links) out += "," + csv_escape(l.foreign_key);
        for (const auto& m : f.measures) out += "," + csv_escape(m.column);
        out += "\n";
        for (const auto& inst : f.instances) {
            out += csv_escape(inst.id);
            for (const auto& r : inst.refs) out += "," + csv_escape(r);
            for (double v : inst.measures) out += "," + format_number(v);
            out += "\n";
        }
        write_file(dir / (f.table + ".csv"), out);
    }
}

// ---------------------------------------------------------------------------
// Sample dataset

namespace {

constexpr std::string_view kSampleSchema = R"({
  "name": "OGM",
  "dimensions": [
    {
      "name": "Dates",
      "table": "DATES",
      "attributes": [
        {"name": "MoisN", "type": "text", "column": "moisn"},
        {"name": "MoisL", "type": "text", "column": "moisl"},
        {"name": "Trimestre", "type": "text", "column": "trimestre"},
        {"name": "Annee", "type": "text", "column": "annee"},
        {"name": "Quadriennal", "type": "text", "column": "quadriennal"}
      ],
      "hierarchies": [
        {"name": "HTEMPS", "params": ["MoisN", "MoisL", "Trimestre", "Annee", "Quadriennal"]}
      ]
    },
    {
      "name": "Organismes",
      "table": "ORGANISMES",
      "attributes": [
        {"name": "Variete", "type": "text", "column": "variete"},
        {"name": "Categorie", "type": "text", "column": "categorie"},
        {"name": "TypeOrganisme", "type": "text", "column": "typeorganisme"}
      ],
      "hierarchies": [
        {"name": "HORG", "params": ["Variete", "Categorie", "TypeOrganisme"]}
      ]
    },
    {
      "name": "Geographies",
      "table": "GEOGRAPHIES",
      "attributes": [
        {"name": "Parcelle", "type": "text", "column": "parcelle"},
        {"name": "Etat", "type": "text", "column": "etat"},
        {"name": "Region", "type": "text", "column": "region"},
        {"name": "Pays", "type": "text", "column": "pays"},
        {"name": "Densité", "type": "decimal", "column": "densite"},
        {"name": "Continent", "type": "text", "column": "continent"}
      ],
      "hierarchies": [
        {"name": "HGEO", "params": ["Parcelle", "Etat", "Region", "Pays", "Continent"],
         "weak": {"Pays": ["Densité"]}}
      ]
    }
  ],
  "facts": [
    {
      "name": "Repartition",
      "table": "REPARTITION",
      "measures": [
        {"name": "Superficie", "column": "superficie", "aggregation": "SUM"}
      ],
      "links": [
        {"dimension": "Dates", "foreign_key": "id_dates"},
        {"dimension": "Organismes", "foreign_key": "id_organismes"},
        {"dimension": "Geographies", "foreign_key": "id_geographies"}
      ]
    }
  ]
}
)";

struct ParcelRow {
    const char* id;
    const char* parcelle;
    const char* etat;
    const char* region;
    const char* pays;
    double densite;
    const char* continent;
};

// US parcels are P1, P2, P7; every other state holds exactly one parcel.
constexpr ParcelRow kParcels[] = {
    {"g1", "P1", "Iowa", "Midwest", "Etats-Unis", 31.15, "Amerique"},
    {"g2", "P2", "Minnesota", "Midwest", "Etats-Unis", 31.15, "Amerique"},
    {"g3", "P3", "Golap", "Centre-Ouest", "Bresil", 21.60, "Amerique"},
    {"g4", "P4", "Maharashtra", "Ouest", "Inde", 300.24, "Asie"},
    {"g5", "P5", "Penjnb", "Nord", "Inde", 300.24, "Asie"},
    {"g6", "P6", "Rajasthan", "Nord", "Inde", 300.24, "Asie"},
    {"g7", "P7", "Minnesota", "Midwest", "Etats-Unis", 31.15, "Amerique"},
};

struct OrganismRow {
    const char* id;
    const char* variete;
    const char* categorie;
    const char* type;
};

constexpr OrganismRow kOrganisms[] = {
    {"o1", "GTS-Soja", "Soja OGM", "OGM"},
    {"o2", "Mais Doux", "Mais classique", "Classique"},
    {"o3", "MaisBT176", "Mais OGM", "OGM"},
    {"o4", "MCN810", "Mais OGM", "OGM"},
    {"o5", "Soja#8", "Soja classique", "Classique"},
};

struct DateRow {
    const char* id;
    const char* moisn;
    const char* moisl;
    const char* trimestre;
    const char* annee;
    const char* quadriennal;
};

constexpr DateRow kDates[] = {
    {"d1", "2008-03", "mars 2008", "2008-T1", "2008", "2008-2011"},
    {"d2", "2008-09", "septembre 2008", "2008-T3", "2008", "2008-2011"},
};

const char* organism_id(const std::string& variete) {
    for (const auto& o : kOrganisms) {
        if (variete == o.variete) return o.id;
    }
    throw Error("unknown variete " + variete);
}

}  // namespace

const std::vector<T2Cell>& t2_cells() {
    static const std::vector<T2Cell> cells = {
        {"GTS-Soja", "Golap", 400},  {"GTS-Soja", "Iowa", 1500},  {"GTS-Soja", "Minnesota", 2500},
        {"GTS-Soja", "Penjnb", 300}, {"GTS-Soja", "Rajasthan", 200},
        {"Mais Doux", "Golap", 300}, {"Mais Doux", "Minnesota", 500}, {"Mais Doux", "Maharashtra", 300},
        {"Mais Doux", "Penjnb", 1300}, {"Mais Doux", "Rajasthan", 800},
        {"MaisBT176", "Golap", 200}, {"MaisBT176", "Minnesota", 1500}, {"MaisBT176", "Maharashtra", 200},
        {"MaisBT176", "Penjnb", 900}, {"MaisBT176", "Rajasthan", 600},
        {"MCN810", "Golap", 200},    {"MCN810", "Iowa", 800},     {"MCN810", "Minnesota", 3000},
        {"MCN810", "Maharashtra", 800}, {"MCN810", "Penjnb", 800}, {"MCN810", "Rajasthan", 400},
        {"Soja#8", "Golap", 500},    {"Soja#8", "Iowa", 200},     {"Soja#8", "Minnesota", 250},
        {"Soja#8", "Maharashtra", 1000}, {"Soja#8", "Penjnb", 700}, {"Soja#8", "Rajasthan", 100},
    };
    return cells;
}

std::string sample_schema_json() {
    return std::string(kSampleSchema);
}

std::shared_ptr<const Constellation> sample_constellation() {
    Loader loader(parse_schema(kSampleSchema, "sample schema"));
    Constellation c = loader.pending();

    Dimension& dates = *c.find_dimension("Dates");
    for (const auto& d : kDates) {
        dates.instances.push_back({d.id, d.moisn, d.moisl, d.trimestre, d.annee, d.quadriennal, "all"});
    }
    Dimension& orgs = *c.find_dimension("Organismes");
    for (const auto& o : kOrganisms) orgs.instances.push_back({o.id, o.variete, o.categorie, o.type, "all"});
    Dimension& geos = *c.find_dimension("Geographies");
    for (const auto& p : kParcels) {
        geos.instances.push_back({p.id, p.parcelle, p.etat, p.region, p.pays, p.densite, p.continent, "all"});
    }

    // Each T2 cell is spread over the state's parcels (60/40 over P2/P7 for Minnesota),
    // then each parcel share over the two dates (60/40).
    Fact& rep = c.facts.front();
    int next = 1;
    auto emit = [&](const char* org, const char* geo, long amount) {
        const long first = amount * 3 / 5;
        const long parts[] = {first, amount - first};
        for (int k = 0; k < 2; ++k) {
            if (parts[k] == 0) continue;
            FactInstance inst;
            inst.id = fmt::format("r{:03}", next++);
            inst.refs = {kDates[k].id, org, geo};
            inst.measures = {static_cast<double>(parts[k])};
            rep.instances.push_back(std::move(inst));
        }
    };
    for (const auto& cell : t2_cells()) {
        std::vector<const ParcelRow*> parcels;
        for (const auto& p : kParcels) {
            if (cell.etat == p.etat) parcels.push_back(&p);
        }
        const long amount = static_cast<long>(cell.superficie);
        const char* org = organism_id(cell.variete);
        if (parcels.size() == 1) {
            emit(org, parcels[0]->id, amount);
        } else {
            const long first = amount * 3 / 5;
            emit(org, parcels[0]->id, first);
            emit(org, parcels[1]->id, amount - first);
        }
    }

    auto sealed = blendcube::seal(std::move(c));

    // Independent roll-up check against the reference cells.
    const Fact& fact = sealed->facts.front();
    const Dimension& g = sealed->dimension("Geographies");
    const Dimension& o = sealed->dimension("Organismes");
    const std::size_t etat = g.attribute_index("Etat");
    const std::size_t variete = o.attribute_index("Variete");
    std::map<std::pair<std::string, std::string>, double> rolled;
    for (const auto& inst : fact.instances) {
        rolled[{o.instances[inst.targets[1]][variete].str(), g.instances[inst.targets[2]][etat].str()}] +=
            inst.measures[0];
    }
    std::map<std::pair<std::string, std::string>, double> expected;
    for (const auto& cell : t2_cells()) expected[{cell.variete, cell.etat}] = cell.superficie;
    if (rolled != expected) throw Error("sample dataset does not reproduce the T2 table");
    return sealed;
}

void generate_sample_dataset(const std::filesystem::path& dir) {
    write_dataset(*sample_constellation(), dir);
}

// ---------------------------------------------------------------------------
// Benchmark dataset

std::string_view to_string(Skew s) {
    switch (s) {
    case Skew::Homogeneous: return "homogeneous";
    case Skew::LargeSup: return "large-sup";
    case Skew::SmallSup: return "small-sup";
    case Skew::EmptySup: return "empty-sup";
    case Skew::EmptyInf: return "empty-inf";
    }
    return "?";
}

Skew parse_skew(std::string_view text) {
    for (Skew s : {Skew::Homogeneous, Skew::LargeSup, Skew::SmallSup, Skew::EmptySup, Skew::EmptyInf}) {
        if (to_string(s) == text) return s;
    }
    throw UnknownNameError("unknown skew '" + std::string(text) +
                           "' (homogeneous, large-sup, small-sup, empty-sup, empty-inf)");
}

BenchDataset generate_bench_dataset(const BenchOptions& options) {
    if (!options.allow_any_size && (options.n_geo < kBenchMinGeo || options.n_geo > kBenchMaxGeo)) {
        throw OperatorError("n_geo must lie in [" + std::to_string(kBenchMinGeo) + ", " +
                            std::to_string(kBenchMaxGeo) + "] (override to extend)");
    }
    if (options.n_geo == 0 || options.organisms == 0 || options.months == 0) {
        throw OperatorError("benchmark sizes must be positive");
    }
    std::mt19937_64 rng(options.seed);
    auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

    Constellation c = parse_schema(kSampleSchema, "bench schema");
    c.name = "OGM-bench";

    Dimension& dates = *c.find_dimension("Dates");
    static constexpr const char* kMonths[] = {"janvier", "fevrier", "mars", "avril", "mai", "juin", "juillet",
                                              "aout", "septembre", "octobre", "novembre", "decembre"};
    for (std::size_t m = 0; m < options.months; ++m) {
        const std::size_t year = 2008 + m / 12;
        const std::size_t month = m % 12;
        const std::size_t q0 = 2008 + (year - 2008) / 4 * 4;
        dates.instances.push_back({fmt::format("d{}", m + 1), fmt::format("{}-{:02}", year, month + 1),
                                   fmt::format("{} {}", kMonths[month], year), fmt::format("{}-T{}", year, month / 3 + 1),
                                   fmt::format("{}", year), fmt::format("{}-{}", q0, q0 + 3), "all"});
    }

    Dimension& orgs = *c.find_dimension("Organismes");
    for (std::size_t i = 0; i < options.organisms; ++i) {
        const std::size_t cat = i % 10;
        orgs.instances.push_back({fmt::format("o{:04}", i + 1), fmt::format("V{:04}", i + 1),
                                  fmt::format("Cat{:02}", cat), cat < 5 ? "OGM" : "Classique", "all"});
    }

    // Parcels -> states (1-3 parcels) -> countries (1-2 states) -> continents (3 countries).
    struct Country {
        std::vector<std::size_t> states;
        bool selected = false;
    };
    std::vector<std::size_t> state_of(options.n_geo);
    std::size_t states = 0;
    for (std::size_t p = 0; p < options.n_geo;) {
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(uniform(1, 3)), options.n_geo - p);
        for (std::size_t k = 0; k < take; ++k) state_of[p + k] = states;
        p += take;
        ++states;
    }
    std::vector<Country> countries;
    std::vector<std::size_t> country_of(states);
    for (std::size_t s = 0; s < states;) {
        const auto take = std::min<std::size_t>(static_cast<std::size_t>(uniform(1, 2)), states - s);
        Country country;
        for (std::size_t k = 0; k < take; ++k) {
            country_of[s + k] = countries.size();
            country.states.push_back(s + k);
        }
        countries.push_back(std::move(country));
        s += take;
    }

    std::vector<std::size_t> order(countries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    switch (options.skew) {
    case Skew::Homogeneous: {
        // Moving a country into E_sup adds 1 to |E_sup| and removes its states from |E_inf|;
        // each move shrinks the gap by 2 or 3, so the loop stops with |gap| <= 1.
        long sup = 0;
        long inf = static_cast<long>(states);
        for (std::size_t k = 0; k < order.size() && inf - sup > 1; ++k) {
            countries[order[k]].selected = true;
            sup += 1;
            inf -= static_cast<long>(countries[order[k]].states.size());
        }
        break;
    }
    case Skew::LargeSup:
        for (std::size_t k = 0; k + 1 < order.size(); ++k) countries[order[k]].selected = true;
        break;
    case Skew::SmallSup:
        countries[order.front()].selected = true;
        break;
    case Skew::EmptySup:
        break;
    case Skew::EmptyInf:
        for (auto& country : countries) country.selected = true;
        break;
    }

    Dimension& geos = *c.find_dimension("Geographies");
    std::vector<double> density(countries.size());
    for (std::size_t k = 0; k < countries.size(); ++k) {
        density[k] = countries[k].selected ? 100.0 + uniform(1, 40000) / 100.0 : uniform(100, 9999) / 100.0;
    }
    for (std::size_t p = 0; p < options.n_geo; ++p) {
        const std::size_t s = state_of[p];
        const std::size_t k = country_of[s];
        geos.instances.push_back({fmt::format("g{:04}", p + 1), fmt::format("P{:04}", p + 1),
                                  fmt::format("E{:04}", s + 1), fmt::format("C{:03}-{}", k + 1, s % 2 ? "Sud" : "Nord"),
                                  fmt::format("C{:03}", k + 1), density[k], fmt::format("K{:02}", k / 3 + 1), "all"});
    }

    Fact& rep = c.facts.front();
    rep.instances.reserve(options.organisms * options.n_geo);
    std::size_t next = 1;
    for (std::size_t o = 0; o < options.organisms; ++o) {
        for (std::size_t p = 0; p < options.n_geo; ++p) {
            FactInstance inst;
            inst.id = fmt::format("r{:07}", next++);
            inst.refs = {dates.instances[static_cast<std::size_t>(uniform(0, static_cast<int>(options.months) - 1))][0].str(),
                         orgs.instances[o][0].str(), geos.instances[p][0].str()};
            inst.measures = {static_cast<double>(uniform(1, 1000))};
            rep.instances.push_back(std::move(inst));
        }
    }

    BenchDataset out;
    out.predicate = "Densité > 100";
    for (const auto& country : countries) {
        if (country.selected) {
            ++out.e_sup_size;
        } else {
            out.e_inf_size += country.states.size();
        }
    }
    out.constellation = blendcube::seal(std::move(c));
    return out;
}

std::shared_ptr<const Constellation> materialize_axis(const Constellation& c, const AxisSpec& axis,
                                                      const std::string& hierarchy_name) {
    Constellation copy = c;
    Dimension* d = copy.find_dimension(axis.dimension);
    if (!d) throw UnknownNameError("unknown dimension '" + axis.dimension + "'");
    for (const auto& level : axis.path) {
        const BlendParameter* b = axis.find_blend(level);
        if (!b) continue;
        Attribute attr{b->name, b->type, fold_identifier(b->name)};
        d->add_attribute(attr);
        const std::size_t at = d->attributes.size() - 2;
        for (std::size_t i = 0; i < d->instances.size(); ++i) {
            auto& row = d->instances[i];
            row.insert(row.begin() + static_cast<std::ptrdiff_t>(at), b->values[i]);
        }
    }
    Hierarchy h;
    h.name = hierarchy_name;
    h.params = axis.path;
    d->hierarchies.push_back(std::move(h));
    return blendcube::seal(std::move(copy));
}

}  // namespace blendcube
