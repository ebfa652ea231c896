#include "blendcube/service.hpp"

#include <cstdlib>
#include <random>

#include <fmt/format.h>
#include <httplib.h>

#include "blendcube/errors.hpp"
#include "blendcube/ingest.hpp"
#include "blendcube/sqlgen.hpp"

namespace blendcube {

using nlohmann::json;

namespace {

json value_json(const Value& v) {
    if (v.is_decimal()) return v.decimal();
    return v.text();
}

json header_tree(const std::vector<std::vector<Value>>& headers, std::size_t begin, std::size_t end, std::size_t level) {
    json nodes = json::array();
    if (headers.empty() || level >= headers.front().size()) return nodes;
    std::size_t i = begin;
    while (i < end) {
        std::size_t j = i + 1;
        while (j < end && headers[j][level] == headers[i][level]) ++j;
        nodes.push_back({{"value", value_json(headers[i][level])}, {"span", j - i},
                         {"children", header_tree(headers, i, j, level + 1)}});
        i = j;
    }
    return nodes;
}

json axis_json(const AxisSpec& axis, const std::vector<std::string>& levels,
               const std::vector<std::vector<Value>>& headers) {
    json out;
    out["dimension"] = axis.dimension;
    out["hierarchy"] = axis.hierarchy;
    out["displayed"] = levels;
    std::vector<std::string> available;
    for (auto it = axis.path.rbegin(); it != axis.path.rend(); ++it) {
        if (*it != kAllAttribute) available.push_back(*it);
    }
    out["available"] = available;
    out["headers"] = header_tree(headers, 0, headers.size(), 0);
    json keys = json::array();
    for (const auto& h : headers) {
        json key = json::array();
        for (const auto& v : h) key.push_back(value_json(v));
        keys.push_back(key);
    }
    out["keys"] = keys;
    json blends = json::array();
    for (const auto& b : axis.blends) {
        json e_sup = json::array(), e_inf = json::array();
        for (const auto& v : b->e_sup) e_sup.push_back(value_json(v));
        for (const auto& v : b->e_inf) e_inf.push_back(value_json(v));
        blends.push_back({{"name", b->name},
                          {"p_sup", b->p_sup},
                          {"s_sup", std::string(1, stamp_char(b->s_sup))},
                          {"p_inf", b->p_inf},
                          {"s_inf", std::string(1, stamp_char(b->s_inf))},
                          {"pred", to_string(b->pred)},
                          {"e_sup", e_sup},
                          {"e_inf", e_inf}});
    }
    out["blends"] = blends;
    return out;
}

json error_json(const std::string& message) {
    return {{"error", message}};
}

HttpResponse reply(int status, const json& body) {
    return {status, body.dump()};
}

std::string required_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
        throw OperatorError(std::string("descriptor field '") + key + "' must be a non-empty string");
    }
    return it->get<std::string>();
}

std::string optional_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return {};
    if (!it->is_string()) throw OperatorError(std::string("descriptor field '") + key + "' must be a string");
    return it->get<std::string>();
}

Stamp stamp_field(const json& j, const char* key) {
    const std::string s = required_string(j, key);
    if (s == "+") return Stamp::Keep;
    if (s == "-" || s == "\xE2\x88\x92") return Stamp::Drop;
    throw OperatorError(std::string("descriptor field '") + key + "' must be \"+\" or \"-\"");
}

AxisChoice axis_field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it != j.end() && it->is_string()) return {it->get<std::string>(), {}};
    if (it == j.end() || !it->is_object()) {
        throw OperatorError(std::string("descriptor field '") + key + "' must be a dimension name or object");
    }
    return {required_string(*it, "dimension"), optional_string(*it, "hierarchy")};
}

Predicate predicate_field(const json& j, const char* key) {
    return parse_predicate(required_string(j, key));
}

std::string new_session_id(std::uint64_t serial) {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    return fmt::format("{:016x}{:04x}", rng(), serial & 0xffff);
}

}  // namespace

json grid_document(const Grid& g, const MTable& t) {
    json doc;
    doc["version"] = kGridDocumentVersion;
    doc["fact"] = g.fact;
    doc["measures"] = g.measures;
    doc["lines"] = axis_json(t.lines, g.line_levels, g.row_headers);
    doc["columns"] = axis_json(t.columns, g.column_levels, g.column_headers);
    json restriction = json::object();
    for (const auto& [dim, pred] : t.restriction) restriction[dim] = to_string(pred);
    doc["restriction"] = restriction;
    json cells = json::array();
    for (std::size_t r = 0; r < g.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < g.cols(); ++c) {
            json cell = json::array();
            for (std::size_t m = 0; m < g.measures.size(); ++m) {
                const auto& v = g.cell(r, c, m);
                cell.push_back(v ? json(*v) : json(nullptr));
            }
            row.push_back(cell);
        }
        cells.push_back(row);
    }
    doc["cells"] = cells;
    return doc;
}

Command command_from_descriptor(const json& d) {
    if (!d.is_object()) throw OperatorError("operation descriptor must be a JSON object");
    const std::string op = required_string(d, "op");
    Command c;
    if (op == "display") {
        c.verb = Verb::Display;
        c.fact = required_string(d, "fact");
        auto ms = d.find("measures");
        if (ms == d.end() || !ms->is_array() || ms->empty()) {
            throw OperatorError("descriptor field 'measures' must be a non-empty list");
        }
        for (const auto& m : *ms) {
            if (m.is_string()) {
                // "SUM(Superficie)"
                const auto text = m.get<std::string>();
                const auto open = text.find('(');
                if (open == std::string::npos || text.back() != ')') {
                    throw OperatorError("measure '" + text + "' must look like SUM(Measure)");
                }
                auto f = parse_aggregation(text.substr(0, open));
                if (!f) throw OperatorError("unknown aggregate in '" + text + "'");
                c.measures.push_back({*f, text.substr(open + 1, text.size() - open - 2)});
            } else {
                auto f = parse_aggregation(required_string(m, "function"));
                if (!f) throw OperatorError("unknown aggregate '" + m["function"].get<std::string>() + "'");
                c.measures.push_back({*f, required_string(m, "measure")});
            }
        }
        c.lines = axis_field(d, "lines");
        c.columns = axis_field(d, "columns");
    } else if (op == "drilldown" || op == "rollup") {
        c.verb = op == "rollup" ? Verb::Rollup : Verb::Drilldown;
        c.dimension = required_string(d, "dimension");
        c.param = required_string(d, "param");
    } else if (op == "rotate") {
        c.verb = Verb::Rotate;
        c.dimension = required_string(d, "dimension");
        c.param = required_string(d, "new_dimension");
        c.hierarchy = optional_string(d, "hierarchy");
    } else if (op == "blend") {
        c.verb = Verb::Blend;
        c.blend.dimension = required_string(d, "dimension");
        c.blend.p_sup = required_string(d, "p_sup");
        c.blend.s_sup = stamp_field(d, "s_sup");
        c.blend.p_inf = required_string(d, "p_inf");
        c.blend.s_inf = stamp_field(d, "s_inf");
        c.blend.pred = predicate_field(d, "pred");
    } else if (op == "restrict") {
        c.verb = Verb::Restrict;
        c.dimension = required_string(d, "dimension");
        c.pred = predicate_field(d, "pred");
    } else if (op == "undo") {
        c.verb = Verb::Undo;
    } else {
        throw OperatorError("unknown op '" + op + "' (display, drilldown, rollup, rotate, blend, restrict, undo)");
    }
    return c;
}

json descriptor_from_command(const Command& c) {
    auto axis = [](const AxisChoice& a) {
        json j = {{"dimension", a.dimension}};
        if (!a.hierarchy.empty()) j["hierarchy"] = a.hierarchy;
        return j;
    };
    switch (c.verb) {
    case Verb::Display: {
        json ms = json::array();
        for (const auto& m : c.measures) ms.push_back({{"function", std::string(to_string(m.function))}, {"measure", m.measure}});
        return {{"op", "display"}, {"fact", c.fact}, {"measures", ms}, {"lines", axis(c.lines)}, {"columns", axis(c.columns)}};
    }
    case Verb::Drilldown:
    case Verb::Rollup:
        return {{"op", c.verb == Verb::Rollup ? "rollup" : "drilldown"}, {"dimension", c.dimension}, {"param", c.param}};
    case Verb::Rotate: {
        json j = {{"op", "rotate"}, {"dimension", c.dimension}, {"new_dimension", c.param}};
        if (!c.hierarchy.empty()) j["hierarchy"] = c.hierarchy;
        return j;
    }
    case Verb::Blend:
        return {{"op", "blend"},
                {"dimension", c.blend.dimension},
                {"p_sup", c.blend.p_sup},
                {"s_sup", std::string(1, stamp_char(c.blend.s_sup))},
                {"p_inf", c.blend.p_inf},
                {"s_inf", std::string(1, stamp_char(c.blend.s_inf))},
                {"pred", to_string(c.blend.pred)}};
    case Verb::Restrict:
        return {{"op", "restrict"}, {"dimension", c.dimension}, {"pred", to_string(c.pred)}};
    case Verb::Undo:
        return {{"op", "undo"}};
    default:
        throw OperatorError("command has no operation descriptor");
    }
}

ServiceOptions service_options_from_env() {
    ServiceOptions options;
    if (const char* dir = std::getenv("BLENDCUBE_DATA_DIR")) options.data_dir = dir;
    if (const char* ttl = std::getenv("BLENDCUBE_SESSION_TTL")) {
        try {
            options.session_ttl = std::chrono::seconds(std::stoll(ttl));
        } catch (const std::exception&) {
            throw Error(std::string("BLENDCUBE_SESSION_TTL must be a number of seconds, got '") + ttl + "'");
        }
    }
    return options;
}

MTable replay(const std::vector<Command>& log, const Constellation& c) {
    std::optional<MTable> t;
    for (const auto& cmd : log) t = apply_operation(cmd, t ? &*t : nullptr, c);
    if (!t) throw OperatorError("empty operation log");
    return *t;
}

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

std::size_t Service::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::size_t Service::expire_idle(std::chrono::steady_clock::time_point now) {
    std::lock_guard lock(mutex_);
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        std::unique_lock session_lock(it->second->mutex, std::try_to_lock);
        if (session_lock.owns_lock() && now - it->second->last_used > options_.session_ttl) {
            session_lock.unlock();
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

std::shared_ptr<const Constellation> Service::dataset(const std::string& name) {
    std::lock_guard lock(mutex_);
    if (auto it = datasets_.find(name); it != datasets_.end()) return it->second;
    std::shared_ptr<const Constellation> c;
    if (name == "sample") {
        c = sample_constellation();
    } else {
        std::filesystem::path p(name);
        if (p.is_relative() && !options_.data_dir.empty()) p = options_.data_dir / p;
        if (!std::filesystem::exists(p / "schema.json")) throw IoError("unknown dataset '" + name + "'");
        c = load_dataset(p);
    }
    datasets_[name] = c;
    return c;
}

std::shared_ptr<Service::SessionState> Service::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
}

HttpResponse Service::create_session(const std::string& body) {
    json request = json::object();
    if (!body.empty()) {
        try {
            request = json::parse(body);
        } catch (const json::parse_error& e) {
            return reply(400, error_json(std::string("malformed JSON: ") + e.what()));
        }
    }
    if (!request.is_object()) return reply(400, error_json("request body must be a JSON object"));
    std::string name = "sample";
    if (auto it = request.find("dataset"); it != request.end()) {
        if (!it->is_string()) return reply(400, error_json("'dataset' must be a string"));
        name = it->get<std::string>();
    }
    auto state = std::make_shared<SessionState>();
    try {
        state->constellation = dataset(name);
    } catch (const ValidationError& e) {
        return reply(400, {{"error", e.what()}, {"problems", e.problems()}});
    } catch (const Error& e) {
        return reply(400, error_json(e.what()));
    }
    state->dataset = name;
    state->last_used = std::chrono::steady_clock::now();
    std::string id;
    {
        std::lock_guard lock(mutex_);
        id = new_session_id(next_id_++);
        sessions_[id] = state;
    }
    return reply(201, {{"session_id", id}, {"dataset", name}});
}

HttpResponse Service::session_request(SessionState& s, const std::string& method, const std::string& tail,
                                      const std::string& body) {
    auto current_grid = [&]() {
        return reply(200, grid_document(evaluate(s.history.back(), *s.constellation), s.history.back()));
    };
    if (tail == "table") {
        if (method != "GET") return reply(405, error_json("use GET"));
        if (s.history.empty()) return reply(400, error_json("no table yet; post a display operation"));
        return current_grid();
    }
    if (tail == "sql") {
        if (method != "GET") return reply(405, error_json("use GET"));
        if (s.history.empty()) return reply(400, error_json("no table yet; post a display operation"));
        const auto artifact = generate_query(s.history.back(), *s.constellation);
        return reply(200, {{"kind", std::string(to_string(artifact.kind))}, {"sql", artifact.text()}});
    }
    if (tail == "schema") {
        if (method != "GET") return reply(405, error_json("use GET"));
        return reply(200, json::parse(schema_to_json(*s.constellation)));
    }
    if (tail == "log") {
        if (method != "GET") return reply(405, error_json("use GET"));
        json log = json::array();
        for (const auto& c : s.log) log.push_back(descriptor_from_command(c));
        return reply(200, {{"log", log}});
    }
    if (tail != "ops") return reply(404, error_json("unknown resource '" + tail + "'"));
    if (method != "POST") return reply(405, error_json("use POST"));

    json descriptor;
    try {
        descriptor = json::parse(body);
    } catch (const json::parse_error& e) {
        return reply(400, error_json(std::string("malformed JSON: ") + e.what()));
    }
    Command c = command_from_descriptor(descriptor);
    if (c.verb == Verb::Undo) {
        if (s.history.empty()) return reply(400, error_json("nothing to undo"));
        s.history.pop_back();
        s.log.pop_back();
        if (s.history.empty()) return reply(200, {{"version", kGridDocumentVersion}, {"table", nullptr}});
        return current_grid();
    }
    MTable next = apply_operation(c, s.history.empty() ? nullptr : &s.history.back(), *s.constellation);
    json doc = grid_document(evaluate(next, *s.constellation), next);
    s.history.push_back(std::move(next));
    s.log.push_back(std::move(c));
    return reply(200, doc);
}

HttpResponse Service::handle(const std::string& method, const std::string& raw_path, const std::string& body) {
    const auto now = std::chrono::steady_clock::now();
    expire_idle(now);
    std::string path = raw_path.substr(0, raw_path.find('?'));
    while (path.size() > 1 && path.back() == '/') path.pop_back();

    if (path == "/sessions") {
        if (method != "POST") return reply(405, error_json("use POST"));
        return create_session(body);
    }
    constexpr std::string_view prefix = "/sessions/";
    if (path.rfind(prefix, 0) != 0) return reply(404, error_json("unknown endpoint '" + path + "'"));
    const std::string rest = path.substr(prefix.size());
    const auto slash = rest.find('/');
    const std::string id = rest.substr(0, slash);
    const std::string tail = slash == std::string::npos ? "" : rest.substr(slash + 1);

    auto session = find(id);
    if (!session) return reply(404, error_json("unknown session '" + id + "'"));
    if (tail.empty()) {
        if (method != "DELETE") return reply(405, error_json("use DELETE"));
        std::lock_guard lock(mutex_);
        sessions_.erase(id);
        return reply(200, {{"deleted", id}});
    }

    std::lock_guard lock(session->mutex);
    session->last_used = now;
    try {
        return session_request(*session, method, tail, body);
    } catch (const ParseError& e) {
        return reply(400, {{"error", e.detail()}, {"column", e.column()}});
    } catch (const ConstraintViolation& e) {
        return reply(422, {{"error", e.what()}, {"offending_values", e.offending_values()}});
    } catch (const StrictnessError& e) {
        return reply(409, {{"error", e.what()}, {"from", e.from_level()}, {"to", e.to_level()}, {"value", e.value()}});
    } catch (const Error& e) {
        return reply(400, error_json(e.what()));
    }
}

HttpServer::HttpServer(Service& service) : server_(std::make_unique<httplib::Server>()) {
    auto forward = [&service](const std::string& method) {
        return [&service, method](const httplib::Request& req, httplib::Response& res) {
            HttpResponse r = service.handle(method, req.path, req.body);
            res.status = r.status;
            res.set_header("Access-Control-Allow-Origin", "*");
            res.set_content(r.body, "application/json");
        };
    };
    server_->Get(R"(/.*)", forward("GET"));
    server_->Post(R"(/.*)", forward("POST"));
    server_->Delete(R"(/.*)", forward("DELETE"));
    server_->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() {
    return server_->listen_after_bind();
}

void HttpServer::stop() {
    server_->stop();
}

}  // namespace blendcube
