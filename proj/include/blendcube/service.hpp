#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blendcube/command.hpp"
#include "blendcube/model.hpp"
#include "blendcube/mtable.hpp"

namespace httplib {
class Server;
}

namespace blendcube {

inline constexpr int kGridDocumentVersion = 1;

// Grid document served to clients: header trees, cells (null for EMPTY), axis metadata.
nlohmann::json grid_document(const Grid& g, const MTable& t);

// Operation descriptor {op, ...} to a command. Throws ParseError / OperatorError.
Command command_from_descriptor(const nlohmann::json& descriptor);
nlohmann::json descriptor_from_command(const Command& c);

struct ServiceOptions {
    std::filesystem::path data_dir;
    std::chrono::seconds session_ttl{30 * 60};
};

// Reads BLENDCUBE_DATA_DIR and BLENDCUBE_SESSION_TTL (seconds).
ServiceOptions service_options_from_env();

struct HttpResponse {
    int status = 200;
    std::string body;  // JSON
};

class Service {
public:
    explicit Service(ServiceOptions options = {});

    HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

    // Drops sessions idle for longer than the TTL; returns how many were dropped.
    std::size_t expire_idle(std::chrono::steady_clock::time_point now);
    std::size_t session_count() const;

private:
    struct SessionState {
        std::mutex mutex;
        std::string dataset;
        std::shared_ptr<const Constellation> constellation;
        std::vector<Command> log;      // table operations since creation, undo removes the last
        std::vector<MTable> history;   // history[i] is the table after log[i]
        std::chrono::steady_clock::time_point last_used;
    };

    std::shared_ptr<const Constellation> dataset(const std::string& name);
    std::shared_ptr<SessionState> find(const std::string& id);
    HttpResponse create_session(const std::string& body);
    HttpResponse session_request(SessionState& s, const std::string& method, const std::string& tail,
                                 const std::string& body);

    ServiceOptions options_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<SessionState>> sessions_;
    std::map<std::string, std::shared_ptr<const Constellation>> datasets_;
    std::uint64_t next_id_ = 0;
};

// Replays a log of table operations from scratch.
MTable replay(const std::vector<Command>& log, const Constellation& c);

// HTTP front end forwarding every request to Service::handle.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    // Blocks until stop().
    bool listen();
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace blendcube
