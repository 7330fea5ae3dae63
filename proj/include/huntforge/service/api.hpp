#pragma once

#include <memory>
#include <string>
#include <thread>

#include "huntforge/errors.hpp"
#include "huntforge/service/session.hpp"

namespace httplib {
class Server;
}

namespace huntforge::service {

/// HTTP status for an engine error: 422 DSL, 404 missing, 409 conflict, 400 bad input.
int http_status(const HuntError& e);

/// Registers every endpoint of the hunt API on `server`.
void install_routes(httplib::Server& server, SessionManager& sessions);

/// Owns an HTTP server bound to localhost. Used by `serve` and tests.
class ApiServer {
public:
    explicit ApiServer(SessionManager& sessions);
    ~ApiServer();

    /// Binds (port 0 picks a free port) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Serves on the calling thread until stop().
    void listen(const std::string& host, int port);
    void stop();

private:
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

}  // namespace huntforge::service
