#include "huntforge/service/api.hpp"

#include <httplib.h>

#include "huntforge/dsl/dsl.hpp"
#include "huntforge/errors.hpp"
#include "huntforge/scenario.hpp"

namespace huntforge::service {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message, const json& extra = json::object()) {
    json body = extra;
    body["error"] = message;
    send_json(res, body, status);
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw invalid(std::string("malformed JSON body: ") + e.what());
    }
}

/// Wraps a handler so engine errors become JSON responses with the mapped status.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const dsl::DslError& e) {
            const auto& s = e.span();
            send_error(res, http_status(e), e.what(),
                       {{"diagnostic", e.message()},
                        {"span", {{"begin", s.begin}, {"end", s.end}, {"line", s.line}, {"column", s.column}}}});
        } catch (const HuntError& e) {
            send_error(res, http_status(e), e.what());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("bad request: ") + e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

std::string need_string(const json& body, const char* key) {
    if (!body.contains(key) || !body.at(key).is_string()) throw invalid(std::string("missing string field '") + key + "'");
    return body.at(key).get<std::string>();
}

json state_view(const HuntState& s) {
    json j = to_json(s);
    json work = json::array();
    for (const auto& inv : pending_work(s)) work.push_back(to_json(inv));
    json awaiting = json::array();
    for (const auto* h : s.awaiting_decision()) awaiting.push_back(h->id);
    j["pending_work"] = work;
    j["awaiting_decision"] = awaiting;
    j["quiescent"] = work.empty() && awaiting.empty();
    return j;
}

}  // namespace

int http_status(const HuntError& e) {
    switch (e.code()) {
        case ErrorCode::parse:
        case ErrorCode::bind: return 422;
        case ErrorCode::not_found: return 404;
        case ErrorCode::conflict: return 409;
        case ErrorCode::unavailable: return 503;
        case ErrorCode::io: return 500;
        case ErrorCode::invalid_argument:
        case ErrorCode::not_applicable: return 400;
    }
    return 500;
}

void install_routes(httplib::Server& server, SessionManager& sessions) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/hunts", guarded([&](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        std::string spec = need_string(body, "spec");
        telemetry::TelemetryCorpus corpus;
        if (body.contains("telemetry")) {
            corpus = telemetry::load_corpus(body.at("telemetry").get<std::string>());
        } else if (body.contains("scenario_seed")) {
            corpus = telemetry::generate_scenario(body.at("scenario_seed").get<std::uint64_t>()).corpus;
        }
        auto options = HuntOptions::from_json(body.value("options", json::object()));
        std::string id = sessions.create(spec, std::move(corpus), options);
        send_json(res, {{"id", id}, {"state", state_view(sessions.get(id)->snapshot())}}, 201);
    }));

    server.Get("/hunts", guarded([&](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"hunts", sessions.ids()}});
    }));

    server.Get(R"(/hunts/([^/]+)/state)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, state_view(sessions.get(req.matches[1])->snapshot()));
    }));

    server.Get(R"(/hunts/([^/]+)/hypotheses)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto state = sessions.get(req.matches[1])->snapshot();
        std::optional<HypothesisStatus> want;
        if (req.has_param("status")) want = parse_hypothesis_status(req.get_param_value("status"));
        json out = json::array();
        for (const auto& h : state.hypotheses)
            if (!want || h.status == *want) out.push_back(h);
        send_json(res, {{"seq", state.seq}, {"hypotheses", out}});
    }));

    server.Post(R"(/hunts/([^/]+)/hypotheses)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        Hypothesis h;
        h.predicate = body.at("predicate").get<Predicate>();
        h.confidence = body.value("confidence", 0.5);
        auto r = sessions.get(req.matches[1])->inject(std::move(h), body.value("analyst", std::string("analyst")));
        send_json(res, r, 201);
    }));

    server.Post(R"(/hunts/([^/]+)/hypotheses/([^/]+)/decision)",
                guarded([&](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    Decision d = parse_decision(need_string(body, "verdict"));
                    auto r = sessions.get(req.matches[1])->decide(req.matches[2], d, need_string(body, "analyst"));
                    send_json(res, r);
                }));

    server.Post(R"(/hunts/([^/]+)/advance)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        json body = parse_body(req);
        auto mode = parse_advance_mode(body.value("mode", std::string("step")));
        auto session = sessions.get(req.matches[1]);
        auto steps = session->advance(mode);
        auto view = state_view(session->snapshot());
        send_json(res, {{"steps", steps},
                        {"seq", view["seq"]},
                        {"quiescent", view["quiescent"]},
                        {"awaiting_decision", view["awaiting_decision"]}});
    }));

    server.Get(R"(/hunts/([^/]+)/recommendations)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto state = sessions.get(req.matches[1])->snapshot();
        send_json(res, {{"seq", state.seq}, {"recommendations", state.recommendations}});
    }));

    server.Post(R"(/hunts/([^/]+)/recommendations/([^/]+)/disposition)",
                guarded([&](const httplib::Request& req, httplib::Response& res) {
                    json body = parse_body(req);
                    auto d = deliberation::parse_recommendation_status(need_string(body, "decision"));
                    auto r = sessions.get(req.matches[1])->dispose(req.matches[2], d, need_string(body, "analyst"));
                    send_json(res, r);
                }));

    server.Get(R"(/hunts/([^/]+)/journal)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        std::string out;
        for (const auto& r : sessions.get(req.matches[1])->journal()) out += write_journal_line(r) + "\n";
        res.set_content(out, "application/x-ndjson");
    }));

    server.Post(R"(/hunts/([^/]+)/telemetry)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        std::size_t n = sessions.get(req.matches[1])->append_telemetry(req.body);
        send_json(res, {{"ingested", n}});
    }));

    server.Get(R"(/hunts/([^/]+)/provenance)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        if (!req.has_param("fact")) throw invalid("missing query parameter 'fact'");
        auto state = sessions.get(req.matches[1])->snapshot();
        auto chain = provenance(state, Predicate::parse(req.get_param_value("fact")));
        send_json(res, {{"fact", req.get_param_value("fact")}, {"provenance", chain}});
    }));

    server.Get(R"(/hunts/([^/]+)/costs)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        auto state = sessions.get(req.matches[1])->snapshot();
        const auto& c = *state.config;
        json actions = json::array();
        for (const auto& a : c.actions.actions())
            actions.push_back({{"name", a.name},
                               {"target", deliberation::to_string(a.target)},
                               {"rule", deliberation::to_string(a.condition)},
                               {"rule_text", deliberation::condition_text(a.condition)},
                               {"costs", deliberation::to_json(c.costs.row(a.name))}});
        json order = json::array();
        for (auto i : c.criterion_order) order.push_back(deliberation::criterion_name(i));
        send_json(res, {{"actions", actions}, {"order", order}});
    }));

    server.Get(R"(/hunts/([^/]+)/bundle)", guarded([&](const httplib::Request& req, httplib::Response& res) {
        send_json(res, hunt_bundle(sessions.get(req.matches[1])->snapshot()));
    }));
}

ApiServer::ApiServer(SessionManager& sessions) : server_(std::make_unique<httplib::Server>()) {
    install_routes(*server_, sessions);
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw HuntError(ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return bound;
}

void ApiServer::listen(const std::string& host, int port) {
    if (!server_->listen(host, port)) throw HuntError(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
}

void ApiServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace huntforge::service
