// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#include "rooflinesim/service.hpp"

#include <httplib.h>

#include "json.hpp"
#include "rooflinesim/error.hpp"
#include "rooflinesim/scenario.hpp"

namespace rooflinesim
{

namespace
{

ServiceResponse error_response(int status, const std::string &kind, const std::string &message)
{
    nlohmann::ordered_json body{{"error", {{"kind", kind}, {"message", message}, {"field", nullptr}}}};
    return {status, body.dump(2) + "\n"};
}

ServiceResponse run(const std::string &body, const Catalog &catalog, bool want_explore)
{
    try
    {
        const ScenarioConfig c = parse_scenario(body, catalog);
        if (want_explore && !c.explore)
            return {400, render_error(Error(ErrorKind::Parse, "explore: missing required field", "explore"))};
        if (!want_explore && !c.plan)
            return {400, render_error(Error(ErrorKind::Parse, "sharding: missing required field", "sharding"))};
        return {200, want_explore ? render_explore(c, ReportFormat::Json) : render_estimate(c, ReportFormat::Json)};
    }
    catch (const Error &e)
    {
        return {exit_code(e) == 3 ? 422 : 400, render_error(e)};
    }
}

}  // namespace

ServiceResponse handle_request(const std::string &method, const std::string &path, const std::string &body,
                               const Catalog &catalog)
{
    if (path == "/health")
    {
        if (method != "GET")
            return error_response(405, "method_not_allowed", "use GET");
        nlohmann::ordered_json j{{"status", "ok"}, {"version", std::string(tool_version())}};
        return {200, j.dump(2) + "\n"};
    }
    if (path == "/catalog")
    {
        if (method != "GET")
            return error_response(405, "method_not_allowed", "use GET");
        return {200, render_catalog(catalog, ReportFormat::Json)};
    }
    if (path == "/estimate" || path == "/explore")
    {
        if (method != "POST")
            return error_response(405, "method_not_allowed", "use POST");
        return run(body, catalog, path == "/explore");
    }
    return error_response(404, "not_found", "no route for " + path);
}

struct Service::Impl
{
    Catalog catalog;
    httplib::Server server;
};

Service::Service(Catalog catalog) : impl_(std::make_unique<Impl>())
{
    impl_->catalog = std::move(catalog);
    auto &s = impl_->server;
    s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                           {"Access-Control-Allow-Headers", "Content-Type"}});
    auto handler = [this](const httplib::Request &req, httplib::Response &res) {
        const ServiceResponse r = handle_request(req.method, req.path, req.body, impl_->catalog);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    for (const char *p : {"/health", "/catalog", "/estimate", "/explore"})
    {
        s.Get(p, handler);
        s.Post(p, handler);
    }
    s.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) { res.status = 204; });
    s.set_error_handler([](const httplib::Request &req, httplib::Response &res) {
        if (res.status == 404 && res.body.empty())
            res.set_content(error_response(404, "not_found", "no route for " + req.path).body, "application/json");
    });
}

Service::~Service() = default;

int Service::bind(const std::string &host, int port)
{
    const int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                                : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        fail(ErrorKind::Precondition, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void Service::listen()
{
    impl_->server.listen_after_bind();
}

void Service::stop()
{
    impl_->server.stop();
}

}  // namespace rooflinesim
