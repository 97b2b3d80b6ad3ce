// SPDX-FileCopyrightText: © 2026 The rooflinesim Authors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <string>

#include "rooflinesim/hardware_catalog.hpp"

namespace rooflinesim
{

struct ServiceResponse
{
    int status = 200;
    std::string body;  // always JSON
};

/// Routes one request. Shares the report code path with the CLI, so bodies
/// are byte-identical to `estimate --format json` output.
ServiceResponse handle_request(const std::string &method, const std::string &path, const std::string &body,
                               const Catalog &catalog);

/// Stateless JSON-over-HTTP front end. The catalog is shared read-only
/// between worker threads.
class Service
{
   public:
    explicit Service(Catalog catalog);
    ~Service();
    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    /// Binds to host:port (port 0 picks a free port) and returns the port.
    int bind(const std::string &host, int port);
    /// Blocks until stop() is called.
    void listen();
    void stop();

   private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace rooflinesim
