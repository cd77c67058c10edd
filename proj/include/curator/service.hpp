#pragma once

/// @file service.hpp
/// @brief HTTP facade over stored collections.
///
/// Endpoints (JSON bodies unless noted):
///   POST   /collections                          empty body or .clv zip bytes -> {id, version}
///   GET    /collections                          [{id, version}]
///   GET    /collections/:id                      summary
///   POST   /collections/:id/import               {plugin, params} -> import report
///   GET    /collections/:id/schema               {schema, version, type_count}
///   POST   /collections/:id/schema/ops           DSL text or {"ops": [line...]}; If-Match required
///   GET    /collections/:id/documents?page=&size=
///   GET    /collections/:id/documents/:doc
///   PATCH  /collections/:id/documents/:doc       edit command or {"commands": [...]}; If-Match required
///   POST   /collections/:id/annotations          {resource, region, comment, author}; If-Match optional
///   GET    /collections/:id/annotations?resource=
///   POST   /collections/:id/exports              {profile} -> 202 {job}
///   GET    /collections/:id/exports/:job
///   GET    /collections/:id/exports/:job/artifact   application/zip
///   GET    /collections/:id/log                  DSL text; ?format=records for JSON records
///
/// Status codes: 400 malformed request, 404 unknown id, 409 stale If-Match,
/// 422 domain error ({rule, path, message}), 428 missing If-Match,
/// 502 unreachable import source.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace curator {

struct ServiceOptions {
    std::filesystem::path storage_root;
    /// Timestamp source for log records; seconds since the epoch.
    std::function<std::int64_t()> clock;
    /// Directory holding bundled fixtures. When set, a medpix import without
    /// base_url reads <fixture_root>/medpix and relative plugin paths
    /// resolve against it.
    std::optional<std::filesystem::path> fixture_root;
};

/// Default clock: SOURCE_DATE_EPOCH when set, else the wall clock.
std::int64_t default_clock();

class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    /// Registers all routes on `server`.
    void mount(httplib::Server& server);

    /// Blocks until every export job has finished.
    void wait_for_jobs();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Builds a server with a Service mounted and listens until stopped.
/// Returns false when the address cannot be bound.
bool serve(const ServiceOptions& options, const std::string& host, int port);

}  // namespace curator
