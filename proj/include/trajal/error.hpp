#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace trajal {

enum class ErrorKind {
    parse,
    schema,
    duplicate_id,
    insufficient_points,
    empty_table,
    io,
    dimension,
    numeric,
    config,
    degenerate,
    protocol,
    session_complete,
    not_found,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::parse: return "parse_error";
    case ErrorKind::schema: return "schema_error";
    case ErrorKind::duplicate_id: return "duplicate_id";
    case ErrorKind::insufficient_points: return "insufficient_points";
    case ErrorKind::empty_table: return "empty_table";
    case ErrorKind::io: return "io_error";
    case ErrorKind::dimension: return "dimension_error";
    case ErrorKind::numeric: return "numeric_error";
    case ErrorKind::config: return "config_error";
    case ErrorKind::degenerate: return "degenerate_data";
    case ErrorKind::protocol: return "protocol_error";
    case ErrorKind::session_complete: return "session_complete";
    case ErrorKind::not_found: return "not_found";
    }
    return "error";
}

/// Every failure raised by the library. `detail` carries machine-readable
/// context (offending index, key, tids...) that the service forwards verbatim.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, nlohmann::json detail = nlohmann::json::object())
        : std::runtime_error(message), kind_(kind), detail_(std::move(detail)) {}

    ErrorKind kind() const noexcept { return kind_; }
    const nlohmann::json& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    nlohmann::json detail_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              nlohmann::json detail = nlohmann::json::object()) {
    throw Error(kind, message, std::move(detail));
}

} // namespace trajal
