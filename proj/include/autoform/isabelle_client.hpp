#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "autoform/checker.hpp"

namespace autoform::checker {

/// Connection settings for a running Isabelle server. The client speaks
/// the server's line protocol: the password on the first line, then
/// "command {json-args}" requests with OK/ERROR/NOTE/FINISHED/FAILED
/// replies, multi-line payloads arriving with a byte-count prefix.
struct IsabelleServerConfig {
    std::string host = "127.0.0.1";
    int port = 0;
    std::string password;
    std::string session = "ZF";
    std::vector<std::string> imports = {"ZF"};
    double timeout_s = 300;
};

class IsabelleClient final : public Checker {
public:
    explicit IsabelleClient(IsabelleServerConfig config);
    ~IsabelleClient() override;

    IsabelleClient(const IsabelleClient&) = delete;
    IsabelleClient& operator=(const IsabelleClient&) = delete;

    /// Wraps the statement into a theory, submits it and maps reported
    /// errors back to statement coordinates, ordered by position.
    std::vector<SyntaxDiagnostic> check(std::string_view statement) override;
    std::string backend_name() const override { return "isabelle"; }

    /// Connects and authenticates; throws BackendUnavailableError on
    /// failure. check() connects lazily, this exists for probing.
    void connect();
    bool connected() const { return socket_ >= 0; }

    /// Starts (or reuses) the configured session, returns its id.
    std::string ensure_session();

private:
    IsabelleServerConfig config_;
    int socket_ = -1;
    std::string session_id_;
    std::string read_buffer_;

    void send_line(const std::string& line);
    std::string read_message();
    /// Sends a command and pumps replies until FINISHED/FAILED; returns the
    /// FINISHED payload. Synchronous-only replies (OK with no task) return
    /// the OK payload.
    std::string request(const std::string& command, const std::string& args_json);
    void close_socket();
};

}  // namespace autoform::checker
