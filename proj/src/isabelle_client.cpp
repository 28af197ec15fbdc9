#include "autoform/isabelle_client.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "autoform/util.hpp"

namespace autoform::checker {

using nlohmann::json;

IsabelleClient::IsabelleClient(IsabelleServerConfig config) : config_(std::move(config)) {}

IsabelleClient::~IsabelleClient() { close_socket(); }

void IsabelleClient::close_socket() {
    if (socket_ >= 0) {
        ::close(socket_);
        socket_ = -1;
    }
}

void IsabelleClient::connect() {
    if (socket_ >= 0) return;
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw BackendUnavailableError("cannot create socket");
    struct timeval tv;
    tv.tv_sec = static_cast<long>(config_.timeout_s);
    tv.tv_usec = 0;
    ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(config_.port));
    if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw BackendUnavailableError("bad server host: " + config_.host);
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw BackendUnavailableError("cannot connect to isabelle server at " + config_.host +
                                      ":" + std::to_string(config_.port));
    }
    socket_ = fd;
    send_line(config_.password);
    auto reply = read_message();
    if (reply.rfind("OK", 0) != 0) {
        close_socket();
        throw BackendUnavailableError("server rejected the password: " + reply);
    }
}

void IsabelleClient::send_line(const std::string& line) {
    std::string data = line + "\n";
    size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::send(socket_, data.data() + sent, data.size() - sent, 0);
        if (n <= 0) {
            close_socket();
            throw BackendUnavailableError("connection lost while sending");
        }
        sent += static_cast<size_t>(n);
    }
}

std::string IsabelleClient::read_message() {
    auto read_more = [this]() {
        char chunk[4096];
        ssize_t n = ::recv(socket_, chunk, sizeof(chunk), 0);
        if (n <= 0) {
            close_socket();
            throw BackendUnavailableError("connection lost while reading");
        }
        read_buffer_.append(chunk, static_cast<size_t>(n));
    };
    auto take_line = [this, &read_more]() {
        size_t pos;
        while ((pos = read_buffer_.find('\n')) == std::string::npos) read_more();
        std::string line = read_buffer_.substr(0, pos);
        read_buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    std::string line = take_line();
    // A line of digits announces a byte-counted multi-line payload.
    bool all_digits = !line.empty() && std::all_of(line.begin(), line.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
    });
    if (!all_digits) return line;
    size_t length = std::stoul(line);
    while (read_buffer_.size() < length) read_more();
    std::string payload = read_buffer_.substr(0, length);
    read_buffer_.erase(0, length);
    if (!read_buffer_.empty() && read_buffer_.front() == '\n') read_buffer_.erase(0, 1);
    return payload;
}

std::string IsabelleClient::request(const std::string& command, const std::string& args_json) {
    connect();
    send_line(args_json.empty() ? command : command + " " + args_json);
    std::string task;
    while (true) {
        std::string message = read_message();
        auto space = message.find_first_of(" \n");
        std::string tag = message.substr(0, space);
        std::string body = space == std::string::npos ? "" : message.substr(space + 1);
        if (tag == "OK") {
            try {
                auto j = json::parse(body.empty() ? "{}" : body);
                if (j.contains("task")) {
                    task = j["task"].get<std::string>();
                    continue;  // wait for the asynchronous result
                }
            } catch (const json::exception&) {
            }
            return body;  // synchronous command
        }
        if (tag == "NOTE") continue;
        if (tag == "FINISHED") return body;
        if (tag == "FAILED" || tag == "ERROR") {
            throw BackendUnavailableError("server request failed: " + message);
        }
    }
}

std::string IsabelleClient::ensure_session() {
    if (!session_id_.empty()) return session_id_;
    json args;
    args["session"] = config_.session;
    auto body = request("session_start", args.dump());
    try {
        auto j = json::parse(body);
        session_id_ = j.at("session_id").get<std::string>();
    } catch (const json::exception& e) {
        throw BackendUnavailableError("malformed session_start reply: " + std::string(e.what()));
    }
    return session_id_;
}

std::vector<SyntaxDiagnostic> IsabelleClient::check(std::string_view statement) {
    if (statement.empty()) return {};
    CheckContext wrap_ctx;
    wrap_ctx.imports = config_.imports;
    const std::string theory = wrap_theory(statement, wrap_ctx);

    // The server reads theories from disk, so stage the wrapped statement
    // in a scratch directory.
    auto dir = std::filesystem::temp_directory_path() /
               ("autoform_check_" + hex64(fnv1a64(theory)).substr(0, 12));
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "Check.thy", std::ios::binary);
        out << theory;
    }

    auto session = ensure_session();
    json args;
    args["session_id"] = session;
    args["theories"] = json::array({"Check"});
    args["master_dir"] = dir.string();
    auto body = request("use_theories", args.dump());

    // Map reported errors back into statement coordinates: the wrapper adds
    // a fixed number of lines before the statement.
    int prefix_lines = 0;
    {
        size_t statement_at = theory.find(statement);
        for (size_t i = 0; i < statement_at && i < theory.size(); ++i) {
            if (theory[i] == '\n') ++prefix_lines;
        }
    }
    std::vector<SyntaxDiagnostic> diagnostics;
    try {
        auto j = json::parse(body);
        auto collect = [&](const json& message) {
            std::string kind = message.value("kind", "");
            if (kind != "error" && kind != "warning") return;
            SyntaxDiagnostic d;
            d.severity = kind == "error" ? Severity::error : Severity::warning;
            d.message = message.value("message", "");
            if (message.contains("pos")) {
                const auto& pos = message["pos"];
                int line = pos.value("line", 1);
                d.line = std::max(1, line - prefix_lines);
                d.offset = std::max(0, pos.value("column", 1) - 1);
                if (pos.contains("end_column")) d.end_offset = pos["end_column"].get<int>() - 1;
            }
            diagnostics.push_back(std::move(d));
        };
        if (j.contains("errors")) {
            for (const auto& e : j["errors"]) collect(e);
        }
        if (j.contains("nodes")) {
            for (const auto& node : j["nodes"]) {
                for (const auto& m : node.value("messages", json::array())) collect(m);
            }
        }
    } catch (const json::exception& e) {
        throw BackendUnavailableError("malformed use_theories reply: " + std::string(e.what()));
    }
    std::filesystem::remove_all(dir);
    std::sort(diagnostics.begin(), diagnostics.end(),
              [](const SyntaxDiagnostic& a, const SyntaxDiagnostic& b) {
                  if (a.line != b.line) return a.line < b.line;
                  if (a.offset != b.offset) return a.offset < b.offset;
                  return a.message < b.message;
              });
    return diagnostics;
}

}  // namespace autoform::checker
