#include "autoform/http_provider.hpp"

#include "autoform/util.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <algorithm>

#include <httplib.h>
#include <json.hpp>

namespace autoform::llm {

using nlohmann::json;

HttpChatProvider::HttpChatProvider(HttpProviderConfig config) : config_(std::move(config)) {
    if (!config_.api_key_env.empty()) {
        if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
    }
}

void HttpChatProvider::log_status(int status) {
    std::lock_guard<std::mutex> lock(mutex_);
    statuses_.push_back(status);
}

std::vector<int> HttpChatProvider::status_log() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return statuses_;
}

CompletionResult HttpChatProvider::complete(const CompletionRequest& request) {
    record_call();
    json payload;
    payload["model"] = config_.model;
    payload["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    payload["temperature"] = request.decoding.temperature;
    payload["max_tokens"] = request.decoding.max_tokens;
    if (!request.decoding.stop_sequences.empty()) {
        payload["stop"] = request.decoding.stop_sequences;
    }
    const std::string body = payload.dump();
    if (config_.trace) {
        std::fprintf(stderr, "[http:%s] POST %s %s\n", config_.model.c_str(),
                     config_.path.c_str(), body.c_str());
    }

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            // bounded exponential backoff with jitter
            int64_t base = static_cast<int64_t>(config_.backoff_ms) << (attempt - 1);
            base = std::min<int64_t>(base, 8000);
            static thread_local SplitMix64 jitter(
                static_cast<uint64_t>(std::chrono::steady_clock::now().time_since_epoch().count()));
            int64_t delay = base / 2 + static_cast<int64_t>(jitter.next_below(
                                           static_cast<uint64_t>(base / 2 + 1)));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
        httplib::Client client(config_.base_url);
        client.set_read_timeout(config_.timeout_s, 0);
        client.set_connection_timeout(config_.timeout_s, 0);

        auto start = std::chrono::steady_clock::now();
        auto res = client.Post(config_.path, headers, body, "application/json");
        double latency_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                .count();

        if (!res) {
            log_status(0);
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;  // retry
        }
        log_status(res->status);
        if (config_.trace) {
            std::fprintf(stderr, "[http:%s] status %d %s\n", config_.model.c_str(), res->status,
                         res->body.c_str());
        }
        if (res->status == 200) {
            json reply;
            try {
                reply = json::parse(res->body);
                const auto& choice = reply.at("choices").at(0);
                CompletionResult out;
                out.text = choice.at("message").at("content").get<std::string>();
                out.latency_ms = latency_ms;
                if (reply.contains("usage")) {
                    const auto& usage = reply["usage"];
                    if (usage.contains("prompt_tokens"))
                        out.prompt_tokens = usage["prompt_tokens"].get<int>();
                    if (usage.contains("completion_tokens"))
                        out.completion_tokens = usage["completion_tokens"].get<int>();
                }
                out.metadata = name();
                return out;
            } catch (const json::exception& e) {
                throw ProviderError("malformed completion response: " + std::string(e.what()));
            }
        }
        if (res->status == 401 || res->status == 403) {
            throw AuthError("authentication failed with status " +
                            std::to_string(res->status));
        }
        if (res->status == 429) {
            double retry_after = 0;
            if (res->has_header("Retry-After")) {
                retry_after = std::atof(res->get_header_value("Retry-After").c_str());
            }
            last_error = "rate limited";
            if (attempt == config_.max_retries) {
                throw RateLimitedError("rate limited after " + std::to_string(attempt + 1) +
                                           " attempts",
                                       retry_after);
            }
            continue;
        }
        if (res->status == 400) {
            std::string code;
            try {
                auto err = json::parse(res->body);
                code = err.value("error", json::object()).value("code", "");
            } catch (const json::exception&) {
            }
            if (code == "context_length_exceeded") {
                throw ContextTooLongError("prompt exceeds the model context window");
            }
            throw ProviderError("bad request: " + res->body);
        }
        if (res->status >= 500) {
            last_error = "server error " + std::to_string(res->status);
            continue;
        }
        throw ProviderError("unexpected status " + std::to_string(res->status) + ": " +
                            res->body);
    }
    throw ProviderUnavailableError(last_error);
}

}  // namespace autoform::llm
