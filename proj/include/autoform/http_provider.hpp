#pragma once

#include <mutex>
#include <string>
#include <vector>

#include "autoform/llm.hpp"

namespace autoform::llm {

/// OpenAI-compatible chat-completions endpoint. Credentials come from an
/// environment variable only; they are never written to logs or config.
struct HttpProviderConfig {
    std::string base_url = "http://127.0.0.1:8080";
    std::string path = "/v1/chat/completions";
    std::string model = "mistral";
    std::string api_key_env = "AUTOFORM_API_KEY";
    int timeout_s = 120;
    int max_retries = 3;
    int backoff_ms = 250;
    bool trace = false;
};

class HttpChatProvider final : public Provider {
public:
    explicit HttpChatProvider(HttpProviderConfig config);

    CompletionResult complete(const CompletionRequest& request) override;
    std::string name() const override { return "http:" + config_.model; }

    /// HTTP status codes observed, in order. 0 marks a transport failure.
    std::vector<int> status_log() const;

private:
    HttpProviderConfig config_;
    std::string api_key_;
    mutable std::mutex mutex_;
    std::vector<int> statuses_;

    void log_status(int status);
};

}  // namespace autoform::llm
