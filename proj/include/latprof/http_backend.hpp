// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "latprof/gateway.hpp"

#include <chrono>
#include <optional>
#include <string>

namespace latprof {

/// Name of the environment variable holding the bearer token.
inline constexpr const char* kApiKeyEnv = "CHAT_API_KEY";

struct HttpBackendOptions {
    /// e.g. "http://localhost:8000" or "https://api.example.com/openai". The request goes to
    /// base_url + "/v1/chat/completions".
    std::string base_url;
    std::optional<std::string> api_key;
    std::chrono::seconds connect_timeout{10};
    std::chrono::seconds read_timeout{120};
};

/// Chat-completions client: POST {model, messages[{role, content}], temperature, max_tokens},
/// reply read from choices[0].message.content.
class HttpChatBackend final : public ChatBackend {
public:
    explicit HttpChatBackend(HttpBackendOptions options);

    /// Options with the api key taken from CHAT_API_KEY when set.
    static HttpBackendOptions options_from_env(std::string base_url);

    std::string complete(const ChatRequest& request) override;
    std::string describe() const override { return "http " + options_.base_url; }

    /// Request body as sent on the wire.
    static std::string encode_request(const ChatRequest& request);
    /// Extracts choices[0].message.content; throws TransportError on a malformed body.
    static std::string decode_reply(const std::string& body);

private:
    HttpBackendOptions options_;
    std::string origin_;
    std::string path_;
};

} // namespace latprof
