// SPDX-License-Identifier: Apache-2.0
#include "latprof/http_backend.hpp"

#include "latprof/errors.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

namespace latprof {

HttpChatBackend::HttpChatBackend(HttpBackendOptions options) : options_(std::move(options)) {
    std::string url = options_.base_url;
    while (!url.empty() && url.back() == '/') url.pop_back();
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: '" + options_.base_url + "'");
    const auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_ = (slash == std::string::npos ? std::string() : url.substr(slash)) + "/v1/chat/completions";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (origin_.starts_with("https://")) throw ConfigError("built without TLS support; cannot reach " + origin_);
#endif
}

HttpBackendOptions HttpChatBackend::options_from_env(std::string base_url) {
    HttpBackendOptions o;
    o.base_url = std::move(base_url);
    if (const char* key = std::getenv(kApiKeyEnv); key && *key) o.api_key = key;
    return o;
}

std::string HttpChatBackend::encode_request(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    for (const auto& m : request.messages) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    const nlohmann::json body = {
        {"model", request.model_id},
        {"messages", std::move(messages)},
        {"temperature", request.sampling.temperature},
        {"max_tokens", request.sampling.max_tokens},
    };
    return body.dump();
}

std::string HttpChatBackend::decode_reply(const std::string& body) {
    try {
        const auto j = nlohmann::json::parse(body);
        const auto& content = j.at("choices").at(0).at("message").at("content");
        return content.is_null() ? std::string() : content.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat-completions reply: ") + e.what(), 1);
    }
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    httplib::Client client(origin_);
    client.set_connection_timeout(options_.connect_timeout);
    client.set_read_timeout(options_.read_timeout);
    if (options_.api_key) client.set_bearer_token_auth(*options_.api_key);

    const auto res = client.Post(path_, encode_request(request), "application/json");
    if (!res) throw TransportError("POST " + origin_ + path_ + ": " + httplib::to_string(res.error()), 1);
    if (res->status < 200 || res->status >= 300) throw HttpStatusError(res->status, res->body.substr(0, 200));
    return decode_reply(res->body);
}

} // namespace latprof
