// SPDX-License-Identifier: Apache-2.0
#include "latprof/gateway.hpp"

#include "latprof/errors.hpp"

#include <spdlog/spdlog.h>

#include <cctype>
#include <charconv>
#include <optional>
#include <thread>

namespace latprof {

std::string_view to_string(Role r) { return r == Role::User ? "user" : "assistant"; }

void ChatRequest::validate() const {
    if (sampling.temperature < 0) throw Error("sampling temperature must be >= 0");
    if (sampling.max_tokens <= 0) throw Error("sampling max_tokens must be > 0");
    for (std::size_t i = 1; i < messages.size(); ++i)
        if (messages[i].role == messages[i - 1].role) throw Error("chat messages must alternate roles");
}

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options), slots_(std::max(1, options.max_in_flight)) {
    if (!backend_) throw ConfigError("gateway needs a backend");
    if (options_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
}

void Gateway::pace() {
    if (options_.min_interval.count() <= 0) return;
    std::chrono::steady_clock::time_point start;
    {
        std::lock_guard lock(pace_mutex_);
        const auto now = std::chrono::steady_clock::now();
        start = std::max(now, next_start_);
        next_start_ = start + options_.min_interval;
    }
    std::this_thread::sleep_until(start);
}

std::string Gateway::chat(const ChatRequest& request, bool allow_empty) {
    request.validate();
    std::optional<std::string> last_error;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        if (attempt > 1 && options_.backoff.count() > 0) std::this_thread::sleep_for(options_.backoff * (attempt - 1));
        pace();
        slots_.acquire();
        std::string reply;
        try {
            ++sent_;
            reply = backend_->complete(request);
            slots_.release();
        } catch (const TransportError& e) {
            slots_.release();
            spdlog::warn("{}: attempt {}/{} failed: {}", backend_->describe(), attempt, options_.max_attempts, e.what());
            if (attempt == options_.max_attempts) throw TransportError(e.what(), attempt);
            continue;
        } catch (const HttpStatusError& e) {
            slots_.release();
            const bool retryable = e.status() == 429 || e.status() >= 500;
            if (!retryable || attempt == options_.max_attempts) throw;
            spdlog::warn("{}: attempt {}/{} got HTTP {}", backend_->describe(), attempt, options_.max_attempts,
                         e.status());
            continue;
        } catch (...) {
            slots_.release();
            throw;
        }
        if (allow_empty || !trim(reply).empty()) return reply;
        last_error = "empty reply";
    }
    throw ElicitationFailure(backend_->describe() + ": " + last_error.value_or("no reply") + " after " +
                             std::to_string(options_.max_attempts) + " attempt(s)");
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

namespace {

std::optional<long long> as_integer(std::string_view s) {
    long long v = 0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
    return v;
}

} // namespace

int parse_scale_answer(std::string_view text, int lo, int hi) {
    if (lo > hi) throw Error("parse_scale_answer: lo > hi");
    const std::string_view t = trim(text);
    if (auto v = as_integer(t); v && *v >= lo && *v <= hi) return static_cast<int>(*v);

    // Lenient: scan integer tokens ("-1" is one token, not "1").
    std::size_t i = 0;
    while (i < t.size()) {
        const bool neg = t[i] == '-' && i + 1 < t.size() && std::isdigit(static_cast<unsigned char>(t[i + 1]));
        if (!neg && !std::isdigit(static_cast<unsigned char>(t[i]))) {
            ++i;
            continue;
        }
        // A digit glued to a preceding letter or digit run is not a standalone token start.
        std::size_t j = i + (neg ? 1 : 0);
        while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
        const bool glued_before = i > 0 && std::isalpha(static_cast<unsigned char>(t[i - 1]));
        const bool glued_after = j < t.size() && std::isalpha(static_cast<unsigned char>(t[j]));
        const bool decimal = j + 1 < t.size() && t[j] == '.' && std::isdigit(static_cast<unsigned char>(t[j + 1]));
        if (!glued_before && !glued_after && !decimal) {
            if (auto v = as_integer(t.substr(i, j - i)); v && *v >= lo && *v <= hi) return static_cast<int>(*v);
        }
        if (decimal) {
            j += 1;
            while (j < t.size() && std::isdigit(static_cast<unsigned char>(t[j]))) ++j;
        }
        i = j;
    }
    throw ParseError("no integer in [" + std::to_string(lo) + "," + std::to_string(hi) + "] in reply '" +
                     std::string(t.substr(0, 80)) + "'");
}

bool parse_yes_no(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) ||
                               std::ispunct(static_cast<unsigned char>(text[i]))))
        ++i;
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string word(text.substr(i, j - i));
    for (auto& c : word) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (word == "yes") return true;
    if (word == "no") return false;
    throw ParseError("reply is neither Yes nor No: '" + std::string(trim(text).substr(0, 80)) + "'");
}

} // namespace latprof
