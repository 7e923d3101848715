// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace latprof {

enum class Role { User, Assistant };
std::string_view to_string(Role r);

struct ChatMessage {
    Role role = Role::User;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct Sampling {
    double temperature = 0.7;
    int max_tokens = 256;

    bool operator==(const Sampling&) const = default;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatMessage> messages;
    Sampling sampling;
    std::string model_id;

    /// Throws Error unless roles alternate, temperature >= 0 and max_tokens > 0.
    void validate() const;
};

/// One chat endpoint. Implementations return the assistant text of a single completion
/// and signal failures with TransportError / HttpStatusError.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
    virtual std::string describe() const = 0;
};

struct GatewayOptions {
    /// Attempts per request, including the first.
    int max_attempts = 3;
    std::chrono::milliseconds backoff{0};
    int max_in_flight = 8;
    /// Minimum spacing between request starts on this endpoint. Zero disables rate limiting.
    std::chrono::milliseconds min_interval{0};
};

/// Retry, concurrency cap and rate limit in front of a backend. Thread-safe.
class Gateway {
public:
    explicit Gateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options = {});

    /// Sends the request, retrying transport failures, 429 and 5xx responses up to
    /// max_attempts. An empty reply is retried as well unless allow_empty is set, and
    /// raises ElicitationFailure once attempts run out.
    std::string chat(const ChatRequest& request, bool allow_empty = false);

    std::uint64_t requests_sent() const noexcept { return sent_.load(); }
    const GatewayOptions& options() const noexcept { return options_; }
    const ChatBackend& backend() const noexcept { return *backend_; }

private:
    void pace();

    std::shared_ptr<ChatBackend> backend_;
    GatewayOptions options_;
    std::counting_semaphore<> slots_;
    std::mutex pace_mutex_;
    std::chrono::steady_clock::time_point next_start_{};
    std::atomic<std::uint64_t> sent_{0};
};

/// Integer answer in [lo, hi]. Strict pass: the trimmed reply is exactly one integer in
/// range. Lenient pass: the first integer token in range. Throws ParseError otherwise.
int parse_scale_answer(std::string_view text, int lo, int hi);

/// Leading "yes"/"no" (case-insensitive) after trimming whitespace and punctuation.
/// Throws ParseError when neither is found.
bool parse_yes_no(std::string_view text);

std::string_view trim(std::string_view s);

} // namespace latprof
