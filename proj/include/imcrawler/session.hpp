#pragma once

// Logged-in browsing context against a profile endpoint. A Session issues
// one request at a time and must not be shared between threads.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>

#include "imcrawler/config_io.hpp"
#include "imcrawler/error.hpp"
#include "imcrawler/url.hpp"

namespace imcrawler {

class FetchError : public Error {
public:
    // status 0 means the request never produced a response.
    FetchError(int status, std::string url, std::size_t page_no = 0);
    int status() const noexcept { return status_; }
    const std::string& url() const noexcept { return url_; }
    std::size_t page_no() const noexcept { return page_no_; }

private:
    int status_;
    std::string url_;
    std::size_t page_no_;
};

class AuthExpired : public Error {
public:
    explicit AuthExpired(std::size_t pages_fetched);
    std::size_t pages_fetched() const noexcept { return pages_fetched_; }

private:
    std::size_t pages_fetched_;
};

class BadCredentials : public Error {
public:
    explicit BadCredentials(const std::string& login);
};

class EndpointUnreachable : public Error {
public:
    explicit EndpointUnreachable(const std::string& endpoint);
};

// Time source for pacing and backoff; tests substitute a virtual clock.
class Clock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SystemClock final : public Clock {
public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_for(std::chrono::milliseconds d) override;
    static SystemClock& instance();
};

// Uniform jitter in [min, max] before every fetch except a session's first.
class Pacer {
public:
    Pacer(std::int64_t min_ms, std::int64_t max_ms, std::uint64_t seed, Clock& clock);
    void before_fetch();
    std::int64_t last_delay_ms() const noexcept { return last_delay_ms_; }

private:
    std::int64_t min_ms_;
    std::int64_t max_ms_;
    std::mt19937_64 rng_;
    Clock& clock_;
    bool first_ = true;
    std::int64_t last_delay_ms_ = 0;
};

struct FetchEvent {
    std::size_t seed_index = 0;
    std::string url;
    int status = 0;
    Clock::time_point started;
};

using FetchObserver = std::function<void(const FetchEvent&)>;

struct SessionOptions {
    std::int64_t min_delay_ms = 0;
    std::int64_t max_delay_ms = 0;
    std::uint64_t pacing_seed = 0;
    Clock* clock = nullptr;  // defaults to SystemClock
    FetchObserver observer;
    std::chrono::seconds timeout{10};
};

struct Page {
    Url url;
    std::string body;
};

class Session {
public:
    // POST /login with the seed's credentials. Throws BadCredentials or
    // EndpointUnreachable.
    static Session login(const SeedProfile& seed, std::size_t seed_index, const std::string& endpoint,
                         SessionOptions options = {});

    Session(Session&&) noexcept;
    Session& operator=(Session&&) noexcept;
    ~Session();

    // Paced GET of a path or absolute URL on the session's origin.
    // Throws AuthExpired on 401 and FetchError otherwise.
    Page get(const std::string& path_or_url);

    void logout();

    bool live() const noexcept { return !token_.empty(); }
    const std::string& token() const noexcept { return token_; }
    std::size_t seed_index() const noexcept { return seed_index_; }
    std::chrono::system_clock::time_point established_at() const noexcept { return established_at_; }
    std::uint64_t request_count() const noexcept { return request_count_; }
    const Url& base() const noexcept { return base_; }

    // Forgets the token without contacting the server (test hook).
    void invalidate_local_token() { token_.clear(); }

private:
    struct Impl;
    Session(std::unique_ptr<Impl> impl, Url base, std::string token, std::size_t seed_index, SessionOptions options);

    std::unique_ptr<Impl> impl_;
    Url base_;
    std::string token_;
    std::size_t seed_index_ = 0;
    std::chrono::system_clock::time_point established_at_;
    std::uint64_t request_count_ = 0;
    SessionOptions options_;
    std::unique_ptr<Pacer> pacer_;
};

} // namespace imcrawler
