#pragma once

// Local HTTP service exposing a FixtureNetwork as login-walled profile pages.

#include <atomic>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <thread>

#include "imcrawler/fixture/network.hpp"

namespace imcrawler::fixture {

// Deterministic fault injection. Listed profiles get a truncated About page
// for their first `truncate_times` requests; later requests are served whole.
struct FaultPlan {
    std::set<std::string> truncate_about;
    int truncate_times = 1;
};

// Profiles chosen for truncation by hashing (seed, profile id); the selected
// fraction converges on `rate`.
FaultPlan plan_truncation(const FixtureNetwork& network, double rate, std::uint64_t seed);

struct ServeOptions {
    std::size_t page_size = 50;
    bool truth_enabled = true;
    FaultPlan faults;
    std::size_t worker_threads = 32;
};

struct ServerCounters {
    std::uint64_t about = 0;
    std::uint64_t friends = 0;
    std::uint64_t timeline = 0;
    std::uint64_t logins = 0;
    std::uint64_t logouts = 0;
    std::uint64_t unauthorized = 0;
    std::uint64_t truncated = 0;
};

class FixtureServer {
public:
    FixtureServer(std::shared_ptr<const FixtureNetwork> network, ServeOptions options = {});
    ~FixtureServer();

    FixtureServer(const FixtureServer&) = delete;
    FixtureServer& operator=(const FixtureServer&) = delete;

    // Binds and starts serving on a background thread. Port 0 picks a free
    // port. Throws FixtureError{BindFailure}.
    void start(const std::string& host, int port);
    // Blocks the calling thread until stop() (used by the CLI).
    void listen_blocking(const std::string& host, int port);
    void stop();

    int port() const noexcept { return port_; }
    std::string endpoint() const;

    // Invalidates every session token; later requests get 401.
    void revoke_all_sessions();
    std::size_t live_sessions() const;
    ServerCounters counters() const;

    const FixtureNetwork& network() const { return *network_; }

private:
    struct Impl;
    std::shared_ptr<const FixtureNetwork> network_;
    std::unique_ptr<Impl> impl_;
    std::thread thread_;
    std::string host_;
    int port_ = 0;
};

} // namespace imcrawler::fixture
