#include "imcrawler/session.hpp"

#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

namespace imcrawler {

FetchError::FetchError(int status, std::string url, std::size_t page_no)
    : Error(ErrorCategory::Fetch, "FetchError",
            page_no ? fmt::format("fetch failed (status {}) on page {}: {}", status, page_no, url)
                    : fmt::format("fetch failed (status {}): {}", status, url)),
      status_(status), url_(std::move(url)), page_no_(page_no)
{
}

AuthExpired::AuthExpired(std::size_t pages_fetched)
    : Error(ErrorCategory::Auth, "AuthExpired", fmt::format("session expired after {} pages", pages_fetched)),
      pages_fetched_(pages_fetched)
{
}

BadCredentials::BadCredentials(const std::string& login)
    : Error(ErrorCategory::Auth, "BadCredentials", "login rejected for " + login)
{
}

EndpointUnreachable::EndpointUnreachable(const std::string& endpoint)
    : Error(ErrorCategory::Fetch, "EndpointUnreachable", "cannot reach " + endpoint)
{
}

void SystemClock::sleep_for(std::chrono::milliseconds d)
{
    if (d.count() > 0)
        std::this_thread::sleep_for(d);
}

SystemClock& SystemClock::instance()
{
    static SystemClock clock;
    return clock;
}

Pacer::Pacer(std::int64_t min_ms, std::int64_t max_ms, std::uint64_t seed, Clock& clock)
    : min_ms_(min_ms), max_ms_(std::max(min_ms, max_ms)), rng_(seed), clock_(clock)
{
}

void Pacer::before_fetch()
{
    if (first_) {
        first_ = false;
        return;
    }
    auto span = static_cast<std::uint64_t>(max_ms_ - min_ms_) + 1;
    last_delay_ms_ = min_ms_ + static_cast<std::int64_t>(rng_() % span);
    clock_.sleep_for(std::chrono::milliseconds(last_delay_ms_));
}

struct Session::Impl {
    explicit Impl(const std::string& origin) : client(origin) {}
    httplib::Client client;
};

Session::Session(std::unique_ptr<Impl> impl, Url base, std::string token, std::size_t seed_index,
                 SessionOptions options)
    : impl_(std::move(impl)), base_(std::move(base)), token_(std::move(token)), seed_index_(seed_index),
      established_at_(std::chrono::system_clock::now()), options_(std::move(options))
{
    if (!options_.clock)
        options_.clock = &SystemClock::instance();
    pacer_ = std::make_unique<Pacer>(options_.min_delay_ms, options_.max_delay_ms,
                                     options_.pacing_seed ^ (0x9E3779B97F4A7C15ULL * (seed_index + 1)), *options_.clock);
}

Session::Session(Session&&) noexcept = default;

Session& Session::operator=(Session&& other) noexcept
{
    if (this != &other) {
        if (live()) {
            try {
                logout();
            } catch (...) {
            }
        }
        impl_ = std::move(other.impl_);
        base_ = std::move(other.base_);
        token_ = std::move(other.token_);
        seed_index_ = other.seed_index_;
        established_at_ = other.established_at_;
        request_count_ = other.request_count_;
        options_ = std::move(other.options_);
        pacer_ = std::move(other.pacer_);
        other.token_.clear();
    }
    return *this;
}

Session::~Session()
{
    if (impl_ && live()) {
        try {
            logout();
        } catch (...) {
        }
    }
}

Session Session::login(const SeedProfile& seed, std::size_t seed_index, const std::string& endpoint,
                       SessionOptions options)
{
    auto base = parse_url(endpoint);
    if (!base)
        throw EndpointUnreachable(endpoint);
    auto impl = std::make_unique<Impl>(base->origin());
    auto& client = impl->client;
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_write_timeout(options.timeout);
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);

    httplib::Params params{{"login", seed.login_name}, {"secret", seed.secret}};
    auto res = client.Post("/login", params);
    if (!res)
        throw EndpointUnreachable(endpoint);
    if (res->status == 401 || res->status == 403)
        throw BadCredentials(seed.login_name);
    if (res->status != 200)
        throw FetchError(res->status, base->origin() + "/login");
    std::string token;
    try {
        token = nlohmann::json::parse(res->body).at("token").get<std::string>();
    } catch (const nlohmann::json::exception&) {
        throw FetchError(res->status, base->origin() + "/login");
    }
    if (token.empty())
        throw BadCredentials(seed.login_name);
    return Session(std::move(impl), *base, std::move(token), seed_index, std::move(options));
}

Page Session::get(const std::string& path_or_url)
{
    auto url = resolve_href(base_, path_or_url);
    if (!url || url->origin() != base_.origin())
        throw FetchError(0, path_or_url);

    pacer_->before_fetch();
    FetchEvent event;
    event.seed_index = seed_index_;
    event.url = url->str();
    event.started = options_.clock->now();

    std::string target = url->path + (url->query.empty() ? "" : "?" + url->query);
    httplib::Headers headers{{"Cookie", "session=" + token_}};
    auto res = impl_->client.Get(target, headers);
    ++request_count_;
    event.status = res ? res->status : 0;
    if (options_.observer)
        options_.observer(event);

    if (!res)
        throw FetchError(0, event.url);
    if (res->status == 401)
        throw AuthExpired(0);
    if (res->status != 200)
        throw FetchError(res->status, event.url);
    return Page{std::move(*url), std::move(res->body)};
}

void Session::logout()
{
    if (!live())
        return;
    httplib::Headers headers{{"Cookie", "session=" + token_}};
    token_.clear();
    impl_->client.Post("/logout", headers, "", "application/x-www-form-urlencoded");
}

} // namespace imcrawler
