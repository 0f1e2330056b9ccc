#include "imcrawler/fixture/server.hpp"

#include <map>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <unordered_map>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "imcrawler/fixture/render.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler::fixture {

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL)
{
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string cookie_token(const httplib::Request& req)
{
    auto header = req.get_header_value("Cookie");
    for (const auto& part : split(header, ';')) {
        auto kv = trim(part);
        if (kv.rfind("session=", 0) == 0)
            return std::string(kv.substr(8));
    }
    return {};
}

} // namespace

FaultPlan plan_truncation(const FixtureNetwork& network, double rate, std::uint64_t seed)
{
    FaultPlan plan;
    if (rate <= 0.0)
        return plan;
    const auto threshold = static_cast<std::uint64_t>(std::llround(rate * 1'000'000.0));
    for (const auto& p : network.nodes()) {
        auto h = fnv1a(p.profile_id, fnv1a(std::to_string(seed)));
        if (h % 1'000'000 < threshold)
            plan.truncate_about.insert(p.profile_id);
    }
    return plan;
}

struct FixtureServer::Impl {
    httplib::Server http;
    ServeOptions options;

    mutable std::shared_mutex sessions_mutex;
    std::unordered_map<std::string, std::string> sessions;  // token -> profile id
    std::mt19937_64 token_rng{std::random_device{}()};

    std::mutex fault_mutex;
    std::map<std::string, int> about_served;

    mutable std::mutex counters_mutex;
    ServerCounters counters;

    void bump(std::uint64_t ServerCounters::*field)
    {
        std::lock_guard lock(counters_mutex);
        ++(counters.*field);
    }

    std::string new_token()
    {
        std::unique_lock lock(sessions_mutex);
        return fmt::format("{:016x}{:016x}", token_rng(), token_rng());
    }

    bool authorized(const httplib::Request& req) const
    {
        auto token = cookie_token(req);
        if (token.empty())
            return false;
        std::shared_lock lock(sessions_mutex);
        return sessions.count(token) > 0;
    }

    bool should_truncate(const std::string& id)
    {
        if (!options.faults.truncate_about.count(id))
            return false;
        std::lock_guard lock(fault_mutex);
        return about_served[id]++ < options.faults.truncate_times;
    }
};

FixtureServer::FixtureServer(std::shared_ptr<const FixtureNetwork> network, ServeOptions options)
    : network_(std::move(network)), impl_(std::make_unique<Impl>())
{
    if (options.page_size == 0)
        throw FixtureError(FixtureError::Kind::BadParameter, "page_size must be positive");
    impl_->options = std::move(options);
    auto& http = impl_->http;
    auto* impl = impl_.get();
    const auto* net = network_.get();

    const auto threads = impl_->options.worker_threads;
    http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
    http.set_keep_alive_max_count(1'000'000);
    http.set_tcp_nodelay(true);
    // httplib defaults to SO_REUSEPORT, which lets a second server share a busy port.
    http.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });

    auto html = [](httplib::Response& res, int status, std::string body) {
        res.status = status;
        res.set_content(std::move(body), "text/html; charset=utf-8");
    };
    auto guard = [impl, html](const httplib::Request& req, httplib::Response& res) {
        if (impl->authorized(req))
            return true;
        impl->bump(&ServerCounters::unauthorized);
        html(res, 401, render_login_wall());
        return false;
    };
    auto page_param = [](const httplib::Request& req) -> std::optional<std::size_t> {
        if (!req.has_param("page"))
            return 1;
        auto n = parse_int(req.get_param_value("page"));
        if (!n || *n < 1)
            return std::nullopt;
        return static_cast<std::size_t>(*n);
    };

    http.Post("/login", [impl, net](const httplib::Request& req, httplib::Response& res) {
        const auto* p = net->find_login(req.get_param_value("login"), req.get_param_value("secret"));
        if (!p) {
            res.status = 401;
            res.set_content(R"({"error":"bad credentials"})", "application/json");
            return;
        }
        auto token = impl->new_token();
        {
            std::unique_lock lock(impl->sessions_mutex);
            impl->sessions.emplace(token, p->profile_id);
        }
        impl->bump(&ServerCounters::logins);
        res.set_header("Set-Cookie", "session=" + token + "; Path=/; HttpOnly");
        nlohmann::json body = {{"token", token}, {"profile_id", p->profile_id}};
        res.set_content(body.dump(), "application/json");
    });

    http.Post("/logout", [impl](const httplib::Request& req, httplib::Response& res) {
        auto token = cookie_token(req);
        std::size_t erased = 0;
        {
            std::unique_lock lock(impl->sessions_mutex);
            erased = impl->sessions.erase(token);
        }
        if (erased)
            impl->bump(&ServerCounters::logouts);
        res.status = erased ? 200 : 401;
        res.set_content(erased ? R"({"ok":true})" : R"({"ok":false})", "application/json");
    });

    auto about = [impl, net, guard, html](const httplib::Request& req, httplib::Response& res) {
        if (!guard(req, res))
            return;
        const std::string id = req.matches[1];
        if (!net->contains(id))
            return html(res, 404, "<html><body><h1>Page not found</h1></body></html>");
        impl->bump(&ServerCounters::about);
        auto body = render_about(*net, net->profile(id));
        if (impl->should_truncate(id)) {
            impl->bump(&ServerCounters::truncated);
            body.resize(body.size() * 11 / 20);
        }
        html(res, 200, std::move(body));
    };
    http.Get(R"(/profile/([^/?]+)/about)", about);
    http.Get(R"(/profile/([^/?]+)/?)", about);

    http.Get(R"(/profile/([^/?]+)/friends)",
             [impl, net, guard, html, page_param](const httplib::Request& req, httplib::Response& res) {
                 if (!guard(req, res))
                     return;
                 const std::string id = req.matches[1];
                 auto page = page_param(req);
                 if (!net->contains(id) || !page)
                     return html(res, 404, "<html><body><h1>Page not found</h1></body></html>");
                 try {
                     auto rendered = render_friends_page(*net, id, *page, impl->options.page_size);
                     impl->bump(&ServerCounters::friends);
                     html(res, 200, std::move(rendered.html));
                 } catch (const FixtureError&) {
                     html(res, 404, "<html><body><h1>Page not found</h1></body></html>");
                 }
             });

    http.Get(R"(/profile/([^/?]+)/timeline)",
             [impl, net, guard, html, page_param](const httplib::Request& req, httplib::Response& res) {
                 if (!guard(req, res))
                     return;
                 const std::string id = req.matches[1];
                 auto page = page_param(req);
                 if (!net->contains(id) || !page)
                     return html(res, 404, "<html><body><h1>Page not found</h1></body></html>");
                 try {
                     auto rendered = render_timeline_page(*net, id, *page, impl->options.page_size);
                     impl->bump(&ServerCounters::timeline);
                     html(res, 200, std::move(rendered.html));
                 } catch (const FixtureError&) {
                     html(res, 404, "<html><body><h1>Page not found</h1></body></html>");
                 }
             });

    http.Get(R"(/truth/([^/?]+))", [impl, net](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (!impl->options.truth_enabled || !net->contains(id)) {
            res.status = 404;
            res.set_content(R"({"error":"not found"})", "application/json");
            return;
        }
        res.set_content(profile_to_json(net->profile(id), net->friends_of(id)).dump(), "application/json");
    });
}

FixtureServer::~FixtureServer()
{
    stop();
}

void FixtureServer::start(const std::string& host, int port)
{
    auto& http = impl_->http;
    bool ok = false;
    if (port == 0) {
        port_ = http.bind_to_any_port(host);
        ok = port_ > 0;
    } else {
        ok = http.bind_to_port(host, port);
        port_ = port;
    }
    if (!ok)
        throw FixtureError(FixtureError::Kind::BindFailure, fmt::format("{}:{}", host, port));
    host_ = host;
    thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
    impl_->http.wait_until_ready();
}

void FixtureServer::listen_blocking(const std::string& host, int port)
{
    if (!impl_->http.bind_to_port(host, port))
        throw FixtureError(FixtureError::Kind::BindFailure, fmt::format("{}:{}", host, port));
    host_ = host;
    port_ = port;
    impl_->http.listen_after_bind();
}

void FixtureServer::stop()
{
    if (impl_)
        impl_->http.stop();
    if (thread_.joinable())
        thread_.join();
}

std::string FixtureServer::endpoint() const
{
    return fmt::format("http://{}:{}", host_, port_);
}

void FixtureServer::revoke_all_sessions()
{
    std::unique_lock lock(impl_->sessions_mutex);
    impl_->sessions.clear();
}

std::size_t FixtureServer::live_sessions() const
{
    std::shared_lock lock(impl_->sessions_mutex);
    return impl_->sessions.size();
}

ServerCounters FixtureServer::counters() const
{
    std::lock_guard lock(impl_->counters_mutex);
    return impl_->counters;
}

} // namespace imcrawler::fixture
