#include "imcrawler/stages.hpp"

#include <fstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "imcrawler/csv.hpp"
#include "imcrawler/fixture/truth.hpp"
#include "imcrawler/pipeline/normalize.hpp"
#include "imcrawler/rng.hpp"
#include "imcrawler/util.hpp"

namespace imcrawler {

namespace {

void write_json(const fs::path& path, const nlohmann::json& j)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json params_json(const fixture::GeneratorParams& p)
{
    nlohmann::json cities = nlohmann::json::array();
    for (const auto& [name, w] : p.city_weights)
        cities.push_back({name, w});
    return {{"n_profiles", p.n_profiles},   {"mean_degree", p.mean_degree}, {"city_weights", cities},
            {"disclosure_rate", p.disclosure_rate}, {"posts_min", p.posts_min}, {"posts_max", p.posts_max},
            {"rng_seed", p.rng_seed}};
}

} // namespace

fs::path manifest_path(const fs::path& primary_output)
{
    auto p = primary_output;
    if (p.has_filename())
        return p.string() + ".manifest.json";
    return p.parent_path().string() + ".manifest.json";
}

void write_manifest(const fs::path& primary_output, nlohmann::json manifest,
                    std::chrono::steady_clock::time_point started, int exit_code)
{
    manifest["exit_code"] = exit_code;
    manifest["duration_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    manifest["finished_at"] = timestamp_now();
    write_json(manifest_path(primary_output), manifest);
}

fixture::FixtureNetwork stage_generate(const fixture::GeneratorParams& params, const fs::path& out,
                                       const std::optional<fs::path>& truth_dir)
{
    auto started = std::chrono::steady_clock::now();
    auto network = fixture::generate_network(params);
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    fixture::save_network(out, network);
    nlohmann::json outputs = {{"network", out.string()}};
    if (truth_dir) {
        fixture::write_truth(fixture::ground_truth(network), *truth_dir);
        outputs["truth"] = truth_dir->string();
    }
    write_manifest(out,
                   {{"subcommand", "generate"},
                    {"config", params_json(params)},
                    {"inputs", nlohmann::json::object()},
                    {"outputs", outputs},
                    {"profiles", network.size()},
                    {"edges", network.edge_count()}},
                   started, 0);
    return network;
}

std::vector<SeedProfile> stage_seeds(const fixture::FixtureNetwork& network, std::size_t count, std::uint64_t seed,
                                     const fs::path& out)
{
    auto started = std::chrono::steady_clock::now();
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < network.size(); ++i)
        if (!network.neighbors(i).empty())
            candidates.push_back(i);
    if (count == 0 || count > candidates.size())
        throw Error(ErrorCategory::Param, "BadSeedCount",
                    fmt::format("asked for {} seeds but {} profiles have friends", count, candidates.size()));
    Rng rng(seed ^ 0x5EED5EED5EEDULL);
    // Partial Fisher-Yates keeps the choice deterministic and distinct.
    for (std::size_t i = 0; i < count; ++i)
        std::swap(candidates[i], candidates[i + rng.below(candidates.size() - i)]);
    std::vector<SeedProfile> seeds;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& p = network.profile(candidates[i]);
        seeds.push_back({p.profile_id, p.login_name, p.secret, std::nullopt});
    }
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    write_seed_file(out, seeds);
    write_manifest(out,
                   {{"subcommand", "seeds"},
                    {"config", {{"count", count}, {"seed", seed}}},
                    {"inputs", nlohmann::json::object()},
                    {"outputs", {{"seeds", out.string()}}}},
                   started, 0);
    return seeds;
}

void stage_truth(const fixture::FixtureNetwork& network, const fs::path& out_dir)
{
    auto started = std::chrono::steady_clock::now();
    fixture::write_truth(fixture::ground_truth(network), out_dir);
    write_manifest(out_dir,
                   {{"subcommand", "truth"},
                    {"config", nlohmann::json::object()},
                    {"inputs", nlohmann::json::object()},
                    {"outputs", {{"truth", out_dir.string()}}}},
                   started, 0);
}

pipeline::Structured stage_normalize(const fs::path& raw, const fs::path& out_dir)
{
    auto started = std::chrono::steady_clock::now();
    auto data = pipeline::normalize_raw(raw);
    pipeline::write_structured(out_dir, data);
    write_manifest(out_dir,
                   {{"subcommand", "normalize"},
                    {"config", nlohmann::json::object()},
                    {"inputs", {{"raw", raw.string()}}},
                    {"outputs", {{"structured", out_dir.string()}}},
                    {"raw_rows", data.raw_rows},
                    {"consumed_rows", data.consumed_rows},
                    {"skipped_rows", data.skipped.size()},
                    {"profiles", data.profiles.size()},
                    {"posts", data.posts.size()}},
                   started, 0);
    return data;
}

VerifyOutcome stage_verify(const fs::path& in_dir, const fs::path& report, const fs::path& reextract_out,
                           const pipeline::VerificationPolicy& policy)
{
    auto started = std::chrono::steady_clock::now();
    auto data = pipeline::read_structured(in_dir);
    VerifyOutcome out;
    out.reports = pipeline::verify(data, policy);
    for (const auto& r : out.reports)
        out.junk += r.junk() ? 1 : 0;
    pipeline::write_reports(report, out.reports);
    if (reextract_out.has_parent_path())
        fs::create_directories(reextract_out.parent_path());
    out.reextract = pipeline::emit_reextract_list(out.reports, reextract_out);
    write_manifest(report,
                   {{"subcommand", "verify"},
                    {"config",
                     {{"total_post", policy.total_post},
                      {"required", std::vector<std::string>(policy.required.begin(), policy.required.end())}}},
                    {"inputs", {{"structured", in_dir.string()}}},
                    {"outputs", {{"report", report.string()}, {"reextract", reextract_out.string()}}},
                    {"profiles", out.reports.size()},
                    {"junk", out.junk},
                    {"reextract_urls", out.reextract}},
                   started, 0);
    return out;
}

pipeline::LoadReport stage_load(const fs::path& in_dir, const fs::path& db, const std::optional<fs::path>& report)
{
    auto started = std::chrono::steady_clock::now();
    auto data = pipeline::read_structured(in_dir);
    std::optional<std::vector<pipeline::VerificationReport>> reports;
    if (report)
        reports = pipeline::read_reports(*report);
    pipeline::LoadReport rep;
    {
        pipeline::Store store(db);
        rep = pipeline::load(store, data, reports ? &*reports : nullptr);
    }
    nlohmann::json inputs = {{"structured", in_dir.string()}};
    if (report)
        inputs["report"] = report->string();
    write_manifest(db,
                   {{"subcommand", "load"},
                    {"config", nlohmann::json::object()},
                    {"inputs", inputs},
                    {"outputs", {{"db", db.string()}}},
                    {"load", rep.to_json()}},
                   started, 0);
    return rep;
}

std::vector<pipeline::ProfileRecord> stage_filter(const fs::path& db, const std::vector<std::string>& cities,
                                                  const fs::path& out)
{
    auto started = std::chrono::steady_clock::now();
    if (!fs::exists(db))
        throw Error(ErrorCategory::Io, "MissingFile", "no store at " + db.string());
    std::vector<pipeline::ProfileRecord> records;
    {
        pipeline::Store store(db);
        records = pipeline::filter_by_city(store, cities);
    }
    std::vector<csv::Row> rows = {pipeline::profile_columns()};
    for (const auto& r : records)
        rows.push_back(pipeline::to_row(r));
    if (out.has_parent_path())
        fs::create_directories(out.parent_path());
    csv::write_file(out, rows);
    write_manifest(out,
                   {{"subcommand", "filter"},
                    {"config", {{"cities", cities}}},
                    {"inputs", {{"db", db.string()}}},
                    {"outputs", {{"sample", out.string()}}},
                    {"matched", records.size()}},
                   started, 0);
    return records;
}

nlohmann::json stage_stats(const fs::path& db, const std::optional<fs::path>& population, const fs::path& out)
{
    auto started = std::chrono::steady_clock::now();
    if (!fs::exists(db))
        throw Error(ErrorCategory::Io, "MissingFile", "no store at " + db.string());
    nlohmann::json stats;
    {
        pipeline::Store store(db);
        std::vector<std::string> ids;
        if (population) {
            auto rows = csv::read_file(*population);
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (!rows[i].empty() && !rows[i][0].empty())
                    ids.push_back(rows[i][0]);
        } else {
            for (const auto& p : store.profiles())
                ids.push_back(p.profile_id);
        }
        stats = pipeline::behavior_summary(store, ids);
    }
    write_json(out, stats);
    nlohmann::json inputs = {{"db", db.string()}};
    if (population)
        inputs["population"] = population->string();
    write_manifest(out,
                   {{"subcommand", "stats"},
                    {"config", nlohmann::json::object()},
                    {"inputs", inputs},
                    {"outputs", {{"stats", out.string()}}}},
                   started, 0);
    return stats;
}

} // namespace imcrawler
