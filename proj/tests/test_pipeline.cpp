#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "gsr/pipeline.hpp"

using namespace gsr;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gsr_pipe_" + name + "_" +
                                                      std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const char* kVenueHeader =
    "venue_id,display_name,kind,field,openalex_source_id,s2_venue_id,ccf_tier,jcr_quartile\n";

std::string default_venue_csv() {
    std::string csv = kVenueHeader;
    csv += "jml,Journal of ML,journal,cs,S-jml,,,Q1\n";
    csv += "jsys,\"Systems, Letters\",journal,cs,S-jsys,,,Q2\n";
    csv += "med1,Clinical Reports,journal,medicine,S-med1,,,Q1\n";
    csv += "conf1,Learning Conf,conference,cs,,s2-conf1,A,\n";
    return csv;
}

std::vector<json> journal_works(const std::string& prefix, int n) {
    std::vector<json> works;
    for (int i = 0; i < n; ++i) {
        const std::int64_t cited = 40 + i;
        works.push_back(fx::openalex_work(prefix + "-W" + std::to_string(i),
                                          2023 + (i % 2), i % 7 == 0 ? "review" : "article",
                                          0.5 + (i % 10) * 0.3, cited,
                                          {{2024, cited / 2}, {2025, cited / 4}}));
    }
    return works;
}

std::vector<json> conference_papers(const std::string& prefix, int n) {
    std::vector<json> papers;
    for (int i = 0; i < n; ++i) {
        papers.push_back(fx::s2_paper(prefix + "-P" + std::to_string(i), 2023 + (i % 2), 30 + i));
    }
    return papers;
}

// temp project dir + fixture server wired into the config
struct PipelineFixture {
    fx::FixtureServer server;
    fs::path dir;
    fs::path config_path;

    explicit PipelineFixture(const std::string& name, const std::string& venue_csv) {
        server.add_openalex_source("S-jml", journal_works("jml", 40));
        server.add_openalex_source("S-jsys", journal_works("jsys", 30));
        server.add_openalex_source("S-med1", journal_works("med1", 36));
        server.add_s2_venue("s2-conf1", conference_papers("conf1", 24));
        const std::string base_url = server.start();

        dir = fresh_dir(name);
        write_file(dir / "venues.csv", venue_csv);
        json config;
        config["venue_list"] = "venues.csv";
        config["snapshot_dir"] = "snaps";
        config["output_dir"] = "out";
        config["retrieval_year"] = 2025;
        config["retrieval_date"] = "2025-06-30";
        config["scoring"] = {{"min_valid_papers", 5}};
        config["ingest"] = {{"rate_limit_rps", 100000.0},
                            {"backoff_ms", 1},
                            {"page_size", 7},
                            {"openalex_base_url", base_url},
                            {"s2_base_url", base_url}};
        config_path = dir / "config.json";
        write_file(config_path, config.dump(2));
    }

    RunConfig config() const { return load_run_config(config_path); }
};

}  // namespace

TEST_CASE("an empty config object yields the standard defaults") {
    const RunConfig config = parse_run_config(json::object(), "/tmp");
    CHECK(config.snapshot_dir == "snapshots");
    CHECK(config.retrieval_year == std::nullopt);
    CHECK(config.scoring.w_fwci == 0.35);
    CHECK(config.scoring.min_valid_papers == 20);
    CHECK(config.scoring.quota.size() == 4);
    CHECK(config.exclusion_mode == ExclusionMode::And);
    CHECK(config.calibration_window == CalibrationWindowMode::TwoYear);
    CHECK(config.calibration_restrict_to_if2_window);
    CHECK(config.fetch_policy.requests_per_second == 10.0);
    CHECK(config.fetch_policy.max_attempts == 3);
    CHECK(config.fetch_workers == 4);
    CHECK(config.output_formats.size() == 3);
}

TEST_CASE("config rejects unknown keys and bad values") {
    CHECK_THROWS_AS(parse_run_config(json{{"venue_lists", "x.csv"}}, "/tmp"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"scoring", {{"w_chi", 1.0}}}}, "/tmp"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"calibration", {{"coefficient", 1.5}}}}, "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"calibration", {{"coefficient", 0.0}}}}, "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"quality_filter", {{"exclusion_mode", "xor"}}}}, "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"scoring", {{"w_if2", -1.0}}}}, "/tmp"), ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"output_formats", json::array({"yaml"})}}, "/tmp"),
                    ConfigError);
    CHECK_THROWS_AS(parse_run_config(json{{"record_validation", {{"min_year", 2030}}}}, "/tmp"),
                    ConfigError);
}

TEST_CASE("config hash is stable and sensitive") {
    const RunConfig a = parse_run_config(json::object(), "/tmp");
    const RunConfig b = parse_run_config(json::object(), "/tmp");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);

    const RunConfig c = parse_run_config(json{{"scoring", {{"w_fwci", 0.4}}}}, "/tmp");
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("sweep coefficient grids") {
    const auto grid = sweep_coefficients(SweepRange{});
    REQUIRE(grid.size() == 11);
    CHECK(grid.front() == 0.50);
    CHECK(grid.back() == 1.00);
    CHECK(grid[5] == 0.75);
    CHECK_THROWS_AS(sweep_coefficients(SweepRange{1.0, 0.5, 0.05}), ConfigError);
    CHECK_THROWS_AS(sweep_coefficients(SweepRange{0.5, 1.0, 0.0}), ConfigError);
}

TEST_CASE("venue list parsing handles quoting and rejects malformed rows") {
    const auto dir = fresh_dir("venues");
    write_file(dir / "v.csv", default_venue_csv());
    const auto venues = load_venue_list(dir / "v.csv", false);
    REQUIRE(venues.size() == 4);
    CHECK(venues[1].display_name == "Systems, Letters");
    CHECK(venues[0].jcr_quartile == Quartile::Q1);
    CHECK(venues[3].ccf_tier == CcfTier::A);
    CHECK(venues[3].s2_venue_id == "s2-conf1");
    CHECK_FALSE(venues[3].openalex_source_id.has_value());

    write_file(dir / "bad_header.csv", "id,name\nx,y\n");
    CHECK_THROWS_AS(load_venue_list(dir / "bad_header.csv", false), ConfigError);

    write_file(dir / "bad_kind.csv", std::string(kVenueHeader) + "v1,V,book,cs,S1,,,\n");
    CHECK_THROWS_AS(load_venue_list(dir / "bad_kind.csv", false), ConfigError);

    write_file(dir / "dup.csv",
               std::string(kVenueHeader) + "v1,V,journal,cs,S1,,,\nv1,V,journal,cs,S1,,,\n");
    CHECK_THROWS_AS(load_venue_list(dir / "dup.csv", false), ConfigError);

    write_file(dir / "no_source.csv", std::string(kVenueHeader) + "v1,V,journal,cs,,,,\n");
    CHECK_THROWS_AS(load_venue_list(dir / "no_source.csv", false), ConfigError);

    // medicine conference only under the explicit override
    write_file(dir / "medconf.csv",
               std::string(kVenueHeader) + "v1,V,conference,medicine,S1,,,\n");
    CHECK_THROWS_AS(load_venue_list(dir / "medconf.csv", false), ConfigError);
    CHECK(load_venue_list(dir / "medconf.csv", true).size() == 1);
    fs::remove_all(dir);
}

TEST_CASE("labels csv parsing") {
    const auto dir = fresh_dir("labels");
    write_file(dir / "labels.csv", "venue_id,system,class\njml,JCR,Q1\nconf1,CCF,A\n");
    const auto labels = load_labels_csv(dir / "labels.csv");
    REQUIRE(labels.size() == 2);
    CHECK(labels[0].system == "JCR");
    CHECK(labels[1].label_class == "A");

    write_file(dir / "bad.csv", "venue_id,system,class\njml,SCOPUS,Q1\n");
    CHECK_THROWS_AS(load_labels_csv(dir / "bad.csv"), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("snapshot filenames are filesystem-safe and collision-resistant") {
    CHECK(snapshot_filename("neurips") == "neurips.jsonl");
    const std::string odd = snapshot_filename("https://openalex.org/S123");
    CHECK(odd.find('/') == std::string::npos);
    // ids that sanitize to the same base must still map to distinct files
    CHECK(snapshot_filename("a/b") != snapshot_filename("a:b"));
}

TEST_CASE("full pipeline over the fixture server") {
    PipelineFixture fixture("full", default_venue_csv());
    const RunConfig config = fixture.config();
    std::ostringstream log;

    REQUIRE(cmd_fetch(config, false, {}, log) == 0);
    for (const char* name : {"jml", "jsys", "med1", "conf1"}) {
        CHECK(fs::exists(config.snapshot_dir_path() / snapshot_filename(name)));
    }
    const Snapshot conf_snap =
        read_snapshot(config.snapshot_dir_path() / snapshot_filename("conf1"));
    CHECK(conf_snap.records.size() == 24);
    CHECK(conf_snap.retrieval_date == "2025-06-30");
    CHECK(conf_snap.records.front().counts_by_year.empty());

    // idempotence: a second run without --force makes no requests
    const int requests_before = fixture.server.request_count();
    REQUIRE(cmd_fetch(config, false, {}, log) == 0);
    CHECK(fixture.server.request_count() == requests_before);

    REQUIRE(cmd_calibrate(config, log) == 0);
    REQUIRE(fs::exists(config.calibration_path()));
    const json calibration = json::parse(slurp(config.calibration_path()));
    const double coefficient = calibration.at("coefficient").get<double>();
    CHECK(coefficient > 0.5);
    CHECK(coefficient <= 1.0);
    CHECK(fs::exists(config.output_dir_path() / "figure_ratio_hist.csv"));

    REQUIRE(cmd_score(config, log) == 0);
    CHECK(fs::exists(config.output_dir_path() / "ranking_cs.csv"));
    CHECK(fs::exists(config.output_dir_path() / "ranking_cs.json"));
    CHECK(fs::exists(config.output_dir_path() / "ranking_cs.md"));
    CHECK(fs::exists(config.output_dir_path() / "ranking_medicine.csv"));
    CHECK(fs::exists(config.output_dir_path() / "provenance.json"));
    CHECK(fs::exists(config.output_dir_path() / "figure_quartile_composition.csv"));
    CHECK(fs::exists(config.output_dir_path() / "figure_score_dist.csv"));

    const std::string cs_csv = slurp(config.output_dir_path() / "ranking_cs.csv");
    CHECK(cs_csv.find("# config_hash=" + config_hash(config)) != std::string::npos);
    CHECK(cs_csv.find("conf1") != std::string::npos);
    CHECK(cs_csv.find(",true,") != std::string::npos);  // estimated IF2 flagged

    const json provenance = json::parse(slurp(config.output_dir_path() / "provenance.json"));
    CHECK(provenance.at("engine_version").get<std::string>() == kEngineVersion);
    CHECK(provenance.at("retrieval_year").get<int>() == 2025);
    CHECK(provenance.at("calibration_coefficient").get<double>() == coefficient);
    CHECK_FALSE(provenance.at("coefficient_overridden").get<bool>());

    REQUIRE(cmd_validate(config, {}, log) == 0);
    const std::string report = slurp(config.output_dir_path() / "validation_report.md");
    CHECK(report.find("JCR Q1 agreement") != std::string::npos);
    CHECK(report.find("CCF tier vs quartile") != std::string::npos);
    CHECK(report.find("never rescaled or refitted") != std::string::npos);

    REQUIRE(cmd_sensitivity(config, SweepRange{}, log) == 0);
    const std::string sensitivity = slurp(config.output_dir_path() / "sensitivity.csv");
    CHECK(sensitivity.find("0.75,0,0.00,") != std::string::npos);
    int rows = 0;
    for (char c : sensitivity) {
        if (c == '\n') ++rows;
    }
    CHECK(rows == 13);  // hash comment + header + 11 entries
    CHECK(fs::exists(config.output_dir_path() / "figure_sensitivity_curve.csv"));
    fs::remove_all(fixture.dir);
}

TEST_CASE("fetching an empty venue list succeeds vacuously") {
    PipelineFixture fixture("empty", kVenueHeader);
    std::ostringstream log;
    CHECK(cmd_fetch(fixture.config(), false, {}, log) == 0);
    CHECK(fs::is_empty(fixture.config().snapshot_dir_path()));
    fs::remove_all(fixture.dir);
}

TEST_CASE("per-venue fetch failures do not abort the batch") {
    std::string csv = default_venue_csv();
    csv += "ghost,Ghost Venue,journal,cs,S-missing,,,\n";
    PipelineFixture fixture("partial", csv);
    std::ostringstream log;
    CHECK(cmd_fetch(fixture.config(), false, {}, log) == 1);
    CHECK(fs::exists(fixture.config().snapshot_dir_path() / snapshot_filename("jml")));
    CHECK_FALSE(fs::exists(fixture.config().snapshot_dir_path() / snapshot_filename("ghost")));
    CHECK(log.str().find("ghost") != std::string::npos);
    CHECK(log.str().find("FAILED") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("venue subset filter fetches only the named venues") {
    PipelineFixture fixture("subset", default_venue_csv());
    std::ostringstream log;
    CHECK(cmd_fetch(fixture.config(), false, {"jml", "conf1"}, log) == 0);
    CHECK(fs::exists(fixture.config().snapshot_dir_path() / snapshot_filename("jml")));
    CHECK(fs::exists(fixture.config().snapshot_dir_path() / snapshot_filename("conf1")));
    CHECK_FALSE(fs::exists(fixture.config().snapshot_dir_path() / snapshot_filename("jsys")));
    fs::remove_all(fixture.dir);
}

TEST_CASE("calibrating a conference-only corpus reports EmptyCorpus") {
    std::string csv = kVenueHeader;
    csv += "conf1,Learning Conf,conference,cs,,s2-conf1,A,\n";
    PipelineFixture fixture("confonly", csv);
    std::ostringstream log;
    REQUIRE(cmd_fetch(fixture.config(), false, {}, log) == 0);
    CHECK(cmd_calibrate(fixture.config(), log) == 1);
    CHECK(log.str().find("EmptyCorpus") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("a coefficient override skips measurement and is recorded") {
    PipelineFixture fixture("override", default_venue_csv());
    RunConfig config = fixture.config();
    config.coefficient_override = 0.75;
    std::ostringstream log;
    CHECK(cmd_calibrate(config, log) == 0);
    const json calibration = json::parse(slurp(config.calibration_path()));
    CHECK(calibration.at("coefficient").get<double>() == 0.75);
    CHECK(calibration.at("n_papers").get<int>() == 0);
    const json provenance = json::parse(slurp(config.output_dir_path() / "provenance.json"));
    CHECK(provenance.at("coefficient_overridden").get<bool>());
    CHECK(log.str().find("skipped") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("score requires calibration and snapshots") {
    PipelineFixture fixture("missing", default_venue_csv());
    std::ostringstream log;
    CHECK(cmd_score(fixture.config(), log) == 1);
    CHECK(log.str().find("MissingSnapshots") != std::string::npos);

    std::ostringstream log2;
    REQUIRE(cmd_fetch(fixture.config(), false, {}, log2) == 0);
    CHECK(cmd_score(fixture.config(), log2) == 1);
    CHECK(log2.str().find("MissingCalibration") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("validate with no overlapping labels reports NoOverlap") {
    std::string csv = kVenueHeader;  // venue list without any reference labels
    csv += "jml,Journal of ML,journal,cs,S-jml,,,\n";
    csv += "jsys,Systems Letters,journal,cs,S-jsys,,,\n";
    PipelineFixture fixture("nooverlap", csv);
    const RunConfig config = fixture.config();
    std::ostringstream log;
    REQUIRE(cmd_fetch(config, false, {}, log) == 0);
    RunConfig with_override = config;
    with_override.coefficient_override = 0.75;
    REQUIRE(cmd_calibrate(with_override, log) == 0);
    REQUIRE(cmd_score(config, log) == 0);

    write_file(fixture.dir / "labels.csv", "venue_id,system,class\nsomebody_else,JCR,Q1\n");
    CHECK(cmd_validate(config, fixture.dir / "labels.csv", log) == 1);
    CHECK(log.str().find("NoOverlap") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("hand-built labels reproduce the hand confusion matrix") {
    PipelineFixture fixture("handlabels", default_venue_csv());
    const RunConfig config = fixture.config();
    std::ostringstream log;
    REQUIRE(cmd_fetch(config, false, {}, log) == 0);
    RunConfig with_override = config;
    with_override.coefficient_override = 0.75;
    REQUIRE(cmd_calibrate(with_override, log) == 0);
    REQUIRE(cmd_score(config, log) == 0);

    // all three CS venues rank inside Q1 (tiny corpus): jml and conf1 agree
    // with a Q1 label, jsys disagrees -> a=2, b=1 within CS
    write_file(fixture.dir / "labels.csv",
               "venue_id,system,class\njml,JCR,Q1\njsys,JCR,Q3\nconf1,JCR,Q1\n");
    REQUIRE(cmd_validate(config, fixture.dir / "labels.csv", log) == 0);
    const std::string report = slurp(config.output_dir_path() / "validation_report.md");
    CHECK(report.find("confusion (a=both Q1, b=ours only, c=reference only, d=neither): "
                      "2, 1, 0, 0") != std::string::npos);
    fs::remove_all(fixture.dir);
}

TEST_CASE("cli binary exit codes") {
    const std::string binary = GSR_CLI_BINARY;
    const auto run = [&binary](const std::string& args) {
        const std::string command = binary + " " + args + " > /dev/null 2>&1";
        const int status = std::system(command.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("") == 2);                                    // missing subcommand
    CHECK(run("score") == 2);                               // missing --config
    CHECK(run("score --config /nonexistent.json") == 2);    // unreadable config

    const auto dir = fresh_dir("cli");
    write_file(dir / "bad.json", "{\"venue_lists\": 1}");
    CHECK(run("score --config " + (dir / "bad.json").string()) == 2);

    write_file(dir / "ok.json", "{}");
    // empty config: score fails at runtime (no venue list) -> 2 is reserved
    // for config errors, and a missing venue_list is one
    CHECK(run("score --config " + (dir / "ok.json").string()) == 2);

    write_file(dir / "venues.csv", kVenueHeader);
    write_file(dir / "min.json", "{\"venue_list\": \"venues.csv\"}");
    CHECK(run("fetch --config " + (dir / "min.json").string()) == 0);   // vacuous fetch
    CHECK(run("validate --config " + (dir / "min.json").string()) == 1);  // no rankings yet
    fs::remove_all(dir);
}
