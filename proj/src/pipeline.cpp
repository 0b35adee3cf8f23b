#include "gsr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "gsr/csv.hpp"

namespace gsr {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ULL;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown key '" + key + "' in " + context);
        }
    }
}

std::string today_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[16];
    std::strftime(buf, sizeof(buf), "%Y-%m-%d", &tm_utc);
    return std::string(buf);
}

std::optional<int> year_from_date(const std::string& iso_date) {
    if (iso_date.size() < 4) return std::nullopt;
    int year = 0;
    for (int i = 0; i < 4; ++i) {
        const char c = iso_date[static_cast<std::size_t>(i)];
        if (c < '0' || c > '9') return std::nullopt;
        year = year * 10 + (c - '0');
    }
    return year;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file.is_open()) {
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    }
    file << content;
    file.flush();
    if (!file.good()) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

}  // namespace

std::vector<double> sweep_coefficients(const SweepRange& range) {
    if (!(range.step > 0.0) || range.lo > range.hi) {
        throw ConfigError("invalid sweep range");
    }
    std::vector<double> out;
    for (int i = 0;; ++i) {
        double c = range.lo + range.step * i;
        c = std::round(c * 1e6) / 1e6;  // keep grid values exact at two decimals
        if (c > range.hi + 1e-9) break;
        out.push_back(c);
    }
    return out;
}

std::filesystem::path RunConfig::venue_list_path() const { return base_dir / venue_list; }
std::filesystem::path RunConfig::snapshot_dir_path() const { return base_dir / snapshot_dir; }
std::filesystem::path RunConfig::output_dir_path() const { return base_dir / output_dir; }

std::filesystem::path RunConfig::calibration_path() const {
    if (!calibration_file.empty()) return base_dir / calibration_file;
    return output_dir_path() / "calibration.json";
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config root must be an object");
    check_keys(doc,
               {"venue_list", "snapshot_dir", "output_dir", "calibration_file", "retrieval_year",
                "retrieval_date", "output_formats", "scoring", "record_validation",
                "quality_filter", "calibration", "ingest", "allow_non_cs_conference"},
               "config");

    RunConfig config;
    config.base_dir = base_dir;

    try {
        if (doc.contains("venue_list")) config.venue_list = doc.at("venue_list").get<std::string>();
        if (doc.contains("snapshot_dir")) {
            config.snapshot_dir = doc.at("snapshot_dir").get<std::string>();
        } else if (const char* env = std::getenv(kCacheDirEnv); env && *env) {
            config.snapshot_dir = env;
        }
        if (doc.contains("output_dir")) config.output_dir = doc.at("output_dir").get<std::string>();
        if (doc.contains("calibration_file")) {
            config.calibration_file = doc.at("calibration_file").get<std::string>();
        }
        if (doc.contains("retrieval_year")) {
            config.retrieval_year = doc.at("retrieval_year").get<int>();
            if (*config.retrieval_year < 1900 || *config.retrieval_year > 2200) {
                throw ConfigError("retrieval_year out of range");
            }
        }
        if (doc.contains("retrieval_date")) {
            config.retrieval_date = doc.at("retrieval_date").get<std::string>();
            if (!year_from_date(*config.retrieval_date)) {
                throw ConfigError("retrieval_date must be ISO-8601 (YYYY-MM-DD)");
            }
        }
        if (doc.contains("output_formats")) {
            config.output_formats.clear();
            for (const auto& f : doc.at("output_formats")) {
                const auto format = output_format_from_string(f.get<std::string>());
                if (!format) throw ConfigError("unknown output format '" + f.get<std::string>() + "'");
                config.output_formats.push_back(*format);
            }
            if (config.output_formats.empty()) throw ConfigError("output_formats is empty");
        }
        if (doc.contains("allow_non_cs_conference")) {
            config.allow_non_cs_conference = doc.at("allow_non_cs_conference").get<bool>();
        }

        if (doc.contains("scoring")) {
            const json& s = doc.at("scoring");
            check_keys(s,
                       {"w_fwci", "w_if2", "w_h5", "w_cagr", "self_cite_threshold",
                        "self_cite_penalty", "min_valid_papers", "quota"},
                       "scoring");
            ScoringConfig& sc = config.scoring;
            if (s.contains("w_fwci")) sc.w_fwci = s.at("w_fwci").get<double>();
            if (s.contains("w_if2")) sc.w_if2 = s.at("w_if2").get<double>();
            if (s.contains("w_h5")) sc.w_h5 = s.at("w_h5").get<double>();
            if (s.contains("w_cagr")) sc.w_cagr = s.at("w_cagr").get<double>();
            if (s.contains("self_cite_threshold")) {
                sc.self_cite_threshold = s.at("self_cite_threshold").get<double>();
            }
            if (s.contains("self_cite_penalty")) {
                sc.self_cite_penalty = s.at("self_cite_penalty").get<double>();
            }
            if (s.contains("min_valid_papers")) {
                sc.min_valid_papers = s.at("min_valid_papers").get<int>();
            }
            if (s.contains("quota")) {
                sc.quota.clear();
                for (const auto& band : s.at("quota")) {
                    check_keys(band, {"quartile", "first_rank", "last_rank"}, "quota band");
                    QuotaBand qb;
                    const auto q = quartile_from_string(band.at("quartile").get<std::string>());
                    if (!q || *q == Quartile::InsufficientData) {
                        throw ConfigError("quota band quartile must be Q1..Q4");
                    }
                    qb.quartile = *q;
                    qb.first_rank = band.at("first_rank").get<int>();
                    if (band.contains("last_rank")) qb.last_rank = band.at("last_rank").get<int>();
                    sc.quota.push_back(qb);
                }
            }
        }

        if (doc.contains("record_validation")) {
            const json& r = doc.at("record_validation");
            check_keys(r, {"min_year", "max_year"}, "record_validation");
            if (r.contains("min_year")) config.record_validation.min_year = r.at("min_year").get<int>();
            if (r.contains("max_year")) config.record_validation.max_year = r.at("max_year").get<int>();
            if (config.record_validation.min_year > config.record_validation.max_year) {
                throw ConfigError("record_validation.min_year > max_year");
            }
        }

        if (doc.contains("quality_filter")) {
            const json& q = doc.at("quality_filter");
            check_keys(q, {"exclusion_mode"}, "quality_filter");
            if (q.contains("exclusion_mode")) {
                const std::string mode = q.at("exclusion_mode").get<std::string>();
                if (mode == "and") {
                    config.exclusion_mode = ExclusionMode::And;
                } else if (mode == "or") {
                    config.exclusion_mode = ExclusionMode::Or;
                } else {
                    throw ConfigError("quality_filter.exclusion_mode must be \"and\" or \"or\"");
                }
            }
        }

        if (doc.contains("calibration")) {
            const json& c = doc.at("calibration");
            check_keys(c, {"window", "restrict_to_if2_window", "coefficient", "fwci_conversion"},
                       "calibration");
            if (c.contains("window")) {
                const std::string window = c.at("window").get<std::string>();
                if (window == "two_year") {
                    config.calibration_window = CalibrationWindowMode::TwoYear;
                } else if (window == "retrieval_year") {
                    config.calibration_window = CalibrationWindowMode::RetrievalYear;
                } else {
                    throw ConfigError(
                        "calibration.window must be \"two_year\" or \"retrieval_year\"");
                }
            }
            if (c.contains("restrict_to_if2_window")) {
                config.calibration_restrict_to_if2_window =
                    c.at("restrict_to_if2_window").get<bool>();
            }
            if (c.contains("coefficient") && !c.at("coefficient").is_null()) {
                config.coefficient_override = c.at("coefficient").get<double>();
            }
            if (c.contains("fwci_conversion") && !c.at("fwci_conversion").is_null()) {
                config.fwci_conversion_override = c.at("fwci_conversion").get<double>();
                if (*config.fwci_conversion_override <= 0.0) {
                    throw ConfigError("calibration.fwci_conversion must be positive");
                }
            }
        }

        if (doc.contains("ingest")) {
            const json& i = doc.at("ingest");
            check_keys(i,
                       {"rate_limit_rps", "max_attempts", "backoff_ms", "page_size", "workers",
                        "dedupe", "openalex_base_url", "s2_base_url"},
                       "ingest");
            if (i.contains("rate_limit_rps")) {
                config.fetch_policy.requests_per_second = i.at("rate_limit_rps").get<double>();
            }
            if (i.contains("max_attempts")) {
                config.fetch_policy.max_attempts = i.at("max_attempts").get<int>();
            }
            if (i.contains("backoff_ms")) {
                config.fetch_policy.backoff_base_ms = i.at("backoff_ms").get<int>();
            }
            if (i.contains("page_size")) config.fetch_policy.page_size = i.at("page_size").get<int>();
            if (i.contains("workers")) config.fetch_workers = i.at("workers").get<int>();
            if (i.contains("dedupe")) {
                const std::string dedupe = i.at("dedupe").get<std::string>();
                if (dedupe == "by_id") {
                    config.dedupe_by_id = true;
                } else if (dedupe == "none") {
                    config.dedupe_by_id = false;
                } else {
                    throw ConfigError("ingest.dedupe must be \"by_id\" or \"none\"");
                }
            }
            if (i.contains("openalex_base_url")) {
                config.openalex_base_url = i.at("openalex_base_url").get<std::string>();
            }
            if (i.contains("s2_base_url")) {
                config.s2_base_url = i.at("s2_base_url").get<std::string>();
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config value: ") + e.what());
    }

    if (config.coefficient_override.has_value() &&
        !(*config.coefficient_override > 0.0 && *config.coefficient_override <= 1.0)) {
        throw ConfigError("calibration.coefficient must be in (0, 1]");
    }
    if (config.fetch_policy.requests_per_second <= 0.0 || config.fetch_policy.max_attempts < 1 ||
        config.fetch_policy.backoff_base_ms < 0 || config.fetch_policy.page_size < 1 ||
        config.fetch_workers < 1) {
        throw ConfigError("ingest limits must be positive");
    }
    if (const auto problem = check_scoring_config(config.scoring)) {
        throw ConfigError(*problem);
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& config_file) {
    std::ifstream file(config_file);
    if (!file.is_open()) {
        throw ConfigError("cannot open config file '" + config_file.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(file);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return parse_run_config(doc, config_file.parent_path());
}

std::string config_hash(const RunConfig& c) {
    ordered_json doc;
    doc["venue_list"] = c.venue_list;
    doc["snapshot_dir"] = c.snapshot_dir;
    doc["output_dir"] = c.output_dir;
    doc["calibration_file"] = c.calibration_file;
    doc["retrieval_year"] = c.retrieval_year.has_value() ? json(*c.retrieval_year) : json(nullptr);
    doc["retrieval_date"] = c.retrieval_date.has_value() ? json(*c.retrieval_date) : json(nullptr);
    ordered_json formats = ordered_json::array();
    for (OutputFormat f : c.output_formats) formats.push_back(to_string(f));
    doc["output_formats"] = std::move(formats);
    ordered_json scoring;
    scoring["w_fwci"] = c.scoring.w_fwci;
    scoring["w_if2"] = c.scoring.w_if2;
    scoring["w_h5"] = c.scoring.w_h5;
    scoring["w_cagr"] = c.scoring.w_cagr;
    scoring["self_cite_threshold"] = c.scoring.self_cite_threshold;
    scoring["self_cite_penalty"] = c.scoring.self_cite_penalty;
    scoring["min_valid_papers"] = c.scoring.min_valid_papers;
    ordered_json quota = ordered_json::array();
    for (const QuotaBand& band : c.scoring.quota) {
        ordered_json b;
        b["quartile"] = to_string(band.quartile);
        b["first_rank"] = band.first_rank;
        b["last_rank"] = band.last_rank.has_value() ? json(*band.last_rank) : json(nullptr);
        quota.push_back(std::move(b));
    }
    scoring["quota"] = std::move(quota);
    doc["scoring"] = std::move(scoring);
    doc["record_validation"] = {{"min_year", c.record_validation.min_year},
                                {"max_year", c.record_validation.max_year}};
    doc["exclusion_mode"] = c.exclusion_mode == ExclusionMode::And ? "and" : "or";
    doc["allow_non_cs_conference"] = c.allow_non_cs_conference;
    doc["calibration_window"] =
        c.calibration_window == CalibrationWindowMode::TwoYear ? "two_year" : "retrieval_year";
    doc["calibration_restrict_to_if2_window"] = c.calibration_restrict_to_if2_window;
    doc["coefficient_override"] =
        c.coefficient_override.has_value() ? json(*c.coefficient_override) : json(nullptr);
    doc["fwci_conversion_override"] =
        c.fwci_conversion_override.has_value() ? json(*c.fwci_conversion_override) : json(nullptr);
    doc["rate_limit_rps"] = c.fetch_policy.requests_per_second;
    doc["max_attempts"] = c.fetch_policy.max_attempts;
    doc["backoff_ms"] = c.fetch_policy.backoff_base_ms;
    doc["page_size"] = c.fetch_policy.page_size;
    doc["workers"] = c.fetch_workers;
    doc["dedupe_by_id"] = c.dedupe_by_id;
    doc["openalex_base_url"] = c.openalex_base_url;
    doc["s2_base_url"] = c.s2_base_url;
    return hex64(fnv1a64(doc.dump()));
}

std::vector<VenueMeta> load_venue_list(const std::filesystem::path& path,
                                       bool allow_non_cs_conference) {
    std::ifstream file(path);
    if (!file.is_open()) {
        throw ConfigError("cannot open venue list '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(file, line)) throw ConfigError("venue list is empty");
    const std::string expected =
        "venue_id,display_name,kind,field,openalex_source_id,s2_venue_id,ccf_tier,jcr_quartile";
    {
        auto cells = split_csv_line(line);
        if (join_csv(cells) != expected) {
            throw ConfigError("venue list header must be: " + expected);
        }
    }

    std::vector<VenueMeta> venues;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 8) {
            throw ConfigError("venue list line " + std::to_string(line_no) + ": expected 8 cells");
        }
        VenueMeta meta;
        meta.venue_id = cells[0];
        meta.display_name = cells[1];
        const auto kind = venue_kind_from_string(cells[2]);
        const auto field = research_field_from_string(cells[3]);
        if (meta.venue_id.empty() || !kind || !field) {
            throw ConfigError("venue list line " + std::to_string(line_no) + ": bad id/kind/field");
        }
        meta.kind = *kind;
        meta.field = *field;
        if (!cells[4].empty()) meta.openalex_source_id = cells[4];
        if (!cells[5].empty()) meta.s2_venue_id = cells[5];
        if (!cells[6].empty()) {
            const auto tier = ccf_tier_from_string(cells[6]);
            if (!tier) throw ConfigError("venue list line " + std::to_string(line_no) + ": bad ccf_tier");
            meta.ccf_tier = tier;
        }
        if (!cells[7].empty()) {
            const auto quartile = quartile_from_string(cells[7]);
            if (!quartile || *quartile == Quartile::InsufficientData) {
                throw ConfigError("venue list line " + std::to_string(line_no) + ": bad jcr_quartile");
            }
            meta.jcr_quartile = quartile;
        }
        if (const auto problem = check_venue_meta(meta, allow_non_cs_conference)) {
            throw ConfigError("venue list line " + std::to_string(line_no) + ": " + *problem);
        }
        if (!seen.insert(meta.venue_id).second) {
            throw ConfigError("venue list line " + std::to_string(line_no) + ": duplicate venue_id '" +
                              meta.venue_id + "'");
        }
        venues.push_back(std::move(meta));
    }
    return venues;
}

std::vector<ReferenceLabel> load_labels_csv(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file.is_open()) {
        throw ConfigError("cannot open labels file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(file, line)) throw ConfigError("labels file is empty");
    {
        auto cells = split_csv_line(line);
        if (join_csv(cells) != "venue_id,system,class") {
            throw ConfigError("labels header must be: venue_id,system,class");
        }
    }
    std::vector<ReferenceLabel> labels;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) {
            throw ConfigError("labels line " + std::to_string(line_no) + ": expected 3 cells");
        }
        if (cells[1] != "JCR" && cells[1] != "CCF") {
            throw ConfigError("labels line " + std::to_string(line_no) + ": unknown system '" +
                              cells[1] + "'");
        }
        labels.push_back(ReferenceLabel{cells[0], cells[1], cells[2]});
    }
    return labels;
}

std::string snapshot_filename(const std::string& venue_id) {
    std::string safe;
    safe.reserve(venue_id.size());
    bool changed = false;
    for (char c : venue_id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-';
        if (ok) {
            safe.push_back(c);
        } else {
            safe.push_back('_');
            changed = true;
        }
    }
    if (changed || safe.empty()) {
        safe += "-" + hex64(fnv1a64(venue_id)).substr(0, 8);
    }
    return safe + ".jsonl";
}

// --- shared command helpers -------------------------------------------------

namespace {

int effective_retrieval_year(const RunConfig& config,
                             const std::vector<Snapshot>& snapshots) {
    if (config.retrieval_year.has_value()) return *config.retrieval_year;
    int best = 0;
    for (const Snapshot& snap : snapshots) {
        if (const auto year = year_from_date(snap.retrieval_date)) best = std::max(best, *year);
    }
    return best > 0 ? best : 2025;
}

int fetch_time_year(const RunConfig& config) {
    if (config.retrieval_year.has_value()) return *config.retrieval_year;
    if (config.retrieval_date.has_value()) {
        if (const auto year = year_from_date(*config.retrieval_date)) return *year;
    }
    return 2025;
}

struct LoadedCorpus {
    std::vector<VenueCorpus> venues;
    std::vector<Snapshot> snapshots;  // aligned with venues
    int n_missing = 0;
};

LoadedCorpus load_corpus(const RunConfig& config, const std::vector<VenueMeta>& metas,
                         std::ostream& log) {
    LoadedCorpus out;
    for (const VenueMeta& meta : metas) {
        const auto path = config.snapshot_dir_path() / snapshot_filename(meta.venue_id);
        if (!std::filesystem::exists(path)) {
            log << "warning: no snapshot for venue '" << meta.venue_id << "'\n";
            ++out.n_missing;
            continue;
        }
        Snapshot snap = read_snapshot(path);
        out.venues.push_back(VenueCorpus{meta, snap.records});
        snap.records.clear();
        out.snapshots.push_back(std::move(snap));
    }
    return out;
}

EngineOptions engine_options(const RunConfig& config, int retrieval_year) {
    EngineOptions opts;
    opts.retrieval_year = retrieval_year;
    opts.exclusion_mode = config.exclusion_mode;
    opts.record_validation = config.record_validation;
    opts.scoring = config.scoring;
    opts.fwci_conversion_override = config.fwci_conversion_override;
    return opts;
}

std::string calibration_to_json(const CalibrationResult& result) {
    ordered_json doc;
    doc["coefficient"] = result.coefficient;
    doc["n_papers"] = result.n_papers;
    ordered_json quantiles;
    quantiles["p10"] = result.quantiles.p10;
    quantiles["p25"] = result.quantiles.p25;
    quantiles["p50"] = result.quantiles.p50;
    quantiles["p75"] = result.quantiles.p75;
    quantiles["p90"] = result.quantiles.p90;
    doc["quantiles"] = std::move(quantiles);
    return doc.dump(2) + "\n";
}

CalibrationResult read_calibration_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw std::runtime_error("calibration file parse error: " + std::string(e.what()));
    }
    CalibrationResult result;
    try {
        result.coefficient = doc.at("coefficient").get<double>();
        result.n_papers = doc.at("n_papers").get<std::int64_t>();
        result.quantiles.p10 = doc.at("quantiles").at("p10").get<double>();
        result.quantiles.p25 = doc.at("quantiles").at("p25").get<double>();
        result.quantiles.p50 = doc.at("quantiles").at("p50").get<double>();
        result.quantiles.p75 = doc.at("quantiles").at("p75").get<double>();
        result.quantiles.p90 = doc.at("quantiles").at("p90").get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error("calibration file is missing fields: " + std::string(e.what()));
    }
    return result;
}

void write_provenance(const RunConfig& config, int retrieval_year, double coefficient,
                      bool overridden) {
    ordered_json doc;
    doc["engine_version"] = kEngineVersion;
    doc["config_hash"] = config_hash(config);
    doc["retrieval_year"] = retrieval_year;
    doc["calibration_coefficient"] = coefficient;
    doc["coefficient_overridden"] = overridden;
    write_text_file(config.output_dir_path() / "provenance.json", doc.dump(2) + "\n");
}

std::vector<std::string> openalex_fields() {
    return {"id",           "publication_year", "type",
            "fwci",         "cited_by_count",   "counts_by_year",
            "is_retracted", "is_paratext",      "abstract_inverted_index",
            "referenced_works"};
}

std::vector<std::string> s2_fields() {
    return {"paperId", "year", "publicationTypes", "citationCount", "abstract"};
}

}  // namespace

// --- fetch -------------------------------------------------------------------

int cmd_fetch(const RunConfig& config, bool force, const std::vector<std::string>& venue_subset,
              std::ostream& log) {
    if (config.venue_list.empty()) throw ConfigError("venue_list is not set");
    std::vector<VenueMeta> venues =
        load_venue_list(config.venue_list_path(), config.allow_non_cs_conference);

    if (!venue_subset.empty()) {
        const std::unordered_set<std::string> wanted(venue_subset.begin(), venue_subset.end());
        std::erase_if(venues, [&](const VenueMeta& m) { return wanted.count(m.venue_id) == 0; });
    }

    std::filesystem::create_directories(config.snapshot_dir_path());

    const int year = fetch_time_year(config);
    const std::string retrieval_date = config.retrieval_date.value_or(today_utc());

    const SourceClient openalex(config.openalex_base_url, config.fetch_policy);
    const SourceClient s2(config.s2_base_url, config.fetch_policy);

    std::atomic<std::size_t> cursor{0};
    std::atomic<int> failures{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= venues.size()) return;
            const VenueMeta& meta = venues[i];
            const auto path = config.snapshot_dir_path() / snapshot_filename(meta.venue_id);
            try {
                if (!force && std::filesystem::exists(path)) {
                    std::lock_guard<std::mutex> lock(log_mutex);
                    log << "venue " << meta.venue_id << ": snapshot exists, skipped\n";
                    continue;
                }
                VenueQuerySpec spec;
                if (meta.openalex_source_id.has_value()) {
                    spec.source = ApiSource::OpenAlexSource;
                    spec.external_id = *meta.openalex_source_id;
                    spec.requested_fields = openalex_fields();
                } else {
                    spec.source = ApiSource::S2Venue;
                    spec.external_id = *meta.s2_venue_id;
                    spec.requested_fields = s2_fields();
                }
                spec.year_start = year - 5;
                spec.year_end = year - 1;

                const SourceClient& client =
                    spec.source == ApiSource::OpenAlexSource ? openalex : s2;

                Snapshot snap;
                snap.venue_id = meta.venue_id;
                snap.retrieval_date = retrieval_date;
                int n_malformed = 0;
                int n_rejected = 0;
                int n_duplicates = 0;
                std::unordered_set<std::string> seen_ids;
                client.fetch_source_papers(spec, [&](nlohmann::json raw) {
                    PaperRecord rec;
                    try {
                        rec = normalize(raw, spec.source, meta.venue_id);
                    } catch (const NormalizeError&) {
                        ++n_malformed;
                        return;
                    }
                    if (validate_record(rec, config.record_validation).has_value()) {
                        ++n_rejected;
                        return;
                    }
                    if (config.dedupe_by_id && !seen_ids.insert(rec.paper_id).second) {
                        ++n_duplicates;
                        return;
                    }
                    snap.records.push_back(std::move(rec));
                });
                write_snapshot(snap, path);
                std::lock_guard<std::mutex> lock(log_mutex);
                log << "venue " << meta.venue_id << ": " << snap.records.size() << " records";
                if (n_malformed > 0) log << ", " << n_malformed << " malformed";
                if (n_rejected > 0) log << ", " << n_rejected << " rejected";
                if (n_duplicates > 0) log << ", " << n_duplicates << " duplicates";
                log << "\n";
            } catch (const std::exception& e) {
                failures.fetch_add(1);
                std::lock_guard<std::mutex> lock(log_mutex);
                log << "venue " << meta.venue_id << ": FAILED: " << e.what() << "\n";
            }
        }
    };

    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.fetch_workers),
                              std::max<std::size_t>(venues.size(), 1));
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    return failures.load() > 0 ? 1 : 0;
}

// --- calibrate -----------------------------------------------------------------

int cmd_calibrate(const RunConfig& config, std::ostream& log) {
    if (config.venue_list.empty()) throw ConfigError("venue_list is not set");
    const std::vector<VenueMeta> venues =
        load_venue_list(config.venue_list_path(), config.allow_non_cs_conference);

    std::filesystem::create_directories(config.output_dir_path());
    const std::string hash = config_hash(config);

    if (config.coefficient_override.has_value()) {
        const double c = *config.coefficient_override;
        CalibrationResult result;
        result.coefficient = c;
        result.n_papers = 0;
        result.quantiles = {c, c, c, c, c};
        write_text_file(config.calibration_path(), calibration_to_json(result));
        write_provenance(config, fetch_time_year(config), c, true);
        log << "calibration measurement skipped: coefficient overridden to "
            << format_shortest(c) << "\n";
        return 0;
    }

    std::vector<VenueMeta> journals;
    for (const VenueMeta& meta : venues) {
        if (meta.kind == VenueKind::Journal) journals.push_back(meta);
    }
    const LoadedCorpus corpus = load_corpus(config, journals, log);
    const int year = effective_retrieval_year(config, corpus.snapshots);

    std::vector<PaperRecord> papers;
    for (const VenueCorpus& vc : corpus.venues) {
        for (const PaperRecord& rec : vc.records) {
            if (validate_record(rec, config.record_validation).has_value()) continue;
            if (config.calibration_restrict_to_if2_window &&
                rec.publication_year != year - 1 && rec.publication_year != year - 2) {
                continue;
            }
            papers.push_back(rec);
        }
    }

    const std::vector<int> window = calibration_window_years(config.calibration_window, year);
    CalibrationResult result;
    try {
        result = compute_calibration(papers, window);
    } catch (const EmptyCorpus& e) {
        log << "EmptyCorpus: " << e.what() << "\n";
        return 1;
    }

    write_text_file(config.calibration_path(), calibration_to_json(result));
    write_provenance(config, year, result.coefficient, false);

    std::vector<double> ratios;
    ratios.reserve(papers.size());
    for (const PaperRecord& p : papers) {
        if (const auto sample = ratio_sample(p, window)) ratios.push_back(sample->ratio);
    }
    std::ostringstream hist_csv;
    emit_figure_ratio_hist(histogram(ratios, 20, 0.0, 1.0), hist_csv, hash);
    write_text_file(config.output_dir_path() / figure_filename(FigureAnalysis::RatioHist),
                    hist_csv.str());

    log << "calibration coefficient: " << format_fixed(result.coefficient, 4) << " over "
        << result.n_papers << " papers\n";
    log << "quantiles p10/p25/p50/p75/p90: " << format_fixed(result.quantiles.p10, 4) << " "
        << format_fixed(result.quantiles.p25, 4) << " " << format_fixed(result.quantiles.p50, 4)
        << " " << format_fixed(result.quantiles.p75, 4) << " "
        << format_fixed(result.quantiles.p90, 4) << "\n";
    return 0;
}

// --- score ----------------------------------------------------------------------

namespace {

struct CoefficientChoice {
    double value = kBaselineCoefficient;
    bool overridden = false;
};

CoefficientChoice choose_coefficient(const RunConfig& config, std::ostream& log,
                                     bool required) {
    if (config.coefficient_override.has_value()) {
        return {*config.coefficient_override, true};
    }
    const auto path = config.calibration_path();
    if (std::filesystem::exists(path)) {
        return {read_calibration_file(path).coefficient, false};
    }
    if (required) {
        throw std::runtime_error("MissingCalibration: no calibration file at '" + path.string() +
                                 "' and no coefficient override");
    }
    log << "no calibration available; using baseline coefficient "
        << format_shortest(kBaselineCoefficient) << "\n";
    return {kBaselineCoefficient, false};
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& log) {
    if (config.venue_list.empty()) throw ConfigError("venue_list is not set");
    const std::vector<VenueMeta> venues =
        load_venue_list(config.venue_list_path(), config.allow_non_cs_conference);

    const LoadedCorpus corpus = load_corpus(config, venues, log);
    if (corpus.venues.empty()) {
        log << "MissingSnapshots: no snapshot files under '"
            << config.snapshot_dir_path().string() << "'\n";
        return 1;
    }

    CoefficientChoice coefficient;
    try {
        coefficient = choose_coefficient(config, log, /*required=*/true);
    } catch (const std::exception& e) {
        log << e.what() << "\n";
        return 1;
    }

    const int year = effective_retrieval_year(config, corpus.snapshots);
    const ScoreRun run = run_scoring(corpus.venues, coefficient.value, engine_options(config, year));

    std::filesystem::create_directories(config.output_dir_path());
    const std::string hash = config_hash(config);

    for (const FieldRanking& ranking : run.fields) {
        for (OutputFormat format : config.output_formats) {
            std::ostringstream out;
            switch (format) {
                case OutputFormat::Csv: emit_ranking_csv(ranking, out, hash); break;
                case OutputFormat::Json: emit_ranking_json(ranking, out, hash); break;
                case OutputFormat::Markdown: emit_ranking_markdown(ranking, out, hash); break;
            }
            write_text_file(config.output_dir_path() / ranking_filename(ranking.field, format),
                            out.str());
        }
        int n_ranked = 0;
        for (const VenueResult& v : ranking.venues) {
            if (v.rank.has_value()) ++n_ranked;
        }
        log << to_string(ranking.field) << ": " << n_ranked << " ranked, "
            << ranking.venues.size() - static_cast<std::size_t>(n_ranked)
            << " with insufficient data\n";
    }

    std::ostringstream composition;
    emit_figure_quartile_composition(run.fields, composition, hash);
    write_text_file(config.output_dir_path() / figure_filename(FigureAnalysis::QuartileComposition),
                    composition.str());
    std::ostringstream dist;
    emit_figure_score_dist(run.fields, dist, hash);
    write_text_file(config.output_dir_path() / figure_filename(FigureAnalysis::ScoreDist),
                    dist.str());

    write_provenance(config, year, coefficient.value, coefficient.overridden);
    if (corpus.n_missing > 0) {
        log << corpus.n_missing << " venue(s) had no snapshot\n";
    }
    return 0;
}

// --- validate --------------------------------------------------------------------

namespace {

struct ParsedRankingRow {
    std::string venue_id;
    Quartile quartile = Quartile::InsufficientData;
};

std::vector<ParsedRankingRow> parse_ranking_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    std::vector<ParsedRankingRow> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line.rfind("rank,venue_id,", 0) != 0) {
                throw std::runtime_error("'" + path.string() + "' is not a ranking CSV");
            }
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 14) {
            throw std::runtime_error("'" + path.string() + "': malformed ranking row");
        }
        const auto quartile = quartile_from_string(cells[13]);
        if (!quartile) {
            throw std::runtime_error("'" + path.string() + "': bad quartile '" + cells[13] + "'");
        }
        rows.push_back(ParsedRankingRow{cells[1], *quartile});
    }
    return rows;
}

}  // namespace

int cmd_validate(const RunConfig& config, const std::filesystem::path& labels_csv,
                 std::ostream& log) {
    if (config.venue_list.empty()) throw ConfigError("venue_list is not set");
    const std::vector<VenueMeta> venues =
        load_venue_list(config.venue_list_path(), config.allow_non_cs_conference);

    // reference labels: venue list first, labels CSV overrides
    std::unordered_map<std::string, Quartile> jcr_labels;
    std::unordered_map<std::string, CcfTier> ccf_labels;
    for (const VenueMeta& meta : venues) {
        if (meta.jcr_quartile.has_value()) jcr_labels[meta.venue_id] = *meta.jcr_quartile;
        if (meta.ccf_tier.has_value()) ccf_labels[meta.venue_id] = *meta.ccf_tier;
    }
    if (!labels_csv.empty()) {
        for (const ReferenceLabel& label : load_labels_csv(labels_csv)) {
            if (label.system == "JCR") {
                const auto quartile = quartile_from_string(label.label_class);
                if (!quartile || *quartile == Quartile::InsufficientData) {
                    throw ConfigError("bad JCR class '" + label.label_class + "' for venue '" +
                                      label.venue_id + "'");
                }
                jcr_labels[label.venue_id] = *quartile;
            } else {
                const auto tier = ccf_tier_from_string(label.label_class);
                if (!tier) {
                    throw ConfigError("bad CCF class '" + label.label_class + "' for venue '" +
                                      label.venue_id + "'");
                }
                ccf_labels[label.venue_id] = *tier;
            }
        }
    }

    std::unordered_map<std::string, ResearchField> venue_fields;
    for (const VenueMeta& meta : venues) venue_fields[meta.venue_id] = meta.field;

    ValidationSummary summary;
    summary.scoring = config.scoring;
    bool any_ranking = false;
    int overlap = 0;

    std::vector<std::pair<CcfTier, Quartile>> ccf_pairs;
    std::map<ResearchField, BinaryConfusion> jcr_confusions;
    std::map<ResearchField, bool> jcr_present;

    for (ResearchField field : {ResearchField::CS, ResearchField::Medicine}) {
        const auto path =
            config.output_dir_path() / ranking_filename(field, OutputFormat::Csv);
        if (!std::filesystem::exists(path)) continue;
        any_ranking = true;
        for (const ParsedRankingRow& row : parse_ranking_csv(path)) {
            if (const auto it = jcr_labels.find(row.venue_id);
                it != jcr_labels.end() && row.quartile != Quartile::InsufficientData) {
                BinaryConfusion& m = jcr_confusions[field];
                const bool ours_q1 = row.quartile == Quartile::Q1;
                const bool ref_q1 = it->second == Quartile::Q1;
                if (ours_q1 && ref_q1) ++m.a;
                if (ours_q1 && !ref_q1) ++m.b;
                if (!ours_q1 && ref_q1) ++m.c;
                if (!ours_q1 && !ref_q1) ++m.d;
                jcr_present[field] = true;
                ++overlap;
            }
            if (const auto it = ccf_labels.find(row.venue_id); it != ccf_labels.end()) {
                ccf_pairs.emplace_back(it->second, row.quartile);
                ++overlap;
            }
        }
    }

    if (!any_ranking) {
        log << "no ranking outputs under '" << config.output_dir_path().string()
            << "'; run score first\n";
        return 1;
    }
    if (overlap == 0) {
        log << "NoOverlap: no venue appears in both the ranking and the reference labels\n";
        return 1;
    }

    for (const auto& [field, confusion] : jcr_confusions) {
        if (!jcr_present[field]) continue;
        summary.agreements.push_back(AgreementSection{field, "JCR", confusion});
        log << "JCR (" << to_string(field) << "): n=" << confusion.total()
            << " agreement=" << format_fixed(agreement_rate(confusion), 4);
        const auto kappa = cohens_kappa(confusion);
        if (kappa.has_value()) {
            log << " kappa=" << format_fixed(*kappa, 4) << "\n";
        } else {
            log << " kappa=undefined\n";
        }
    }
    if (!ccf_pairs.empty()) {
        summary.ccf = ccf_cross_tab(ccf_pairs);
        summary.ccf_n = static_cast<int>(ccf_pairs.size());
        log << "CCF cross-tab over " << ccf_pairs.size() << " venues\n";
    }

    std::filesystem::create_directories(config.output_dir_path());
    std::ostringstream out;
    emit_validation_report_md(summary, out, config_hash(config));
    write_text_file(config.output_dir_path() / "validation_report.md", out.str());
    return 0;
}

// --- sensitivity ------------------------------------------------------------------

int cmd_sensitivity(const RunConfig& config, const SweepRange& range, std::ostream& log) {
    if (config.venue_list.empty()) throw ConfigError("venue_list is not set");
    const std::vector<VenueMeta> venues =
        load_venue_list(config.venue_list_path(), config.allow_non_cs_conference);

    const LoadedCorpus corpus = load_corpus(config, venues, log);
    if (corpus.venues.empty()) {
        log << "MissingSnapshots: no snapshot files under '"
            << config.snapshot_dir_path().string() << "'\n";
        return 1;
    }

    const CoefficientChoice baseline = choose_coefficient(config, log, /*required=*/false);
    const int year = effective_retrieval_year(config, corpus.snapshots);
    const std::vector<double> coefficients = sweep_coefficients(range);

    const SensitivityReport report = sensitivity_sweep(corpus.venues, coefficients, baseline.value,
                                                       engine_options(config, year));

    std::filesystem::create_directories(config.output_dir_path());
    const std::string hash = config_hash(config);

    std::ostringstream csv;
    emit_sensitivity_csv(report, csv, hash);
    write_text_file(config.output_dir_path() / "sensitivity.csv", csv.str());
    std::ostringstream curve;
    emit_figure_sensitivity_curve(report, curve, hash);
    write_text_file(config.output_dir_path() / figure_filename(FigureAnalysis::SensitivityCurve),
                    curve.str());

    log << "baseline coefficient " << format_fixed(baseline.value, 2) << ", "
        << report.n_ranked_baseline << " ranked venues\n";
    for (const SweepEntry& entry : report.sweep) {
        log << "c=" << format_fixed(entry.coefficient, 2) << ": " << entry.n_changed
            << " changed\n";
    }
    return 0;
}

}  // namespace gsr
