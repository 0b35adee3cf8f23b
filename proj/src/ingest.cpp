#include "gsr/ingest.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "httplib.h"

namespace gsr {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// --- global per-host rate limiting ---------------------------------------

class RateLimiter {
public:
    explicit RateLimiter(double requests_per_second) { set_rate(requests_per_second); }

    void set_rate(double requests_per_second) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (requests_per_second <= 0.0) requests_per_second = 1.0;
        interval_ = std::chrono::nanoseconds(
            static_cast<std::int64_t>(1e9 / requests_per_second));
    }

    void acquire() {
        std::chrono::steady_clock::time_point wake;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            const auto now = std::chrono::steady_clock::now();
            if (next_ < now) next_ = now;
            wake = next_;
            next_ += interval_;
        }
        std::this_thread::sleep_until(wake);
    }

private:
    std::mutex mutex_;
    std::chrono::steady_clock::time_point next_{};
    std::chrono::nanoseconds interval_{0};
};

RateLimiter& limiter_for_host(const std::string& host, double requests_per_second) {
    static std::mutex registry_mutex;
    static std::map<std::string, std::unique_ptr<RateLimiter>> registry;
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto it = registry.find(host);
    if (it == registry.end()) {
        it = registry.emplace(host, std::make_unique<RateLimiter>(requests_per_second)).first;
    } else {
        it->second->set_rate(requests_per_second);
    }
    return *it->second;
}

std::string getenv_or_empty(const char* name) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : std::string();
}

// --- snapshot line parsing ------------------------------------------------

SnapshotError corrupt(std::size_t line, const std::string& why) {
    return SnapshotError(SnapshotError::Kind::CorruptLine,
                         "line " + std::to_string(line) + ": " + why, line);
}

PaperRecord record_from_json(const ordered_json& obj, std::size_t line) {
    if (!obj.is_object()) throw corrupt(line, "record is not an object");
    PaperRecord rec;
    try {
        rec.paper_id = obj.at("paper_id").get<std::string>();
        rec.venue_id = obj.at("venue_id").get<std::string>();
        rec.publication_year = obj.at("publication_year").get<int>();
        const auto type = doc_type_from_string(obj.at("doc_type").get<std::string>());
        if (!type) throw corrupt(line, "unknown doc_type");
        rec.doc_type = *type;
        if (obj.contains("fwci")) rec.fwci = obj.at("fwci").get<double>();
        rec.cited_by_count = obj.at("cited_by_count").get<std::int64_t>();
        for (const auto& entry : obj.at("counts_by_year")) {
            rec.counts_by_year.push_back(YearCount{entry.at("year").get<int>(),
                                                   entry.at("citations").get<std::int64_t>()});
        }
        rec.is_retracted = obj.at("is_retracted").get<bool>();
        rec.is_paratext = obj.at("is_paratext").get<bool>();
        rec.has_abstract = obj.at("has_abstract").get<bool>();
        if (obj.contains("referenced_works")) {
            rec.referenced_works = obj.at("referenced_works").get<std::vector<std::string>>();
        }
    } catch (const SnapshotError&) {
        throw;
    } catch (const json::exception& e) {
        throw corrupt(line, e.what());
    }
    return rec;
}

}  // namespace

std::string record_to_json_line(const PaperRecord& record) {
    ordered_json obj;
    obj["paper_id"] = record.paper_id;
    obj["venue_id"] = record.venue_id;
    obj["publication_year"] = record.publication_year;
    obj["doc_type"] = to_string(record.doc_type);
    if (record.fwci.has_value()) obj["fwci"] = *record.fwci;
    obj["cited_by_count"] = record.cited_by_count;
    ordered_json counts = ordered_json::array();
    for (const YearCount& yc : record.counts_by_year) {
        ordered_json entry;
        entry["year"] = yc.year;
        entry["citations"] = yc.citations;
        counts.push_back(std::move(entry));
    }
    obj["counts_by_year"] = std::move(counts);
    obj["is_retracted"] = record.is_retracted;
    obj["is_paratext"] = record.is_paratext;
    obj["has_abstract"] = record.has_abstract;
    if (record.referenced_works.has_value()) obj["referenced_works"] = *record.referenced_works;
    return obj.dump();
}

std::string snapshot_to_string(const Snapshot& snapshot) {
    ordered_json header;
    header["schema_version"] = kSnapshotSchemaVersion;
    header["venue_id"] = snapshot.venue_id;
    header["retrieval_date"] = snapshot.retrieval_date;

    std::string out = header.dump();
    out.push_back('\n');
    for (const PaperRecord& rec : snapshot.records) {
        if (rec.venue_id != snapshot.venue_id) {
            throw std::invalid_argument("record '" + rec.paper_id +
                                        "' does not belong to venue '" + snapshot.venue_id + "'");
        }
        out += record_to_json_line(rec);
        out.push_back('\n');
    }
    return out;
}

void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
    const std::string text = snapshot_to_string(snapshot);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file.is_open()) {
        throw SnapshotError(SnapshotError::Kind::IoFailure,
                            "cannot open '" + path.string() + "' for writing");
    }
    file << text;
    file.flush();
    if (!file.good()) {
        throw SnapshotError(SnapshotError::Kind::IoFailure,
                            "write to '" + path.string() + "' failed");
    }
}

Snapshot parse_snapshot(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) {
        throw SnapshotError(SnapshotError::Kind::CorruptLine, "empty snapshot file", 1);
    }
    ++line_no;
    ordered_json header;
    try {
        header = ordered_json::parse(line);
    } catch (const json::exception& e) {
        throw corrupt(line_no, e.what());
    }
    if (!header.is_object() || !header.contains("schema_version")) {
        throw corrupt(line_no, "missing schema_version in header");
    }
    if (header.at("schema_version") != kSnapshotSchemaVersion) {
        throw SnapshotError(SnapshotError::Kind::SchemaVersionMismatch,
                            "snapshot schema_version " + header.at("schema_version").dump() +
                                " != " + kSnapshotSchemaVersion);
    }

    Snapshot snapshot;
    try {
        snapshot.venue_id = header.at("venue_id").get<std::string>();
        snapshot.retrieval_date = header.at("retrieval_date").get<std::string>();
    } catch (const json::exception& e) {
        throw corrupt(line_no, e.what());
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            // a blank final line is just the terminating newline
            if (in.peek() == std::char_traits<char>::eof()) break;
            throw corrupt(line_no, "blank line inside snapshot");
        }
        ordered_json obj;
        try {
            obj = ordered_json::parse(line);
        } catch (const json::exception& e) {
            throw corrupt(line_no, e.what());
        }
        PaperRecord rec = record_from_json(obj, line_no);
        if (rec.venue_id != snapshot.venue_id) {
            throw corrupt(line_no, "record venue_id '" + rec.venue_id +
                                       "' does not match header '" + snapshot.venue_id + "'");
        }
        snapshot.records.push_back(std::move(rec));
    }
    return snapshot;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.is_open()) {
        throw SnapshotError(SnapshotError::Kind::IoFailure,
                            "cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_snapshot(buffer.str());
}

// --- normalization --------------------------------------------------------

PaperRecord normalize(const json& raw, ApiSource source, const std::string& venue_id) {
    PaperRecord rec;
    rec.venue_id = venue_id;

    if (source == ApiSource::OpenAlexSource) {
        if (!raw.contains("id") || !raw.at("id").is_string() ||
            raw.at("id").get<std::string>().empty()) {
            throw NormalizeError(NormalizeError::Kind::MissingIdentifier,
                                 "work object has no id");
        }
        rec.paper_id = raw.at("id").get<std::string>();
        if (!raw.contains("publication_year") || !raw.at("publication_year").is_number_integer()) {
            throw NormalizeError(NormalizeError::Kind::MissingYear,
                                 "work '" + rec.paper_id + "' has no publication_year");
        }
        rec.publication_year = raw.at("publication_year").get<int>();
        rec.doc_type = doc_type_from_source(
            raw.contains("type") && raw.at("type").is_string()
                ? raw.at("type").get<std::string>()
                : std::string());
        if (raw.contains("fwci") && raw.at("fwci").is_number()) {
            rec.fwci = raw.at("fwci").get<double>();
        }
        if (raw.contains("cited_by_count") && raw.at("cited_by_count").is_number_integer()) {
            rec.cited_by_count = raw.at("cited_by_count").get<std::int64_t>();
        }
        if (raw.contains("counts_by_year") && raw.at("counts_by_year").is_array()) {
            for (const auto& entry : raw.at("counts_by_year")) {
                if (!entry.contains("year")) continue;
                YearCount yc;
                yc.year = entry.at("year").get<int>();
                if (entry.contains("cited_by_count") && entry.at("cited_by_count").is_number()) {
                    yc.citations = entry.at("cited_by_count").get<std::int64_t>();
                }
                rec.counts_by_year.push_back(yc);
            }
        }
        rec.is_retracted = raw.value("is_retracted", false);
        rec.is_paratext = raw.value("is_paratext", false);
        rec.has_abstract = raw.contains("abstract_inverted_index") &&
                           raw.at("abstract_inverted_index").is_object() &&
                           !raw.at("abstract_inverted_index").empty();
        if (raw.contains("referenced_works") && raw.at("referenced_works").is_array()) {
            std::vector<std::string> refs;
            for (const auto& ref : raw.at("referenced_works")) {
                if (ref.is_string()) refs.push_back(ref.get<std::string>());
            }
            rec.referenced_works = std::move(refs);
        }
        return rec;
    }

    // Semantic Scholar: no FWCI, no per-year series.
    if (!raw.contains("paperId") || !raw.at("paperId").is_string() ||
        raw.at("paperId").get<std::string>().empty()) {
        throw NormalizeError(NormalizeError::Kind::MissingIdentifier,
                             "paper object has no paperId");
    }
    rec.paper_id = raw.at("paperId").get<std::string>();
    if (!raw.contains("year") || !raw.at("year").is_number_integer()) {
        throw NormalizeError(NormalizeError::Kind::MissingYear,
                             "paper '" + rec.paper_id + "' has no year");
    }
    rec.publication_year = raw.at("year").get<int>();
    rec.doc_type = DocType::Other;
    if (raw.contains("publicationTypes") && raw.at("publicationTypes").is_array()) {
        for (const auto& t : raw.at("publicationTypes")) {
            if (!t.is_string()) continue;
            const std::string type = t.get<std::string>();
            if (type == "Review") {
                rec.doc_type = DocType::Review;
                break;
            }
            // proceedings papers count as articles for the denominator
            if (type == "JournalArticle" || type == "Conference") {
                rec.doc_type = DocType::Article;
            }
        }
    }
    if (raw.contains("citationCount") && raw.at("citationCount").is_number_integer()) {
        rec.cited_by_count = raw.at("citationCount").get<std::int64_t>();
    }
    rec.has_abstract = raw.contains("abstract") && raw.at("abstract").is_string() &&
                       !raw.at("abstract").get<std::string>().empty();
    if (raw.contains("references") && raw.at("references").is_array()) {
        std::vector<std::string> refs;
        for (const auto& ref : raw.at("references")) {
            if (ref.is_object() && ref.contains("paperId") && ref.at("paperId").is_string()) {
                refs.push_back(ref.at("paperId").get<std::string>());
            }
        }
        rec.referenced_works = std::move(refs);
    }
    return rec;
}

// --- quality filter --------------------------------------------------------

namespace {

bool is_article_or_review(const PaperRecord& r) {
    return r.doc_type == DocType::Article || r.doc_type == DocType::Review;
}

bool excluded_short_item(const PaperRecord& r, ExclusionMode mode) {
    if (mode == ExclusionMode::And) {
        return !r.has_abstract && r.cited_by_count == 0;
    }
    return !r.has_abstract || r.cited_by_count == 0;
}

}  // namespace

bool passes_quality_filter(const PaperRecord& r, FilterPurpose purpose,
                           const FilterOptions& options) {
    if (!is_article_or_review(r) || r.is_retracted || r.is_paratext) return false;
    const int y = options.retrieval_year;
    switch (purpose) {
        case FilterPurpose::FwciMean:
            return r.publication_year >= y - 3 && r.publication_year <= y - 1 &&
                   r.fwci.has_value() && *r.fwci > 0.0;
        case FilterPurpose::IF2:
            return (r.publication_year == y - 1 || r.publication_year == y - 2) &&
                   !excluded_short_item(r, options.exclusion_mode);
        case FilterPurpose::H5:
            return r.publication_year >= y - 5 && r.publication_year <= y - 1 &&
                   !excluded_short_item(r, options.exclusion_mode);
    }
    return false;
}

std::vector<PaperRecord> apply_quality_filter(const std::vector<PaperRecord>& records,
                                              FilterPurpose purpose,
                                              const FilterOptions& options) {
    std::vector<PaperRecord> out;
    for (const PaperRecord& r : records) {
        if (passes_quality_filter(r, purpose, options)) out.push_back(r);
    }
    return out;
}

std::vector<PaperRecord> fwci_candidates(const std::vector<PaperRecord>& records,
                                         const FilterOptions& options) {
    const int y = options.retrieval_year;
    std::vector<PaperRecord> out;
    for (const PaperRecord& r : records) {
        if (is_article_or_review(r) && !r.is_retracted && !r.is_paratext &&
            r.publication_year >= y - 3 && r.publication_year <= y - 1) {
            out.push_back(r);
        }
    }
    return out;
}

// --- fetch client -----------------------------------------------------------

namespace {

std::string host_from_base_url(const std::string& base_url) {
    std::string host = base_url;
    if (auto pos = host.find("://"); pos != std::string::npos) host = host.substr(pos + 3);
    if (auto pos = host.find('/'); pos != std::string::npos) host = host.substr(0, pos);
    return host;
}

// one client per request: httplib clients are not safe for concurrent calls
HttpTransport make_httplib_transport(const std::string& base_url) {
    return [base_url](const std::string& path_and_query, const HttpHeaders& headers) {
        httplib::Client client(base_url);
        client.set_connection_timeout(30);
        client.set_read_timeout(60);
        client.set_follow_location(true);
        httplib::Headers hl;
        for (const auto& [name, value] : headers) hl.emplace(name, value);
        auto result = client.Get(path_and_query, hl);
        if (!result) return HttpResponse{0, httplib::to_string(result.error())};
        return HttpResponse{result->status, result->body};
    };
}

std::string join_fields(const std::vector<std::string>& fields) {
    std::string out;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) out.push_back(',');
        out += fields[i];
    }
    return out;
}

}  // namespace

std::string url_encode(std::string_view value) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(value.size());
    for (unsigned char c : value) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~' || c == ':' ||
            c == ',') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0x0F]);
        }
    }
    return out;
}

SourceClient::SourceClient(const std::string& base_url, FetchPolicy policy)
    : transport_(make_httplib_transport(base_url)),
      host_key_(host_from_base_url(base_url)),
      policy_(policy) {}

SourceClient::SourceClient(HttpTransport transport, std::string host_key, FetchPolicy policy)
    : transport_(std::move(transport)), host_key_(std::move(host_key)), policy_(policy) {}

HttpResponse SourceClient::get_with_retry(const std::string& path_and_query,
                                          const HttpHeaders& headers) const {
    RateLimiter& limiter = limiter_for_host(host_key_, policy_.requests_per_second);
    HttpResponse response;
    for (int attempt = 1; attempt <= policy_.max_attempts; ++attempt) {
        limiter.acquire();
        response = transport_(path_and_query, headers);
        if (response.status == 404) {
            throw FetchError(FetchError::Kind::NotFound, "404 for " + path_and_query);
        }
        if (response.status >= 200 && response.status < 300) return response;
        const bool transient =
            response.status == 0 || response.status == 429 || response.status >= 500;
        if (!transient || attempt == policy_.max_attempts) break;
        const auto delay = std::chrono::milliseconds(
            static_cast<std::int64_t>(policy_.backoff_base_ms) << (attempt - 1));
        std::this_thread::sleep_for(delay);
    }
    if (response.status == 429) {
        throw FetchError(FetchError::Kind::RateLimited,
                         "still rate-limited after " + std::to_string(policy_.max_attempts) +
                             " attempts: " + path_and_query);
    }
    throw FetchError(FetchError::Kind::Transport,
                     "request failed with status " + std::to_string(response.status) + ": " +
                         path_and_query);
}

void SourceClient::fetch_source_papers(
    const VenueQuerySpec& spec, const std::function<void(nlohmann::json)>& on_record) const {
    if (spec.year_start > spec.year_end) {
        throw std::invalid_argument("year_start > year_end");
    }
    if (spec.requested_fields.empty()) {
        throw std::invalid_argument("requested_fields is empty");
    }
    const std::string fields = url_encode(join_fields(spec.requested_fields));

    if (spec.source == ApiSource::OpenAlexSource) {
        const std::string mailto = getenv_or_empty(kContactEmailEnv);
        std::string cursor = "*";
        while (true) {
            std::string path = "/works?filter=primary_location.source.id:" +
                               url_encode(spec.external_id) + ",publication_year:" +
                               std::to_string(spec.year_start) + "-" +
                               std::to_string(spec.year_end) + "&select=" + fields +
                               "&per-page=" + std::to_string(policy_.page_size) +
                               "&cursor=" + url_encode(cursor);
            if (!mailto.empty()) path += "&mailto=" + url_encode(mailto);

            const HttpResponse response = get_with_retry(path, {});
            json body;
            try {
                body = json::parse(response.body);
            } catch (const json::exception& e) {
                throw FetchError(FetchError::Kind::MalformedResponse, e.what());
            }
            if (!body.contains("results") || !body.at("results").is_array()) {
                throw FetchError(FetchError::Kind::MalformedResponse,
                                 "response has no results array");
            }
            for (auto& item : body.at("results")) on_record(std::move(item));

            if (!body.contains("meta") || !body.at("meta").contains("next_cursor") ||
                body.at("meta").at("next_cursor").is_null()) {
                break;
            }
            const std::string next = body.at("meta").at("next_cursor").get<std::string>();
            if (next.empty() || body.at("results").empty()) break;
            cursor = next;
        }
        return;
    }

    // Semantic Scholar bulk search, token continuation
    const std::string api_key = getenv_or_empty(kS2ApiKeyEnv);
    HttpHeaders headers;
    if (!api_key.empty()) headers.emplace_back("x-api-key", api_key);
    std::string token;
    while (true) {
        std::string path = "/graph/v1/paper/search/bulk?venue=" + url_encode(spec.external_id) +
                           "&year=" + std::to_string(spec.year_start) + "-" +
                           std::to_string(spec.year_end) + "&fields=" + fields;
        if (!token.empty()) path += "&token=" + url_encode(token);

        const HttpResponse response = get_with_retry(path, headers);
        json body;
        try {
            body = json::parse(response.body);
        } catch (const json::exception& e) {
            throw FetchError(FetchError::Kind::MalformedResponse, e.what());
        }
        if (!body.contains("data") || !body.at("data").is_array()) {
            throw FetchError(FetchError::Kind::MalformedResponse, "response has no data array");
        }
        for (auto& item : body.at("data")) on_record(std::move(item));

        if (!body.contains("token") || body.at("token").is_null()) break;
        const std::string next = body.at("token").get<std::string>();
        if (next.empty() || body.at("data").empty()) break;
        token = next;
    }
}

std::vector<nlohmann::json> SourceClient::fetch_all(const VenueQuerySpec& spec) const {
    std::vector<nlohmann::json> out;
    fetch_source_papers(spec, [&out](nlohmann::json record) { out.push_back(std::move(record)); });
    return out;
}

}  // namespace gsr
