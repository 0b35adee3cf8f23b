#pragma once
// Retrieval of paper records from the two open APIs, normalization into
// PaperRecord, quality filtering, and line-delimited snapshot persistence.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gsr/model.hpp"

namespace gsr {

inline constexpr const char* kContactEmailEnv = "GSR_CONTACT_EMAIL";
inline constexpr const char* kS2ApiKeyEnv = "GSR_S2_API_KEY";
inline constexpr const char* kCacheDirEnv = "GSR_CACHE_DIR";
inline constexpr const char* kSnapshotSchemaVersion = "1";

enum class ApiSource { OpenAlexSource, S2Venue };

struct VenueQuerySpec {
    ApiSource source = ApiSource::OpenAlexSource;
    std::string external_id;
    int year_start = 0;
    int year_end = 0;  // inclusive
    std::vector<std::string> requested_fields;
};

struct Snapshot {
    std::string venue_id;
    std::string retrieval_date;  // ISO-8601 date; citations are measured relative to it
    std::vector<PaperRecord> records;
};

// --- snapshot files -----------------------------------------------------

class SnapshotError : public std::runtime_error {
public:
    enum class Kind { IoFailure, SchemaVersionMismatch, CorruptLine };

    SnapshotError(Kind kind, const std::string& message, std::size_t line = 0)
        : std::runtime_error(message), kind_(kind), line_(line) {}

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }  // 1-based, 0 = not line-specific

private:
    Kind kind_;
    std::size_t line_;
};

// One header line, then one record object per line. Keys appear in the
// declared PaperRecord field order; absent optionals are omitted.
std::string snapshot_to_string(const Snapshot& snapshot);
void write_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);
Snapshot read_snapshot(const std::filesystem::path& path);
Snapshot parse_snapshot(const std::string& text);

std::string record_to_json_line(const PaperRecord& record);

// --- normalization ------------------------------------------------------

class NormalizeError : public std::runtime_error {
public:
    enum class Kind { MissingIdentifier, MissingYear };

    NormalizeError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Maps one raw source object onto a PaperRecord for the given venue. A
// missing counts_by_year becomes the empty list, which downstream reads as
// "no time series at the source".
PaperRecord normalize(const nlohmann::json& raw, ApiSource source, const std::string& venue_id);

// --- quality filter -----------------------------------------------------

enum class FilterPurpose { FwciMean, IF2, H5 };

// How the "no abstract / no citations" exclusion combines for IF2 and H5.
enum class ExclusionMode { And, Or };

struct FilterOptions {
    int retrieval_year = 2025;
    ExclusionMode exclusion_mode = ExclusionMode::And;
};

bool passes_quality_filter(const PaperRecord& record, FilterPurpose purpose,
                           const FilterOptions& options);

std::vector<PaperRecord> apply_quality_filter(const std::vector<PaperRecord>& records,
                                              FilterPurpose purpose,
                                              const FilterOptions& options);

// The FwciMean conditions minus the FWCI-presence cut. This is the coverage
// denominator set handed to fwci_mean, and the valid-paper count behind the
// insufficient-data gate.
std::vector<PaperRecord> fwci_candidates(const std::vector<PaperRecord>& records,
                                         const FilterOptions& options);

// --- fetch client -------------------------------------------------------

struct HttpResponse {
    int status = 0;  // 0 = transport failure
    std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;
using HttpTransport = std::function<HttpResponse(const std::string& path_and_query,
                                                 const HttpHeaders& headers)>;

struct FetchPolicy {
    double requests_per_second = 10.0;
    int max_attempts = 3;       // total tries per request
    int backoff_base_ms = 500;  // doubles per retry
    int page_size = 200;
};

class FetchError : public std::runtime_error {
public:
    enum class Kind { NotFound, RateLimited, MalformedResponse, Transport };

    FetchError(Kind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Paginating client for one API host. Rate limiting is global per host, so
// concurrent clients against the same host share one limiter.
class SourceClient {
public:
    SourceClient(const std::string& base_url, FetchPolicy policy = {});
    SourceClient(HttpTransport transport, std::string host_key, FetchPolicy policy = {});

    // Follows cursor/token pagination to exhaustion, invoking on_record for
    // every raw paper object in page order.
    void fetch_source_papers(const VenueQuerySpec& spec,
                             const std::function<void(nlohmann::json)>& on_record) const;

    std::vector<nlohmann::json> fetch_all(const VenueQuerySpec& spec) const;

private:
    HttpResponse get_with_retry(const std::string& path_and_query,
                                const HttpHeaders& headers) const;

    HttpTransport transport_;
    std::string host_key_;
    FetchPolicy policy_;
};

std::string url_encode(std::string_view value);

}  // namespace gsr
