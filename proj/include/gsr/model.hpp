#pragma once
// Core domain types shared by every stage of the ranking engine.
// All types are immutable value objects after construction.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gsr {

enum class DocType { Article, Review, Other };
enum class VenueKind { Journal, Conference };
enum class ResearchField { CS, Medicine };
enum class CcfTier { A, B, C };
enum class Quartile { Q1, Q2, Q3, Q4, InsufficientData };

const char* to_string(DocType t);
const char* to_string(VenueKind k);
const char* to_string(ResearchField f);
const char* to_string(CcfTier t);
const char* to_string(Quartile q);

std::optional<DocType> doc_type_from_string(std::string_view s);
std::optional<VenueKind> venue_kind_from_string(std::string_view s);
std::optional<ResearchField> research_field_from_string(std::string_view s);
std::optional<CcfTier> ccf_tier_from_string(std::string_view s);
std::optional<Quartile> quartile_from_string(std::string_view s);

// Source databases use a wider type vocabulary; anything that is not an
// article or review collapses to Other.
DocType doc_type_from_source(std::string_view raw);

struct YearCount {
    int year = 0;
    std::int64_t citations = 0;
    bool operator==(const YearCount&) const = default;
};

// One publication as retrieved from a source database.
struct PaperRecord {
    std::string paper_id;
    std::string venue_id;
    int publication_year = 0;
    DocType doc_type = DocType::Other;
    std::optional<double> fwci;
    std::int64_t cited_by_count = 0;
    std::vector<YearCount> counts_by_year;  // empty = no time series at the source
    bool is_retracted = false;
    bool is_paratext = false;
    bool has_abstract = false;
    std::optional<std::vector<std::string>> referenced_works;
    bool operator==(const PaperRecord&) const = default;
};

struct VenueMeta {
    std::string venue_id;
    std::string display_name;
    VenueKind kind = VenueKind::Journal;
    ResearchField field = ResearchField::CS;
    std::optional<std::string> openalex_source_id;
    std::optional<std::string> s2_venue_id;
    std::optional<CcfTier> ccf_tier;
    std::optional<Quartile> jcr_quartile;
};

struct VenueIndicators {
    double fwci_mean = 0.0;
    double fwci_coverage = 0.0;   // in [0,1]
    double if2 = 0.0;
    bool if2_is_estimated = false;
    int h5 = 0;
    double cite_cagr = 0.0;       // >= -1; negative values preserved, scoring clamps
    double self_citation_rate = 0.0;
    int n_valid_papers = 0;
};

struct RankedVenue {
    std::string venue_id;
    double score = 0.0;
    std::optional<int> rank;      // absent iff quartile == InsufficientData
    Quartile quartile = Quartile::InsufficientData;
};

struct CalibrationQuantiles {
    double p10 = 0.0;
    double p25 = 0.0;
    double p50 = 0.0;
    double p75 = 0.0;
    double p90 = 0.0;
};

struct CalibrationResult {
    double coefficient = 0.0;     // == quantiles.p50
    std::int64_t n_papers = 0;
    CalibrationQuantiles quantiles;
};

// --- record validation -------------------------------------------------

enum class RejectReason {
    InvalidYear,
    NegativeCitation,
    DuplicateYearEntry,
    NegativeFwci,
};

const char* to_string(RejectReason r);

struct RecordRejection {
    RejectReason reason;
    std::string detail;
};

struct ValidationOptions {
    int min_year = 1950;  // plausibility window for publication_year
    int max_year = 2026;
};

// Returns the violated invariant, or nullopt when the record is acceptable.
std::optional<RecordRejection> validate_record(const PaperRecord& record,
                                               const ValidationOptions& options = {});

// Venue-level invariant check; returns a description of the first violation.
std::optional<std::string> check_venue_meta(const VenueMeta& meta,
                                            bool allow_non_cs_conference = false);

}  // namespace gsr
