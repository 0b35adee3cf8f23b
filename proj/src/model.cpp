#include "gsr/model.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace gsr {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

const char* to_string(DocType t) {
    switch (t) {
        case DocType::Article: return "article";
        case DocType::Review: return "review";
        case DocType::Other: return "other";
    }
    return "other";
}

const char* to_string(VenueKind k) {
    return k == VenueKind::Journal ? "journal" : "conference";
}

const char* to_string(ResearchField f) {
    return f == ResearchField::CS ? "cs" : "medicine";
}

const char* to_string(CcfTier t) {
    switch (t) {
        case CcfTier::A: return "A";
        case CcfTier::B: return "B";
        case CcfTier::C: return "C";
    }
    return "A";
}

const char* to_string(Quartile q) {
    switch (q) {
        case Quartile::Q1: return "Q1";
        case Quartile::Q2: return "Q2";
        case Quartile::Q3: return "Q3";
        case Quartile::Q4: return "Q4";
        case Quartile::InsufficientData: return "insufficient_data";
    }
    return "insufficient_data";
}

const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::InvalidYear: return "InvalidYear";
        case RejectReason::NegativeCitation: return "NegativeCitation";
        case RejectReason::DuplicateYearEntry: return "DuplicateYearEntry";
        case RejectReason::NegativeFwci: return "NegativeFwci";
    }
    return "InvalidYear";
}

std::optional<DocType> doc_type_from_string(std::string_view s) {
    if (s == "article") return DocType::Article;
    if (s == "review") return DocType::Review;
    if (s == "other") return DocType::Other;
    return std::nullopt;
}

std::optional<VenueKind> venue_kind_from_string(std::string_view s) {
    const std::string l = lower(s);
    if (l == "journal") return VenueKind::Journal;
    if (l == "conference") return VenueKind::Conference;
    return std::nullopt;
}

std::optional<ResearchField> research_field_from_string(std::string_view s) {
    const std::string l = lower(s);
    if (l == "cs") return ResearchField::CS;
    if (l == "medicine") return ResearchField::Medicine;
    return std::nullopt;
}

std::optional<CcfTier> ccf_tier_from_string(std::string_view s) {
    if (s == "A" || s == "a") return CcfTier::A;
    if (s == "B" || s == "b") return CcfTier::B;
    if (s == "C" || s == "c") return CcfTier::C;
    return std::nullopt;
}

std::optional<Quartile> quartile_from_string(std::string_view s) {
    if (s == "Q1" || s == "q1") return Quartile::Q1;
    if (s == "Q2" || s == "q2") return Quartile::Q2;
    if (s == "Q3" || s == "q3") return Quartile::Q3;
    if (s == "Q4" || s == "q4") return Quartile::Q4;
    if (s == "insufficient_data") return Quartile::InsufficientData;
    return std::nullopt;
}

DocType doc_type_from_source(std::string_view raw) {
    const std::string l = lower(raw);
    if (l == "article") return DocType::Article;
    if (l == "review") return DocType::Review;
    return DocType::Other;
}

std::optional<RecordRejection> validate_record(const PaperRecord& record,
                                               const ValidationOptions& options) {
    if (record.publication_year < options.min_year ||
        record.publication_year > options.max_year) {
        return RecordRejection{RejectReason::InvalidYear,
                               "publication_year " + std::to_string(record.publication_year) +
                                   " outside [" + std::to_string(options.min_year) + ", " +
                                   std::to_string(options.max_year) + "]"};
    }
    if (record.cited_by_count < 0) {
        return RecordRejection{RejectReason::NegativeCitation,
                               "cited_by_count " + std::to_string(record.cited_by_count)};
    }
    std::unordered_set<int> seen_years;
    seen_years.reserve(record.counts_by_year.size());
    for (const YearCount& yc : record.counts_by_year) {
        if (yc.citations < 0) {
            return RecordRejection{RejectReason::NegativeCitation,
                                   "counts_by_year[" + std::to_string(yc.year) +
                                       "] = " + std::to_string(yc.citations)};
        }
        if (!seen_years.insert(yc.year).second) {
            return RecordRejection{RejectReason::DuplicateYearEntry,
                                   "year " + std::to_string(yc.year) + " appears twice"};
        }
    }
    if (record.fwci.has_value() && *record.fwci < 0.0) {
        return RecordRejection{RejectReason::NegativeFwci, "fwci < 0"};
    }
    return std::nullopt;
}

std::optional<std::string> check_venue_meta(const VenueMeta& meta,
                                            bool allow_non_cs_conference) {
    if (!meta.openalex_source_id.has_value() && !meta.s2_venue_id.has_value()) {
        return "venue '" + meta.venue_id + "' has neither an OpenAlex source id nor an S2 venue id";
    }
    if (meta.kind == VenueKind::Conference && meta.field != ResearchField::CS &&
        !allow_non_cs_conference) {
        return "venue '" + meta.venue_id + "' is a conference outside the CS field";
    }
    return std::nullopt;
}

}  // namespace gsr
