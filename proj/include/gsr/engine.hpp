#pragma once
// Venue-level orchestration: turns a corpus of snapshots into indicators,
// scores, and per-field rankings. Shared by the score command, the
// sensitivity sweep, and the test suites.

#include <optional>
#include <vector>

#include "gsr/calibration.hpp"
#include "gsr/indicators.hpp"
#include "gsr/ingest.hpp"
#include "gsr/model.hpp"
#include "gsr/scoring.hpp"

namespace gsr {

struct VenueCorpus {
    VenueMeta meta;
    std::vector<PaperRecord> records;
};

struct EngineOptions {
    int retrieval_year = 2025;
    ExclusionMode exclusion_mode = ExclusionMode::And;
    ValidationOptions record_validation;
    ScoringConfig scoring;
    // Overrides the measured FWCI/IF2 conversion for estimated venues.
    std::optional<double> fwci_conversion_override;
};

struct VenueComputation {
    VenueIndicators indicators;
    bool fwci_is_estimated = false;   // FWCI mean came via the conversion path
    bool self_rate_computable = false;
    bool if2_empty_denominator = false;
    int n_rejected_records = 0;
};

// Indicators for one venue. `coefficient` feeds the IF2 estimation path;
// `conversion` (when present) converts an estimated IF2 into an estimated
// FWCI for conferences without FWCI data.
VenueComputation compute_venue(const VenueCorpus& corpus, double coefficient,
                               std::optional<double> conversion, const EngineOptions& options);

struct VenueResult {
    VenueMeta meta;
    VenueIndicators indicators;
    bool fwci_is_estimated = false;
    bool self_rate_computable = false;
    double score = 0.0;
    std::optional<int> rank;
    Quartile quartile = Quartile::InsufficientData;
};

struct FieldRanking {
    ResearchField field = ResearchField::CS;
    std::optional<double> fwci_conversion;  // measured or overridden; absent if unavailable
    std::vector<VenueResult> venues;        // rank order, then insufficient-data by id
};

struct ScoreRun {
    double coefficient = 0.0;
    std::vector<FieldRanking> fields;  // CS first, then Medicine
};

// Full scoring pass over the corpus at one calibration coefficient.
// Deterministic: venues are processed in venue_id order within each field.
ScoreRun run_scoring(const std::vector<VenueCorpus>& corpus, double coefficient,
                     const EngineOptions& options);

const VenueResult* find_venue(const ScoreRun& run, const std::string& venue_id);

}  // namespace gsr
