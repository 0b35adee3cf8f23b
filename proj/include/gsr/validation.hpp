#pragma once
// Agreement with external reference partitions and ranking robustness to the
// calibration coefficient.

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gsr/engine.hpp"
#include "gsr/model.hpp"

namespace gsr {

// Q1 vs non-Q1 confusion: a = both Q1, b = ours Q1 / reference non-Q1,
// c = ours non-Q1 / reference Q1, d = both non-Q1.
struct BinaryConfusion {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 0;
    std::int64_t d = 0;
    std::int64_t total() const { return a + b + c + d; }
};

double agreement_rate(const BinaryConfusion& confusion);

// Chance-corrected agreement. Returns nullopt when the expected agreement is
// 1 (degenerate marginals), where kappa is undefined.
std::optional<double> cohens_kappa(const BinaryConfusion& confusion);

double expected_agreement(const BinaryConfusion& confusion);

// --- CCF cross-tabulation -------------------------------------------------

// Column order: Q1, Q2, Q3, Q4, InsufficientData.
inline constexpr std::size_t kCrossTabColumns = 5;

std::size_t cross_tab_column(Quartile q);

struct CrossTabRow {
    CcfTier tier = CcfTier::A;
    std::array<std::int64_t, kCrossTabColumns> counts{};
    std::int64_t row_total() const;
    double row_percent(std::size_t column) const;  // 0..100
};

struct CcfCrossTab {
    std::vector<CrossTabRow> rows;  // tiers present, in A/B/C order
};

CcfCrossTab ccf_cross_tab(const std::vector<std::pair<CcfTier, Quartile>>& venues);

// --- sensitivity sweep ------------------------------------------------------

struct SweepEntry {
    double coefficient = 0.0;
    int n_changed = 0;
    std::vector<std::string> changed_venue_ids;  // sorted
};

struct SensitivityReport {
    double baseline_coefficient = 0.0;
    int n_ranked_baseline = 0;  // venues with sufficient data in the baseline run
    std::vector<SweepEntry> sweep;
};

// Re-scores the corpus at every coefficient and counts venues whose quartile
// differs from the baseline run. Journals with real time series are
// unaffected by construction; only estimated-IF2 venues can move.
SensitivityReport sensitivity_sweep(const std::vector<VenueCorpus>& corpus,
                                    const std::vector<double>& coefficients,
                                    double baseline_coefficient,
                                    const EngineOptions& options);

}  // namespace gsr
