#pragma once
// Composite score, self-citation penalty, and fixed-quota quartile
// assignment.

#include <optional>
#include <string>
#include <vector>

#include "gsr/model.hpp"

namespace gsr {

struct QuotaBand {
    Quartile quartile = Quartile::Q4;
    int first_rank = 1;
    std::optional<int> last_rank;  // absent = open-ended
};

// Q1 ranks 1-50, Q2 51-100, Q3 101-200, Q4 201+.
std::vector<QuotaBand> default_quota();

struct ScoringConfig {
    double w_fwci = 0.35;
    double w_if2 = 0.35;
    double w_h5 = 0.15;
    double w_cagr = 0.15;
    double self_cite_threshold = 0.30;
    double self_cite_penalty = 0.80;
    int min_valid_papers = 20;
    std::vector<QuotaBand> quota = default_quota();
};

// Returns a description of the first violated config invariant, if any.
std::optional<std::string> check_scoring_config(const ScoringConfig& config);

// w_fwci*fwci + w_if2*if2 + w_h5*ln(1+h5) + w_cagr*ln(1+max(cagr,0)),
// multiplied by the penalty iff the self-citation rate strictly exceeds the
// threshold.
double composite_score(double fwci_mean_value, double if2_value, double h5_value,
                       double cite_cagr_value, double self_citation_rate_value,
                       const ScoringConfig& config = {});

double composite_score(const VenueIndicators& indicators, const ScoringConfig& config = {});

Quartile quartile_for_rank(int rank, const std::vector<QuotaBand>& quota);

struct ScoredVenue {
    std::string venue_id;
    double score = 0.0;
    int n_valid_papers = 0;
    double fwci_mean = 0.0;  // first tie-breaker after score
};

// Venues below the valid-paper gate come back unranked with
// InsufficientData; the rest are ranked 1..n by score descending (ties:
// fwci_mean descending, then venue_id ascending) and mapped through the
// quota table. Output is rank order, then unranked venues by id.
std::vector<RankedVenue> assign_quartiles(std::vector<ScoredVenue> scored,
                                          const ScoringConfig& config = {});

}  // namespace gsr
