#include "gsr/scoring.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

std::vector<QuotaBand> default_quota() {
    return {
        {Quartile::Q1, 1, 50},
        {Quartile::Q2, 51, 100},
        {Quartile::Q3, 101, 200},
        {Quartile::Q4, 201, std::nullopt},
    };
}

std::optional<std::string> check_scoring_config(const ScoringConfig& config) {
    if (config.w_fwci < 0 || config.w_if2 < 0 || config.w_h5 < 0 || config.w_cagr < 0) {
        return "scoring weights must be non-negative";
    }
    if (!(config.self_cite_penalty > 0.0 && config.self_cite_penalty <= 1.0)) {
        return "self_cite_penalty must be in (0, 1]";
    }
    if (config.min_valid_papers < 0) {
        return "min_valid_papers must be non-negative";
    }
    if (config.quota.empty()) return "quota table is empty";
    int expected_first = 1;
    for (std::size_t i = 0; i < config.quota.size(); ++i) {
        const QuotaBand& band = config.quota[i];
        if (band.first_rank != expected_first) {
            return "quota ranges must be contiguous and ascending from rank 1";
        }
        if (band.last_rank.has_value()) {
            if (*band.last_rank < band.first_rank) return "quota range ends before it starts";
            expected_first = *band.last_rank + 1;
        } else if (i + 1 != config.quota.size()) {
            return "only the final quota band may be open-ended";
        }
    }
    return std::nullopt;
}

double composite_score(double fwci_mean_value, double if2_value, double h5_value,
                       double cite_cagr_value, double self_citation_rate_value,
                       const ScoringConfig& config) {
    double score = config.w_fwci * fwci_mean_value + config.w_if2 * if2_value +
                   config.w_h5 * std::log(1.0 + h5_value) +
                   config.w_cagr * std::log(1.0 + std::max(cite_cagr_value, 0.0));
    if (self_citation_rate_value > config.self_cite_threshold) {
        score *= config.self_cite_penalty;
    }
    return score;
}

double composite_score(const VenueIndicators& ind, const ScoringConfig& config) {
    return composite_score(ind.fwci_mean, ind.if2, static_cast<double>(ind.h5), ind.cite_cagr,
                           ind.self_citation_rate, config);
}

Quartile quartile_for_rank(int rank, const std::vector<QuotaBand>& quota) {
    for (const QuotaBand& band : quota) {
        if (rank >= band.first_rank &&
            (!band.last_rank.has_value() || rank <= *band.last_rank)) {
            return band.quartile;
        }
    }
    // past the last closed band
    return quota.empty() ? Quartile::Q4 : quota.back().quartile;
}

std::vector<RankedVenue> assign_quartiles(std::vector<ScoredVenue> scored,
                                          const ScoringConfig& config) {
    std::vector<ScoredVenue> ranked;
    std::vector<ScoredVenue> insufficient;
    for (ScoredVenue& v : scored) {
        if (v.n_valid_papers < config.min_valid_papers) {
            insufficient.push_back(std::move(v));
        } else {
            ranked.push_back(std::move(v));
        }
    }
    std::sort(ranked.begin(), ranked.end(), [](const ScoredVenue& a, const ScoredVenue& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.fwci_mean != b.fwci_mean) return a.fwci_mean > b.fwci_mean;
        return a.venue_id < b.venue_id;
    });
    std::sort(insufficient.begin(), insufficient.end(),
              [](const ScoredVenue& a, const ScoredVenue& b) { return a.venue_id < b.venue_id; });

    std::vector<RankedVenue> out;
    out.reserve(scored.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) {
        const int rank = static_cast<int>(i) + 1;
        out.push_back(RankedVenue{ranked[i].venue_id, ranked[i].score, rank,
                                  quartile_for_rank(rank, config.quota)});
    }
    for (const ScoredVenue& v : insufficient) {
        out.push_back(RankedVenue{v.venue_id, v.score, std::nullopt, Quartile::InsufficientData});
    }
    return out;
}

}  // namespace gsr
