#include "gsr/validation.hpp"

#include <algorithm>
#include <map>

namespace gsr {

double agreement_rate(const BinaryConfusion& m) {
    const std::int64_t n = m.total();
    if (n <= 0) throw std::invalid_argument("empty confusion matrix");
    return static_cast<double>(m.a + m.d) / static_cast<double>(n);
}

double expected_agreement(const BinaryConfusion& m) {
    const std::int64_t n = m.total();
    if (n <= 0) throw std::invalid_argument("empty confusion matrix");
    const double nd = static_cast<double>(n);
    const double ours_q1 = static_cast<double>(m.a + m.b);
    const double ref_q1 = static_cast<double>(m.a + m.c);
    const double ours_rest = static_cast<double>(m.c + m.d);
    const double ref_rest = static_cast<double>(m.b + m.d);
    return (ours_q1 * ref_q1 + ours_rest * ref_rest) / (nd * nd);
}

std::optional<double> cohens_kappa(const BinaryConfusion& m) {
    const double p_o = agreement_rate(m);
    const double p_e = expected_agreement(m);
    if (p_e >= 1.0) return std::nullopt;
    return (p_o - p_e) / (1.0 - p_e);
}

std::size_t cross_tab_column(Quartile q) {
    switch (q) {
        case Quartile::Q1: return 0;
        case Quartile::Q2: return 1;
        case Quartile::Q3: return 2;
        case Quartile::Q4: return 3;
        case Quartile::InsufficientData: return 4;
    }
    return 4;
}

std::int64_t CrossTabRow::row_total() const {
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    return total;
}

double CrossTabRow::row_percent(std::size_t column) const {
    const std::int64_t total = row_total();
    if (total == 0) return 0.0;
    return 100.0 * static_cast<double>(counts.at(column)) / static_cast<double>(total);
}

CcfCrossTab ccf_cross_tab(const std::vector<std::pair<CcfTier, Quartile>>& venues) {
    std::map<CcfTier, CrossTabRow> rows;
    for (const auto& [tier, quartile] : venues) {
        CrossTabRow& row = rows.try_emplace(tier, CrossTabRow{tier, {}}).first->second;
        ++row.counts[cross_tab_column(quartile)];
    }
    CcfCrossTab out;
    for (auto& [tier, row] : rows) out.rows.push_back(row);
    return out;
}

SensitivityReport sensitivity_sweep(const std::vector<VenueCorpus>& corpus,
                                    const std::vector<double>& coefficients,
                                    double baseline_coefficient,
                                    const EngineOptions& options) {
    const ScoreRun baseline = run_scoring(corpus, baseline_coefficient, options);

    std::map<std::string, Quartile> baseline_quartiles;
    int n_ranked = 0;
    for (const FieldRanking& field : baseline.fields) {
        for (const VenueResult& venue : field.venues) {
            baseline_quartiles[venue.meta.venue_id] = venue.quartile;
            if (venue.rank.has_value()) ++n_ranked;
        }
    }

    SensitivityReport report;
    report.baseline_coefficient = baseline_coefficient;
    report.n_ranked_baseline = n_ranked;

    for (double coefficient : coefficients) {
        const ScoreRun run = run_scoring(corpus, coefficient, options);
        SweepEntry entry;
        entry.coefficient = coefficient;
        for (const FieldRanking& field : run.fields) {
            for (const VenueResult& venue : field.venues) {
                const auto it = baseline_quartiles.find(venue.meta.venue_id);
                if (it != baseline_quartiles.end() && it->second != venue.quartile) {
                    entry.changed_venue_ids.push_back(venue.meta.venue_id);
                }
            }
        }
        std::sort(entry.changed_venue_ids.begin(), entry.changed_venue_ids.end());
        entry.n_changed = static_cast<int>(entry.changed_venue_ids.size());
        report.sweep.push_back(std::move(entry));
    }
    return report;
}

}  // namespace gsr
