#include "gsr/engine.hpp"

#include <algorithm>
#include <map>

namespace gsr {

VenueComputation compute_venue(const VenueCorpus& corpus, double coefficient,
                               std::optional<double> conversion, const EngineOptions& options) {
    VenueComputation out;

    std::vector<PaperRecord> valid;
    valid.reserve(corpus.records.size());
    for (const PaperRecord& rec : corpus.records) {
        if (validate_record(rec, options.record_validation).has_value()) {
            ++out.n_rejected_records;
        } else {
            valid.push_back(rec);
        }
    }

    FilterOptions filter{options.retrieval_year, options.exclusion_mode};

    const std::vector<PaperRecord> candidates = fwci_candidates(valid, filter);
    const FwciMeanResult fwci = fwci_mean(candidates);
    out.indicators.fwci_mean = fwci.mean;
    out.indicators.fwci_coverage = fwci.coverage;
    out.indicators.n_valid_papers = static_cast<int>(candidates.size());

    const std::vector<PaperRecord> if2_papers =
        apply_quality_filter(valid, FilterPurpose::IF2, filter);
    try {
        const If2Result actual = if2(if2_papers, options.retrieval_year);
        out.indicators.if2 = actual.value;
        out.indicators.if2_is_estimated = false;
        out.if2_empty_denominator = actual.empty_denominator;
    } catch (const MissingTimeSeries&) {
        const If2Result estimated = if2_approx(if2_papers, coefficient);
        out.indicators.if2 = estimated.value;
        out.indicators.if2_is_estimated = true;
        out.if2_empty_denominator = estimated.empty_denominator;
    }

    out.indicators.h5 = h5(apply_quality_filter(valid, FilterPurpose::H5, filter));
    out.indicators.cite_cagr = cite_cagr(yearly_citation_totals(valid), options.retrieval_year);

    std::unordered_set<std::string> window_ids;
    window_ids.reserve(candidates.size());
    for (const PaperRecord& p : candidates) window_ids.insert(p.paper_id);
    const SelfCitationResult self = self_citation_rate(candidates, window_ids);
    out.indicators.self_citation_rate = self.rate;
    out.self_rate_computable = self.computable;

    // Conferences without any FWCI data get the converted estimate.
    if (corpus.meta.kind == VenueKind::Conference && out.indicators.fwci_coverage == 0.0 &&
        conversion.has_value()) {
        out.indicators.fwci_mean = fwci_approx(out.indicators.if2, *conversion);
        out.fwci_is_estimated = true;
    }
    return out;
}

ScoreRun run_scoring(const std::vector<VenueCorpus>& corpus, double coefficient,
                     const EngineOptions& options) {
    // field -> venue_id -> corpus index, ordered for determinism
    std::map<ResearchField, std::map<std::string, std::size_t>> by_field;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        by_field[corpus[i].meta.field][corpus[i].meta.venue_id] = i;
    }

    ScoreRun run;
    run.coefficient = coefficient;

    for (auto& [field, venue_index] : by_field) {
        FieldRanking ranking;
        ranking.field = field;

        // journals first: their (fwci_mean, if2) pairs calibrate the
        // conversion applied to estimated venues of the same field
        struct Partial {
            const VenueCorpus* corpus = nullptr;
            VenueComputation computed;
            bool needs_conversion = false;
        };
        std::vector<Partial> partials;
        partials.reserve(venue_index.size());
        std::vector<std::pair<double, double>> journal_pairs;

        for (const auto& [venue_id, idx] : venue_index) {
            const VenueCorpus& vc = corpus[idx];
            Partial partial;
            partial.corpus = &vc;
            partial.computed = compute_venue(vc, coefficient, std::nullopt, options);
            partial.needs_conversion = vc.meta.kind == VenueKind::Conference &&
                                       partial.computed.indicators.fwci_coverage == 0.0;
            if (vc.meta.kind == VenueKind::Journal) {
                journal_pairs.emplace_back(partial.computed.indicators.fwci_mean,
                                           partial.computed.indicators.if2);
            }
            partials.push_back(std::move(partial));
        }

        if (options.fwci_conversion_override.has_value()) {
            ranking.fwci_conversion = options.fwci_conversion_override;
        } else {
            try {
                ranking.fwci_conversion = fwci_conversion_coefficient(journal_pairs);
            } catch (const EmptyCorpus&) {
                ranking.fwci_conversion = std::nullopt;
            }
        }

        std::vector<VenueResult> results;
        std::vector<ScoredVenue> scored;
        results.reserve(partials.size());
        scored.reserve(partials.size());
        for (Partial& partial : partials) {
            VenueResult res;
            res.meta = partial.corpus->meta;
            res.indicators = partial.computed.indicators;
            res.self_rate_computable = partial.computed.self_rate_computable;
            if (partial.needs_conversion && ranking.fwci_conversion.has_value()) {
                res.indicators.fwci_mean =
                    fwci_approx(res.indicators.if2, *ranking.fwci_conversion);
                res.fwci_is_estimated = true;
            }
            res.score = composite_score(res.indicators, options.scoring);
            scored.push_back(ScoredVenue{res.meta.venue_id, res.score,
                                         res.indicators.n_valid_papers,
                                         res.indicators.fwci_mean});
            results.push_back(std::move(res));
        }

        std::vector<RankedVenue> ranked = assign_quartiles(std::move(scored), options.scoring);

        std::map<std::string, VenueResult> by_id;
        for (VenueResult& res : results) by_id.emplace(res.meta.venue_id, std::move(res));
        for (const RankedVenue& rv : ranked) {
            VenueResult res = std::move(by_id.at(rv.venue_id));
            res.rank = rv.rank;
            res.quartile = rv.quartile;
            ranking.venues.push_back(std::move(res));
        }
        run.fields.push_back(std::move(ranking));
    }
    return run;
}

const VenueResult* find_venue(const ScoreRun& run, const std::string& venue_id) {
    for (const FieldRanking& field : run.fields) {
        for (const VenueResult& venue : field.venues) {
            if (venue.meta.venue_id == venue_id) return &venue;
        }
    }
    return nullptr;
}

}  // namespace gsr
