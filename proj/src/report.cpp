#include "gsr/report.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "gsr/csv.hpp"

namespace gsr {

namespace {

using ordered_json = nlohmann::ordered_json;

void emit_hash_comment(std::ostream& out, const std::optional<std::string>& config_hash) {
    if (config_hash.has_value()) out << "# config_hash=" << *config_hash << "\n";
}

std::string bool_cell(bool value) { return value ? "true" : "false"; }

}  // namespace

std::optional<OutputFormat> output_format_from_string(std::string_view s) {
    if (s == "csv") return OutputFormat::Csv;
    if (s == "json") return OutputFormat::Json;
    if (s == "markdown" || s == "md") return OutputFormat::Markdown;
    return std::nullopt;
}

const char* to_string(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        case OutputFormat::Markdown: return "markdown";
    }
    return "csv";
}

std::string ranking_filename(ResearchField field, OutputFormat format) {
    std::string ext;
    switch (format) {
        case OutputFormat::Csv: ext = "csv"; break;
        case OutputFormat::Json: ext = "json"; break;
        case OutputFormat::Markdown: ext = "md"; break;
    }
    return std::string("ranking_") + to_string(field) + "." + ext;
}

void emit_ranking_csv(const FieldRanking& ranking, std::ostream& out,
                      const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "rank,venue_id,display_name,kind,field,score,fwci_mean,if2,if2_is_estimated,"
           "h5,cite_cagr,self_citation_rate,n_valid_papers,quartile\n";
    for (const VenueResult& v : ranking.venues) {
        std::vector<std::string> cells;
        cells.push_back(v.rank.has_value() ? std::to_string(*v.rank) : "");
        cells.push_back(v.meta.venue_id);
        cells.push_back(v.meta.display_name);
        cells.push_back(to_string(v.meta.kind));
        cells.push_back(to_string(v.meta.field));
        cells.push_back(format_fixed(v.score, 2));
        cells.push_back(format_fixed(v.indicators.fwci_mean, 2));
        cells.push_back(format_fixed(v.indicators.if2, 2));
        cells.push_back(bool_cell(v.indicators.if2_is_estimated));
        cells.push_back(std::to_string(v.indicators.h5));
        cells.push_back(format_fixed(v.indicators.cite_cagr, 4));
        cells.push_back(format_fixed(v.indicators.self_citation_rate, 4));
        cells.push_back(std::to_string(v.indicators.n_valid_papers));
        cells.push_back(to_string(v.quartile));
        out << join_csv(cells) << "\n";
    }
}

void emit_ranking_json(const FieldRanking& ranking, std::ostream& out,
                       const std::optional<std::string>& config_hash) {
    ordered_json root;
    if (config_hash.has_value()) root["config_hash"] = *config_hash;
    root["field"] = to_string(ranking.field);
    if (ranking.fwci_conversion.has_value()) {
        root["fwci_conversion"] = *ranking.fwci_conversion;
    } else {
        root["fwci_conversion"] = nullptr;
    }
    ordered_json venues = ordered_json::array();
    for (const VenueResult& v : ranking.venues) {
        ordered_json item;
        if (v.rank.has_value()) {
            item["rank"] = *v.rank;
        } else {
            item["rank"] = nullptr;
        }
        item["venue_id"] = v.meta.venue_id;
        item["display_name"] = v.meta.display_name;
        item["kind"] = to_string(v.meta.kind);
        item["field"] = to_string(v.meta.field);
        item["score"] = v.score;
        item["fwci_mean"] = v.indicators.fwci_mean;
        item["if2"] = v.indicators.if2;
        item["if2_is_estimated"] = v.indicators.if2_is_estimated;
        item["h5"] = v.indicators.h5;
        item["cite_cagr"] = v.indicators.cite_cagr;
        item["self_citation_rate"] = v.indicators.self_citation_rate;
        item["n_valid_papers"] = v.indicators.n_valid_papers;
        item["quartile"] = to_string(v.quartile);
        venues.push_back(std::move(item));
    }
    root["venues"] = std::move(venues);
    out << root.dump(2) << "\n";
}

void emit_ranking_markdown(const FieldRanking& ranking, std::ostream& out,
                           const std::optional<std::string>& config_hash) {
    out << "# Venue ranking (" << to_string(ranking.field) << ")\n\n";
    out << "| Rank | Venue | Type | Score | FWCI | h5 | IF2 | Q |\n";
    out << "|--:|:--|:--|--:|--:|--:|--:|:--|\n";
    bool any_insufficient = false;
    for (const VenueResult& v : ranking.venues) {
        if (!v.rank.has_value()) {
            any_insufficient = true;
            continue;
        }
        out << "| " << *v.rank << " | " << v.meta.display_name << " | "
            << (v.meta.kind == VenueKind::Conference ? "Conf" : "Journal") << " | "
            << format_fixed(v.score, 2) << " | " << format_fixed(v.indicators.fwci_mean, 2)
            << " | " << v.indicators.h5 << " | " << format_fixed(v.indicators.if2, 2) << " | "
            << to_string(v.quartile) << " |\n";
    }
    if (any_insufficient) {
        out << "\n## Insufficient data\n\n";
        for (const VenueResult& v : ranking.venues) {
            if (!v.rank.has_value()) {
                out << "- " << v.meta.display_name << " (" << v.indicators.n_valid_papers
                    << " valid papers)\n";
            }
        }
    }
    if (config_hash.has_value()) {
        out << "\nConfig hash: `" << *config_hash << "`\n";
    }
}

// --- figure data --------------------------------------------------------------

std::string figure_filename(FigureAnalysis analysis) {
    switch (analysis) {
        case FigureAnalysis::RatioHist: return "figure_ratio_hist.csv";
        case FigureAnalysis::QuartileComposition: return "figure_quartile_composition.csv";
        case FigureAnalysis::ScoreDist: return "figure_score_dist.csv";
        case FigureAnalysis::SensitivityCurve: return "figure_sensitivity_curve.csv";
    }
    return "figure.csv";
}

double Histogram::bin_width() const {
    return counts.empty() ? 0.0 : (hi - lo) / static_cast<double>(counts.size());
}

Histogram histogram(const std::vector<double>& samples, int bins, double lo, double hi) {
    if (bins <= 0 || !(hi > lo)) throw std::invalid_argument("bad histogram range");
    Histogram h;
    h.lo = lo;
    h.hi = hi;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    const double width = (hi - lo) / bins;
    for (double v : samples) {
        double clamped = std::clamp(v, lo, hi);
        auto idx = static_cast<std::size_t>((clamped - lo) / width);
        if (idx >= h.counts.size()) idx = h.counts.size() - 1;  // hi lands in the last bin
        ++h.counts[idx];
    }
    return h;
}

void emit_figure_ratio_hist(const Histogram& hist, std::ostream& out,
                            const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "bin_start,bin_end,count\n";
    const double width = hist.bin_width();
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const double start = hist.lo + width * static_cast<double>(i);
        const double end = i + 1 == hist.counts.size() ? hist.hi : start + width;
        out << format_fixed(start, 4) << "," << format_fixed(end, 4) << "," << hist.counts[i]
            << "\n";
    }
}

void emit_figure_quartile_composition(const std::vector<FieldRanking>& fields, std::ostream& out,
                                      const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "field,quartile,conferences,journals\n";
    const Quartile order[] = {Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4,
                              Quartile::InsufficientData};
    for (const FieldRanking& ranking : fields) {
        for (Quartile q : order) {
            std::int64_t conferences = 0;
            std::int64_t journals = 0;
            for (const VenueResult& v : ranking.venues) {
                if (v.quartile != q) continue;
                if (v.meta.kind == VenueKind::Conference) {
                    ++conferences;
                } else {
                    ++journals;
                }
            }
            out << to_string(ranking.field) << "," << to_string(q) << "," << conferences << ","
                << journals << "\n";
        }
    }
}

void emit_figure_score_dist(const std::vector<FieldRanking>& fields, std::ostream& out,
                            const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "field,rank,score\n";
    for (const FieldRanking& ranking : fields) {
        for (const VenueResult& v : ranking.venues) {
            if (!v.rank.has_value()) continue;
            out << to_string(ranking.field) << "," << *v.rank << "," << format_shortest(v.score)
                << "\n";
        }
    }
}

void emit_figure_sensitivity_curve(const SensitivityReport& report, std::ostream& out,
                                   const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "coefficient,n_changed\n";
    for (const SweepEntry& entry : report.sweep) {
        out << format_fixed(entry.coefficient, 2) << "," << entry.n_changed << "\n";
    }
}

void emit_sensitivity_csv(const SensitivityReport& report, std::ostream& out,
                          const std::optional<std::string>& config_hash) {
    emit_hash_comment(out, config_hash);
    out << "coefficient,n_changed,pct_changed,changed_venue_ids\n";
    for (const SweepEntry& entry : report.sweep) {
        const double pct =
            report.n_ranked_baseline > 0
                ? 100.0 * entry.n_changed / static_cast<double>(report.n_ranked_baseline)
                : 0.0;
        std::string ids;
        for (std::size_t i = 0; i < entry.changed_venue_ids.size(); ++i) {
            if (i > 0) ids.push_back(';');
            ids += entry.changed_venue_ids[i];
        }
        std::vector<std::string> cells = {format_fixed(entry.coefficient, 2),
                                          std::to_string(entry.n_changed), format_fixed(pct, 2),
                                          ids};
        out << join_csv(cells) << "\n";
    }
}

void emit_validation_report_md(const ValidationSummary& summary, std::ostream& out,
                               const std::optional<std::string>& config_hash) {
    out << "# Validation report\n";

    for (const AgreementSection& section : summary.agreements) {
        const BinaryConfusion& m = section.confusion;
        out << "\n## " << section.system << " Q1 agreement (" << to_string(section.field)
            << ")\n\n";
        out << "- venues compared: " << m.total() << "\n";
        out << "- confusion (a=both Q1, b=ours only, c=reference only, d=neither): " << m.a
            << ", " << m.b << ", " << m.c << ", " << m.d << "\n";
        out << "- agreement rate: " << format_fixed(agreement_rate(m), 4) << "\n";
        const auto kappa = cohens_kappa(m);
        if (kappa.has_value()) {
            out << "- Cohen's kappa: " << format_fixed(*kappa, 4) << "\n";
        } else {
            out << "- Cohen's kappa: undefined (degenerate marginals)\n";
        }
    }

    if (summary.ccf.has_value()) {
        out << "\n## CCF tier vs quartile (n=" << summary.ccf_n << ")\n\n";
        out << "| Tier | Q1 | Q2 | Q3 | Q4 | insufficient | total |\n";
        out << "|:--|--:|--:|--:|--:|--:|--:|\n";
        for (const CrossTabRow& row : summary.ccf->rows) {
            out << "| " << to_string(row.tier);
            for (std::size_t c = 0; c < kCrossTabColumns; ++c) out << " | " << row.counts[c];
            out << " | " << row.row_total() << " |\n";
        }
        out << "\nRow percentages:\n\n";
        out << "| Tier | Q1 | Q2 | Q3 | Q4 | insufficient |\n";
        out << "|:--|--:|--:|--:|--:|--:|\n";
        for (const CrossTabRow& row : summary.ccf->rows) {
            out << "| " << to_string(row.tier);
            for (std::size_t c = 0; c < kCrossTabColumns; ++c) {
                out << " | " << format_fixed(row.row_percent(c), 1) << "%";
            }
            out << " |\n";
        }
    }

    const ScoringConfig& s = summary.scoring;
    out << "\n## Methodology notes\n\n";
    out << "- Composite scores are computed directly as " << format_shortest(s.w_fwci)
        << "*FWCI_mean + " << format_shortest(s.w_if2) << "*IF2_effective + "
        << format_shortest(s.w_h5) << "*ln(1+h5) + " << format_shortest(s.w_cagr)
        << "*ln(1+max(cite_CAGR,0)), with a " << format_shortest(s.self_cite_penalty)
        << " penalty factor when the self-citation rate exceeds "
        << format_shortest(s.self_cite_threshold)
        << ". Scores are never rescaled or refitted to reproduce externally published ranking"
           " tables; a published score that cannot be re-derived from its own printed indicator"
           " values under these weights will disagree with this engine's output, and that"
           " disagreement is surfaced rather than corrected.\n";
    out << "- IF2 for venues without per-year citation series is estimated as"
           " mean(cited_by_count) x calibration coefficient over the two prior years' papers;"
           " estimated venues are flagged in the ranking output.\n";
    out << "- The self-citation rate uses the outgoing-reference definition: the fraction of a"
           " venue's outgoing references that target the venue's own papers inside the analysis"
           " window.\n";

    if (config_hash.has_value()) {
        out << "\nConfig hash: `" << *config_hash << "`\n";
    }
}

}  // namespace gsr
