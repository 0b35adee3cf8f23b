#pragma once
// Rendering of rankings, validation summaries, and figure-ready data series.
// The engine emits data files, not images.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gsr/engine.hpp"
#include "gsr/validation.hpp"

namespace gsr {

enum class OutputFormat { Csv, Json, Markdown };

std::optional<OutputFormat> output_format_from_string(std::string_view s);
const char* to_string(OutputFormat f);

// ranking_<field>.<ext>
std::string ranking_filename(ResearchField field, OutputFormat format);

// Optional provenance: when present, CSV gets a leading `# config_hash=`
// comment, JSON a top-level field, Markdown a footer line.
void emit_ranking_csv(const FieldRanking& ranking, std::ostream& out,
                      const std::optional<std::string>& config_hash = std::nullopt);
void emit_ranking_json(const FieldRanking& ranking, std::ostream& out,
                       const std::optional<std::string>& config_hash = std::nullopt);
void emit_ranking_markdown(const FieldRanking& ranking, std::ostream& out,
                           const std::optional<std::string>& config_hash = std::nullopt);

// --- figure data ------------------------------------------------------------

enum class FigureAnalysis { RatioHist, QuartileComposition, ScoreDist, SensitivityCurve };

// figure_<analysis>.csv
std::string figure_filename(FigureAnalysis analysis);

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<std::int64_t> counts;
    double bin_width() const;
};

Histogram histogram(const std::vector<double>& samples, int bins, double lo, double hi);

void emit_figure_ratio_hist(const Histogram& hist, std::ostream& out,
                            const std::optional<std::string>& config_hash = std::nullopt);
void emit_figure_quartile_composition(const std::vector<FieldRanking>& fields, std::ostream& out,
                                      const std::optional<std::string>& config_hash = std::nullopt);
void emit_figure_score_dist(const std::vector<FieldRanking>& fields, std::ostream& out,
                            const std::optional<std::string>& config_hash = std::nullopt);
void emit_figure_sensitivity_curve(const SensitivityReport& report, std::ostream& out,
                                   const std::optional<std::string>& config_hash = std::nullopt);

// --- sensitivity + validation reports ----------------------------------------

void emit_sensitivity_csv(const SensitivityReport& report, std::ostream& out,
                          const std::optional<std::string>& config_hash = std::nullopt);

struct AgreementSection {
    ResearchField field = ResearchField::CS;
    std::string system;  // e.g. "JCR"
    BinaryConfusion confusion;
};

struct ValidationSummary {
    std::vector<AgreementSection> agreements;
    std::optional<CcfCrossTab> ccf;
    int ccf_n = 0;
    ScoringConfig scoring;  // for the formula statement
};

void emit_validation_report_md(const ValidationSummary& summary, std::ostream& out,
                               const std::optional<std::string>& config_hash = std::nullopt);

}  // namespace gsr
