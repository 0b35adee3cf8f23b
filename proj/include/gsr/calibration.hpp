#pragma once
// Calibration of the citation-ratio coefficient used to estimate IF2 (and
// FWCI) for venues that lack per-year citation series.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gsr/indicators.hpp"
#include "gsr/model.hpp"

namespace gsr {

// Default coefficient: the measured median of (recent-window citations) /
// (total citations) over journal papers.
inline constexpr double kBaselineCoefficient = 0.75;

class EmptyCorpus : public std::runtime_error {
public:
    explicit EmptyCorpus(const std::string& what) : std::runtime_error(what) {}
};

struct RatioSample {
    std::string paper_id;
    double ratio = 0.0;  // in [0,1]
};

enum class CalibrationWindowMode { TwoYear, RetrievalYear };

// TwoYear -> {Y-1, Y}; RetrievalYear -> {Y}.
std::vector<int> calibration_window_years(CalibrationWindowMode mode, int retrieval_year);

// Ratio of citations received inside the window to total citations. Papers
// without positive cited_by_count or without a time series yield no sample.
// Counts can disagree across database fields, so the ratio caps at 1.
std::optional<RatioSample> ratio_sample(const PaperRecord& paper,
                                        const std::vector<int>& window_years);

// Linear-interpolation quantile over a sorted sample vector, p in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double p);

// Measures the ratio distribution over journal papers and returns its
// quantiles with coefficient = median. Throws EmptyCorpus when no paper
// qualifies as a sample.
CalibrationResult compute_calibration(const std::vector<PaperRecord>& journal_papers,
                                      const std::vector<int>& window_years);

// Estimated IF2 for venues without time series: mean cited_by_count over the
// two prior years' papers, scaled by the coefficient.
If2Result if2_approx(const std::vector<PaperRecord>& papers, double coefficient);

// Median of fwci_mean / if2 over journals of one field; multiplies an
// estimated IF2 to yield an estimated FWCI. Pairs with non-positive entries
// are ignored. Throws EmptyCorpus when no pair qualifies.
double fwci_conversion_coefficient(const std::vector<std::pair<double, double>>& journal_pairs);

double fwci_approx(double if2_approx_value, double conversion);

}  // namespace gsr
