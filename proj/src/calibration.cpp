#include "gsr/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

std::vector<int> calibration_window_years(CalibrationWindowMode mode, int retrieval_year) {
    if (mode == CalibrationWindowMode::TwoYear) {
        return {retrieval_year - 1, retrieval_year};
    }
    return {retrieval_year};
}

std::optional<RatioSample> ratio_sample(const PaperRecord& paper,
                                        const std::vector<int>& window_years) {
    if (paper.cited_by_count <= 0 || paper.counts_by_year.empty()) return std::nullopt;
    std::int64_t in_window = 0;
    for (const YearCount& yc : paper.counts_by_year) {
        if (std::find(window_years.begin(), window_years.end(), yc.year) != window_years.end()) {
            in_window += yc.citations;
        }
    }
    const double ratio =
        static_cast<double>(in_window) / static_cast<double>(paper.cited_by_count);
    return RatioSample{paper.paper_id, std::min(ratio, 1.0)};
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw EmptyCorpus("quantile of empty sample");
    if (sorted.size() == 1) return sorted.front();
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[lo + 1] - sorted[lo]) * frac;
}

CalibrationResult compute_calibration(const std::vector<PaperRecord>& journal_papers,
                                      const std::vector<int>& window_years) {
    std::vector<double> ratios;
    ratios.reserve(journal_papers.size());
    for (const PaperRecord& p : journal_papers) {
        if (auto sample = ratio_sample(p, window_years)) {
            ratios.push_back(sample->ratio);
        }
    }
    if (ratios.empty()) {
        throw EmptyCorpus("no journal paper has both positive citations and a time series");
    }
    std::sort(ratios.begin(), ratios.end());

    CalibrationResult out;
    out.n_papers = static_cast<std::int64_t>(ratios.size());
    out.quantiles.p10 = quantile_sorted(ratios, 0.10);
    out.quantiles.p25 = quantile_sorted(ratios, 0.25);
    out.quantiles.p50 = quantile_sorted(ratios, 0.50);
    out.quantiles.p75 = quantile_sorted(ratios, 0.75);
    out.quantiles.p90 = quantile_sorted(ratios, 0.90);
    out.coefficient = out.quantiles.p50;
    return out;
}

If2Result if2_approx(const std::vector<PaperRecord>& papers, double coefficient) {
    if (papers.empty()) return {0.0, true};
    std::int64_t total = 0;
    for (const PaperRecord& p : papers) total += p.cited_by_count;
    // mean first, scale second: keeps the result exactly linear in the
    // coefficient
    const double mean = static_cast<double>(total) / static_cast<double>(papers.size());
    return {mean * coefficient, false};
}

double fwci_conversion_coefficient(
    const std::vector<std::pair<double, double>>& journal_pairs) {
    std::vector<double> ratios;
    ratios.reserve(journal_pairs.size());
    for (const auto& [fwci_value, if2_value] : journal_pairs) {
        if (fwci_value > 0.0 && if2_value > 0.0) {
            ratios.push_back(fwci_value / if2_value);
        }
    }
    if (ratios.empty()) {
        throw EmptyCorpus("no journal has both a positive FWCI mean and a positive IF2");
    }
    std::sort(ratios.begin(), ratios.end());
    return quantile_sorted(ratios, 0.50);
}

double fwci_approx(double if2_approx_value, double conversion) {
    return if2_approx_value * conversion;
}

}  // namespace gsr
