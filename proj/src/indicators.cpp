#include "gsr/indicators.hpp"

#include <algorithm>
#include <cmath>

namespace gsr {

FwciMeanResult fwci_mean(const std::vector<PaperRecord>& candidates) {
    if (candidates.empty()) return {};
    double sum = 0.0;
    std::int64_t used = 0;
    for (const PaperRecord& p : candidates) {
        if (p.fwci.has_value() && *p.fwci > 0.0) {
            sum += *p.fwci;
            ++used;
        }
    }
    FwciMeanResult out;
    out.mean = used > 0 ? sum / static_cast<double>(used) : 0.0;
    out.coverage = static_cast<double>(used) / static_cast<double>(candidates.size());
    return out;
}

If2Result if2(const std::vector<PaperRecord>& papers, int retrieval_year) {
    if (papers.empty()) return {0.0, true};
    std::int64_t numerator = 0;
    for (const PaperRecord& p : papers) {
        if (p.counts_by_year.empty()) throw MissingTimeSeries(p.paper_id);
        for (const YearCount& yc : p.counts_by_year) {
            if (yc.year == retrieval_year) numerator += yc.citations;
        }
    }
    return {static_cast<double>(numerator) / static_cast<double>(papers.size()), false};
}

int h5(const std::vector<PaperRecord>& papers) {
    std::vector<std::int64_t> citations;
    citations.reserve(papers.size());
    for (const PaperRecord& p : papers) citations.push_back(p.cited_by_count);
    std::sort(citations.begin(), citations.end(), std::greater<>());
    int h = 0;
    for (std::size_t i = 0; i < citations.size(); ++i) {
        if (citations[i] >= static_cast<std::int64_t>(i) + 1) {
            h = static_cast<int>(i) + 1;
        } else {
            break;
        }
    }
    return h;
}

YearlyCitationTotals yearly_citation_totals(const std::vector<PaperRecord>& papers) {
    YearlyCitationTotals totals;
    for (const PaperRecord& p : papers) {
        for (const YearCount& yc : p.counts_by_year) {
            totals[yc.year] += yc.citations;
        }
    }
    return totals;
}

double cite_cagr(const YearlyCitationTotals& totals, int retrieval_year) {
    const auto total_for = [&](int year) -> std::int64_t {
        auto it = totals.find(year);
        return it == totals.end() ? 0 : it->second;
    };
    const std::int64_t early = total_for(retrieval_year - 3);
    const std::int64_t late = total_for(retrieval_year - 1);
    if (early <= 0 || late <= 0) return 0.0;
    return std::sqrt(static_cast<double>(late) / static_cast<double>(early)) - 1.0;
}

SelfCitationResult self_citation_rate(const std::vector<PaperRecord>& papers,
                                      const std::unordered_set<std::string>& venue_paper_ids) {
    std::int64_t total = 0;
    std::int64_t internal = 0;
    for (const PaperRecord& p : papers) {
        if (!p.referenced_works.has_value()) continue;
        for (const std::string& ref : *p.referenced_works) {
            ++total;
            if (venue_paper_ids.count(ref) > 0) ++internal;
        }
    }
    if (total == 0) return {0.0, false};
    return {static_cast<double>(internal) / static_cast<double>(total), true};
}

}  // namespace gsr
