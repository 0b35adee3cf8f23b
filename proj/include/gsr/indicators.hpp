#pragma once
// Per-venue citation indicators computed from a filtered paper set.
// Every operation is a pure function over immutable inputs.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "gsr/model.hpp"

namespace gsr {

struct FwciMeanResult {
    double mean = 0.0;
    double coverage = 0.0;  // usable-FWCI papers / eligible papers
};

// `candidates` must already pass the type/window/retraction conditions but
// NOT the FWCI-presence cut: the coverage denominator needs the full set.
// Papers with fwci present and > 0 enter the mean; the rest only dilute
// coverage. Empty input yields (0, 0).
FwciMeanResult fwci_mean(const std::vector<PaperRecord>& candidates);

// Thrown when a paper in the IF2 set has no citation time series; the venue
// must switch to the estimation path.
class MissingTimeSeries : public std::runtime_error {
public:
    explicit MissingTimeSeries(const std::string& paper_id)
        : std::runtime_error("paper '" + paper_id + "' has no counts_by_year data"),
          paper_id_(paper_id) {}
    const std::string& paper_id() const { return paper_id_; }

private:
    std::string paper_id_;
};

struct If2Result {
    double value = 0.0;
    bool empty_denominator = false;
};

// Two-year impact factor: citations received in year Y by papers published
// in {Y-1, Y-2}, divided by the paper count.
If2Result if2(const std::vector<PaperRecord>& papers, int retrieval_year);

// Largest h such that at least h papers have cited_by_count >= h.
int h5(const std::vector<PaperRecord>& papers);

// Total citations received per calendar year, summed over all venue papers.
using YearlyCitationTotals = std::map<int, std::int64_t>;

YearlyCitationTotals yearly_citation_totals(const std::vector<PaperRecord>& papers);

// Compound growth of yearly citation totals between Y-3 and Y-1:
// (C_{Y-1} / C_{Y-3})^{1/2} - 1. Zero unless both endpoint totals are
// non-zero.
double cite_cagr(const YearlyCitationTotals& totals, int retrieval_year);

struct SelfCitationResult {
    double rate = 0.0;
    bool computable = false;  // false when no paper carries a reference list
};

// Fraction of the venue's outgoing references that point back at the venue's
// own papers (outgoing-reference definition).
SelfCitationResult self_citation_rate(const std::vector<PaperRecord>& papers,
                                      const std::unordered_set<std::string>& venue_paper_ids);

}  // namespace gsr
