#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "gsr/indicators.hpp"

using namespace gsr;

namespace {

constexpr int kYear = 2025;

// independent oracle: try every candidate h
int h5_oracle(const std::vector<std::int64_t>& citations) {
    int best = 0;
    for (int h = 0; h <= static_cast<int>(citations.size()); ++h) {
        int at_least = 0;
        for (std::int64_t c : citations) {
            if (c >= h) ++at_least;
        }
        if (at_least >= h) best = h;
    }
    return best;
}

std::vector<PaperRecord> papers_with_citations(const std::vector<std::int64_t>& citations) {
    std::vector<PaperRecord> papers;
    for (std::size_t i = 0; i < citations.size(); ++i) {
        papers.push_back(fx::journal_paper("V", "W" + std::to_string(i), kYear - 1, std::nullopt,
                                           citations[i], {{kYear, 0}}));
    }
    return papers;
}

PaperRecord fwci_paper(std::optional<double> fwci) {
    return fx::journal_paper("V", "W", kYear - 1, fwci, 0, {{kYear, 0}});
}

}  // namespace

TEST_CASE("fwci_mean of two values") {
    const std::vector<PaperRecord> papers = {fwci_paper(2.0), fwci_paper(4.0)};
    const FwciMeanResult result = fwci_mean(papers);
    CHECK(result.mean == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(result.coverage == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fwci_mean counts only positive FWCI values as usable") {
    // one real value, one missing, one zero: mean over the single positive
    // value, coverage 1/3
    const std::vector<PaperRecord> papers = {fwci_paper(1.0), fwci_paper(std::nullopt),
                                             fwci_paper(0.0)};
    const FwciMeanResult result = fwci_mean(papers);
    CHECK(result.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.coverage == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("fwci_mean of empty input is (0, 0)") {
    const FwciMeanResult result = fwci_mean({});
    CHECK(result.mean == 0.0);
    CHECK(result.coverage == 0.0);
}

TEST_CASE("fwci_mean is permutation-invariant and bounded") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PaperRecord> papers;
        std::vector<double> values;
        const int n = 1 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) {
            const double v = static_cast<double>(rng() % 1000) / 100.0 + 0.01;
            values.push_back(v);
            papers.push_back(fwci_paper(v));
        }
        const FwciMeanResult forward = fwci_mean(papers);
        std::shuffle(papers.begin(), papers.end(), rng);
        const FwciMeanResult shuffled = fwci_mean(papers);
        CHECK(forward.mean == doctest::Approx(shuffled.mean).epsilon(1e-12));
        CHECK(forward.mean >= *std::min_element(values.begin(), values.end()) - 1e-12);
        CHECK(forward.mean <= *std::max_element(values.begin(), values.end()) + 1e-12);
    }
}

TEST_CASE("fwci coverage stays plausible on a high-coverage corpus") {
    // medical-journal-like fixture: nearly every paper carries FWCI
    std::mt19937 rng(17);
    std::vector<PaperRecord> papers;
    for (int i = 0; i < 1000; ++i) {
        const bool has_fwci = rng() % 100 < 96;
        papers.push_back(fwci_paper(has_fwci ? std::optional<double>(1.0 + (rng() % 50) / 10.0)
                                             : std::nullopt));
    }
    const FwciMeanResult result = fwci_mean(papers);
    CHECK(result.coverage > 0.9);
    CHECK(result.coverage <= 1.0);
}

TEST_CASE("if2 averages year-Y citations over the paper count") {
    std::vector<PaperRecord> papers = {
        fx::journal_paper("V", "A", kYear - 1, std::nullopt, 10, {{kYear, 3}}),
        fx::journal_paper("V", "B", kYear - 2, std::nullopt, 20, {{kYear, 7}, {kYear - 1, 99}}),
    };
    const If2Result result = if2(papers, kYear);
    CHECK_FALSE(result.empty_denominator);
    CHECK(result.value == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("if2 of an empty paper set is zero with the degenerate flag") {
    const If2Result result = if2({}, kYear);
    CHECK(result.value == 0.0);
    CHECK(result.empty_denominator);
}

TEST_CASE("if2 throws MissingTimeSeries when any paper lacks counts_by_year") {
    std::vector<PaperRecord> papers = {
        fx::journal_paper("V", "A", kYear - 1, std::nullopt, 10, {{kYear, 3}}),
        fx::conference_paper("V", "B", kYear - 1, 50),
    };
    CHECK_THROWS_AS(if2(papers, kYear), MissingTimeSeries);
}

TEST_CASE("if2 equals a brute-force recount on a random fixture") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PaperRecord> papers;
        const int n = 1 + static_cast<int>(rng() % 12);
        for (int i = 0; i < n; ++i) {
            std::vector<YearCount> counts;
            int year = kYear - 2;
            const int n_years = 1 + static_cast<int>(rng() % 4);
            for (int j = 0; j < n_years; ++j) {
                counts.push_back({year++, static_cast<std::int64_t>(rng() % 40)});
            }
            papers.push_back(fx::journal_paper("V", "W" + std::to_string(i),
                                               kYear - 1 - static_cast<int>(rng() % 2),
                                               std::nullopt, 100, counts));
        }
        // oracle: flat recount of year-Y entries
        std::int64_t numerator = 0;
        for (const PaperRecord& p : papers) {
            for (const YearCount& yc : p.counts_by_year) {
                if (yc.year == kYear) numerator += yc.citations;
            }
        }
        const double expected = static_cast<double>(numerator) / static_cast<double>(papers.size());
        CHECK(if2(papers, kYear).value == expected);
    }
}

TEST_CASE("if2 is scale-consistent under duplication") {
    std::vector<PaperRecord> papers = {
        fx::journal_paper("V", "A", kYear - 1, std::nullopt, 10, {{kYear, 4}}),
        fx::journal_paper("V", "B", kYear - 2, std::nullopt, 20, {{kYear, 9}}),
        fx::journal_paper("V", "C", kYear - 2, std::nullopt, 20, {{kYear, 1}}),
    };
    std::vector<PaperRecord> doubled = papers;
    doubled.insert(doubled.end(), papers.begin(), papers.end());
    CHECK(if2(papers, kYear).value == if2(doubled, kYear).value);
}

TEST_CASE("h5 on the worked example") {
    CHECK(h5(papers_with_citations({10, 8, 5, 4, 3, 1})) == 4);
    CHECK(h5_oracle({10, 8, 5, 4, 3, 1}) == 4);
}

TEST_CASE("h5 degenerate cases") {
    CHECK(h5({}) == 0);
    CHECK(h5(papers_with_citations({0, 0, 0})) == 0);
}

TEST_CASE("h5 equals the brute-force oracle on 1000 random multisets") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::int64_t> citations(rng() % 51);
        for (auto& c : citations) c = static_cast<std::int64_t>(rng() % 101);
        CHECK(h5(papers_with_citations(citations)) == h5_oracle(citations));
    }
}

TEST_CASE("h5 is monotone under added papers and citations") {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::int64_t> citations(1 + rng() % 30);
        for (auto& c : citations) c = static_cast<std::int64_t>(rng() % 50);
        const int base = h5(papers_with_citations(citations));

        std::vector<std::int64_t> with_extra = citations;
        with_extra.push_back(static_cast<std::int64_t>(rng() % 50));
        CHECK(h5(papers_with_citations(with_extra)) >= base);

        std::vector<std::int64_t> boosted = citations;
        boosted[rng() % boosted.size()] += 1;
        CHECK(h5(papers_with_citations(boosted)) >= base);
    }
}

TEST_CASE("cite_cagr on the worked examples") {
    CHECK(cite_cagr({{kYear - 3, 100}, {kYear - 1, 225}}, kYear) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK(cite_cagr({{kYear - 3, 0}, {kYear - 1, 500}}, kYear) == 0.0);
    CHECK(cite_cagr({{kYear - 3, 400}, {kYear - 1, 100}}, kYear) ==
          doctest::Approx(-0.5).epsilon(1e-12));
}

TEST_CASE("cite_cagr is zero whenever an endpoint is zero or missing") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        YearlyCitationTotals totals;
        // random mid-window noise must not matter
        totals[kYear - 2] = static_cast<std::int64_t>(rng() % 1000);
        if (trial % 2 == 0) totals[kYear - 1] = static_cast<std::int64_t>(rng() % 1000);
        // no entry for kYear - 3 at all
        CHECK(cite_cagr(totals, kYear) == 0.0);
    }
}

TEST_CASE("yearly totals sum counts over all papers") {
    std::vector<PaperRecord> papers = {
        fx::journal_paper("V", "A", kYear - 1, std::nullopt, 0, {{2022, 5}, {2023, 2}}),
        fx::journal_paper("V", "B", kYear - 2, std::nullopt, 0, {{2022, 1}}),
    };
    const YearlyCitationTotals totals = yearly_citation_totals(papers);
    CHECK(totals.at(2022) == 6);
    CHECK(totals.at(2023) == 2);
    CHECK(totals.count(2024) == 0);
}

TEST_CASE("self-citation rate on a hand-counted fixture") {
    // 3 papers, 10 outgoing references, 4 internal
    PaperRecord a = fx::journal_paper("V", "A", kYear - 1, std::nullopt, 0, {{kYear, 0}});
    a.referenced_works = std::vector<std::string>{"A", "B", "X1", "X2"};
    PaperRecord b = fx::journal_paper("V", "B", kYear - 1, std::nullopt, 0, {{kYear, 0}});
    b.referenced_works = std::vector<std::string>{"C", "X3", "X4"};
    PaperRecord c = fx::journal_paper("V", "C", kYear - 1, std::nullopt, 0, {{kYear, 0}});
    c.referenced_works = std::vector<std::string>{"A", "X5", "X6"};

    const SelfCitationResult result = self_citation_rate({a, b, c}, {"A", "B", "C"});
    CHECK(result.computable);
    CHECK(result.rate == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("self-citation rate without reference lists is flagged") {
    const std::vector<PaperRecord> papers = {fwci_paper(1.0), fwci_paper(2.0)};
    const SelfCitationResult result = self_citation_rate(papers, {"W"});
    CHECK_FALSE(result.computable);
    CHECK(result.rate == 0.0);
}

TEST_CASE("self-citation rate reaches 1.0 when every reference is internal") {
    PaperRecord a = fwci_paper(1.0);
    a.paper_id = "A";
    a.referenced_works = std::vector<std::string>{"A", "B"};
    PaperRecord b = fwci_paper(1.0);
    b.paper_id = "B";
    b.referenced_works = std::vector<std::string>{"A"};
    const SelfCitationResult result = self_citation_rate({a, b}, {"A", "B"});
    CHECK(result.rate == 1.0);
}

TEST_CASE("self-citation rate stays in [0,1]") {
    std::mt19937 rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<PaperRecord> papers;
        std::unordered_set<std::string> ids;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            PaperRecord p = fwci_paper(1.0);
            p.paper_id = "P" + std::to_string(i);
            ids.insert(p.paper_id);
            if (rng() % 4 != 0) {
                std::vector<std::string> refs;
                const int n_refs = static_cast<int>(rng() % 10);
                for (int j = 0; j < n_refs; ++j) {
                    refs.push_back(rng() % 2 == 0 ? "P" + std::to_string(rng() % n)
                                                  : "EXT" + std::to_string(j));
                }
                p.referenced_works = std::move(refs);
            }
            papers.push_back(std::move(p));
        }
        const SelfCitationResult result = self_citation_rate(papers, ids);
        CHECK(result.rate >= 0.0);
        CHECK(result.rate <= 1.0);
    }
}
