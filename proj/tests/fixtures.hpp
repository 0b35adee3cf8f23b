#pragma once
// Shared fixture builders for the test suites: synthetic venues with exactly
// controllable indicators, raw source objects, and a local fixture API
// server that replays deterministic paged responses.

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "gsr/engine.hpp"
#include "gsr/model.hpp"

namespace fx {

using nlohmann::json;

// Journal paper with an explicit citation time series. cited_by_count and
// counts_by_year are set independently so tests can pin each indicator.
inline gsr::PaperRecord journal_paper(const std::string& venue_id, const std::string& paper_id,
                                      int year, std::optional<double> fwci,
                                      std::int64_t cited_by_count,
                                      std::vector<gsr::YearCount> counts,
                                      bool has_abstract = true,
                                      gsr::DocType type = gsr::DocType::Article) {
    gsr::PaperRecord rec;
    rec.paper_id = paper_id;
    rec.venue_id = venue_id;
    rec.publication_year = year;
    rec.doc_type = type;
    rec.fwci = fwci;
    rec.cited_by_count = cited_by_count;
    rec.counts_by_year = std::move(counts);
    rec.has_abstract = has_abstract;
    return rec;
}

// Conference paper as the second source delivers it: no FWCI, no time
// series.
inline gsr::PaperRecord conference_paper(const std::string& venue_id, const std::string& paper_id,
                                         int year, std::int64_t cited_by_count) {
    gsr::PaperRecord rec;
    rec.paper_id = paper_id;
    rec.venue_id = venue_id;
    rec.publication_year = year;
    rec.doc_type = gsr::DocType::Article;
    rec.cited_by_count = cited_by_count;
    rec.has_abstract = true;
    return rec;
}

// Journal venue whose indicators come out exactly as:
//   fwci_mean = fwci, if2 = mean(year_y_citations), h5 = 0, cagr = 0,
//   self rate = 0, n_valid = n_papers.
// Every paper sits in year Y-1 with cited_by_count 0 (so h5 stays 0) but a
// real counts_by_year entry (so the venue keeps the actual-IF2 path).
inline gsr::VenueCorpus journal_venue(const std::string& venue_id, gsr::ResearchField field,
                                      int retrieval_year, int n_papers, double fwci,
                                      const std::vector<std::int64_t>& year_y_citations) {
    gsr::VenueCorpus corpus;
    corpus.meta.venue_id = venue_id;
    corpus.meta.display_name = venue_id;
    corpus.meta.kind = gsr::VenueKind::Journal;
    corpus.meta.field = field;
    corpus.meta.openalex_source_id = "S-" + venue_id;

    for (int i = 0; i < n_papers; ++i) {
        const std::int64_t year_y =
            i < static_cast<int>(year_y_citations.size()) ? year_y_citations[i] : 0;
        corpus.records.push_back(journal_paper(venue_id, venue_id + "-W" + std::to_string(i),
                                               retrieval_year - 1, fwci, 0,
                                               {{retrieval_year, year_y}}));
    }
    return corpus;
}

// Conference venue on the estimation path: every paper in year Y-1 with the
// same cited_by_count, so if2_approx(c) = mean_cited * c exactly and
// h5 = min(n_papers, mean_cited).
inline gsr::VenueCorpus conference_venue(const std::string& venue_id, int retrieval_year,
                                         int n_papers, std::int64_t mean_cited) {
    gsr::VenueCorpus corpus;
    corpus.meta.venue_id = venue_id;
    corpus.meta.display_name = venue_id;
    corpus.meta.kind = gsr::VenueKind::Conference;
    corpus.meta.field = gsr::ResearchField::CS;
    corpus.meta.s2_venue_id = "s2-" + venue_id;

    for (int i = 0; i < n_papers; ++i) {
        corpus.records.push_back(conference_paper(venue_id, venue_id + "-P" + std::to_string(i),
                                                  retrieval_year - 1, mean_cited));
    }
    return corpus;
}

// --- raw source objects ------------------------------------------------------

inline json openalex_work(const std::string& id, int year, const std::string& type, double fwci,
                          std::int64_t cited, std::vector<std::pair<int, std::int64_t>> counts,
                          bool with_abstract = true,
                          std::vector<std::string> referenced = {}) {
    json work;
    work["id"] = id;
    work["publication_year"] = year;
    work["type"] = type;
    work["fwci"] = fwci;
    work["cited_by_count"] = cited;
    json cby = json::array();
    for (const auto& [y, c] : counts) cby.push_back({{"year", y}, {"cited_by_count", c}});
    work["counts_by_year"] = std::move(cby);
    work["is_retracted"] = false;
    work["is_paratext"] = false;
    if (with_abstract) {
        work["abstract_inverted_index"] = {{"The", {0}}, {"paper", {1}}};
    } else {
        work["abstract_inverted_index"] = nullptr;
    }
    work["referenced_works"] = referenced;
    return work;
}

inline json s2_paper(const std::string& id, int year, std::int64_t citation_count,
                     bool with_abstract = true) {
    json paper;
    paper["paperId"] = id;
    paper["year"] = year;
    paper["publicationTypes"] = json::array({"JournalArticle", "Conference"});
    paper["citationCount"] = citation_count;
    paper["abstract"] = with_abstract ? json("An abstract.") : json(nullptr);
    return paper;
}

// --- fixture API server --------------------------------------------------------

// Replays canned works per source id with OpenAlex-style cursor pagination
// and S2-style token pagination. Deterministic given the same registered
// corpus.
class FixtureServer {
public:
    FixtureServer() {
        server_.Get("/works", [this](const httplib::Request& req, httplib::Response& res) {
            requests_.fetch_add(1);
            if (fail_with_429_.load() > 0) {
                fail_with_429_.fetch_sub(1);
                res.status = 429;
                res.set_content("slow down", "text/plain");
                return;
            }
            const std::string filter = req.get_param_value("filter");
            const std::string source_id = source_from_filter(filter);
            const auto it = openalex_corpus_.find(source_id);
            if (it == openalex_corpus_.end()) {
                res.status = 404;
                res.set_content("{\"error\":\"unknown source\"}", "application/json");
                return;
            }
            const std::string cursor = req.get_param_value("cursor");
            std::size_t start = 0;
            if (!cursor.empty() && cursor != "*") start = std::stoul(cursor);
            std::size_t per_page = 25;
            if (req.has_param("per-page")) per_page = std::stoul(req.get_param_value("per-page"));

            json body;
            json results = json::array();
            const auto& works = it->second;
            const std::size_t end = std::min(works.size(), start + per_page);
            for (std::size_t i = start; i < end; ++i) results.push_back(works[i]);
            body["results"] = std::move(results);
            if (end < works.size()) {
                body["meta"] = {{"next_cursor", std::to_string(end)}};
            } else {
                body["meta"] = {{"next_cursor", nullptr}};
            }
            res.set_content(body.dump(), "application/json");
        });

        server_.Get("/graph/v1/paper/search/bulk",
                    [this](const httplib::Request& req, httplib::Response& res) {
                        requests_.fetch_add(1);
                        const std::string venue = req.get_param_value("venue");
                        const auto it = s2_corpus_.find(venue);
                        if (it == s2_corpus_.end()) {
                            res.status = 404;
                            res.set_content("{\"error\":\"unknown venue\"}", "application/json");
                            return;
                        }
                        std::size_t start = 0;
                        if (req.has_param("token")) start = std::stoul(req.get_param_value("token"));
                        const std::size_t per_page = 100;
                        json body;
                        body["total"] = it->second.size();
                        json data = json::array();
                        const auto& papers = it->second;
                        const std::size_t end = std::min(papers.size(), start + per_page);
                        for (std::size_t i = start; i < end; ++i) data.push_back(papers[i]);
                        body["data"] = std::move(data);
                        if (end < papers.size()) body["token"] = std::to_string(end);
                        res.set_content(body.dump(), "application/json");
                    });
    }

    ~FixtureServer() { stop(); }

    void add_openalex_source(const std::string& source_id, std::vector<json> works) {
        openalex_corpus_[source_id] = std::move(works);
    }

    void add_s2_venue(const std::string& venue_id, std::vector<json> papers) {
        s2_corpus_[venue_id] = std::move(papers);
    }

    // next n requests answer 429
    void inject_rate_limit(int n) { fail_with_429_.store(n); }

    int request_count() const { return requests_.load(); }

    std::string start() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return "http://127.0.0.1:" + std::to_string(port_);
    }

    void stop() {
        if (thread_.joinable()) {
            server_.stop();
            thread_.join();
        }
    }

private:
    static std::string source_from_filter(const std::string& filter) {
        const std::string key = "primary_location.source.id:";
        const auto pos = filter.find(key);
        if (pos == std::string::npos) return {};
        const auto start = pos + key.size();
        const auto end = filter.find(',', start);
        return filter.substr(start, end == std::string::npos ? std::string::npos : end - start);
    }

    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::map<std::string, std::vector<json>> openalex_corpus_;
    std::map<std::string, std::vector<json>> s2_corpus_;
    std::atomic<int> fail_with_429_{0};
    std::atomic<int> requests_{0};
};

}  // namespace fx
