#pragma once
// Operator-facing orchestration: declarative run configuration and the
// fetch / calibrate / score / validate / sensitivity commands.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "gsr/engine.hpp"
#include "gsr/report.hpp"
#include "gsr/validation.hpp"

namespace gsr {

inline constexpr const char* kEngineVersion = "0.1.0";

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SweepRange {
    double lo = 0.50;
    double hi = 1.00;
    double step = 0.05;
};

std::vector<double> sweep_coefficients(const SweepRange& range);

// All defaults reproduce the standard 2025-retrieval parameterization, so an
// empty config file is a valid starting point.
struct RunConfig {
    std::filesystem::path base_dir;  // directory the config file lives in

    std::string venue_list;          // CSV; required by fetch/calibrate/score
    std::string snapshot_dir = "snapshots";
    std::string output_dir = "out";
    std::string calibration_file;    // default <output_dir>/calibration.json

    std::optional<int> retrieval_year;        // else from snapshot headers, else 2025
    std::optional<std::string> retrieval_date;  // stamp for fetched snapshots; default today
    std::vector<OutputFormat> output_formats = {OutputFormat::Csv, OutputFormat::Json,
                                                OutputFormat::Markdown};

    ScoringConfig scoring;
    ValidationOptions record_validation;
    ExclusionMode exclusion_mode = ExclusionMode::And;
    bool allow_non_cs_conference = false;

    CalibrationWindowMode calibration_window = CalibrationWindowMode::TwoYear;
    bool calibration_restrict_to_if2_window = true;
    std::optional<double> coefficient_override;
    std::optional<double> fwci_conversion_override;

    FetchPolicy fetch_policy;
    int fetch_workers = 4;
    bool dedupe_by_id = true;
    std::string openalex_base_url = "https://api.openalex.org";
    std::string s2_base_url = "https://api.semanticscholar.org";

    std::filesystem::path venue_list_path() const;
    std::filesystem::path snapshot_dir_path() const;
    std::filesystem::path output_dir_path() const;
    std::filesystem::path calibration_path() const;
};

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& config_file);

// FNV-1a over the canonicalized effective configuration; embedded in every
// report output so runs are auditable.
std::string config_hash(const RunConfig& config);

std::vector<VenueMeta> load_venue_list(const std::filesystem::path& path,
                                       bool allow_non_cs_conference);

struct ReferenceLabel {
    std::string venue_id;
    std::string system;       // "JCR" | "CCF"
    std::string label_class;  // "Q1".."Q4" | "A"/"B"/"C"
};

std::vector<ReferenceLabel> load_labels_csv(const std::filesystem::path& path);

// Snapshot filename for a venue id (sanitized for the filesystem).
std::string snapshot_filename(const std::string& venue_id);

// Commands return 0 on success and 1 on runtime failure (including partial
// per-venue failures); configuration problems throw ConfigError, which the
// CLI maps to exit code 2.
int cmd_fetch(const RunConfig& config, bool force, const std::vector<std::string>& venue_subset,
              std::ostream& log);
int cmd_calibrate(const RunConfig& config, std::ostream& log);
int cmd_score(const RunConfig& config, std::ostream& log);
int cmd_validate(const RunConfig& config, const std::filesystem::path& labels_csv,
                 std::ostream& log);
int cmd_sensitivity(const RunConfig& config, const SweepRange& range, std::ostream& log);

}  // namespace gsr
