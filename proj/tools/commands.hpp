#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace genrehawkes::cli {

/// Bad flags or a missing upstream artifact. Reported without a stack of
/// context; the message is the whole story.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string input;
    std::filesystem::path out{"."};
    std::optional<std::int64_t> eta;
    std::optional<std::pair<std::int64_t, std::int64_t>> sweep;
    double bin_width{7.0};
    double train_days{30.0};
    double horizon_days{14.0};
    double w_comments{1.0};
    std::size_t mc_samples{1000};
    std::uint64_t seed{0};
    std::vector<std::string> models;  // empty = every model the command knows
    unsigned threads{1};
    std::string popularity_average{"prior"};
    std::string corpus_spec;  // simulate only; empty = built-in three-cluster spec
};

/// Parses "A:B" with 1 <= A <= B.
[[nodiscard]] std::pair<std::int64_t, std::int64_t> parse_sweep(const std::string& text);

/// Checks the fields `command` consumes; throws UsageError before any output
/// is touched.
void validate(const RunConfig& cfg, const std::string& command);

int cmd_cluster(const RunConfig& cfg);
int cmd_fit(const RunConfig& cfg);
int cmd_forecast(const RunConfig& cfg);
int cmd_attribute(const RunConfig& cfg);
int cmd_simulate(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

namespace artifact {
inline constexpr const char* assignments = "assignments.csv";
inline constexpr const char* clusters = "clusters.json";
inline constexpr const char* eta_sweep = "eta_sweep.csv";
inline constexpr const char* fits = "fits.json";
inline constexpr const char* forecast_csv = "forecast_table.csv";
inline constexpr const char* forecast_json = "forecast_table.json";
inline constexpr const char* forward_csv = "forecast_forward.csv";
inline constexpr const char* forward_json = "forecast_forward.json";
inline constexpr const char* attribution_json = "attribution.json";
inline constexpr const char* attribution_csv = "attribution.csv";
inline constexpr const char* report = "report.json";
inline constexpr const char* aic_diff = "aic_diff.csv";
inline constexpr const char* factor_shares = "factor_shares.csv";
inline constexpr const char* weekly_counts = "weekly_counts.csv";
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* ground_truth = "ground_truth.json";
}  // namespace artifact

}  // namespace genrehawkes::cli
