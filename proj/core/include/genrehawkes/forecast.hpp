#pragma once

#include "genrehawkes/fit_result.hpp"
#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/taggraph.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace genrehawkes {

struct SplitSpec {
    double train_days{30.0};
    double horizon_days{14.0};
    /// End of training. Default: horizon_T - horizon_days, so the test window
    /// ends with the stream.
    std::optional<double> split_point;

    [[nodiscard]] double resolve_split(double stream_horizon) const {
        return split_point.value_or(stream_horizon - horizon_days);
    }
};

/// Throws std::invalid_argument unless train_days > 0, horizon_days > 0,
/// split - train_days >= 0 and split + horizon_days <= stream_horizon.
void check_split(const SplitSpec& spec, double stream_horizon);

struct Split {
    double window_start{0.0};  // split_point - train_days
    double split_point{0.0};
    double window_end{0.0};    // split_point + horizon_days
    std::vector<double> train; // (window_start, split_point]; closed at 0 when window_start is 0
    std::vector<double> test;  // (split_point, window_end]
};

/// Throws std::invalid_argument for an invalid spec or an empty training window.
[[nodiscard]] Split split_stream(std::span<const double> times, const SplitSpec& spec, double stream_horizon);

/// Lambda(t + dt) - Lambda(t) with only `history` (all <= t) driving the
/// excitation. Throws RefusedError for supercritical parameters.
[[nodiscard]] double expected_count(const HawkesParams& p, std::span<const double> history, double t, double dt);

struct McForecast {
    double mean{0.0};
    double std{0.0};        // sample standard deviation of the simulated counts
    double std_error{0.0};  // std / sqrt(n_samples)
};

inline constexpr std::size_t kMinMcSamples = 100;

/// Mean event count in (t, t + dt] over `n_samples` thinning simulations
/// conditioned on `history`. Sample k uses Philox stream k under `seed`, so
/// the result is independent of `threads`.
[[nodiscard]] McForecast mc_expected_count(const HawkesParams& p, std::span<const double> history, double t,
                                           double dt, std::size_t n_samples, std::uint64_t seed,
                                           unsigned threads = 1);

namespace model {
inline constexpr const char* hawkes = "hawkes";
inline constexpr const char* hawkes_mc = "hawkes_mc";
inline constexpr const char* hawkes_global = "hawkes_global";
inline constexpr const char* hawkes_global_mc = "hawkes_global_mc";
inline constexpr const char* poisson = "poisson";
inline constexpr const char* pc_nhpp = "pc_nhpp";
inline constexpr const char* nhpp_drift = "nhpp_drift";
inline constexpr const char* arima_lite = "arima_lite";
}  // namespace model

/// Every model evaluate_all understands, in report order.
[[nodiscard]] const std::vector<std::string>& known_models();

struct EvaluationOptions {
    double bin_width{7.0};
    std::size_t mc_samples{1000};
    std::uint64_t seed{0};
    unsigned threads{1};
};

struct ForecastRow {
    int cluster_id{0};
    std::string model;
    double train_days{0.0};
    double horizon_days{0.0};
    double loglik{0.0};
    double aic{0.0};
    double predicted{0.0};
    std::int64_t actual{0};
    double abs_error{0.0};
    double rel_error{0.0};
    /// Held-out log-likelihood of the test window (Hawkes-family rows only).
    std::optional<double> test_loglik;
    std::optional<double> mc_std;
    std::string status{"ok"};  // "ok", "refused: supercritical" or "error: ..."

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

struct ModelSummary {
    std::string model;
    std::size_t n_ok{0};
    double mean_abs_error{0.0};
    double mean_rel_error{0.0};
};

struct Exclusion {
    int cluster_id{0};
    std::string reason;
};

struct ComparisonTable {
    std::vector<ForecastRow> rows;  // cluster order, then model order as requested
    std::vector<ModelSummary> summary;
    std::vector<Exclusion> excluded;
};

/// Fits each requested model on every cluster's training window and scores
/// its forecast of the test-window count. Clusters with an empty training
/// window are excluded and listed; any other per-model failure becomes a row
/// whose status explains it.
///
/// The no-cluster models fit one Hawkes process to the pooled training events
/// of the included clusters; a cluster's forecast is the pooled forecast
/// times the cluster's share of pooled training events, and its held-out
/// log-likelihood treats cluster labels as independent marks with those
/// shares.
[[nodiscard]] ComparisonTable evaluate_all(const std::vector<GenreCluster>& clusters, const SplitSpec& spec,
                                           const std::vector<std::string>& models,
                                           const EvaluationOptions& opts = {});

struct AicDifference {
    int cluster_id{0};
    double aic_a{0.0};
    double aic_b{0.0};
    double difference{0.0};  // aic_a - aic_b
};

/// Per-cluster AIC(model_a) - AIC(model_b) over clusters where both rows are ok.
[[nodiscard]] std::vector<AicDifference> aic_differences(const ComparisonTable& table, const std::string& model_a,
                                                         const std::string& model_b);

}  // namespace genrehawkes
