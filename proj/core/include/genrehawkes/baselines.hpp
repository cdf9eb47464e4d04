#pragma once

#include "genrehawkes/fit_result.hpp"
#include "genrehawkes/taggraph.hpp"

#include <array>
#include <span>
#include <vector>

namespace genrehawkes {

/// Homogeneous Poisson: mu = n/T, loglik = n ln mu - n, k = 1.
[[nodiscard]] FitResult fit_poisson(std::span<const double> times, double horizon);

struct PCNHPPParams {
    std::vector<double> bin_edges;  // 0 = e_0 < e_1 < ... < e_m = T
    std::vector<double> rates;

    /// Integral of the rate over [a, b] within [0, T].
    [[nodiscard]] double integrated_rate(double a, double b) const;
};

/// Bins of `bin_width` days starting at 0; the last bin is cut at T. Events at
/// exactly T fall in the last bin. k = number of bins.
[[nodiscard]] FitResult fit_pc_nhpp(std::span<const double> times, double horizon, double bin_width,
                                    PCNHPPParams* out_params = nullptr);

/// Rate mu_slope * t + b_intercept.
struct DriftParams {
    double mu_slope{0.0};
    double b_intercept{1.0};

    [[nodiscard]] double rate(double t) const { return mu_slope * t + b_intercept; }
    /// Integral of max(rate, 0) over [a, b].
    [[nodiscard]] double integrated_rate(double a, double b) const;
};

struct DriftLikelihood {
    double value{0.0};
    std::array<double, 2> gradient{};  // d/dmu_slope, d/db_intercept
};

/// sum ln(mu t_i + b) - (mu T^2 / 2 + b T); -inf if the rate is not positive
/// on [0, T].
[[nodiscard]] DriftLikelihood drift_log_likelihood(const DriftParams& p, std::span<const double> times,
                                                   double horizon);

/// Maximizes the drift likelihood. The optimizer works on the logs of the
/// rates at 0 and at T, which keeps mu t + b > 0 on the whole window.
[[nodiscard]] FitResult fit_nhpp_drift(std::span<const double> times, double horizon);
[[nodiscard]] DriftParams drift_params(const FitResult& fit);

/// All cluster events pooled into one time-ordered stream.
[[nodiscard]] std::vector<double> pooled_times(const std::vector<GenreCluster>& clusters);

/// One Hawkes process on the pooled events of every cluster ("no clusters").
/// The horizon is the largest cluster horizon.
[[nodiscard]] FitResult fit_global_hawkes(const std::vector<GenreCluster>& clusters);

struct ArimaOrder {
    int p{0};
    int d{0};
    int q{0};

    friend auto operator<=>(const ArimaOrder&, const ArimaOrder&) = default;
};

struct ArimaLiteParams {
    ArimaOrder order;
    std::vector<double> ar;  // phi_1..phi_p
    std::vector<double> ma;  // theta_1..theta_q
    double intercept{0.0};
    double sigma2{1.0};
};

struct ArimaFit {
    ArimaLiteParams params;
    FitResult fit;
};

inline constexpr std::size_t kMinArimaLength = 20;
inline constexpr double kMaBound = 0.999;

/// Conditional least squares for one (p, d, q). Innovations before the
/// sample start at zero. MA coefficients are kept invertible: when an inverse
/// root of the MA polynomial exceeds 0.999 in modulus all of them are shrunk
/// onto that radius (for q = 1, a clamp to +-0.999) and the fit is flagged.
/// k = p + q + 2.
[[nodiscard]] ArimaFit fit_arima(std::span<const double> series, ArimaOrder order);

/// Fits every order with p <= max_p, d <= max_d, q <= max_q and keeps the
/// lowest AIC (ties broken by lexicographic (p, d, q)). Every order is scored
/// on the same observations (the first max_p + max_d are conditioned on), so
/// the likelihoods are comparable. Fits whose MA part was clamped only
/// compete when every order was clamped.
[[nodiscard]] ArimaFit fit_arima_lite(std::span<const double> series, int max_p = 2, int max_d = 1, int max_q = 2,
                                      unsigned threads = 1);

/// h-step forecasts of the original (undifferenced) series, future
/// innovations set to zero.
[[nodiscard]] std::vector<double> arima_forecast(const ArimaLiteParams& params, std::span<const double> series,
                                                 std::size_t steps);

/// Event counts per whole day: bucket k holds events with floor(t - start) == k,
/// for k in [0, n_days).
[[nodiscard]] std::vector<double> daily_counts(std::span<const double> times, double start, std::size_t n_days);

}  // namespace genrehawkes
