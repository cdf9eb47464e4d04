#pragma once

#include "genrehawkes/fit_result.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace genrehawkes {

/// Univariate Hawkes process with exponential kernel:
///   lambda(t) = mu + sum_{t_i < t} beta * exp(-omega * (t - t_i)).
/// Units: mu and beta in events/day, omega in 1/day.
struct HawkesParams {
    double mu{1.0};
    double beta{0.0};
    double omega{1.0};

    [[nodiscard]] double branching_ratio() const noexcept { return beta / omega; }
    [[nodiscard]] bool subcritical() const noexcept { return branching_ratio() < 1.0; }
    /// Long-run event rate mu / (1 - beta/omega); infinite if not subcritical.
    [[nodiscard]] double stationary_rate() const noexcept;

    friend bool operator==(const HawkesParams&, const HawkesParams&) = default;
};

/// Throws std::invalid_argument unless mu > 0, beta >= 0, omega > 0 (all finite).
void check_params(const HawkesParams& p);

/// Intensity at t given all events in `history` (sorted, none after t).
/// Events at exactly t count as earlier in the canonical order.
[[nodiscard]] double intensity_at(const HawkesParams& p, std::span<const double> history, double t);

/// Exact log-likelihood on [0, horizon] in one O(n) pass using
/// A_i = exp(-omega (t_i - t_{i-1})) (A_{i-1} + 1).
[[nodiscard]] double log_likelihood(const HawkesParams& p, std::span<const double> times, double horizon);

struct LikelihoodAndGradient {
    double value{0.0};
    std::array<double, 3> gradient{};  // d/dmu, d/dbeta, d/domega
};

[[nodiscard]] LikelihoodAndGradient log_likelihood_gradient(const HawkesParams& p, std::span<const double> times,
                                                            double horizon);

/// Log-likelihood of the events in (window_start, window_end], conditioning on
/// every earlier event in `times` (sorted; events after window_end ignored).
[[nodiscard]] double window_log_likelihood(const HawkesParams& p, std::span<const double> times, double window_start,
                                           double window_end);

/// Lambda(t) = mu t + (beta/omega) sum_{t_i < t} (1 - exp(-omega (t - t_i))).
[[nodiscard]] double compensator(const HawkesParams& p, std::span<const double> times, double t);

/// Lambda(t_i) - Lambda(t_{i-1}) for every event (t_0 = 0). Under the true
/// model these are i.i.d. Exp(1).
[[nodiscard]] std::vector<double> rescaled_residuals(const HawkesParams& p, std::span<const double> times);

struct HawkesFitOptions {
    std::optional<HawkesParams> init;
    int max_iterations{500};
    double gradient_tolerance{1e-6};
    double step_tolerance{1e-9};
};

/// Data-driven starting point: mu = 0.5 n/T, omega = 1/mean gap, beta = omega/2.
[[nodiscard]] HawkesParams default_init(std::span<const double> times, double horizon);

inline constexpr double kBetaFloor = 1e-12;
inline constexpr std::size_t kMinHawkesEvents = 5;

/// Maximum-likelihood fit over (log mu, log beta, log omega) with BFGS and a
/// Nelder-Mead fallback. Throws std::invalid_argument for fewer than 5
/// events, identical timestamps, unsorted data or a non-positive horizon.
/// Non-convergence is reported through FitResult::converged.
[[nodiscard]] FitResult fit_hawkes(std::span<const double> times, double horizon, const HawkesFitOptions& opts = {});

/// Reads mu, beta, omega back out of a Hawkes FitResult.
[[nodiscard]] HawkesParams hawkes_params(const FitResult& fit);

}  // namespace genrehawkes
