#pragma once

#include <optional>
#include <string>
#include <vector>

namespace genrehawkes {

/// Outcome of fitting any model by maximum likelihood.
///
/// `aic` is always 2k - 2 * log_likelihood; use `make_fit_result` or
/// `set_likelihood` so the two never drift apart.
struct FitResult {
    std::string model;
    std::vector<std::string> param_names;
    std::vector<double> params;
    double log_likelihood{0.0};
    int n_params{0};
    double aic{0.0};
    bool converged{true};
    int n_iterations{0};
    std::optional<double> branching_ratio;  // Hawkes models only
    std::vector<std::string> warnings;

    void set_likelihood(double loglik, int k) {
        log_likelihood = loglik;
        n_params = k;
        aic = 2.0 * k - 2.0 * loglik;
    }

    [[nodiscard]] bool has_warning(const std::string& w) const {
        for (const auto& x : warnings) {
            if (x == w) return true;
        }
        return false;
    }

    [[nodiscard]] double param(const std::string& name) const;
};

[[nodiscard]] inline double aic(double loglik, int k) { return 2.0 * k - 2.0 * loglik; }

namespace warning {
inline constexpr const char* supercritical = "supercritical";
inline constexpr const char* effectively_poisson = "effectively_poisson";
inline constexpr const char* ma_clamped = "ma_clamped";
inline constexpr const char* simplex_fallback = "simplex_fallback";
}  // namespace warning

}  // namespace genrehawkes
