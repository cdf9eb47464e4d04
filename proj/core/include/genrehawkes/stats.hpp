#pragma once

#include <span>

namespace genrehawkes {

struct KsResult {
    double statistic{0.0};  // sup |F_n(x) - F(x)|
    double p_value{1.0};
};

/// One-sample Kolmogorov-Smirnov test against Exp(1). The p-value uses the
/// asymptotic Kolmogorov distribution with Stephens' small-sample correction.
[[nodiscard]] KsResult ks_test_exponential(std::span<const double> sample);

/// P(K > x) for the Kolmogorov distribution.
[[nodiscard]] double kolmogorov_survival(double x);

}  // namespace genrehawkes
