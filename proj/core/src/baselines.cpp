#include "genrehawkes/baselines.hpp"

#include "genrehawkes/hawkes.hpp"
#include "genrehawkes/optimize.hpp"
#include "genrehawkes/parallel.hpp"

#include <algorithm>
#include <complex>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace genrehawkes {

namespace {

void check_window(std::span<const double> times, double horizon, const char* who) {
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw std::invalid_argument(std::string(who) + ": horizon must be > 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0 && times[i] <= horizon)) {
            throw std::invalid_argument(std::string(who) + ": event time outside [0, horizon]");
        }
        if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument(std::string(who) + ": times not sorted");
    }
}

}  // namespace

FitResult fit_poisson(std::span<const double> times, double horizon) {
    check_window(times, horizon, "fit_poisson");
    if (times.empty()) throw std::invalid_argument("fit_poisson: need at least one event");
    const double n = static_cast<double>(times.size());
    const double mu = n / horizon;
    FitResult fit;
    fit.model = "poisson";
    fit.param_names = {"mu"};
    fit.params = {mu};
    fit.set_likelihood(n * std::log(mu) - n, 1);
    return fit;
}

double PCNHPPParams::integrated_rate(double a, double b) const {
    double total = 0.0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        const double lo = std::max(a, bin_edges[i]);
        const double hi = std::min(b, bin_edges[i + 1]);
        if (hi > lo) total += rates[i] * (hi - lo);
    }
    return total;
}

FitResult fit_pc_nhpp(std::span<const double> times, double horizon, double bin_width, PCNHPPParams* out_params) {
    if (!(std::isfinite(bin_width) && bin_width > 0.0)) throw std::invalid_argument("fit_pc_nhpp: bin_width must be > 0");
    check_window(times, horizon, "fit_pc_nhpp");

    // A trailing sliver shorter than 1e-9 bin widths is merged into the previous bin.
    const auto n_bins = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / bin_width - 1e-9)));
    PCNHPPParams params;
    params.bin_edges.resize(n_bins + 1);
    for (std::size_t i = 0; i < n_bins; ++i) params.bin_edges[i] = static_cast<double>(i) * bin_width;
    params.bin_edges[n_bins] = horizon;

    std::vector<double> counts(n_bins, 0.0);
    for (double t : times) {
        const auto b = std::min(n_bins - 1, static_cast<std::size_t>(std::floor(t / bin_width)));
        counts[b] += 1.0;
    }
    FitResult fit;
    fit.model = "pc_nhpp";
    double loglik = 0.0;
    params.rates.resize(n_bins);
    for (std::size_t i = 0; i < n_bins; ++i) {
        const double width = params.bin_edges[i + 1] - params.bin_edges[i];
        const double rate = counts[i] / width;
        params.rates[i] = rate;
        // c ln r - r w with r w = c at the MLE and 0 ln 0 := 0.
        if (counts[i] > 0.0) loglik += counts[i] * std::log(rate) - counts[i];
        fit.param_names.push_back("rate_" + std::to_string(i));
        fit.params.push_back(rate);
    }
    fit.set_likelihood(loglik, static_cast<int>(n_bins));
    if (out_params) *out_params = std::move(params);
    return fit;
}

double DriftParams::integrated_rate(double a, double b) const {
    if (!(b > a)) return 0.0;
    auto antiderivative = [&](double t) { return 0.5 * mu_slope * t * t + b_intercept * t; };
    if (mu_slope == 0.0) return std::max(0.0, b_intercept) * (b - a);
    const double root = -b_intercept / mu_slope;
    double lo = a, hi = b;
    if (mu_slope > 0.0) {
        lo = std::max(a, root);
    } else {
        hi = std::min(b, root);
    }
    if (!(hi > lo)) return 0.0;
    return antiderivative(hi) - antiderivative(lo);
}

DriftLikelihood drift_log_likelihood(const DriftParams& p, std::span<const double> times, double horizon) {
    DriftLikelihood out;
    if (!(p.rate(0.0) > 0.0 && p.rate(horizon) > 0.0)) {
        out.value = -std::numeric_limits<double>::infinity();
        return out;
    }
    double sum_log = 0.0, d_mu = 0.0, d_b = 0.0;
    for (double t : times) {
        const double r = p.rate(t);
        sum_log += std::log(r);
        d_mu += t / r;
        d_b += 1.0 / r;
    }
    out.value = sum_log - (0.5 * p.mu_slope * horizon * horizon + p.b_intercept * horizon);
    out.gradient = {d_mu - 0.5 * horizon * horizon, d_b - horizon};
    return out;
}

FitResult fit_nhpp_drift(std::span<const double> times, double horizon) {
    check_window(times, horizon, "fit_nhpp_drift");
    if (times.size() < 2) throw std::invalid_argument("fit_nhpp_drift: need at least two events");

    // x = (ln r0, ln r1): r0 = b, r1 = mu T + b.
    auto unpack = [&](std::span<const double> x) {
        const double r0 = std::exp(x[0]);
        const double r1 = std::exp(x[1]);
        return DriftParams{(r1 - r0) / horizon, r0};
    };
    auto objective = [&](std::span<const double> x, std::span<double> grad) {
        const double r0 = std::exp(x[0]);
        const double r1 = std::exp(x[1]);
        if (!(std::isfinite(r0) && std::isfinite(r1) && r0 > 0.0 && r1 > 0.0)) {
            return std::numeric_limits<double>::infinity();
        }
        const auto ll = drift_log_likelihood(unpack(x), times, horizon);
        if (!std::isfinite(ll.value)) return std::numeric_limits<double>::infinity();
        // dLL/dr0 = dLL/db - dLL/dmu / T ; dLL/dr1 = dLL/dmu / T
        grad[0] = -(ll.gradient[1] - ll.gradient[0] / horizon) * r0;
        grad[1] = -(ll.gradient[0] / horizon) * r1;
        return -ll.value;
    };
    const double start = std::log(static_cast<double>(times.size()) / horizon);
    const auto res = optim::minimize_bfgs(objective, {start, start});

    const DriftParams p = unpack(res.x);
    FitResult fit;
    fit.model = "nhpp_drift";
    fit.param_names = {"mu_slope", "b_intercept"};
    fit.params = {p.mu_slope, p.b_intercept};
    fit.set_likelihood(drift_log_likelihood(p, times, horizon).value, 2);
    fit.converged = res.converged;
    fit.n_iterations = res.iterations;
    if (res.used_simplex) fit.warnings.emplace_back(warning::simplex_fallback);
    return fit;
}

DriftParams drift_params(const FitResult& fit) { return DriftParams{fit.param("mu_slope"), fit.param("b_intercept")}; }

std::vector<double> pooled_times(const std::vector<GenreCluster>& clusters) {
    std::vector<Event> all;
    for (const auto& c : clusters) all.insert(all.end(), c.events.events().begin(), c.events.events().end());
    std::stable_sort(all.begin(), all.end(), canonical_less);
    std::vector<double> out;
    out.reserve(all.size());
    for (const auto& e : all) out.push_back(e.upload_time);
    return out;
}

FitResult fit_global_hawkes(const std::vector<GenreCluster>& clusters) {
    if (clusters.empty()) throw std::invalid_argument("fit_global_hawkes: no clusters");
    double horizon = 0.0;
    for (const auto& c : clusters) horizon = std::max(horizon, c.events.horizon());
    const auto times = pooled_times(clusters);
    FitResult fit = fit_hawkes(times, horizon);
    fit.model = "hawkes_global";
    return fit;
}

// ---------------------------------------------------------------------------
// ARIMA-lite

namespace {

std::vector<double> difference(std::span<const double> y, int d) {
    std::vector<double> w(y.begin(), y.end());
    for (int k = 0; k < d; ++k) {
        for (std::size_t i = w.size() - 1; i > 0; --i) w[i] -= w[i - 1];
        w.erase(w.begin());
    }
    return w;
}

struct Coefficients {
    double c;
    std::span<const double> ar;
    std::vector<double> ma;  // clamped
};

// Residuals e_t for t = start..n-1 (start >= p), innovations before start
// taken as zero.
double residuals(const std::vector<double>& w, const Coefficients& k, std::size_t start, std::vector<double>* out) {
    const std::size_t p = k.ar.size();
    const std::size_t q = k.ma.size();
    std::vector<double> e(w.size(), 0.0);
    double sse = 0.0;
    for (std::size_t t = start; t < w.size(); ++t) {
        double pred = k.c;
        for (std::size_t i = 0; i < p; ++i) pred += k.ar[i] * w[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) {
            if (t >= start + 1 + j) pred += k.ma[j] * e[t - 1 - j];
        }
        e[t] = w[t] - pred;
        sse += e[t] * e[t];
    }
    if (out) *out = std::move(e);
    return sse;
}

// Largest modulus among the roots of z^q + theta_1 z^(q-1) + ... + theta_q,
// i.e. the inverse roots of the MA polynomial 1 + theta_1 B + ... + theta_q B^q.
double ma_root_radius(const std::vector<double>& theta) {
    if (theta.empty()) return 0.0;
    if (theta.size() == 1) return std::abs(theta[0]);
    const std::complex<double> disc = std::sqrt(std::complex<double>(theta[0] * theta[0] - 4.0 * theta[1]));
    return std::max(std::abs((-theta[0] + disc) / 2.0), std::abs((-theta[0] - disc) / 2.0));
}

// MA coefficients outside the invertible region are pulled back onto its
// boundary by shrinking every inverse root by the same factor (for q = 1 this
// is a clamp to +-kMaBound).
Coefficients unpack_arima(std::span<const double> x, ArimaOrder order, bool* clamped = nullptr) {
    Coefficients k{x[0], x.subspan(1, static_cast<std::size_t>(order.p)), {}};
    for (int j = 0; j < order.q; ++j) k.ma.push_back(x[1 + static_cast<std::size_t>(order.p + j)]);
    const double radius = ma_root_radius(k.ma);
    if (radius > kMaBound) {
        const double s = kMaBound / radius;
        double scale = 1.0;
        for (double& theta : k.ma) {
            scale *= s;
            theta *= scale;
        }
        if (clamped) *clamped = true;
    }
    return k;
}

// Fits one order, scoring residuals of the original series from index
// `first` on. A common `first` across a grid makes the likelihoods comparable.
ArimaFit fit_arima_from(std::span<const double> series, ArimaOrder order, std::size_t first) {
    if (series.size() < kMinArimaLength) {
        throw std::invalid_argument("fit_arima: series needs at least " + std::to_string(kMinArimaLength) + " points");
    }
    if (order.p < 0 || order.p > 2 || order.d < 0 || order.d > 1 || order.q < 0 || order.q > 2) {
        throw std::invalid_argument("fit_arima: order outside p<=2, d<=1, q<=2");
    }
    const auto w = difference(series, order.d);
    const std::size_t start = std::max<std::size_t>(static_cast<std::size_t>(order.p), first - static_cast<std::size_t>(order.d));
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= static_cast<double>(w.size());

    std::vector<double> x0(1 + static_cast<std::size_t>(order.p + order.q), 0.0);
    x0[0] = mean;
    auto sse = [&](std::span<const double> x) { return residuals(w, unpack_arima(x, order), start, nullptr); };

    optim::Options o;
    o.max_iterations = 4000;
    o.step_tolerance = 1e-9;
    const auto res = optim::minimize_nelder_mead(sse, x0, o);

    bool clamped = false;
    const auto k = unpack_arima(res.x, order, &clamped);
    const double m = static_cast<double>(w.size() - start);
    double sigma2 = residuals(w, k, start, nullptr) / m;
    sigma2 = std::max(sigma2, 1e-12);

    ArimaFit out;
    out.params.order = order;
    out.params.intercept = k.c;
    out.params.ar.assign(k.ar.begin(), k.ar.end());
    out.params.ma = k.ma;
    out.params.sigma2 = sigma2;

    FitResult& fit = out.fit;
    fit.model = "arima_lite";
    fit.param_names.push_back("intercept");
    fit.params.push_back(k.c);
    for (int i = 0; i < order.p; ++i) {
        fit.param_names.push_back("ar" + std::to_string(i + 1));
        fit.params.push_back(out.params.ar[static_cast<std::size_t>(i)]);
    }
    for (int j = 0; j < order.q; ++j) {
        fit.param_names.push_back("ma" + std::to_string(j + 1));
        fit.params.push_back(out.params.ma[static_cast<std::size_t>(j)]);
    }
    fit.param_names.insert(fit.param_names.end(), {"sigma2", "p", "d", "q"});
    fit.params.insert(fit.params.end(), {sigma2, double(order.p), double(order.d), double(order.q)});
    const double loglik = -0.5 * m * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
    fit.set_likelihood(loglik, order.p + order.q + 2);
    fit.converged = res.converged;
    fit.n_iterations = res.iterations;
    if (clamped) fit.warnings.emplace_back(warning::ma_clamped);
    return out;
}

}  // namespace

ArimaFit fit_arima(std::span<const double> series, ArimaOrder order) {
    return fit_arima_from(series, order, static_cast<std::size_t>(std::max(0, order.p + order.d)));
}

ArimaFit fit_arima_lite(std::span<const double> series, int max_p, int max_d, int max_q, unsigned threads) {
    if (series.size() < kMinArimaLength) {
        throw std::invalid_argument("fit_arima_lite: series needs at least " + std::to_string(kMinArimaLength) +
                                    " points");
    }
    std::vector<ArimaOrder> grid;
    for (int p = 0; p <= max_p; ++p) {
        for (int d = 0; d <= max_d; ++d) {
            for (int q = 0; q <= max_q; ++q) grid.push_back({p, d, q});
        }
    }
    std::vector<ArimaFit> fits(grid.size());
    const auto first = static_cast<std::size_t>(max_p + max_d);
    parallel_for(grid.size(), threads, [&](std::size_t i) { fits[i] = fit_arima_from(series, grid[i], first); });

    // A clamped MA fit sits on the invertibility boundary, where the zero
    // start-up innovations never wash out and the conditional likelihood is
    // inflated. Such fits only compete when no order avoids the clamp.
    const bool any_interior = std::any_of(fits.begin(), fits.end(),
                                          [](const ArimaFit& f) { return !f.fit.has_warning(warning::ma_clamped); });
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        if (any_interior && fits[i].fit.has_warning(warning::ma_clamped)) continue;
        // grid is already in lexicographic order, so strict < keeps the earlier order on ties
        if (!best || fits[i].fit.aic < fits[*best].fit.aic) best = i;
    }
    return fits[*best];
}

std::vector<double> arima_forecast(const ArimaLiteParams& params, std::span<const double> series, std::size_t steps) {
    const auto w = difference(series, params.order.d);
    std::vector<double> e;
    Coefficients k{params.intercept, params.ar, params.ma};
    residuals(w, k, params.ar.size(), &e);

    std::vector<double> ext = w;
    const std::size_t p = params.ar.size();
    const std::size_t q = params.ma.size();
    for (std::size_t h = 0; h < steps; ++h) {
        const std::size_t t = ext.size();
        double pred = params.intercept;
        for (std::size_t i = 0; i < p; ++i) pred += params.ar[i] * ext[t - 1 - i];
        for (std::size_t j = 0; j < q; ++j) {
            const std::size_t lag = t - 1 - j;
            if (lag < e.size()) pred += params.ma[j] * e[lag];
        }
        ext.push_back(pred);
    }

    std::vector<double> out(ext.end() - static_cast<std::ptrdiff_t>(steps), ext.end());
    if (params.order.d == 1) {
        double level = series.back();
        for (double& v : out) {
            level += v;
            v = level;
        }
    }
    return out;
}

std::vector<double> daily_counts(std::span<const double> times, double start, std::size_t n_days) {
    std::vector<double> counts(n_days, 0.0);
    for (double t : times) {
        const double offset = std::floor(t - start);
        if (offset >= 0.0 && offset < static_cast<double>(n_days)) counts[static_cast<std::size_t>(offset)] += 1.0;
    }
    return counts;
}

}  // namespace genrehawkes
