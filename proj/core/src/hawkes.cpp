#include "genrehawkes/hawkes.hpp"

#include "genrehawkes/optimize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace genrehawkes {

double FitResult::param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size() && i < params.size(); ++i) {
        if (param_names[i] == name) return params[i];
    }
    throw std::out_of_range("FitResult '" + model + "' has no parameter '" + name + "'");
}

double HawkesParams::stationary_rate() const noexcept {
    return subcritical() ? mu / (1.0 - branching_ratio()) : std::numeric_limits<double>::infinity();
}

void check_params(const HawkesParams& p) {
    if (!(std::isfinite(p.mu) && p.mu > 0.0)) throw std::invalid_argument("Hawkes mu must be finite and > 0");
    if (!(std::isfinite(p.beta) && p.beta >= 0.0)) throw std::invalid_argument("Hawkes beta must be finite and >= 0");
    if (!(std::isfinite(p.omega) && p.omega > 0.0)) throw std::invalid_argument("Hawkes omega must be finite and > 0");
}

namespace {

void check_times(std::span<const double> times, double horizon) {
    if (!(std::isfinite(horizon) && horizon >= 0.0)) throw std::invalid_argument("horizon must be finite and >= 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0 && times[i] <= horizon)) {
            throw std::invalid_argument("event time " + std::to_string(times[i]) + " outside [0, horizon]");
        }
        if (i > 0 && times[i] < times[i - 1]) throw std::invalid_argument("event times are not sorted");
    }
}

void check_sorted(std::span<const double> times) {
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] < times[i - 1]) throw std::invalid_argument("event times are not sorted");
    }
}

// 1 - exp(-x) without cancellation for small x.
inline double one_minus_exp_neg(double x) { return -std::expm1(-x); }

}  // namespace

double intensity_at(const HawkesParams& p, std::span<const double> history, double t) {
    check_params(p);
    double excitation = 0.0;
    for (double ti : history) {
        if (ti > t) throw std::invalid_argument("intensity_at: history contains an event after t");
        excitation += std::exp(-p.omega * (t - ti));
    }
    return p.mu + p.beta * excitation;
}

double log_likelihood(const HawkesParams& p, std::span<const double> times, double horizon) {
    check_params(p);
    check_times(times, horizon);
    double sum_log = 0.0;
    double tail = 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) a = std::exp(-p.omega * (times[i] - times[i - 1])) * (a + 1.0);
        sum_log += std::log(p.mu + p.beta * a);
        tail += one_minus_exp_neg(p.omega * (horizon - times[i]));
    }
    return sum_log - p.mu * horizon - (p.beta / p.omega) * tail;
}

LikelihoodAndGradient log_likelihood_gradient(const HawkesParams& p, std::span<const double> times, double horizon) {
    check_params(p);
    check_times(times, horizon);
    double sum_log = 0.0, d_mu = 0.0, d_beta = 0.0, d_omega = 0.0;
    double tail = 0.0, tail_d = 0.0;
    double a = 0.0, b = 0.0;  // A_i and dA_i/domega
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (i > 0) {
            const double gap = times[i] - times[i - 1];
            const double decay = std::exp(-p.omega * gap);
            const double a_new = decay * (a + 1.0);
            b = -gap * a_new + decay * b;
            a = a_new;
        }
        const double lambda = p.mu + p.beta * a;
        sum_log += std::log(lambda);
        d_mu += 1.0 / lambda;
        d_beta += a / lambda;
        d_omega += p.beta * b / lambda;
        const double remaining = horizon - times[i];
        tail += one_minus_exp_neg(p.omega * remaining);
        tail_d += remaining * std::exp(-p.omega * remaining);
    }
    LikelihoodAndGradient out;
    out.value = sum_log - p.mu * horizon - (p.beta / p.omega) * tail;
    out.gradient[0] = d_mu - horizon;
    out.gradient[1] = d_beta - tail / p.omega;
    out.gradient[2] = d_omega + (p.beta / (p.omega * p.omega)) * tail - (p.beta / p.omega) * tail_d;
    return out;
}

double compensator(const HawkesParams& p, std::span<const double> times, double t) {
    check_params(p);
    if (!(t >= 0.0)) throw std::invalid_argument("compensator: t must be >= 0");
    check_sorted(times);
    double excited = 0.0;
    for (double ti : times) {
        if (ti >= t) break;
        excited += one_minus_exp_neg(p.omega * (t - ti));
    }
    return p.mu * t + (p.beta / p.omega) * excited;
}

double window_log_likelihood(const HawkesParams& p, std::span<const double> times, double window_start,
                             double window_end) {
    check_params(p);
    check_sorted(times);
    if (!(window_end >= window_start)) throw std::invalid_argument("window_log_likelihood: empty window");
    double sum_log = 0.0;
    double a = 0.0;
    for (std::size_t i = 0; i < times.size() && times[i] <= window_end; ++i) {
        if (i > 0) a = std::exp(-p.omega * (times[i] - times[i - 1])) * (a + 1.0);
        if (times[i] > window_start) sum_log += std::log(p.mu + p.beta * a);
    }
    return sum_log - (compensator(p, times, window_end) - compensator(p, times, window_start));
}

std::vector<double> rescaled_residuals(const HawkesParams& p, std::span<const double> times) {
    check_params(p);
    if (times.empty()) throw std::invalid_argument("rescaled_residuals: no events");
    if (!(times.front() >= 0.0)) throw std::invalid_argument("rescaled_residuals: negative event time");
    check_sorted(times);
    std::vector<double> out;
    out.reserve(times.size());
    out.push_back(p.mu * times.front());
    double a = 0.0;
    const double ratio = p.beta / p.omega;
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double gap = times[i] - times[i - 1];
        // Lambda(t_i) - Lambda(t_{i-1}) = mu gap + (beta/omega) (A_{i-1} + 1)(1 - e^{-omega gap})
        out.push_back(p.mu * gap + ratio * (a + 1.0) * one_minus_exp_neg(p.omega * gap));
        a = std::exp(-p.omega * gap) * (a + 1.0);
    }
    return out;
}

HawkesParams default_init(std::span<const double> times, double horizon) {
    if (times.size() < 2) throw std::invalid_argument("default_init: need at least two events");
    const double mean_gap = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(mean_gap > 0.0)) throw std::invalid_argument("default_init: all event times are identical");
    HawkesParams p;
    p.mu = 0.5 * static_cast<double>(times.size()) / horizon;
    p.omega = 1.0 / mean_gap;
    p.beta = 0.5 * p.omega;
    return p;
}

FitResult fit_hawkes(std::span<const double> times, double horizon, const HawkesFitOptions& opts) {
    if (times.size() < kMinHawkesEvents) {
        throw std::invalid_argument("fit_hawkes: need at least " + std::to_string(kMinHawkesEvents) +
                                    " events, got " + std::to_string(times.size()));
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("fit_hawkes: horizon must be > 0");
    check_times(times, horizon);
    if (times.front() == times.back()) throw std::invalid_argument("fit_hawkes: all event times are identical");

    const HawkesParams init = opts.init ? *opts.init : default_init(times, horizon);
    check_params(init);
    const double log_floor = std::log(kBetaFloor);

    auto unpack = [&](std::span<const double> x) {
        return HawkesParams{std::exp(x[0]), std::exp(std::max(x[1], log_floor)), std::exp(x[2])};
    };
    auto objective = [&](std::span<const double> x, std::span<double> grad) {
        const HawkesParams p = unpack(x);
        if (!(std::isfinite(p.mu) && std::isfinite(p.beta) && std::isfinite(p.omega)) || p.mu <= 0.0 ||
            p.omega <= 0.0) {
            return std::numeric_limits<double>::infinity();
        }
        const auto lg = log_likelihood_gradient(p, times, horizon);
        grad[0] = -lg.gradient[0] * p.mu;
        grad[1] = x[1] < log_floor ? 0.0 : -lg.gradient[1] * p.beta;
        grad[2] = -lg.gradient[2] * p.omega;
        return std::isfinite(lg.value) ? -lg.value : std::numeric_limits<double>::infinity();
    };

    optim::Options o;
    o.max_iterations = opts.max_iterations;
    o.gradient_tolerance = opts.gradient_tolerance;
    o.step_tolerance = opts.step_tolerance;
    const auto res = optim::minimize_bfgs(
        objective, {std::log(init.mu), std::log(std::max(init.beta, kBetaFloor)), std::log(init.omega)}, o);

    const HawkesParams p = unpack(res.x);
    FitResult fit;
    fit.model = "hawkes";
    fit.param_names = {"mu", "beta", "omega"};
    fit.params = {p.mu, p.beta, p.omega};
    fit.set_likelihood(log_likelihood(p, times, horizon), 3);
    fit.converged = res.converged;
    fit.n_iterations = res.iterations;
    fit.branching_ratio = p.branching_ratio();
    if (!p.subcritical()) fit.warnings.emplace_back(warning::supercritical);
    if (p.beta < 1e-6 * p.mu) fit.warnings.emplace_back(warning::effectively_poisson);
    if (res.used_simplex) fit.warnings.emplace_back(warning::simplex_fallback);
    return fit;
}

HawkesParams hawkes_params(const FitResult& fit) {
    return HawkesParams{fit.param("mu"), fit.param("beta"), fit.param("omega")};
}

}  // namespace genrehawkes
