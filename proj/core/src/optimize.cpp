#include "genrehawkes/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace genrehawkes::optim {

namespace {

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

Result minimize_nelder_mead(const Value& f, std::vector<double> x0, const Options& opts) {
    const std::size_t n = x0.size();
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> pts(n + 1, x0);
    for (std::size_t i = 0; i < n; ++i) {
        pts[i + 1][i] += opts.simplex_initial_step * std::max(1.0, std::abs(x0[i]));
    }
    std::vector<double> vals(n + 1);
    for (std::size_t i = 0; i <= n; ++i) vals[i] = eval(pts[i]);

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    Result res;

    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<std::vector<double>> p2(n + 1);
        std::vector<double> v2(n + 1);
        for (std::size_t i = 0; i <= n; ++i) {
            p2[i] = std::move(pts[order[i]]);
            v2[i] = vals[order[i]];
        }
        pts = std::move(p2);
        vals = std::move(v2);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i <= n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += (pts[i][k] - pts[0][k]) * (pts[i][k] - pts[0][k]);
            d = std::max(d, std::sqrt(s));
        }
        return d;
    };
    auto point_along = [&](double coef, std::vector<double>& out) {
        for (std::size_t k = 0; k < n; ++k) out[k] = centroid[k] + coef * (pts[n][k] - centroid[k]);
    };

    sort_vertices();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const double diam = diameter();
        const double spread = vals[n] - vals[0];
        if (diam < opts.step_tolerance ||
            (std::isfinite(spread) && spread <= 1e-14 * std::abs(vals[0]) && diam < std::sqrt(opts.step_tolerance))) {
            res.converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) centroid[k] += pts[i][k] / static_cast<double>(n);
        }
        point_along(-1.0, trial);
        const double fr = eval(trial);
        if (fr < vals[0]) {
            point_along(-2.0, trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                pts[n] = trial2;
                vals[n] = fe;
            } else {
                pts[n] = trial;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = trial;
            vals[n] = fr;
        } else {
            const bool outside = fr < vals[n];
            point_along(outside ? -0.5 : 0.5, trial2);
            const double fc = eval(trial2);
            if (fc < std::min(fr, vals[n])) {
                pts[n] = trial2;
                vals[n] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t k = 0; k < n; ++k) pts[i][k] = pts[0][k] + 0.5 * (pts[i][k] - pts[0][k]);
                    vals[i] = eval(pts[i]);
                }
            }
        }
        sort_vertices();
    }
    res.x = pts[0];
    res.value = vals[0];
    res.iterations = it;
    res.last_step = diameter();
    res.used_simplex = true;
    return res;
}

Result minimize_bfgs(const ValueAndGradient& f, std::vector<double> x0, const Options& opts) {
    const std::size_t n = x0.size();
    std::vector<double> x = std::move(x0), g(n), x_new(n), g_new(n), d(n), s(n), y(n), hy(n);
    std::vector<double> h(n * n, 0.0);
    auto reset_h = [&] {
        std::fill(h.begin(), h.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) h[i * n + i] = 1.0;
    };
    reset_h();
    bool h_is_identity = true;

    Result res;
    double fx = f(x, g);
    int failures = 0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        if (!std::isfinite(fx)) break;
        const double gnorm = norm(g);
        if (gnorm < opts.gradient_tolerance) {
            res.converged = true;
            break;
        }
        for (std::size_t i = 0; i < n; ++i) {
            d[i] = 0.0;
            for (std::size_t k = 0; k < n; ++k) d[i] -= h[i * n + k] * g[k];
        }
        double slope = dot(g, d);
        if (!(slope < 0.0)) {
            reset_h();
            h_is_identity = true;
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            slope = -gnorm * gnorm;
        }

        double alpha = h_is_identity ? std::min(1.0, 1.0 / gnorm) : 1.0;
        // Slack for rounding in f so that flat-but-optimal steps are not rejected.
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fx);
        bool accepted = false;
        double f_new = fx;
        for (int bt = 0; bt < opts.max_backtracks; ++bt) {
            for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + alpha * d[i];
            f_new = f(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= fx + opts.armijo_c1 * alpha * slope + slack) {
                accepted = true;
                break;
            }
            alpha *= opts.backtrack_shrink;
        }
        if (!accepted) {
            ++failures;
            if (failures >= opts.max_line_search_failures) break;
            reset_h();
            h_is_identity = true;
            continue;
        }

        for (std::size_t i = 0; i < n; ++i) {
            s[i] = x_new[i] - x[i];
            y[i] = g_new[i] - g[i];
        }
        res.last_step = norm(s);
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        if (res.last_step < opts.step_tolerance) {
            res.converged = true;
            ++it;
            break;
        }

        const double sy = dot(s, y);
        if (sy > 1e-300) {
            if (h_is_identity) {
                const double scale = sy / dot(y, y);
                for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
                h_is_identity = false;
            }
            for (std::size_t i = 0; i < n; ++i) {
                hy[i] = 0.0;
                for (std::size_t k = 0; k < n; ++k) hy[i] += h[i * n + k] * y[k];
            }
            const double yhy = dot(y, hy);
            const double rho = 1.0 / sy;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t k = 0; k < n; ++k) {
                    h[i * n + k] += (1.0 + yhy * rho) * rho * s[i] * s[k] - rho * (hy[i] * s[k] + s[i] * hy[k]);
                }
            }
        }
    }

    if (!res.converged && failures >= opts.max_line_search_failures) {
        Options nm = opts;
        nm.max_iterations = std::max(0, opts.max_iterations - it);
        nm.simplex_initial_step = std::min(opts.simplex_initial_step, 1e-3);
        auto value_only = [&](std::span<const double> p) {
            std::vector<double> scratch(n);
            return f(p, scratch);
        };
        Result simplex = minimize_nelder_mead(value_only, x, nm);
        if (simplex.value <= fx) {
            x = simplex.x;
            fx = f(x, g);
        }
        res.used_simplex = true;
        res.last_step = simplex.last_step;
        it += simplex.iterations;
        res.converged = simplex.converged || norm(g) < opts.gradient_tolerance;
    }

    res.x = std::move(x);
    res.value = fx;
    res.gradient_norm = norm(g);
    res.iterations = it;
    return res;
}

}  // namespace genrehawkes::optim
