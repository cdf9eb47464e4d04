#include "genrehawkes/forecast.hpp"

#include "genrehawkes/baselines.hpp"
#include "genrehawkes/error.hpp"
#include "genrehawkes/parallel.hpp"
#include "genrehawkes/rng.hpp"
#include "genrehawkes/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace genrehawkes {

namespace {
constexpr double kBoundarySlack = 1e-9;
}

void check_split(const SplitSpec& spec, double stream_horizon) {
    if (!(spec.train_days > 0.0)) throw std::invalid_argument("split: train_days must be > 0");
    if (!(spec.horizon_days > 0.0)) throw std::invalid_argument("split: horizon_days must be > 0");
    const double split = spec.resolve_split(stream_horizon);
    if (!(split - spec.train_days >= -kBoundarySlack)) {
        throw std::invalid_argument("split: training window starts before the stream (split " + std::to_string(split) +
                                    ", train_days " + std::to_string(spec.train_days) + ")");
    }
    if (!(split + spec.horizon_days <= stream_horizon + kBoundarySlack)) {
        throw std::invalid_argument("split: test window ends after the stream horizon " +
                                    std::to_string(stream_horizon));
    }
}

Split split_stream(std::span<const double> times, const SplitSpec& spec, double stream_horizon) {
    check_split(spec, stream_horizon);
    Split s;
    s.split_point = spec.resolve_split(stream_horizon);
    s.window_start = std::max(0.0, s.split_point - spec.train_days);
    s.window_end = s.split_point + spec.horizon_days;
    const bool closed_at_origin = s.window_start <= 0.0;
    for (double t : times) {
        if ((t > s.window_start || (closed_at_origin && t >= 0.0)) && t <= s.split_point) {
            s.train.push_back(t);
        } else if (t > s.split_point && t <= s.window_end) {
            s.test.push_back(t);
        }
    }
    if (s.train.empty()) throw std::invalid_argument("split: empty training window");
    return s;
}

double expected_count(const HawkesParams& p, std::span<const double> history, double t, double dt) {
    check_params(p);
    if (!p.subcritical()) throw RefusedError("refused: supercritical");
    if (!(dt >= 0.0)) throw std::invalid_argument("expected_count: dt must be >= 0");
    double excitation = 0.0;
    for (double ti : history) {
        if (ti > t) throw std::invalid_argument("expected_count: history extends past t");
        excitation += std::exp(-p.omega * (t - ti));
    }
    return p.mu * dt + (p.beta / p.omega) * excitation * -std::expm1(-p.omega * dt);
}

McForecast mc_expected_count(const HawkesParams& p, std::span<const double> history, double t, double dt,
                             std::size_t n_samples, std::uint64_t seed, unsigned threads) {
    check_params(p);
    if (!p.subcritical()) throw RefusedError("refused: supercritical");
    if (n_samples < kMinMcSamples) {
        throw std::invalid_argument("mc_expected_count: need at least " + std::to_string(kMinMcSamples) + " samples");
    }
    if (!(dt >= 0.0)) throw std::invalid_argument("mc_expected_count: dt must be >= 0");
    if (dt == 0.0) return {};

    std::vector<double> counts(n_samples);
    const std::vector<double> hist(history.begin(), history.end());
    parallel_for(n_samples, threads, [&](std::size_t k) {
        SimConfig cfg;
        cfg.seed = seed;
        cfg.stream = k;
        cfg.t_start = t;
        cfg.t_end = t + dt;
        cfg.history = hist;
        counts[k] = static_cast<double>(simulate_hawkes(p, cfg).size());
    });

    McForecast out;
    for (double c : counts) out.mean += c;
    out.mean /= static_cast<double>(n_samples);
    double ss = 0.0;
    for (double c : counts) ss += (c - out.mean) * (c - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(n_samples - 1));
    out.std_error = out.std / std::sqrt(static_cast<double>(n_samples));
    return out;
}

const std::vector<std::string>& known_models() {
    static const std::vector<std::string> models = {model::hawkes,        model::hawkes_mc,  model::hawkes_global,
                                                    model::hawkes_global_mc, model::poisson, model::pc_nhpp,
                                                    model::nhpp_drift,    model::arima_lite};
    return models;
}

namespace {

struct ClusterWindow {
    std::vector<double> train;  // shifted so the window starts at 0
    std::vector<double> test;   // shifted likewise
    double train_length{0.0};
};

std::vector<double> shifted(const std::vector<double>& v, double by) {
    std::vector<double> out;
    out.reserve(v.size());
    for (double t : v) out.push_back(std::max(0.0, t - by));
    return out;
}

void finish(ForecastRow& row) {
    row.predicted = std::max(0.0, row.predicted);
    row.abs_error = std::abs(row.predicted - static_cast<double>(row.actual));
    row.rel_error = row.abs_error / std::max<double>(static_cast<double>(row.actual), 1.0);
}

void fail(ForecastRow& row, const std::string& status) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.status = status;
    row.predicted = row.abs_error = row.rel_error = nan;
    if (row.loglik == 0.0) row.loglik = row.aic = nan;
}

void take_fit(ForecastRow& row, const FitResult& fit) {
    row.loglik = fit.log_likelihood;
    row.aic = fit.aic;
}

// Hawkes log-likelihood of the test window given the training history.
double heldout(const HawkesParams& p, const ClusterWindow& w, double horizon) {
    std::vector<double> all = w.train;
    all.insert(all.end(), w.test.begin(), w.test.end());
    return window_log_likelihood(p, all, w.train_length, w.train_length + horizon);
}

}  // namespace

ComparisonTable evaluate_all(const std::vector<GenreCluster>& clusters, const SplitSpec& spec,
                             const std::vector<std::string>& models, const EvaluationOptions& opts) {
    for (const auto& m : models) {
        if (std::find(known_models().begin(), known_models().end(), m) == known_models().end()) {
            throw std::invalid_argument("evaluate_all: unknown model '" + m + "'");
        }
    }
    ComparisonTable table;
    if (models.empty()) return table;

    double stream_horizon = 0.0;
    for (const auto& c : clusters) stream_horizon = std::max(stream_horizon, c.events.horizon());
    check_split(spec, stream_horizon);

    std::vector<const GenreCluster*> included;
    std::vector<ClusterWindow> windows;
    for (const auto& c : clusters) {
        try {
            const Split s = split_stream(c.events.times(), spec, stream_horizon);
            ClusterWindow w;
            w.train = shifted(s.train, s.window_start);
            w.test = shifted(s.test, s.window_start);
            w.train_length = s.split_point - s.window_start;
            included.push_back(&c);
            windows.push_back(std::move(w));
        } catch (const std::invalid_argument& e) {
            table.excluded.push_back({c.cluster_id, e.what()});
        }
    }
    const double horizon = spec.horizon_days;
    auto wants = [&](const char* m) { return std::find(models.begin(), models.end(), m) != models.end(); };

    // Pooled "no cluster" model, shared by every cluster row.
    struct Global {
        std::optional<FitResult> fit;
        std::string error;
        double pooled_n{0.0};
        double literal{0.0};
        McForecast mc;
        std::vector<double> mark_loglik;  // per included cluster
    } global;
    if ((wants(model::hawkes_global) || wants(model::hawkes_global_mc)) && !included.empty()) {
        std::vector<std::pair<double, std::size_t>> pooled;  // (time, cluster slot)
        std::vector<double> pooled_train;
        for (std::size_t k = 0; k < windows.size(); ++k) {
            for (double t : windows[k].train) pooled.emplace_back(t, k);
            for (double t : windows[k].test) pooled.emplace_back(t, k);
            pooled_train.insert(pooled_train.end(), windows[k].train.begin(), windows[k].train.end());
        }
        std::stable_sort(pooled.begin(), pooled.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::sort(pooled_train.begin(), pooled_train.end());
        global.pooled_n = static_cast<double>(pooled_train.size());
        const double train_length = windows.front().train_length;
        try {
            FitResult fit = fit_hawkes(pooled_train, train_length);
            fit.model = model::hawkes_global;
            const HawkesParams p = hawkes_params(fit);
            global.fit = fit;
            if (p.subcritical()) {
                global.literal = expected_count(p, pooled_train, train_length, horizon);
                if (wants(model::hawkes_global_mc)) {
                    global.mc = mc_expected_count(p, pooled_train, train_length, horizon, opts.mc_samples,
                                                  derive_seed(opts.seed, 0xC1A55E5ull), opts.threads);
                }
            }
            // Marked decomposition of the pooled held-out likelihood:
            // cluster c sees intensity share_c * lambda(t).
            std::vector<double> all_times;
            for (const auto& [t, k] : pooled) all_times.push_back(t);
            global.mark_loglik.assign(windows.size(), 0.0);
            const double compensated =
                compensator(p, all_times, train_length + horizon) - compensator(p, all_times, train_length);
            double a = 0.0;
            for (std::size_t i = 0; i < pooled.size(); ++i) {
                if (i > 0) a = std::exp(-p.omega * (pooled[i].first - pooled[i - 1].first)) * (a + 1.0);
                if (pooled[i].first > train_length) {
                    const std::size_t k = pooled[i].second;
                    const double share = static_cast<double>(windows[k].train.size()) / global.pooled_n;
                    global.mark_loglik[k] += std::log(share * (p.mu + p.beta * a));
                }
            }
            for (std::size_t k = 0; k < windows.size(); ++k) {
                const double share = static_cast<double>(windows[k].train.size()) / global.pooled_n;
                global.mark_loglik[k] -= share * compensated;
            }
        } catch (const std::exception& e) {
            global.error = e.what();
        }
    }

    std::vector<std::vector<ForecastRow>> per_cluster(included.size());
    parallel_for(included.size(), opts.threads, [&](std::size_t k) {
        const GenreCluster& cluster = *included[k];
        const ClusterWindow& w = windows[k];
        const double T = w.train_length;
        std::optional<FitResult> hawkes_fit;
        std::string hawkes_error;
        if (wants(model::hawkes) || wants(model::hawkes_mc)) {
            try {
                hawkes_fit = fit_hawkes(w.train, T);
            } catch (const std::exception& e) {
                hawkes_error = e.what();
            }
        }

        for (const auto& m : models) {
            ForecastRow row;
            row.cluster_id = cluster.cluster_id;
            row.model = m;
            row.train_days = spec.train_days;
            row.horizon_days = horizon;
            row.actual = static_cast<std::int64_t>(w.test.size());
            try {
                if (m == model::hawkes || m == model::hawkes_mc) {
                    if (!hawkes_fit) throw std::runtime_error(hawkes_error);
                    take_fit(row, *hawkes_fit);
                    const HawkesParams p = hawkes_params(*hawkes_fit);
                    row.test_loglik = heldout(p, w, horizon);
                    if (!p.subcritical()) {
                        fail(row, "refused: supercritical");
                        row.loglik = hawkes_fit->log_likelihood;
                        row.aic = hawkes_fit->aic;
                        per_cluster[k].push_back(std::move(row));
                        continue;
                    }
                    if (m == model::hawkes) {
                        row.predicted = expected_count(p, w.train, T, horizon);
                    } else {
                        const auto mc = mc_expected_count(p, w.train, T, horizon, opts.mc_samples,
                                                          derive_seed(opts.seed, static_cast<std::uint64_t>(cluster.cluster_id)));
                        row.predicted = mc.mean;
                        row.mc_std = mc.std;
                    }
                } else if (m == model::hawkes_global || m == model::hawkes_global_mc) {
                    if (!global.fit) throw std::runtime_error(global.error);
                    take_fit(row, *global.fit);
                    row.test_loglik = global.mark_loglik[k];
                    if (!hawkes_params(*global.fit).subcritical()) {
                        fail(row, "refused: supercritical");
                        row.loglik = global.fit->log_likelihood;
                        row.aic = global.fit->aic;
                        per_cluster[k].push_back(std::move(row));
                        continue;
                    }
                    const double share = static_cast<double>(w.train.size()) / global.pooled_n;
                    if (m == model::hawkes_global) {
                        row.predicted = share * global.literal;
                    } else {
                        row.predicted = share * global.mc.mean;
                        row.mc_std = share * global.mc.std;
                    }
                } else if (m == model::poisson) {
                    const FitResult fit = fit_poisson(w.train, T);
                    take_fit(row, fit);
                    row.predicted = fit.params[0] * horizon;
                } else if (m == model::pc_nhpp) {
                    PCNHPPParams pc;
                    const FitResult fit = fit_pc_nhpp(w.train, T, opts.bin_width, &pc);
                    take_fit(row, fit);
                    // Average fitted rate over the final bin_width days, held flat.
                    const double tail = std::min(opts.bin_width, T);
                    row.predicted = pc.integrated_rate(T - tail, T) / tail * horizon;
                } else if (m == model::nhpp_drift) {
                    const FitResult fit = fit_nhpp_drift(w.train, T);
                    take_fit(row, fit);
                    row.predicted = drift_params(fit).integrated_rate(T, T + horizon);
                } else if (m == model::arima_lite) {
                    const auto days = static_cast<std::size_t>(std::floor(T + kBoundarySlack));
                    const auto counts = daily_counts(w.train, 0.0, days);
                    const ArimaFit fit = fit_arima_lite(counts);
                    take_fit(row, fit.fit);
                    const auto steps = static_cast<std::size_t>(std::lround(horizon));
                    double total = 0.0;
                    for (double v : arima_forecast(fit.params, counts, steps)) total += v;
                    row.predicted = total;
                }
                finish(row);
            } catch (const RefusedError& e) {
                fail(row, e.what());
            } catch (const std::exception& e) {
                fail(row, std::string("error: ") + e.what());
            }
            per_cluster[k].push_back(std::move(row));
        }
    });

    for (auto& rows : per_cluster) {
        for (auto& r : rows) table.rows.push_back(std::move(r));
    }
    for (const auto& m : models) {
        ModelSummary s;
        s.model = m;
        for (const auto& r : table.rows) {
            if (r.model != m || !r.ok()) continue;
            ++s.n_ok;
            s.mean_abs_error += r.abs_error;
            s.mean_rel_error += r.rel_error;
        }
        if (s.n_ok) {
            s.mean_abs_error /= static_cast<double>(s.n_ok);
            s.mean_rel_error /= static_cast<double>(s.n_ok);
        } else {
            s.mean_abs_error = s.mean_rel_error = std::numeric_limits<double>::quiet_NaN();
        }
        table.summary.push_back(s);
    }
    return table;
}

std::vector<AicDifference> aic_differences(const ComparisonTable& table, const std::string& model_a,
                                           const std::string& model_b) {
    std::map<int, const ForecastRow*> a, b;
    for (const auto& r : table.rows) {
        if (!std::isfinite(r.aic)) continue;
        if (r.model == model_a) a[r.cluster_id] = &r;
        if (r.model == model_b) b[r.cluster_id] = &r;
    }
    std::vector<AicDifference> out;
    for (const auto& [id, ra] : a) {
        auto it = b.find(id);
        if (it == b.end()) continue;
        out.push_back({id, ra->aic, it->second->aic, ra->aic - it->second->aic});
    }
    return out;
}

}  // namespace genrehawkes
