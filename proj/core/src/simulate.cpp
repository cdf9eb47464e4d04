#include "genrehawkes/simulate.hpp"

#include "genrehawkes/parallel.hpp"
#include "genrehawkes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <stdexcept>

namespace genrehawkes {

namespace {

void check_config(const SimConfig& c) {
    if (!(std::isfinite(c.t_start) && std::isfinite(c.t_end) && c.t_end > c.t_start)) {
        throw std::invalid_argument("simulation window needs finite t_end > t_start");
    }
    for (std::size_t i = 0; i < c.history.size(); ++i) {
        if (!(c.history[i] <= c.t_start)) throw std::invalid_argument("simulation history must not follow t_start");
        if (i > 0 && c.history[i] < c.history[i - 1]) throw std::invalid_argument("simulation history is not sorted");
    }
}

}  // namespace

std::vector<double> simulate_hawkes(const HawkesParams& p, const SimConfig& config) {
    check_params(p);
    if (!p.subcritical()) throw std::invalid_argument("simulate_hawkes: branching ratio must be < 1");
    check_config(config);

    Philox4x32 rng(config.seed, config.stream);
    // excitation = sum_i exp(-omega (t - t_i)) over history and accepted events.
    double t = config.t_start;
    double excitation = 0.0;
    for (double h : config.history) excitation += std::exp(-p.omega * (t - h));

    std::vector<double> out;
    while (true) {
        // Intensity only decays until the next event, so its current value bounds the gap.
        const double bound = p.mu + p.beta * excitation;
        const double candidate = t + rng.exponential(bound);
        if (candidate > config.t_end) break;
        excitation *= std::exp(-p.omega * (candidate - t));
        t = candidate;
        const double lambda = p.mu + p.beta * excitation;
        if (rng.uniform() * bound <= lambda) {
            out.push_back(t);
            excitation += 1.0;
        }
    }
    return out;
}

std::vector<double> simulate_nhpp(const std::function<double(double)>& rate, double rate_bound,
                                  const SimConfig& config) {
    check_config(config);
    if (!(std::isfinite(rate_bound) && rate_bound >= 0.0)) throw std::invalid_argument("simulate_nhpp: bad rate bound");
    std::vector<double> out;
    if (rate_bound == 0.0) return out;
    Philox4x32 rng(config.seed, config.stream);
    double t = config.t_start;
    while (true) {
        t += rng.exponential(rate_bound);
        if (t > config.t_end) break;
        const double r = rate(t);
        if (!(r <= rate_bound * (1.0 + 1e-12))) {
            throw std::invalid_argument("simulate_nhpp: rate " + std::to_string(r) + " exceeds bound " +
                                        std::to_string(rate_bound) + " at t=" + std::to_string(t));
        }
        if (rng.uniform() * rate_bound < r) out.push_back(t);
    }
    return out;
}

namespace {

enum Substream : std::uint64_t { kTimes = 0, kLabels = 1, kPopularity = 2, kQuality = 3 };

double uploader_quality(std::uint64_t seed, const std::string& uploader, double sigma) {
    Philox4x32 rng(derive_seed(seed, stable_hash(uploader)), kQuality);
    std::normal_distribution<double> normal(0.0, sigma);
    return std::exp(normal(rng));
}

std::vector<Event> simulate_cluster(const ClusterSpec& spec, std::size_t index, double horizon, std::uint64_t seed,
                                    const CorpusOptions& opts) {
    const std::uint64_t cluster_seed = derive_seed(seed, index);
    SimConfig cfg;
    cfg.seed = cluster_seed;
    cfg.t_start = 0.0;
    cfg.t_end = horizon;
    cfg.stream = kTimes;
    const auto times = simulate_hawkes(spec.params, cfg);

    Philox4x32 label_rng(cluster_seed, kLabels);
    Philox4x32 pop_rng(cluster_seed, kPopularity);
    std::vector<Event> events;
    events.reserve(times.size());
    std::size_t uploader = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        Event e;
        char id[48];
        std::snprintf(id, sizeof id, "c%02zu-%06zu", index, k);
        e.video_id = id;
        e.upload_time = times[k];

        const bool sticky = k > 0 && label_rng.uniform() < spec.uploaders.stickiness;
        if (!sticky) {
            uploader = std::uniform_int_distribution<std::size_t>(0, spec.uploaders.pool.size() - 1)(label_rng);
        }
        e.uploader_id = spec.uploaders.pool[uploader];

        if (static_cast<std::int64_t>(k) < opts.link_eta) {
            e.tags = spec.tags;
        } else {
            e.tags.push_back(spec.tags.front());
            for (std::size_t t = 1; t < spec.tags.size(); ++t) {
                if (label_rng.uniform() < opts.extra_tag_probability) e.tags.push_back(spec.tags[t]);
            }
        }
        std::sort(e.tags.begin(), e.tags.end());

        const double q = uploader_quality(seed, e.uploader_id, spec.popularity.quality_sigma);
        e.n_views = std::poisson_distribution<std::int64_t>(spec.popularity.views_scale * q)(pop_rng);
        e.n_comments = std::poisson_distribution<std::int64_t>(spec.popularity.comments_scale * q)(pop_rng);
        events.push_back(std::move(e));
    }
    return events;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const std::vector<ClusterSpec>& spec, double horizon, std::uint64_t seed,
                                      const CorpusOptions& opts, unsigned threads) {
    if (!(horizon > 0.0)) throw std::invalid_argument("make_synthetic_corpus: horizon must be > 0");
    std::set<std::string> seen;
    for (const auto& c : spec) {
        if (c.tags.empty()) throw std::invalid_argument("make_synthetic_corpus: cluster with no tags");
        if (c.uploaders.pool.empty()) throw std::invalid_argument("make_synthetic_corpus: cluster with no uploaders");
        for (const auto& t : c.tags) {
            if (!seen.insert(t).second) {
                throw std::invalid_argument("make_synthetic_corpus: tag '" + t + "' is shared between clusters");
            }
        }
    }

    std::vector<std::vector<Event>> per_cluster(spec.size());
    parallel_for(spec.size(), threads,
                 [&](std::size_t i) { per_cluster[i] = simulate_cluster(spec[i], i, horizon, seed, opts); });

    SyntheticCorpus corpus;
    corpus.truth = spec;
    std::vector<Event> all;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        for (auto& e : per_cluster[i]) {
            corpus.labels.emplace(e.video_id, static_cast<int>(i));
            all.push_back(std::move(e));
        }
    }
    corpus.stream = EventStream(opts.origin_epoch, std::move(all), horizon);
    return corpus;
}

}  // namespace genrehawkes
