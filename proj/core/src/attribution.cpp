#include "genrehawkes/attribution.hpp"

#include "genrehawkes/error.hpp"
#include "genrehawkes/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace genrehawkes {

double triggering_probability(const HawkesParams& p, std::span<const double> times, std::size_t i, std::size_t j) {
    check_params(p);
    if (!(i < j)) throw std::invalid_argument("triggering_probability: need i < j");
    if (j >= times.size()) throw std::invalid_argument("triggering_probability: index out of range");
    double excitation = 0.0;
    for (std::size_t k = 0; k < j; ++k) excitation += std::exp(-p.omega * (times[j] - times[k]));
    const double lambda = p.mu + p.beta * excitation;
    return p.beta * std::exp(-p.omega * (times[j] - times[i])) / lambda;
}

PopularityIndex::PopularityIndex(const EventStream& stream, double w_comments, PopularityAverage mode)
    : w_comments_(w_comments), mode_(mode) {
    if (!(std::isfinite(w_comments) && w_comments >= 0.0)) {
        throw std::invalid_argument("PopularityIndex: w_comments must be finite and >= 0");
    }
    struct Running {
        double sum{0.0};
        std::size_t count{0};
    };
    std::unordered_map<std::string, Running> by_uploader;
    entries_.reserve(stream.size());
    for (const auto& e : stream.events()) {
        const double psi = static_cast<double>(e.n_views) + w_comments * static_cast<double>(e.n_comments);
        auto& run = by_uploader[e.uploader_id];
        const double prior = run.count ? run.sum / static_cast<double>(run.count) : 0.0;
        entries_[e.video_id] = Entry{psi, prior};
        run.sum += psi;
        ++run.count;
    }
    if (mode == PopularityAverage::all_time) {
        for (const auto& e : stream.events()) {
            const auto& run = by_uploader.at(e.uploader_id);
            entries_[e.video_id].threshold = run.sum / static_cast<double>(run.count);
        }
    }
}

const PopularityIndex::Entry& PopularityIndex::at(const std::string& video_id) const {
    auto it = entries_.find(video_id);
    if (it == entries_.end()) throw Error("PopularityIndex: unknown video '" + video_id + "'");
    return it->second;
}

double PopularityIndex::psi(const std::string& video_id) const { return at(video_id).psi; }
double PopularityIndex::threshold(const std::string& video_id) const { return at(video_id).threshold; }

PairScores accumulate_pair_scores(const GenreCluster& cluster, const HawkesParams& p,
                                  const PopularityIndex* popularity) {
    check_params(p);
    const auto events = cluster.events.events();
    const std::size_t n = events.size();
    std::vector<double> psi, thr;
    if (popularity) {
        psi.reserve(n);
        thr.reserve(n);
        for (const auto& e : events) {
            psi.push_back(popularity->psi(e.video_id));
            thr.push_back(popularity->threshold(e.video_id));
        }
    }

    PairScores out;
    double a = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        const double tj = events[j].upload_time;
        a = std::exp(-p.omega * (tj - events[j - 1].upload_time)) * (a + 1.0);
        const double lambda = p.mu + p.beta * a;
        out.total += p.beta * a / lambda;
        for (std::size_t i = j; i-- > 0;) {
            const double lag = p.omega * (tj - events[i].upload_time);
            if (lag > kPairCutoff) break;
            const double pij = p.beta * std::exp(-lag) / lambda;
            ++out.n_pairs;
            if (events[i].uploader_id == events[j].uploader_id) out.same_uploader += pij;
            if (popularity && psi[i] > thr[j]) out.popular += pij;
        }
    }
    return out;
}

namespace {

void require_endogenous(const GenreCluster& cluster, const HawkesParams& p) {
    check_params(p);
    if (cluster.events.size() < 2 || p.beta == 0.0) throw Error("no endogenous mass to attribute");
}

}  // namespace

double self_score(const GenreCluster& cluster, const HawkesParams& p) {
    require_endogenous(cluster, p);
    const auto s = accumulate_pair_scores(cluster, p, nullptr);
    if (!(s.total > 0.0)) throw Error("no endogenous mass to attribute");
    return s.same_uploader / s.total;
}

double pop_score(const GenreCluster& cluster, const HawkesParams& p, const PopularityIndex& popularity) {
    require_endogenous(cluster, p);
    const auto s = accumulate_pair_scores(cluster, p, &popularity);
    if (!(s.total > 0.0)) throw Error("no endogenous mass to attribute");
    return s.popular / s.total;
}

std::vector<AttributionReport> attribution_report(const std::vector<GenreCluster>& clusters,
                                                  const std::map<int, FitResult>& fits,
                                                  const PopularityIndex& popularity, unsigned threads) {
    for (const auto& c : clusters) {
        if (!fits.count(c.cluster_id)) {
            throw Error("attribution_report: no fit for cluster " + std::to_string(c.cluster_id));
        }
    }
    std::vector<AttributionReport> out(clusters.size());
    parallel_for(clusters.size(), threads, [&](std::size_t k) {
        const auto& cluster = clusters[k];
        const auto& fit = fits.at(cluster.cluster_id);
        AttributionReport r;
        r.cluster_id = cluster.cluster_id;
        r.w_comments = popularity.w_comments();
        if (!fit.converged) {
            r.reason = "not attributable: fit did not converge";
        } else {
            const HawkesParams p = hawkes_params(fit);
            if (cluster.events.size() < 2 || p.beta == 0.0) {
                r.reason = "not attributable: no endogenous mass to attribute";
            } else {
                const auto s = accumulate_pair_scores(cluster, p, &popularity);
                if (!(s.total > 0.0)) {
                    r.reason = "not attributable: no endogenous mass to attribute";
                } else {
                    r.attributable = true;
                    r.s_self = s.same_uploader / s.total;
                    r.s_pop = s.popular / s.total;
                    r.s_exo = exo_score(r.s_self, r.s_pop);
                    r.n_pairs_evaluated = s.n_pairs;
                    r.negative_exo = r.s_exo < 0.0;
                }
            }
        }
        out[k] = std::move(r);
    });
    return out;
}

}  // namespace genrehawkes
